//! Butterworth design as second-order sections and forward–backward filtering.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::UniformSignal;

/// Pass band in Hz. `low_hz == 0` means low-pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandSpec {
    pub fn new(low_hz: f64, high_hz: f64) -> Result<Self> {
        let band = Self { low_hz, high_hz };
        if !(low_hz >= 0.0 && high_hz > low_hz && high_hz.is_finite()) {
            return Err(band.invalid("need 0 <= low < high"));
        }
        Ok(band)
    }

    pub fn lowpass(cutoff_hz: f64) -> Result<Self> {
        Self::new(0.0, cutoff_hz)
    }

    pub fn check_rate(&self, rate: f64) -> Result<()> {
        if self.high_hz >= rate / 2.0 {
            return Err(self.invalid(&format!("upper edge reaches Nyquist of {rate} Hz")));
        }
        Ok(())
    }

    fn invalid(&self, reason: &str) -> Error {
        Error::InvalidBand {
            low_hz: self.low_hz,
            high_hz: self.high_hz,
            reason: reason.to_string(),
        }
    }
}

/// Cascade of biquads, each `[b0, b1, b2, a1, a2]` with `a0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<[f64; 5]>,
}

/// Default prototype order; forward–backward application doubles it.
pub const DEFAULT_ORDER: usize = 4;

/// Digital Butterworth low-pass or band-pass of prototype order `order`,
/// via bilinear transform with pre-warped edges.
pub fn butterworth(order: usize, band: BandSpec, rate: f64) -> Result<Sos> {
    if order == 0 {
        return Err(band.invalid("filter order must be at least 1"));
    }
    band.check_rate(rate)?;
    let nyq = rate / 2.0;
    // internal sampling frequency of 2, so the bilinear constant is 2 * fs = 4
    let warp = |f: f64| 4.0 * (PI * f / nyq / 2.0).tan();

    let proto: Vec<Complex64> = (0..order)
        .map(|k| {
            let m = -(order as f64) + 1.0 + 2.0 * k as f64;
            -Complex64::from_polar(1.0, PI * m / (2.0 * order as f64))
        })
        .collect();

    let (poles, n_zeros_at_origin, gain) = if band.low_hz == 0.0 {
        let wc = warp(band.high_hz);
        (
            proto.iter().map(|p| p * wc).collect::<Vec<_>>(),
            0usize,
            wc.powi(order as i32),
        )
    } else {
        let w1 = warp(band.low_hz);
        let w2 = warp(band.high_hz);
        let bw = w2 - w1;
        let w0sq = w1 * w2;
        let mut poles = Vec::with_capacity(2 * order);
        for p in &proto {
            let pl = p * (bw / 2.0);
            let disc = (pl * pl - w0sq).sqrt();
            poles.push(pl + disc);
            poles.push(pl - disc);
        }
        (poles, order, bw.powi(order as i32))
    };

    let fs2 = Complex64::new(4.0, 0.0);
    let mut num = Complex64::new(1.0, 0.0);
    for _ in 0..n_zeros_at_origin {
        num *= fs2;
    }
    let mut den = Complex64::new(1.0, 0.0);
    for p in &poles {
        den *= fs2 - p;
    }
    let k_digital = gain * (num / den).re;
    let zpoles: Vec<Complex64> = poles.iter().map(|p| (fs2 + p) / (fs2 - p)).collect();

    let mut sections = pair_poles(&zpoles);
    // numerators: band-pass sections carry one zero at +1 and one at -1,
    // low-pass sections carry their zeros at -1
    let is_band = n_zeros_at_origin > 0;
    for s in sections.iter_mut() {
        let first_order = s[4] == 0.0 && s[3] != 0.0 && s[2] == 0.0;
        if is_band {
            s[0] = 1.0;
            s[1] = 0.0;
            s[2] = -1.0;
        } else if first_order {
            s[0] = 1.0;
            s[1] = 1.0;
            s[2] = 0.0;
        } else {
            s[0] = 1.0;
            s[1] = 2.0;
            s[2] = 1.0;
        }
    }
    if let Some(first) = sections.first_mut() {
        first[0] *= k_digital;
        first[1] *= k_digital;
        first[2] *= k_digital;
    }
    Ok(Sos { sections })
}

/// Groups conjugate pairs into biquads; a leftover real pole gets a first-order section.
fn pair_poles(poles: &[Complex64]) -> Vec<[f64; 5]> {
    let tol = 1e-10;
    let mut complex: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > tol).collect();
    let mut real: Vec<f64> = poles.iter().filter(|p| p.im.abs() <= tol).map(|p| p.re).collect();
    complex.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    real.sort_by(f64::total_cmp);

    let mut out = Vec::new();
    for p in complex {
        out.push([0.0, 0.0, 0.0, -2.0 * p.re, p.norm_sqr()]);
    }
    let mut it = real.chunks(2);
    for chunk in &mut it {
        match chunk {
            [a, b] => out.push([0.0, 0.0, 0.0, -(a + b), a * b]),
            [a] => out.push([0.0, 0.0, 0.0, -a, 0.0]),
            _ => unreachable!(),
        }
    }
    out
}

impl Sos {
    /// Magnitude response at `f` Hz for sampling rate `rate`.
    pub fn magnitude(&self, f: f64, rate: f64) -> f64 {
        let w = 2.0 * PI * f / rate;
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        self.sections
            .iter()
            .map(|s| {
                let num = s[0] + z1 * s[1] + z2 * s[2];
                let den = 1.0 + z1 * s[3] + z2 * s[4];
                (num / den).norm()
            })
            .product()
    }

    /// Steady-state section states for a unit step input.
    fn step_state(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let [b0, b1, b2, a1, a2] = *s;
                let g = (b0 + b1 + b2) / (1.0 + a1 + a2);
                let z2 = b2 - a2 * g;
                let z1 = b1 - a1 * g + z2;
                let st = [scale * z1, scale * z2];
                scale *= g;
                st
            })
            .collect()
    }

    /// Causal filtering (transposed direct form II) from the given initial states.
    fn run(&self, x: &mut [f64], mut state: Vec<[f64; 2]>) {
        for v in x.iter_mut() {
            let mut u = *v;
            for (s, z) in self.sections.iter().zip(state.iter_mut()) {
                let y = s[0] * u + z[0];
                z[0] = s[1] * u - s[3] * y + z[1];
                z[1] = s[2] * u - s[4] * y;
                u = y;
            }
            *v = u;
        }
    }

    /// Zero-phase filtering: odd-extend by `pad` samples, run forward and
    /// backward from step-matched initial states, trim.
    pub fn filtfilt(&self, x: &[f64], pad: usize) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let pad = pad.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        let zi = self.step_state();
        let scaled = |x0: f64| zi.iter().map(|z| [z[0] * x0, z[1] * x0]).collect();
        let x0 = ext[0];
        self.run(&mut ext, scaled(x0));
        ext.reverse();
        let y0 = ext[0];
        self.run(&mut ext, scaled(y0));
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Edge padding for forward–backward filtering: the larger of three times the
/// section count rule and one period of the lowest band edge.
pub fn edge_pad(sos: &Sos, band: BandSpec, rate: f64) -> usize {
    let classic = 3 * (2 * sos.sections.len() + 1);
    let edge = if band.low_hz > 0.0 {
        band.low_hz
    } else {
        band.high_hz
    };
    classic.max((rate / edge).round() as usize)
}

/// Zero-phase Butterworth band-pass (or low-pass when `low_hz == 0`).
pub fn bandpass(sig: &UniformSignal, band: BandSpec) -> Result<UniformSignal> {
    bandpass_order(sig, band, DEFAULT_ORDER)
}

pub fn bandpass_order(sig: &UniformSignal, band: BandSpec, order: usize) -> Result<UniformSignal> {
    let sos = butterworth(order, band, sig.rate)?;
    let pad = edge_pad(&sos, band, sig.rate);
    Ok(sig.with_samples(sos.filtfilt(&sig.samples, pad)))
}
