use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::UniformSignal;

use super::filter::BandSpec;

/// One-sided power spectral density, units²/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub freqs_hz: Vec<f64>,
    pub density: Vec<f64>,
}

impl PowerSpectrum {
    pub fn nyquist(&self) -> f64 {
        *self.freqs_hz.last().unwrap_or(&0.0)
    }

    pub fn total_power(&self) -> f64 {
        self.cumulative(self.nyquist())
    }

    /// Integral of the linear interpolant of the density from 0 to `f`.
    fn cumulative(&self, f: f64) -> f64 {
        let fs = &self.freqs_hz;
        let d = &self.density;
        let mut acc = 0.0;
        for k in 0..fs.len().saturating_sub(1) {
            let (f0, f1) = (fs[k], fs[k + 1]);
            if f <= f0 {
                break;
            }
            if f >= f1 {
                acc += 0.5 * (d[k] + d[k + 1]) * (f1 - f0);
            } else {
                let df = f - f0;
                let dv = d[k] + (d[k + 1] - d[k]) * df / (f1 - f0);
                acc += 0.5 * (d[k] + dv) * df;
                break;
            }
        }
        acc
    }

    /// Frequency-weighted mean of the density.
    pub fn centroid(&self) -> Option<f64> {
        let total: f64 = self.density.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let w: f64 = self.freqs_hz.iter().zip(&self.density).map(|(f, p)| f * p).sum();
        Some(w / total)
    }

    pub fn peak_frequency(&self) -> Option<f64> {
        self.density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, _)| self.freqs_hz[i])
    }
}

/// Welch estimator settings: periodic Hann window, mean removed per segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub overlap: f64,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            segment_len: 256,
            overlap: 0.5,
        }
    }
}

impl WelchConfig {
    pub fn psd(&self, sig: &UniformSignal) -> Result<PowerSpectrum> {
        welch_psd(sig, self.segment_len, self.overlap)
    }
}

/// Averaged modified periodogram. A segment longer than the signal falls back
/// to one full-length segment.
pub fn welch_psd(sig: &UniformSignal, segment_len: usize, overlap_fraction: f64) -> Result<PowerSpectrum> {
    let n = sig.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "spectrum needs at least 2 samples, got {n}"
        )));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::Config(format!(
            "overlap fraction {overlap_fraction} must be in [0, 1)"
        )));
    }
    let seg = segment_len.clamp(2, n);
    let step = ((seg as f64 * (1.0 - overlap_fraction)).round() as usize).max(1);
    let window: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos())
        .collect();
    let wss: f64 = window.iter().map(|w| w * w).sum();
    let n_bins = seg / 2 + 1;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);
    let mut acc = vec![0.0; n_bins];
    let mut count = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    let mut start = 0;
    while start + seg <= n {
        let chunk = &sig.samples[start..start + seg];
        let mean = chunk.iter().sum::<f64>() / seg as f64;
        for ((b, x), w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = Complex64::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += step;
    }
    let scale = 1.0 / (sig.rate * wss * count as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let one_sided = if k == 0 || (seg % 2 == 0 && k == seg / 2) { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    let freqs_hz = (0..n_bins).map(|k| k as f64 * sig.rate / seg as f64).collect();
    Ok(PowerSpectrum { freqs_hz, density })
}

/// Trapezoidal integral of the density over the band; exactly additive over
/// adjacent bands.
pub fn band_power(psd: &PowerSpectrum, band: BandSpec) -> Result<f64> {
    let top = psd.nyquist();
    if band.high_hz > top * (1.0 + 1e-12) {
        return Err(Error::InvalidBand {
            low_hz: band.low_hz,
            high_hz: band.high_hz,
            reason: format!("spectrum ends at {top} Hz"),
        });
    }
    Ok((psd.cumulative(band.high_hz) - psd.cumulative(band.low_hz)).max(0.0))
}
