use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::UniformSignal;

/// Magnitude of the FFT analytic signal.
pub fn hilbert_envelope(sig: &UniformSignal) -> Result<UniformSignal> {
    let n = sig.len();
    if n < 8 {
        return Err(Error::InsufficientData(format!(
            "envelope needs at least 8 samples, got {n}"
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = sig.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    // one-sided spectrum: keep DC (and Nyquist for even n), double positive bins
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let w = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *c *= w;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(sig.with_samples(buf.iter().map(|c| c.norm() * scale).collect()))
}
