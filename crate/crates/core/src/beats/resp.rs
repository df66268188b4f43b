use crate::dsp::{bandpass, moving_average_detrend, resample_uniform, BandSpec};
use crate::error::{Error, Result};
use crate::model::{IrregularSignal, UniformSignal};

use super::peaks::suppress_by_distance;
use super::{finish, BeatKind, BeatSeries, DetectorConfig, SCG_RATE_HZ};

/// Respiratory band of the chest acceleration with its slow baseline removed.
pub fn derive_adr(acc_z: &IrregularSignal, cfg: &DetectorConfig) -> Result<UniformSignal> {
    if acc_z.duration() < 20.0 {
        return Err(Error::InsufficientData(format!(
            "ADR needs at least 20 s of acceleration, got {:.3} s",
            acc_z.duration()
        )));
    }
    let uniform = resample_uniform(acc_z, SCG_RATE_HZ)?;
    let band = bandpass(&uniform, BandSpec::new(0.15, 0.35)?)?;
    let window = (cfg.adr_baseline_window_s * SCG_RATE_HZ).round() as usize;
    Ok(moving_average_detrend(&band, window))
}

/// Inhalation peaks: the maximum between each upward zero crossing of the
/// mean-removed waveform and the following downward crossing.
pub fn detect_breath_cycles(resp: &UniformSignal, cfg: &DetectorConfig) -> Result<BeatSeries> {
    let n = resp.len();
    let mean = resp.samples.iter().sum::<f64>() / n.max(1) as f64;
    let x: Vec<f64> = resp.samples.iter().map(|v| v - mean).collect();
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut candidates = Vec::new();
    if scale > 0.0 {
        let mut up = None;
        for i in 1..n {
            if x[i - 1] < 0.0 && x[i] >= 0.0 {
                up = Some(i);
            } else if x[i - 1] >= 0.0 && x[i] < 0.0 {
                if let Some(s) = up.take() {
                    let peak = (s..i)
                        .max_by(|&a, &b| x[a].total_cmp(&x[b]).then(b.cmp(&a)))
                        .expect("non-empty lobe");
                    if peak > 0 && peak + 1 < n && x[peak] > 0.0 {
                        candidates.push(peak);
                    }
                }
            }
        }
    }
    let min_dist = (0.8 / cfg.breath_max_rate_hz * resp.rate).round() as usize;
    let peaks = suppress_by_distance(&x, &candidates, min_dist);
    finish(resp, &x, &peaks, BeatKind::BreathPeak, "breath", candidates.len())
}
