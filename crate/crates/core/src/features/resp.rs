use crate::beats::BeatSeries;
use crate::error::{Error, Result};
use crate::model::UniformSignal;
use crate::stats::{mean, median, std_dev};

use super::cardiac::tachogram;
use super::hrv;
use super::{power, ratio, FeatureConfig, FeatureVector};

const BASE: [&str; 9] = [
    "mean",
    "std",
    "diff_mean",
    "rate",
    "bb_mean",
    "bb_median",
    "log_energy_diff",
    "centroid",
    "power_0_240",
];

const EXTENDED: [&str; 13] = [
    "CVSD", "RMSSD", "ApEn", "CVBB", "HF", "LF", "LFHF", "MCVBB", "MadBB", "SD1", "SDBB", "SDSD",
    "RVT",
];

const LOG_EPS: f64 = 1e-12;

pub fn respiratory_feature_names(extended: bool) -> Vec<String> {
    let mut v: Vec<String> = BASE.iter().map(|s| s.to_string()).collect();
    if extended {
        v.extend(EXTENDED.iter().map(|s| s.to_string()));
    }
    v
}

/// Waveform, spectral and breath-to-breath (BB) indices.
pub fn respiratory_features(
    resp: &UniformSignal,
    cycles: &BeatSeries,
    extended: bool,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    let peaks = cycles.event_times();
    if peaks.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "respiratory features need at least 3 cycles, got {}",
            peaks.len()
        )));
    }
    let x = &resp.samples;
    let bb = hrv::successive_diffs(peaks);
    let sd = std_dev(x, 0);
    // spectral shape is meaningless on a flat waveform
    let psd = if sd > 0.0 { cfg.psd(resp).ok() } else { None };
    let band = |lo: f64, hi: f64| psd.as_ref().and_then(|p| power(p, lo, hi));
    let first_bin = psd.as_ref().map_or(0.0, |p| p.freqs_hz.get(1).copied().unwrap_or(0.0));

    let mut f = FeatureVector::new();
    f.push_value("mean", mean(x));
    f.push_value("std", sd);
    f.push_value(
        "diff_mean",
        mean(&hrv::successive_diffs(x)) * resp.rate,
    );
    f.push_value("rate", 60.0 / mean(&bb));
    f.push_value("bb_mean", mean(&bb));
    f.push_value("bb_median", median(&bb));
    let slow = band(0.05, 0.25).filter(|v| *v > 0.0);
    let fast = band(0.25, 5.0);
    f.push(
        "log_energy_diff",
        slow.zip(fast).map(|(s, q)| s.ln() - (q + LOG_EPS).ln()),
    );
    f.push("centroid", psd.as_ref().and_then(|p| p.centroid()));
    f.push("power_0_240", band(first_bin, 2.4));

    if extended {
        let ends = &peaks[1..];
        let bb_psd = if bb.len() >= 2 {
            tachogram(ends, &bb, cfg.tachogram_rate_hz)
                .ok()
                .and_then(|t| cfg.psd(&t).ok())
        } else {
            None
        };
        let bp = |lo, hi| bb_psd.as_ref().and_then(|p| power(p, lo, hi));
        let lf = bp(0.04, 0.15);
        let hf = bp(0.15, 0.4);
        let sdbb = hrv::sdnn(&bb);
        let enough = bb.len() >= 2;
        let when = |ok: bool, v: f64| ok.then_some(v);
        f.push("CVSD", when(enough, hrv::cvsd(&bb)));
        f.push("RMSSD", when(enough, hrv::rmssd(&bb)));
        f.push("ApEn", hrv::apen(&bb, 2, 0.2 * sdbb));
        f.push("CVBB", when(enough, hrv::cvnn(&bb)));
        f.push("HF", hf);
        f.push("LF", lf);
        f.push("LFHF", ratio(lf, hf));
        f.push("MCVBB", ratio(Some(hrv::mad_nn(&bb)), Some(median(&bb))));
        f.push_value("MadBB", hrv::mad_nn(&bb));
        f.push("SD1", when(enough, hrv::sd1(&bb)));
        f.push("SDBB", when(enough, sdbb));
        f.push("SDSD", when(bb.len() >= 3, hrv::sdsd(&bb)));
        f.push("RVT", rvt(resp, peaks).and_then(|a| ratio(Some(a), Some(mean(&bb)))));
    }
    debug_assert_eq!(f.names, respiratory_feature_names(extended));
    Ok(f)
}

/// Mean peak-to-trough amplitude over consecutive breath peaks.
fn rvt(resp: &UniformSignal, peaks: &[f64]) -> Option<f64> {
    let idx = |t: f64| (((t - resp.start_time) * resp.rate).round().max(0.0) as usize).min(resp.len() - 1);
    let amps: Vec<f64> = peaks
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (idx(w[0]), idx(w[1]));
            (b > a).then(|| {
                let trough = resp.samples[a..=b].iter().cloned().fold(f64::MAX, f64::min);
                resp.samples[a] - trough
            })
        })
        .collect();
    (!amps.is_empty()).then(|| mean(&amps))
}
