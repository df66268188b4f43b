use crate::beats::IbiSeries;
use crate::dsp::{resample_uniform, PowerSpectrum};
use crate::error::{Error, Result};
use crate::model::{IrregularSignal, UniformSignal};
use crate::stats::{mean, median, percentile, std_dev};

use super::hrv;
use super::{positive_ln, power, ratio, FeatureConfig, FeatureVector};

const BASE: [&str; 13] = [
    "ibi_mean",
    "ibi_std",
    "hr_mean",
    "hr_std",
    "dibi_mean",
    "dibi_std",
    "lf_hf",
    "ibi_power_010_020",
    "ibi_power_020_030",
    "ibi_power_030_040",
    "dibi_power_001_008",
    "dibi_power_008_015",
    "dibi_power_015_050",
];

const EXTENDED: [&str; 20] = [
    "CVNN", "CVSD", "HFn", "HTI", "IQRNN", "LFn", "LnHF", "MCVNN", "MadNN", "MaxNN", "MedianNN",
    "MinNN", "Prc20NN", "Prc80NN", "RMSSD", "SDRMSSD", "TINN", "TP", "pNN20", "pNN50",
];

pub fn cardiac_feature_names(extended: bool) -> Vec<String> {
    let mut v: Vec<String> = BASE.iter().map(|s| s.to_string()).collect();
    if extended {
        v.extend(EXTENDED.iter().map(|s| s.to_string()));
    }
    v
}

/// Linear interpolation of `values` placed at `times` onto a uniform grid.
pub(crate) fn tachogram(times: &[f64], values: &[f64], rate: f64) -> Result<UniformSignal> {
    resample_uniform(&IrregularSignal::new(times.to_vec(), values.to_vec())?, rate)
}

fn psd_of(times: &[f64], values: &[f64], cfg: &FeatureConfig) -> Option<PowerSpectrum> {
    let tach = tachogram(times, values, cfg.tachogram_rate_hz).ok()?;
    cfg.psd(&tach).ok()
}

/// Time- and frequency-domain indices of an IBI series.
pub fn cardiac_features(ibi: &IbiSeries, extended: bool, cfg: &FeatureConfig) -> Result<FeatureVector> {
    let x = &ibi.intervals;
    if x.len() < 4 {
        return Err(Error::InsufficientBeats(format!(
            "cardiac features need at least 4 intervals, got {}",
            x.len()
        )));
    }
    // each interval is stamped at the beat that closes it
    let ends: Vec<f64> = ibi.onset_times.iter().zip(x).map(|(t, v)| t + v).collect();
    let hr: Vec<f64> = x.iter().map(|v| 60.0 / v).collect();
    let diffs = hrv::successive_diffs(x);
    let dmean = if cfg.absolute_ibi_derivative {
        mean(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>())
    } else {
        mean(&diffs)
    };

    let tach = psd_of(&ends, x, cfg);
    let deriv = psd_of(&ends[1..], &diffs, cfg);
    let tp = |lo, hi| tach.as_ref().and_then(|p| power(p, lo, hi));
    let dp = |lo, hi| deriv.as_ref().and_then(|p| power(p, lo, hi));
    let lf = tp(0.04, 0.15);
    let hf = tp(0.15, 0.5);

    let mut f = FeatureVector::new();
    f.push_value("ibi_mean", mean(x));
    f.push_value("ibi_std", std_dev(x, 1));
    f.push_value("hr_mean", mean(&hr));
    f.push_value("hr_std", std_dev(&hr, 1));
    f.push_value("dibi_mean", dmean);
    f.push_value("dibi_std", std_dev(&diffs, 1));
    f.push("lf_hf", ratio(lf, hf));
    f.push("ibi_power_010_020", tp(0.1, 0.2));
    f.push("ibi_power_020_030", tp(0.2, 0.3));
    f.push("ibi_power_030_040", tp(0.3, 0.4));
    f.push("dibi_power_001_008", dp(0.01, 0.08));
    f.push("dibi_power_008_015", dp(0.08, 0.15));
    f.push("dibi_power_015_050", dp(0.15, 0.5));
    if extended {
        let lf_hf_sum = match (lf, hf) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        let rmssd = hrv::rmssd(x);
        f.push_value("CVNN", hrv::cvnn(x));
        f.push_value("CVSD", hrv::cvsd(x));
        f.push("HFn", ratio(hf, lf_hf_sum));
        f.push_value("HTI", hrv::hti(x));
        f.push_value("IQRNN", hrv::iqr(x));
        f.push("LFn", ratio(lf, lf_hf_sum));
        f.push("LnHF", positive_ln(hf));
        f.push_value("MCVNN", hrv::mcv_nn(x));
        f.push_value("MadNN", hrv::mad_nn(x));
        f.push_value("MaxNN", x.iter().cloned().fold(f64::MIN, f64::max));
        f.push_value("MedianNN", median(x));
        f.push_value("MinNN", x.iter().cloned().fold(f64::MAX, f64::min));
        f.push_value("Prc20NN", percentile(x, 20.0));
        f.push_value("Prc80NN", percentile(x, 80.0));
        f.push_value("RMSSD", rmssd);
        f.push("SDRMSSD", ratio(Some(hrv::sdnn(x)), Some(rmssd)));
        f.push_value("TINN", hrv::tinn(x));
        f.push("TP", tp(0.0, 0.5));
        f.push_value("pNN20", hrv::pnn(x, 0.020));
        f.push_value("pNN50", hrv::pnn(x, 0.050));
    }
    debug_assert_eq!(f.names, cardiac_feature_names(extended));
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> FeatureConfig {
        FeatureConfig::default()
    }

    #[test]
    fn constant_series() {
        let f = cardiac_features(&IbiSeries::from_intervals(vec![1.0; 60]), true, &cfg()).unwrap();
        assert_eq!(f.get("ibi_mean"), Some(1.0));
        assert_eq!(f.get("ibi_std"), Some(0.0));
        assert_eq!(f.get("hr_mean"), Some(60.0));
        assert_eq!(f.get("RMSSD"), Some(0.0));
        assert_eq!(f.get("pNN50"), Some(0.0));
        assert_eq!(f.get("SDRMSSD"), None);
        assert_eq!(f.get("lf_hf"), None);
        assert_eq!(f.len(), 33);
    }

    #[test]
    fn alternating_series() {
        let x: Vec<f64> = (0..60).map(|i| if i % 2 == 0 { 0.8 } else { 1.2 }).collect();
        let f = cardiac_features(&IbiSeries::from_intervals(x), true, &cfg()).unwrap();
        assert!((f.get("RMSSD").unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(f.get("pNN50"), Some(100.0));
        assert!((f.get("ibi_mean").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modulated_tachogram_puts_power_in_band() {
        // beats placed so the interval series follows 1 + 0.05 sin(2π 0.25 t)
        let mut t = 0.0;
        let mut x = Vec::new();
        while t < 120.0 {
            let v = 1.0 + 0.05 * (2.0 * PI * 0.25 * t).sin();
            x.push(v);
            t += v;
        }
        let f = cardiac_features(&IbiSeries::from_intervals(x), false, &cfg()).unwrap();
        let hi = f.get("ibi_power_020_030").unwrap();
        let lo = f.get("ibi_power_010_020").unwrap();
        assert!(hi / lo > 10.0, "{hi} / {lo}");
        assert_eq!(f.len(), 13);
    }

    #[test]
    fn too_few_intervals() {
        assert!(matches!(
            cardiac_features(&IbiSeries::from_intervals(vec![1.0; 3]), true, &cfg()),
            Err(Error::InsufficientBeats(_))
        ));
    }

    #[test]
    fn scale_behaviour() {
        let x: Vec<f64> = (0..50).map(|i| 0.8 + 0.1 * ((i * 7 % 11) as f64 / 11.0)).collect();
        let k = 1000.0;
        let y: Vec<f64> = x.iter().map(|v| v * k).collect();
        assert_eq!(hrv::pnn(&x, 0.05), hrv::pnn(&y, 0.05 * k));
        assert!((hrv::cvnn(&x) - hrv::cvnn(&y)).abs() < 1e-12);
        assert!((mean(&y) - k * mean(&x)).abs() < 1e-9);
    }
}
