use crate::beats::peaks::{local_maxima, prominences, suppress_by_distance};
use crate::dsp::{bandpass, BandSpec};
use crate::error::{Error, Result};
use crate::model::UniformSignal;
use crate::stats::{mad, mean, variance};

use super::{power, FeatureConfig, FeatureVector};

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

const EDA: [&str; 11] = [
    "mean",
    "deriv_mean",
    "decay_rate",
    "neg_fraction",
    "minima_count",
    "rise_time",
    "power_0_240",
    "scsr_zcr",
    "scvsr_zcr",
    "scsr_peak",
    "scvsr_peak",
];
const SKT: [&str; 4] = ["mean", "deriv_mean", "power_000_010", "power_010_020"];
const EMG: [&str; 3] = ["energy", "mean", "var"];
const EOG: [&str; 4] = ["energy", "mean", "var", "blink_rate"];

pub fn eda_feature_names() -> Vec<String> {
    names(&EDA)
}
pub fn skt_feature_names() -> Vec<String> {
    names(&SKT)
}
pub fn emg_feature_names() -> Vec<String> {
    names(&EMG)
}
pub fn eog_feature_names() -> Vec<String> {
    names(&EOG)
}

/// First differences in units per second.
fn derivative(sig: &UniformSignal) -> Vec<f64> {
    sig.samples.windows(2).map(|w| (w[1] - w[0]) * sig.rate).collect()
}

fn require_samples(sig: &UniformSignal, n: usize, what: &str) -> Result<()> {
    if sig.len() < n {
        return Err(Error::InsufficientData(format!(
            "{what} needs at least {n} samples, got {}",
            sig.len()
        )));
    }
    Ok(())
}

/// Zero-crossing rate (per second) and mean lobe magnitude of a low-passed,
/// mean-removed copy.
fn slow_response(sig: &UniformSignal, cutoff: f64) -> (Option<f64>, Option<f64>) {
    let m = mean(&sig.samples);
    let centred = sig.with_samples(sig.samples.iter().map(|v| v - m).collect());
    let Ok(y) = BandSpec::lowpass(cutoff).and_then(|b| bandpass(&centred, b)) else {
        return (None, None);
    };
    let y = &y.samples;
    let crossings: Vec<usize> = (1..y.len())
        .filter(|&i| (y[i - 1] < 0.0) != (y[i] < 0.0))
        .collect();
    let zcr = crossings.len() as f64 / sig.duration();
    let lobes: Vec<f64> = crossings
        .windows(2)
        .map(|w| y[w[0]..w[1]].iter().fold(0.0f64, |a, v| a.max(v.abs())))
        .collect();
    let peak = (!lobes.is_empty()).then(|| mean(&lobes));
    (Some(zcr), peak)
}

pub fn eda_features(eda: &UniformSignal, cfg: &FeatureConfig) -> Result<FeatureVector> {
    if eda.duration() < 20.0 {
        return Err(Error::InsufficientData(format!(
            "EDA features need 20 s, got {:.3} s",
            eda.duration()
        )));
    }
    let d = derivative(eda);
    let neg: Vec<f64> = d.iter().copied().filter(|v| *v < 0.0).collect();
    let inverted: Vec<f64> = eda.samples.iter().map(|v| -v).collect();
    let mut rises = Vec::new();
    let mut run = 0usize;
    for v in d.iter().chain(std::iter::once(&0.0)) {
        if *v > 0.0 {
            run += 1;
        } else if run > 0 {
            rises.push(run as f64 / eda.rate);
            run = 0;
        }
    }
    let psd = cfg.psd(eda).ok();
    let band = psd.as_ref().and_then(|p| {
        let lo = p.freqs_hz.get(1).copied()?;
        power(p, lo, 2.4)
    });
    let (scsr_zcr, scsr_peak) = slow_response(eda, cfg.scsr_cutoff_hz);
    let (scvsr_zcr, scvsr_peak) = slow_response(eda, cfg.scvsr_cutoff_hz);

    let mut f = FeatureVector::new();
    f.push_value("mean", mean(&eda.samples));
    f.push_value("deriv_mean", mean(&d));
    f.push("decay_rate", (!neg.is_empty()).then(|| mean(&neg)));
    f.push_value("neg_fraction", neg.len() as f64 / d.len() as f64);
    f.push_value("minima_count", local_maxima(&inverted).len() as f64);
    f.push("rise_time", (!rises.is_empty()).then(|| mean(&rises)));
    f.push("power_0_240", band);
    f.push("scsr_zcr", scsr_zcr);
    f.push("scvsr_zcr", scvsr_zcr);
    f.push("scsr_peak", scsr_peak);
    f.push("scvsr_peak", scvsr_peak);
    Ok(f)
}

pub fn skt_features(skt: &UniformSignal, cfg: &FeatureConfig) -> Result<FeatureVector> {
    require_samples(skt, 2, "SKT features")?;
    let psd = cfg.psd(skt).ok();
    let band = |lo, hi| psd.as_ref().and_then(|p| power(p, lo, hi));
    let mut f = FeatureVector::new();
    f.push_value("mean", mean(&skt.samples));
    f.push_value("deriv_mean", mean(&derivative(skt)));
    f.push("power_000_010", band(0.0, 0.1));
    f.push("power_010_020", band(0.1, 0.2));
    Ok(f)
}

fn emg_like(x: &[f64]) -> FeatureVector {
    let mut f = FeatureVector::new();
    f.push_value("energy", x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64);
    f.push_value("mean", mean(x));
    f.push_value("var", variance(x, 0));
    f
}

pub fn emg_features(emg: &UniformSignal) -> Result<FeatureVector> {
    require_samples(emg, 1, "EMG features")?;
    Ok(emg_like(&emg.samples))
}

pub fn eog_features(eog: &UniformSignal, cfg: &FeatureConfig) -> Result<FeatureVector> {
    require_samples(eog, 1, "EOG features")?;
    let mut f = emg_like(&eog.samples);
    let blinks = count_blinks(eog, cfg);
    f.push_value("blink_rate", blinks as f64 / (eog.duration() / 60.0));
    Ok(f)
}

/// Peaks whose prominence clears both a multiple of the local MAD and an
/// absolute floor, thinned by a refractory distance.
fn count_blinks(eog: &UniformSignal, cfg: &FeatureConfig) -> usize {
    let x = &eog.samples;
    let span = (cfg.blink_mad_span_s * eog.rate).round() as usize;
    let cand = local_maxima(x);
    let prom = prominences(x, &cand);
    let strong: Vec<usize> = cand
        .iter()
        .zip(&prom)
        .filter(|(&p, &pr)| {
            if pr < cfg.blink_min_prominence {
                return false;
            }
            let lo = p.saturating_sub(span);
            let hi = (p + span + 1).min(x.len());
            pr > cfg.blink_mad_factor * mad(&x[lo..hi])
        })
        .map(|(&p, _)| p)
        .collect();
    suppress_by_distance(x, &strong, (cfg.blink_refractory_s * eog.rate).round() as usize).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    fn cfg() -> FeatureConfig {
        FeatureConfig::default()
    }

    #[test]
    fn eda_decreasing_ramp() {
        let sig = UniformSignal::from_fn(32.0, 60.0, |t| 10.0 - 0.05 * t);
        let f = eda_features(&sig, &cfg()).unwrap();
        assert_eq!(f.get("neg_fraction"), Some(1.0));
        assert_eq!(f.get("minima_count"), Some(0.0));
        assert_eq!(f.get("rise_time"), None);
        assert!(f.get("decay_rate").unwrap() < 0.0);
    }

    #[test]
    fn eda_slow_response_crossings() {
        let sig = UniformSignal::from_fn(32.0, 100.0, |t| (2.0 * PI * 0.1 * t).sin());
        let f = eda_features(&sig, &cfg()).unwrap();
        let zcr = f.get("scsr_zcr").unwrap();
        assert!((zcr - 0.2).abs() < 0.02, "{zcr}");
    }

    #[test]
    fn eda_constant() {
        let sig = UniformSignal::new(vec![3.0; 32 * 30], 32.0);
        let f = eda_features(&sig, &cfg()).unwrap();
        assert_eq!(f.get("mean"), Some(3.0));
        assert_eq!(f.get("deriv_mean"), Some(0.0));
        assert_eq!(f.get("neg_fraction"), Some(0.0));
        assert_eq!(f.get("decay_rate"), None);
        assert_eq!(f.get("rise_time"), None);
        assert_eq!(f.get("scsr_zcr"), Some(0.0));
        assert_eq!(f.get("scsr_peak"), None);
    }

    #[test]
    fn eda_decay_rate_non_positive() {
        let sig = UniformSignal::from_fn(32.0, 40.0, |t| (0.7 * t).sin() + 0.1 * t);
        let f = eda_features(&sig, &cfg()).unwrap();
        assert!(f.get("decay_rate").unwrap() <= 0.0);
    }

    #[test]
    fn skt_cases() {
        let f = skt_features(&UniformSignal::new(vec![33.0; 8 * 60], 8.0), &cfg()).unwrap();
        assert_eq!(f.get("mean"), Some(33.0));
        assert_eq!(f.get("deriv_mean"), Some(0.0));
        assert!(f.get("power_000_010").unwrap().abs() < 1e-20);
        let f = skt_features(&UniformSignal::from_fn(8.0, 60.0, |t| 32.0 + 0.01 * t), &cfg()).unwrap();
        assert!((f.get("deriv_mean").unwrap() - 0.01).abs() < 1e-6);
        let f = skt_features(&UniformSignal::from_fn(8.0, 120.0, |t| 32.0 + 0.2 * (2.0 * PI * 0.05 * t).sin()), &cfg()).unwrap();
        assert!(f.get("power_000_010").unwrap() / f.get("power_010_020").unwrap() > 10.0);
    }

    #[test]
    fn emg_cases() {
        let f = emg_features(&UniformSignal::new(vec![0.0; 128], 128.0)).unwrap();
        assert_eq!(f.values, vec![Some(0.0); 3]);
        let sig = UniformSignal::from_fn(128.0, 10.0, |t| (2.0 * PI * 20.0 * t).sin());
        let f = emg_features(&sig).unwrap();
        assert!((f.get("energy").unwrap() - 0.5).abs() < 0.005);
        let k = 3.0;
        let g = emg_features(&sig.with_samples(sig.samples.iter().map(|v| v * k).collect())).unwrap();
        for name in ["energy", "var"] {
            assert!((g.get(name).unwrap() - k * k * f.get(name).unwrap()).abs() < 1e-9);
        }
    }

    fn blink(t: f64, at: f64) -> f64 {
        let d = (t - at) / 0.08;
        200.0 * (-0.5 * d * d).exp()
    }

    #[test]
    fn blink_rate_counts_templates() {
        let times: Vec<f64> = (0..12).map(|k| 2.5 + 4.8 * k as f64 + 0.3 * (k % 3) as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 5.0).unwrap();
        let sig = UniformSignal::from_fn(128.0, 60.0, |t| times.iter().map(|&a| blink(t, a)).sum());
        let noisy = sig.with_samples(sig.samples.iter().map(|v| v + noise.sample(&mut rng)).collect());
        let f = eog_features(&noisy, &cfg()).unwrap();
        assert!((f.get("blink_rate").unwrap() - 12.0).abs() <= 1.0);
    }

    #[test]
    fn blink_free_noise_and_zero() {
        // band-limited noise scaled to 10 % of the template peak
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let white: Vec<f64> = (0..128 * 60).map(|_| Normal::new(0.0, 1.0).unwrap().sample(&mut rng)).collect();
        let band = bandpass(&UniformSignal::new(white, 128.0), BandSpec::new(4.0, 40.0).unwrap()).unwrap();
        let peak = band.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scaled = band.with_samples(band.samples.iter().map(|v| v * 20.0 / peak).collect());
        assert_eq!(eog_features(&scaled, &cfg()).unwrap().get("blink_rate"), Some(0.0));
        let f = eog_features(&UniformSignal::new(vec![0.0; 128 * 10], 128.0), &cfg()).unwrap();
        assert_eq!(f.get("blink_rate"), Some(0.0));
        assert_eq!(f.get("energy"), Some(0.0));
    }
}
