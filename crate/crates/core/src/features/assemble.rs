use crate::beats::{
    build_ibi, derive_adr, derive_scg, detect_ao_peaks, detect_breath_cycles, detect_bvp_peaks,
    detect_r_peaks, BeatSeries,
};
use crate::dsp::{bandpass, moving_average_detrend, resample_uniform, BandSpec};
use crate::error::{Error, Result};
use crate::model::{Channel, ChannelData, Flavor, TrialRecord, UniformSignal};
use crate::stats::median;

use super::cardiac::{cardiac_feature_names, cardiac_features};
use super::peripheral::*;
use super::resp::{respiratory_feature_names, respiratory_features};
use super::{FeatureConfig, FeatureVector, Scenario};

fn is_cardiac(ch: Channel) -> bool {
    matches!(ch, Channel::Ecg | Channel::Bvp | Channel::Scg)
}

fn extended_for(ch: Channel, flavor: Flavor, cfg: &FeatureConfig) -> bool {
    cfg.extended && flavor != Flavor::DeapLike && (is_cardiac(ch) || matches!(ch, Channel::Rsp | Channel::Adr))
}

/// Unprefixed feature names a channel contributes.
pub fn channel_feature_names(ch: Channel, flavor: Flavor, cfg: &FeatureConfig) -> Vec<String> {
    let ext = extended_for(ch, flavor, cfg);
    match ch {
        Channel::Ecg | Channel::Bvp | Channel::Scg => cardiac_feature_names(ext),
        Channel::Rsp | Channel::Adr => respiratory_feature_names(ext),
        Channel::Eda => eda_feature_names(),
        Channel::Skt => skt_feature_names(),
        Channel::Emg => emg_feature_names(),
        Channel::Eog => eog_feature_names(),
        Channel::AccZ => Vec::new(),
    }
}

fn uniform(trial: &TrialRecord, ch: Channel) -> Result<UniformSignal> {
    match trial.channel(ch)? {
        ChannelData::Uniform(s) => Ok(s.clone()),
        ChannelData::Irregular(s) => {
            let dt: Vec<f64> = s.timestamps().windows(2).map(|w| w[1] - w[0]).collect();
            if dt.is_empty() {
                return Err(Error::InsufficientData(format!("channel {ch} has one sample")));
            }
            resample_uniform(s, 1.0 / median(&dt))
        }
    }
}

fn acc_z(trial: &TrialRecord) -> Result<crate::model::IrregularSignal> {
    Ok(trial.channel(Channel::AccZ)?.to_irregular())
}

/// Features of one channel. Detector and estimator failures become missing
/// values; only a missing input channel is an error.
pub fn channel_features(
    trial: &TrialRecord,
    ch: Channel,
    flavor: Flavor,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    trial.channel(ch.source())?;
    let names = channel_feature_names(ch, flavor, cfg);
    let ext = extended_for(ch, flavor, cfg);
    let det = &cfg.detectors;
    let computed: Result<FeatureVector> = (|| match ch {
        Channel::Ecg | Channel::Bvp | Channel::Scg => {
            let beats: BeatSeries = match ch {
                Channel::Ecg => detect_r_peaks(&uniform(trial, ch)?, det)?,
                Channel::Bvp => detect_bvp_peaks(&uniform(trial, ch)?, det)?,
                _ => detect_ao_peaks(&derive_scg(&acc_z(trial)?)?, det)?,
            };
            let ibi = build_ibi(&beats, det.ibi_window)?;
            cardiac_features(&ibi, ext, cfg)
        }
        Channel::Rsp | Channel::Adr => {
            let wave = if ch == Channel::Rsp {
                bandpass(&uniform(trial, ch)?, BandSpec::new(0.15, 0.35)?)?
            } else {
                derive_adr(&acc_z(trial)?, det)?
            };
            let cycles = detect_breath_cycles(&wave, det)?;
            respiratory_features(&wave, &cycles, ext, cfg)
        }
        Channel::Eda => eda_features(&moving_average_detrend(&uniform(trial, ch)?, cfg.detrend_window), cfg),
        Channel::Skt => skt_features(&uniform(trial, ch)?, cfg),
        Channel::Emg => emg_features(&bandpass(&uniform(trial, ch)?, BandSpec::new(4.0, 40.0)?)?),
        Channel::Eog => eog_features(&bandpass(&uniform(trial, ch)?, BandSpec::new(4.0, 40.0)?)?, cfg),
        Channel::AccZ => Ok(FeatureVector::new()),
    })();
    match computed {
        Ok(f) => Ok(f),
        Err(Error::MissingChannel(c)) => Err(Error::MissingChannel(c)),
        Err(_) => Ok(FeatureVector::missing(names)),
    }
}

/// Concatenated channel features for a scenario, names prefixed `channel.`.
pub fn assemble_features(
    trial: &TrialRecord,
    scenario: &Scenario,
    flavor: Flavor,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    let mut out = FeatureVector::new();
    for ch in scenario.feature_channels(flavor)? {
        out.extend_prefixed(ch.prefix(), channel_features(trial, ch, flavor, cfg)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

    use super::*;
    use crate::model::{IrregularSignal, SamRatings};

    fn wave(rate: f64, secs: f64, f: impl Fn(f64) -> f64) -> ChannelData {
        ChannelData::Uniform(UniformSignal::from_fn(rate, secs, f))
    }

    fn heartbeat(t: f64) -> f64 {
        let d = t - (t / 0.9).round() * 0.9;
        (-(d * d) / (2.0 * 0.03f64.powi(2))).exp() * (2.0 * PI * 15.0 * d).cos()
    }

    fn trial(flavor: Flavor) -> TrialRecord {
        let secs = 60.0;
        let mut c = BTreeMap::new();
        let qrs = |t: f64| (1.0 - (t - (t / 0.9).round() * 0.9).abs() / 0.04).max(0.0);
        let pulse = |t: f64| {
            let d = t - (t / 0.9).round() * 0.9;
            if d.abs() < 0.2 { 0.5 * (1.0 + (PI * d / 0.2).cos()) } else { 0.0 }
        };
        let breath = |t: f64| (2.0 * PI * 0.25 * t).sin();
        let rate = if flavor == Flavor::DeapLike { 128.0 } else { 25.0 };
        c.insert(Channel::Bvp, wave(128.0, secs, pulse));
        c.insert(Channel::Rsp, wave(rate, secs, breath));
        c.insert(Channel::Eda, wave(if flavor == Flavor::DeapLike { 128.0 } else { 32.0 }, secs, |t| 5.0 + (0.3 * t).sin()));
        c.insert(Channel::Skt, wave(if flavor == Flavor::DeapLike { 128.0 } else { 8.0 }, secs, |t| 33.0 + 0.001 * t));
        if flavor == Flavor::DeapLike {
            c.insert(Channel::Emg, wave(128.0, secs, |t| (2.0 * PI * 20.0 * t).sin()));
            c.insert(Channel::Eog, wave(128.0, secs, |t| (2.0 * PI * 10.0 * t).sin()));
        } else {
            c.insert(Channel::Ecg, wave(250.0, secs, qrs));
            let ts: Vec<f64> = (0..6000).map(|i| i as f64 / 100.0).collect();
            let vs = ts.iter().map(|&t| heartbeat(t) + 0.5 * breath(t)).collect();
            c.insert(Channel::AccZ, ChannelData::Irregular(IrregularSignal::new(ts, vs).unwrap()));
        }
        TrialRecord {
            subject_id: "1".into(),
            video_id: "1".into(),
            channels: c,
            ratings: SamRatings::new(6.0, 4.0).unwrap(),
            faulty: false,
        }
    }

    #[test]
    fn scg_adr_prefixes() {
        let s: Scenario = "SCG+ADR".parse().unwrap();
        let f = assemble_features(&trial(Flavor::EmoWearLike), &s, Flavor::EmoWearLike, &FeatureConfig::default()).unwrap();
        assert!(f.names.iter().all(|n| n.starts_with("scg.") || n.starts_with("adr.")));
        assert_eq!(f.len(), 33 + 22);
        let hr = f.get("scg.hr_mean").unwrap();
        assert!((hr - 60.0 / 0.9).abs() < 1.0, "{hr}");
        assert!((f.get("adr.rate").unwrap() - 15.0).abs() < 0.75);
    }

    #[test]
    fn lab_replication_channels() {
        let f = assemble_features(
            &trial(Flavor::DeapLike),
            &Scenario::replication(),
            Flavor::DeapLike,
            &FeatureConfig::default(),
        )
        .unwrap();
        for p in ["bvp.", "rsp.", "eda.", "skt.", "emg.", "eog."] {
            assert!(f.names.iter().any(|n| n.starts_with(p)), "{p}");
        }
        assert_eq!(f.len(), 13 + 9 + 11 + 4 + 3 + 4);
        assert!(!f.contains("bvp.RMSSD"));
    }

    #[test]
    fn deterministic_and_names_unique() {
        let cfg = FeatureConfig::default();
        for s in Scenario::wearable_grid() {
            let a = assemble_features(&trial(Flavor::EmoWearLike), &s, Flavor::EmoWearLike, &cfg).unwrap();
            let b = assemble_features(&trial(Flavor::EmoWearLike), &s, Flavor::EmoWearLike, &cfg).unwrap();
            assert_eq!(format!("{a:?}"), format!("{b:?}"));
            let mut names = a.names.clone();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), a.len());
        }
    }

    #[test]
    fn missing_channel_is_error_and_failed_detector_is_missing() {
        let mut t = trial(Flavor::EmoWearLike);
        t.channels.remove(&Channel::Eda);
        let s: Scenario = "ECG+all".parse().unwrap();
        assert!(matches!(
            assemble_features(&t, &s, Flavor::EmoWearLike, &FeatureConfig::default()),
            Err(Error::MissingChannel(Channel::Eda))
        ));
        let mut t = trial(Flavor::EmoWearLike);
        t.channels.insert(Channel::Ecg, wave(250.0, 60.0, |_| 0.0));
        let f = channel_features(&t, Channel::Ecg, Flavor::EmoWearLike, &FeatureConfig::default()).unwrap();
        assert_eq!(f.len(), 33);
        assert!(f.values.iter().all(|v| v.is_none()));
    }
}
