use std::fmt;

use crate::features::Scenario;

use super::signal::{first_non_increasing, Channel, ChannelData};
use super::trial::{Flavor, TrialRecord};

#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    MissingChannel(Channel),
    ZeroLength(Channel),
    NonFinite { channel: Channel, index: usize },
    NonMonotone { channel: Channel, index: usize },
    UnsupportedScenario(String),
}

impl Finding {
    pub fn channel(&self) -> Option<Channel> {
        match self {
            Finding::MissingChannel(c) | Finding::ZeroLength(c) => Some(*c),
            Finding::NonFinite { channel, .. } | Finding::NonMonotone { channel, .. } => {
                Some(*channel)
            }
            Finding::UnsupportedScenario(_) => None,
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::MissingChannel(c) => write!(f, "missing channel {c}"),
            Finding::ZeroLength(c) => write!(f, "channel {c} has no samples"),
            Finding::NonFinite { channel, index } => {
                write!(f, "channel {channel} has a non-finite value at index {index}")
            }
            Finding::NonMonotone { channel, index } => {
                write!(f, "channel {channel} timestamps not increasing at index {index}")
            }
            Finding::UnsupportedScenario(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Checks the ingested channels a scenario needs. Never mutates the trial.
pub fn validate_trial(trial: &TrialRecord, scenario: &Scenario, flavor: Flavor) -> ValidationReport {
    match scenario.required_channels(flavor) {
        Ok(required) => validate_channels(trial, &required),
        Err(e) => ValidationReport {
            findings: vec![Finding::UnsupportedScenario(e.to_string())],
        },
    }
}

pub fn validate_channels(trial: &TrialRecord, required: &[Channel]) -> ValidationReport {
    let mut findings = Vec::new();
    for &ch in required {
        let Some(data) = trial.channels.get(&ch) else {
            findings.push(Finding::MissingChannel(ch));
            continue;
        };
        if data.is_empty() {
            findings.push(Finding::ZeroLength(ch));
            continue;
        }
        if let Some(index) = data.values().iter().position(|v| !v.is_finite()) {
            findings.push(Finding::NonFinite { channel: ch, index });
        }
        if let ChannelData::Irregular(s) = data {
            if let Some(index) = s.timestamps().iter().position(|t| !t.is_finite()) {
                findings.push(Finding::NonFinite { channel: ch, index });
            } else if let Some(index) = first_non_increasing(s.timestamps()) {
                findings.push(Finding::NonMonotone { channel: ch, index });
            }
        }
    }
    ValidationReport { findings }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::model::{IrregularSignal, SamRatings, UniformSignal};

    fn trial(channels: &[Channel]) -> TrialRecord {
        let mut map = BTreeMap::new();
        for &c in channels {
            let data = if c == Channel::AccZ {
                ChannelData::Irregular(
                    IrregularSignal::new(vec![0.0, 0.01, 0.02], vec![1.0, 1.0, 1.0]).unwrap(),
                )
            } else {
                ChannelData::Uniform(UniformSignal::new(vec![0.5; 16], 8.0))
            };
            map.insert(c, data);
        }
        TrialRecord {
            subject_id: "1".into(),
            video_id: "1".into(),
            channels: map,
            ratings: SamRatings::new(5.0, 5.0).unwrap(),
            faulty: false,
        }
    }

    fn all_wearable() -> Vec<Channel> {
        vec![Channel::Ecg, Channel::Bvp, Channel::AccZ, Channel::Rsp, Channel::Eda, Channel::Skt]
    }

    #[test]
    fn clean_trial_has_empty_report() {
        let t = trial(&all_wearable());
        for s in Scenario::wearable_grid() {
            assert!(validate_trial(&t, &s, Flavor::EmoWearLike).is_clean(), "{s}");
        }
    }

    #[test]
    fn missing_eda_is_one_finding() {
        let mut chans = all_wearable();
        chans.retain(|c| *c != Channel::Eda);
        let t = trial(&chans);
        let s: Scenario = "ECG+all".parse().unwrap();
        let r = validate_trial(&t, &s, Flavor::EmoWearLike);
        assert_eq!(r.findings, vec![Finding::MissingChannel(Channel::Eda)]);
        // cardio-respiratory set does not need EDA
        let s: Scenario = "ECG+RSP".parse().unwrap();
        assert!(validate_trial(&t, &s, Flavor::EmoWearLike).is_clean());
    }

    #[test]
    fn nan_in_ecg_names_channel_and_index() {
        let mut t = trial(&all_wearable());
        if let Some(ChannelData::Uniform(s)) = t.channels.get_mut(&Channel::Ecg) {
            s.samples[3] = f64::NAN;
            s.samples[7] = f64::NAN;
        }
        let before = t.clone();
        let s: Scenario = "ECG+RSP".parse().unwrap();
        let r = validate_trial(&t, &s, Flavor::EmoWearLike);
        assert_eq!(
            r.findings,
            vec![Finding::NonFinite {
                channel: Channel::Ecg,
                index: 3
            }]
        );
        assert_eq!(format!("{t:?}"), format!("{before:?}"));
    }

    #[test]
    fn non_monotone_and_zero_length() {
        let mut t = trial(&all_wearable());
        t.channels.insert(
            Channel::AccZ,
            ChannelData::Irregular(IrregularSignal::new_unchecked(
                vec![0.0, 0.02, 0.01],
                vec![1.0, 1.0, 1.0],
            )),
        );
        t.channels
            .insert(Channel::Rsp, ChannelData::Uniform(UniformSignal::new(vec![], 25.0)));
        let s: Scenario = "SCG+RSP".parse().unwrap();
        let r = validate_trial(&t, &s, Flavor::EmoWearLike);
        assert_eq!(
            r.findings,
            vec![
                Finding::NonMonotone {
                    channel: Channel::AccZ,
                    index: 2
                },
                Finding::ZeroLength(Channel::Rsp),
            ]
        );
    }
}
