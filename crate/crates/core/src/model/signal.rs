use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Evenly sampled series. `start_time` is trial-relative, in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSignal {
    pub samples: Vec<f64>,
    pub rate: f64,
    pub start_time: f64,
}

impl UniformSignal {
    pub fn new(samples: Vec<f64>, rate: f64) -> Self {
        Self::with_start(samples, rate, 0.0)
    }

    pub fn with_start(samples: Vec<f64>, rate: f64, start_time: f64) -> Self {
        assert!(rate > 0.0 && rate.is_finite(), "sampling rate must be positive");
        Self {
            samples,
            rate,
            start_time,
        }
    }

    /// Samples `f(t)` on `[0, duration)`.
    pub fn from_fn(rate: f64, duration: f64, f: impl Fn(f64) -> f64) -> Self {
        let n = (duration * rate).round() as usize;
        Self::new((0..n).map(|i| f(i as f64 / rate)).collect(), rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.start_time + index as f64 / self.rate
    }

    pub fn end_time(&self) -> f64 {
        self.time_at(self.samples.len().saturating_sub(1))
    }

    /// Same timing, different samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            rate: self.rate,
            start_time: self.start_time,
        }
    }
}

/// Irregularly sampled series with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct IrregularSignal {
    timestamps: Vec<f64>,
    values: Vec<f64>,
}

impl IrregularSignal {
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::InsufficientData(format!(
                "{} timestamps but {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if let Some(i) = first_non_increasing(&timestamps) {
            return Err(Error::InsufficientData(format!(
                "timestamps not strictly increasing at index {i}"
            )));
        }
        Ok(Self { timestamps, values })
    }

    /// Skips the monotonicity check; used by the loader to keep raw data for validation reports.
    pub(crate) fn new_unchecked(timestamps: Vec<f64>, values: Vec<f64>) -> Self {
        Self { timestamps, values }
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.timestamps.first(), self.timestamps.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

pub(crate) fn first_non_increasing(ts: &[f64]) -> Option<usize> {
    ts.windows(2).position(|w| !(w[1] > w[0])).map(|i| i + 1)
}

/// Channel kinds. `Scg` and `Adr` are derived from `AccZ` and never ingested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Ecg,
    Bvp,
    AccZ,
    Scg,
    Rsp,
    Adr,
    Eda,
    Skt,
    Emg,
    Eog,
}

impl Channel {
    pub const ALL: [Channel; 10] = [
        Channel::Ecg,
        Channel::Bvp,
        Channel::AccZ,
        Channel::Scg,
        Channel::Rsp,
        Channel::Adr,
        Channel::Eda,
        Channel::Skt,
        Channel::Emg,
        Channel::Eog,
    ];

    pub fn is_derived(self) -> bool {
        matches!(self, Channel::Scg | Channel::Adr)
    }

    /// The ingested channel a derived channel is computed from.
    pub fn source(self) -> Channel {
        match self {
            Channel::Scg | Channel::Adr => Channel::AccZ,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Ecg => "ECG",
            Channel::Bvp => "BVP",
            Channel::AccZ => "ACC_Z",
            Channel::Scg => "SCG",
            Channel::Rsp => "RSP",
            Channel::Adr => "ADR",
            Channel::Eda => "EDA",
            Channel::Skt => "SKT",
            Channel::Emg => "EMG",
            Channel::Eog => "EOG",
        }
    }

    /// Lower-case feature namespace, e.g. `scg` in `scg.ibi_mean`.
    pub fn prefix(self) -> &'static str {
        match self {
            Channel::Ecg => "ecg",
            Channel::Bvp => "bvp",
            Channel::AccZ => "acc_z",
            Channel::Scg => "scg",
            Channel::Rsp => "rsp",
            Channel::Adr => "adr",
            Channel::Eda => "eda",
            Channel::Skt => "skt",
            Channel::Emg => "emg",
            Channel::Eog => "eog",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase();
        Channel::ALL
            .iter()
            .copied()
            .find(|c| c.name() == norm || (norm == "ACCZ" && *c == Channel::AccZ))
            .ok_or_else(|| format!("unknown channel kind `{s}`"))
    }
}

/// A stored channel is either uniformly or irregularly sampled.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelData {
    Uniform(UniformSignal),
    Irregular(IrregularSignal),
}

impl ChannelData {
    pub fn values(&self) -> &[f64] {
        match self {
            ChannelData::Uniform(s) => &s.samples,
            ChannelData::Irregular(s) => s.values(),
        }
    }

    pub fn len(&self) -> usize {
        self.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    pub fn as_uniform(&self) -> Option<&UniformSignal> {
        match self {
            ChannelData::Uniform(s) => Some(s),
            ChannelData::Irregular(_) => None,
        }
    }

    /// Irregular view of either representation; uniform data gets explicit timestamps.
    pub fn to_irregular(&self) -> IrregularSignal {
        match self {
            ChannelData::Irregular(s) => s.clone(),
            ChannelData::Uniform(s) => IrregularSignal::new_unchecked(
                (0..s.len()).map(|i| s.time_at(i)).collect(),
                s.samples.clone(),
            ),
        }
    }
}
