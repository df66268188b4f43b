//! Per-trial features for every channel and their assembly per scenario.

mod assemble;
mod cardiac;
pub mod hrv;
mod peripheral;
mod resp;
mod scenario;

pub use assemble::{assemble_features, channel_feature_names, channel_features};
pub use cardiac::{cardiac_feature_names, cardiac_features};
pub use peripheral::{
    eda_feature_names, eda_features, emg_feature_names, emg_features, eog_feature_names,
    eog_features, skt_feature_names, skt_features,
};
pub use resp::{respiratory_feature_names, respiratory_features};
pub use scenario::{CardiacSource, Peripherals, Scenario};

use crate::beats::DetectorConfig;
use crate::dsp::{welch_psd, PowerSpectrum};
use crate::error::Result;
use crate::model::UniformSignal;

/// Named feature values; `None` marks a value that could not be computed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<Option<f64>>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// All-missing vector with the given names.
    pub fn missing(names: Vec<String>) -> Self {
        let values = vec![None; names.len()];
        Self { names, values }
    }

    /// Non-finite values are stored as missing.
    pub fn push(&mut self, name: impl Into<String>, value: Option<f64>) {
        self.names.push(name.into());
        self.values.push(value.filter(|v| v.is_finite()));
    }

    pub fn push_value(&mut self, name: impl Into<String>, value: f64) {
        self.push(name, Some(value));
    }

    /// Appends `other`, prefixing each name with `prefix.`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: FeatureVector) {
        for (n, v) in other.names.into_iter().zip(other.values) {
            self.names.push(format!("{prefix}.{n}"));
            self.values.push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .and_then(|i| self.values[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    /// Extended cardiac and respiratory indices (never for the lab flavor).
    pub extended: bool,
    /// Use |ΔIBI| instead of signed differences for the derivative mean.
    pub absolute_ibi_derivative: bool,
    pub tachogram_rate_hz: f64,
    /// Welch segment length in seconds (256 samples of the 4 Hz tachogram).
    pub welch_segment_s: f64,
    pub welch_overlap: f64,
    pub scsr_cutoff_hz: f64,
    pub scvsr_cutoff_hz: f64,
    pub detrend_window: usize,
    /// Blink prominence must exceed this many rolling MADs...
    pub blink_mad_factor: f64,
    /// ...and this absolute floor, in channel units.
    pub blink_min_prominence: f64,
    pub blink_refractory_s: f64,
    pub blink_mad_span_s: f64,
    pub detectors: DetectorConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            extended: true,
            absolute_ibi_derivative: false,
            tachogram_rate_hz: 4.0,
            welch_segment_s: 64.0,
            welch_overlap: 0.5,
            scsr_cutoff_hz: 0.2,
            scvsr_cutoff_hz: 0.08,
            detrend_window: 256,
            blink_mad_factor: 3.0,
            blink_min_prominence: 50.0,
            blink_refractory_s: 0.25,
            blink_mad_span_s: 5.0,
            detectors: DetectorConfig::default(),
        }
    }
}

impl FeatureConfig {
    fn psd(&self, sig: &UniformSignal) -> Result<PowerSpectrum> {
        let seg = (self.welch_segment_s * sig.rate).round() as usize;
        welch_psd(sig, seg, self.welch_overlap)
    }
}

/// Band power with the upper edge clamped to the spectrum's Nyquist.
fn power(psd: &PowerSpectrum, low: f64, high: f64) -> Option<f64> {
    let high = high.min(psd.nyquist());
    if !(high > low) {
        return None;
    }
    crate::dsp::band_power(psd, crate::dsp::BandSpec::new(low, high).ok()?).ok()
}

fn ratio(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    }
}

fn positive_ln(v: Option<f64>) -> Option<f64> {
    v.filter(|&x| x > 0.0).map(f64::ln)
}
