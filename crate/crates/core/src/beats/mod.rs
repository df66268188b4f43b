//! Event detection: cardiac fiducials, breath peaks and inter-beat intervals.

mod cardiac;
mod ibi;
pub(crate) mod peaks;
mod resp;

pub use cardiac::{derive_scg, detect_ao_peaks, detect_bvp_peaks, detect_r_peaks};
pub use ibi::{build_ibi, IbiSeries};
pub use resp::{derive_adr, detect_breath_cycles};

use crate::error::{BeatDiagnostics, Error, Result};
use crate::model::UniformSignal;

/// Rate everything chest-accelerometer based is resampled to.
pub const SCG_RATE_HZ: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeatKind {
    RPeak,
    AoPeak,
    PulsePeak,
    BreathPeak,
}

impl BeatKind {
    pub fn name(self) -> &'static str {
        match self {
            BeatKind::RPeak => "r-peak",
            BeatKind::AoPeak => "ao-peak",
            BeatKind::PulsePeak => "pulse-peak",
            BeatKind::BreathPeak => "breath-peak",
        }
    }
}

/// Detected event times in seconds, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatSeries {
    event_times: Vec<f64>,
    kind: BeatKind,
}

impl BeatSeries {
    pub fn new(event_times: Vec<f64>, kind: BeatKind) -> Result<Self> {
        if let Some(i) = crate::model::first_non_increasing(&event_times) {
            return Err(Error::InsufficientBeats(format!(
                "event times not strictly increasing at index {i}"
            )));
        }
        if event_times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InsufficientBeats("non-finite event time".into()));
        }
        Ok(Self { event_times, kind })
    }

    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn kind(&self) -> BeatKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.event_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.event_times.is_empty()
    }
}

/// Tunables for the detectors. Defaults are the values used throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Minimum spacing between AO peaks (0.375 s is a 160 bpm ceiling).
    pub ao_min_distance_s: f64,
    /// Half-width of the search for the raw-envelope maximum around each smoothed AO peak.
    pub ao_snap_s: f64,
    pub qrs_window_s: f64,
    pub beat_window_s: f64,
    /// Offset factor on the mean squared signal in the block threshold.
    pub qrs_offset: f64,
    pub r_refractory_s: f64,
    pub pulse_min_distance_s: f64,
    pub pulse_detrend_window: usize,
    pub pulse_prominence_fraction: f64,
    pub pulse_prominence_percentile: f64,
    pub pulse_prominence_span_s: f64,
    /// Upper edge of the respiratory band; cycles closer than 0.8 / edge are merged.
    pub breath_max_rate_hz: f64,
    pub adr_baseline_window_s: f64,
    /// Plausible IBI range in seconds; `None` keeps every interval.
    pub ibi_window: Option<(f64, f64)>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            ao_min_distance_s: 0.375,
            ao_snap_s: 0.15,
            qrs_window_s: 0.097,
            beat_window_s: 0.611,
            qrs_offset: 0.08,
            r_refractory_s: 0.25,
            pulse_min_distance_s: 0.375,
            pulse_detrend_window: 256,
            pulse_prominence_fraction: 0.5,
            pulse_prominence_percentile: 60.0,
            pulse_prominence_span_s: 5.0,
            breath_max_rate_hz: 0.35,
            adr_baseline_window_s: 10.0,
            ibi_window: Some((0.3, 2.0)),
        }
    }
}

fn require_duration(sig: &UniformSignal, min_s: f64, what: &str) -> Result<()> {
    if sig.duration() < min_s {
        return Err(Error::InsufficientData(format!(
            "{what} needs at least {min_s} s, got {:.3} s",
            sig.duration()
        )));
    }
    Ok(())
}

fn std_dev(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Converts peak indices on `x` to refined event times, or an empty-beats error.
fn finish(
    sig: &UniformSignal,
    x: &[f64],
    peaks: &[usize],
    kind: BeatKind,
    detector: &'static str,
    candidates: usize,
) -> Result<BeatSeries> {
    if peaks.is_empty() {
        return Err(Error::EmptyBeats(BeatDiagnostics {
            detector,
            samples: sig.len(),
            candidates,
            signal_std: std_dev(&sig.samples),
        }));
    }
    let times = peaks
        .iter()
        .map(|&i| sig.start_time + peaks::refine(x, i) / sig.rate)
        .collect();
    BeatSeries::new(times, kind)
}
