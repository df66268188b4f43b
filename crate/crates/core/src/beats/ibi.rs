use crate::error::{Error, Result};

use super::BeatSeries;

/// Inter-beat intervals after the plausibility screen.
#[derive(Debug, Clone, PartialEq)]
pub struct IbiSeries {
    pub intervals: Vec<f64>,
    /// Time of the first beat of each retained interval.
    pub onset_times: Vec<f64>,
    pub rejected_count: usize,
    /// Summed length of the rejected intervals.
    pub rejected_span: f64,
}

impl IbiSeries {
    /// Unscreened intervals, mainly for tests and feature oracles.
    pub fn from_intervals(intervals: Vec<f64>) -> Self {
        let mut t = 0.0;
        let onset_times = intervals
            .iter()
            .map(|v| {
                let o = t;
                t += v;
                o
            })
            .collect();
        Self {
            intervals,
            onset_times,
            rejected_count: 0,
            rejected_span: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Successive event differences; intervals outside `window` are dropped and counted.
pub fn build_ibi(beats: &BeatSeries, window: Option<(f64, f64)>) -> Result<IbiSeries> {
    let t = beats.event_times();
    if t.len() < 3 {
        return Err(Error::InsufficientBeats(format!(
            "need at least 3 {} events, got {}",
            beats.kind().name(),
            t.len()
        )));
    }
    let mut out = IbiSeries {
        intervals: Vec::with_capacity(t.len() - 1),
        onset_times: Vec::with_capacity(t.len() - 1),
        rejected_count: 0,
        rejected_span: 0.0,
    };
    for w in t.windows(2) {
        let d = w[1] - w[0];
        let ok = window.map_or(true, |(lo, hi)| d >= lo && d <= hi);
        if ok {
            out.intervals.push(d);
            out.onset_times.push(w[0]);
        } else {
            out.rejected_count += 1;
            out.rejected_span += d;
        }
    }
    if out.intervals.len() < 2 {
        return Err(Error::InsufficientBeats(format!(
            "only {} plausible intervals ({} rejected)",
            out.intervals.len(),
            out.rejected_count
        )));
    }
    Ok(out)
}
