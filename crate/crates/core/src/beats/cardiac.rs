use crate::dsp::{bandpass, hilbert_envelope, moving_average, moving_average_detrend, resample_uniform, BandSpec};
use crate::error::Result;
use crate::model::{IrregularSignal, UniformSignal};

use super::peaks::{local_maxima, percentile, prominences, suppress_by_distance};
use super::{finish, require_duration, BeatKind, BeatSeries, DetectorConfig, SCG_RATE_HZ};

/// The dorsoventral acceleration on a uniform 200 Hz grid.
pub fn derive_scg(acc_z: &IrregularSignal) -> Result<UniformSignal> {
    resample_uniform(acc_z, SCG_RATE_HZ)
}

fn samples(seconds: f64, rate: f64) -> usize {
    (seconds * rate).round().max(1.0) as usize
}

/// 10–20 Hz band, Hilbert envelope, 0.5–2 Hz band, then positive local maxima
/// thinned by a refractory distance. Each beat is then timed at the largest
/// unsmoothed envelope value nearby, since the 0.5–2 Hz band averages
/// neighbouring beats together.
pub fn detect_ao_peaks(scg: &UniformSignal, cfg: &DetectorConfig) -> Result<BeatSeries> {
    require_duration(scg, 5.0, "AO detection")?;
    let vib = bandpass(scg, BandSpec::new(10.0, 20.0)?)?;
    let env = hilbert_envelope(&vib)?;
    let smooth = bandpass(&env, BandSpec::new(0.5, 2.0)?)?;
    let x = &smooth.samples;
    let candidates: Vec<usize> = local_maxima(x).into_iter().filter(|&i| x[i] > 0.0).collect();
    let peaks = suppress_by_distance(x, &candidates, samples(cfg.ao_min_distance_s, scg.rate));
    let reach = (cfg.ao_snap_s * scg.rate).round() as usize;
    let e = &env.samples;
    let snapped: Vec<usize> = peaks
        .iter()
        .map(|&p| {
            let lo = p.saturating_sub(reach);
            let hi = (p + reach).min(e.len() - 1);
            (lo..=hi).max_by(|&a, &b| e[a].total_cmp(&e[b]).then(b.cmp(&a))).expect("non-empty")
        })
        .collect();
    finish(scg, e, &snapped, BeatKind::AoPeak, "ao", candidates.len())
}

/// Two-moving-average QRS detector on the 8–20 Hz band.
pub fn detect_r_peaks(ecg: &UniformSignal, cfg: &DetectorConfig) -> Result<BeatSeries> {
    require_duration(ecg, 5.0, "R-peak detection")?;
    let filtered = bandpass(ecg, BandSpec::new(8.0, 20.0)?)?;
    let y = &filtered.samples;
    let sq: Vec<f64> = y.iter().map(|v| v * v).collect();
    let w1 = samples(cfg.qrs_window_s, ecg.rate);
    let ma_qrs = moving_average(&sq, w1);
    let ma_beat = moving_average(&sq, samples(cfg.beat_window_s, ecg.rate));
    let offset = cfg.qrs_offset * sq.iter().sum::<f64>() / sq.len() as f64;

    let mut blocks = Vec::new();
    let mut start = None;
    for i in 0..=sq.len() {
        let on = i < sq.len() && ma_qrs[i] > ma_beat[i] + offset;
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= w1 {
                    blocks.push((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    let candidates: Vec<usize> = blocks
        .iter()
        .map(|&(s, e)| {
            (s..e)
                .max_by(|&a, &b| y[a].total_cmp(&y[b]).then(b.cmp(&a)))
                .expect("block is non-empty")
        })
        .filter(|&i| i > 0 && i + 1 < y.len())
        .collect();
    let peaks = suppress_by_distance(y, &candidates, samples(cfg.r_refractory_s, ecg.rate));
    finish(ecg, y, &peaks, BeatKind::RPeak, "r", blocks.len())
}

/// Detrended pulse wave, refractory thinning, then a prominence floor relative
/// to the local 60th percentile of the peaks kept so far.
pub fn detect_bvp_peaks(bvp: &UniformSignal, cfg: &DetectorConfig) -> Result<BeatSeries> {
    require_duration(bvp, 5.0, "pulse detection")?;
    let detrended = moving_average_detrend(bvp, cfg.pulse_detrend_window);
    let x = &detrended.samples;
    let candidates = local_maxima(x);
    let thinned = suppress_by_distance(x, &candidates, samples(cfg.pulse_min_distance_s, bvp.rate));
    let all_prom = prominences(x, &thinned);
    let span = cfg.pulse_prominence_span_s * bvp.rate;
    let mut kept: Vec<(usize, f64)> = thinned
        .iter()
        .copied()
        .zip(all_prom)
        .filter(|&(_, pr)| pr > 0.0)
        .collect();
    // Re-threshold against the survivors until nothing changes: between slow
    // beats noise maxima can outnumber the pulses and drag the percentile down.
    for _ in 0..20 {
        let next: Vec<(usize, f64)> = kept
            .iter()
            .copied()
            .filter(|&(p, pr)| {
                let local: Vec<f64> = kept
                    .iter()
                    .filter(|(q, _)| (*q as f64 - p as f64).abs() <= span)
                    .map(|&(_, v)| v)
                    .collect();
                pr >= cfg.pulse_prominence_fraction * percentile(&local, cfg.pulse_prominence_percentile)
            })
            .collect();
        if next.len() == kept.len() {
            break;
        }
        kept = next;
    }
    let peaks: Vec<usize> = kept.into_iter().map(|(p, _)| p).collect();
    finish(bvp, x, &peaks, BeatKind::PulsePeak, "pulse", candidates.len())
}
