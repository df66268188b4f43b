use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::derive_seed;
use crate::model::{
    BinaryLabel, Channel, ChannelData, Dimension, Flavor, IrregularSignal, SamRatings, SubjectId, TrialRecord,
    UniformSignal, VideoId,
};

use super::kv::KvFile;

pub const HR_LIMITS_BPM: (f64, f64) = (40.0, 120.0);
pub const BREATH_LIMITS_PER_MIN: (f64, f64) = (9.0, 21.0);

/// Generating parameters a label can shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Physio {
    HeartRate,
    BreathRate,
    EdaLevel,
    SkinTemp,
}

impl Physio {
    const ALL: [Physio; 4] = [Physio::HeartRate, Physio::BreathRate, Physio::EdaLevel, Physio::SkinTemp];

    pub fn key(self) -> &'static str {
        match self {
            Physio::HeartRate => "hr_bpm",
            Physio::BreathRate => "breath_per_min",
            Physio::EdaLevel => "eda_us",
            Physio::SkinTemp => "skt_c",
        }
    }
}

/// Offset added to `parameter` in every trial whose `dimension` label is High.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelEffect {
    pub dimension: Dimension,
    pub parameter: Physio,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// `Synthetic` gives the wearable channel set, `DeapLike` the lab one.
    pub flavor: Flavor,
    pub subjects: usize,
    pub trials: usize,
    pub duration_s: f64,
    /// Range of per-subject resting heart rate.
    pub hr_bpm: (f64, f64),
    pub hr_trial_sd_bpm: f64,
    pub breath_per_min: (f64, f64),
    pub breath_trial_sd_per_min: f64,
    /// Range of the per-subject High fraction, drawn per dimension.
    pub high_fraction: (f64, f64),
    pub effects: Vec<LabelEffect>,
    /// Multiplier on every additive noise term.
    pub noise: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            flavor: Flavor::Synthetic,
            subjects: 20,
            trials: 38,
            duration_s: 60.0,
            hr_bpm: (60.0, 90.0),
            hr_trial_sd_bpm: 3.0,
            breath_per_min: (12.0, 18.0),
            breath_trial_sd_per_min: 1.0,
            high_fraction: (0.35, 0.65),
            effects: Vec::new(),
            noise: 1.0,
        }
    }
}

impl SynthSpec {
    pub fn with_effect(mut self, dimension: Dimension, parameter: Physio, offset: f64) -> Self {
        self.effects.push(LabelEffect {
            dimension,
            parameter,
            offset,
        });
        self
    }

    pub fn parse(text: &str, file: &Path) -> Result<Self> {
        let mut kv = KvFile::parse(text, file)?;
        let d = Self::default();
        let mut spec = Self {
            flavor: kv.take_or("flavor", d.flavor)?,
            subjects: kv.take_or("subjects", d.subjects)?,
            trials: kv.take_or("trials", d.trials)?,
            duration_s: kv.take_or("duration_s", d.duration_s)?,
            hr_bpm: kv.take_range("hr_bpm", d.hr_bpm)?,
            hr_trial_sd_bpm: kv.take_or("hr_trial_sd_bpm", d.hr_trial_sd_bpm)?,
            breath_per_min: kv.take_range("breath_per_min", d.breath_per_min)?,
            breath_trial_sd_per_min: kv.take_or("breath_trial_sd_per_min", d.breath_trial_sd_per_min)?,
            high_fraction: kv.take_range("high_fraction", d.high_fraction)?,
            effects: Vec::new(),
            noise: kv.take_or("noise", d.noise)?,
        };
        for dimension in Dimension::BOTH {
            for parameter in Physio::ALL {
                let key = format!("effect.{}.{}", dimension.name(), parameter.key());
                if let Some(offset) = kv.take::<f64>(&key)? {
                    spec.effects.push(LabelEffect {
                        dimension,
                        parameter,
                        offset,
                    });
                }
            }
        }
        kv.finish()?;
        spec.validate()?;
        Ok(spec)
    }

    /// Written form accepted by `parse`.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "flavor = {}\nsubjects = {}\ntrials = {}\nduration_s = {}\nhr_bpm = {}..{}\nhr_trial_sd_bpm = {}\n\
             breath_per_min = {}..{}\nbreath_trial_sd_per_min = {}\nhigh_fraction = {}..{}\nnoise = {}\n",
            self.flavor.name(),
            self.subjects,
            self.trials,
            self.duration_s,
            self.hr_bpm.0,
            self.hr_bpm.1,
            self.hr_trial_sd_bpm,
            self.breath_per_min.0,
            self.breath_per_min.1,
            self.breath_trial_sd_per_min,
            self.high_fraction.0,
            self.high_fraction.1,
            self.noise
        );
        for e in &self.effects {
            s += &format!("effect.{}.{} = {}\n", e.dimension.name(), e.parameter.key(), e.offset);
        }
        s
    }

    fn offset_range(&self, p: Physio) -> (f64, f64) {
        // a trial can be High in both dimensions
        let mut lo = 0.0;
        let mut hi = 0.0;
        for e in self.effects.iter().filter(|e| e.parameter == p) {
            if e.offset < 0.0 {
                lo += e.offset;
            } else {
                hi += e.offset;
            }
        }
        (lo, hi)
    }

    /// Rejects specs whose rates leave the detector bands within 3 trial SDs.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Spec(m));
        if self.flavor == Flavor::EmoWearLike {
            return bad("flavor must be synthetic or deap".into());
        }
        if self.subjects == 0 {
            return bad("at least one subject is required".into());
        }
        if self.trials < 2 {
            return bad(format!("at least 2 trials per subject are required, got {}", self.trials));
        }
        if !(self.duration_s >= 30.0 && self.duration_s.is_finite()) {
            return bad(format!("trial duration {} s is below 30 s", self.duration_s));
        }
        if !(self.high_fraction.0 > 0.0 && self.high_fraction.1 < 1.0) {
            return bad("high_fraction must lie inside (0, 1)".into());
        }
        if !(self.noise >= 0.0) || !(self.hr_trial_sd_bpm >= 0.0) || !(self.breath_trial_sd_per_min >= 0.0) {
            return bad("noise and standard deviations must be non-negative".into());
        }
        for (name, range, sd, p, limits) in [
            ("heart rate", self.hr_bpm, self.hr_trial_sd_bpm, Physio::HeartRate, HR_LIMITS_BPM),
            (
                "breath rate",
                self.breath_per_min,
                self.breath_trial_sd_per_min,
                Physio::BreathRate,
                BREATH_LIMITS_PER_MIN,
            ),
        ] {
            let (lo_off, hi_off) = self.offset_range(p);
            let lo = range.0 - 3.0 * sd + lo_off;
            let hi = range.1 + 3.0 * sd + hi_off;
            if lo < limits.0 || hi > limits.1 {
                return bad(format!(
                    "{name} can reach {lo:.1}..{hi:.1}, outside the detectable {}..{}",
                    limits.0, limits.1
                ));
            }
        }
        Ok(())
    }
}

/// Parameters of one generated trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialParams {
    pub hr_bpm: f64,
    pub breath_per_min: f64,
    pub eda_level_us: f64,
    pub skt_c: f64,
}

impl Default for TrialParams {
    fn default() -> Self {
        Self {
            hr_bpm: 70.0,
            breath_per_min: 15.0,
            eda_level_us: 4.0,
            skt_c: 33.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialTruth {
    pub subject_id: SubjectId,
    pub video_id: VideoId,
    pub params: TrialParams,
    /// Cardiac cycle onsets (ECG R wave).
    pub beat_times: Vec<f64>,
    pub breath_peak_times: Vec<f64>,
}

impl TrialTruth {
    pub fn mean_hr_bpm(&self) -> f64 {
        let b = &self.beat_times;
        60.0 * (b.len() - 1) as f64 / (b[b.len() - 1] - b[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub trials: Vec<TrialRecord>,
    pub truth: Vec<TrialTruth>,
}

fn gauss(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp()
}

/// Adds `template(t − event)` around every event, for `|t − event| < reach`.
fn render(ts: &[f64], out: &mut [f64], events: &[f64], reach: f64, template: impl Fn(f64) -> f64) {
    for &e in events {
        let start = ts.partition_point(|&t| t < e - reach);
        for (t, o) in ts[start..].iter().zip(&mut out[start..]) {
            if *t > e + reach {
                break;
            }
            *o += template(t - e);
        }
    }
}

fn grid(rate: f64, duration: f64) -> Vec<f64> {
    let n = (duration * rate).round() as usize;
    (0..n).map(|i| i as f64 / rate).collect()
}

struct Breathing {
    f0: f64,
    depth: f64,
    omega: f64,
    psi: f64,
    amp_omega: f64,
    amp_psi: f64,
}

impl Breathing {
    fn new(breath_per_min: f64, rng: &mut ChaCha8Rng) -> Self {
        Self {
            f0: breath_per_min / 60.0,
            depth: 0.06,
            omega: 2.0 * PI / rng.gen_range(18.0..30.0),
            psi: rng.gen_range(0.0..2.0 * PI),
            amp_omega: 2.0 * PI / rng.gen_range(12.0..20.0),
            amp_psi: rng.gen_range(0.0..2.0 * PI),
        }
    }

    /// Phase in radians; derivative is 2π·f0·(1 + depth·sin(ωt + ψ)).
    fn phase(&self, t: f64) -> f64 {
        2.0 * PI * self.f0 * (t - self.depth / self.omega * ((self.omega * t + self.psi).cos() - self.psi.cos()))
    }

    fn value(&self, t: f64) -> f64 {
        (1.0 + 0.1 * (self.amp_omega * t + self.amp_psi).sin()) * self.phase(t).sin()
    }

    fn peaks(&self, duration: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0.0;
        loop {
            let target = PI / 2.0 + 2.0 * PI * k;
            k += 1.0;
            let (mut lo, mut hi) = (0.0, duration);
            if self.phase(hi) < target {
                return out;
            }
            if self.phase(lo) > target {
                continue;
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.phase(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
}

fn beat_times(hr_bpm: f64, breath: &Breathing, duration: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = 60.0 / hr_bpm;
    let jitter = Normal::new(0.0, 0.01 * m).expect("finite sd");
    let rsa = rng.gen_range(0.0..2.0 * PI);
    let mut t = rng.gen_range(0.1..0.1 + m);
    let mut out = Vec::new();
    while t < duration - 0.1 {
        out.push(t);
        let ibi = m * (1.0 + 0.04 * (breath.phase(t) + rsa).sin()) + jitter.sample(rng);
        t += ibi.max(0.3);
    }
    out
}

fn add_noise(x: &mut [f64], sd: f64, rng: &mut ChaCha8Rng) {
    if sd > 0.0 {
        let n = Normal::new(0.0, sd).expect("finite sd");
        for v in x {
            *v += n.sample(rng);
        }
    }
}

fn uniform(rate: f64, samples: Vec<f64>) -> ChannelData {
    ChannelData::Uniform(UniformSignal::new(samples, rate))
}

fn poisson_times(rate_per_s: f64, duration: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gap = Exp::new(rate_per_s).expect("positive rate");
    let mut t = gap.sample(rng);
    let mut out = Vec::new();
    while t < duration {
        out.push(t);
        t += gap.sample(rng);
    }
    out
}

/// Channel data and cardiac/breath event times for one trial.
pub fn synth_trial(
    p: &TrialParams,
    flavor: Flavor,
    duration: f64,
    noise: f64,
    seed: u64,
) -> (BTreeMap<Channel, ChannelData>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let breath = Breathing::new(p.breath_per_min, &mut rng);
    let beats = beat_times(p.hr_bpm, &breath, duration, &mut rng);
    let breaths = breath.peaks(duration);
    let lab = flavor == Flavor::DeapLike;
    let mut ch = BTreeMap::new();

    if !lab {
        let rate = 256.0;
        let ts = grid(rate, duration);
        let mut x: Vec<f64> = ts
            .iter()
            .map(|&t| 0.15 * breath.value(t) + 0.05 * (2.0 * PI * 0.05 * t).sin())
            .collect();
        render(&ts, &mut x, &beats, 0.5, |d| {
            0.12 * gauss(d + 0.16, 0.025) - 0.12 * gauss(d + 0.025, 0.008) + gauss(d, 0.01)
                - 0.25 * gauss(d - 0.025, 0.009)
                + 0.3 * gauss(d - 0.25, 0.045)
        });
        add_noise(&mut x, 0.02 * noise, &mut rng);
        ch.insert(Channel::Ecg, uniform(rate, x));

        // chest accelerometer, irregular ~100 Hz: AO complex 40 ms after R
        let mut ts = Vec::new();
        let mut t = 0.0;
        while t < duration {
            ts.push(t);
            t += (1.0 + rng.gen_range(-0.2..0.2)) / 100.0;
        }
        let mut z: Vec<f64> = ts.iter().map(|&t| 0.98 + 0.02 * breath.value(t)).collect();
        render(&ts, &mut z, &beats, 0.5, |d| {
            let ao = d - 0.04;
            let ac = d - 0.32;
            0.03 * gauss(ao, 0.03) * (2.0 * PI * 15.0 * ao).cos() + 0.01 * gauss(ac, 0.025) * (2.0 * PI * 12.0 * ac).cos()
        });
        add_noise(&mut z, 0.003 * noise, &mut rng);
        ch.insert(Channel::AccZ, ChannelData::Irregular(IrregularSignal::new(ts, z).expect("increasing")));
    }

    // pulse wave arrives after the transit time
    let rate = if lab { 128.0 } else { 64.0 };
    let ts = grid(rate, duration);
    let drift = rng.gen_range(0.0..2.0 * PI);
    let mut x: Vec<f64> = ts
        .iter()
        .map(|&t| 10.0 * breath.value(t) + 15.0 * (2.0 * PI * 0.03 * t + drift).sin())
        .collect();
    render(&ts, &mut x, &beats, 0.8, |d| {
        let d = d - 0.22;
        let systolic = if d < 0.0 { gauss(d, 0.06) } else { gauss(d, 0.12) };
        50.0 * (systolic + 0.35 * gauss(d - 0.32, 0.07))
    });
    add_noise(&mut x, 1.0 * noise, &mut rng);
    ch.insert(Channel::Bvp, uniform(rate, x));

    let rate = if lab { 128.0 } else { 32.0 };
    let ts = grid(rate, duration);
    let mut x: Vec<f64> = ts.iter().map(|&t| 100.0 + 20.0 * breath.value(t)).collect();
    add_noise(&mut x, 0.4 * noise, &mut rng);
    ch.insert(Channel::Rsp, uniform(rate, x));

    let rate = if lab { 128.0 } else { 32.0 };
    let ts = grid(rate, duration);
    let drift = rng.gen_range(0.0..2.0 * PI);
    let mut x: Vec<f64> = ts
        .iter()
        .map(|&t| p.eda_level_us + 0.2 * (2.0 * PI * t / 120.0 + drift).sin())
        .collect();
    let scrs = poisson_times(4.0 / 60.0, duration, &mut rng);
    let amps: Vec<f64> = scrs.iter().map(|_| rng.gen_range(0.05..0.4)).collect();
    for (e, a) in scrs.iter().zip(&amps) {
        render(&ts, &mut x, std::slice::from_ref(e), 30.0, |d| {
            if d <= 0.0 {
                0.0
            } else {
                // bi-exponential peaking ≈ 1.7 s after onset, unit height
                a * ((-d / 4.0).exp() - (-d / 0.75).exp()) / 0.6
            }
        });
    }
    add_noise(&mut x, 0.003 * noise, &mut rng);
    ch.insert(Channel::Eda, uniform(rate, x));

    let rate = if lab { 128.0 } else { 8.0 };
    let ts = grid(rate, duration);
    let drift = rng.gen_range(0.0..2.0 * PI);
    let mut x: Vec<f64> = ts
        .iter()
        .map(|&t| p.skt_c + 0.05 * (2.0 * PI * t / 90.0 + drift).sin())
        .collect();
    add_noise(&mut x, 0.005 * noise, &mut rng);
    ch.insert(Channel::Skt, uniform(rate, x));

    if lab {
        let rate = 128.0;
        let ts = grid(rate, duration);
        let mut x = vec![0.0; ts.len()];
        add_noise(&mut x, 5.0 * noise.max(0.1), &mut rng);
        ch.insert(Channel::Emg, uniform(rate, x));

        let mut x: Vec<f64> = ts.iter().map(|&t| 20.0 * (2.0 * PI * 0.1 * t).sin()).collect();
        let blinks = poisson_times(15.0 / 60.0, duration, &mut rng);
        render(&ts, &mut x, &blinks, 0.5, |d| 200.0 * gauss(d, 0.05));
        add_noise(&mut x, 10.0 * noise, &mut rng);
        ch.insert(Channel::Eog, uniform(rate, x));
    }
    (ch, beats, breaths)
}

fn rating(label: BinaryLabel, rng: &mut ChaCha8Rng) -> f64 {
    match label {
        BinaryLabel::High => rng.gen_range(6..=9) as f64,
        BinaryLabel::Low => rng.gen_range(1..=4) as f64,
    }
}

/// Seeded dataset with known generating parameters. Identical per seed,
/// independent of the thread count.
pub fn generate_synthetic_dataset(spec: &SynthSpec, seed: u64) -> Result<SyntheticDataset> {
    spec.validate()?;
    let width = spec.subjects.to_string().len();
    let mut plans = Vec::new();
    for s in 0..spec.subjects {
        let sid = format!("{:0width$}", s + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["subject", &sid]));
        let hr_base = rng.gen_range(spec.hr_bpm.0..=spec.hr_bpm.1);
        let br_base = rng.gen_range(spec.breath_per_min.0..=spec.breath_per_min.1);
        let eda_base = rng.gen_range(2.0..8.0);
        let skt_base = rng.gen_range(31.0..34.0);
        let mut labels = BTreeMap::new();
        for dim in Dimension::BOTH {
            let frac = rng.gen_range(spec.high_fraction.0..=spec.high_fraction.1);
            let high = ((frac * spec.trials as f64).round() as usize).clamp(1, spec.trials - 1);
            let mut l: Vec<BinaryLabel> = (0..spec.trials)
                .map(|i| if i < high { BinaryLabel::High } else { BinaryLabel::Low })
                .collect();
            l.shuffle(&mut rng);
            labels.insert(dim, l);
        }
        let hr_sd = Normal::new(0.0, spec.hr_trial_sd_bpm).expect("validated");
        let br_sd = Normal::new(0.0, spec.breath_trial_sd_per_min).expect("validated");
        for v in 0..spec.trials {
            let mut p = TrialParams {
                hr_bpm: hr_base + hr_sd.sample(&mut rng),
                breath_per_min: br_base + br_sd.sample(&mut rng),
                eda_level_us: eda_base + 0.3 * rng.gen_range(-1.0..1.0),
                skt_c: skt_base + 0.2 * rng.gen_range(-1.0..1.0),
            };
            for e in &spec.effects {
                if labels[&e.dimension][v].is_high() {
                    match e.parameter {
                        Physio::HeartRate => p.hr_bpm += e.offset,
                        Physio::BreathRate => p.breath_per_min += e.offset,
                        Physio::EdaLevel => p.eda_level_us = (p.eda_level_us + e.offset).max(0.1),
                        Physio::SkinTemp => p.skt_c += e.offset,
                    }
                }
            }
            p.hr_bpm = p.hr_bpm.clamp(HR_LIMITS_BPM.0, HR_LIMITS_BPM.1);
            p.breath_per_min = p.breath_per_min.clamp(BREATH_LIMITS_PER_MIN.0, BREATH_LIMITS_PER_MIN.1);
            let valence = rating(labels[&Dimension::Valence][v], &mut rng);
            let arousal = rating(labels[&Dimension::Arousal][v], &mut rng);
            plans.push((sid.clone(), (v + 1).to_string(), p, valence, arousal));
        }
    }
    let made: Vec<(TrialRecord, TrialTruth)> = plans
        .into_par_iter()
        .map(|(sid, vid, p, valence, arousal)| {
            let trial_seed = derive_seed(seed, &["trial", &sid, &vid]);
            let (channels, beats, breaths) = synth_trial(&p, spec.flavor, spec.duration_s, spec.noise, trial_seed);
            let record = TrialRecord {
                subject_id: SubjectId::new(sid.clone()),
                video_id: VideoId::new(vid.clone()),
                channels,
                ratings: SamRatings::new(valence, arousal).expect("ratings in range"),
                faulty: false,
            };
            let truth = TrialTruth {
                subject_id: SubjectId::new(sid),
                video_id: VideoId::new(vid),
                params: p,
                beat_times: beats,
                breath_peak_times: breaths,
            };
            (record, truth)
        })
        .collect();
    let (trials, truth) = made.into_iter().unzip();
    Ok(SyntheticDataset { trials, truth })
}

/// `ground_truth.tsv` next to the generated dataset.
pub fn write_ground_truth(path: &Path, data: &SyntheticDataset) -> Result<()> {
    use std::fmt::Write as _;
    let mut s = String::from("subject_id\tvideo_id\thr_bpm\tbreath_per_min\teda_us\tskt_c\tbeats\tbreaths\tmean_hr_bpm\n");
    for t in &data.truth {
        let p = &t.params;
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.subject_id,
            t.video_id,
            p.hr_bpm,
            p.breath_per_min,
            p.eda_level_us,
            p.skt_c,
            t.beat_times.len(),
            t.breath_peak_times.len(),
            t.mean_hr_bpm()
        );
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
