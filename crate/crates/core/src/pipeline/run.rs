use std::collections::BTreeMap;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::classify::{fit, BaselineStrategy, ClassifierConfig, ClassifierKind};
use crate::error::{Error, Result};
use crate::eval::{evaluate_subject, run_baselines, subject_labels, ConfusionMatrix, SubjectFeatures};
use crate::features::{channel_features, FeatureVector, Scenario};
use crate::model::{apply_exclusions, Channel, ChannelData, Dimension, ExclusionReport, SubjectId, TrialRecord};
use crate::selection::select_features;

use super::config::ExperimentConfig;

/// Who produced a score row.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Baseline(BaselineStrategy),
    Classifier {
        kind: ClassifierKind,
        /// `None` for NB.
        c: Option<f64>,
        scenario: Scenario,
    },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Baseline(s) => s.name(),
            Method::Classifier { kind, .. } => kind.name(),
        }
    }

    pub fn c_text(&self) -> String {
        match self {
            Method::Classifier { c: Some(c), .. } => c.to_string(),
            _ => "-".into(),
        }
    }

    pub fn cardiac(&self) -> &'static str {
        match self {
            Method::Classifier { scenario, .. } => scenario.cardiac_name(),
            Method::Baseline(_) => "-",
        }
    }

    pub fn peripherals(&self) -> &'static str {
        match self {
            Method::Classifier { scenario, .. } => scenario.peripherals_name(),
            Method::Baseline(_) => "-",
        }
    }

    pub fn is_baseline(&self) -> bool {
        matches!(self, Method::Baseline(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub accuracy: f64,
    pub macro_f1: f64,
    /// Pooled over folds; baselines average several draws and have none.
    pub confusion: Option<ConfusionMatrix>,
    pub fold_failures: usize,
}

/// One subject under one setup and dimension. `Err` holds the failure message.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub dimension: Dimension,
    pub method: Method,
    pub subject_id: SubjectId,
    pub outcome: std::result::Result<Score, String>,
}

/// How often each feature was selected across a scenario's LOVO folds.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTally {
    pub dimension: Dimension,
    pub scenario: Scenario,
    pub names: Vec<String>,
    pub counts: Vec<usize>,
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Ordered `(key, value)` pairs for the manifest.
    pub manifest: Vec<(String, String)>,
    pub exclusions: ExclusionReport,
    pub subjects: Vec<SubjectId>,
    pub rows: Vec<ScoreRow>,
    pub selection: Vec<SelectionTally>,
    /// `(relative path, text)` of full-data model dumps, when enabled.
    pub models: Vec<(String, String)>,
}

impl RunOutput {
    /// Classifier rows that failed, and classifier rows overall.
    pub fn failure_counts(&self) -> (usize, usize) {
        let clf: Vec<&ScoreRow> = self.rows.iter().filter(|r| !r.method.is_baseline()).collect();
        (clf.iter().filter(|r| r.outcome.is_err()).count(), clf.len())
    }
}

/// Hash of trial contents, independent of how they were stored.
pub fn dataset_fingerprint(trials: &[TrialRecord]) -> String {
    let mut h = Sha256::new();
    let mut sorted: Vec<&TrialRecord> = trials.iter().collect();
    sorted.sort_by(|a, b| (&a.subject_id, &a.video_id).cmp(&(&b.subject_id, &b.video_id)));
    let f = |h: &mut Sha256, x: f64| h.update(x.to_bits().to_le_bytes());
    for t in sorted {
        h.update(t.subject_id.as_str().as_bytes());
        h.update([0]);
        h.update(t.video_id.as_str().as_bytes());
        h.update([0, t.faulty as u8]);
        let r = &t.ratings;
        for v in [Some(r.valence), Some(r.arousal), r.dominance, r.liking, r.familiarity] {
            f(&mut h, v.unwrap_or(f64::NAN));
        }
        for (ch, data) in &t.channels {
            h.update(ch.name().as_bytes());
            match data {
                ChannelData::Uniform(s) => {
                    f(&mut h, s.rate);
                    f(&mut h, s.start_time);
                    s.samples.iter().for_each(|&x| f(&mut h, x));
                }
                ChannelData::Irregular(s) => {
                    s.timestamps().iter().for_each(|&x| f(&mut h, x));
                    s.values().iter().for_each(|&x| f(&mut h, x));
                }
            }
        }
    }
    hex::encode(h.finalize())
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs the whole protocol on in-memory trials: exclusions, per-subject LOVO
/// for every dimension × classifier × scenario, and the voting baselines.
/// Fails only when every classifier evaluation failed.
pub fn run_trials(trials: Vec<TrialRecord>, cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    pool(cfg.jobs)?.install(|| run_inner(trials, cfg))
}

struct Item {
    dim: usize,
    clf: usize,
    scen: usize,
    subject: usize,
}

fn run_inner(trials: Vec<TrialRecord>, cfg: &ExperimentConfig) -> Result<RunOutput> {
    let loaded = trials.len();
    let fingerprint = dataset_fingerprint(&trials);
    let (mut kept, exclusions) = apply_exclusions(trials, &cfg.exclusion_rule()?)?;
    kept.sort_by(|a, b| (&a.subject_id, &a.video_id).cmp(&(&b.subject_id, &b.video_id)));

    let mut by_subject: Vec<(SubjectId, Vec<&TrialRecord>)> = Vec::new();
    for t in &kept {
        match by_subject.last_mut() {
            Some((id, v)) if *id == t.subject_id => v.push(t),
            _ => by_subject.push((t.subject_id.clone(), vec![t])),
        }
    }
    log::info!("{} trials kept for {} subjects", kept.len(), by_subject.len());

    // Channel features are shared by every scenario that uses the channel.
    let mut channels: Vec<Channel> = Vec::new();
    for s in &cfg.scenarios {
        channels.extend(s.feature_channels(cfg.flavor)?);
    }
    channels.sort();
    channels.dedup();
    let mut jobs = Vec::new();
    for (ti, _) in kept.iter().enumerate() {
        for &ch in &channels {
            jobs.push((ti, ch));
        }
    }
    let computed: Vec<Result<FeatureVector>> = jobs
        .par_iter()
        .map(|&(ti, ch)| channel_features(&kept[ti], ch, cfg.flavor, &cfg.features))
        .collect();
    let mut cache: BTreeMap<(usize, Channel), Result<FeatureVector>> = BTreeMap::new();
    for (key, fv) in jobs.into_iter().zip(computed) {
        cache.insert(key, fv);
    }
    let index: BTreeMap<(&SubjectId, &crate::model::VideoId), usize> = kept
        .iter()
        .enumerate()
        .map(|(i, t)| ((&t.subject_id, &t.video_id), i))
        .collect();

    // features[scenario][subject]
    let mut features: Vec<Vec<Result<SubjectFeatures>>> = Vec::new();
    for s in &cfg.scenarios {
        let chans = s.feature_channels(cfg.flavor)?;
        let per: Vec<Result<SubjectFeatures>> = by_subject
            .iter()
            .map(|(id, ts)| {
                let mut names = Vec::new();
                let mut rows = Vec::with_capacity(ts.len());
                for (k, t) in ts.iter().enumerate() {
                    let ti = index[&(&t.subject_id, &t.video_id)];
                    let mut fv = FeatureVector::new();
                    for &ch in &chans {
                        match &cache[&(ti, ch)] {
                            Ok(v) => fv.extend_prefixed(ch.prefix(), v.clone()),
                            Err(e) => return Err(Error::InsufficientData(format!("{}/{}: {e}", t.subject_id, t.video_id))),
                        }
                    }
                    if k == 0 {
                        names = fv.names;
                    }
                    rows.push(fv.values);
                }
                Ok(SubjectFeatures {
                    subject_id: id.clone(),
                    videos: ts.iter().map(|t| t.video_id.clone()).collect(),
                    names,
                    rows,
                })
            })
            .collect();
        features.push(per);
    }

    let mut labels: Vec<Vec<Result<Vec<crate::model::BinaryLabel>>>> = Vec::new();
    for &d in &cfg.dimensions {
        labels.push(by_subject.iter().map(|(_, ts)| subject_labels(ts, d, cfg.tie)).collect());
    }

    let clfs = cfg.classifier_configs();
    let mut items = Vec::new();
    for dim in 0..cfg.dimensions.len() {
        for clf in 0..clfs.len() {
            for scen in 0..cfg.scenarios.len() {
                for subject in 0..by_subject.len() {
                    items.push(Item { dim, clf, scen, subject });
                }
            }
        }
    }
    let results: Vec<Result<crate::eval::SubjectResult>> = items
        .par_iter()
        .map(|it| {
            let data = features[it.scen][it.subject].as_ref().map_err(clone_err)?;
            let l = labels[it.dim][it.subject].as_ref().map_err(clone_err)?;
            let scen = &cfg.scenarios[it.scen];
            evaluate_subject(data, l, cfg.dimensions[it.dim], &scen.id(), &clfs[it.clf], &cfg.selection)
        })
        .collect();

    let mut rows = Vec::new();
    let mut selection = Vec::new();
    let mut results = results.into_iter();
    let mut items = items.iter();
    for (di, &dimension) in cfg.dimensions.iter().enumerate() {
        let baseline_input: Vec<(SubjectId, Vec<crate::model::BinaryLabel>)> = by_subject
            .iter()
            .zip(&labels[di])
            .filter_map(|((id, _), l)| l.as_ref().ok().map(|l| (id.clone(), l.clone())))
            .collect();
        let base = run_baselines(
            &baseline_input,
            cfg.baseline_repetitions,
            crate::eval::derive_seed(cfg.seed, &["baseline", dimension.name()]),
            cfg.sidedness,
        )?;
        for (strategy, agg) in &base.strategies {
            for (k, (id, _)) in baseline_input.iter().enumerate() {
                rows.push(ScoreRow {
                    dimension,
                    method: Method::Baseline(*strategy),
                    subject_id: id.clone(),
                    outcome: Ok(Score {
                        accuracy: agg.accuracies[k],
                        macro_f1: agg.scores[k],
                        confusion: None,
                        fold_failures: 0,
                    }),
                });
            }
        }
        for (ci, clf) in clfs.iter().enumerate() {
            for (si, scenario) in cfg.scenarios.iter().enumerate() {
                let mut tally: Option<SelectionTally> = None;
                for (id, _) in &by_subject {
                    let it = items.next().expect("one item per result");
                    debug_assert!(it.dim == di && it.clf == ci && it.scen == si);
                    let res = results.next().expect("one result per item");
                    if ci == 0 {
                        if let Ok(r) = &res {
                            let names = &features[si][it.subject].as_ref().expect("evaluated").names;
                            let t = tally.get_or_insert_with(|| SelectionTally {
                                dimension,
                                scenario: *scenario,
                                names: names.clone(),
                                counts: vec![0; names.len()],
                                folds: 0,
                            });
                            for f in r.folds.iter().filter(|f| f.failure.is_none()) {
                                t.folds += 1;
                                for &j in &f.selected {
                                    t.counts[j] += 1;
                                }
                            }
                        }
                    }
                    let outcome = match res {
                        Ok(r) => Ok(Score {
                            accuracy: r.accuracy,
                            macro_f1: r.macro_f1,
                            confusion: Some(r.confusion),
                            fold_failures: r.fold_failures,
                        }),
                        Err(e) => {
                            log::warn!("{dimension} {} {scenario} subject {id}: {e}", clf.label());
                            Err(e.to_string())
                        }
                    };
                    rows.push(ScoreRow {
                        dimension,
                        method: Method::Classifier {
                            kind: clf.kind,
                            c: (clf.kind != ClassifierKind::NaiveBayes).then_some(clf.c),
                            scenario: *scenario,
                        },
                        subject_id: id.clone(),
                        outcome,
                    });
                }
                selection.extend(tally);
            }
        }
    }

    let models = if cfg.model_dump { dump_models(cfg, &clfs, &features, &labels, &by_subject) } else { Vec::new() };

    let out = RunOutput {
        manifest: Vec::new(),
        exclusions,
        subjects: by_subject.iter().map(|(id, _)| id.clone()).collect(),
        rows,
        selection,
        models,
    };
    let (failed, total) = out.failure_counts();
    if total > 0 && failed == total {
        return Err(Error::SubjectEval(format!("all {total} subject evaluations failed")));
    }
    let manifest = vec![
        ("software".to_string(), env!("CARGO_PKG_NAME").to_string()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("config_hash".into(), cfg.hash()),
        ("seed".into(), cfg.seed.to_string()),
        ("flavor".into(), cfg.flavor.name().into()),
        ("dataset_fingerprint".into(), fingerprint),
        ("trials_loaded".into(), loaded.to_string()),
        ("trials_kept".into(), kept.len().to_string()),
        ("subjects_kept".into(), out.subjects.len().to_string()),
        ("subjects_excluded".into(), out.exclusions.excluded_subjects().len().to_string()),
        ("setups".into(), (clfs.len() * cfg.scenarios.len() * cfg.dimensions.len()).to_string()),
        ("failed_evaluations".into(), format!("{failed}/{total}")),
    ];
    Ok(RunOutput { manifest, ..out })
}

fn clone_err(e: &Error) -> Error {
    Error::InsufficientData(e.to_string())
}

/// Fits every setup once on all of a subject's trials and dumps the model.
fn dump_models(
    cfg: &ExperimentConfig,
    clfs: &[ClassifierConfig],
    features: &[Vec<Result<SubjectFeatures>>],
    labels: &[Vec<Result<Vec<crate::model::BinaryLabel>>>],
    subjects: &[(SubjectId, Vec<&TrialRecord>)],
) -> Vec<(String, String)> {
    let mut keys = Vec::new();
    for di in 0..cfg.dimensions.len() {
        for ci in 0..clfs.len() {
            for si in 0..cfg.scenarios.len() {
                for sub in 0..subjects.len() {
                    keys.push((di, ci, si, sub));
                }
            }
        }
    }
    keys.par_iter()
        .filter_map(|&(di, ci, si, sub)| {
            let data = features[si][sub].as_ref().ok()?;
            let l = labels[di][sub].as_ref().ok()?;
            let sel = select_features(&data.rows, l, &cfg.selection).ok()?;
            let model = fit(&data.rows, l, &sel.selected, &clfs[ci]).ok()?;
            let path = format!(
                "{}/{}/{}/{}.txt",
                cfg.dimensions[di].name(),
                cfg.scenarios[si].id(),
                clfs[ci].label(),
                subjects[sub].0
            );
            Some((path, model.dump(&data.names)))
        })
        .collect()
}
