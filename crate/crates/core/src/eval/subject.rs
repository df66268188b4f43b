use crate::classify::{fit, ClassifierConfig};
use crate::error::{Error, Result};
use crate::features::{assemble_features, FeatureConfig, Scenario};
use crate::model::{BinaryLabel, Dimension, Flavor, SubjectId, TieRule, TrialRecord, VideoId};
use crate::selection::{select_features, SelectionRule};

use super::folds::lovo_folds;
use super::metrics::{accuracy, macro_f1, ConfusionMatrix};
use super::derive_seed;

/// Feature rows of one subject under one scenario, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFeatures {
    pub subject_id: SubjectId,
    pub videos: Vec<VideoId>,
    pub names: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl SubjectFeatures {
    /// Extracts every trial's features; all trials must belong to one subject.
    pub fn from_trials(
        trials: &[&TrialRecord],
        scenario: &Scenario,
        flavor: Flavor,
        cfg: &FeatureConfig,
    ) -> Result<Self> {
        let first = trials
            .first()
            .ok_or_else(|| Error::InsufficientTrials("subject has no trials".into()))?;
        let mut names = Vec::new();
        let mut rows = Vec::with_capacity(trials.len());
        for t in trials {
            if t.subject_id != first.subject_id {
                return Err(Error::Config(format!(
                    "trials of subjects {} and {} mixed",
                    first.subject_id, t.subject_id
                )));
            }
            let fv = assemble_features(t, scenario, flavor, cfg)?;
            if names.is_empty() {
                names = fv.names.clone();
            } else if names != fv.names {
                return Err(Error::Config(format!("feature names differ in trial {}", t.video_id)));
            }
            rows.push(fv.values);
        }
        Ok(Self {
            subject_id: first.subject_id.clone(),
            videos: trials.iter().map(|t| t.video_id.clone()).collect(),
            names,
            rows,
        })
    }
}

pub fn subject_labels(trials: &[&TrialRecord], dimension: Dimension, tie: TieRule) -> Result<Vec<BinaryLabel>> {
    trials.iter().map(|t| t.label(dimension, tie)).collect()
}

/// What happened in one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub video: VideoId,
    pub actual: BinaryLabel,
    pub predicted: BinaryLabel,
    /// Set when the fold fell back to the training majority.
    pub failure: Option<String>,
    pub selected: Vec<usize>,
    pub parameter_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectResult {
    pub subject_id: SubjectId,
    pub dimension: Dimension,
    pub scenario: String,
    pub classifier: String,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub confusion: ConfusionMatrix,
    pub fold_failures: usize,
    pub folds: Vec<FoldOutcome>,
}

fn train_majority(labels: &[BinaryLabel]) -> BinaryLabel {
    let high = labels.iter().filter(|l| l.is_high()).count();
    if 2 * high >= labels.len() {
        BinaryLabel::High
    } else {
        BinaryLabel::Low
    }
}

/// Leave-one-video-out over precomputed features: per fold, select on the
/// training rows, fit, and predict the held-out trial. Folds that cannot be
/// fit predict the training majority and count as failures.
pub fn evaluate_subject(
    data: &SubjectFeatures,
    labels: &[BinaryLabel],
    dimension: Dimension,
    scenario: &str,
    clf: &ClassifierConfig,
    rule: &SelectionRule,
) -> Result<SubjectResult> {
    if labels.len() != data.rows.len() {
        return Err(Error::Shape {
            expected: data.rows.len(),
            actual: labels.len(),
        });
    }
    let folds = lovo_folds(&data.videos)?;
    let mut confusion = ConfusionMatrix::default();
    let mut outcomes = Vec::with_capacity(folds.len());
    let mut failures = 0;
    for fold in &folds {
        let train_rows: Vec<Vec<Option<f64>>> = fold.train.iter().map(|&i| data.rows[i].clone()).collect();
        let train_labels: Vec<BinaryLabel> = fold.train.iter().map(|&i| labels[i]).collect();
        let mut cfg = clf.clone();
        cfg.seed = derive_seed(clf.seed, &[data.subject_id.as_str(), data.videos[fold.test].as_str()]);
        let attempt = select_features(&train_rows, &train_labels, rule).and_then(|sel| {
            let model = fit(&train_rows, &train_labels, &sel.selected, &cfg)?;
            let pred = model.predict(std::slice::from_ref(&data.rows[fold.test]))?[0];
            Ok((sel.selected, model.parameter_hash(), pred))
        });
        let actual = labels[fold.test];
        let outcome = match attempt {
            Ok((selected, hash, predicted)) => FoldOutcome {
                video: data.videos[fold.test].clone(),
                actual,
                predicted,
                failure: None,
                selected,
                parameter_hash: Some(hash),
            },
            Err(e @ (Error::UndefinedScore(_) | Error::DegenerateFit(_))) => {
                failures += 1;
                log::debug!("subject {} fold {}: {e}", data.subject_id, data.videos[fold.test]);
                FoldOutcome {
                    video: data.videos[fold.test].clone(),
                    actual,
                    predicted: train_majority(&train_labels),
                    failure: Some(e.to_string()),
                    selected: Vec::new(),
                    parameter_hash: None,
                }
            }
            Err(e) => return Err(e),
        };
        confusion.record(outcome.predicted, actual);
        outcomes.push(outcome);
    }
    if failures == folds.len() {
        return Err(Error::SubjectEval(data.subject_id.to_string()));
    }
    Ok(SubjectResult {
        subject_id: data.subject_id.clone(),
        dimension,
        scenario: scenario.to_string(),
        classifier: clf.label(),
        accuracy: accuracy(&confusion)?,
        macro_f1: macro_f1(&confusion)?,
        confusion,
        fold_failures: failures,
        folds: outcomes,
    })
}

/// Extracts the subject's features and evaluates one dimension.
#[allow(clippy::too_many_arguments)]
pub fn run_subject(
    trials: &[&TrialRecord],
    dimension: Dimension,
    tie: TieRule,
    scenario: &Scenario,
    flavor: Flavor,
    features: &FeatureConfig,
    clf: &ClassifierConfig,
    rule: &SelectionRule,
) -> Result<SubjectResult> {
    let data = SubjectFeatures::from_trials(trials, scenario, flavor, features)?;
    let labels = subject_labels(trials, dimension, tie)?;
    evaluate_subject(&data, &labels, dimension, &scenario.id(), clf, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::ClassifierKind;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// 38 trials, 19 per class, 20 noise columns plus `offset`σ on column 0.
    fn subject(offset: f64, seed: u64) -> (SubjectFeatures, Vec<BinaryLabel>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nrm = Normal::<f64>::new(0.0, 1.0).unwrap();
        let labels: Vec<BinaryLabel> = (0..38)
            .map(|i| if i % 2 == 0 { BinaryLabel::High } else { BinaryLabel::Low })
            .collect();
        let rows = labels
            .iter()
            .map(|l| {
                (0..20)
                    .map(|j| Some(nrm.sample(&mut rng) + if j == 0 && l.is_high() { offset } else { 0.0 }))
                    .collect()
            })
            .collect();
        let data = SubjectFeatures {
            subject_id: "s1".into(),
            videos: (1..=38).map(|i| VideoId::new(i.to_string())).collect(),
            names: (0..20).map(|j| format!("X.f{j}")).collect(),
            rows,
        };
        (data, labels)
    }

    fn run(data: &SubjectFeatures, labels: &[BinaryLabel], kind: ClassifierKind) -> SubjectResult {
        let cfg = ClassifierConfig::new(kind);
        evaluate_subject(data, labels, Dimension::Arousal, "X", &cfg, &SelectionRule::default()).unwrap()
    }

    #[test]
    fn offset_subject_is_separable() {
        let (data, labels) = subject(5.0, 1);
        for kind in ClassifierKind::ALL {
            let r = run(&data, &labels, kind);
            assert!(r.macro_f1 >= 0.9, "{kind}: {}", r.macro_f1);
            assert_eq!(r.confusion.total(), 38);
            assert_eq!(r.fold_failures, 0);
        }
    }

    #[test]
    fn shuffled_labels_near_chance() {
        let (data, labels) = subject(5.0, 2);
        let mut f1s = Vec::new();
        for seed in 0..20 {
            let mut l = labels.clone();
            l.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            f1s.push(run(&data, &l, ClassifierKind::LogReg).macro_f1);
        }
        let m = f1s.iter().sum::<f64>() / 20.0;
        assert!((m - 0.5).abs() <= 0.08, "{m}");
    }

    #[test]
    fn deterministic() {
        let (data, labels) = subject(1.0, 3);
        assert_eq!(run(&data, &labels, ClassifierKind::Svm), run(&data, &labels, ClassifierKind::Svm));
    }

    #[test]
    fn test_row_does_not_leak() {
        let (data, labels) = subject(1.0, 4);
        let base = run(&data, &labels, ClassifierKind::LogReg);
        let mut changed = data.clone();
        changed.rows[7] = vec![Some(1e3); 20];
        let r = run(&changed, &labels, ClassifierKind::LogReg);
        let fold = base.folds.iter().position(|f| f.video.as_str() == "8").unwrap();
        assert_eq!(base.folds[fold].parameter_hash, r.folds[fold].parameter_hash);
        assert_eq!(base.folds[fold].selected, r.folds[fold].selected);
        assert_ne!(base.folds[0].parameter_hash, r.folds[0].parameter_hash);
    }

    #[test]
    fn single_class_folds_fall_back() {
        let (data, mut labels) = subject(1.0, 5);
        // one High trial: its own fold trains on Low only
        for (i, l) in labels.iter_mut().enumerate() {
            *l = if i == 4 { BinaryLabel::High } else { BinaryLabel::Low };
        }
        let r = run(&data, &labels, ClassifierKind::NaiveBayes);
        assert_eq!(r.fold_failures, 1);
        let f = r.folds.iter().find(|f| f.video.as_str() == "5").unwrap();
        assert!(f.failure.is_some());
        assert_eq!(f.predicted, BinaryLabel::Low);
    }

    #[test]
    fn every_fold_failing_is_error() {
        let (mut data, _) = subject(0.0, 6);
        data.rows.truncate(2);
        data.videos.truncate(2);
        let labels = [BinaryLabel::High, BinaryLabel::Low];
        let r = evaluate_subject(
            &data,
            &labels,
            Dimension::Valence,
            "X",
            &ClassifierConfig::new(ClassifierKind::LogReg),
            &SelectionRule::default(),
        );
        assert!(matches!(r, Err(Error::SubjectEval(_))));
    }
}
