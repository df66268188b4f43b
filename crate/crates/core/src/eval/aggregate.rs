use crate::classify::{baseline_vote, BaselineStrategy};
use crate::error::{Error, Result};
use crate::model::{BinaryLabel, SubjectId};
use crate::stats::mean;

use super::metrics::{accuracy, macro_f1, ConfusionMatrix};
use super::subject::SubjectResult;
use super::ttest::{one_sample_t_test, Sidedness, Stars};
use super::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub n_subjects: usize,
    pub mean_accuracy: f64,
    pub mean_macro_f1: f64,
    pub accuracies: Vec<f64>,
    pub scores: Vec<f64>,
    pub t_statistic: f64,
    pub p_value: f64,
    pub stars: Stars,
    pub baseline_reference: f64,
}

/// Unweighted means over subjects and a t-test of their F1 against `reference`.
pub fn aggregate_scores(accuracies: &[f64], scores: &[f64], reference: f64, side: Sidedness) -> Result<AggregateResult> {
    if scores.len() < 2 {
        return Err(Error::InsufficientSubjects(scores.len()));
    }
    let test = one_sample_t_test(scores, reference, side)?;
    Ok(AggregateResult {
        n_subjects: scores.len(),
        mean_accuracy: mean(accuracies),
        mean_macro_f1: mean(scores),
        accuracies: accuracies.to_vec(),
        scores: scores.to_vec(),
        t_statistic: test.t,
        p_value: test.p,
        stars: Stars::from_p(test.p),
        baseline_reference: reference,
    })
}

pub fn aggregate(results: &[SubjectResult], reference: f64, side: Sidedness) -> Result<AggregateResult> {
    let acc: Vec<f64> = results.iter().map(|r| r.accuracy).collect();
    let f1: Vec<f64> = results.iter().map(|r| r.macro_f1).collect();
    aggregate_scores(&acc, &f1, reference, side)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub strategies: Vec<(BaselineStrategy, AggregateResult)>,
    /// Best mean macro F1 among the strategies; the reference for stars.
    pub best_f1: f64,
}

/// Runs each voting strategy per subject, one prediction per trial. Strategy
/// statistics come from the subject's full label list. Stochastic strategies
/// are averaged over `repetitions` seeded draws per subject.
pub fn run_baselines(
    subjects: &[(SubjectId, Vec<BinaryLabel>)],
    repetitions: usize,
    seed: u64,
    side: Sidedness,
) -> Result<BaselineReport> {
    if subjects.len() < 2 {
        return Err(Error::InsufficientSubjects(subjects.len()));
    }
    let mut per = Vec::new();
    for strategy in BaselineStrategy::ALL {
        let reps = if strategy.is_stochastic() { repetitions.max(1) } else { 1 };
        let mut accs = Vec::with_capacity(subjects.len());
        let mut f1s = Vec::with_capacity(subjects.len());
        for (id, labels) in subjects {
            let (mut a, mut f) = (0.0, 0.0);
            for rep in 0..reps {
                let s = derive_seed(seed, &[id.as_str(), strategy.name(), &rep.to_string()]);
                let preds = baseline_vote(strategy, labels, labels.len(), s);
                let cm = ConfusionMatrix::from_predictions(&preds, labels)?;
                a += accuracy(&cm)?;
                f += macro_f1(&cm)?;
            }
            accs.push(a / reps as f64);
            f1s.push(f / reps as f64);
        }
        per.push((strategy, accs, f1s));
    }
    let best_f1 = per.iter().map(|(_, _, f)| mean(f)).fold(f64::NEG_INFINITY, f64::max);
    let strategies = per
        .into_iter()
        .map(|(s, a, f)| aggregate_scores(&a, &f, best_f1, side).map(|r| (s, r)))
        .collect::<Result<_>>()?;
    Ok(BaselineReport { strategies, best_f1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use BinaryLabel::{High, Low};

    fn subjects(n: usize, seed: u64) -> Vec<(SubjectId, Vec<BinaryLabel>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let high = rng.gen_range(8..31);
                let labels = (0..38).map(|k| if k < high { High } else { Low }).collect();
                (SubjectId::new(i.to_string()), labels)
            })
            .collect()
    }

    fn find(r: &BaselineReport, s: BaselineStrategy) -> &AggregateResult {
        &r.strategies.iter().find(|(k, _)| *k == s).unwrap().1
    }

    #[test]
    fn equal_scores_give_no_stars() {
        let r = aggregate_scores(&[0.5; 3], &[0.5; 3], 0.5, Sidedness::Greater).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert_eq!(r.stars, Stars::None);
        assert!(matches!(
            aggregate_scores(&[0.5], &[0.5], 0.5, Sidedness::Greater),
            Err(Error::InsufficientSubjects(1))
        ));
    }

    #[test]
    fn baseline_expectations() {
        let subs = subjects(42, 9);
        let r = run_baselines(&subs, 1000, 3, Sidedness::Greater).unwrap();
        let random = find(&r, BaselineStrategy::Random);
        assert!((random.mean_accuracy - 0.5).abs() < 0.01, "{}", random.mean_accuracy);
        let fractions: Vec<f64> = subs
            .iter()
            .map(|(_, l)| l.iter().filter(|x| x.is_high()).count() as f64 / l.len() as f64)
            .collect();
        let maj: f64 = fractions.iter().map(|p| if *p >= 0.5 { *p } else { 1.0 - p }).sum::<f64>() / 42.0;
        assert!((find(&r, BaselineStrategy::Majority).mean_accuracy - maj).abs() < 1e-12);
        let ratio: f64 = fractions.iter().map(|p| p * p + (1.0 - p).powi(2)).sum::<f64>() / 42.0;
        let got = find(&r, BaselineStrategy::Ratio).mean_accuracy;
        assert!((got - ratio).abs() < 0.005, "{got} vs {ratio}");
        let best = r.strategies.iter().map(|(_, a)| a.mean_macro_f1).fold(0.0, f64::max);
        assert_eq!(r.best_f1, best);
    }

    #[test]
    fn baselines_deterministic() {
        let subs = subjects(5, 1);
        assert_eq!(
            run_baselines(&subs, 10, 7, Sidedness::Greater).unwrap(),
            run_baselines(&subs, 10, 7, Sidedness::Greater).unwrap()
        );
    }
}
