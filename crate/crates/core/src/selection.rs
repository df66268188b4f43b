//! Fisher-score feature ranking and threshold/min-count selection.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::BinaryLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceConvention {
    /// Divide by n, as the score is usually printed.
    #[default]
    Population,
    /// Divide by n − 1.
    Sample,
}

impl FromStr for VarianceConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "population" => Ok(Self::Population),
            "sample" => Ok(Self::Sample),
            other => Err(Error::Config(format!("unknown variance convention `{other}`"))),
        }
    }
}

impl VarianceConvention {
    pub fn name(self) -> &'static str {
        match self {
            Self::Population => "population",
            Self::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRule {
    pub threshold: f64,
    pub min_count: usize,
    pub variance: VarianceConvention,
}

impl Default for SelectionRule {
    fn default() -> Self {
        Self {
            threshold: 0.3,
            min_count: 15,
            variance: VarianceConvention::Population,
        }
    }
}

fn moments(v: &[f64], conv: VarianceConvention) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.iter().all(|x| *x == v[0]) {
        return (v[0], 0.0);
    }
    let ss: f64 = v.iter().map(|x| (x - m).powi(2)).sum();
    let denom = match conv {
        VarianceConvention::Population => n,
        VarianceConvention::Sample => (n - 1.0).max(1.0),
    };
    (m, ss / denom)
}

/// J = |μ_high − μ_low| / (σ²_high + σ²_low). Non-finite values are skipped.
///
/// A zero denominator scores `+∞` when the means differ and 0 otherwise; a
/// class left empty after skipping missing values scores 0.
pub fn fisher_score(values: &[f64], labels: &[BinaryLabel], conv: VarianceConvention) -> Result<f64> {
    if values.len() != labels.len() {
        return Err(Error::Shape {
            expected: labels.len(),
            actual: values.len(),
        });
    }
    let high_n = labels.iter().filter(|l| l.is_high()).count();
    if high_n == 0 || high_n == labels.len() {
        return Err(Error::UndefinedScore("only one class present".into()));
    }
    let split = |want: BinaryLabel| -> Vec<f64> {
        values
            .iter()
            .zip(labels)
            .filter(|(v, l)| **l == want && v.is_finite())
            .map(|(v, _)| *v)
            .collect()
    };
    let hi = split(BinaryLabel::High);
    let lo = split(BinaryLabel::Low);
    if hi.is_empty() || lo.is_empty() {
        return Ok(0.0);
    }
    let (m1, v1) = moments(&hi, conv);
    let (m2, v2) = moments(&lo, conv);
    let num = (m1 - m2).abs();
    let den = v1 + v2;
    if den == 0.0 {
        return Ok(if num > 0.0 { f64::INFINITY } else { 0.0 });
    }
    Ok(num / den)
}

/// Column scores and the chosen columns, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub scores: Vec<f64>,
    pub selected: Vec<usize>,
}

/// Ranks `order` by descending score, then ascending index.
fn ranked(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Scores every column of `rows` (missing as `None`) and keeps those above the
/// threshold, topped up to `min_count` by rank.
pub fn select_features(
    rows: &[Vec<Option<f64>>],
    labels: &[BinaryLabel],
    rule: &SelectionRule,
) -> Result<Selection> {
    if rows.is_empty() {
        return Err(Error::InsufficientTrials("empty training matrix".into()));
    }
    let width = rows[0].len();
    let mut scores = Vec::with_capacity(width);
    let mut column = vec![0.0; rows.len()];
    for j in 0..width {
        for (c, r) in column.iter_mut().zip(rows) {
            if r.len() != width {
                return Err(Error::Shape {
                    expected: width,
                    actual: r.len(),
                });
            }
            *c = r[j].unwrap_or(f64::NAN);
        }
        scores.push(fisher_score(&column, labels, rule.variance)?);
    }
    let order = ranked(&scores);
    let above = order.iter().take_while(|&&j| scores[j] > rule.threshold).count();
    let keep = above.max(rule.min_count.min(width));
    Ok(Selection {
        selected: order[..keep].to_vec(),
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use BinaryLabel::{High, Low};

    const POP: VarianceConvention = VarianceConvention::Population;

    fn labels(n_high: usize, n_low: usize) -> Vec<BinaryLabel> {
        let mut v = vec![High; n_high];
        v.extend(vec![Low; n_low]);
        v
    }

    #[test]
    fn hand_computed_score() {
        let j = fisher_score(&[0.0, 1.0, 2.0, 3.0], &[High, High, Low, Low], POP).unwrap();
        assert_eq!(j, 4.0);
    }

    #[test]
    fn identical_and_separated_constants() {
        let l = labels(3, 3);
        assert_eq!(fisher_score(&[1.0, 2.0, 3.0, 1.0, 2.0, 3.0], &l, POP).unwrap(), 0.0);
        assert_eq!(fisher_score(&[1.0; 6], &l, POP).unwrap(), 0.0);
        assert_eq!(
            fisher_score(&[1.0, 1.0, 1.0, 2.0, 2.0, 2.0], &l, POP).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn single_class_undefined() {
        assert!(matches!(
            fisher_score(&[1.0, 2.0], &[High, High], POP),
            Err(Error::UndefinedScore(_))
        ));
    }

    #[test]
    fn missing_values_pairwise() {
        let l = [High, High, High, Low, Low, Low];
        let a = fisher_score(&[0.0, 1.0, f64::NAN, 2.0, f64::NAN, 3.0], &l, POP).unwrap();
        assert_eq!(a, 4.0);
        let b = fisher_score(&[f64::NAN, f64::NAN, f64::NAN, 2.0, 1.0, 3.0], &l, POP).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn scale_and_swap() {
        let v = [0.3, 1.7, 0.9, 2.2, 3.1, 2.8, 1.1];
        let l = [High, Low, High, Low, Low, Low, High];
        let j = fisher_score(&v, &l, POP).unwrap();
        let swapped: Vec<BinaryLabel> = l.iter().map(|x| x.flip()).collect();
        assert_eq!(fisher_score(&v, &swapped, POP).unwrap(), j);
        for k in [2.0, -4.0, 0.5] {
            let s: Vec<f64> = v.iter().map(|x| x * k).collect();
            let js = fisher_score(&s, &l, POP).unwrap();
            assert!((js - j / f64::abs(k)).abs() <= 1e-12 * j);
        }
    }

    fn matrix(col_scores: &[f64]) -> (Vec<Vec<Option<f64>>>, Vec<BinaryLabel>) {
        // two samples per class at ±1 around means ±d/2: J = d / 2 with d = 2·target
        let l = labels(2, 2);
        let rows = (0..4)
            .map(|i| {
                col_scores
                    .iter()
                    .map(|&target| {
                        let d = 2.0 * target;
                        let centre = if i < 2 { d / 2.0 } else { -d / 2.0 };
                        Some(centre + if i % 2 == 0 { 1.0 } else { -1.0 })
                    })
                    .collect()
            })
            .collect();
        (rows, l)
    }

    #[test]
    fn threshold_dominates() {
        let s: Vec<f64> = (0..20).map(|j| if j < 18 { 0.5 + j as f64 * 0.01 } else { 0.1 }).collect();
        let (rows, l) = matrix(&s);
        let sel = select_features(&rows, &l, &SelectionRule::default()).unwrap();
        assert_eq!(sel.selected.len(), 18);
        assert_eq!(sel.selected[0], 17);
    }

    #[test]
    fn min_count_tops_up() {
        let s: Vec<f64> = (0..20).map(|j| if j % 5 == 0 { 1.0 } else { 0.01 * j as f64 }).collect();
        let (rows, l) = matrix(&s);
        let sel = select_features(&rows, &l, &SelectionRule::default()).unwrap();
        assert_eq!(sel.selected.len(), 15);
        assert_eq!(&sel.selected[..4], &[0, 5, 10, 15]);
    }

    #[test]
    fn empty_when_nothing_passes() {
        let (rows, l) = matrix(&[0.1, 0.2, 0.25]);
        let rule = SelectionRule {
            min_count: 0,
            ..Default::default()
        };
        assert!(select_features(&rows, &l, &rule).unwrap().selected.is_empty());
    }
}
