use crate::error::{Error, Result};
use crate::model::BinaryLabel;

/// Counts with High as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn from_predictions(preds: &[BinaryLabel], labels: &[BinaryLabel]) -> Result<Self> {
        if preds.len() != labels.len() {
            return Err(Error::Shape {
                expected: labels.len(),
                actual: preds.len(),
            });
        }
        if preds.is_empty() {
            return Err(Error::EmptyEval);
        }
        let mut cm = Self::default();
        for (p, l) in preds.iter().zip(labels) {
            cm.record(*p, *l);
        }
        Ok(cm)
    }

    pub fn record(&mut self, predicted: BinaryLabel, actual: BinaryLabel) {
        match (predicted.is_high(), actual.is_high()) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts with Low as the positive class.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::EmptyEval);
    }
    Ok((cm.tp + cm.tn) as f64 / cm.total() as f64)
}

/// F1 of the positive class; `None` when the class never occurs and is never predicted.
fn class_f1(tp: usize, fp: usize, fn_: usize) -> Option<f64> {
    let den = 2 * tp + fp + fn_;
    (den > 0).then(|| 2.0 * tp as f64 / den as f64)
}

/// Mean of the High and Low F1 scores. A class absent from both predictions
/// and labels is left out of the mean.
pub fn macro_f1(cm: &ConfusionMatrix) -> Result<f64> {
    let s = cm.swapped();
    let parts: Vec<f64> = [class_f1(cm.tp, cm.fp, cm.fn_), class_f1(s.tp, s.fp, s.fn_)]
        .into_iter()
        .flatten()
        .collect();
    if parts.is_empty() {
        return Err(Error::EmptyEval);
    }
    Ok(parts.iter().sum::<f64>() / parts.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use BinaryLabel::{High, Low};

    fn cm(tp: usize, fp: usize, fn_: usize, tn: usize) -> ConfusionMatrix {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    #[test]
    fn symmetric_half() {
        let c = cm(5, 5, 5, 5);
        assert_eq!(accuracy(&c).unwrap(), 0.5);
        assert_eq!(macro_f1(&c).unwrap(), 0.5);
    }

    #[test]
    fn all_high_closed_form() {
        // 1000 trials with p = 0.586 High, everything predicted High
        let c = cm(586, 414, 0, 0);
        let p = 0.586;
        assert!((macro_f1(&c).unwrap() - p / (1.0 + p)).abs() < 1e-12);
        assert!((macro_f1(&c).unwrap() - 0.3695).abs() < 1e-4);
        assert!((accuracy(&c).unwrap() - 0.586).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_single_class() {
        assert_eq!(macro_f1(&cm(3, 0, 0, 4)).unwrap(), 1.0);
        // only High exists and is always right: Low is excluded
        assert_eq!(macro_f1(&cm(3, 0, 0, 0)).unwrap(), 1.0);
        assert!(matches!(macro_f1(&cm(0, 0, 0, 0)), Err(Error::EmptyEval)));
    }

    #[test]
    fn from_predictions_counts() {
        let c = ConfusionMatrix::from_predictions(&[High, High, Low, Low], &[High, Low, High, Low]).unwrap();
        assert_eq!(c, cm(1, 1, 1, 1));
        assert!(matches!(ConfusionMatrix::from_predictions(&[], &[]), Err(Error::EmptyEval)));
    }

    proptest::proptest! {
        #[test]
        fn bounded_and_relabel_invariant(tp in 0usize..30, fp in 0usize..30, fn_ in 0usize..30, tn in 0usize..30) {
            proptest::prop_assume!(tp + fp + fn_ + tn > 0);
            let c = cm(tp, fp, fn_, tn);
            let f = macro_f1(&c).unwrap();
            let a = accuracy(&c).unwrap();
            proptest::prop_assert!((0.0..=1.0).contains(&f));
            proptest::prop_assert!((0.0..=1.0).contains(&a));
            proptest::prop_assert_eq!(f, macro_f1(&c.swapped()).unwrap());
            proptest::prop_assert_eq!(f == 1.0, fp == 0 && fn_ == 0);
        }
    }
}
