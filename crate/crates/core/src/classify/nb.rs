use crate::model::BinaryLabel;

/// Gaussian naive Bayes. Index 0 is Low, 1 is High.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub log_priors: [f64; 2],
    /// Variance floor added to every class variance.
    pub epsilon: f64,
}

fn class_index(l: BinaryLabel) -> usize {
    l.is_high() as usize
}

pub fn fit_nb(x: &[Vec<f64>], y: &[BinaryLabel], smoothing: f64) -> GaussianNb {
    let d = x[0].len();
    let n = x.len() as f64;
    let mut max_var = 0.0f64;
    for j in 0..d {
        let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
        max_var = max_var.max(x.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n);
    }
    let epsilon = if max_var > 0.0 { smoothing * max_var } else { smoothing };
    let mut means = [vec![0.0; d], vec![0.0; d]];
    let mut variances = [vec![0.0; d], vec![0.0; d]];
    let mut counts = [0usize; 2];
    for l in y {
        counts[class_index(*l)] += 1;
    }
    for c in 0..2 {
        let rows: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, l)| class_index(**l) == c).map(|(r, _)| r).collect();
        let k = rows.len() as f64;
        for j in 0..d {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / k;
            let v = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / k;
            means[c][j] = m;
            variances[c][j] = v + epsilon;
        }
    }
    let log_priors = [(counts[0] as f64 / n).ln(), (counts[1] as f64 / n).ln()];
    GaussianNb {
        means,
        variances,
        log_priors,
        epsilon,
    }
}

impl GaussianNb {
    pub fn log_joint(&self, row: &[f64]) -> [f64; 2] {
        let mut out = self.log_priors;
        for (c, o) in out.iter_mut().enumerate() {
            for ((x, m), v) in row.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                *o -= 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m).powi(2) / v);
            }
        }
        out
    }

    /// Log-posterior margin of High over Low.
    pub fn decision(&self, row: &[f64]) -> f64 {
        let [low, high] = self.log_joint(row);
        high - low
    }
}
