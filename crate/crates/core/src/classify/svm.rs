use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::BinaryLabel;

/// Result of a linear solver.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Objective after each outer iteration; non-increasing.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hinge-loss SVM, 0.5·|w̃|² + Σ C·c_i·max(0, 1 − y_i w̃·x̃_i) with the bias
/// folded into w̃ through a constant feature. Dual coordinate descent in a
/// seeded order, stopped on relative duality gap.
pub fn fit_svm(
    x: &[Vec<f64>],
    y: &[BinaryLabel],
    weights: &[f64],
    c: f64,
    tol: f64,
    max_epochs: usize,
    seed: u64,
) -> LinearFit {
    let n = x.len();
    let d = x[0].len();
    let aug: Vec<Vec<f64>> = x.iter().map(|r| r.iter().copied().chain([1.0]).collect()).collect();
    let s: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    let upper: Vec<f64> = weights.iter().map(|w| c * w).collect();
    let qii: Vec<f64> = aug.iter().map(|r| dot(r, r)).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut epochs = 0;

    let primal = |w: &[f64]| -> f64 {
        0.5 * dot(w, w)
            + (0..n)
                .map(|i| upper[i] * (1.0 - s[i] * dot(w, &aug[i])).max(0.0))
                .sum::<f64>()
    };
    let dual_obj = |w: &[f64], alpha: &[f64]| 0.5 * dot(w, w) - alpha.iter().sum::<f64>();

    for _ in 0..max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        for &i in &order {
            let g = s[i] * dot(&w, &aug[i]) - 1.0;
            let old = alpha[i];
            let new = (old - g / qii[i]).clamp(0.0, upper[i]);
            let delta = new - old;
            if delta != 0.0 {
                alpha[i] = new;
                for (wj, xj) in w.iter_mut().zip(&aug[i]) {
                    *wj += delta * s[i] * xj;
                }
            }
        }
        let f = dual_obj(&w, &alpha);
        trace.push(f);
        let p = primal(&w);
        // strong duality: primal(w) + dual(α) ≥ 0, zero at the optimum
        if p + f <= tol * p.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let bias = w.pop().unwrap();
    LinearFit {
        weights: w,
        bias,
        converged,
        iterations: epochs,
        trace,
    }
}
