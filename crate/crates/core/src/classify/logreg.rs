use crate::model::BinaryLabel;

use super::svm::LinearFit;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// 0.5·|w|² + C·Σ c_i·log(1 + exp(−y_i(w·x_i + b))); `theta` is `[w.., b]`.
pub fn logistic_objective(theta: &[f64], x: &[Vec<f64>], y: &[BinaryLabel], weights: &[f64], c: f64) -> f64 {
    let d = theta.len() - 1;
    let (w, b) = (&theta[..d], theta[d]);
    let loss: f64 = x
        .iter()
        .zip(y)
        .zip(weights)
        .map(|((r, l), cw)| cw * softplus(-l.sign() * (dot(w, r) + b)))
        .sum();
    0.5 * dot(w, w) + c * loss
}

pub fn logistic_gradient(theta: &[f64], x: &[Vec<f64>], y: &[BinaryLabel], weights: &[f64], c: f64) -> Vec<f64> {
    let d = theta.len() - 1;
    let (w, b) = (&theta[..d], theta[d]);
    let mut g: Vec<f64> = w.iter().copied().chain([0.0]).collect();
    for ((r, l), cw) in x.iter().zip(y).zip(weights) {
        let s = l.sign();
        let coef = -c * cw * s * sigmoid(-s * (dot(w, r) + b));
        for (gj, xj) in g.iter_mut().zip(r) {
            *gj += coef * xj;
        }
        g[d] += coef;
    }
    g
}

/// Lower triangle of the (d+1)² Hessian in row-major order; the bias is unpenalized.
fn hessian(theta: &[f64], x: &[Vec<f64>], weights: &[f64], c: f64) -> Vec<f64> {
    let d = theta.len() - 1;
    let n = d + 1;
    let mut h = vec![0.0; n * n];
    for j in 0..d {
        h[j * n + j] = 1.0;
    }
    let mut xa = vec![1.0; n];
    for (r, cw) in x.iter().zip(weights) {
        let p = sigmoid(dot(&theta[..d], r) + theta[d]);
        let k = c * cw * p * (1.0 - p);
        xa[..d].copy_from_slice(r);
        for a in 0..n {
            let ka = k * xa[a];
            let row = &mut h[a * n..a * n + a + 1];
            for (hv, xb) in row.iter_mut().zip(&xa[..=a]) {
                *hv += ka * xb;
            }
        }
    }
    h
}

/// Solves A v = b for symmetric positive definite A given by its lower
/// triangle, adding diagonal jitter until the Cholesky factorization succeeds.
fn solve_spd(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(1.0, f64::max);
    let mut jitter = 0.0;
    let mut l = vec![0.0; n * n];
    loop {
        let mut ok = true;
        'outer: for i in 0..n {
            for j in 0..=i {
                let (li, lj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let s = a[i * n + j] + if i == j { jitter } else { 0.0 } - dot(li, lj);
                if i == j {
                    if s <= 0.0 {
                        ok = false;
                        break 'outer;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        if ok {
            let mut z = vec![0.0; n];
            for i in 0..n {
                z[i] = (b[i] - dot(&l[i * n..i * n + i], &z[..i])) / l[i * n + i];
            }
            let mut v = vec![0.0; n];
            for i in (0..n).rev() {
                let s: f64 = (i + 1..n).map(|k| l[k * n + i] * v[k]).sum();
                v[i] = (z[i] - s) / l[i * n + i];
            }
            return v;
        }
        jitter = if jitter == 0.0 { 1e-12 * scale } else { jitter * 10.0 };
        if jitter > 1e6 * scale {
            // hopeless: fall back to a plain gradient step
            return b.to_vec();
        }
    }
}

pub fn fit_logreg(
    x: &[Vec<f64>],
    y: &[BinaryLabel],
    weights: &[f64],
    c: f64,
    tol: f64,
    max_iter: usize,
) -> LinearFit {
    let d = x[0].len();
    let mut theta = vec![0.0; d + 1];
    let mut f = logistic_objective(&theta, x, y, weights, c);
    let mut trace = vec![f];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        let g = logistic_gradient(&theta, x, y, weights, c);
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= tol {
            converged = true;
            break;
        }
        iterations += 1;
        let step = solve_spd(&hessian(&theta, x, weights, c), &g);
        let slope = dot(&g, &step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            let fc = logistic_objective(&cand, x, y, weights, c);
            if fc <= f - 1e-4 * t * slope {
                theta = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        trace.push(f);
        if !accepted {
            // no representable decrease left
            converged = gnorm <= tol.sqrt();
            break;
        }
    }
    let bias = theta.pop().unwrap();
    LinearFit {
        weights: theta,
        bias,
        converged,
        iterations,
        trace,
    }
}
