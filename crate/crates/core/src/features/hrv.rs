//! Interval-series indices shared by the cardiac (NN) and breathing (BB) sets.
//! All take intervals in seconds.

use crate::stats::{mad, mean, median, percentile, std_dev};

/// Histogram bin width for HTI and TINN, seconds.
pub const HIST_BIN_S: f64 = 1.0 / 128.0;

pub fn successive_diffs(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

pub fn rmssd(x: &[f64]) -> f64 {
    let d = successive_diffs(x);
    (d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64).sqrt()
}

pub fn sdsd(x: &[f64]) -> f64 {
    std_dev(&successive_diffs(x), 1)
}

pub fn sd1(x: &[f64]) -> f64 {
    rmssd(x) / std::f64::consts::SQRT_2
}

/// Percentage of successive differences larger than `threshold_s` in magnitude.
pub fn pnn(x: &[f64], threshold_s: f64) -> f64 {
    let d = successive_diffs(x);
    100.0 * d.iter().filter(|v| v.abs() > threshold_s).count() as f64 / d.len() as f64
}

pub fn sdnn(x: &[f64]) -> f64 {
    std_dev(x, 1)
}

pub fn cvnn(x: &[f64]) -> f64 {
    sdnn(x) / mean(x)
}

pub fn cvsd(x: &[f64]) -> f64 {
    rmssd(x) / mean(x)
}

/// Median absolute deviation scaled to match a Gaussian standard deviation.
pub fn mad_nn(x: &[f64]) -> f64 {
    1.4826 * mad(x)
}

pub fn mcv_nn(x: &[f64]) -> f64 {
    mad_nn(x) / median(x)
}

pub fn iqr(x: &[f64]) -> f64 {
    percentile(x, 75.0) - percentile(x, 25.0)
}

fn histogram(x: &[f64]) -> Vec<f64> {
    let idx: Vec<i64> = x.iter().map(|v| (v / HIST_BIN_S).floor() as i64).collect();
    let lo = *idx.iter().min().unwrap();
    let hi = *idx.iter().max().unwrap();
    let mut h = vec![0.0; (hi - lo + 1) as usize];
    for i in idx {
        h[(i - lo) as usize] += 1.0;
    }
    h
}

/// Triangular index: interval count over the modal bin height.
pub fn hti(x: &[f64]) -> f64 {
    let h = histogram(x);
    x.len() as f64 / h.iter().cloned().fold(0.0, f64::max)
}

/// Base width of the least-squares triangle fitted to the interval histogram.
pub fn tinn(x: &[f64]) -> f64 {
    let mut h = vec![0.0];
    h.extend(histogram(x));
    h.push(0.0);
    let peak = h
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > h[best] { i } else { best });
    let top = h[peak];
    // left and right flanks are independent once the apex is fixed
    let left_err = |n: usize| -> f64 {
        let out: f64 = h[..n].iter().map(|v| v * v).sum();
        let tri: f64 = (n..=peak)
            .map(|i| {
                let q = top * (i - n) as f64 / (peak - n) as f64;
                (h[i] - q).powi(2)
            })
            .sum();
        out + tri
    };
    let right_err = |m: usize| -> f64 {
        let out: f64 = h[m + 1..].iter().map(|v| v * v).sum();
        let tri: f64 = (peak + 1..=m)
            .map(|i| {
                let q = top * (m - i) as f64 / (m - peak) as f64;
                (h[i] - q).powi(2)
            })
            .sum();
        out + tri
    };
    let argmin = |range: Vec<usize>, f: &dyn Fn(usize) -> f64| -> usize {
        range
            .into_iter()
            .map(|i| (i, f(i)))
            .fold(None, |best: Option<(usize, f64)>, (i, e)| match best {
                Some((_, be)) if be <= e => best,
                _ => Some((i, e)),
            })
            .unwrap()
            .0
    };
    let n = argmin((0..peak).collect(), &left_err);
    let m = argmin((peak + 1..h.len()).collect(), &right_err);
    (m - n) as f64 * HIST_BIN_S
}

/// Approximate entropy with embedding `m` and tolerance `r` (Chebyshev, self-matches counted).
pub fn apen(x: &[f64], m: usize, r: f64) -> Option<f64> {
    if x.len() < m + 2 {
        return None;
    }
    let phi = |k: usize| -> f64 {
        let count = x.len() - k + 1;
        let mut acc = 0.0;
        for i in 0..count {
            let c = (0..count)
                .filter(|&j| (0..k).all(|t| (x[i + t] - x[j + t]).abs() <= r))
                .count();
            acc += (c as f64 / count as f64).ln();
        }
        acc / count as f64
    };
    Some(phi(m) - phi(m + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_intervals() {
        let x: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 0.8 } else { 1.2 }).collect();
        assert!((rmssd(&x) - 0.4).abs() < 1e-12);
        assert_eq!(pnn(&x, 0.05), 100.0);
        assert!((mean(&x) - 1.0).abs() < 1e-12);
        assert!((sd1(&x) - 0.4 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_intervals() {
        let x = vec![1.0; 60];
        assert_eq!(rmssd(&x), 0.0);
        assert_eq!(pnn(&x, 0.05), 0.0);
        assert_eq!(sdnn(&x), 0.0);
        assert_eq!(hti(&x), 1.0);
        assert_eq!(apen(&x, 2, 0.0), Some(0.0));
    }

    #[test]
    fn tinn_of_triangle() {
        // counts 1,2,3,4,3,2,1 on consecutive bins: the exact triangle has its
        // zeros one bin outside the outermost occupied bins
        let mut x = Vec::new();
        for (k, c) in [1, 2, 3, 4, 3, 2, 1].iter().enumerate() {
            for _ in 0..*c {
                x.push((100 + k) as f64 * HIST_BIN_S + 0.3 * HIST_BIN_S);
            }
        }
        assert!((tinn(&x) - 8.0 * HIST_BIN_S).abs() < 1e-12);
        assert_eq!(hti(&x), 16.0 / 4.0);
    }

    #[test]
    fn apen_regular_vs_irregular() {
        let regular: Vec<f64> = (0..60).map(|i| if i % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let mut s = 12345u64;
        let noisy: Vec<f64> = (0..60)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        let r = |x: &[f64]| 0.2 * sdnn(x);
        let a = apen(&regular, 2, r(&regular)).unwrap();
        let b = apen(&noisy, 2, r(&noisy)).unwrap();
        assert!(a < 0.1 && b > 0.3, "{a} {b}");
    }
}
