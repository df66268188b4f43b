use crate::model::UniformSignal;

/// Centered moving mean over `window` samples.
///
/// Odd windows are plain boxcars. Even windows span `window + 1` samples with
/// half weight on the two end points, so the kernel stays centered and a line
/// maps to itself. Near the edges the window shrinks to the widest symmetric
/// odd window that fits.
pub fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let n = x.len();
    let window = window.max(1);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    let sum = |lo: usize, hi: usize| prefix[hi + 1] - prefix[lo];
    let h = window / 2;
    let even = window % 2 == 0;

    (0..n)
        .map(|i| {
            let r = h.min(i).min(n - 1 - i);
            if r < h || !even {
                sum(i - r, i + r) / (2 * r + 1) as f64
            } else {
                let inner = if h >= 1 { sum(i - h + 1, i + h - 1) } else { 0.0 };
                (inner + 0.5 * (x[i - h] + x[i + h])) / window as f64
            }
        })
        .collect()
}

/// Subtracts the centered moving mean; see [`moving_average`] for the window.
pub fn moving_average_detrend(sig: &UniformSignal, window: usize) -> UniformSignal {
    let ma = moving_average(&sig.samples, window);
    sig.with_samples(sig.samples.iter().zip(ma).map(|(v, m)| v - m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_goes_to_zero() {
        let out = moving_average_detrend(&UniformSignal::new(vec![4.2; 1000], 128.0), 256);
        assert!(out.samples.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn unit_window_is_identity_subtraction() {
        let x: Vec<f64> = (0..50).map(|i| ((i * 13) % 7) as f64).collect();
        let out = moving_average_detrend(&UniformSignal::new(x, 10.0), 1);
        assert!(out.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_interior_vanishes() {
        for window in [255, 256] {
            let x: Vec<f64> = (0..2000).map(|i| 0.37 * i as f64 - 12.0).collect();
            let out = moving_average_detrend(&UniformSignal::new(x.clone(), 128.0), window);
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (i, v) in out.samples.iter().enumerate() {
                assert!(v.abs() < 1e-9 * scale, "window {window} index {i}: {v}");
            }
        }
    }

    #[test]
    fn even_window_matches_brute_force() {
        let x: Vec<f64> = (0..40).map(|i| ((i * i * 7) % 17) as f64).collect();
        let ma = moving_average(&x, 4);
        // interior point 10: 0.5*x8 + x9 + x10 + x11 + 0.5*x12 over 4
        let expect = (0.5 * x[8] + x[9] + x[10] + x[11] + 0.5 * x[12]) / 4.0;
        assert!((ma[10] - expect).abs() < 1e-12);
        // edge point 1 shrinks to radius 1
        assert!((ma[1] - (x[0] + x[1] + x[2]) / 3.0).abs() < 1e-12);
        assert_eq!(ma[0], x[0]);
    }

    #[test]
    fn length_preserved_for_short_input() {
        let out = moving_average_detrend(&UniformSignal::new(vec![1.0, 2.0, 3.0], 1.0), 256);
        assert_eq!(out.len(), 3);
        assert!(out.samples.iter().all(|v| v.abs() < 1e-12));
    }
}
