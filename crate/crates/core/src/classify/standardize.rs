/// Per-feature training mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns with zero training variance; these map to 0.
    pub zero_variance: Vec<usize>,
}

pub fn standardize_fit(rows: &[Vec<f64>]) -> Standardization {
    let d = rows.first().map_or(0, |r| r.len());
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    let mut std = vec![0.0; d];
    let mut zero_variance = Vec::new();
    for j in 0..d {
        let first = rows[0][j];
        if rows.iter().all(|r| r[j] == first) {
            mean[j] = first;
            zero_variance.push(j);
            continue;
        }
        let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let v = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n;
        mean[j] = m;
        std[j] = v.sqrt();
        if !(std[j] > 0.0) {
            zero_variance.push(j);
        }
    }
    Standardization {
        mean,
        std,
        zero_variance,
    }
}

impl Standardization {
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| if *s > 0.0 { (x - m) / s } else { 0.0 })
            .collect()
    }
}

pub fn standardize_apply(stats: &Standardization, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| stats.apply_row(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..d).map(|_| rng.gen_range(-50.0..50.0)).collect()).collect()
    }

    #[test]
    fn training_matrix_is_unit_scaled() {
        let x = random(1, 37, 6);
        let s = standardize_fit(&x);
        let z = standardize_apply(&s, &x);
        for j in 0..6 {
            let col: Vec<f64> = z.iter().map(|r| r[j]).collect();
            let m = col.iter().sum::<f64>() / 37.0;
            let v = col.iter().map(|c| (c - m).powi(2)).sum::<f64>() / 37.0;
            assert!(m.abs() < 1e-9 && (v.sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let mut x = random(2, 10, 3);
        for r in &mut x {
            r[1] = 7.5;
        }
        let s = standardize_fit(&x);
        assert_eq!(s.zero_variance, vec![1]);
        assert!(standardize_apply(&s, &x).iter().all(|r| r[1] == 0.0));
    }

    #[test]
    fn affine_inputs_give_affine_outputs() {
        let x = random(3, 20, 4);
        let s = standardize_fit(&x);
        let (a, b) = (3.5, -2.0);
        let y: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| a * v + b).collect()).collect();
        let zx = standardize_apply(&s, &x);
        let zy = standardize_apply(&s, &y);
        // zy = a·zx + (b + (a − 1)·mean) / std, column-wise
        for (rx, ry) in zx.iter().zip(&zy) {
            for j in 0..4 {
                let shift = (b + (a - 1.0) * s.mean[j]) / s.std[j];
                assert!((ry[j] - (a * rx[j] + shift)).abs() < 1e-9);
            }
        }
    }
}
