use crate::error::{Error, Result};
use crate::eval::Stars;
use crate::stats::{mean, student_t_sf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationCell {
    /// `None` when either list has zero variance.
    pub r: Option<f64>,
    /// Two-sided.
    pub p: Option<f64>,
    pub n: usize,
}

impl CorrelationCell {
    pub fn stars(&self) -> Stars {
        self.p.map_or(Stars::None, Stars::from_p)
    }
}

/// Pearson r with a two-sided p from t = r·√((n−2)/(1−r²)).
pub fn pearson(a: &[f64], b: &[f64]) -> Result<CorrelationCell> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("correlation needs 3 pairs, got {n}")));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if !(saa > 0.0 && sbb > 0.0) {
        return Ok(CorrelationCell { r: None, p: None, n });
    }
    let r = (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0);
    Ok(CorrelationCell {
        r: Some(r),
        p: Some(correlation_p(r, n)),
        n,
    })
}

pub fn correlation_p(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    (2.0 * student_t_sf(t.abs(), df)).min(1.0)
}

/// Symmetric matrix over setups sharing one subject order. Diagonal cells of
/// non-degenerate setups are exactly r = 1, p = 0.
pub fn pearson_matrix(setups: &[Vec<f64>]) -> Result<Vec<Vec<CorrelationCell>>> {
    let k = setups.len();
    let mut m = vec![vec![CorrelationCell { r: None, p: None, n: 0 }; k]; k];
    for i in 0..k {
        for j in i..k {
            let mut c = pearson(&setups[i], &setups[j])?;
            if i == j && c.r.is_some() {
                c.r = Some(1.0);
                c.p = Some(0.0);
            }
            m[i][j] = c;
            m[j][i] = c;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(0.3..0.8)).collect()
    }

    #[test]
    fn self_and_negation() {
        let a = [0.5, 0.61, 0.43, 0.7, 0.52];
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        let m = pearson_matrix(&[a.to_vec(), neg]).unwrap();
        assert_eq!(m[0][0].r, Some(1.0));
        assert_eq!(m[0][0].p, Some(0.0));
        assert!((m[0][1].r.unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(m[0][1], m[1][0]);
    }

    #[test]
    fn zero_variance_is_undefined() {
        let m = pearson_matrix(&[vec![0.5; 4], vec![0.1, 0.2, 0.3, 0.5]]).unwrap();
        assert_eq!(m[0][1].r, None);
        assert_eq!(m[0][0].r, None);
        assert!(m[1][1].r.is_some());
        assert_eq!(m[0][1].stars(), Stars::None);
    }

    #[test]
    fn p_matches_t_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(5..60);
            let a = random(&mut rng, n);
            let b: Vec<f64> = a.iter().map(|x| x + rng.gen_range(-0.3..0.3)).collect();
            let c = pearson(&a, &b).unwrap();
            let r = c.r.unwrap();
            let df = (n - 2) as f64;
            let t = r * (df / (1.0 - r * r)).sqrt();
            let oracle = 2.0 * (1.0 - StudentsT::new(0.0, 1.0, df).unwrap().cdf(t.abs()));
            assert!((c.p.unwrap() - oracle).abs() < 1e-6, "{} vs {oracle}", c.p.unwrap());
        }
    }

    #[test]
    fn affine_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random(&mut rng, 30);
        let b = random(&mut rng, 30);
        let a2: Vec<f64> = a.iter().map(|x| 3.0 * x - 1.0).collect();
        let r1 = pearson(&a, &b).unwrap().r.unwrap();
        let r2 = pearson(&a2, &b).unwrap().r.unwrap();
        assert!((r1 - r2).abs() < 1e-12);
    }

    #[test]
    fn null_coverage_at_42() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let inside = (0..1000)
            .filter(|_| {
                let a = random(&mut rng, 42);
                let b = random(&mut rng, 42);
                pearson(&a, &b).unwrap().r.unwrap().abs() < 0.31
            })
            .count();
        assert!(inside >= 950, "{inside}");
    }
}
