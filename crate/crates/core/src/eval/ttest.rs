use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::stats::{mean, std_dev, student_t_sf};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Sidedness {
    /// H1: mean > mu0.
    #[default]
    Greater,
    TwoSided,
}

impl Sidedness {
    pub fn name(self) -> &'static str {
        match self {
            Self::Greater => "greater",
            Self::TwoSided => "two-sided",
        }
    }
}

impl FromStr for Sidedness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greater" | "one-sided" | "one" => Ok(Self::Greater),
            "two-sided" | "two" | "both" => Ok(Self::TwoSided),
            other => Err(Error::Config(format!("unknown t-test sidedness `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

/// Student one-sample test with the n−1 standard deviation.
///
/// Zero variance: equal to `mu0` gives t = 0, p = 0.5 (one-sided) or 1; otherwise
/// t is ±∞ and p takes its limit.
pub fn one_sample_t_test(scores: &[f64], mu0: f64, side: Sidedness) -> Result<TTest> {
    let n = scores.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("t-test needs at least 2 scores, got {n}")));
    }
    let df = (n - 1) as f64;
    let m = mean(scores);
    let s = std_dev(scores, 1);
    let t = if s > 0.0 {
        (m - mu0) / (s / (n as f64).sqrt())
    } else {
        log::warn!("t-test on zero-variance scores");
        if m > mu0 {
            f64::INFINITY
        } else if m < mu0 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    };
    let p = match side {
        Sidedness::Greater => student_t_sf(t, df),
        Sidedness::TwoSided => (2.0 * student_t_sf(t.abs(), df)).min(1.0),
    };
    Ok(TTest { t, p, df })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stars {
    None,
    One,
    Two,
    Three,
}

impl Stars {
    pub fn from_p(p: f64) -> Self {
        if p < 0.001 {
            Self::Three
        } else if p < 0.01 {
            Self::Two
        } else if p < 0.05 {
            Self::One
        } else {
            Self::None
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::None => "",
            Self::One => "*",
            Self::Two => "**",
            Self::Three => "***",
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    #[test]
    fn textbook_case() {
        // n = 5, mean − mu0 = 0.10, s = 0.05
        let d = 0.05 / 2.5f64.sqrt();
        let scores = [0.6 - 2.0 * d, 0.6 - d, 0.6, 0.6 + d, 0.6 + 2.0 * d];
        assert!((std_dev(&scores, 1) - 0.05).abs() < 1e-12);
        let r = one_sample_t_test(&scores, 0.5, Sidedness::Greater).unwrap();
        assert!((r.t - 4.472).abs() < 1e-3, "{}", r.t);
        let oracle = 1.0 - StudentsT::new(0.0, 1.0, 4.0).unwrap().cdf(r.t);
        assert!((r.p - oracle).abs() < 1e-10);
        assert!((r.p - 0.0055).abs() < 5e-4, "{}", r.p);
        let two = one_sample_t_test(&scores, 0.5, Sidedness::TwoSided).unwrap();
        assert!((two.p - 2.0 * r.p).abs() < 1e-15);
    }

    #[test]
    fn list_example_gets_three_stars() {
        let r = one_sample_t_test(&[0.60, 0.62, 0.58, 0.61, 0.59], 0.5, Sidedness::Greater).unwrap();
        assert!((r.t - 14.14).abs() < 0.01, "{}", r.t);
        assert_eq!(Stars::from_p(r.p), Stars::Three);
    }

    #[test]
    fn zero_variance_conventions() {
        let r = one_sample_t_test(&[0.5; 4], 0.5, Sidedness::Greater).unwrap();
        assert_eq!((r.t, r.p), (0.0, 0.5));
        let r = one_sample_t_test(&[0.7; 4], 0.5, Sidedness::Greater).unwrap();
        assert_eq!(r.p, 0.0);
        assert!(one_sample_t_test(&[0.7], 0.5, Sidedness::Greater).is_err());
    }

    #[test]
    fn shift_invariance() {
        let s = [0.3, 0.55, 0.61, 0.48, 0.52, 0.7];
        let a = one_sample_t_test(&s, 0.5, Sidedness::Greater).unwrap();
        let shifted: Vec<f64> = s.iter().map(|x| x + 3.25).collect();
        let b = one_sample_t_test(&shifted, 3.75, Sidedness::Greater).unwrap();
        assert!((a.t - b.t).abs() < 1e-9);
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(Stars::from_p(0.05), Stars::None);
        assert_eq!(Stars::from_p(0.0499), Stars::One);
        assert_eq!(Stars::from_p(0.005), Stars::Two);
        assert_eq!(Stars::from_p(0.0009).symbol(), "***");
    }
}
