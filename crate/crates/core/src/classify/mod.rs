mod baseline;
mod logreg;
mod nb;
mod standardize;
mod svm;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::BinaryLabel;

pub use baseline::{baseline_vote, BaselineStrategy};
pub use logreg::{fit_logreg, logistic_gradient, logistic_objective};
pub use nb::{fit_nb, GaussianNb};
pub use standardize::{standardize_apply, standardize_fit, Standardization};
pub use svm::{fit_svm, LinearFit};

pub const NB_VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassifierKind {
    NaiveBayes,
    Svm,
    LogReg,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [Self::NaiveBayes, Self::Svm, Self::LogReg];

    pub fn name(self) -> &'static str {
        match self {
            Self::NaiveBayes => "NB",
            Self::Svm => "SVM",
            Self::LogReg => "LR",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Self::Svm => 1e-4,
            _ => 1e-6,
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NB" | "GNB" => Ok(Self::NaiveBayes),
            "SVM" => Ok(Self::Svm),
            "LR" => Ok(Self::LogReg),
            other => Err(Error::Config(format!("unknown classifier `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    /// Loss weight against the L2 penalty; ignored by NB.
    pub c: f64,
    pub balanced: bool,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl ClassifierConfig {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            c: 1.0,
            balanced: true,
            max_iterations: 1000,
            tolerance: kind.default_tolerance(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }

    /// Setup label such as `LR(C=1)`; NB has no C.
    pub fn label(&self) -> String {
        match self.kind {
            ClassifierKind::NaiveBayes => "NB".into(),
            k => format!("{}(C={})", k.name(), self.c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    NaiveBayes(GaussianNb),
    Linear { weights: Vec<f64>, bias: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub kind: ClassifierKind,
    pub params: Params,
    /// Present for SVM and LR only.
    pub standardization: Option<Standardization>,
    /// Column indices into the full feature row.
    pub selected: Vec<usize>,
    /// Training mean per selected column, substituted for missing values.
    pub imputation: Vec<f64>,
    /// Width of the full feature row the model was trained on.
    pub n_features: usize,
    pub converged: bool,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
}

/// Class weights n/(2·n_c) when balanced, 1 otherwise.
pub fn sample_weights(labels: &[BinaryLabel], balanced: bool) -> Vec<f64> {
    if !balanced {
        return vec![1.0; labels.len()];
    }
    let n = labels.len() as f64;
    let high = labels.iter().filter(|l| l.is_high()).count() as f64;
    let low = n - high;
    labels
        .iter()
        .map(|l| if l.is_high() { n / (2.0 * high) } else { n / (2.0 * low) })
        .collect()
}

fn check_width(rows: &[Vec<Option<f64>>], width: usize) -> Result<()> {
    for r in rows {
        if r.len() != width {
            return Err(Error::Shape {
                expected: width,
                actual: r.len(),
            });
        }
    }
    Ok(())
}

fn densify(rows: &[Vec<Option<f64>>], selected: &[usize], imputation: &[f64]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            selected
                .iter()
                .zip(imputation)
                .map(|(&j, m)| r[j].filter(|v| v.is_finite()).unwrap_or(*m))
                .collect()
        })
        .collect()
}

/// Training pipeline for one fold: impute with train means over the selected
/// columns, standardize for SVM and LR, then optimize.
pub fn fit(
    rows: &[Vec<Option<f64>>],
    labels: &[BinaryLabel],
    selected: &[usize],
    cfg: &ClassifierConfig,
) -> Result<FittedModel> {
    cfg.validate()?;
    if rows.len() != labels.len() {
        return Err(Error::Shape {
            expected: rows.len(),
            actual: labels.len(),
        });
    }
    let Some(first) = rows.first() else {
        return Err(Error::DegenerateFit("no training rows".into()));
    };
    let n_features = first.len();
    check_width(rows, n_features)?;
    if let Some(&bad) = selected.iter().find(|&&j| j >= n_features) {
        return Err(Error::Shape {
            expected: n_features,
            actual: bad + 1,
        });
    }
    if selected.is_empty() {
        return Err(Error::DegenerateFit("no selected features".into()));
    }
    let high = labels.iter().filter(|l| l.is_high()).count();
    if high == 0 || high == labels.len() {
        return Err(Error::DegenerateFit(format!(
            "training labels are all {}",
            if high == 0 { "Low" } else { "High" }
        )));
    }

    let imputation: Vec<f64> = selected
        .iter()
        .map(|&j| {
            let vals: Vec<f64> = rows.iter().filter_map(|r| r[j]).filter(|v| v.is_finite()).collect();
            if vals.is_empty() {
                0.0
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        })
        .collect();
    let x = densify(rows, selected, &imputation);

    let (params, standardization, converged, iterations, objective_trace) = match cfg.kind {
        ClassifierKind::NaiveBayes => (Params::NaiveBayes(fit_nb(&x, labels, NB_VAR_SMOOTHING)), None, true, 1, Vec::new()),
        kind => {
            let st = standardize_fit(&x);
            let z = standardize_apply(&st, &x);
            let w = sample_weights(labels, cfg.balanced);
            let lf = if kind == ClassifierKind::Svm {
                fit_svm(&z, labels, &w, cfg.c, cfg.tolerance, cfg.max_iterations, cfg.seed)
            } else {
                fit_logreg(&z, labels, &w, cfg.c, cfg.tolerance, cfg.max_iterations)
            };
            (
                Params::Linear {
                    weights: lf.weights,
                    bias: lf.bias,
                },
                Some(st),
                lf.converged,
                lf.iterations,
                lf.trace,
            )
        }
    };
    if !converged {
        log::warn!(
            "{} did not converge within {} iterations",
            cfg.kind,
            cfg.max_iterations
        );
    }
    Ok(FittedModel {
        kind: cfg.kind,
        params,
        standardization,
        selected: selected.to_vec(),
        imputation,
        n_features,
        converged,
        iterations,
        objective_trace,
    })
}

impl FittedModel {
    /// Signed score; positive means High. Zero is a tie and maps to Low.
    pub fn decision(&self, row: &[Option<f64>]) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                actual: row.len(),
            });
        }
        let dense = &densify(std::slice::from_ref(&row.to_vec()), &self.selected, &self.imputation)[0];
        Ok(match &self.params {
            Params::NaiveBayes(nb) => nb.decision(dense),
            Params::Linear { weights, bias } => {
                let z = self.standardization.as_ref().map_or_else(|| dense.clone(), |s| s.apply_row(dense));
                z.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>() + bias
            }
        })
    }

    pub fn predict(&self, rows: &[Vec<Option<f64>>]) -> Result<Vec<BinaryLabel>> {
        rows.iter()
            .map(|r| {
                self.decision(r)
                    .map(|d| if d > 0.0 { BinaryLabel::High } else { BinaryLabel::Low })
            })
            .collect()
    }

    /// Hex SHA-256 over every fitted number, in a fixed order.
    pub fn parameter_hash(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |xs: &[f64]| {
            h.update((xs.len() as u64).to_le_bytes());
            for x in xs {
                h.update(x.to_bits().to_le_bytes());
            }
        };
        match &self.params {
            Params::NaiveBayes(nb) => {
                put(&nb.means[0]);
                put(&nb.means[1]);
                put(&nb.variances[0]);
                put(&nb.variances[1]);
                put(&nb.log_priors);
            }
            Params::Linear { weights, bias } => {
                put(weights);
                put(&[*bias]);
            }
        }
        if let Some(s) = &self.standardization {
            put(&s.mean);
            put(&s.std);
        }
        put(&self.imputation);
        let sel: Vec<f64> = self.selected.iter().map(|&j| j as f64).collect();
        put(&sel);
        let mut out = h.finalize().to_vec();
        out.insert(0, self.kind as u8);
        hex::encode(&out[..=32])
    }

    /// Plain-text parameter listing; `names` labels the full feature row.
    pub fn dump(&self, names: &[String]) -> String {
        let mut s = String::new();
        let name = |j: usize| names.get(j).cloned().unwrap_or_else(|| format!("f{j}"));
        let _ = writeln!(s, "kind\t{}", self.kind);
        let _ = writeln!(s, "converged\t{}\titerations\t{}", self.converged, self.iterations);
        let _ = writeln!(s, "hash\t{}", self.parameter_hash());
        match &self.params {
            Params::NaiveBayes(nb) => {
                let _ = writeln!(s, "log_prior\tlow={}\thigh={}", nb.log_priors[0], nb.log_priors[1]);
                let _ = writeln!(s, "feature\timpute\tmean_low\tvar_low\tmean_high\tvar_high");
                for (k, &j) in self.selected.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{}\t{}\t{}\t{}\t{}\t{}",
                        name(j),
                        self.imputation[k],
                        nb.means[0][k],
                        nb.variances[0][k],
                        nb.means[1][k],
                        nb.variances[1][k]
                    );
                }
            }
            Params::Linear { weights, bias } => {
                let _ = writeln!(s, "bias\t{bias}");
                let _ = writeln!(s, "feature\timpute\tmean\tstd\tweight");
                let st = self.standardization.as_ref();
                for (k, &j) in self.selected.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{}\t{}\t{}\t{}\t{}",
                        name(j),
                        self.imputation[k],
                        st.map_or(f64::NAN, |t| t.mean[k]),
                        st.map_or(f64::NAN, |t| t.std[k]),
                        weights[k]
                    );
                }
            }
        }
        s
    }
}
