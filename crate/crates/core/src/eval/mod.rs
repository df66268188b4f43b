mod aggregate;
mod folds;
mod metrics;
mod subject;
mod ttest;

use sha2::{Digest, Sha256};

pub use aggregate::{aggregate, aggregate_scores, run_baselines, AggregateResult, BaselineReport};
pub use folds::{lovo_folds, Fold};
pub use metrics::{accuracy, macro_f1, ConfusionMatrix};
pub use subject::{evaluate_subject, run_subject, subject_labels, FoldOutcome, SubjectFeatures, SubjectResult};
pub use ttest::{one_sample_t_test, Sidedness, Stars, TTest};

/// Independent stream seed for a keyed unit of work, so that results do not
/// depend on scheduling.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}
