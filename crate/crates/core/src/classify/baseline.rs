use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::model::BinaryLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaselineStrategy {
    /// Fair coin per prediction.
    Random,
    /// The most frequent training label (ties go to High).
    Majority,
    /// Draws with P(High) equal to the training High fraction.
    Ratio,
}

impl BaselineStrategy {
    pub const ALL: [BaselineStrategy; 3] = [Self::Random, Self::Majority, Self::Ratio];

    pub fn name(self) -> &'static str {
        match self {
            Self::Random => "Random",
            Self::Majority => "Majority",
            Self::Ratio => "Ratio",
        }
    }

    pub fn is_stochastic(self) -> bool {
        self != Self::Majority
    }
}

impl fmt::Display for BaselineStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(Self::Random),
            "majority" => Ok(Self::Majority),
            "ratio" => Ok(Self::Ratio),
            other => Err(Error::Config(format!("unknown baseline `{other}`"))),
        }
    }
}

pub fn baseline_vote(
    strategy: BaselineStrategy,
    train_labels: &[BinaryLabel],
    n_predictions: usize,
    seed: u64,
) -> Vec<BinaryLabel> {
    let high = train_labels.iter().filter(|l| l.is_high()).count();
    let frac = if train_labels.is_empty() {
        0.5
    } else {
        high as f64 / train_labels.len() as f64
    };
    let from = |b: bool| if b { BinaryLabel::High } else { BinaryLabel::Low };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match strategy {
        BaselineStrategy::Majority => vec![from(2 * high >= train_labels.len()); n_predictions],
        BaselineStrategy::Random => (0..n_predictions).map(|_| from(rng.gen_bool(0.5))).collect(),
        BaselineStrategy::Ratio => (0..n_predictions).map(|_| from(rng.gen::<f64>() < frac)).collect(),
    }
}
