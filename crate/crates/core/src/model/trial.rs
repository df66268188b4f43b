use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::signal::{Channel, ChannelData};

macro_rules! natural_id {
    ($name:ident) => {
        /// Identifier that orders numerically when both sides are integers.
        #[derive(Debug, Clone, PartialEq, Eq, Hash)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl Ord for $name {
            fn cmp(&self, other: &Self) -> Ordering {
                natural_cmp(&self.0, &other.0)
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

natural_id!(SubjectId);
natural_id!(VideoId);

fn natural_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Self-assessment manikin ratings on 1–9 scales. Only valence and arousal are used.
#[derive(Debug, Clone, PartialEq)]
pub struct SamRatings {
    pub valence: f64,
    pub arousal: f64,
    pub dominance: Option<f64>,
    pub liking: Option<f64>,
    pub familiarity: Option<f64>,
}

impl SamRatings {
    pub fn new(valence: f64, arousal: f64) -> Result<Self> {
        check_rating(valence)?;
        check_rating(arousal)?;
        Ok(Self {
            valence,
            arousal,
            dominance: None,
            liking: None,
            familiarity: None,
        })
    }

    pub fn get(&self, dimension: Dimension) -> f64 {
        match dimension {
            Dimension::Valence => self.valence,
            Dimension::Arousal => self.arousal,
        }
    }
}

fn check_rating(r: f64) -> Result<()> {
    if r.is_finite() && (1.0..=9.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::InvalidRating(r))
    }
}

/// One stimulus presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub subject_id: SubjectId,
    pub video_id: VideoId,
    pub channels: BTreeMap<Channel, ChannelData>,
    pub ratings: SamRatings,
    pub faulty: bool,
}

impl TrialRecord {
    pub fn channel(&self, ch: Channel) -> Result<&ChannelData> {
        self.channels.get(&ch).ok_or(Error::MissingChannel(ch))
    }

    pub fn label(&self, dimension: Dimension, tie: TieRule) -> Result<BinaryLabel> {
        binarize_rating(self.ratings.get(dimension), tie)
    }
}

/// `Low < High`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinaryLabel {
    Low,
    High,
}

impl BinaryLabel {
    pub fn is_high(self) -> bool {
        self == BinaryLabel::High
    }

    pub fn flip(self) -> Self {
        match self {
            BinaryLabel::Low => BinaryLabel::High,
            BinaryLabel::High => BinaryLabel::Low,
        }
    }

    /// `+1` for High, `-1` for Low.
    pub fn sign(self) -> f64 {
        match self {
            BinaryLabel::High => 1.0,
            BinaryLabel::Low => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    Valence,
    Arousal,
}

impl Dimension {
    pub const BOTH: [Dimension; 2] = [Dimension::Valence, Dimension::Arousal];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Valence => "valence",
            Dimension::Arousal => "arousal",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "valence" | "v" => Ok(Dimension::Valence),
            "arousal" | "a" => Ok(Dimension::Arousal),
            other => Err(format!("unknown dimension `{other}`")),
        }
    }
}

/// Where a rating of exactly 5 goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    #[default]
    Low,
    High,
}

impl TieRule {
    pub fn name(self) -> &'static str {
        match self {
            TieRule::Low => "low",
            TieRule::High => "high",
        }
    }
}

impl FromStr for TieRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(TieRule::Low),
            "high" => Ok(TieRule::High),
            other => Err(format!("unknown tie rule `{other}` (low or high)")),
        }
    }
}

/// High iff the rating is above the mid-threshold of 5 (ties per `tie`).
pub fn binarize_rating(rating: f64, tie: TieRule) -> Result<BinaryLabel> {
    check_rating(rating)?;
    Ok(if rating > 5.0 || (rating == 5.0 && tie == TieRule::High) {
        BinaryLabel::High
    } else {
        BinaryLabel::Low
    })
}

/// Dataset flavor; decides which channels the scenarios resolve to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    EmoWearLike,
    DeapLike,
    Synthetic,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::EmoWearLike => "emowear",
            Flavor::DeapLike => "deap",
            Flavor::Synthetic => "synthetic",
        }
    }
}

impl FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "emowear" | "emowearlike" | "emowear-like" => Ok(Flavor::EmoWearLike),
            "deap" | "deaplike" | "deap-like" => Ok(Flavor::DeapLike),
            "synthetic" | "synth" => Ok(Flavor::Synthetic),
            other => Err(format!("unknown dataset flavor `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize_rating(7.2, TieRule::Low).unwrap(), BinaryLabel::High);
        assert_eq!(binarize_rating(1.0, TieRule::Low).unwrap(), BinaryLabel::Low);
        assert_eq!(binarize_rating(5.0, TieRule::Low).unwrap(), BinaryLabel::Low);
        assert_eq!(binarize_rating(5.0, TieRule::High).unwrap(), BinaryLabel::High);
        assert_eq!(binarize_rating(9.0, TieRule::Low).unwrap(), BinaryLabel::High);
    }

    #[test]
    fn binarize_rejects_bad_ratings() {
        for r in [0.99, 9.01, f64::NAN, f64::INFINITY, -3.0] {
            assert!(matches!(
                binarize_rating(r, TieRule::Low),
                Err(Error::InvalidRating(_))
            ));
        }
    }

    #[test]
    fn ids_sort_naturally() {
        let mut v: Vec<VideoId> = ["10", "2", "1", "b", "a"].iter().map(|s| VideoId::from(*s)).collect();
        v.sort();
        let s: Vec<&str> = v.iter().map(|x| x.as_str()).collect();
        assert_eq!(s, ["1", "2", "10", "a", "b"]);
    }

    proptest::proptest! {
        #[test]
        fn binarize_is_monotone(a in 1.0f64..=9.0, b in 1.0f64..=9.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for tie in [TieRule::Low, TieRule::High] {
                proptest::prop_assert!(
                    binarize_rating(lo, tie).unwrap() <= binarize_rating(hi, tie).unwrap()
                );
            }
        }
    }
}
