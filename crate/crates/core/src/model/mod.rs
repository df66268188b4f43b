//! Trial, channel and label data model, plus subject screening.

mod exclusion;
mod signal;
mod trial;
mod validate;

pub use exclusion::{apply_exclusions, Exclusion, ExclusionReason, ExclusionReport, ExclusionRule};
pub use signal::{Channel, ChannelData, IrregularSignal, UniformSignal};
pub(crate) use signal::first_non_increasing;
pub use trial::{
    binarize_rating, BinaryLabel, Dimension, Flavor, SamRatings, SubjectId, TieRule, TrialRecord,
    VideoId,
};
pub use validate::{validate_channels, validate_trial, Finding, ValidationReport};
