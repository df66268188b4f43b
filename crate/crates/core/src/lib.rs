//! Single-trial valence/arousal classification from cardiac, respiratory and
//! chest-accelerometer signals.
//!
//! The crate is organised bottom-up: [`dsp`] kernels feed the [`beats`]
//! detectors, whose event series and the raw peripherals feed [`features`].
//! [`selection`], [`classify`] and [`eval`] implement the subject-dependent
//! leave-one-video-out protocol, [`correlation`] the cross-setup analysis, and
//! [`pipeline`] ties it all to files on disk.

pub mod beats;
pub mod classify;
pub mod correlation;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod pipeline;
pub mod selection;
pub mod stats;

pub use error::{Error, Result};
