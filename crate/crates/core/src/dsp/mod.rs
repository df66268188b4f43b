//! Numerical kernels shared by every signal chain.

mod detrend;
mod filter;
mod hilbert;
mod resample;
mod spectrum;

pub use detrend::{moving_average, moving_average_detrend};
pub use filter::{bandpass, bandpass_order, butterworth, edge_pad, BandSpec, Sos, DEFAULT_ORDER};
pub use hilbert::hilbert_envelope;
pub use resample::resample_uniform;
pub use spectrum::{band_power, welch_psd, PowerSpectrum, WelchConfig};
