//! EEG preprocessing: resampling to 128 Hz, Butterworth band-pass filtering
//! as a cascade of second-order sections, and z-score normalization.
//!
//! All transformations are causal and pure; channels are processed
//! independently with deterministic per-channel results.

pub mod buffer;
pub mod butterworth;
pub mod error;
pub mod filter;
pub mod normalize;
pub mod resample;

pub use buffer::RecordingBuffer;
pub use butterworth::{design_butterworth_bandpass, Biquad, BiquadCascade};
pub use error::{DspError, Result};
pub use filter::{apply_filter, filter_channel};
pub use normalize::{normalize, zscore_normalize, zscore_normalize_global, NormScope};
pub use resample::{resample_to_128, TARGET_FS};
