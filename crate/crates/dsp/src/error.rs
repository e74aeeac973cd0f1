use thiserror::Error;

pub type Result<T> = std::result::Result<T, DspError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("filter order must be even and positive, got {0}")]
    OddOrder(usize),

    #[error("invalid band edges: need 0 < f_low < f_high < fs/2, got {f_low} Hz .. {f_high} Hz at fs {fs} Hz")]
    InvalidBand { f_low: f64, f_high: f64, fs: f64 },

    #[error("sample rate mismatch: filter designed for {designed} Hz, buffer has {actual} Hz")]
    SampleRateMismatch { designed: f64, actual: f64 },

    #[error("cannot resample {fs} Hz up to 128 Hz: only downsampling is supported")]
    UpsamplingUnsupported { fs: u32 },

    #[error("channel count {channels} does not match label count {labels}")]
    LabelCount { channels: usize, labels: usize },

    #[error("buffer length {len} is not channels {channels} x samples")]
    RaggedBuffer { len: usize, channels: usize },

    #[error("channel {channel} needs at least 2 samples, got {samples}")]
    TooShort { channel: usize, samples: usize },
}
