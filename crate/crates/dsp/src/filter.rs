//! Causal filtering of a recording through a biquad cascade,
//! direct-form II transposed, zero initial state.

use crate::buffer::RecordingBuffer;
use crate::butterworth::{Biquad, BiquadCascade};
use crate::error::{DspError, Result};

/// Run one channel through one section, fresh state.
fn df2t(section: &Biquad, x: &[f64]) -> Vec<f64> {
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    x.iter()
        .map(|&xi| {
            let y = section.b0 * xi + s1;
            s1 = section.b1 * xi - section.a1 * y + s2;
            s2 = section.b2 * xi - section.a2 * y;
            y
        })
        .collect()
}

/// Filter a single channel through the full cascade.
pub fn filter_channel(cascade: &BiquadCascade, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    for section in &cascade.sections {
        y = df2t(section, &y);
    }
    y
}

/// Filter every channel of `buffer`; output length equals input length.
pub fn apply_filter(buffer: &RecordingBuffer, cascade: &BiquadCascade) -> Result<RecordingBuffer> {
    if (buffer.fs as f64 - cascade.fs).abs() > 1e-9 {
        return Err(DspError::SampleRateMismatch {
            designed: cascade.fs,
            actual: buffer.fs as f64,
        });
    }
    buffer.map_channels(buffer.fs, |ch| filter_channel(cascade, ch))
}
