//! Z-score normalization of a recording, per channel or globally.

use crate::buffer::RecordingBuffer;
use crate::error::{DspError, Result};

/// Statistics scope for the normalization step of the preprocessing chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormScope {
    /// One mean/std over the whole channels x time matrix. Preserves
    /// between-channel amplitude differences.
    #[default]
    Global,
    /// Separate mean/std per channel.
    PerChannel,
}

const STD_FLOOR: f64 = 1e-12;

/// Per-channel z-score over the full time axis (population standard
/// deviation). Channels with std below 1e-12 map to all zeros.
pub fn zscore_normalize(buffer: &RecordingBuffer) -> Result<RecordingBuffer> {
    for c in 0..buffer.n_channels() {
        if buffer.n_samples() < 2 {
            return Err(DspError::TooShort {
                channel: c,
                samples: buffer.n_samples(),
            });
        }
    }
    buffer.map_channels(buffer.fs, |ch| {
        let n = ch.len() as f64;
        let mean = ch.iter().sum::<f64>() / n;
        let var = ch.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std < STD_FLOOR {
            vec![0.0; ch.len()]
        } else {
            ch.iter().map(|v| (v - mean) / std).collect()
        }
    })
}

/// One mean and one standard deviation across all channels and all samples.
pub fn zscore_normalize_global(buffer: &RecordingBuffer) -> Result<RecordingBuffer> {
    let all = buffer.samples();
    if all.len() < 2 {
        return Err(DspError::TooShort {
            channel: 0,
            samples: all.len(),
        });
    }
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let var = all.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    buffer.map_channels(buffer.fs, |ch| {
        if std < STD_FLOOR {
            vec![0.0; ch.len()]
        } else {
            ch.iter().map(|v| (v - mean) / std).collect()
        }
    })
}

/// Normalize with the requested scope.
pub fn normalize(buffer: &RecordingBuffer, scope: NormScope) -> Result<RecordingBuffer> {
    match scope {
        NormScope::Global => zscore_normalize_global(buffer),
        NormScope::PerChannel => zscore_normalize(buffer),
    }
}
