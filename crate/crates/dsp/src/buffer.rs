//! Multi-channel recording buffer: a channels x time matrix plus labels.

use crate::error::{DspError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RecordingBuffer {
    /// Sampling rate in Hz.
    pub fs: u32,
    pub channel_labels: Vec<String>,
    /// Channel-major samples: `samples[c * n_samples + t]`.
    samples: Vec<f64>,
    n_samples: usize,
}

impl RecordingBuffer {
    pub fn new(fs: u32, channel_labels: Vec<String>, samples: Vec<f64>) -> Result<Self> {
        let channels = channel_labels.len();
        if channels == 0 {
            return Ok(RecordingBuffer {
                fs,
                channel_labels,
                samples: Vec::new(),
                n_samples: 0,
            });
        }
        if samples.len() % channels != 0 {
            return Err(DspError::RaggedBuffer {
                len: samples.len(),
                channels,
            });
        }
        let n_samples = samples.len() / channels;
        Ok(RecordingBuffer {
            fs,
            channel_labels,
            samples,
            n_samples,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.channel_labels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples as f64 / self.fs as f64
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.samples[c * self.n_samples..(c + 1) * self.n_samples]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.samples[c * self.n_samples..(c + 1) * self.n_samples]
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Replace every channel with the output of `f`, keeping fs and labels.
    /// All channels must map to the same length.
    pub fn map_channels(&self, new_fs: u32, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut out: Vec<f64> = Vec::new();
        let mut new_len: Option<usize> = None;
        for c in 0..self.n_channels() {
            let y = f(self.channel(c));
            if let Some(l) = new_len {
                assert_eq!(l, y.len(), "map_channels: uneven channel lengths");
            }
            new_len = Some(y.len());
            out.extend_from_slice(&y);
        }
        RecordingBuffer::new(new_fs, self.channel_labels.clone(), out)
    }
}
