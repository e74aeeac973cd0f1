//! Decision windows: fixed-duration segments of preprocessed recordings,
//! plus batch assembly for the different model input layouts.

use asad_nn::Tensor;
use asad_topo::{TopologyMap, GRID_HEIGHT, GRID_WIDTH};

use crate::error::{DataError, Result};
use crate::recording::{EegRecording, Label};

pub const WINDOW_FS: u32 = 128;

/// One decision window: a channels x time slice of a trial.
#[derive(Debug, Clone)]
pub struct DecisionWindow {
    /// `[channels, t]`, channel order matching `WindowSet::channel_labels`.
    pub data: Tensor<f32>,
    pub label: Label,
    pub subject_id: String,
    pub trial_id: u32,
    pub window_index: usize,
    pub duration_s: u32,
}

/// All windows cut from a set of recordings, with the topology needed to
/// grid them on demand.
pub struct WindowSet {
    pub windows: Vec<DecisionWindow>,
    pub channel_labels: Vec<String>,
    pub t_len: usize,
    pub duration_s: u32,
    /// Trials shorter than one window contribute nothing; counted here.
    pub skipped_trials: usize,
    topology: TopologyMap,
    /// Grid position per channel index.
    positions: Vec<(usize, usize)>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn topology(&self) -> &TopologyMap {
        &self.topology
    }

    pub fn labels(&self, indices: &[usize]) -> Vec<usize> {
        indices
            .iter()
            .map(|&i| self.windows[i].label.index())
            .collect()
    }

    pub fn n_channels(&self) -> usize {
        self.channel_labels.len()
    }

    /// `[n, 1, 10, 11, t]` grid volumes for the 3D models.
    pub fn grid_batch(&self, indices: &[usize]) -> Tensor<f32> {
        let t = self.t_len;
        let mut out = Tensor::zeros(&[indices.len(), 1, GRID_HEIGHT, GRID_WIDTH, t]);
        let plane = GRID_HEIGHT * GRID_WIDTH * t;
        for (n, &wi) in indices.iter().enumerate() {
            let w = &self.windows[wi];
            for (c, &(row, col)) in self.positions.iter().enumerate() {
                let dst = n * plane + (row * GRID_WIDTH + col) * t;
                out.data_mut()[dst..dst + t].copy_from_slice(&w.data.data()[c * t..(c + 1) * t]);
            }
        }
        out
    }

    /// `[n, 1, channels, t]` raw matrices for the channels x time baseline.
    pub fn channels_batch(&self, indices: &[usize]) -> Tensor<f32> {
        let t = self.t_len;
        let c = self.n_channels();
        let mut out = Tensor::zeros(&[indices.len(), 1, c, t]);
        for (n, &wi) in indices.iter().enumerate() {
            out.data_mut()[n * c * t..(n + 1) * c * t].copy_from_slice(self.windows[wi].data.data());
        }
        out
    }

    /// `[n, 1, 10, 11]` single-time-point topographies for 2D training.
    pub fn slice_batch(&self, picks: &[(usize, usize)]) -> Tensor<f32> {
        let t = self.t_len;
        let mut out = Tensor::zeros(&[picks.len(), 1, GRID_HEIGHT, GRID_WIDTH]);
        let plane = GRID_HEIGHT * GRID_WIDTH;
        for (n, &(wi, ti)) in picks.iter().enumerate() {
            debug_assert!(ti < t);
            let w = &self.windows[wi];
            for (c, &(row, col)) in self.positions.iter().enumerate() {
                out.data_mut()[n * plane + row * GRID_WIDTH + col] = w.data.data()[c * t + ti];
            }
        }
        out
    }
}

/// Cut non-overlapping, contiguous windows out of every trial; trailing
/// remainders are discarded. Recordings must already be preprocessed to
/// 128 Hz and every channel label must exist in the topology.
pub fn slice_windows(
    recordings: &[EegRecording],
    duration_s: u32,
    topology: &TopologyMap,
) -> Result<WindowSet> {
    let t_len = (WINDOW_FS * duration_s) as usize;
    let mut channel_labels: Option<Vec<String>> = None;
    let mut windows = Vec::new();
    let mut skipped = 0usize;

    for rec in recordings {
        rec.validate()?;
        for trial in &rec.trials {
            if trial.buffer.fs != WINDOW_FS {
                return Err(DataError::WrongRate { fs: trial.buffer.fs });
            }
            match &channel_labels {
                None => channel_labels = Some(trial.buffer.channel_labels.clone()),
                Some(labels) => {
                    if labels != &trial.buffer.channel_labels {
                        return Err(DataError::InconsistentTrials {
                            detail: format!(
                                "subject {} trial {} channel labels differ from the first recording",
                                rec.subject_id, trial.trial_id
                            ),
                        });
                    }
                }
            }
            let n = trial.buffer.n_samples();
            if n < t_len {
                skipped += 1;
                continue;
            }
            let c = trial.buffer.n_channels();
            for w in 0..n / t_len {
                let start = w * t_len;
                let mut data = vec![0.0_f32; c * t_len];
                for ch in 0..c {
                    let src = &trial.buffer.channel(ch)[start..start + t_len];
                    for (d, &s) in data[ch * t_len..(ch + 1) * t_len].iter_mut().zip(src.iter()) {
                        *d = s as f32;
                    }
                }
                windows.push(DecisionWindow {
                    data: Tensor::from_vec(&[c, t_len], data).expect("sized above"),
                    label: trial.label,
                    subject_id: rec.subject_id.clone(),
                    trial_id: trial.trial_id,
                    window_index: windows.len(),
                    duration_s,
                });
            }
        }
    }

    let channel_labels = channel_labels.unwrap_or_default();
    let mut positions = Vec::with_capacity(channel_labels.len());
    for label in &channel_labels {
        positions.push(
            topology
                .position(label)
                .ok_or_else(|| asad_topo::TopoError::UnmappedChannel {
                    label: label.clone(),
                    montage: topology.montage_name.clone(),
                })?,
        );
    }

    Ok(WindowSet {
        windows,
        channel_labels,
        t_len,
        duration_s,
        skipped_trials: skipped,
        topology: topology.clone(),
        positions,
    })
}
