//! Electrode-label to 2D grid mapping.
//!
//! Converts channel-ordered EEG (C x T) into a 10 x 11 x T spatial
//! arrangement using a table of electrode positions; grid cells without an
//! electrode stay exactly zero. The shipped default covers the 64-channel
//! 10-20 extended montage and can be replaced by any injective table.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use asad_dsp::RecordingBuffer;
use asad_nn::{Scalar, Tensor};
use thiserror::Error;

pub const GRID_HEIGHT: usize = 10;
pub const GRID_WIDTH: usize = 11;
pub const GRID_CELLS: usize = GRID_HEIGHT * GRID_WIDTH;

pub type Result<T> = std::result::Result<T, TopoError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopoError {
    #[error("line {line}: expected `label row col`, got {content:?}")]
    ParseLine { line: usize, content: String },

    #[error("label {label}: cell ({row}, {col}) is outside the {h} x {w} grid", h = GRID_HEIGHT, w = GRID_WIDTH)]
    OutOfBounds { label: String, row: usize, col: usize },

    #[error("cell ({row}, {col}) is claimed by more than one label: {labels}")]
    DuplicateCell { row: usize, col: usize, labels: String },

    #[error("duplicate channel label {label}")]
    DuplicateLabel { label: String },

    #[error("recording channel {label} has no grid position in montage {montage}")]
    UnmappedChannel { label: String, montage: String },

    #[error("cannot read topology table: {0}")]
    Io(String),
}

/// Validated electrode table: label -> (row, col), all cells in bounds and
/// pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyMap {
    pub montage_name: String,
    entries: Vec<(String, (usize, usize))>,
    by_label: HashMap<String, (usize, usize)>,
}

/// Occupancy summary of a topology map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyReport {
    pub mapped: usize,
    pub unmapped: usize,
    pub per_row: [usize; GRID_HEIGHT],
}

impl TopologyMap {
    /// Parse the `label row col` text format; `#` starts a comment.
    pub fn parse(montage_name: impl Into<String>, text: &str) -> Result<Self> {
        let montage_name = montage_name.into();
        let mut entries = Vec::new();
        let mut by_label: HashMap<String, (usize, usize)> = HashMap::new();
        let mut by_cell: HashMap<(usize, usize), Vec<String>> = HashMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (label, row, col) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), Some(c), None) => {
                    let row = r.parse::<usize>().map_err(|_| TopoError::ParseLine {
                        line: idx + 1,
                        content: raw.to_string(),
                    })?;
                    let col = c.parse::<usize>().map_err(|_| TopoError::ParseLine {
                        line: idx + 1,
                        content: raw.to_string(),
                    })?;
                    (l.to_string(), row, col)
                }
                _ => {
                    return Err(TopoError::ParseLine {
                        line: idx + 1,
                        content: raw.to_string(),
                    })
                }
            };
            if row >= GRID_HEIGHT || col >= GRID_WIDTH {
                return Err(TopoError::OutOfBounds { label, row, col });
            }
            if by_label.contains_key(&label) {
                return Err(TopoError::DuplicateLabel { label });
            }
            by_cell.entry((row, col)).or_default().push(label.clone());
            by_label.insert(label.clone(), (row, col));
            entries.push((label, (row, col)));
        }

        for ((row, col), labels) in by_cell {
            if labels.len() > 1 {
                return Err(TopoError::DuplicateCell {
                    row,
                    col,
                    labels: labels.join(", "),
                });
            }
        }

        Ok(TopologyMap {
            montage_name,
            entries,
            by_label,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TopoError::Io(e.to_string()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Self::parse(name, &text)
    }

    /// The shipped 64-channel default.
    pub fn default_biosemi64() -> Self {
        Self::parse("biosemi64_10x11", include_str!("../data/biosemi64_10x11.txt"))
            .expect("shipped topology table must be valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<(usize, usize)> {
        self.by_label.get(label).copied()
    }

    pub fn entries(&self) -> &[(String, (usize, usize))] {
        &self.entries
    }

    pub fn grid_stats(&self) -> OccupancyReport {
        let mut per_row = [0usize; GRID_HEIGHT];
        for (_, (r, _)) in &self.entries {
            per_row[*r] += 1;
        }
        OccupancyReport {
            mapped: self.entries.len(),
            unmapped: GRID_CELLS - self.entries.len(),
            per_row,
        }
    }

    /// Human-readable occupancy sketch, one line per grid row.
    pub fn occupancy_sketch(&self) -> String {
        let mut cells = [[false; GRID_WIDTH]; GRID_HEIGHT];
        for (_, (r, c)) in &self.entries {
            cells[*r][*c] = true;
        }
        let mut out = String::new();
        for row in cells {
            for c in row {
                out.push(if c { 'o' } else { '.' });
            }
            let _ = writeln!(out);
        }
        out
    }
}

/// Map a recording onto the grid: `grid[row, col, t] = channel sample`,
/// zeros everywhere else. Every channel label must be present in the map.
pub fn to_grid<T: Scalar>(buffer: &RecordingBuffer, map: &TopologyMap) -> Result<Tensor<T>> {
    let t_len = buffer.n_samples();
    let mut grid = Tensor::<T>::zeros(&[GRID_HEIGHT, GRID_WIDTH, t_len]);
    for (c, label) in buffer.channel_labels.iter().enumerate() {
        let (row, col) = map
            .position(label)
            .ok_or_else(|| TopoError::UnmappedChannel {
                label: label.clone(),
                montage: map.montage_name.clone(),
            })?;
        let dst_base = (row * GRID_WIDTH + col) * t_len;
        let dst = &mut grid.data_mut()[dst_base..dst_base + t_len];
        for (d, &s) in dst.iter_mut().zip(buffer.channel(c).iter()) {
            *d = T::of_f64(s);
        }
    }
    Ok(grid)
}

/// Gather mapped cells back out of a grid, in the order of `labels`.
/// Inverse of [`to_grid`] on mapped data.
pub fn extract_channels<T: Scalar>(
    grid: &Tensor<T>,
    map: &TopologyMap,
    labels: &[String],
) -> Result<Vec<Vec<T>>> {
    let t_len = grid.shape()[2];
    let mut out = Vec::with_capacity(labels.len());
    for label in labels {
        let (row, col) = map
            .position(label)
            .ok_or_else(|| TopoError::UnmappedChannel {
                label: label.clone(),
                montage: map.montage_name.clone(),
            })?;
        let base = (row * GRID_WIDTH + col) * t_len;
        out.push(grid.data()[base..base + t_len].to_vec());
    }
    Ok(out)
}
