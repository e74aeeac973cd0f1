//! Classifier architectures for left/right auditory attention decoding:
//! a channels x time CNN baseline, a shallow spatial CNN on the electrode
//! grid, and densely connected 2D/3D networks with 2D -> 3D weight
//! inflation for bootstrapped training.

pub mod build;
pub mod check;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod graph;
pub mod inflate;

pub use check::gradcheck_model;

pub use build::{
    build, build_cnn3d, build_cnn_baseline, build_densenet2d, build_densenet3d, MIN_TEMPORAL_LEN,
};
pub use checkpoint::{Checkpoint, OptimizerState, Record, RecordData};
pub use config::{DenseNetConfig, ModelConfig, ModelKind};
pub use error::{ModelError, Result};
pub use graph::{concat_channels, split_channels, ModelGraph, Node, StageShape, Tape};
pub use inflate::{inflate_2d_to_3d, inflate_kernel, temporal_kernel_sum};
