//! Data plumbing for the attention-decoding pipeline: the on-disk EEG
//! container, decision-window slicing, deterministic 5-fold cross-validation,
//! the training loop, evaluation metrics, protocol orchestration, and a
//! synthetic lateralized-EEG generator for desk-scale verification.

pub mod container;
pub mod error;
pub mod eval;
pub mod folds;
pub mod preprocess;
pub mod protocol;
pub mod recording;
pub mod synth;
pub mod train;
pub mod windows;

pub use container::{decode_recording, encode_recording, ingest, ingest_csv, write_recording};
pub use error::{DataError, Result};
pub use eval::{evaluate, window_logits, Metrics, SubjectAccuracy};
pub use folds::{make_folds, make_folds_grouped, FoldPlan, FoldRound, NUM_FOLDS};
pub use preprocess::{preprocess_recording, PreprocessConfig};
pub use protocol::{run_fold, run_protocol, Mode, ProtocolConfig, ProtocolReport, ProtocolRow};
pub use recording::{EegRecording, Label, Trial};
pub use synth::{band_power_oracle_accuracy, synthesize, SyntheticSpec};
pub use train::{train_model, EpochStats, TrainConfig, TrainLog};
pub use windows::{slice_windows, DecisionWindow, WindowSet, WINDOW_FS};
