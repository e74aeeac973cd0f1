use thiserror::Error;

pub type Result<T> = std::result::Result<T, DataError>;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Dsp(#[from] asad_dsp::DspError),

    #[error(transparent)]
    Topo(#[from] asad_topo::TopoError),

    #[error(transparent)]
    Model(#[from] asad_models::ModelError),

    #[error(transparent)]
    Nn(#[from] asad_nn::NnError),

    #[error("container: bad magic {0:?}")]
    BadMagic(Vec<u8>),

    #[error("container: unsupported version {0}")]
    BadVersion(u32),

    #[error("container: truncated at byte {offset}: expected {expected} more bytes, {actual} available")]
    Truncated {
        offset: usize,
        expected: usize,
        actual: usize,
    },

    #[error("container: trial {trial}: label byte {value} is neither 0 (left) nor 1 (right)")]
    BadLabel { trial: u32, value: u8 },

    #[error("container: trial {trial}: non-finite sample at flat index {index}")]
    NonFiniteSample { trial: u32, index: usize },

    #[error("trials disagree: {detail}")]
    InconsistentTrials { detail: String },

    #[error("csv line {line}: {detail}")]
    Csv { line: usize, detail: String },

    #[error("windows require 128 Hz preprocessed data, got {fs} Hz")]
    WrongRate { fs: u32 },

    #[error("need at least 5 windows to build folds, got {n}")]
    TooFewWindows { n: usize },

    #[error("evaluation needs a non-empty window set")]
    EmptyEval,

    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}; recent losses {recent:?}")]
    Diverged {
        epoch: usize,
        batch: usize,
        recent: Vec<f64>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
