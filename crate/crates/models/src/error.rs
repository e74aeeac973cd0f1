use thiserror::Error;

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] asad_nn::NnError),

    #[error("config: {0}")]
    Config(String),

    #[error("temporal extent underflows at {stage}: extent {extent} (minimum {minimum})")]
    TemporalUnderflow {
        stage: String,
        extent: usize,
        minimum: usize,
    },

    #[error("spatial extent underflows at {stage}: {extent:?}")]
    SpatialUnderflow { stage: String, extent: Vec<usize> },

    #[error("checkpoint: bad magic {0:?}")]
    BadMagic(Vec<u8>),

    #[error("checkpoint: unsupported format version {0}")]
    BadVersion(u32),

    #[error("checkpoint: truncated, expected {expected} more bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("checkpoint: record {name}: {detail}")]
    Record { name: String, detail: String },

    #[error("layer inventories diverge at {name}: {detail}")]
    InventoryMismatch { name: String, detail: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
