use thiserror::Error;

pub type Result<T> = std::result::Result<T, NnError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("{op}: rank mismatch: expected {expected} spatial axes, got {actual}")]
    RankMismatch {
        op: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{op}: axis {axis}: expected extent {expected}, got {actual}")]
    AxisMismatch {
        op: &'static str,
        axis: usize,
        expected: usize,
        actual: usize,
    },

    #[error(
        "{op}: non-positive output extent on axis {axis} \
         (input {input}, kernel {kernel}, stride {stride}, padding {padding})"
    )]
    EmptyOutput {
        op: &'static str,
        axis: usize,
        input: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },

    #[error("tensor: shape {shape:?} implies {expected} elements, data has {actual}")]
    DataLength {
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },

    #[error("softmax_cross_entropy: label {label} at row {row} outside 0..{classes}")]
    LabelOutOfRange {
        row: usize,
        label: usize,
        classes: usize,
    },

    #[error("{op}: parameter {index}: moment shape {moment:?} does not match value shape {value:?}")]
    OptimizerShape {
        op: &'static str,
        index: usize,
        moment: Vec<usize>,
        value: Vec<usize>,
    },
}
