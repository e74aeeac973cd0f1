//! Minimal dense-tensor math with reverse-mode layer gradients.
//!
//! Exactly the layer set an EEG spatial-attention classifier needs: 2D/3D
//! cross-correlation, batch normalization, ReLU, max/average/global pooling,
//! affine layers, softmax cross-entropy and Adam, plus a finite-difference
//! gradient checker. All operations are plain functions over explicit state
//! and are deterministic for a fixed seed regardless of worker count.

pub mod conv;
pub mod error;
pub mod gradcheck;
pub mod linear;
pub mod loss;
pub mod norm;
pub mod optim;
pub mod pool;
pub mod rng;
pub mod tensor;

pub use conv::{conv_backward, conv_forward, ConvGrads, ConvSpec};
pub use error::{NnError, Result};
pub use gradcheck::{gradcheck, GradCheckOptions, GradCheckReport};
pub use linear::{linear_backward, linear_forward, LinearGrads};
pub use loss::{relu, relu_backward, softmax, softmax_cross_entropy};
pub use norm::{
    batchnorm_apply_saved, batchnorm_backward, batchnorm_forward, BatchNormState, BnMode, BnSaved,
};
pub use optim::{adam_step, AdamConfig, AdamState};
pub use pool::{
    avgpool_backward, avgpool_forward, global_avg_pool, global_avg_pool_backward,
    maxpool_backward, maxpool_forward,
};
pub use rng::SeededRng;
pub use tensor::{gemm, Parameter, Precision, Scalar, Tensor};
