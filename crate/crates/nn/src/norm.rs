//! Batch normalization over the channel axis (axis 1).
//!
//! Training mode normalizes with batch statistics taken over the batch and
//! all spatial/temporal axes and updates the running estimates; evaluation
//! mode is a fixed affine map built from the running estimates. Statistics
//! are accumulated in f64 in both precisions.

use crate::error::{NnError, Result};
use crate::tensor::{Scalar, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnMode {
    Train,
    Eval,
}

#[derive(Debug, Clone)]
pub struct BatchNormState<T> {
    pub running_mean: Tensor<T>,
    pub running_var: Tensor<T>,
    pub momentum: f64,
    pub epsilon: f64,
    pub mode: BnMode,
}

impl<T: Scalar> BatchNormState<T> {
    /// Fresh state: running mean 0, running variance 1.
    pub fn new(channels: usize) -> Self {
        BatchNormState {
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::full(&[channels], T::one()),
            momentum: 0.1,
            epsilon: 1e-5,
            mode: BnMode::Train,
        }
    }

    pub fn channels(&self) -> usize {
        self.running_mean.numel()
    }
}

/// Saved statistics for the backward pass.
#[derive(Debug, Clone)]
pub struct BnSaved<T> {
    pub mean: Vec<T>,
    pub inv_std: Vec<T>,
    /// Channels where the epsilon floor replaced the batch variance; their
    /// normalizer is a constant, so backward drops the variance term.
    pub floored: Vec<bool>,
    pub train_mode: bool,
}

fn check_channels<T: Scalar>(
    op: &'static str,
    x: &Tensor<T>,
    channels: usize,
) -> Result<(usize, usize, usize)> {
    if x.shape().len() < 2 {
        return Err(NnError::RankMismatch {
            op,
            expected: 2,
            actual: x.shape().len(),
        });
    }
    if x.shape()[1] != channels {
        return Err(NnError::AxisMismatch {
            op,
            axis: 1,
            expected: channels,
            actual: x.shape()[1],
        });
    }
    let batch = x.shape()[0];
    let cells: usize = x.shape()[2..].iter().product();
    Ok((batch, channels, cells))
}

/// Normalize, scale by gamma, shift by beta. Returns the output and the
/// statistics the backward pass needs. Training mode updates the running
/// estimates in `state`.
pub fn batchnorm_forward<T: Scalar>(
    x: &Tensor<T>,
    gamma: &Tensor<T>,
    beta: &Tensor<T>,
    state: &mut BatchNormState<T>,
) -> Result<(Tensor<T>, BnSaved<T>)> {
    let (batch, ch, cells) = check_channels("batchnorm_forward", x, state.channels())?;
    let plane = cells;
    let sample = ch * plane;
    let m = (batch * plane) as f64;

    let (mean, inv_std, floored) = match state.mode {
        BnMode::Train => {
            let mut mean = vec![T::zero(); ch];
            let mut inv_std = vec![T::zero(); ch];
            let mut floored = vec![false; ch];
            for c in 0..ch {
                let mut sum = 0.0_f64;
                for n in 0..batch {
                    let s = &x.data()[n * sample + c * plane..n * sample + (c + 1) * plane];
                    sum += s.iter().map(|v| v.as_f64()).sum::<f64>();
                }
                let mu = sum / m;
                let mut var = 0.0_f64;
                for n in 0..batch {
                    let s = &x.data()[n * sample + c * plane..n * sample + (c + 1) * plane];
                    var += s.iter().map(|v| (v.as_f64() - mu) * (v.as_f64() - mu)).sum::<f64>();
                }
                let var = var / m;
                mean[c] = T::of_f64(mu);
                floored[c] = var < state.epsilon;
                inv_std[c] = T::of_f64(1.0 / var.max(state.epsilon).sqrt());
                let mom = state.momentum;
                let rm = state.running_mean.data_mut();
                rm[c] = T::of_f64((1.0 - mom) * rm[c].as_f64() + mom * mu);
                let rv = state.running_var.data_mut();
                rv[c] = T::of_f64((1.0 - mom) * rv[c].as_f64() + mom * var);
            }
            (mean, inv_std, floored)
        }
        BnMode::Eval => {
            let mean = state.running_mean.data().to_vec();
            let inv_std = state
                .running_var
                .data()
                .iter()
                .map(|v| T::of_f64(1.0 / v.as_f64().max(state.epsilon).sqrt()))
                .collect();
            (mean, inv_std, vec![true; ch])
        }
    };

    let mut y = Tensor::zeros(x.shape());
    for n in 0..batch {
        for c in 0..ch {
            let scale = gamma.data()[c] * inv_std[c];
            let shift = beta.data()[c] - mean[c] * scale;
            let src = &x.data()[n * sample + c * plane..n * sample + (c + 1) * plane];
            let dst = &mut y.data_mut()[n * sample + c * plane..n * sample + (c + 1) * plane];
            for (d, &s) in dst.iter_mut().zip(src.iter()) {
                *d = s * scale + shift;
            }
        }
    }

    Ok((
        y,
        BnSaved {
            mean,
            inv_std,
            floored,
            train_mode: state.mode == BnMode::Train,
        },
    ))
}

/// Re-apply the affine map recorded in `saved` (same arithmetic as the
/// forward pass, so results are bitwise identical). Lets callers drop
/// normalized activations and rebuild them during backward.
pub fn batchnorm_apply_saved<T: Scalar>(
    x: &Tensor<T>,
    gamma: &Tensor<T>,
    beta: &Tensor<T>,
    saved: &BnSaved<T>,
) -> Tensor<T> {
    let ch = saved.mean.len();
    let batch = x.shape()[0];
    let plane: usize = x.shape()[2..].iter().product();
    let sample = ch * plane;
    let mut y = Tensor::zeros(x.shape());
    for n in 0..batch {
        for c in 0..ch {
            let scale = gamma.data()[c] * saved.inv_std[c];
            let shift = beta.data()[c] - saved.mean[c] * scale;
            let src = &x.data()[n * sample + c * plane..n * sample + (c + 1) * plane];
            let dst = &mut y.data_mut()[n * sample + c * plane..n * sample + (c + 1) * plane];
            for (d, &s) in dst.iter_mut().zip(src.iter()) {
                *d = s * scale + shift;
            }
        }
    }
    y
}

/// Gradients w.r.t. input, gamma and beta.
pub fn batchnorm_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    x: &Tensor<T>,
    saved: &BnSaved<T>,
    gamma: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let (batch, ch, plane) = check_channels("batchnorm_backward", x, saved.mean.len())?;
    let sample = ch * plane;
    let m = (batch * plane) as f64;

    let mut grad_x = Tensor::zeros(x.shape());
    let mut grad_gamma = Tensor::zeros(&[ch]);
    let mut grad_beta = Tensor::zeros(&[ch]);

    for c in 0..ch {
        let mean = saved.mean[c].as_f64();
        let istd = saved.inv_std[c].as_f64();
        let g = gamma.data()[c].as_f64();

        let mut sum_dy = 0.0_f64;
        let mut sum_dy_xhat = 0.0_f64;
        for n in 0..batch {
            let xs = &x.data()[n * sample + c * plane..n * sample + (c + 1) * plane];
            let gs = &grad_out.data()[n * sample + c * plane..n * sample + (c + 1) * plane];
            for (xv, gv) in xs.iter().zip(gs.iter()) {
                let xhat = (xv.as_f64() - mean) * istd;
                sum_dy += gv.as_f64();
                sum_dy_xhat += gv.as_f64() * xhat;
            }
        }
        grad_gamma.data_mut()[c] = T::of_f64(sum_dy_xhat);
        grad_beta.data_mut()[c] = T::of_f64(sum_dy);

        for n in 0..batch {
            let xs = &x.data()[n * sample + c * plane..n * sample + (c + 1) * plane];
            let gs = &grad_out.data()[n * sample + c * plane..n * sample + (c + 1) * plane];
            let dst = &mut grad_x.data_mut()[n * sample + c * plane..n * sample + (c + 1) * plane];
            if saved.train_mode {
                // With the variance floor active the normalizer is constant,
                // so only the mean term survives.
                let var_term = if saved.floored[c] { 0.0 } else { 1.0 };
                for ((dv, xv), gv) in dst.iter_mut().zip(xs.iter()).zip(gs.iter()) {
                    let xhat = (xv.as_f64() - mean) * istd;
                    let d = g * istd
                        * (gv.as_f64() - sum_dy / m - var_term * xhat * sum_dy_xhat / m);
                    *dv = T::of_f64(d);
                }
            } else {
                // Running statistics are constants: plain affine gradient.
                for (dv, gv) in dst.iter_mut().zip(gs.iter()) {
                    *dv = T::of_f64(g * istd * gv.as_f64());
                }
            }
        }
    }

    Ok((grad_x, grad_gamma, grad_beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn eval_identity_when_stats_are_neutral() {
        let x = Tensor::from_vec(&[2, 2, 2], vec![1.0, -2.0, 3.0, 4.0, 0.5, 0.0, -1.0, 2.0]).unwrap();
        let gamma = Tensor::full(&[2], 1.0_f64);
        let beta = Tensor::zeros(&[2]);
        let mut state = BatchNormState::new(2);
        state.mode = BnMode::Eval;
        state.epsilon = 0.0;
        let (y, _) = batchnorm_forward(&x, &gamma, &beta, &mut state).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn train_output_is_normalized_per_channel() {
        let mut rng = SeededRng::new(11);
        let x = Tensor::<f64>::randn(&[4, 3, 5, 5], 2.0, &mut rng).map(|v| v + 0.7);
        let gamma = Tensor::full(&[3], 1.0_f64);
        let beta = Tensor::zeros(&[3]);
        let mut state = BatchNormState::new(3);
        let (y, _) = batchnorm_forward(&x, &gamma, &beta, &mut state).unwrap();
        let plane = 25;
        let sample = 3 * plane;
        for c in 0..3 {
            let mut vals = Vec::new();
            for n in 0..4 {
                vals.extend_from_slice(&y.data()[n * sample + c * plane..n * sample + (c + 1) * plane]);
            }
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / vals.len() as f64;
            assert!(m.abs() <= 1e-10, "channel {c} mean {m}");
            assert!((v - 1.0).abs() <= 1e-6, "channel {c} var {v}");
        }
    }

    #[test]
    fn eval_mode_leaves_running_stats_untouched() {
        let mut rng = SeededRng::new(5);
        let x = Tensor::<f64>::randn(&[2, 2, 4], 1.0, &mut rng);
        let gamma = Tensor::full(&[2], 1.3_f64);
        let beta = Tensor::full(&[2], -0.2_f64);
        let mut state = BatchNormState::new(2);
        state.mode = BnMode::Eval;
        let before_mean = state.running_mean.clone();
        let before_var = state.running_var.clone();
        let (y1, _) = batchnorm_forward(&x, &gamma, &beta, &mut state).unwrap();
        let (y2, _) = batchnorm_forward(&x, &gamma, &beta, &mut state).unwrap();
        assert_eq!(y1.data(), y2.data(), "eval mode must be idempotent");
        assert_eq!(state.running_mean.data(), before_mean.data());
        assert_eq!(state.running_var.data(), before_var.data());
    }

    #[test]
    fn variance_floor_handles_constant_input() {
        let x = Tensor::full(&[2, 1, 8], 3.0_f64);
        let gamma = Tensor::full(&[1], 1.0_f64);
        let beta = Tensor::zeros(&[1]);
        let mut state = BatchNormState::new(1);
        let (y, _) = batchnorm_forward(&x, &gamma, &beta, &mut state).unwrap();
        assert!(y.all_finite());
        assert!(y.data().iter().all(|&v| v.abs() < 1e-6));
    }
}
