//! Adam optimizer with bias correction.

use crate::error::{NnError, Result};
use crate::tensor::{Parameter, Scalar, Tensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    step: u64,
    moments: Vec<(Tensor<T>, Tensor<T>)>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig) -> Self {
        AdamState {
            config,
            step: 0,
            moments: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn moments(&self) -> &[(Tensor<T>, Tensor<T>)] {
        &self.moments
    }

    /// Rebuild a state from checkpointed parts.
    pub fn from_parts(config: AdamConfig, step: u64, moments: Vec<(Tensor<T>, Tensor<T>)>) -> Self {
        AdamState {
            config,
            step,
            moments,
        }
    }
}

/// One bias-corrected Adam update over `params`, consuming the gradients
/// accumulated in `Parameter::grad`. Gradients are not cleared here.
pub fn adam_step<T: Scalar>(params: &mut [Parameter<T>], state: &mut AdamState<T>) -> Result<()> {
    if state.moments.is_empty() {
        state.moments = params
            .iter()
            .map(|p| (Tensor::zeros(p.value.shape()), Tensor::zeros(p.value.shape())))
            .collect();
    }
    if state.moments.len() != params.len() {
        return Err(NnError::OptimizerShape {
            op: "adam_step",
            index: state.moments.len().min(params.len()),
            moment: vec![state.moments.len()],
            value: vec![params.len()],
        });
    }

    state.step += 1;
    let t = state.step;
    let b1 = state.config.beta1;
    let b2 = state.config.beta2;
    let corr1 = 1.0 - b1.powi(t as i32);
    let corr2 = 1.0 - b2.powi(t as i32);
    let lr = state.config.learning_rate;
    let eps = state.config.epsilon;

    for (index, (param, (m, v))) in params.iter_mut().zip(state.moments.iter_mut()).enumerate() {
        if m.shape() != param.value.shape() {
            return Err(NnError::OptimizerShape {
                op: "adam_step",
                index,
                moment: m.shape().to_vec(),
                value: param.value.shape().to_vec(),
            });
        }
        let b1t = T::of_f64(b1);
        let b2t = T::of_f64(b2);
        let one_m_b1 = T::of_f64(1.0 - b1);
        let one_m_b2 = T::of_f64(1.0 - b2);
        for ((pv, &g), (mv, vv)) in param
            .value
            .data_mut()
            .iter_mut()
            .zip(param.grad.data().iter())
            .zip(m.data_mut().iter_mut().zip(v.data_mut().iter_mut()))
        {
            *mv = b1t * *mv + one_m_b1 * g;
            *vv = b2t * *vv + one_m_b2 * g * g;
            let m_hat = mv.as_f64() / corr1;
            let v_hat = vv.as_f64() / corr2;
            *pv -= T::of_f64(lr * m_hat / (v_hat.sqrt() + eps));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_param(v: f64, g: f64) -> Parameter<f64> {
        let mut p = Parameter::new("w", Tensor::from_vec(&[1], vec![v]).unwrap());
        p.grad = Tensor::from_vec(&[1], vec![g]).unwrap();
        p
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut params = vec![scalar_param(1.5, 0.0)];
        let mut state = AdamState::new(AdamConfig::default());
        for _ in 0..5 {
            adam_step(&mut params, &mut state).unwrap();
        }
        assert_eq!(params[0].value.data()[0], 1.5);
    }

    #[test]
    fn first_step_moves_by_minus_lr() {
        // m_hat = 1, v_hat = 1 after bias correction, so the step is -lr.
        let mut params = vec![scalar_param(0.0, 1.0)];
        let mut state = AdamState::new(AdamConfig::default());
        adam_step(&mut params, &mut state).unwrap();
        let p = params[0].value.data()[0];
        assert!((p + 1e-3).abs() < 1e-6, "param {p}");
    }

    #[test]
    fn quadratic_loss_decreases_monotonically() {
        // f(w) = (w - 3)^2 / 2, grad = w - 3.
        let mut params = vec![scalar_param(0.0, 0.0)];
        let mut state = AdamState::new(AdamConfig {
            learning_rate: 0.1,
            ..AdamConfig::default()
        });
        let mut last_loss = f64::INFINITY;
        for _ in 0..2 {
            let w = params[0].value.data()[0];
            let loss = 0.5 * (w - 3.0) * (w - 3.0);
            assert!(loss < last_loss, "loss must decrease: {loss} vs {last_loss}");
            last_loss = loss;
            params[0].grad.data_mut()[0] = w - 3.0;
            adam_step(&mut params, &mut state).unwrap();
        }
    }
}
