//! Central finite-difference gradient checking.
//!
//! The caller supplies a closure that recomputes the loss (and, as a side
//! effect, refills every `Parameter::grad`). The checker snapshots the
//! analytic gradients from one call, then perturbs sampled coordinates and
//! compares against central differences. Runs in f64 only.

use crate::rng::SeededRng;
use crate::tensor::Parameter;

#[derive(Debug, Clone)]
pub struct GradCheckOptions {
    /// Central difference step h.
    pub step: f64,
    /// Coordinates sampled per parameter tensor (all of them if fewer).
    pub samples_per_tensor: usize,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            step: 1e-6,
            samples_per_tensor: 10,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParamCheck {
    pub name: String,
    pub max_rel_err: f64,
    pub worst_coord: usize,
    pub analytic_at_worst: f64,
    pub numeric_at_worst: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub params: Vec<ParamCheck>,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.params.iter().fold(0.0, |m, p| m.max(p.max_rel_err))
    }

    pub fn worst(&self) -> Option<&ParamCheck> {
        self.params
            .iter()
            .max_by(|a, b| a.max_rel_err.total_cmp(&b.max_rel_err))
    }
}

/// Relative error with an absolute floor so that truly-zero gradients
/// (e.g. behind dead ReLU units) do not divide by zero.
fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff <= 1e-10 {
        return 0.0;
    }
    diff / analytic.abs().max(numeric.abs())
}

/// Check the gradients of `eval` at the current parameter values.
///
/// `eval` must zero any internal state it needs and return the scalar loss;
/// on every call it may overwrite `Parameter::grad` (only the first call's
/// gradients are read). Parameters are restored to their original values
/// before returning, with gradients cleared.
pub fn gradcheck<F>(
    params: &mut Vec<Parameter<f64>>,
    mut eval: F,
    opts: &GradCheckOptions,
) -> GradCheckReport
where
    F: FnMut(&mut Vec<Parameter<f64>>) -> f64,
{
    for p in params.iter_mut() {
        p.zero_grad();
    }
    let _ = eval(params);
    let analytic: Vec<Vec<f64>> = params.iter().map(|p| p.grad.data().to_vec()).collect();

    let mut rng = SeededRng::new(opts.seed);
    let mut report = Vec::with_capacity(params.len());

    for pi in 0..params.len() {
        let numel = params[pi].value.numel();
        let coords: Vec<usize> = if numel <= opts.samples_per_tensor {
            (0..numel).collect()
        } else {
            let mut all: Vec<usize> = (0..numel).collect();
            rng.shuffle(&mut all);
            all.truncate(opts.samples_per_tensor);
            all
        };

        let mut check = ParamCheck {
            name: params[pi].name.clone(),
            max_rel_err: 0.0,
            worst_coord: 0,
            analytic_at_worst: 0.0,
            numeric_at_worst: 0.0,
        };

        for &ci in &coords {
            let original = params[pi].value.data()[ci];
            params[pi].value.data_mut()[ci] = original + opts.step;
            let loss_plus = eval(params);
            params[pi].value.data_mut()[ci] = original - opts.step;
            let loss_minus = eval(params);
            params[pi].value.data_mut()[ci] = original;

            let numeric = (loss_plus - loss_minus) / (2.0 * opts.step);
            let err = rel_err(analytic[pi][ci], numeric);
            if err > check.max_rel_err {
                check.max_rel_err = err;
                check.worst_coord = ci;
                check.analytic_at_worst = analytic[pi][ci];
                check.numeric_at_worst = numeric;
            }
        }
        report.push(check);
    }

    for p in params.iter_mut() {
        p.zero_grad();
    }
    GradCheckReport { params: report }
}
