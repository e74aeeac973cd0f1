//! ReLU activation and softmax cross-entropy loss.

use crate::error::{NnError, Result};
use crate::tensor::{Scalar, Tensor};

/// Elementwise max(0, x). The subgradient at 0 is taken as 0.
pub fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// Gradient mask from the forward *output*: cells where the output is zero
/// (negative or exactly-zero inputs) receive no gradient.
pub fn relu_backward<T: Scalar>(grad_out: &Tensor<T>, output: &Tensor<T>) -> Tensor<T> {
    assert_eq!(grad_out.shape(), output.shape(), "relu_backward: shape mismatch");
    let mut gx = Tensor::zeros(output.shape());
    for ((g, &go), &y) in gx
        .data_mut()
        .iter_mut()
        .zip(grad_out.data().iter())
        .zip(output.data().iter())
    {
        if y > T::zero() {
            *g = go;
        }
    }
    gx
}

/// Row-wise softmax probabilities (stable log-sum-exp form).
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Tensor<T> {
    let classes = *logits.shape().last().expect("softmax: empty shape");
    let mut out = Tensor::zeros(logits.shape());
    for (row_out, row) in out
        .data_mut()
        .chunks_mut(classes)
        .zip(logits.data().chunks(classes))
    {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut denom = T::zero();
        for (o, &v) in row_out.iter_mut().zip(row.iter()) {
            *o = (v - max).exp();
            denom += *o;
        }
        for o in row_out.iter_mut() {
            *o = *o / denom;
        }
    }
    out
}

/// Mean cross-entropy over the batch and the gradient w.r.t. the logits,
/// `(softmax - one_hot) / batch`.
pub fn softmax_cross_entropy<T: Scalar>(
    logits: &Tensor<T>,
    labels: &[usize],
) -> Result<(f64, Tensor<T>)> {
    if logits.shape().len() != 2 {
        return Err(NnError::RankMismatch {
            op: "softmax_cross_entropy",
            expected: 2,
            actual: logits.shape().len(),
        });
    }
    let batch = logits.shape()[0];
    let classes = logits.shape()[1];
    if labels.len() != batch {
        return Err(NnError::AxisMismatch {
            op: "softmax_cross_entropy",
            axis: 0,
            expected: batch,
            actual: labels.len(),
        });
    }
    for (row, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(NnError::LabelOutOfRange {
                row,
                label,
                classes,
            });
        }
    }

    let mut grad = Tensor::zeros(logits.shape());
    let inv_batch = T::from_usize(batch).unwrap().recip();
    let mut loss = 0.0_f64;
    for ((row, g), &label) in logits
        .data()
        .chunks(classes)
        .zip(grad.data_mut().chunks_mut(classes))
        .zip(labels.iter())
    {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let log_sum = row
            .iter()
            .map(|&v| (v - max).exp().as_f64())
            .sum::<f64>()
            .ln();
        loss += log_sum - (row[label] - max).as_f64();
        for (c, (gv, &v)) in g.iter_mut().zip(row.iter()).enumerate() {
            let p = ((v - max).as_f64() - log_sum).exp();
            let target = if c == label { 1.0 } else { 0.0 };
            *gv = T::of_f64(p - target) * inv_batch;
        }
    }
    Ok((loss / batch as f64, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_matches_definition() {
        let x = Tensor::from_vec(&[3], vec![-1.0_f64, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn all_negative_input_gives_zero_output_and_grad() {
        let x = Tensor::from_vec(&[4], vec![-1.0_f64, -0.5, -3.0, -0.001]).unwrap();
        let y = relu(&x);
        assert!(y.data().iter().all(|&v| v == 0.0));
        let go = Tensor::full(&[4], 1.0_f64);
        let gx = relu_backward(&go, &y);
        assert!(gx.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn equal_logits_cost_ln_2() {
        let logits = Tensor::from_vec(&[1, 2], vec![0.3_f64, 0.3]).unwrap();
        let (loss, _) = softmax_cross_entropy(&logits, &[0]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12, "loss {loss}");
        let p = softmax(&logits);
        assert!((p.data()[0] - 0.5).abs() < 1e-12);
        assert!((p.data()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn large_correct_margin_saturates_to_zero_loss() {
        let logits = Tensor::from_vec(&[1, 2], vec![50.0_f64, 0.0]).unwrap();
        let (loss, _) = softmax_cross_entropy(&logits, &[0]).unwrap();
        assert!(loss <= 1e-20, "loss {loss}");
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let logits = Tensor::from_vec(&[2, 2], vec![3.0_f64, -1.0, 800.0, 802.0]).unwrap();
        let p = softmax(&logits);
        for row in p.data().chunks(2) {
            assert!(row.iter().all(|&v| v >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn out_of_range_label_is_an_error() {
        let logits = Tensor::from_vec(&[1, 2], vec![0.0_f64, 0.0]).unwrap();
        let err = softmax_cross_entropy(&logits, &[2]).unwrap_err();
        assert!(matches!(err, NnError::LabelOutOfRange { label: 2, .. }));
    }
}
