//! Fully connected layer: `y = x W^T + b`.

use crate::error::{NnError, Result};
use crate::tensor::{gemm, Scalar, Tensor};

pub struct LinearGrads<T> {
    pub grad_input: Tensor<T>,
    pub grad_weight: Tensor<T>,
    pub grad_bias: Tensor<T>,
}

fn check<T: Scalar>(
    op: &'static str,
    x: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<(usize, usize, usize)> {
    if x.shape().len() != 2 || weight.shape().len() != 2 {
        return Err(NnError::RankMismatch {
            op,
            expected: 2,
            actual: x.shape().len().max(weight.shape().len()),
        });
    }
    let (batch, d_in) = (x.shape()[0], x.shape()[1]);
    let (d_out, w_in) = (weight.shape()[0], weight.shape()[1]);
    if w_in != d_in {
        return Err(NnError::AxisMismatch {
            op,
            axis: 1,
            expected: d_in,
            actual: w_in,
        });
    }
    if bias.shape() != [d_out] {
        return Err(NnError::AxisMismatch {
            op,
            axis: 0,
            expected: d_out,
            actual: bias.numel(),
        });
    }
    Ok((batch, d_in, d_out))
}

/// `x [batch, in] -> [batch, out]` with weight `[out, in]`, bias `[out]`.
pub fn linear_forward<T: Scalar>(
    x: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let (batch, d_in, d_out) = check("linear_forward", x, weight, bias)?;
    let mut y = Tensor::zeros(&[batch, d_out]);
    // y = x [batch x in] * W^T [in x out]
    gemm(
        batch,
        d_in,
        d_out,
        T::one(),
        x.data(),
        d_in as isize,
        1,
        weight.data(),
        1,
        d_in as isize,
        T::zero(),
        y.data_mut(),
        d_out as isize,
        1,
    );
    for row in y.data_mut().chunks_mut(d_out) {
        for (v, &b) in row.iter_mut().zip(bias.data().iter()) {
            *v += b;
        }
    }
    Ok(y)
}

pub fn linear_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    x: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<LinearGrads<T>> {
    let (batch, d_in, d_out) = check("linear_backward", x, weight, bias)?;
    if grad_out.shape() != [batch, d_out] {
        return Err(NnError::AxisMismatch {
            op: "linear_backward",
            axis: 1,
            expected: d_out,
            actual: grad_out.shape().get(1).copied().unwrap_or(0),
        });
    }

    let mut grad_input = Tensor::zeros(&[batch, d_in]);
    // gx = go [batch x out] * W [out x in]
    gemm(
        batch,
        d_out,
        d_in,
        T::one(),
        grad_out.data(),
        d_out as isize,
        1,
        weight.data(),
        d_in as isize,
        1,
        T::zero(),
        grad_input.data_mut(),
        d_in as isize,
        1,
    );

    let mut grad_weight = Tensor::zeros(&[d_out, d_in]);
    // gw = go^T [out x batch] * x [batch x in]
    gemm(
        d_out,
        batch,
        d_in,
        T::one(),
        grad_out.data(),
        1,
        d_out as isize,
        x.data(),
        d_in as isize,
        1,
        T::zero(),
        grad_weight.data_mut(),
        d_in as isize,
        1,
    );

    let mut grad_bias = Tensor::zeros(&[d_out]);
    for row in grad_out.data().chunks(d_out) {
        for (g, &v) in grad_bias.data_mut().iter_mut().zip(row.iter()) {
            *g += v;
        }
    }

    Ok(LinearGrads {
        grad_input,
        grad_weight,
        grad_bias,
    })
}
