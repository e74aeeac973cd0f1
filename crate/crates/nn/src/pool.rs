//! Max, average and global-average pooling for 2D maps and 3D volumes.
//!
//! Max pooling pads with minus infinity (padded cells never win on finite
//! inputs) and the backward pass routes each window's gradient to the first
//! maximal element in row-major window order. Average pooling takes no
//! padding and spreads gradient uniformly over the window.

use crate::error::{NnError, Result};
use crate::tensor::{Scalar, Tensor};

fn pool_geometry(
    op: &'static str,
    x_shape: &[usize],
    kernel: &[usize],
    stride: &[usize],
    padding: &[usize],
) -> Result<(usize, usize, [usize; 3], [usize; 3], [usize; 3], [usize; 3], [usize; 3])> {
    let rank = kernel.len();
    if x_shape.len() != rank + 2 {
        return Err(NnError::RankMismatch {
            op,
            expected: rank + 2,
            actual: x_shape.len(),
        });
    }
    let mut in_sp = [1usize; 3];
    let mut out_sp = [1usize; 3];
    let mut k = [1usize; 3];
    let mut s = [1usize; 3];
    let mut p = [0usize; 3];
    for axis in 0..rank {
        let input = x_shape[2 + axis];
        let padded = input + 2 * padding[axis];
        if padded < kernel[axis] {
            return Err(NnError::EmptyOutput {
                op,
                axis,
                input,
                kernel: kernel[axis],
                stride: stride[axis],
                padding: padding[axis],
            });
        }
        in_sp[axis] = input;
        out_sp[axis] = (padded - kernel[axis]) / stride[axis] + 1;
        k[axis] = kernel[axis];
        s[axis] = stride[axis];
        p[axis] = padding[axis];
    }
    Ok((x_shape[0], x_shape[1], in_sp, out_sp, k, s, p))
}

fn out_shape(batch: usize, ch: usize, out_sp: &[usize; 3], rank: usize) -> Vec<usize> {
    let mut shape = vec![batch, ch];
    shape.extend_from_slice(&out_sp[..rank]);
    shape
}

/// Max pooling. Returns the pooled tensor plus, per output element, the flat
/// index of the winning input element (used by [`maxpool_backward`]).
pub fn maxpool_forward<T: Scalar>(
    x: &Tensor<T>,
    kernel: &[usize],
    stride: &[usize],
    padding: &[usize],
) -> Result<(Tensor<T>, Vec<usize>)> {
    let (batch, ch, in_sp, out_sp, k, s, p) =
        pool_geometry("maxpool", x.shape(), kernel, stride, padding)?;
    let rank = kernel.len();
    let [ih, iw, it] = in_sp;
    let [oh, ow, ot] = out_sp;

    let mut out = Tensor::zeros(&out_shape(batch, ch, &out_sp, rank));
    let mut argmax = vec![usize::MAX; out.numel()];
    let plane = ih * iw * it;
    let xd = x.data();
    let od = out.data_mut();

    let mut w = 0;
    for n in 0..batch {
        for c in 0..ch {
            let base = (n * ch + c) * plane;
            for oy in 0..oh {
                for ox in 0..ow {
                    for oz in 0..ot {
                        let mut best: Option<(T, usize)> = None;
                        for ky in 0..k[0] {
                            let iy = (oy * s[0] + ky) as isize - p[0] as isize;
                            if iy < 0 || iy >= ih as isize {
                                continue;
                            }
                            for kx in 0..k[1] {
                                let ix = (ox * s[1] + kx) as isize - p[1] as isize;
                                if ix < 0 || ix >= iw as isize {
                                    continue;
                                }
                                for kz in 0..k[2] {
                                    let iz = (oz * s[2] + kz) as isize - p[2] as isize;
                                    if iz < 0 || iz >= it as isize {
                                        continue;
                                    }
                                    let idx =
                                        base + (iy as usize * iw + ix as usize) * it + iz as usize;
                                    let v = xd[idx];
                                    // Strict > keeps the first maximum.
                                    if best.map_or(true, |(bv, _)| v > bv) {
                                        best = Some((v, idx));
                                    }
                                }
                            }
                        }
                        if let Some((v, idx)) = best {
                            od[w] = v;
                            argmax[w] = idx;
                        }
                        w += 1;
                    }
                }
            }
        }
    }
    Ok((out, argmax))
}

/// Routes each output gradient to its window's argmax.
pub fn maxpool_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    argmax: &[usize],
    input_shape: &[usize],
) -> Tensor<T> {
    assert_eq!(grad_out.numel(), argmax.len(), "maxpool_backward: index count");
    let mut gx = Tensor::zeros(input_shape);
    let g = gx.data_mut();
    for (&idx, &go) in argmax.iter().zip(grad_out.data().iter()) {
        if idx != usize::MAX {
            g[idx] += go;
        }
    }
    gx
}

/// Average pooling without padding.
pub fn avgpool_forward<T: Scalar>(
    x: &Tensor<T>,
    kernel: &[usize],
    stride: &[usize],
) -> Result<Tensor<T>> {
    let zero_pad = vec![0usize; kernel.len()];
    let (batch, ch, in_sp, out_sp, k, s, _) =
        pool_geometry("avgpool", x.shape(), kernel, stride, &zero_pad)?;
    let rank = kernel.len();
    let [ih, iw, it] = in_sp;
    let [oh, ow, ot] = out_sp;
    let count = T::from_usize(k[0] * k[1] * k[2]).unwrap();

    let mut out = Tensor::zeros(&out_shape(batch, ch, &out_sp, rank));
    let plane = ih * iw * it;
    let xd = x.data();
    let od = out.data_mut();

    let mut w = 0;
    for n in 0..batch {
        for c in 0..ch {
            let base = (n * ch + c) * plane;
            for oy in 0..oh {
                for ox in 0..ow {
                    for oz in 0..ot {
                        let mut acc = T::zero();
                        for ky in 0..k[0] {
                            let iy = oy * s[0] + ky;
                            for kx in 0..k[1] {
                                let ix = ox * s[1] + kx;
                                let row = base + (iy * iw + ix) * it + oz * s[2];
                                for kz in 0..k[2] {
                                    acc += xd[row + kz];
                                }
                            }
                        }
                        od[w] = acc / count;
                        w += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Spreads each output gradient uniformly over its window.
pub fn avgpool_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    input_shape: &[usize],
    kernel: &[usize],
    stride: &[usize],
) -> Result<Tensor<T>> {
    let zero_pad = vec![0usize; kernel.len()];
    let (batch, ch, in_sp, out_sp, k, s, _) =
        pool_geometry("avgpool", input_shape, kernel, stride, &zero_pad)?;
    let [ih, iw, it] = in_sp;
    let [oh, ow, ot] = out_sp;
    let count = T::from_usize(k[0] * k[1] * k[2]).unwrap();

    let mut gx = Tensor::zeros(input_shape);
    let plane = ih * iw * it;
    let g = gx.data_mut();
    let god = grad_out.data();

    let mut w = 0;
    for n in 0..batch {
        for c in 0..ch {
            let base = (n * ch + c) * plane;
            for oy in 0..oh {
                for ox in 0..ow {
                    for oz in 0..ot {
                        let share = god[w] / count;
                        w += 1;
                        for ky in 0..k[0] {
                            let iy = oy * s[0] + ky;
                            for kx in 0..k[1] {
                                let ix = ox * s[1] + kx;
                                let row = base + (iy * iw + ix) * it + oz * s[2];
                                for kz in 0..k[2] {
                                    g[row + kz] += share;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(gx)
}

/// Mean over every non-batch, non-channel axis: `[n, c, ...] -> [n, c]`.
pub fn global_avg_pool<T: Scalar>(x: &Tensor<T>) -> Result<Tensor<T>> {
    if x.shape().len() < 3 {
        return Err(NnError::RankMismatch {
            op: "global_avg_pool",
            expected: 3,
            actual: x.shape().len(),
        });
    }
    let batch = x.shape()[0];
    let ch = x.shape()[1];
    let cells: usize = x.shape()[2..].iter().product();
    let count = T::from_usize(cells).unwrap();
    let mut out = Tensor::zeros(&[batch, ch]);
    for (o, chunk) in out.data_mut().iter_mut().zip(x.data().chunks(cells)) {
        *o = chunk.iter().copied().sum::<T>() / count;
    }
    Ok(out)
}

pub fn global_avg_pool_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    input_shape: &[usize],
) -> Tensor<T> {
    let cells: usize = input_shape[2..].iter().product();
    let count = T::from_usize(cells).unwrap();
    let mut gx = Tensor::zeros(input_shape);
    for (chunk, &go) in gx.data_mut().chunks_mut(cells).zip(grad_out.data().iter()) {
        let share = go / count;
        for v in chunk {
            *v = share;
        }
    }
    gx
}
