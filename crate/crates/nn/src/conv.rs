//! 2D and 3D cross-correlation with zero padding.
//!
//! Forward and backward lower each sample to an im2col patch matrix and run
//! the strided GEMM kernel. Samples are processed in parallel; every
//! reduction over the batch is summed in sample order, so results do not
//! depend on the worker count.

use rayon::prelude::*;

use crate::error::{NnError, Result};
use crate::tensor::{Scalar, Tensor};

/// Geometry of one convolution: kernel/stride/padding per spatial axis plus
/// channel counts. Rank 2 covers H x W maps, rank 3 covers H x W x T volumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvSpec {
    pub kernel: Vec<usize>,
    pub stride: Vec<usize>,
    pub padding: Vec<usize>,
    pub in_channels: usize,
    pub out_channels: usize,
    pub bias: bool,
}

impl ConvSpec {
    pub fn new_2d(
        kernel: [usize; 2],
        stride: [usize; 2],
        padding: [usize; 2],
        in_channels: usize,
        out_channels: usize,
        bias: bool,
    ) -> Self {
        ConvSpec {
            kernel: kernel.to_vec(),
            stride: stride.to_vec(),
            padding: padding.to_vec(),
            in_channels,
            out_channels,
            bias,
        }
    }

    pub fn new_3d(
        kernel: [usize; 3],
        stride: [usize; 3],
        padding: [usize; 3],
        in_channels: usize,
        out_channels: usize,
        bias: bool,
    ) -> Self {
        ConvSpec {
            kernel: kernel.to_vec(),
            stride: stride.to_vec(),
            padding: padding.to_vec(),
            in_channels,
            out_channels,
            bias,
        }
    }

    pub fn rank(&self) -> usize {
        self.kernel.len()
    }

    /// floor((in + 2*pad - kernel) / stride) + 1 per axis, or an error for the
    /// first axis whose extent comes out non-positive.
    pub fn out_spatial(&self, op: &'static str, in_spatial: &[usize]) -> Result<Vec<usize>> {
        if in_spatial.len() != self.rank() {
            return Err(NnError::RankMismatch {
                op,
                expected: self.rank(),
                actual: in_spatial.len(),
            });
        }
        let mut out = Vec::with_capacity(self.rank());
        for axis in 0..self.rank() {
            let padded = in_spatial[axis] + 2 * self.padding[axis];
            if padded < self.kernel[axis] {
                return Err(NnError::EmptyOutput {
                    op,
                    axis,
                    input: in_spatial[axis],
                    kernel: self.kernel[axis],
                    stride: self.stride[axis],
                    padding: self.padding[axis],
                });
            }
            out.push((padded - self.kernel[axis]) / self.stride[axis] + 1);
        }
        Ok(out)
    }

    /// Expected weight tensor shape `[out_ch, in_ch, kernel...]`.
    pub fn weight_shape(&self) -> Vec<usize> {
        let mut s = vec![self.out_channels, self.in_channels];
        s.extend_from_slice(&self.kernel);
        s
    }

    fn kernel_volume(&self) -> usize {
        self.kernel.iter().product()
    }

    fn validate(
        &self,
        op: &'static str,
        x: &Tensor<impl Scalar>,
        weight: &Tensor<impl Scalar>,
        bias: Option<&Tensor<impl Scalar>>,
    ) -> Result<Vec<usize>> {
        if x.shape().len() != self.rank() + 2 {
            return Err(NnError::RankMismatch {
                op,
                expected: self.rank() + 2,
                actual: x.shape().len(),
            });
        }
        if x.shape()[1] != self.in_channels {
            return Err(NnError::AxisMismatch {
                op,
                axis: 1,
                expected: self.in_channels,
                actual: x.shape()[1],
            });
        }
        if weight.shape() != self.weight_shape().as_slice() {
            return Err(NnError::AxisMismatch {
                op,
                axis: 0,
                expected: self.weight_shape().iter().product(),
                actual: weight.numel(),
            });
        }
        if let Some(b) = bias {
            if b.shape() != [self.out_channels] {
                return Err(NnError::AxisMismatch {
                    op,
                    axis: 0,
                    expected: self.out_channels,
                    actual: b.numel(),
                });
            }
        }
        self.out_spatial(op, &x.shape()[2..])
    }
}

/// Gradients of one convolution call.
pub struct ConvGrads<T> {
    pub grad_input: Tensor<T>,
    pub grad_weight: Tensor<T>,
    pub grad_bias: Option<Tensor<T>>,
}

/// Cross-correlation of `x [n, in_ch, spatial...]` with `weight
/// [out_ch, in_ch, kernel...]`.
///
/// Pointwise convolutions (kernel 1, stride 1, no padding) skip patch
/// extraction entirely; everything else lowers each sample to a k-major
/// patch matrix `[in_ch * kernel_volume, cells]` whose rows are contiguous
/// temporal runs.
pub fn conv_forward<T: Scalar>(
    x: &Tensor<T>,
    spec: &ConvSpec,
    weight: &Tensor<T>,
    bias: Option<&Tensor<T>>,
) -> Result<Tensor<T>> {
    let out_spatial = spec.validate("conv_forward", x, weight, bias)?;
    let batch = x.shape()[0];
    let in_spatial = &x.shape()[2..];
    let cells: usize = out_spatial.iter().product();
    let k = spec.in_channels * spec.kernel_volume();

    let mut out_shape = vec![batch, spec.out_channels];
    out_shape.extend_from_slice(&out_spatial);
    let mut out = Tensor::zeros(&out_shape);

    let in_len: usize = spec.in_channels * in_spatial.iter().product::<usize>();
    let out_len = spec.out_channels * cells;
    let geom = Geometry::new(spec, in_spatial, &out_spatial);
    let pointwise = geom.is_pointwise();

    out.data_mut()
        .par_chunks_mut(out_len.max(1))
        .zip(x.data().par_chunks(in_len.max(1)))
        .for_each_init(Vec::new, |col, (out_n, x_n)| {
            let patches: &[T] = if pointwise {
                x_n
            } else {
                col.resize(k * cells, T::zero());
                geom.im2col(x_n, col);
                col
            };
            // out_n [out_ch x cells] = W [out_ch x k] * patches [k x cells]
            crate::tensor::gemm(
                spec.out_channels,
                k,
                cells,
                T::one(),
                weight.data(),
                k as isize,
                1,
                patches,
                cells as isize,
                1,
                T::zero(),
                out_n,
                cells as isize,
                1,
            );
            if let Some(b) = bias {
                for (co, row) in out_n.chunks_mut(cells).enumerate() {
                    let bv = b.data()[co];
                    for v in row {
                        *v += bv;
                    }
                }
            }
        });

    Ok(out)
}

/// Exact gradients of [`conv_forward`] with respect to input, weight and bias.
pub fn conv_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    x: &Tensor<T>,
    spec: &ConvSpec,
    weight: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    let out_spatial = spec.validate("conv_backward", x, weight, None::<&Tensor<T>>)?;
    let batch = x.shape()[0];
    let cells: usize = out_spatial.iter().product();
    let mut expected = vec![batch, spec.out_channels];
    expected.extend_from_slice(&out_spatial);
    if grad_out.shape() != expected.as_slice() {
        return Err(NnError::AxisMismatch {
            op: "conv_backward",
            axis: 0,
            expected: expected.iter().product(),
            actual: grad_out.numel(),
        });
    }

    let in_spatial = &x.shape()[2..];
    let k = spec.in_channels * spec.kernel_volume();
    let in_len: usize = spec.in_channels * in_spatial.iter().product::<usize>();
    let out_len = spec.out_channels * cells;
    let geom = Geometry::new(spec, in_spatial, &out_spatial);
    let pointwise = geom.is_pointwise();

    let mut grad_input = Tensor::zeros(x.shape());

    // Per-sample weight/bias partials, reduced afterwards in sample order.
    let partials: Vec<(Vec<T>, Vec<T>)> = grad_input
        .data_mut()
        .par_chunks_mut(in_len.max(1))
        .zip(x.data().par_chunks(in_len.max(1)))
        .zip(grad_out.data().par_chunks(out_len.max(1)))
        .map_init(
            || (Vec::new(), Vec::new()),
            |(col, gcol), ((gi_n, x_n), go_n)| {
                let patches: &[T] = if pointwise {
                    x_n
                } else {
                    col.resize(k * cells, T::zero());
                    geom.im2col(x_n, col);
                    col
                };

                // gw [out_ch x k] = go_n [out_ch x cells] * patches^T [cells x k]
                let mut gw = vec![T::zero(); spec.out_channels * k];
                crate::tensor::gemm(
                    spec.out_channels,
                    cells,
                    k,
                    T::one(),
                    go_n,
                    cells as isize,
                    1,
                    patches,
                    1,
                    cells as isize,
                    T::zero(),
                    &mut gw,
                    k as isize,
                    1,
                );

                let mut gb = Vec::new();
                if spec.bias {
                    gb = go_n
                        .chunks(cells)
                        .map(|row| row.iter().copied().sum())
                        .collect();
                }

                // gpatches [k x cells] = W^T [k x out_ch] * go_n [out_ch x cells],
                // written straight into grad_input for pointwise convs.
                let gdst: &mut [T] = if pointwise {
                    gi_n
                } else {
                    gcol.resize(k * cells, T::zero());
                    gcol
                };
                crate::tensor::gemm(
                    k,
                    spec.out_channels,
                    cells,
                    T::one(),
                    weight.data(),
                    1,
                    k as isize,
                    go_n,
                    cells as isize,
                    1,
                    T::zero(),
                    gdst,
                    cells as isize,
                    1,
                );
                if !pointwise {
                    geom.col2im(gcol, gi_n);
                }
                (gw, gb)
            },
        )
        .collect();

    let mut grad_weight = Tensor::zeros(weight.shape());
    let mut grad_bias = spec.bias.then(|| Tensor::zeros(&[spec.out_channels]));
    for (gw, gb) in &partials {
        for (acc, &v) in grad_weight.data_mut().iter_mut().zip(gw.iter()) {
            *acc += v;
        }
        if let Some(gbias) = grad_bias.as_mut() {
            for (acc, &v) in gbias.data_mut().iter_mut().zip(gb.iter()) {
                *acc += v;
            }
        }
    }

    Ok(ConvGrads {
        grad_input,
        grad_weight,
        grad_bias,
    })
}

/// Precomputed extents for the im2col/col2im loops of one sample.
struct Geometry {
    in_ch: usize,
    in_sp: [usize; 3],
    out_sp: [usize; 3],
    kernel: [usize; 3],
    stride: [usize; 3],
    padding: [usize; 3],
}

impl Geometry {
    fn new(spec: &ConvSpec, in_spatial: &[usize], out_spatial: &[usize]) -> Self {
        let mut g = Geometry {
            in_ch: spec.in_channels,
            in_sp: [1; 3],
            out_sp: [1; 3],
            kernel: [1; 3],
            stride: [1; 3],
            padding: [0; 3],
        };
        for i in 0..spec.rank() {
            g.in_sp[i] = in_spatial[i];
            g.out_sp[i] = out_spatial[i];
            g.kernel[i] = spec.kernel[i];
            g.stride[i] = spec.stride[i];
            g.padding[i] = spec.padding[i];
        }
        g
    }

    /// True for kernel 1, stride 1, zero padding on every axis: the patch
    /// matrix is the sample itself.
    fn is_pointwise(&self) -> bool {
        self.kernel == [1; 3] && self.stride == [1; 3] && self.padding == [0; 3]
    }

    /// col is `[(in_ch * kernel_volume) x cells]`, k-major: row (ci, ky,
    /// kx, kz), column (oy, ox, oz). With unit temporal stride and no
    /// temporal padding, each (oy, ox) pair fills as one contiguous run.
    /// Rank 2 runs with trailing extents fixed at 1, so both ranks share
    /// this loop.
    fn im2col<T: Scalar>(&self, x: &[T], col: &mut [T]) {
        let [ih, iw, it] = self.in_sp;
        let [oh, ow, ot] = self.out_sp;
        let [kh, kw, kt] = self.kernel;
        let [sh, sw, st] = self.stride;
        let [ph, pw, pt] = self.padding;
        let cells = oh * ow * ot;
        let fast_t = st == 1 && pt == 0;

        let mut row = 0;
        for ci in 0..self.in_ch {
            let x_ci = &x[ci * ih * iw * it..(ci + 1) * ih * iw * it];
            for ky in 0..kh {
                for kx in 0..kw {
                    for kz in 0..kt {
                        let dst = &mut col[row * cells..(row + 1) * cells];
                        row += 1;
                        let mut cell = 0;
                        for oy in 0..oh {
                            let iy = (oy * sh + ky) as isize - ph as isize;
                            let y_ok = iy >= 0 && iy < ih as isize;
                            for ox in 0..ow {
                                let ix = (ox * sw + kx) as isize - pw as isize;
                                let run = &mut dst[cell..cell + ot];
                                cell += ot;
                                if !y_ok || ix < 0 || ix >= iw as isize {
                                    run.fill(T::zero());
                                    continue;
                                }
                                let base = (iy as usize * iw + ix as usize) * it;
                                if fast_t {
                                    run.copy_from_slice(&x_ci[base + kz..base + kz + ot]);
                                } else {
                                    for (oz, dv) in run.iter_mut().enumerate() {
                                        let iz = (oz * st + kz) as isize - pt as isize;
                                        *dv = if iz < 0 || iz >= it as isize {
                                            T::zero()
                                        } else {
                                            x_ci[base + iz as usize]
                                        };
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Scatter-add transpose of [`Geometry::im2col`].
    fn col2im<T: Scalar>(&self, col: &[T], gx: &mut [T]) {
        let [ih, iw, it] = self.in_sp;
        let [oh, ow, ot] = self.out_sp;
        let [kh, kw, kt] = self.kernel;
        let [sh, sw, st] = self.stride;
        let [ph, pw, pt] = self.padding;
        let cells = oh * ow * ot;
        let fast_t = st == 1 && pt == 0;

        gx.fill(T::zero());
        let mut row = 0;
        for ci in 0..self.in_ch {
            let base_ci = ci * ih * iw * it;
            for ky in 0..kh {
                for kx in 0..kw {
                    for kz in 0..kt {
                        let src = &col[row * cells..(row + 1) * cells];
                        row += 1;
                        let mut cell = 0;
                        for oy in 0..oh {
                            let iy = (oy * sh + ky) as isize - ph as isize;
                            let y_ok = iy >= 0 && iy < ih as isize;
                            for ox in 0..ow {
                                let ix = (ox * sw + kx) as isize - pw as isize;
                                let run = &src[cell..cell + ot];
                                cell += ot;
                                if !y_ok || ix < 0 || ix >= iw as isize {
                                    continue;
                                }
                                let base = base_ci + (iy as usize * iw + ix as usize) * it;
                                if fast_t {
                                    let dst = &mut gx[base + kz..base + kz + ot];
                                    for (d, &s) in dst.iter_mut().zip(run.iter()) {
                                        *d += s;
                                    }
                                } else {
                                    for (oz, &sv) in run.iter().enumerate() {
                                        let iz = (oz * st + kz) as isize - pt as isize;
                                        if iz >= 0 && iz < it as isize {
                                            gx[base + iz as usize] += sv;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
