//! Naive nested-loop references for convolution and pooling.
//!
//! Deliberately slow and index-by-index, with no shared code with the
//! optimized implementations they check. Used only from test targets.

use asad_nn::{ConvSpec, Tensor};

fn at<T: Copy>(t: &Tensor<T>, idx: &[usize]) -> T
where
    T: asad_nn::Scalar,
{
    let shape = t.shape();
    debug_assert_eq!(shape.len(), idx.len());
    let mut flat = 0;
    for (i, &x) in idx.iter().enumerate() {
        debug_assert!(x < shape[i]);
        flat = flat * shape[i] + x;
    }
    t.data()[flat]
}

/// Direct six-nested-loop 2D cross-correlation with zero padding.
pub fn conv2d(x: &Tensor<f64>, spec: &ConvSpec, weight: &Tensor<f64>, bias: Option<&Tensor<f64>>) -> Tensor<f64> {
    let (n, cin, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
    assert_eq!(cin, spec.in_channels);
    let (kh, kw) = (spec.kernel[0], spec.kernel[1]);
    let (sh, sw) = (spec.stride[0], spec.stride[1]);
    let (ph, pw) = (spec.padding[0], spec.padding[1]);
    let oh = (h + 2 * ph - kh) / sh + 1;
    let ow = (w + 2 * pw - kw) / sw + 1;

    let mut out = Tensor::zeros(&[n, spec.out_channels, oh, ow]);
    let mut pos = 0;
    for b in 0..n {
        for co in 0..spec.out_channels {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = bias.map_or(0.0, |bt| bt.data()[co]);
                    for ci in 0..cin {
                        for ky in 0..kh {
                            for kx in 0..kw {
                                let iy = (oy * sh + ky) as isize - ph as isize;
                                let ix = (ox * sw + kx) as isize - pw as isize;
                                if iy >= 0 && iy < h as isize && ix >= 0 && ix < w as isize {
                                    acc += at(x, &[b, ci, iy as usize, ix as usize])
                                        * at(weight, &[co, ci, ky, kx]);
                                }
                            }
                        }
                    }
                    out.data_mut()[pos] = acc;
                    pos += 1;
                }
            }
        }
    }
    out
}

/// Direct eight-nested-loop 3D cross-correlation with zero padding.
pub fn conv3d(x: &Tensor<f64>, spec: &ConvSpec, weight: &Tensor<f64>, bias: Option<&Tensor<f64>>) -> Tensor<f64> {
    let (n, cin) = (x.shape()[0], x.shape()[1]);
    let (h, w, t) = (x.shape()[2], x.shape()[3], x.shape()[4]);
    assert_eq!(cin, spec.in_channels);
    let k = &spec.kernel;
    let s = &spec.stride;
    let p = &spec.padding;
    let oh = (h + 2 * p[0] - k[0]) / s[0] + 1;
    let ow = (w + 2 * p[1] - k[1]) / s[1] + 1;
    let ot = (t + 2 * p[2] - k[2]) / s[2] + 1;

    let mut out = Tensor::zeros(&[n, spec.out_channels, oh, ow, ot]);
    let mut pos = 0;
    for b in 0..n {
        for co in 0..spec.out_channels {
            for oy in 0..oh {
                for ox in 0..ow {
                    for oz in 0..ot {
                        let mut acc = bias.map_or(0.0, |bt| bt.data()[co]);
                        for ci in 0..cin {
                            for ky in 0..k[0] {
                                for kx in 0..k[1] {
                                    for kz in 0..k[2] {
                                        let iy = (oy * s[0] + ky) as isize - p[0] as isize;
                                        let ix = (ox * s[1] + kx) as isize - p[1] as isize;
                                        let iz = (oz * s[2] + kz) as isize - p[2] as isize;
                                        if iy >= 0
                                            && iy < h as isize
                                            && ix >= 0
                                            && ix < w as isize
                                            && iz >= 0
                                            && iz < t as isize
                                        {
                                            acc += at(x, &[b, ci, iy as usize, ix as usize, iz as usize])
                                                * at(weight, &[co, ci, ky, kx, kz]);
                                        }
                                    }
                                }
                            }
                        }
                        out.data_mut()[pos] = acc;
                        pos += 1;
                    }
                }
            }
        }
    }
    out
}

/// Window maximum with minus-infinity padding semantics. Works for rank 2
/// (pass kernel/stride/padding of length 2) and rank 3.
pub fn maxpool(x: &Tensor<f64>, kernel: &[usize], stride: &[usize], padding: &[usize]) -> Tensor<f64> {
    pool(x, kernel, stride, padding, f64::NEG_INFINITY, |acc, v| acc.max(v), |acc, _| acc)
}

/// Window mean, no padding.
pub fn avgpool(x: &Tensor<f64>, kernel: &[usize], stride: &[usize]) -> Tensor<f64> {
    let zero = vec![0; kernel.len()];
    let count: usize = kernel.iter().product();
    pool(x, kernel, stride, &zero, 0.0, |acc, v| acc + v, move |acc, _| acc / count as f64)
}

fn pool(
    x: &Tensor<f64>,
    kernel: &[usize],
    stride: &[usize],
    padding: &[usize],
    init: f64,
    fold: impl Fn(f64, f64) -> f64,
    finish: impl Fn(f64, usize) -> f64,
) -> Tensor<f64> {
    let rank = kernel.len();
    let (n, c) = (x.shape()[0], x.shape()[1]);
    let sp = &x.shape()[2..];
    let mut k3 = [1usize; 3];
    let mut s3 = [1usize; 3];
    let mut p3 = [0usize; 3];
    let mut in3 = [1usize; 3];
    for i in 0..rank {
        k3[i] = kernel[i];
        s3[i] = stride[i];
        p3[i] = padding[i];
        in3[i] = sp[i];
    }
    let out3 = [
        (in3[0] + 2 * p3[0] - k3[0]) / s3[0] + 1,
        (in3[1] + 2 * p3[1] - k3[1]) / s3[1] + 1,
        (in3[2] + 2 * p3[2] - k3[2]) / s3[2] + 1,
    ];
    let mut shape = vec![n, c];
    shape.extend_from_slice(&out3[..rank]);
    let mut out = Tensor::zeros(&shape);

    let mut pos = 0;
    for b in 0..n {
        for ch in 0..c {
            for oy in 0..out3[0] {
                for ox in 0..out3[1] {
                    for oz in 0..out3[2] {
                        let mut acc = init;
                        let mut seen = 0usize;
                        for ky in 0..k3[0] {
                            for kx in 0..k3[1] {
                                for kz in 0..k3[2] {
                                    let iy = (oy * s3[0] + ky) as isize - p3[0] as isize;
                                    let ix = (ox * s3[1] + kx) as isize - p3[1] as isize;
                                    let iz = (oz * s3[2] + kz) as isize - p3[2] as isize;
                                    if iy >= 0
                                        && (iy as usize) < in3[0]
                                        && ix >= 0
                                        && (ix as usize) < in3[1]
                                        && iz >= 0
                                        && (iz as usize) < in3[2]
                                    {
                                        let flat = ((b * c + ch) * in3[0] * in3[1] * in3[2])
                                            + (iy as usize * in3[1] + ix as usize) * in3[2]
                                            + iz as usize;
                                        acc = fold(acc, x.data()[flat]);
                                        seen += 1;
                                    }
                                }
                            }
                        }
                        out.data_mut()[pos] = if seen == 0 { 0.0 } else { finish(acc, seen) };
                        pos += 1;
                    }
                }
            }
        }
    }
    out
}

/// Mean over all non-batch, non-channel axes.
pub fn global_avg_pool(x: &Tensor<f64>) -> Tensor<f64> {
    let (n, c) = (x.shape()[0], x.shape()[1]);
    let cells: usize = x.shape()[2..].iter().product();
    let mut out = Tensor::zeros(&[n, c]);
    for i in 0..n * c {
        let chunk = &x.data()[i * cells..(i + 1) * cells];
        out.data_mut()[i] = chunk.iter().sum::<f64>() / cells as f64;
    }
    out
}
