//! 2D -> 3D bootstrapping: repeat each trained 2D kernel along a new
//! temporal axis and rescale by 1/N, so a temporally constant input drives
//! the 3D network exactly like the source 2D network.

use asad_nn::{Scalar, Tensor};

use crate::checkpoint::{Checkpoint, Record};
use crate::config::ModelConfig;
use crate::error::{ModelError, Result};

/// Stack a 2D kernel `[out, in, kh, kw]` N times along a trailing temporal
/// axis as w/N per slice. The final slice takes the floating-point residual
/// so the temporal sum reconstructs the 2D kernel exactly, not just to
/// rounding error.
pub fn inflate_kernel<T: Scalar>(w2d: &Tensor<T>, n: usize) -> Tensor<T> {
    assert!(n >= 1, "temporal extent must be at least 1");
    let mut shape = w2d.shape().to_vec();
    shape.push(n);
    let mut out = Tensor::zeros(&shape);
    let dst = out.data_mut();
    for (i, &w) in w2d.data().iter().enumerate() {
        if n == 1 {
            dst[i] = w;
            continue;
        }
        let q = w / T::from_usize(n).unwrap();
        let mut running = T::zero();
        for slice in 0..n - 1 {
            dst[i * n + slice] = q;
            running = running + q;
        }
        dst[i * n + n - 1] = w - running;
    }
    out
}

/// Sum an inflated kernel back over its temporal axis (left-to-right, the
/// same order a temporal reduction would use).
pub fn temporal_kernel_sum<T: Scalar>(w3d: &Tensor<T>) -> Tensor<T> {
    let n = *w3d.shape().last().expect("temporal axis");
    let lead = &w3d.shape()[..w3d.shape().len() - 1];
    let mut out = Tensor::zeros(lead);
    for (o, chunk) in out.data_mut().iter_mut().zip(w3d.data().chunks(n)) {
        let mut acc = chunk[0];
        for &v in &chunk[1..] {
            acc = acc + v;
        }
        *o = acc;
    }
    out
}

/// Bootstrap a 3D checkpoint from a trained 2D one. Conv weights gain a
/// temporal axis via [`inflate_kernel`]; batch-norm parameters, running
/// statistics and the classifier head copy unchanged.
pub fn inflate_2d_to_3d(ckpt2d: &Checkpoint, config3d: &ModelConfig) -> Result<Checkpoint> {
    let dn2d = match &ckpt2d.config {
        ModelConfig::DenseNet2d { dn } => dn,
        other => {
            return Err(ModelError::Config(format!(
                "inflation source must be a densenet2d checkpoint, got {}",
                other.kind()
            )))
        }
    };
    let (dn3d, t_len) = match config3d {
        ModelConfig::DenseNet3d { dn, t_len } => (dn, *t_len),
        other => {
            return Err(ModelError::Config(format!(
                "inflation target must be densenet3d, got {}",
                other.kind()
            )))
        }
    };
    if dn3d != dn2d {
        return Err(ModelError::Config(format!(
            "2D and 3D configs are not structurally paired: {dn2d:?} vs {dn3d:?}"
        )));
    }

    // The target structure fixes every expected record name and shape.
    let target = crate::build::build::<f32>(config3d, ckpt2d.seed)?;
    let reference = Checkpoint::from_graph(&target, Vec::new());

    let mut records = Vec::with_capacity(reference.records.len());
    for expected in &reference.records {
        let source = ckpt2d.record(&expected.name).ok_or_else(|| {
            ModelError::InventoryMismatch {
                name: expected.name.clone(),
                detail: "needed by the 3D graph, missing from the 2D checkpoint".into(),
            }
        })?;
        let record = if source.shape == expected.shape {
            Record {
                name: expected.name.clone(),
                ..source.clone()
            }
        } else if source.shape.len() + 1 == expected.shape.len()
            && expected.shape[..source.shape.len()] == source.shape[..]
        {
            let n = *expected.shape.last().expect("temporal extent");
            match &source.data {
                crate::checkpoint::RecordData::F32(_) => Record::from_tensor(
                    expected.name.clone(),
                    &inflate_kernel(&source.to_tensor::<f32>()?, n),
                ),
                crate::checkpoint::RecordData::F64(_) => Record::from_tensor(
                    expected.name.clone(),
                    &inflate_kernel(&source.to_tensor::<f64>()?, n),
                ),
            }
        } else {
            return Err(ModelError::InventoryMismatch {
                name: expected.name.clone(),
                detail: format!(
                    "shape {:?} in 2D checkpoint cannot inflate to {:?}",
                    source.shape, expected.shape
                ),
            });
        };
        records.push(record);
    }
    // Every 2D record must have been consumed.
    for r in &ckpt2d.records {
        if !records.iter().any(|out| out.name == r.name) {
            return Err(ModelError::InventoryMismatch {
                name: r.name.clone(),
                detail: "present in the 2D checkpoint, unused by the 3D graph".into(),
            });
        }
    }

    let mut metadata = ckpt2d.metadata.clone();
    metadata.push(("bootstrapped_from".into(), "densenet2d".into()));
    metadata.push(("bootstrap_t_len".into(), t_len.to_string()));
    Ok(Checkpoint {
        config: config3d.clone(),
        seed: ckpt2d.seed,
        metadata,
        records,
        optimizer: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use asad_nn::SeededRng;

    #[test]
    fn n_equals_1_copies_verbatim() {
        let mut rng = SeededRng::new(40);
        let w = Tensor::<f32>::randn(&[2, 3, 3, 3], 0.5, &mut rng);
        let w3 = inflate_kernel(&w, 1);
        assert_eq!(w3.shape(), &[2, 3, 3, 3, 1]);
        assert_eq!(w3.data(), w.data());
    }

    #[test]
    fn temporal_sum_reconstructs_source_exactly_for_all_n() {
        let mut rng = SeededRng::new(41);
        for n in [1usize, 3, 5] {
            let w = Tensor::<f32>::randn(&[4, 2, 3, 3], 0.37, &mut rng);
            let w3 = inflate_kernel(&w, n);
            let back = temporal_kernel_sum(&w3);
            assert_eq!(back.data(), w.data(), "n = {n}");

            let w64 = Tensor::<f64>::randn(&[4, 2, 3, 3], 0.37, &mut rng);
            let back64 = temporal_kernel_sum(&inflate_kernel(&w64, n));
            assert_eq!(back64.data(), w64.data(), "n = {n} (f64)");
        }
    }

    #[test]
    fn slices_stay_within_an_ulp_of_w_over_n() {
        let mut rng = SeededRng::new(42);
        let w = Tensor::<f64>::randn(&[8, 8, 1, 1], 1.0, &mut rng);
        let w3 = inflate_kernel(&w, 5);
        for (i, &orig) in w.data().iter().enumerate() {
            for s in 0..5 {
                let v = w3.data()[i * 5 + s];
                let rel = ((v - orig / 5.0) / (orig / 5.0)).abs();
                assert!(rel < 1e-14, "slice {s} of weight {i}: rel dev {rel}");
            }
        }
    }
}
