//! Checkpoint round trips and 2D -> 3D inflation equivalence.

use asad_models::{
    build, build_densenet2d, build_densenet3d, inflate_2d_to_3d, Checkpoint, DenseNetConfig,
    ModelConfig, ModelError,
};
use asad_nn::{BnMode, Scalar, SeededRng, Tensor};

/// Push some signal through a fresh 2D graph in training mode so that the
/// batch-norm running statistics move away from their init.
fn warmed_densenet2d<T: Scalar>(k: usize, seed: u64) -> asad_models::ModelGraph<T> {
    let mut g = build_densenet2d::<T>(&DenseNetConfig::with_growth_rate(k), seed).unwrap();
    let mut rng = SeededRng::new(seed ^ 0xfeed);
    for _ in 0..3 {
        let x = Tensor::<T>::randn(&[4, 1, 10, 11], 1.0, &mut rng);
        let _ = g.forward(&x).unwrap();
    }
    g.set_mode(BnMode::Eval);
    g
}

#[test]
fn checkpoint_bytes_round_trip() {
    let g = warmed_densenet2d::<f32>(4, 11);
    let ckpt = Checkpoint::from_graph(&g, vec![("epochs".into(), "0".into())]);
    let mut bytes = Vec::new();
    ckpt.write(&mut bytes).unwrap();
    let back = Checkpoint::read(&mut bytes.as_slice()).unwrap();
    assert_eq!(ckpt, back);

    // Same graph, same seed -> identical bytes.
    let g2 = warmed_densenet2d::<f32>(4, 11);
    let ckpt2 = Checkpoint::from_graph(&g2, vec![("epochs".into(), "0".into())]);
    let mut bytes2 = Vec::new();
    ckpt2.write(&mut bytes2).unwrap();
    assert_eq!(bytes, bytes2, "checkpointing must be deterministic");
}

#[test]
fn truncated_checkpoint_reports_missing_bytes() {
    let g = warmed_densenet2d::<f32>(4, 12);
    let ckpt = Checkpoint::from_graph(&g, Vec::new());
    let mut bytes = Vec::new();
    ckpt.write(&mut bytes).unwrap();
    bytes.truncate(bytes.len() / 2);
    let err = Checkpoint::read(&mut bytes.as_slice()).unwrap_err();
    assert!(matches!(err, ModelError::Truncated { .. }), "{err}");
}

#[test]
fn bad_magic_is_rejected() {
    let err = Checkpoint::read(&mut b"NOTACKPT________".as_slice()).unwrap_err();
    assert!(matches!(err, ModelError::BadMagic(_)));
}

#[test]
fn load_into_fresh_graph_reproduces_forward_bitwise() {
    let mut g = warmed_densenet2d::<f32>(4, 13);
    let ckpt = Checkpoint::from_graph(&g, Vec::new());

    // Different init seed: weights differ until the checkpoint lands.
    let mut fresh = build_densenet2d::<f32>(&DenseNetConfig::with_growth_rate(4), 999).unwrap();
    fresh.set_mode(BnMode::Eval);
    ckpt.load_into(&mut fresh).unwrap();

    let mut rng = SeededRng::new(77);
    let x = Tensor::<f32>::randn(&[2, 1, 10, 11], 1.0, &mut rng);
    let a = g.logits(&x).unwrap();
    let b = fresh.logits(&x).unwrap();
    assert_eq!(a.data(), b.data(), "bitwise identical forward");
}

#[test]
fn load_into_mismatched_graph_names_first_divergence() {
    let g = warmed_densenet2d::<f32>(8, 14);
    let ckpt = Checkpoint::from_graph(&g, Vec::new());
    let mut other = build_densenet2d::<f32>(&DenseNetConfig::with_growth_rate(4), 14).unwrap();
    let err = ckpt.load_into(&mut other).unwrap_err();
    assert!(
        matches!(err, ModelError::Record { .. } | ModelError::InventoryMismatch { .. }),
        "{err}"
    );
}

#[test]
fn inflation_requires_structurally_paired_configs() {
    let g = warmed_densenet2d::<f32>(4, 15);
    let ckpt = Checkpoint::from_graph(&g, Vec::new());
    let err = inflate_2d_to_3d(
        &ckpt,
        &ModelConfig::DenseNet3d {
            dn: DenseNetConfig::with_growth_rate(8),
            t_len: 128,
        },
    )
    .unwrap_err();
    assert!(matches!(err, ModelError::Config(_)), "{err}");
}

/// Constant-in-time volumes must drive the inflated 3D network exactly like
/// the 2D network handles a single slice.
fn boring_input_check<T: Scalar>(k: usize, t_len: usize, tol: f64, seed: u64) {
    let mut g2 = warmed_densenet2d::<T>(k, seed);
    let ckpt2 = Checkpoint::from_graph(&g2, Vec::new());
    let cfg3 = ModelConfig::DenseNet3d {
        dn: DenseNetConfig::with_growth_rate(k),
        t_len,
    };
    let ckpt3 = inflate_2d_to_3d(&ckpt2, &cfg3).unwrap();

    let mut g3 = build::<T>(&cfg3, 1234).unwrap();
    ckpt3.load_into(&mut g3).unwrap();
    g3.set_mode(BnMode::Eval);

    let mut rng = SeededRng::new(seed ^ 0xb0);
    let slice = Tensor::<T>::randn(&[1, 1, 10, 11], 1.0, &mut rng);
    let mut volume = Tensor::<T>::zeros(&[1, 1, 10, 11, t_len]);
    for (cell, &v) in slice.data().iter().enumerate() {
        for t in 0..t_len {
            volume.data_mut()[cell * t_len + t] = v;
        }
    }

    let tape2 = g2.forward(&slice).unwrap();
    let tape3 = g3.forward(&volume).unwrap();
    let l2 = tape2.output();
    let l3 = tape3.output();
    let diff = l2
        .data()
        .iter()
        .zip(l3.data().iter())
        .fold(0.0_f64, |m, (a, b)| m.max((a.as_f64() - b.as_f64()).abs()));
    assert!(diff <= tol, "k={k} t={t_len}: logit deviation {diff}");

    // Layer-by-layer: every 3D activation stays constant along time and
    // matches its 2D counterpart.
    for (i, (a2, a3)) in tape2
        .activations()
        .iter()
        .zip(tape3.activations().iter())
        .enumerate()
    {
        if a2.shape().len() + 1 != a3.shape().len() {
            continue; // flattened/pooled tails share shapes and are covered above
        }
        let t = *a3.shape().last().unwrap();
        let mut worst = 0.0_f64;
        for (cell, &v2) in a2.data().iter().enumerate() {
            for dt in 0..t {
                let v3 = a3.data()[cell * t + dt].as_f64();
                worst = worst.max((v2.as_f64() - v3).abs());
            }
        }
        let layer_tol = tol.max(1e-4);
        assert!(worst <= layer_tol, "stage {i}: per-layer deviation {worst}");
    }
}

#[test]
fn boring_input_equivalence_f32() {
    boring_input_check::<f32>(4, 43, 1e-5, 21);
    boring_input_check::<f32>(4, 128, 1e-5, 22);
}

#[test]
fn boring_input_equivalence_f64() {
    boring_input_check::<f64>(4, 128, 1e-10, 23);
}
