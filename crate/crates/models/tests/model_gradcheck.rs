//! Whole-model finite-difference check at reduced width.

use asad_models::{build_densenet2d, gradcheck_model, DenseNetConfig};
use asad_nn::{BnMode, GradCheckOptions, SeededRng, Tensor};

#[test]
fn densenet2d_k4_full_model_gradcheck() {
    let mut g = build_densenet2d::<f64>(&DenseNetConfig::with_growth_rate(4), 31).unwrap();
    // Move running stats off init, then freeze them for the check.
    let mut rng = SeededRng::new(32);
    for _ in 0..2 {
        let x = Tensor::<f64>::randn(&[4, 1, 10, 11], 1.0, &mut rng);
        let _ = g.forward(&x).unwrap();
    }
    g.set_mode(BnMode::Eval);

    let x = Tensor::<f64>::randn(&[2, 1, 10, 11], 1.0, &mut rng);
    let labels = vec![0usize, 1];
    let report = gradcheck_model(
        &mut g,
        &x,
        &labels,
        &GradCheckOptions {
            step: 1e-6,
            samples_per_tensor: 6,
            seed: 33,
        },
    );
    assert!(
        report.max_rel_err() <= 1e-4,
        "worst {:?}",
        report.worst()
    );
}
