//! Central finite-difference checks for every backward path, in f64.
//!
//! Each op is probed through a scalar functional loss = <r, op(x)> with a
//! fixed random weighting r, treating the input (and any learnable tensors)
//! as checked parameters.

use asad_nn::{
    avgpool_backward, avgpool_forward, batchnorm_backward, batchnorm_forward, conv_backward,
    conv_forward, global_avg_pool, global_avg_pool_backward, gradcheck, maxpool_backward,
    maxpool_forward, relu, relu_backward, softmax_cross_entropy, BatchNormState, BnMode, ConvSpec,
    GradCheckOptions, Parameter, SeededRng, Tensor,
};

fn dot(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
    a.data().iter().zip(b.data().iter()).map(|(x, y)| x * y).sum()
}

fn opts(seed: u64) -> GradCheckOptions {
    GradCheckOptions {
        step: 1e-6,
        samples_per_tensor: 12,
        seed,
    }
}

#[test]
fn conv2d_backward_matches_finite_differences() {
    let mut rng = SeededRng::new(21);
    let spec = ConvSpec::new_2d([3, 3], [1, 1], [1, 1], 2, 3, true);
    let x0 = Tensor::<f64>::randn(&[2, 2, 5, 6], 1.0, &mut rng);
    let r = Tensor::<f64>::randn(&[2, 3, 5, 6], 1.0, &mut rng);
    let mut params = vec![
        Parameter::new("x", x0),
        Parameter::new("w", Tensor::<f64>::randn(&spec.weight_shape(), 0.4, &mut rng)),
        Parameter::new("b", Tensor::<f64>::randn(&[3], 0.4, &mut rng)),
    ];
    let report = gradcheck(
        &mut params,
        |ps| {
            let y = conv_forward(&ps[0].value, &spec, &ps[1].value, Some(&ps[2].value)).unwrap();
            let g = conv_backward(&r, &ps[0].value, &spec, &ps[1].value).unwrap();
            ps[0].grad = g.grad_input;
            ps[1].grad = g.grad_weight;
            ps[2].grad = g.grad_bias.unwrap();
            dot(&y, &r)
        },
        &opts(1),
    );
    assert!(report.max_rel_err() <= 1e-6, "worst {:?}", report.worst());
}

#[test]
fn conv3d_backward_matches_finite_differences() {
    let mut rng = SeededRng::new(22);
    let spec = ConvSpec::new_3d([3, 3, 1], [1, 1, 1], [1, 1, 0], 2, 2, true);
    let x0 = Tensor::<f64>::randn(&[1, 2, 4, 5, 6], 1.0, &mut rng);
    let r = Tensor::<f64>::randn(&[1, 2, 4, 5, 6], 1.0, &mut rng);
    let mut params = vec![
        Parameter::new("x", x0),
        Parameter::new("w", Tensor::<f64>::randn(&spec.weight_shape(), 0.4, &mut rng)),
        Parameter::new("b", Tensor::<f64>::randn(&[2], 0.4, &mut rng)),
    ];
    let report = gradcheck(
        &mut params,
        |ps| {
            let y = conv_forward(&ps[0].value, &spec, &ps[1].value, Some(&ps[2].value)).unwrap();
            let g = conv_backward(&r, &ps[0].value, &spec, &ps[1].value).unwrap();
            ps[0].grad = g.grad_input;
            ps[1].grad = g.grad_weight;
            ps[2].grad = g.grad_bias.unwrap();
            dot(&y, &r)
        },
        &opts(2),
    );
    assert!(report.max_rel_err() <= 1e-6, "worst {:?}", report.worst());
}

#[test]
fn batchnorm_train_mode_matches_finite_differences() {
    let mut rng = SeededRng::new(23);
    let x0 = Tensor::<f64>::randn(&[3, 2, 4, 4], 1.5, &mut rng);
    let r = Tensor::<f64>::randn(&[3, 2, 4, 4], 1.0, &mut rng);
    let mut params = vec![
        Parameter::new("x", x0),
        Parameter::new("gamma", Tensor::<f64>::randn(&[2], 0.3, &mut rng).map(|v| v + 1.0)),
        Parameter::new("beta", Tensor::<f64>::randn(&[2], 0.3, &mut rng)),
    ];
    let report = gradcheck(
        &mut params,
        |ps| {
            let mut state = BatchNormState::<f64>::new(2);
            let (y, saved) = batchnorm_forward(&ps[0].value, &ps[1].value, &ps[2].value, &mut state).unwrap();
            let (gx, gg, gb) = batchnorm_backward(&r, &ps[0].value, &saved, &ps[1].value).unwrap();
            ps[0].grad = gx;
            ps[1].grad = gg;
            ps[2].grad = gb;
            dot(&y, &r)
        },
        &opts(3),
    );
    assert!(report.max_rel_err() <= 1e-5, "worst {:?}", report.worst());
}

#[test]
fn batchnorm_eval_mode_matches_finite_differences() {
    let mut rng = SeededRng::new(24);
    let x0 = Tensor::<f64>::randn(&[2, 3, 5], 1.0, &mut rng);
    let r = Tensor::<f64>::randn(&[2, 3, 5], 1.0, &mut rng);
    let mut shared = BatchNormState::<f64>::new(3);
    shared.running_mean = Tensor::randn(&[3], 0.5, &mut rng);
    shared.running_var = Tensor::<f64>::randn(&[3], 0.2, &mut rng).map(|v: f64| v.abs() + 0.5);
    shared.mode = BnMode::Eval;
    let mut params = vec![
        Parameter::new("x", x0),
        Parameter::new("gamma", Tensor::<f64>::randn(&[3], 0.3, &mut rng).map(|v| v + 1.0)),
        Parameter::new("beta", Tensor::<f64>::randn(&[3], 0.3, &mut rng)),
    ];
    let report = gradcheck(
        &mut params,
        |ps| {
            let mut state = shared.clone();
            let (y, saved) = batchnorm_forward(&ps[0].value, &ps[1].value, &ps[2].value, &mut state).unwrap();
            let (gx, gg, gb) = batchnorm_backward(&r, &ps[0].value, &saved, &ps[1].value).unwrap();
            ps[0].grad = gx;
            ps[1].grad = gg;
            ps[2].grad = gb;
            dot(&y, &r)
        },
        &opts(4),
    );
    assert!(report.max_rel_err() <= 1e-6, "worst {:?}", report.worst());
}

#[test]
fn relu_gradient_away_from_kink() {
    let mut rng = SeededRng::new(25);
    // Push every input at least 1e-3 away from zero.
    let x0 = Tensor::<f64>::randn(&[40], 1.0, &mut rng)
        .map(|v| if v.abs() < 1e-3 { v.signum() * 1e-3 + v } else { v });
    let r = Tensor::<f64>::randn(&[40], 1.0, &mut rng);
    let mut params = vec![Parameter::new("x", x0)];
    let report = gradcheck(
        &mut params,
        |ps| {
            let y = relu(&ps[0].value);
            ps[0].grad = relu_backward(&r, &y);
            dot(&y, &r)
        },
        &GradCheckOptions {
            samples_per_tensor: 40,
            ..opts(5)
        },
    );
    assert!(report.max_rel_err() <= 1e-6, "worst {:?}", report.worst());
}

#[test]
fn maxpool_gradient_matches_finite_differences() {
    let mut rng = SeededRng::new(26);
    let x0 = Tensor::<f64>::randn(&[1, 2, 6, 6], 1.0, &mut rng);
    let r = Tensor::<f64>::randn(&[1, 2, 3, 3], 1.0, &mut rng);
    let mut params = vec![Parameter::new("x", x0)];
    let report = gradcheck(
        &mut params,
        |ps| {
            let (y, idx) = maxpool_forward(&ps[0].value, &[2, 2], &[2, 2], &[0, 0]).unwrap();
            ps[0].grad = maxpool_backward(&r, &idx, ps[0].value.shape());
            dot(&y, &r)
        },
        &GradCheckOptions {
            samples_per_tensor: 30,
            ..opts(6)
        },
    );
    assert!(report.max_rel_err() <= 1e-6, "worst {:?}", report.worst());
}

#[test]
fn avgpool_gradient_matches_finite_differences() {
    let mut rng = SeededRng::new(27);
    let x0 = Tensor::<f64>::randn(&[1, 2, 5, 6, 9], 1.0, &mut rng);
    let r_shape = avgpool_forward(&x0, &[2, 2, 7], &[1, 1, 3]).unwrap();
    let r = Tensor::<f64>::randn(r_shape.shape(), 1.0, &mut rng);
    let mut params = vec![Parameter::new("x", x0)];
    let report = gradcheck(
        &mut params,
        |ps| {
            let y = avgpool_forward(&ps[0].value, &[2, 2, 7], &[1, 1, 3]).unwrap();
            ps[0].grad = avgpool_backward(&r, ps[0].value.shape(), &[2, 2, 7], &[1, 1, 3]).unwrap();
            dot(&y, &r)
        },
        &opts(7),
    );
    assert!(report.max_rel_err() <= 1e-6, "worst {:?}", report.worst());
}

#[test]
fn global_avg_pool_gradient_matches_finite_differences() {
    let mut rng = SeededRng::new(28);
    let x0 = Tensor::<f64>::randn(&[2, 3, 4, 5], 1.0, &mut rng);
    let r = Tensor::<f64>::randn(&[2, 3], 1.0, &mut rng);
    let mut params = vec![Parameter::new("x", x0)];
    let report = gradcheck(
        &mut params,
        |ps| {
            let y = global_avg_pool(&ps[0].value).unwrap();
            ps[0].grad = global_avg_pool_backward(&r, ps[0].value.shape());
            dot(&y, &r)
        },
        &opts(8),
    );
    assert!(report.max_rel_err() <= 1e-6, "worst {:?}", report.worst());
}

#[test]
fn softmax_cross_entropy_gradient_matches_finite_differences() {
    let mut rng = SeededRng::new(29);
    let logits = Tensor::<f64>::randn(&[6, 2], 2.0, &mut rng);
    let labels = vec![0usize, 1, 1, 0, 1, 0];
    let mut params = vec![Parameter::new("logits", logits)];
    let report = gradcheck(
        &mut params,
        |ps| {
            let (loss, grad) = softmax_cross_entropy(&ps[0].value, &labels).unwrap();
            ps[0].grad = grad;
            loss
        },
        &GradCheckOptions {
            samples_per_tensor: 12,
            ..opts(9)
        },
    );
    assert!(report.max_rel_err() <= 1e-6, "worst {:?}", report.worst());
}
