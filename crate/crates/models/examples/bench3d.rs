use asad_models::{build_densenet3d, DenseNetConfig};
use asad_nn::{softmax_cross_entropy, SeededRng, Tensor};
use std::time::Instant;

fn main() {
    let dn = DenseNetConfig::with_growth_rate(8);
    let mut g = build_densenet3d::<f32>(&dn, 128, 1).unwrap();
    println!("params: {}", g.param_count());
    let mut rng = SeededRng::new(2);
    let batch = 32;
    let x = Tensor::<f32>::randn(&[batch, 1, 10, 11, 128], 1.0, &mut rng);
    let labels: Vec<usize> = (0..batch).map(|i| i % 2).collect();
    // warmup
    let tape = g.forward(&x).unwrap();
    let (_, gl) = softmax_cross_entropy(tape.output(), &labels).unwrap();
    g.backward(&tape, &gl).unwrap();
    let t0 = Instant::now();
    let iters = 4;
    for _ in 0..iters {
        g.zero_grads();
        let tape = g.forward(&x).unwrap();
        let (_, gl) = softmax_cross_entropy(tape.output(), &labels).unwrap();
        g.backward(&tape, &gl).unwrap();
    }
    let dt = t0.elapsed().as_secs_f64() / iters as f64;
    println!("fwd+bwd batch {batch}: {:.3} s -> {:.1} ms/window", dt, 1000.0*dt/batch as f64);
    let t1 = Instant::now();
    for _ in 0..iters { let _ = g.forward(&x).unwrap(); }
    println!("fwd only batch {batch}: {:.3} s", t1.elapsed().as_secs_f64()/iters as f64);
}
