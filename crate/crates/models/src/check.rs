//! Finite-difference checking of whole model graphs (f64).

use asad_nn::{gradcheck, softmax_cross_entropy, GradCheckOptions, GradCheckReport, Tensor};

use crate::graph::ModelGraph;

/// Check every parameter of `graph` against central differences of the
/// cross-entropy loss on a fixed batch. Parameters and gradients are
/// restored afterwards.
pub fn gradcheck_model(
    graph: &mut ModelGraph<f64>,
    x: &Tensor<f64>,
    labels: &[usize],
    opts: &GradCheckOptions,
) -> GradCheckReport {
    let mut params = std::mem::take(graph.params_mut());
    let report = gradcheck(
        &mut params,
        |ps| {
            std::mem::swap(graph.params_mut(), ps);
            graph.zero_grads();
            let tape = graph.forward(x).expect("forward in gradcheck");
            let (loss, grad_logits) =
                softmax_cross_entropy(tape.output(), labels).expect("loss in gradcheck");
            graph
                .backward(&tape, &grad_logits)
                .expect("backward in gradcheck");
            std::mem::swap(graph.params_mut(), ps);
            loss
        },
        opts,
    );
    *graph.params_mut() = params;
    report
}
