//! Sequential layer graph with explicit forward/backward execution.
//!
//! A model is a list of nodes; dense connectivity lives inside the
//! `DenseBlock` node, which concatenates each composite layer's output onto
//! its input. The forward pass records a tape of node inputs plus the few
//! per-node extras backward needs; normalized activations inside composite
//! layers are rebuilt on the way back instead of being stored.

use asad_nn::{
    avgpool_backward, avgpool_forward, batchnorm_apply_saved, batchnorm_backward,
    batchnorm_forward, conv_backward, conv_forward, global_avg_pool, global_avg_pool_backward,
    linear_backward, linear_forward, maxpool_backward, maxpool_forward, relu, relu_backward,
    BatchNormState, BnMode, BnSaved, ConvSpec, Parameter, Scalar, Tensor,
};

use crate::config::ModelConfig;
use crate::error::Result;

pub type ParamId = usize;
pub type BnId = usize;

/// BN-ReLU-Conv composite.
#[derive(Debug, Clone)]
pub struct Triple {
    pub gamma: ParamId,
    pub beta: ParamId,
    pub bn: BnId,
    pub spec: ConvSpec,
    pub weight: ParamId,
    pub bias: Option<ParamId>,
}

#[derive(Debug, Clone)]
pub enum Node {
    /// BN-ReLU-Conv (transition layers).
    Triple(Triple),
    /// BN-ReLU-Conv-BN-ReLU-Conv (stem).
    DoubleTriple(Triple, Triple),
    /// Concatenating dense block; each layer is a double composite.
    DenseBlock(Vec<(Triple, Triple)>),
    MaxPool {
        kernel: Vec<usize>,
        stride: Vec<usize>,
        padding: Vec<usize>,
    },
    AvgPool {
        kernel: Vec<usize>,
        stride: Vec<usize>,
    },
    GlobalAvgPool,
    /// Mean over the trailing (temporal) axis, removing it.
    TemporalMean,
    /// [n, c, spatial...] -> [n, c * prod(spatial)].
    Flatten,
    Relu,
    Conv {
        spec: ConvSpec,
        weight: ParamId,
        bias: Option<ParamId>,
    },
    Linear {
        weight: ParamId,
        bias: ParamId,
    },
}

pub struct TripleSaved<T> {
    bn: BnSaved<T>,
}

pub struct DoubleSaved<T> {
    t1: TripleSaved<T>,
    /// Output of the first conv (input of the second BN).
    mid: Tensor<T>,
    t2: TripleSaved<T>,
}

pub struct DenseLayerSaved<T> {
    /// Concatenated input this layer consumed.
    cur: Tensor<T>,
    body: DoubleSaved<T>,
}

pub enum Aux<T> {
    None,
    MaxPool(Vec<usize>),
    Triple(TripleSaved<T>),
    Double(DoubleSaved<T>),
    Dense(Vec<DenseLayerSaved<T>>),
    Relu(Tensor<T>),
}

/// Activations and per-node extras from one forward pass.
pub struct Tape<T> {
    /// xs[i] is the input of node i; xs[len] is the network output.
    xs: Vec<Tensor<T>>,
    aux: Vec<Aux<T>>,
}

impl<T: Scalar> Tape<T> {
    pub fn output(&self) -> &Tensor<T> {
        self.xs.last().expect("tape always holds the output")
    }

    /// xs[0] is the network input, xs[i] the output of node i-1.
    pub fn activations(&self) -> &[Tensor<T>] {
        &self.xs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageShape {
    pub stage: String,
    /// Per-sample shape after the stage: [channels, spatial...].
    pub shape: Vec<usize>,
}

/// A built model: nodes, parameters, batch-norm states and bookkeeping.
impl<T: Scalar> std::fmt::Debug for ModelGraph<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ModelGraph({}, {} nodes, {} parameters)",
            self.config.kind(),
            self.nodes.len(),
            self.param_count()
        )
    }
}

pub struct ModelGraph<T: Scalar> {
    pub config: ModelConfig,
    pub(crate) nodes: Vec<Node>,
    pub(crate) params: Vec<Parameter<T>>,
    pub(crate) bns: Vec<BatchNormState<T>>,
    pub(crate) bn_names: Vec<String>,
    /// Per-sample input shape [channels, spatial...].
    pub input_shape: Vec<usize>,
    pub(crate) trace: Vec<StageShape>,
    pub seed: u64,
}

impl<T: Scalar> ModelGraph<T> {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn params(&self) -> &[Parameter<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Vec<Parameter<T>> {
        &mut self.params
    }

    pub fn bn_states(&self) -> &[BatchNormState<T>] {
        &self.bns
    }

    pub fn bn_states_mut(&mut self) -> &mut [BatchNormState<T>] {
        &mut self.bns
    }

    pub fn bn_names(&self) -> &[String] {
        &self.bn_names
    }

    pub fn shape_trace(&self) -> &[StageShape] {
        &self.trace
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.value.numel()).sum()
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.zero_grad();
        }
    }

    pub fn set_mode(&mut self, mode: BnMode) {
        for bn in &mut self.bns {
            bn.mode = mode;
        }
    }

    pub fn mode(&self) -> BnMode {
        self.bns.first().map_or(BnMode::Eval, |b| b.mode)
    }

    /// Forward pass over a batch shaped `[n, channels, spatial...]`.
    pub fn forward(&mut self, x: &Tensor<T>) -> Result<Tape<T>> {
        let mut xs = Vec::with_capacity(self.nodes.len() + 1);
        let mut aux = Vec::with_capacity(self.nodes.len());
        xs.push(x.clone());
        for i in 0..self.nodes.len() {
            let node = self.nodes[i].clone();
            let input = xs.last().expect("input present");
            let (y, a) = self.node_forward(&node, input)?;
            aux.push(a);
            xs.push(y);
        }
        Ok(Tape { xs, aux })
    }

    /// Forward without keeping the tape.
    pub fn logits(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let tape = self.forward(x)?;
        Ok(tape.xs.into_iter().next_back().expect("output"))
    }

    /// Backward pass; accumulates parameter gradients, returns grad of the
    /// network input.
    pub fn backward(&mut self, tape: &Tape<T>, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let mut grad = grad_out.clone();
        for i in (0..self.nodes.len()).rev() {
            let node = self.nodes[i].clone();
            grad = self.node_backward(&node, &tape.xs[i], &tape.xs[i + 1], &tape.aux[i], &grad)?;
        }
        Ok(grad)
    }

    fn node_forward(&mut self, node: &Node, x: &Tensor<T>) -> Result<(Tensor<T>, Aux<T>)> {
        Ok(match node {
            Node::Triple(t) => {
                let (y, saved) = self.triple_forward(t, x)?;
                (y, Aux::Triple(saved))
            }
            Node::DoubleTriple(t1, t2) => {
                let (y, saved) = self.double_forward(t1, t2, x)?;
                (y, Aux::Double(saved))
            }
            Node::DenseBlock(layers) => {
                let mut cur = x.clone();
                let mut saves = Vec::with_capacity(layers.len());
                for (t1, t2) in layers {
                    let (y, body) = self.double_forward(t1, t2, &cur)?;
                    let next = concat_channels(&cur, &y);
                    saves.push(DenseLayerSaved { cur, body });
                    cur = next;
                }
                (cur, Aux::Dense(saves))
            }
            Node::MaxPool {
                kernel,
                stride,
                padding,
            } => {
                let (y, idx) = maxpool_forward(x, kernel, stride, padding)?;
                (y, Aux::MaxPool(idx))
            }
            Node::AvgPool { kernel, stride } => (avgpool_forward(x, kernel, stride)?, Aux::None),
            Node::GlobalAvgPool => (global_avg_pool(x)?, Aux::None),
            Node::TemporalMean => (temporal_mean(x), Aux::None),
            Node::Flatten => {
                let n = x.shape()[0];
                let rest: usize = x.shape()[1..].iter().product();
                (x.clone().reshape(&[n, rest])?, Aux::None)
            }
            Node::Relu => {
                let y = relu(x);
                (y.clone(), Aux::Relu(y))
            }
            Node::Conv { spec, weight, bias } => {
                let b = bias.map(|id| &self.params[id].value);
                (
                    conv_forward(x, spec, &self.params[*weight].value, b)?,
                    Aux::None,
                )
            }
            Node::Linear { weight, bias } => (
                linear_forward(x, &self.params[*weight].value, &self.params[*bias].value)?,
                Aux::None,
            ),
        })
    }

    fn node_backward(
        &mut self,
        node: &Node,
        x: &Tensor<T>,
        y: &Tensor<T>,
        aux: &Aux<T>,
        grad_out: &Tensor<T>,
    ) -> Result<Tensor<T>> {
        Ok(match (node, aux) {
            (Node::Triple(t), Aux::Triple(saved)) => self.triple_backward(t, x, saved, grad_out)?,
            (Node::DoubleTriple(t1, t2), Aux::Double(saved)) => {
                self.double_backward(t1, t2, x, saved, grad_out)?
            }
            (Node::DenseBlock(layers), Aux::Dense(saves)) => {
                let mut grad = grad_out.clone();
                for ((t1, t2), save) in layers.iter().zip(saves.iter()).rev() {
                    let keep = save.cur.shape()[1];
                    let (mut g_cur, g_new) = split_channels(&grad, keep);
                    let g_body = self.double_backward(t1, t2, &save.cur, &save.body, &g_new)?;
                    g_cur.add_scaled(&g_body, T::one());
                    grad = g_cur;
                }
                grad
            }
            (Node::MaxPool { .. }, Aux::MaxPool(idx)) => {
                maxpool_backward(grad_out, idx, x.shape())
            }
            (Node::AvgPool { kernel, stride }, _) => {
                avgpool_backward(grad_out, x.shape(), kernel, stride)?
            }
            (Node::GlobalAvgPool, _) => global_avg_pool_backward(grad_out, x.shape()),
            (Node::TemporalMean, _) => temporal_mean_backward(grad_out, x.shape()),
            (Node::Flatten, _) => grad_out.clone().reshape(x.shape())?,
            (Node::Relu, Aux::Relu(out)) => relu_backward(grad_out, out),
            (Node::Conv { spec, weight, bias }, _) => {
                let g = conv_backward(grad_out, x, spec, &self.params[*weight].value)?;
                self.params[*weight].accumulate(&g.grad_weight);
                if let (Some(id), Some(gb)) = (bias, g.grad_bias) {
                    self.params[*id].accumulate(&gb);
                }
                g.grad_input
            }
            (Node::Linear { weight, bias }, _) => {
                let g = linear_backward(
                    grad_out,
                    x,
                    &self.params[*weight].value,
                    &self.params[*bias].value,
                )?;
                self.params[*weight].accumulate(&g.grad_weight);
                self.params[*bias].accumulate(&g.grad_bias);
                g.grad_input
            }
            _ => {
                let _ = y;
                unreachable!("tape aux out of sync with node list")
            }
        })
    }

    fn triple_forward(&mut self, t: &Triple, x: &Tensor<T>) -> Result<(Tensor<T>, TripleSaved<T>)> {
        let gamma = self.params[t.gamma].value.clone();
        let beta = self.params[t.beta].value.clone();
        let (a, bn) = batchnorm_forward(x, &gamma, &beta, &mut self.bns[t.bn])?;
        let b = relu(&a);
        let bias = t.bias.map(|id| &self.params[id].value);
        let y = conv_forward(&b, &t.spec, &self.params[t.weight].value, bias)?;
        Ok((y, TripleSaved { bn }))
    }

    fn triple_backward(
        &mut self,
        t: &Triple,
        x: &Tensor<T>,
        saved: &TripleSaved<T>,
        grad_out: &Tensor<T>,
    ) -> Result<Tensor<T>> {
        // Rebuild the composite's hidden activations from the saved stats.
        let a = batchnorm_apply_saved(
            x,
            &self.params[t.gamma].value,
            &self.params[t.beta].value,
            &saved.bn,
        );
        let b = relu(&a);
        let g = conv_backward(grad_out, &b, &t.spec, &self.params[t.weight].value)?;
        self.params[t.weight].accumulate(&g.grad_weight);
        if let (Some(id), Some(gb)) = (t.bias, g.grad_bias) {
            self.params[id].accumulate(&gb);
        }
        let grad_a = relu_backward(&g.grad_input, &b);
        let (grad_x, grad_gamma, grad_beta) =
            batchnorm_backward(&grad_a, x, &saved.bn, &self.params[t.gamma].value)?;
        self.params[t.gamma].accumulate(&grad_gamma);
        self.params[t.beta].accumulate(&grad_beta);
        Ok(grad_x)
    }

    fn double_forward(
        &mut self,
        t1: &Triple,
        t2: &Triple,
        x: &Tensor<T>,
    ) -> Result<(Tensor<T>, DoubleSaved<T>)> {
        let (mid, s1) = self.triple_forward(t1, x)?;
        let (y, s2) = self.triple_forward(t2, &mid)?;
        Ok((
            y,
            DoubleSaved {
                t1: s1,
                mid,
                t2: s2,
            },
        ))
    }

    fn double_backward(
        &mut self,
        t1: &Triple,
        t2: &Triple,
        x: &Tensor<T>,
        saved: &DoubleSaved<T>,
        grad_out: &Tensor<T>,
    ) -> Result<Tensor<T>> {
        let g_mid = self.triple_backward(t2, &saved.mid, &saved.t2, grad_out)?;
        self.triple_backward(t1, x, &saved.t1, &g_mid)
    }
}

/// Mean over the trailing axis, removing it.
fn temporal_mean<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    let t = *x.shape().last().expect("temporal_mean needs an axis");
    let lead = x.numel() / t;
    let inv = T::from_usize(t).unwrap().recip();
    let mut out = Tensor::zeros(&x.shape()[..x.shape().len() - 1]);
    for (o, chunk) in out.data_mut().iter_mut().zip(x.data().chunks(t)) {
        *o = chunk.iter().copied().sum::<T>() * inv;
    }
    debug_assert_eq!(out.numel(), lead);
    out
}

fn temporal_mean_backward<T: Scalar>(grad_out: &Tensor<T>, input_shape: &[usize]) -> Tensor<T> {
    let t = *input_shape.last().expect("temporal axis");
    let inv = T::from_usize(t).unwrap().recip();
    let mut gx = Tensor::zeros(input_shape);
    for (chunk, &g) in gx.data_mut().chunks_mut(t).zip(grad_out.data().iter()) {
        let share = g * inv;
        for v in chunk {
            *v = share;
        }
    }
    gx
}

/// Concatenate along the channel axis (axis 1).
pub fn concat_channels<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    assert_eq!(a.shape()[0], b.shape()[0], "concat: batch mismatch");
    assert_eq!(&a.shape()[2..], &b.shape()[2..], "concat: spatial mismatch");
    let batch = a.shape()[0];
    let (ca, cb) = (a.shape()[1], b.shape()[1]);
    let plane: usize = a.shape()[2..].iter().product();
    let mut shape = a.shape().to_vec();
    shape[1] = ca + cb;
    let mut out = Tensor::zeros(&shape);
    let (sa, sb, so) = (ca * plane, cb * plane, (ca + cb) * plane);
    for n in 0..batch {
        out.data_mut()[n * so..n * so + sa].copy_from_slice(&a.data()[n * sa..(n + 1) * sa]);
        out.data_mut()[n * so + sa..(n + 1) * so].copy_from_slice(&b.data()[n * sb..(n + 1) * sb]);
    }
    out
}

/// Split a channel-concatenated gradient back into its two parts.
pub fn split_channels<T: Scalar>(g: &Tensor<T>, keep: usize) -> (Tensor<T>, Tensor<T>) {
    let batch = g.shape()[0];
    let c = g.shape()[1];
    assert!(keep < c, "split: nothing to split off");
    let plane: usize = g.shape()[2..].iter().product();
    let mut shape_a = g.shape().to_vec();
    shape_a[1] = keep;
    let mut shape_b = g.shape().to_vec();
    shape_b[1] = c - keep;
    let mut a = Tensor::zeros(&shape_a);
    let mut b = Tensor::zeros(&shape_b);
    let (sa, sb, sg) = (keep * plane, (c - keep) * plane, c * plane);
    for n in 0..batch {
        a.data_mut()[n * sa..(n + 1) * sa].copy_from_slice(&g.data()[n * sg..n * sg + sa]);
        b.data_mut()[n * sb..(n + 1) * sb].copy_from_slice(&g.data()[n * sg + sa..(n + 1) * sg]);
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_then_split_is_identity() {
        let a = Tensor::from_vec(&[2, 2, 3], (0..12).map(|v| v as f64).collect()).unwrap();
        let b = Tensor::from_vec(&[2, 1, 3], (100..106).map(|v| v as f64).collect()).unwrap();
        let cat = concat_channels(&a, &b);
        assert_eq!(cat.shape(), &[2, 3, 3]);
        let (a2, b2) = split_channels(&cat, 2);
        assert_eq!(a2.data(), a.data());
        assert_eq!(b2.data(), b.data());
    }

    #[test]
    fn temporal_mean_removes_last_axis() {
        let x = Tensor::from_vec(&[1, 2, 1, 4], vec![1.0, 2.0, 3.0, 4.0, 10.0, 10.0, 10.0, 10.0])
            .unwrap();
        let y = temporal_mean(&x);
        assert_eq!(y.shape(), &[1, 2, 1]);
        assert_eq!(y.data(), &[2.5, 10.0]);
        let gx = temporal_mean_backward(&Tensor::full(&[1, 2, 1], 4.0_f64), &[1, 2, 1, 4]);
        assert!(gx.data().iter().all(|&v| v == 1.0));
    }
}
