//! Architecture builders.
//!
//! All four classifiers share the grid geometry: 10 x 11 electrode maps,
//! two output classes (left / right). Shape and channel traces are computed
//! and validated at build time and kept on the graph for inspection.

use asad_nn::{BatchNormState, ConvSpec, Parameter, Scalar, SeededRng, Tensor};

use crate::config::{DenseNetConfig, ModelConfig};
use crate::error::{ModelError, Result};
use crate::graph::{ModelGraph, Node, StageShape, Triple};

/// Transition pooling runs 2x2x7 with temporal stride 3; on short inputs the
/// temporal kernel shrinks to the available extent. The extent entering a
/// transition must still cover the stride.
pub const TRANSITION_TEMPORAL_KERNEL: usize = 7;
pub const TRANSITION_TEMPORAL_STRIDE: usize = 3;

/// Smallest temporal length that survives all three transitions.
pub const MIN_TEMPORAL_LEN: usize = 43;

struct Builder<T: Scalar> {
    params: Vec<Parameter<T>>,
    bns: Vec<BatchNormState<T>>,
    bn_names: Vec<String>,
    nodes: Vec<Node>,
    trace: Vec<StageShape>,
    rng: SeededRng,
}

impl<T: Scalar> Builder<T> {
    fn new(seed: u64) -> Self {
        Builder {
            params: Vec::new(),
            bns: Vec::new(),
            bn_names: Vec::new(),
            nodes: Vec::new(),
            trace: Vec::new(),
            rng: SeededRng::derive(seed, "model-init", &[]),
        }
    }

    fn param(&mut self, name: String, value: Tensor<T>) -> usize {
        self.params.push(Parameter::new(name, value));
        self.params.len() - 1
    }

    /// Kaiming fan-in normal for conv/linear weights.
    fn weight(&mut self, name: String, shape: &[usize], fan_in: usize) -> usize {
        let std = (2.0 / fan_in as f64).sqrt();
        let value = Tensor::randn(shape, std, &mut self.rng);
        self.param(name, value)
    }

    fn bn(&mut self, prefix: &str, channels: usize) -> (usize, usize, usize) {
        let gamma = self.param(format!("{prefix}.gamma"), Tensor::full(&[channels], T::one()));
        let beta = self.param(format!("{prefix}.beta"), Tensor::zeros(&[channels]));
        self.bns.push(BatchNormState::new(channels));
        self.bn_names.push(prefix.to_string());
        (gamma, beta, self.bns.len() - 1)
    }

    /// BN-ReLU-Conv composite without conv bias.
    fn triple(&mut self, prefix: &str, spec: ConvSpec) -> Triple {
        let (gamma, beta, bn) = self.bn(&format!("{prefix}.bn"), spec.in_channels);
        let fan_in = spec.in_channels * spec.kernel.iter().product::<usize>();
        let weight = self.weight(format!("{prefix}.conv.weight"), &spec.weight_shape(), fan_in);
        Triple {
            gamma,
            beta,
            bn,
            spec,
            weight,
            bias: None,
        }
    }

    fn stage(&mut self, name: impl Into<String>, shape: Vec<usize>) {
        self.trace.push(StageShape {
            stage: name.into(),
            shape,
        });
    }
}

/// 1x1 and kxk conv specs for one composite layer, rank matching `temporal`.
fn composite_specs(
    c_in: usize,
    mid: usize,
    c_out: usize,
    temporal: bool,
) -> (ConvSpec, ConvSpec) {
    if temporal {
        (
            ConvSpec::new_3d([1, 1, 1], [1, 1, 1], [0, 0, 0], c_in, mid, false),
            ConvSpec::new_3d([3, 3, 1], [1, 1, 1], [1, 1, 0], mid, c_out, false),
        )
    } else {
        (
            ConvSpec::new_2d([1, 1], [1, 1], [0, 0], c_in, mid, false),
            ConvSpec::new_2d([3, 3], [1, 1], [1, 1], mid, c_out, false),
        )
    }
}

fn shape_with_t(h: usize, w: usize, t: Option<usize>, c: usize) -> Vec<usize> {
    match t {
        Some(t) => vec![c, h, w, t],
        None => vec![c, h, w],
    }
}

/// Shared skeleton of the 2D and 3D densely connected classifiers.
/// `t_len = None` builds the 2D variant.
fn build_densenet<T: Scalar>(
    dn: &DenseNetConfig,
    t_len: Option<usize>,
    seed: u64,
) -> Result<ModelGraph<T>> {
    dn.validate()?;
    let temporal = t_len.is_some();
    let mut b = Builder::<T>::new(seed);
    let k = dn.growth_rate;
    let bottleneck = dn.bottleneck_width();

    let (mut h, mut w) = (dn.grid_h, dn.grid_w);
    let mut t = t_len;
    b.stage("input", shape_with_t(h, w, t, 1));

    // Stem: BN-ReLU-Conv(1x1)-BN-ReLU-Conv(3x3), then max pool stride 2.
    let (s1, s2) = composite_specs(1, bottleneck, dn.stem_channels(), temporal);
    let t1 = b.triple("stem.1", s1);
    let t2 = b.triple("stem.2", s2);
    b.nodes.push(Node::DoubleTriple(t1, t2));
    let mut c = dn.stem_channels();
    b.stage("stem", shape_with_t(h, w, t, c));

    let (pool_k, pool_s, pool_p) = if temporal {
        (vec![3, 3, 1], vec![2, 2, 1], vec![1, 1, 0])
    } else {
        (vec![3, 3], vec![2, 2], vec![1, 1])
    };
    b.nodes.push(Node::MaxPool {
        kernel: pool_k,
        stride: pool_s,
        padding: pool_p,
    });
    h = (h + 2 - 3) / 2 + 1;
    w = (w + 2 - 3) / 2 + 1;
    b.stage("stem maxpool", shape_with_t(h, w, t, c));

    for block in 0..dn.num_blocks {
        let mut layers = Vec::with_capacity(dn.layers_per_block);
        for layer in 0..dn.layers_per_block {
            let c_in = c + layer * k;
            let (s1, s2) = composite_specs(c_in, bottleneck, k, temporal);
            let p = format!("block{block}.layer{layer}");
            let t1 = b.triple(&format!("{p}.1"), s1);
            let t2 = b.triple(&format!("{p}.2"), s2);
            layers.push((t1, t2));
        }
        b.nodes.push(Node::DenseBlock(layers));
        c += dn.layers_per_block * k;
        b.stage(format!("block {block}"), shape_with_t(h, w, t, c));

        if block + 1 < dn.num_blocks {
            let c_out = (dn.compression * c as f64).floor() as usize;
            if c_out == 0 {
                return Err(ModelError::Config(format!(
                    "compression {} collapses transition {} to zero channels",
                    dn.compression,
                    block + 1
                )));
            }
            let spec = if temporal {
                ConvSpec::new_3d([1, 1, 1], [1, 1, 1], [0, 0, 0], c, c_out, false)
            } else {
                ConvSpec::new_2d([1, 1], [1, 1], [0, 0], c, c_out, false)
            };
            let tr = b.triple(&format!("trans{}", block + 1), spec);
            b.nodes.push(Node::Triple(tr));
            c = c_out;

            if h < 2 || w < 2 {
                return Err(ModelError::SpatialUnderflow {
                    stage: format!("transition {} average pool", block + 1),
                    extent: vec![h, w],
                });
            }
            let (kernel, stride) = if temporal {
                let cur_t = t.expect("temporal extent");
                if cur_t < TRANSITION_TEMPORAL_STRIDE {
                    return Err(ModelError::TemporalUnderflow {
                        stage: format!("transition {} average pool", block + 1),
                        extent: cur_t,
                        minimum: TRANSITION_TEMPORAL_STRIDE,
                    });
                }
                let kt = TRANSITION_TEMPORAL_KERNEL.min(cur_t);
                t = Some((cur_t - kt) / TRANSITION_TEMPORAL_STRIDE + 1);
                (vec![2, 2, kt], vec![1, 1, TRANSITION_TEMPORAL_STRIDE])
            } else {
                (vec![2, 2], vec![1, 1])
            };
            b.nodes.push(Node::AvgPool { kernel, stride });
            h -= 1;
            w -= 1;
            b.stage(format!("transition {}", block + 1), shape_with_t(h, w, t, c));
        }
    }

    b.nodes.push(Node::GlobalAvgPool);
    b.stage("global avg pool", vec![c]);
    let w_head = b.weight("head.weight".into(), &[dn.num_classes, c], c);
    let b_head = b.param("head.bias".into(), Tensor::zeros(&[dn.num_classes]));
    b.nodes.push(Node::Linear {
        weight: w_head,
        bias: b_head,
    });
    b.stage("logits", vec![dn.num_classes]);

    let config = match t_len {
        Some(t_len) => ModelConfig::DenseNet3d {
            dn: dn.clone(),
            t_len,
        },
        None => ModelConfig::DenseNet2d { dn: dn.clone() },
    };
    let input_shape = shape_with_t(dn.grid_h, dn.grid_w, t_len, 1);
    Ok(ModelGraph {
        config,
        nodes: b.nodes,
        params: b.params,
        bns: b.bns,
        bn_names: b.bn_names,
        input_shape,
        trace: b.trace,
        seed,
    })
}

/// Densely connected 2D classifier over single 10 x 11 topographies.
pub fn build_densenet2d<T: Scalar>(dn: &DenseNetConfig, seed: u64) -> Result<ModelGraph<T>> {
    build_densenet(dn, None, seed)
}

/// Densely connected 3D classifier over 10 x 11 x T volumes. Convolutions
/// keep temporal extent 1; transitions pool 2x2x7 with stride (1,1,3).
pub fn build_densenet3d<T: Scalar>(
    dn: &DenseNetConfig,
    t_len: usize,
    seed: u64,
) -> Result<ModelGraph<T>> {
    build_densenet(dn, Some(t_len), seed)
}

pub const CNN_BASELINE_CHANNELS: usize = 64;
pub const CNN_BASELINE_FILTERS: usize = 5;
pub const CNN_BASELINE_KERNEL_T: usize = 17;
pub const CNN3D_FILTERS: usize = 20;
pub const CNN3D_KERNEL: usize = 5;

/// Shallow reference model on the raw channels x time matrix: five 64 x 17
/// filters, ReLU, temporal average pooling, two fully connected layers.
pub fn build_cnn_baseline<T: Scalar>(t_len: usize, seed: u64) -> Result<ModelGraph<T>> {
    let spec = ConvSpec::new_2d(
        [CNN_BASELINE_CHANNELS, CNN_BASELINE_KERNEL_T],
        [1, 1],
        [0, 0],
        1,
        CNN_BASELINE_FILTERS,
        true,
    );
    // Validates T >= 17.
    let out_sp = spec.out_spatial("build_cnn_baseline", &[CNN_BASELINE_CHANNELS, t_len])?;

    let mut b = Builder::<T>::new(seed);
    b.stage("input", vec![1, CNN_BASELINE_CHANNELS, t_len]);
    let fan_in = CNN_BASELINE_CHANNELS * CNN_BASELINE_KERNEL_T;
    let w = b.weight("conv.weight".into(), &spec.weight_shape(), fan_in);
    let bias = b.param("conv.bias".into(), Tensor::zeros(&[CNN_BASELINE_FILTERS]));
    b.nodes.push(Node::Conv {
        spec,
        weight: w,
        bias: Some(bias),
    });
    b.nodes.push(Node::Relu);
    b.stage("conv+relu", vec![CNN_BASELINE_FILTERS, out_sp[0], out_sp[1]]);
    b.nodes.push(Node::TemporalMean);
    b.nodes.push(Node::Flatten);
    b.stage("temporal mean", vec![CNN_BASELINE_FILTERS]);

    let w1 = b.weight(
        "fc1.weight".into(),
        &[CNN_BASELINE_FILTERS, CNN_BASELINE_FILTERS],
        CNN_BASELINE_FILTERS,
    );
    let b1 = b.param("fc1.bias".into(), Tensor::zeros(&[CNN_BASELINE_FILTERS]));
    b.nodes.push(Node::Linear { weight: w1, bias: b1 });
    b.nodes.push(Node::Relu);
    let w2 = b.weight("fc2.weight".into(), &[2, CNN_BASELINE_FILTERS], CNN_BASELINE_FILTERS);
    let b2 = b.param("fc2.bias".into(), Tensor::zeros(&[2]));
    b.nodes.push(Node::Linear { weight: w2, bias: b2 });
    b.stage("logits", vec![2]);

    Ok(ModelGraph {
        config: ModelConfig::CnnBaseline { t_len },
        nodes: b.nodes,
        params: b.params,
        bns: b.bns,
        bn_names: b.bn_names,
        input_shape: vec![1, CNN_BASELINE_CHANNELS, t_len],
        trace: b.trace,
        seed,
    })
}

/// Shallow spatial model on the grid volume: twenty 5 x 5 spatial filters,
/// ReLU, temporal average pooling, two fully connected layers.
pub fn build_cnn3d<T: Scalar>(t_len: usize, seed: u64) -> Result<ModelGraph<T>> {
    let spec = ConvSpec::new_3d(
        [CNN3D_KERNEL, CNN3D_KERNEL, 1],
        [1, 1, 1],
        [0, 0, 0],
        1,
        CNN3D_FILTERS,
        true,
    );
    let out_sp = spec.out_spatial("build_cnn3d", &[10, 11, t_len])?;
    let flat = CNN3D_FILTERS * out_sp[0] * out_sp[1];

    let mut b = Builder::<T>::new(seed);
    b.stage("input", vec![1, 10, 11, t_len]);
    let fan_in = CNN3D_KERNEL * CNN3D_KERNEL;
    let w = b.weight("conv.weight".into(), &spec.weight_shape(), fan_in);
    let bias = b.param("conv.bias".into(), Tensor::zeros(&[CNN3D_FILTERS]));
    b.nodes.push(Node::Conv {
        spec,
        weight: w,
        bias: Some(bias),
    });
    b.nodes.push(Node::Relu);
    b.stage(
        "conv+relu",
        vec![CNN3D_FILTERS, out_sp[0], out_sp[1], out_sp[2]],
    );
    b.nodes.push(Node::TemporalMean);
    b.nodes.push(Node::Flatten);
    b.stage("temporal mean + flatten", vec![flat]);

    let w1 = b.weight("fc1.weight".into(), &[CNN3D_FILTERS, flat], flat);
    let b1 = b.param("fc1.bias".into(), Tensor::zeros(&[CNN3D_FILTERS]));
    b.nodes.push(Node::Linear { weight: w1, bias: b1 });
    b.nodes.push(Node::Relu);
    let w2 = b.weight("fc2.weight".into(), &[2, CNN3D_FILTERS], CNN3D_FILTERS);
    let b2 = b.param("fc2.bias".into(), Tensor::zeros(&[2]));
    b.nodes.push(Node::Linear { weight: w2, bias: b2 });
    b.stage("logits", vec![2]);

    Ok(ModelGraph {
        config: ModelConfig::Cnn3d { t_len },
        nodes: b.nodes,
        params: b.params,
        bns: b.bns,
        bn_names: b.bn_names,
        input_shape: vec![1, 10, 11, t_len],
        trace: b.trace,
        seed,
    })
}

/// Build any model from its configuration.
pub fn build<T: Scalar>(config: &ModelConfig, seed: u64) -> Result<ModelGraph<T>> {
    match config {
        ModelConfig::DenseNet2d { dn } => build_densenet2d(dn, seed),
        ModelConfig::DenseNet3d { dn, t_len } => build_densenet3d(dn, *t_len, seed),
        ModelConfig::CnnBaseline { t_len } => build_cnn_baseline(*t_len, seed),
        ModelConfig::Cnn3d { t_len } => build_cnn3d(*t_len, seed),
    }
}
