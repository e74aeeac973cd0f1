//! Mini-batch training with seeded shuffling, validation-based early
//! stopping, and a divergence guard. Deterministic for a fixed seed.

use asad_models::{ModelGraph, ModelKind};
use asad_nn::{adam_step, softmax_cross_entropy, AdamConfig, AdamState, BnMode, SeededRng, Tensor};

use crate::error::{DataError, Result};
use crate::eval::window_logits;
use crate::windows::WindowSet;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation-loss improvement before stopping.
    pub patience: usize,
    /// Random time slices drawn per window per epoch (2D training only).
    pub slices_per_window: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 50,
            patience: 5,
            slices_per_window: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

enum EpochItems {
    Windows(Vec<usize>),
    Slices(Vec<(usize, usize)>),
}

fn assemble(graph_kind: ModelKind, set: &WindowSet, items: &EpochItems, lo: usize, hi: usize) -> (Tensor<f32>, Vec<usize>) {
    match items {
        EpochItems::Windows(ws) => {
            let idx = &ws[lo..hi];
            let x = match graph_kind {
                ModelKind::CnnBaseline => set.channels_batch(idx),
                _ => set.grid_batch(idx),
            };
            (x, set.labels(idx))
        }
        EpochItems::Slices(picks) => {
            let batch = &picks[lo..hi];
            let x = set.slice_batch(batch);
            let labels = batch
                .iter()
                .map(|&(w, _)| set.windows[w].label.index())
                .collect();
            (x, labels)
        }
    }
}

struct Snapshot {
    params: Vec<Tensor<f32>>,
    bn_stats: Vec<(Tensor<f32>, Tensor<f32>)>,
}

fn take_snapshot(graph: &ModelGraph<f32>) -> Snapshot {
    Snapshot {
        params: graph.params().iter().map(|p| p.value.clone()).collect(),
        bn_stats: graph
            .bn_states()
            .iter()
            .map(|b| (b.running_mean.clone(), b.running_var.clone()))
            .collect(),
    }
}

fn restore_snapshot(graph: &mut ModelGraph<f32>, snap: &Snapshot) {
    for (p, v) in graph.params_mut().iter_mut().zip(snap.params.iter()) {
        p.value = v.clone();
    }
    for (b, (m, v)) in graph.bn_states_mut().iter_mut().zip(snap.bn_stats.iter()) {
        b.running_mean = m.clone();
        b.running_var = v.clone();
    }
}

/// Train `graph` on `train_idx`, early-stopping on `val_idx` loss. The graph
/// is left holding the best-validation parameters, in evaluation mode.
pub fn train_model(
    graph: &mut ModelGraph<f32>,
    set: &WindowSet,
    train_idx: &[usize],
    val_idx: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainLog> {
    let kind = graph.config.kind();
    let mut adam = AdamState::new(AdamConfig {
        learning_rate: cfg.learning_rate,
        ..AdamConfig::default()
    });

    let mut log = TrainLog {
        epochs: Vec::new(),
        best_epoch: None,
        stopped_early: false,
    };
    let mut best_val = f64::INFINITY;
    let mut best = take_snapshot(graph);
    let mut strikes = 0usize;
    let mut recent = std::collections::VecDeque::with_capacity(5);

    for epoch in 0..cfg.max_epochs {
        let mut rng = SeededRng::derive(cfg.seed, "epoch", &[epoch as u64]);
        let items = match kind {
            ModelKind::DenseNet2d => {
                let mut picks = Vec::with_capacity(train_idx.len() * cfg.slices_per_window);
                for &w in train_idx {
                    for _ in 0..cfg.slices_per_window {
                        picks.push((w, rng.below(set.t_len)));
                    }
                }
                rng.shuffle(&mut picks);
                EpochItems::Slices(picks)
            }
            _ => {
                let mut ws = train_idx.to_vec();
                rng.shuffle(&mut ws);
                EpochItems::Windows(ws)
            }
        };
        let n_items = match &items {
            EpochItems::Windows(w) => w.len(),
            EpochItems::Slices(s) => s.len(),
        };

        graph.set_mode(BnMode::Train);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        let mut lo = 0;
        while lo < n_items {
            let hi = (lo + cfg.batch_size).min(n_items);
            let (x, labels) = assemble(kind, set, &items, lo, hi);
            graph.zero_grads();
            let tape = graph.forward(&x)?;
            let (loss, grad_logits) = softmax_cross_entropy(tape.output(), &labels)?;
            if !loss.is_finite() {
                return Err(DataError::Diverged {
                    epoch,
                    batch: batches,
                    recent: recent.iter().copied().collect(),
                });
            }
            if recent.len() == 5 {
                recent.pop_front();
            }
            recent.push_back(loss);
            graph.backward(&tape, &grad_logits)?;
            adam_step(graph.params_mut(), &mut adam)?;
            epoch_loss += loss * (hi - lo) as f64;
            batches += 1;
            lo = hi;
        }
        let train_loss = epoch_loss / n_items.max(1) as f64;

        graph.set_mode(BnMode::Eval);
        let (val_loss, val_accuracy) = validation_stats(graph, set, val_idx, cfg)?;
        log.epochs.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
            val_accuracy,
        });

        if val_loss + 1e-9 < best_val {
            best_val = val_loss;
            best = take_snapshot(graph);
            log.best_epoch = Some(epoch);
            strikes = 0;
        } else {
            strikes += 1;
            if strikes >= cfg.patience {
                log.stopped_early = true;
                break;
            }
        }
    }

    restore_snapshot(graph, &best);
    graph.set_mode(BnMode::Eval);
    Ok(log)
}

/// Validation loss/accuracy. 2D models score individual evenly spaced time
/// slices; the others score whole windows.
fn validation_stats(
    graph: &mut ModelGraph<f32>,
    set: &WindowSet,
    val_idx: &[usize],
    cfg: &TrainConfig,
) -> Result<(f64, f64)> {
    if val_idx.is_empty() {
        return Ok((f64::INFINITY, 0.0));
    }
    let kind = graph.config.kind();
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    let mut total = 0usize;
    match kind {
        ModelKind::DenseNet2d => {
            let k = cfg.slices_per_window.max(1);
            let mut picks = Vec::with_capacity(val_idx.len() * k);
            for &w in val_idx {
                for i in 0..k {
                    picks.push((w, i * set.t_len / k));
                }
            }
            for chunk in picks.chunks(cfg.batch_size.max(1)) {
                let x = set.slice_batch(chunk);
                let labels: Vec<usize> = chunk
                    .iter()
                    .map(|&(w, _)| set.windows[w].label.index())
                    .collect();
                let logits = graph.logits(&x)?;
                let (loss, _) = softmax_cross_entropy(&logits, &labels)?;
                total_loss += loss * chunk.len() as f64;
                correct += count_correct(&logits, &labels);
                total += chunk.len();
            }
        }
        _ => {
            for chunk in val_idx.chunks(cfg.batch_size.max(1)) {
                let logits = window_logits(graph, set, chunk, cfg.slices_per_window)?;
                let labels = set.labels(chunk);
                let (loss, _) = softmax_cross_entropy(&logits, &labels)?;
                total_loss += loss * chunk.len() as f64;
                correct += count_correct(&logits, &labels);
                total += chunk.len();
            }
        }
    }
    Ok((total_loss / total as f64, correct as f64 / total as f64))
}

pub(crate) fn count_correct(logits: &Tensor<f32>, labels: &[usize]) -> usize {
    logits
        .data()
        .chunks(2)
        .zip(labels.iter())
        .filter(|(row, &label)| (row[1] > row[0]) == (label == 1))
        .count()
}
