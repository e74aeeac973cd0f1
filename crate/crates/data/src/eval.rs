//! Window-level evaluation: one argmax decision per decision window.

use asad_models::{ModelGraph, ModelKind};
use asad_nn::Tensor;

use crate::error::{DataError, Result};
use crate::windows::WindowSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectAccuracy {
    pub subject: String,
    pub accuracy: f64,
    pub windows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// Accuracy on true-left and true-right windows.
    pub per_class_accuracy: [f64; 2],
    pub per_subject: Vec<SubjectAccuracy>,
    /// Mean and sample standard deviation over subjects (when > 1).
    pub subject_mean: f64,
    pub subject_sd: f64,
}

/// Logits for whole windows. 2D models average logits over `k_slices`
/// evenly spaced time points; other kinds consume the window directly.
pub fn window_logits(
    graph: &mut ModelGraph<f32>,
    set: &WindowSet,
    indices: &[usize],
    k_slices: usize,
) -> Result<Tensor<f32>> {
    match graph.config.kind() {
        ModelKind::CnnBaseline => graph.logits(&set.channels_batch(indices)).map_err(Into::into),
        ModelKind::Cnn3d | ModelKind::DenseNet3d => {
            graph.logits(&set.grid_batch(indices)).map_err(Into::into)
        }
        ModelKind::DenseNet2d => {
            let k = k_slices.max(1);
            let mut picks = Vec::with_capacity(indices.len() * k);
            for &w in indices {
                for i in 0..k {
                    picks.push((w, i * set.t_len / k));
                }
            }
            let slice_logits = graph.logits(&set.slice_batch(&picks))?;
            let mut out = Tensor::zeros(&[indices.len(), 2]);
            for (n, _) in indices.iter().enumerate() {
                let mut acc = [0.0_f32; 2];
                for i in 0..k {
                    let row = &slice_logits.data()[(n * k + i) * 2..(n * k + i + 1) * 2];
                    acc[0] += row[0];
                    acc[1] += row[1];
                }
                out.data_mut()[n * 2] = acc[0] / k as f32;
                out.data_mut()[n * 2 + 1] = acc[1] / k as f32;
            }
            Ok(out)
        }
    }
}

/// Evaluate a model (already in evaluation mode) over the given windows.
pub fn evaluate(
    graph: &mut ModelGraph<f32>,
    set: &WindowSet,
    indices: &[usize],
    batch_size: usize,
) -> Result<Metrics> {
    if indices.is_empty() {
        return Err(DataError::EmptyEval);
    }
    let mut correct = 0usize;
    let mut class_counts = [0usize; 2];
    let mut class_correct = [0usize; 2];
    let mut by_subject: Vec<(String, usize, usize)> = Vec::new();

    for chunk in indices.chunks(batch_size.max(1)) {
        let logits = window_logits(graph, set, chunk, 8)?;
        for (row, &wi) in logits.data().chunks(2).zip(chunk.iter()) {
            let w = &set.windows[wi];
            let label = w.label.index();
            let decided = usize::from(row[1] > row[0]);
            let ok = decided == label;
            correct += ok as usize;
            class_counts[label] += 1;
            class_correct[label] += ok as usize;
            match by_subject.iter_mut().find(|(s, _, _)| s == &w.subject_id) {
                Some((_, c, t)) => {
                    *c += ok as usize;
                    *t += 1;
                }
                None => by_subject.push((w.subject_id.clone(), ok as usize, 1)),
            }
        }
    }

    let total = indices.len();
    let per_subject: Vec<SubjectAccuracy> = by_subject
        .into_iter()
        .map(|(subject, c, t)| SubjectAccuracy {
            subject,
            accuracy: c as f64 / t as f64,
            windows: t,
        })
        .collect();
    let subject_mean = per_subject.iter().map(|s| s.accuracy).sum::<f64>() / per_subject.len() as f64;
    let subject_sd = if per_subject.len() > 1 {
        let m = subject_mean;
        (per_subject
            .iter()
            .map(|s| (s.accuracy - m) * (s.accuracy - m))
            .sum::<f64>()
            / (per_subject.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };

    let class_acc = |i: usize| {
        if class_counts[i] == 0 {
            f64::NAN
        } else {
            class_correct[i] as f64 / class_counts[i] as f64
        }
    };
    Ok(Metrics {
        accuracy: correct as f64 / total as f64,
        correct,
        total,
        per_class_accuracy: [class_acc(0), class_acc(1)],
        per_subject,
        subject_mean,
        subject_sd,
    })
}
