//! Subject-dependent and subject-independent cross-validation protocols.

use asad_models::{
    build, inflate_2d_to_3d, Checkpoint, DenseNetConfig, ModelConfig, ModelGraph, ModelKind,
};
use asad_nn::SeededRng;
use asad_topo::TopologyMap;

use crate::error::Result;
use crate::eval::evaluate;
use crate::folds::{make_folds, make_folds_grouped, FoldPlan};
use crate::recording::EegRecording;
use crate::train::{train_model, TrainConfig, TrainLog};
use crate::windows::{slice_windows, WindowSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SubjectDependent,
    SubjectIndependent,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "dependent" => Some(Mode::SubjectDependent),
            "independent" => Some(Mode::SubjectIndependent),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::SubjectDependent => "dependent",
            Mode::SubjectIndependent => "independent",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub mode: Mode,
    pub model: ModelKind,
    /// Train DenseNet-2D first and inflate it into the 3D model's init.
    pub bootstrap: bool,
    pub duration_s: u32,
    pub seed: u64,
    pub train: TrainConfig,
    pub densenet: DenseNetConfig,
    /// CV rounds to run (all five when empty).
    pub folds: Vec<usize>,
    /// Assign whole trials to folds instead of shuffling windows freely.
    pub group_by_trial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRow {
    pub subject: String,
    pub fold: usize,
    pub model: String,
    pub duration_s: u32,
    pub accuracy: f64,
}

pub struct TrainedFold {
    pub subject: String,
    pub fold: usize,
    pub checkpoint: Checkpoint,
    pub log: TrainLog,
    /// Log of the 2D pretraining phase when bootstrapping.
    pub pretrain_log: Option<TrainLog>,
}

pub struct ProtocolReport {
    pub rows: Vec<ProtocolRow>,
    pub trained: Vec<TrainedFold>,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
}

impl ProtocolReport {
    /// Fixed-header CSV: subject,fold,model,duration_s,accuracy.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subject,fold,model,duration_s,accuracy\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6}\n",
                r.subject, r.fold, r.model, r.duration_s, r.accuracy
            ));
        }
        out
    }
}

fn model_config(cfg: &ProtocolConfig, t_len: usize) -> ModelConfig {
    match cfg.model {
        ModelKind::DenseNet2d => ModelConfig::DenseNet2d {
            dn: cfg.densenet.clone(),
        },
        ModelKind::DenseNet3d => ModelConfig::DenseNet3d {
            dn: cfg.densenet.clone(),
            t_len,
        },
        ModelKind::CnnBaseline => ModelConfig::CnnBaseline { t_len },
        ModelKind::Cnn3d => ModelConfig::Cnn3d { t_len },
    }
}

fn fold_plan(set: &WindowSet, cfg: &ProtocolConfig, scope: &str) -> Result<FoldPlan> {
    let seed = SeededRng::derive(cfg.seed, "fold-seed", &[]).next_u64() ^ scope_hash(scope);
    if cfg.group_by_trial {
        let keys: Vec<(String, u32)> = set
            .windows
            .iter()
            .map(|w| (w.subject_id.clone(), w.trial_id))
            .collect();
        make_folds_grouped(&keys, seed)
    } else {
        make_folds(set.len(), seed)
    }
}

fn scope_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Train and evaluate one fold round; returns the trained checkpoint, its
/// logs, and test accuracy.
#[allow(clippy::too_many_arguments)]
pub fn run_fold(
    set: &WindowSet,
    train_idx: &[usize],
    val_idx: &[usize],
    test_idx: &[usize],
    cfg: &ProtocolConfig,
    subject: &str,
    fold: usize,
) -> Result<(TrainedFold, f64)> {
    let t_len = set.t_len;
    let run_seed = SeededRng::derive(cfg.seed, "run", &[scope_hash(subject), fold as u64]).next_u64();
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed = run_seed;

    let mut pretrain_log = None;
    let mut graph: ModelGraph<f32>;
    if cfg.model == ModelKind::DenseNet3d && cfg.bootstrap {
        // Phase 1: train the 2D model on sampled time slices.
        let cfg2d = ModelConfig::DenseNet2d {
            dn: cfg.densenet.clone(),
        };
        let mut g2 = build::<f32>(&cfg2d, run_seed)?;
        pretrain_log = Some(train_model(&mut g2, set, train_idx, val_idx, &train_cfg)?);
        let ckpt2d = Checkpoint::from_graph(&g2, vec![("phase".into(), "pretrain-2d".into())]);
        // Phase 2: inflate and fine-tune in 3D.
        let cfg3d = model_config(cfg, t_len);
        let ckpt3d = inflate_2d_to_3d(&ckpt2d, &cfg3d)?;
        graph = build::<f32>(&cfg3d, run_seed)?;
        ckpt3d.load_into(&mut graph)?;
    } else {
        graph = build::<f32>(&model_config(cfg, t_len), run_seed)?;
    }

    let log = train_model(&mut graph, set, train_idx, val_idx, &train_cfg)?;
    let metrics = evaluate(&mut graph, set, test_idx, cfg.train.batch_size)?;

    let mut meta = vec![
        ("subject".to_string(), subject.to_string()),
        ("fold".to_string(), fold.to_string()),
        ("duration_s".to_string(), cfg.duration_s.to_string()),
        ("test_accuracy".to_string(), format!("{:.6}", metrics.accuracy)),
        (
            "epochs_trained".to_string(),
            log.epochs.len().to_string(),
        ),
    ];
    if cfg.bootstrap && cfg.model == ModelKind::DenseNet3d {
        meta.push(("bootstrap".to_string(), "true".to_string()));
    }
    let checkpoint = Checkpoint::from_graph(&graph, meta);
    Ok((
        TrainedFold {
            subject: subject.to_string(),
            fold,
            checkpoint,
            log,
            pretrain_log,
        },
        metrics.accuracy,
    ))
}

/// Run the full protocol over preprocessed recordings.
pub fn run_protocol(
    recordings: &[EegRecording],
    topology: &TopologyMap,
    cfg: &ProtocolConfig,
) -> Result<ProtocolReport> {
    let folds_to_run: Vec<usize> = if cfg.folds.is_empty() {
        (0..crate::folds::NUM_FOLDS).collect()
    } else {
        cfg.folds.clone()
    };

    let mut rows = Vec::new();
    let mut trained = Vec::new();
    let model_name = cfg.model.as_str().to_string();

    let mut run_scope = |set: &WindowSet, subject: &str| -> Result<()> {
        let plan = fold_plan(set, cfg, subject)?;
        for &fold in &folds_to_run {
            let round = &plan.rounds[fold];
            let (tf, accuracy) =
                run_fold(set, &round.train, &round.val, &round.test, cfg, subject, fold)?;
            rows.push(ProtocolRow {
                subject: subject.to_string(),
                fold,
                model: model_name.clone(),
                duration_s: cfg.duration_s,
                accuracy,
            });
            trained.push(tf);
        }
        Ok(())
    };

    match cfg.mode {
        Mode::SubjectDependent => {
            for rec in recordings {
                let set = slice_windows(std::slice::from_ref(rec), cfg.duration_s, topology)?;
                run_scope(&set, &rec.subject_id)?;
            }
        }
        Mode::SubjectIndependent => {
            let set = slice_windows(recordings, cfg.duration_s, topology)?;
            run_scope(&set, "all")?;
        }
    }

    let mean_accuracy = rows.iter().map(|r| r.accuracy).sum::<f64>() / rows.len().max(1) as f64;
    let sd_accuracy = if rows.len() > 1 {
        let m = mean_accuracy;
        (rows.iter().map(|r| (r.accuracy - m) * (r.accuracy - m)).sum::<f64>()
            / (rows.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    Ok(ProtocolReport {
        rows,
        trained,
        mean_accuracy,
        sd_accuracy,
    })
}
