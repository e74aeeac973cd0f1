//! Subcommand implementations.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::json;

use asad_data::{
    band_power_oracle_accuracy, ingest, ingest_csv, preprocess_recording, run_protocol,
    slice_windows, synthesize, write_recording, EegRecording, Mode, PreprocessConfig,
    ProtocolConfig, SyntheticSpec, TrainConfig,
};
use asad_dsp::NormScope;
use asad_models::{
    build, gradcheck_model, inflate_2d_to_3d, Checkpoint, DenseNetConfig, ModelConfig, ModelKind,
};
use asad_nn::{BnMode, GradCheckOptions, SeededRng, Tensor};
use asad_topo::TopologyMap;

use crate::errors::{CliError, Result};
use crate::manifest::Manifest;
use crate::{EvalArgs, GradcheckArgs, InflateArgs, PreprocessArgs, SynthArgs, TrainArgs};

pub const DATA_DIR_ENV: &str = "ASAD_DATA_DIR";

/// Per-command sections of the optional TOML config file.
#[derive(Deserialize, Default)]
pub struct FileConfig {
    #[serde(default)]
    pub preprocess: PreprocessFile,
    #[serde(default)]
    pub synth: SynthFile,
    #[serde(default)]
    pub train: TrainFile,
    #[serde(default)]
    pub eval: EvalFile,
}

#[derive(Deserialize, Default)]
pub struct PreprocessFile {
    pub band_low: Option<f64>,
    pub band_high: Option<f64>,
    pub order: Option<usize>,
    pub norm_scope: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Deserialize, Default)]
pub struct SynthFile {
    pub subjects: Option<usize>,
    pub trials: Option<usize>,
    pub trial_len: Option<u32>,
    pub fs: Option<u32>,
    pub noise_exponent: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub beta_sigma: Option<f64>,
    pub band_low: Option<f64>,
    pub band_high: Option<f64>,
    pub asymmetry: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Deserialize, Default)]
pub struct TrainFile {
    pub duration: Option<u32>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub lr: Option<f64>,
    pub patience: Option<usize>,
    pub slices_per_window: Option<usize>,
    pub growth_rate: Option<usize>,
    pub compression: Option<f64>,
}

#[derive(Deserialize, Default)]
pub struct EvalFile {
    pub batch: Option<usize>,
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))
        }
    }
}

fn resolve<T: Clone>(cli: Option<T>, file: Option<T>, default: T) -> T {
    cli.or(file).unwrap_or(default)
}

fn parse_scope(s: &str) -> Result<NormScope> {
    match s {
        "global" => Ok(NormScope::Global),
        "channel" | "per-channel" => Ok(NormScope::PerChannel),
        other => Err(CliError::usage(format!(
            "norm scope must be `global` or `channel`, got {other:?}"
        ))),
    }
}

fn load_topology(path: Option<&Path>) -> Result<TopologyMap> {
    match path {
        None => Ok(TopologyMap::default_biosemi64()),
        Some(p) => Ok(TopologyMap::load(p)?),
    }
}

/// Sorted .eeg/.csv files under a directory, or the single given file.
fn input_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        return Err(CliError::io(format!("{}: not found", path.display())));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("eeg") | Some("csv")
            )
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::io(format!(
            "{}: no .eeg or .csv files",
            path.display()
        )));
    }
    Ok(files)
}

fn load_any(path: &Path) -> Result<EegRecording> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(ingest_csv(path)?),
        _ => Ok(ingest(path)?),
    }
}

fn data_dir(arg: Option<&Path>) -> Result<PathBuf> {
    if let Some(p) = arg {
        return Ok(p.to_path_buf());
    }
    if let Ok(env) = std::env::var(DATA_DIR_ENV) {
        return Ok(PathBuf::from(env));
    }
    Err(CliError::usage(format!(
        "no --data directory given and {DATA_DIR_ENV} is unset"
    )))
}

pub fn preprocess(args: PreprocessArgs, file: &FileConfig) -> Result<()> {
    let band_low = resolve(args.band_low, file.preprocess.band_low, 14.0);
    let band_high = resolve(args.band_high, file.preprocess.band_high, 31.0);
    let order = resolve(args.order, file.preprocess.order, 8);
    let scope_name = resolve(
        args.norm_scope.clone(),
        file.preprocess.norm_scope.clone(),
        "global".to_string(),
    );
    let seed = resolve(args.seed, file.preprocess.seed, 0);
    let cfg = PreprocessConfig {
        band: (band_low, band_high),
        filter_order: order,
        norm_scope: parse_scope(&scope_name)?,
    };

    let inputs = input_files(&args.input)?;
    // An output path with an .eeg extension names a file; anything else is
    // a directory of same-stem outputs.
    let single_file_output = inputs.len() == 1
        && args.output.extension().and_then(|e| e.to_str()) == Some("eeg")
        && !args.output.is_dir();
    if !single_file_output {
        std::fs::create_dir_all(&args.output)?;
    }

    for input in &inputs {
        let rec = load_any(input)?;
        let processed = preprocess_recording(&rec, &cfg)?;
        let out_path = if single_file_output {
            args.output.clone()
        } else {
            args.output
                .join(input.file_stem().unwrap_or_default())
                .with_extension("eeg")
        };
        write_recording(&processed, &out_path)?;
        println!(
            "preprocessed {} -> {} ({} trials, fs {} Hz)",
            input.display(),
            out_path.display(),
            processed.trials.len(),
            processed.fs().unwrap_or(0)
        );
    }

    let manifest_path = if single_file_output {
        args.output.with_extension("manifest.json")
    } else {
        args.output.join("preprocess.manifest.json")
    };
    Manifest::new(
        "preprocess",
        seed,
        inputs.iter().map(|p| p.display().to_string()).collect(),
        json!({
            "band_low": band_low,
            "band_high": band_high,
            "order": order,
            "norm_scope": scope_name,
            "output_fs": 128,
        }),
    )
    .write(&manifest_path)?;
    Ok(())
}

pub fn synth(args: SynthArgs, file: &FileConfig) -> Result<()> {
    // Spec-file values sit between built-in defaults and flags.
    let from_spec: SynthFile = match &args.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::io(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
        }
        None => SynthFile::default(),
    };
    let pick_u = |a: Option<usize>, s: Option<usize>, f: Option<usize>, d: usize| {
        a.or(s).or(f).unwrap_or(d)
    };
    let defaults = SyntheticSpec::default();
    let spec = SyntheticSpec {
        n_subjects: pick_u(args.subjects, from_spec.subjects, file.synth.subjects, 2),
        trials_per_subject: pick_u(args.trials, from_spec.trials, file.synth.trials, 24),
        trial_len_s: args
            .trial_len
            .or(from_spec.trial_len)
            .or(file.synth.trial_len)
            .unwrap_or(60),
        fs: args.fs.or(from_spec.fs).or(file.synth.fs).unwrap_or(128),
        noise_exponent: from_spec
            .noise_exponent
            .or(file.synth.noise_exponent)
            .unwrap_or(defaults.noise_exponent),
        noise_sigma: from_spec
            .noise_sigma
            .or(file.synth.noise_sigma)
            .unwrap_or(defaults.noise_sigma),
        beta_sigma: from_spec
            .beta_sigma
            .or(file.synth.beta_sigma)
            .unwrap_or(defaults.beta_sigma),
        band: (
            from_spec.band_low.or(file.synth.band_low).unwrap_or(14.0),
            from_spec.band_high.or(file.synth.band_high).unwrap_or(31.0),
        ),
        asymmetry_ratio: args
            .asymmetry
            .or(from_spec.asymmetry)
            .or(file.synth.asymmetry)
            .unwrap_or(1.5),
        seed: args
            .seed
            .or(from_spec.seed)
            .or(file.synth.seed)
            .unwrap_or(defaults.seed),
    };
    let topology = load_topology(args.topology.as_deref())?;

    std::fs::create_dir_all(&args.output)?;
    let recordings = synthesize(&spec, &topology)?;
    for rec in &recordings {
        let path = args.output.join(format!("{}.eeg", rec.subject_id));
        write_recording(rec, &path)?;
        println!(
            "wrote {} ({} trials x {} s at {} Hz)",
            path.display(),
            rec.trials.len(),
            spec.trial_len_s,
            spec.fs
        );
    }

    let mut oracle = None;
    if !args.no_self_test {
        let acc = band_power_oracle_accuracy(&recordings, &topology, 1, spec.band, spec.seed)?;
        println!(
            "self-test: hemispheric band-power oracle accuracy {:.3} (asymmetry {})",
            acc, spec.asymmetry_ratio
        );
        oracle = Some(acc);
    }

    Manifest::new(
        "synth",
        spec.seed,
        Vec::new(),
        json!({
            "subjects": spec.n_subjects,
            "trials_per_subject": spec.trials_per_subject,
            "trial_len_s": spec.trial_len_s,
            "fs": spec.fs,
            "noise_exponent": spec.noise_exponent,
            "noise_sigma": spec.noise_sigma,
            "beta_sigma": spec.beta_sigma,
            "band": [spec.band.0, spec.band.1],
            "asymmetry_ratio": spec.asymmetry_ratio,
            "topology": topology.montage_name,
            "oracle_accuracy": oracle,
        }),
    )
    .write(&args.output.join("synth.manifest.json"))?;
    Ok(())
}

fn write_train_log(path: &Path, log: &asad_data::TrainLog) -> Result<()> {
    let mut text = String::from("epoch,train_loss,val_loss,val_accuracy\n");
    for e in &log.epochs {
        text.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            e.epoch, e.train_loss, e.val_loss, e.val_accuracy
        ));
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn train(args: TrainArgs, file: &FileConfig) -> Result<()> {
    let data = data_dir(args.data.as_deref())?;
    let duration = resolve(args.duration, file.train.duration, 1);
    if ![1, 2, 5, 10].contains(&duration) {
        return Err(CliError::usage(format!(
            "duration must be one of 1, 2, 5, 10 seconds, got {duration}"
        )));
    }
    let mode_name = resolve(
        args.mode.clone(),
        file.train.mode.clone(),
        "dependent".to_string(),
    );
    let mode = Mode::parse(&mode_name)
        .ok_or_else(|| CliError::usage(format!("mode must be dependent|independent, got {mode_name:?}")))?;
    let model = ModelKind::parse(&args.model).map_err(|e| CliError::usage(e.to_string()))?;
    let seed = resolve(args.seed, file.train.seed, 0);
    let train_cfg = TrainConfig {
        learning_rate: resolve(args.lr, file.train.lr, 1e-3),
        batch_size: resolve(args.batch, file.train.batch, 32),
        max_epochs: resolve(args.epochs, file.train.epochs, 50),
        patience: resolve(args.patience, file.train.patience, 5),
        slices_per_window: resolve(
            args.slices_per_window,
            file.train.slices_per_window,
            8,
        ),
        seed,
    };
    let densenet = DenseNetConfig {
        growth_rate: resolve(args.growth_rate, file.train.growth_rate, 16),
        compression: resolve(args.compression, file.train.compression, 0.5),
        ..DenseNetConfig::default()
    };
    let topology = load_topology(args.topology.as_deref())?;
    let bootstrap = model == ModelKind::DenseNet3d && !args.no_bootstrap;

    let inputs = input_files(&data)?;
    let recordings: Vec<EegRecording> = inputs
        .iter()
        .map(|p| load_any(p))
        .collect::<Result<_>>()?;

    let cfg = ProtocolConfig {
        mode,
        model,
        bootstrap,
        duration_s: duration,
        seed,
        train: train_cfg.clone(),
        densenet: densenet.clone(),
        folds: args.fold.clone(),
        group_by_trial: args.group_by_trial,
    };
    let report = run_protocol(&recordings, &topology, &cfg)?;

    std::fs::create_dir_all(&args.output)?;
    let report_path = args.output.join("report.csv");
    std::fs::write(&report_path, report.to_csv())?;
    for tf in &report.trained {
        let stem = format!("{}_{}_fold{}", model.as_str(), tf.subject, tf.fold);
        tf.checkpoint
            .save(&args.output.join(format!("{stem}.ckpt")))?;
        write_train_log(&args.output.join(format!("{stem}.log.csv")), &tf.log)?;
        if let Some(pre) = &tf.pretrain_log {
            write_train_log(&args.output.join(format!("{stem}.pretrain.log.csv")), pre)?;
        }
    }

    for row in &report.rows {
        println!(
            "subject {} fold {}: accuracy {:.4}",
            row.subject, row.fold, row.accuracy
        );
    }
    println!(
        "{} {} {} s windows: mean accuracy {:.4} (sd {:.4}) over {} runs -> {}",
        model.as_str(),
        mode.as_str(),
        duration,
        report.mean_accuracy,
        report.sd_accuracy,
        report.rows.len(),
        report_path.display()
    );

    Manifest::new(
        "train",
        seed,
        inputs.iter().map(|p| p.display().to_string()).collect(),
        json!({
            "model": model.as_str(),
            "mode": mode.as_str(),
            "duration_s": duration,
            "bootstrap": bootstrap,
            "folds": if cfg.folds.is_empty() { (0..5).collect::<Vec<_>>() } else { cfg.folds.clone() },
            "group_by_trial": cfg.group_by_trial,
            "learning_rate": train_cfg.learning_rate,
            "batch_size": train_cfg.batch_size,
            "max_epochs": train_cfg.max_epochs,
            "patience": train_cfg.patience,
            "slices_per_window": train_cfg.slices_per_window,
            "growth_rate": densenet.growth_rate,
            "compression": densenet.compression,
            "topology": topology.montage_name,
            "divergence_sources": [
                "electrode grid table is a configurable data file (--topology); published reference results do not disclose theirs",
                "channel widths (growth rate, compression) are configurable defaults; published reference results do not disclose theirs",
            ],
        }),
    )
    .write(&args.output.join("train.manifest.json"))?;
    Ok(())
}

pub fn inflate(args: InflateArgs) -> Result<()> {
    let ckpt2d = Checkpoint::load(&args.input)?;
    let t_len = match (args.t_len, args.duration) {
        (Some(t), _) => t,
        (None, Some(d)) => 128 * d as usize,
        (None, None) => 128,
    };
    let dn = ckpt2d
        .config
        .densenet()
        .ok_or_else(|| CliError::usage("input checkpoint is not a densenet2d model".to_string()))?
        .clone();
    let cfg3d = ModelConfig::DenseNet3d { dn, t_len };
    let ckpt3d = inflate_2d_to_3d(&ckpt2d, &cfg3d)?;
    ckpt3d.save(&args.output)?;
    println!(
        "inflated {} -> {} (t_len {t_len}, {} records)",
        args.input.display(),
        args.output.display(),
        ckpt3d.records.len()
    );
    Manifest::new(
        "inflate",
        ckpt2d.seed,
        vec![args.input.display().to_string()],
        json!({ "t_len": t_len }),
    )
    .write(&args.output.with_extension("manifest.json"))?;
    Ok(())
}

/// Constant-in-time probes through the 2D model and its inflated 3D twin.
fn inflation_deviation(ckpt2d: &Checkpoint, t_len: usize) -> Result<f64> {
    let cfg3d = ModelConfig::DenseNet3d {
        dn: ckpt2d
            .config
            .densenet()
            .ok_or_else(|| CliError::usage("checkpoint is not densenet2d".to_string()))?
            .clone(),
        t_len,
    };
    let ckpt3d = inflate_2d_to_3d(ckpt2d, &cfg3d)?;
    let mut g2 = build::<f32>(&ckpt2d.config, 0).map_err(CliError::from)?;
    ckpt2d.load_into(&mut g2)?;
    g2.set_mode(BnMode::Eval);
    let mut g3 = build::<f32>(&cfg3d, 0).map_err(CliError::from)?;
    ckpt3d.load_into(&mut g3)?;
    g3.set_mode(BnMode::Eval);

    let mut rng = SeededRng::new(7);
    let batch = 8;
    let slices = Tensor::<f32>::randn(&[batch, 1, 10, 11], 1.0, &mut rng);
    let mut volume = Tensor::<f32>::zeros(&[batch, 1, 10, 11, t_len]);
    for (cell, &v) in slices.data().iter().enumerate() {
        let base = cell * t_len;
        volume.data_mut()[base..base + t_len].fill(v);
    }
    let l2 = g2.logits(&slices).map_err(CliError::from)?;
    let l3 = g3.logits(&volume).map_err(CliError::from)?;
    Ok(l2.max_abs_diff(&l3))
}

pub fn eval(args: EvalArgs, file: &FileConfig) -> Result<()> {
    let ckpt = Checkpoint::load(&args.checkpoint)?;

    if args.check_inflation {
        let t_len = args.t_len.unwrap_or(128);
        let dev = inflation_deviation(&ckpt, t_len)?;
        println!("max logit deviation on constant-in-time probes: {dev:.3e} (t_len {t_len})");
        if dev <= 1e-5 {
            println!("inflation equivalence: pass");
            return Ok(());
        }
        return Err(CliError::check(format!(
            "inflation equivalence failed: deviation {dev:.3e} > 1e-5"
        )));
    }

    let data = data_dir(args.data.as_deref())?;
    let duration = match args.duration {
        Some(d) => d,
        None => match ckpt.config.t_len() {
            Some(t) => (t / 128).max(1) as u32,
            None => 1,
        },
    };
    let batch = resolve(args.batch, file.eval.batch, 32);
    let topology = load_topology(args.topology.as_deref())?;
    let inputs = input_files(&data)?;
    let recordings: Vec<EegRecording> = inputs
        .iter()
        .map(|p| load_any(p))
        .collect::<Result<_>>()?;
    let set = slice_windows(&recordings, duration, &topology).map_err(CliError::from)?;

    let mut graph = build::<f32>(&ckpt.config, 0).map_err(CliError::from)?;
    ckpt.load_into(&mut graph)?;
    graph.set_mode(BnMode::Eval);
    let idx: Vec<usize> = (0..set.len()).collect();
    let metrics = asad_data::evaluate(&mut graph, &set, &idx, batch)?;

    println!(
        "{} windows: accuracy {:.4} (left {:.4}, right {:.4})",
        metrics.total, metrics.accuracy, metrics.per_class_accuracy[0], metrics.per_class_accuracy[1]
    );
    for s in &metrics.per_subject {
        println!("  subject {}: {:.4} over {} windows", s.subject, s.accuracy, s.windows);
    }
    if metrics.per_subject.len() > 1 {
        println!(
            "  per-subject mean {:.4} (sd {:.4})",
            metrics.subject_mean, metrics.subject_sd
        );
    }

    if let Some(report) = &args.report {
        let mut text = String::from("subject,fold,model,duration_s,accuracy\n");
        for s in &metrics.per_subject {
            text.push_str(&format!(
                "{},0,{},{},{:.6}\n",
                s.subject,
                ckpt.config.kind().as_str(),
                duration,
                s.accuracy
            ));
        }
        std::fs::write(report, text)?;
        Manifest::new(
            "eval",
            ckpt.seed,
            inputs.iter().map(|p| p.display().to_string()).collect(),
            json!({
                "checkpoint": args.checkpoint.display().to_string(),
                "duration_s": duration,
                "batch": batch,
                "topology": topology.montage_name,
                "accuracy": metrics.accuracy,
            }),
        )
        .write(&report.with_extension("manifest.json"))?;
    }
    Ok(())
}

pub fn gradcheck(args: GradcheckArgs) -> Result<()> {
    use asad_nn::{
        conv_backward, conv_forward, gradcheck as nn_gradcheck, softmax_cross_entropy, ConvSpec,
        Parameter,
    };

    let seed = args.seed.unwrap_or(0x5eed);
    let k = args.growth_rate.unwrap_or(4);
    let mut failures = 0usize;
    let mut check = |name: &str, max_rel_err: f64, tolerance: f64| {
        let ok = max_rel_err <= tolerance;
        println!(
            "gradcheck {name}: max rel err {max_rel_err:.3e} (tolerance {tolerance:.0e}) {}",
            if ok { "pass" } else { "FAIL" }
        );
        if !ok {
            failures += 1;
        }
    };

    // Convolution, both ranks, via a linear functional of the output.
    for (name, spec, in_shape) in [
        (
            "conv2d",
            ConvSpec::new_2d([3, 3], [1, 1], [1, 1], 2, 3, true),
            vec![2usize, 2, 5, 6],
        ),
        (
            "conv3d",
            ConvSpec::new_3d([3, 3, 1], [1, 1, 1], [1, 1, 0], 2, 2, true),
            vec![1, 2, 5, 6, 7],
        ),
    ] {
        let mut rng = SeededRng::new(seed);
        let mut out_shape = vec![in_shape[0], spec.out_channels];
        out_shape.extend(spec.out_spatial("gradcheck", &in_shape[2..]).unwrap());
        let r = Tensor::<f64>::randn(&out_shape, 1.0, &mut rng);
        let mut params = vec![
            Parameter::new("x", Tensor::<f64>::randn(&in_shape, 1.0, &mut rng)),
            Parameter::new("w", Tensor::<f64>::randn(&spec.weight_shape(), 0.4, &mut rng)),
            Parameter::new("b", Tensor::<f64>::randn(&[spec.out_channels], 0.4, &mut rng)),
        ];
        let report = nn_gradcheck(
            &mut params,
            |ps| {
                let y = conv_forward(&ps[0].value, &spec, &ps[1].value, Some(&ps[2].value)).unwrap();
                let g = conv_backward(&r, &ps[0].value, &spec, &ps[1].value).unwrap();
                ps[0].grad = g.grad_input;
                ps[1].grad = g.grad_weight;
                ps[2].grad = g.grad_bias.unwrap();
                y.data()
                    .iter()
                    .zip(r.data().iter())
                    .map(|(a, b)| a * b)
                    .sum()
            },
            &GradCheckOptions {
                seed,
                ..GradCheckOptions::default()
            },
        );
        check(name, report.max_rel_err(), 1e-6);
    }

    // Full reduced-width 2D model through the cross-entropy loss.
    {
        let mut rng = SeededRng::new(seed ^ 1);
        let mut g =
            build::<f64>(&ModelConfig::DenseNet2d { dn: DenseNetConfig::with_growth_rate(k) }, seed)
                .map_err(CliError::from)?;
        for _ in 0..2 {
            let x = Tensor::<f64>::randn(&[4, 1, 10, 11], 1.0, &mut rng);
            let _ = g.forward(&x).map_err(CliError::from)?;
        }
        g.set_mode(BnMode::Eval);
        let x = Tensor::<f64>::randn(&[2, 1, 10, 11], 1.0, &mut rng);
        let report = gradcheck_model(
            &mut g,
            &x,
            &[0, 1],
            &GradCheckOptions {
                step: 1e-6,
                samples_per_tensor: 5,
                seed,
            },
        );
        check(&format!("densenet2d (k={k})"), report.max_rel_err(), 1e-4);
    }

    // Softmax cross-entropy against finite differences of the loss itself.
    {
        let mut rng = SeededRng::new(seed ^ 2);
        let labels = vec![0usize, 1, 1, 0];
        let mut params = vec![Parameter::new(
            "logits",
            Tensor::<f64>::randn(&[4, 2], 2.0, &mut rng),
        )];
        let report = nn_gradcheck(
            &mut params,
            |ps| {
                let (loss, grad) = softmax_cross_entropy(&ps[0].value, &labels).unwrap();
                ps[0].grad = grad;
                loss
            },
            &GradCheckOptions {
                seed,
                samples_per_tensor: 8,
                ..GradCheckOptions::default()
            },
        );
        check("softmax_cross_entropy", report.max_rel_err(), 1e-6);
    }

    if failures > 0 {
        return Err(CliError::check(format!("{failures} gradient check(s) failed")));
    }
    println!("gradcheck: all checks passed");
    Ok(())
}
