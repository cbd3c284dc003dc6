//! `train`: fit the measurement regressor on a labeled dataset.

use std::path::PathBuf;

use anthrokit_core::dataset::read_dataset;
use anthrokit_core::error::{Error, Result};
use anthrokit_core::features::FeatureSelection;
use anthrokit_core::mlp::{train, write_training_log, Optimizer, TrainConfig};
use anthrokit_core::registry::LandmarkRegistry;

use crate::config::{require_file, resolve, resolve_required, KvConfig};
use crate::TrainArgs;

pub fn run(args: TrainArgs, cfg: &KvConfig) -> Result<()> {
    let mut manifest = KvConfig::new();
    let dataset: PathBuf = resolve_required(args.dataset, cfg, "dataset")?;
    let selection_path: PathBuf = resolve_required(args.selection, cfg, "selection")?;
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    require_file(&dataset, "training dataset")?;
    require_file(&selection_path, "feature selection")?;

    let defaults = TrainConfig::default();
    let optimizer_raw = args
        .optimizer
        .or_else(|| cfg.get("optimizer").map(|s| s.to_string()))
        .unwrap_or_else(|| defaults.optimizer.as_str().to_string());
    let hidden_raw = args
        .hidden_dims
        .or_else(|| cfg.get("hidden_dims").map(|s| s.to_string()))
        .unwrap_or_else(|| "194,97".to_string());
    let hidden_dims: Vec<usize> = hidden_raw
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad hidden dim {t:?}")))
        })
        .collect::<Result<_>>()?;

    let config = TrainConfig {
        learning_rate: resolve(args.learning_rate, cfg, "learning_rate", defaults.learning_rate)?,
        batch_size: resolve(args.batch_size, cfg, "batch_size", defaults.batch_size)?,
        epochs: resolve(args.epochs, cfg, "epochs", defaults.epochs)?,
        seed: resolve(args.seed, cfg, "seed", defaults.seed)?,
        optimizer: Optimizer::parse(&optimizer_raw)
            .map_err(|_| Error::InvalidInput(format!("unknown optimizer {optimizer_raw:?}")))?,
        validation_fraction: resolve(
            args.validation_fraction,
            cfg,
            "validation_fraction",
            defaults.validation_fraction,
        )?,
        early_stop_patience: resolve(
            args.early_stop_patience,
            cfg,
            "early_stop_patience",
            defaults.early_stop_patience,
        )?,
        weight_decay: resolve(args.weight_decay, cfg, "weight_decay", defaults.weight_decay)?,
        landmark_jitter_mm: resolve(
            args.landmark_jitter_mm,
            cfg,
            "landmark_jitter_mm",
            defaults.landmark_jitter_mm,
        )?,
        hidden_dims,
    };

    let registry = LandmarkRegistry::standard();
    let records = read_dataset(&dataset, &registry)?;
    let selection = FeatureSelection::load(&selection_path)?;
    let (model, log) = train(&records, &selection, &config)?;
    model.save(&out)?;
    let log_path = out.with_extension("log.csv");
    write_training_log(&log_path, &log)?;

    manifest.set("dataset", dataset.display());
    manifest.set("selection", selection_path.display());
    manifest.set("out", out.display());
    manifest.set("learning_rate", config.learning_rate);
    manifest.set("batch_size", config.batch_size);
    manifest.set("epochs", config.epochs);
    manifest.set("seed", config.seed);
    manifest.set("optimizer", config.optimizer.as_str());
    manifest.set("validation_fraction", config.validation_fraction);
    manifest.set("early_stop_patience", config.early_stop_patience);
    manifest.set("weight_decay", config.weight_decay);
    manifest.set("landmark_jitter_mm", config.landmark_jitter_mm);
    manifest.set(
        "hidden_dims",
        config
            .hidden_dims
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.write_manifest(&out.with_extension("manifest"), "train")?;

    let meta = model.trained_meta.as_ref().expect("trained model has meta");
    let dims: Vec<String> = model.layer_dims.iter().map(|d| d.to_string()).collect();
    println!(
        "train: {} records, network {}, {} epochs run (best {:?}), final train mse {:.3} -> {}",
        records.len(),
        dims.join("-"),
        meta.epochs_run,
        meta.best_epoch,
        log.last().map(|e| e.train_mse).unwrap_or(f64::NAN),
        out.display()
    );
    Ok(())
}
