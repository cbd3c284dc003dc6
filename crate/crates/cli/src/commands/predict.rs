//! `predict`: run the trained regressor over every record of a dataset.

use std::path::PathBuf;

use anthrokit_core::dataset::read_dataset;
use anthrokit_core::error::Result;
use anthrokit_core::features::FeatureSelection;
use anthrokit_core::mlp::{predict, MlpModel};
use anthrokit_core::registry::LandmarkRegistry;
use rayon::prelude::*;

use crate::config::{require_file, resolve_required, KvConfig};
use crate::predictions::{write_predictions, PredictionRow};
use crate::PredictArgs;

pub fn run(args: PredictArgs, cfg: &KvConfig) -> Result<()> {
    let mut manifest = KvConfig::new();
    let dataset: PathBuf = resolve_required(args.dataset, cfg, "dataset")?;
    let selection_path: PathBuf = resolve_required(args.selection, cfg, "selection")?;
    let model_path: PathBuf = resolve_required(args.model, cfg, "model")?;
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    require_file(&dataset, "dataset")?;
    require_file(&selection_path, "feature selection")?;
    require_file(&model_path, "model")?;

    let registry = LandmarkRegistry::standard();
    let records = read_dataset(&dataset, &registry)?;
    let selection = FeatureSelection::load(&selection_path)?;
    let model = MlpModel::load(&model_path)?;

    let rows: Vec<Result<PredictionRow>> = records
        .par_iter()
        .map(|rec| {
            let values = predict(&model, &rec.landmarks, &selection)?;
            Ok(PredictionRow {
                subject_id: rec.landmarks.subject_id.clone(),
                pose_id: rec.landmarks.pose_id.clone(),
                values,
            })
        })
        .collect();
    let rows: Vec<PredictionRow> = rows.into_iter().collect::<Result<_>>()?;
    write_predictions(&out, &rows)?;

    manifest.set("dataset", dataset.display());
    manifest.set("selection", selection_path.display());
    manifest.set("model", model_path.display());
    manifest.set("out", out.display());
    manifest.write_manifest(&out.with_extension("manifest"), "predict")?;
    println!("predict: {} records -> {}", rows.len(), out.display());
    Ok(())
}
