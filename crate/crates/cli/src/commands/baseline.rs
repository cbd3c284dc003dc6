//! `baseline`: the fit-and-repose path. For each posed record, fit shape and
//! pose to the landmarks from a neutral start, keep the shape, repose to the
//! A-pose and measure geometrically.

use std::path::PathBuf;

use anthrokit_core::body::{
    fit_body_to_landmarks, measure_ground_truth, PoseParams, ShapeParams,
};
use anthrokit_core::dataset::read_dataset;
use anthrokit_core::error::Result;
use anthrokit_core::optim::OptimConfig;
use anthrokit_core::registry::LandmarkRegistry;
use rayon::prelude::*;

use crate::config::{require_file, resolve, resolve_required, KvConfig};
use crate::predictions::{write_predictions, PredictionRow};
use crate::BaselineArgs;

pub fn run(args: BaselineArgs, cfg: &KvConfig) -> Result<()> {
    let mut manifest = KvConfig::new();
    let dataset: PathBuf = resolve_required(args.dataset, cfg, "dataset")?;
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    let max_iters = resolve(args.max_iters, cfg, "max_iters", 2000usize)?;
    let learning_rate = resolve(args.learning_rate, cfg, "learning_rate", 0.02f64)?;
    require_file(&dataset, "dataset")?;
    let model = super::load_model(&args.model, cfg, &mut manifest)?;

    let registry = LandmarkRegistry::standard();
    let records = read_dataset(&dataset, &registry)?;
    let optim = OptimConfig {
        max_iters,
        learning_rate,
        ..Default::default()
    };
    let zero_shape = ShapeParams::zeros(model.num_shape_coeffs());
    let rest_pose = PoseParams::rest(model.num_joints());

    let rows: Vec<Result<PredictionRow>> = records
        .par_iter()
        .map(|rec| -> Result<PredictionRow> {
            let fit =
                fit_body_to_landmarks(&model, &rec.landmarks, (&zero_shape, &rest_pose), &optim)?;
            let values = measure_ground_truth(&model, &fit.shape)?;
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
    manifest.set("out", out.display());
    manifest.set("max_iters", max_iters);
    manifest.set("learning_rate", learning_rate);
    manifest.write_manifest(&out.with_extension("manifest"), "baseline")?;
    println!("baseline: {} records fitted -> {}", rows.len(), out.display());
    Ok(())
}
