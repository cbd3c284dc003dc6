//! `noise`: emulate landmarking error by moving each landmark along the
//! posed mesh surface, up to a bound (reference value 5.6 mm).

use std::collections::HashMap;
use std::path::PathBuf;

use anthrokit_core::body::{pose_mesh, read_params_file};
use anthrokit_core::dataset::{read_dataset, write_dataset, DatasetRecord};
use anthrokit_core::error::{Error, Result};
use anthrokit_core::mesh::perturb_landmark_on_surface;
use anthrokit_core::registry::LandmarkRegistry;
use anthrokit_core::rng::derive_seed;
use rayon::prelude::*;

use crate::config::{require_file, resolve, resolve_required, KvConfig};
use crate::NoiseArgs;

pub fn run(args: NoiseArgs, cfg: &KvConfig) -> Result<()> {
    let mut manifest = KvConfig::new();
    let dataset: PathBuf = resolve_required(args.dataset, cfg, "dataset")?;
    let params_path: PathBuf = resolve_required(args.params, cfg, "params")?;
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    let max_dist_mm = resolve(args.max_dist_mm, cfg, "max_dist_mm", 5.6f64)?;
    let seed = resolve(args.seed, cfg, "seed", 0u64)?;
    require_file(&dataset, "dataset")?;
    require_file(&params_path, "params file")?;
    if max_dist_mm < 0.0 {
        return Err(Error::InvalidInput("max distance must be non-negative".into()));
    }
    let model = super::load_model(&args.model, cfg, &mut manifest)?;

    let registry = LandmarkRegistry::standard();
    let records = read_dataset(&dataset, &registry)?;
    let params = read_params_file(&params_path)?;
    let by_key: HashMap<(String, String), usize> = params
        .iter()
        .enumerate()
        .map(|(i, p)| ((p.subject_id.clone(), p.pose_id.clone()), i))
        .collect();

    let noisy: Vec<Result<DatasetRecord>> = records
        .par_iter()
        .enumerate()
        .map(|(rec_idx, rec)| -> Result<DatasetRecord> {
            let key = (
                rec.landmarks.subject_id.clone(),
                rec.landmarks.pose_id.clone(),
            );
            let p_idx = *by_key.get(&key).ok_or_else(|| {
                Error::IdMismatch(format!(
                    "record {}/{} has no generation parameters",
                    key.0, key.1
                ))
            })?;
            let p = &params[p_idx];
            let mesh = pose_mesh(&model, &p.shape, &p.pose)?;
            let mut out_rec = rec.clone();
            for (lm_idx, point) in out_rec.landmarks.coords.iter_mut().enumerate() {
                let lm_seed = derive_seed(seed, "noise", &[rec_idx as u64, lm_idx as u64]);
                *point = perturb_landmark_on_surface(&mesh, point, max_dist_mm, lm_seed)?;
            }
            Ok(out_rec)
        })
        .collect();
    let noisy: Vec<DatasetRecord> = noisy.into_iter().collect::<Result<_>>()?;
    write_dataset(&out, &registry, &noisy)?;

    manifest.set("dataset", dataset.display());
    manifest.set("params", params_path.display());
    manifest.set("max_dist_mm", max_dist_mm);
    manifest.set("seed", seed);
    manifest.set("out", out.display());
    manifest.write_manifest(&out.with_extension("manifest"), "noise")?;
    println!(
        "noise: {} records perturbed up to {} mm -> {}",
        noisy.len(),
        max_dist_mm,
        out.display()
    );
    Ok(())
}
