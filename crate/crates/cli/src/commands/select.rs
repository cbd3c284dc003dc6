//! `select`: pose-independent feature selection from a single subject's
//! posed samples.

use std::path::PathBuf;

use anthrokit_core::dataset::read_dataset;
use anthrokit_core::error::{Error, Result};
use anthrokit_core::features::{select_features_with, SelectOptions};
use anthrokit_core::registry::LandmarkRegistry;

use crate::config::{require_file, resolve, resolve_required, KvConfig};
use crate::SelectArgs;

pub fn run(args: SelectArgs, cfg: &KvConfig) -> Result<()> {
    let mut manifest = KvConfig::new();
    let poses: PathBuf = resolve_required(args.poses, cfg, "poses")?;
    let reference: PathBuf = resolve_required(args.reference, cfg, "reference")?;
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    let threshold_mm = resolve(args.threshold_mm, cfg, "threshold_mm", 10.0f64)?;
    let allow_multi = args.allow_multi_subject
        || cfg.get("allow_multi_subject").map(|v| v == "true").unwrap_or(false);
    let memory_cap = resolve(
        args.memory_cap_values,
        cfg,
        "memory_cap_values",
        SelectOptions::default().memory_cap_values,
    )?;
    require_file(&poses, "posed samples dataset")?;
    require_file(&reference, "reference dataset")?;

    let registry = LandmarkRegistry::standard();
    let mut samples = read_dataset(&poses, &registry)?;
    if samples.is_empty() {
        return Err(Error::EmptyStream);
    }
    let subject_filter = args
        .subject
        .or_else(|| cfg.get("subject").map(|s| s.to_string()));
    let subject = match &subject_filter {
        Some(id) => {
            samples.retain(|r| &r.landmarks.subject_id == id);
            if samples.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "no posed samples for subject {id:?} in {}",
                    poses.display()
                )));
            }
            id.clone()
        }
        None => samples[0].landmarks.subject_id.clone(),
    };
    let multi = samples
        .iter()
        .any(|r| r.landmarks.subject_id != subject);
    if multi {
        if allow_multi {
            eprintln!(
                "warning: posed samples span multiple subjects; the selection \
                 procedure is defined over a single subject's poses"
            );
        } else {
            return Err(Error::InvalidInput(
                "posed samples span multiple subjects (use --subject to pick one \
                 or --allow-multi-subject to override)"
                    .into(),
            ));
        }
    }

    let reference_subject = args
        .reference_subject
        .or_else(|| cfg.get("reference_subject").map(|s| s.to_string()))
        .unwrap_or_else(|| subject.clone());
    let refs = read_dataset(&reference, &registry)?;
    let reference_set = refs
        .iter()
        .find(|r| r.landmarks.subject_id == reference_subject)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "reference subject {reference_subject:?} not found in {}",
                reference.display()
            ))
        })?
        .landmarks
        .clone();

    let options = SelectOptions {
        memory_cap_values: memory_cap,
        spill_dir: None,
    };
    let mut selection = select_features_with(
        &reference_set,
        samples.into_iter().map(|r| Ok(r.landmarks)),
        threshold_mm,
        &options,
    )?;
    let max_pairs = args
        .max_pairs
        .or_else(|| cfg.get("max_pairs").and_then(|v| v.parse().ok()));
    if let Some(k) = max_pairs {
        selection = selection.truncated(k);
        manifest.set("max_pairs", k);
    }
    selection.save(&out)?;

    manifest.set("poses", poses.display());
    manifest.set("subject", &subject);
    manifest.set("reference", reference.display());
    manifest.set("reference_subject", &reference_subject);
    manifest.set("threshold_mm", threshold_mm);
    manifest.set("allow_multi_subject", allow_multi);
    manifest.set("memory_cap_values", memory_cap);
    manifest.set("out", out.display());
    manifest.set("n_poses", selection.n_poses);
    manifest.set("n_selected_pairs", selection.pairs.len());
    manifest.write_manifest(&out.with_extension("manifest"), "select")?;
    println!(
        "select: {} of 2415 pairs at threshold {} mm over {} poses -> {}",
        selection.pairs.len(),
        threshold_mm,
        selection.n_poses,
        out.display()
    );
    Ok(())
}
