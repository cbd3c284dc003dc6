//! `eval`: per-measurement MAE + aMAE against ground truth, or the
//! per-measurement deviation of a frame sequence from its first frame.

use std::collections::HashMap;
use std::path::PathBuf;

use anthrokit_core::analysis::{mae, sequence_std, EvalReport, LabeledMeasurements};
use anthrokit_core::dataset::read_dataset;
use anthrokit_core::error::{Error, Result};
use anthrokit_core::registry::LandmarkRegistry;

use crate::config::{require_file, resolve_required, KvConfig};
use crate::predictions::read_predictions;
use crate::EvalArgs;

pub fn run(args: EvalArgs, cfg: &KvConfig) -> Result<()> {
    let mut manifest = KvConfig::new();
    let pred: PathBuf = resolve_required(args.pred, cfg, "pred")?;
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    let mode = args
        .mode
        .or_else(|| cfg.get("mode").map(|s| s.to_string()))
        .unwrap_or_else(|| "static".to_string());
    require_file(&pred, "predictions")?;

    let rows = read_predictions(&pred)?;
    if rows.is_empty() {
        return Err(Error::InvalidInput("predictions file has no rows".into()));
    }

    let report: EvalReport = match mode.as_str() {
        "static" => {
            let truth_path: PathBuf = resolve_required(args.truth, cfg, "truth")?;
            require_file(&truth_path, "ground-truth dataset")?;
            manifest.set("truth", truth_path.display());
            let registry = LandmarkRegistry::standard();
            let truth_records = read_dataset(&truth_path, &registry)?;
            let mut by_subject = HashMap::new();
            for rec in &truth_records {
                if let Some(m) = &rec.measurements {
                    by_subject
                        .entry(rec.landmarks.subject_id.clone())
                        .or_insert((m.clone(), rec.sex));
                }
            }
            let mut gt = Vec::with_capacity(rows.len());
            let mut est = Vec::with_capacity(rows.len());
            for row in &rows {
                let (truth, sex) = by_subject.get(&row.subject_id).ok_or_else(|| {
                    Error::IdMismatch(format!(
                        "subject {:?} has no ground truth in {}",
                        row.subject_id,
                        truth_path.display()
                    ))
                })?;
                gt.push(LabeledMeasurements {
                    subject_id: row.subject_id.clone(),
                    sex: *sex,
                    values: truth.clone(),
                });
                est.push(LabeledMeasurements {
                    subject_id: row.subject_id.clone(),
                    sex: *sex,
                    values: row.values.clone(),
                });
            }
            mae(&gt, &est)?
        }
        "sequence" => {
            let frames: Vec<_> = rows.iter().map(|r| r.values.clone()).collect();
            let stds = sequence_std(&frames)?;
            EvalReport::from_sequence(stds, frames.len())
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown eval mode {other:?} (use static or sequence)"
            )))
        }
    };

    let csv_path = out.with_extension("csv");
    let txt_path = out.with_extension("txt");
    report.write_csv(&csv_path)?;
    report.write_text(&txt_path)?;

    manifest.set("pred", pred.display());
    manifest.set("mode", &mode);
    manifest.set("out", out.display());
    manifest.write_manifest(&out.with_extension("manifest"), "eval")?;
    match report.amae_mm {
        Some(amae) => println!(
            "eval: {} rows, aMAE {:.2} mm -> {} / {}",
            report.n,
            amae,
            csv_path.display(),
            txt_path.display()
        ),
        None => println!(
            "eval: {} frames, sequence deviation -> {} / {}",
            report.n,
            csv_path.display(),
            txt_path.display()
        ),
    }
    Ok(())
}
