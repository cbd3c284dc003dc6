//! `gen`: synthetic dataset generation with a subject-level train/test
//! split.

use std::path::PathBuf;

use anthrokit_core::body::{generate_dataset, write_params_file, PoseMix};
use anthrokit_core::dataset::write_dataset;
use anthrokit_core::error::{Error, Result};
use anthrokit_core::registry::LandmarkRegistry;

use crate::config::{resolve, KvConfig};
use crate::GenArgs;

fn parse_mix(raw: &str) -> Result<PoseMix> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "pose mix needs 3 comma-separated fractions, got {raw:?}"
        )));
    }
    // Accept both decimals and simple fractions like 1/12.
    let parse_frac = |t: &str| -> Result<f64> {
        if let Some((num, den)) = t.split_once('/') {
            let n: f64 = num
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad fraction {t:?}")))?;
            let d: f64 = den
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad fraction {t:?}")))?;
            Ok(n / d)
        } else {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad fraction {t:?}")))
        }
    };
    Ok(PoseMix {
        standing: parse_frac(parts[0])?,
        sitting: parse_frac(parts[1])?,
        varied: parse_frac(parts[2])?,
    })
}

pub fn run(args: GenArgs, cfg: &KvConfig) -> Result<()> {
    let mut manifest = KvConfig::new();
    let out_dir: PathBuf = args
        .out_dir
        .or_else(|| cfg.get("out_dir").map(PathBuf::from))
        .ok_or_else(|| Error::InvalidInput("missing required parameter: --out-dir".into()))?;
    let subjects = resolve(args.subjects, cfg, "subjects", 50usize)?;
    let poses_per_subject = resolve(args.poses_per_subject, cfg, "poses_per_subject", 40usize)?;
    let mix_raw = args
        .pose_mix
        .or_else(|| cfg.get("pose_mix").map(|s| s.to_string()))
        .unwrap_or_else(|| "1/12,1/12,10/12".to_string());
    let mix = parse_mix(&mix_raw)?;
    let test_fraction = resolve(args.test_fraction, cfg, "test_fraction", 0.2f64)?;
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidInput(format!(
            "test fraction must lie in [0, 1), got {test_fraction}"
        )));
    }
    let seed = resolve(args.seed, cfg, "seed", 0u64)?;
    let model = super::load_model(&args.model, cfg, &mut manifest)?;

    manifest.set("out_dir", out_dir.display());
    manifest.set("subjects", subjects);
    manifest.set("poses_per_subject", poses_per_subject);
    manifest.set("pose_mix", &mix_raw);
    manifest.set("test_fraction", test_fraction);
    manifest.set("seed", seed);

    std::fs::create_dir_all(&out_dir)?;
    let data = generate_dataset(&model, subjects, poses_per_subject, &mix, seed)?;

    // Subject-level split: the last ceil(fraction * subjects) subject ids go
    // to the test set.
    let n_test = ((test_fraction * subjects as f64).ceil() as usize).min(subjects.saturating_sub(1));
    let split_id = format!("s{:04}", subjects - n_test);
    let registry = LandmarkRegistry::standard();
    let train: Vec<_> = data
        .records
        .iter()
        .filter(|r| r.landmarks.subject_id < split_id)
        .cloned()
        .collect();
    let test: Vec<_> = data
        .records
        .iter()
        .filter(|r| r.landmarks.subject_id >= split_id)
        .cloned()
        .collect();
    write_dataset(&out_dir.join("train.tsv"), &registry, &train)?;
    write_dataset(&out_dir.join("test.tsv"), &registry, &test)?;
    write_dataset(&out_dir.join("apose.tsv"), &registry, &data.apose_records)?;
    write_params_file(&out_dir.join("params.tsv"), &data.params)?;

    manifest.set("n_train_records", train.len());
    manifest.set("n_test_records", test.len());
    manifest.write_manifest(&out_dir.join("gen.manifest"), "gen")?;
    println!(
        "gen: {} train + {} test records ({} subjects x {} poses, seed {}) -> {}",
        train.len(),
        test.len(),
        subjects,
        poses_per_subject,
        seed,
        out_dir.display()
    );
    Ok(())
}
