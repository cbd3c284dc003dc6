//! `ambiguity`: optimize the shape direction with minimal landmark motion
//! and sweep measurement error against landmark displacement.

use std::path::PathBuf;

use anthrokit_core::analysis::{optimize_ambiguity_direction, sweep_ambiguity};
use anthrokit_core::body::ShapeParams;
use anthrokit_core::error::{Error, Result};
use anthrokit_core::optim::OptimConfig;

use crate::config::{resolve, resolve_required, KvConfig};
use crate::AmbiguityArgs;

pub fn run(args: AmbiguityArgs, cfg: &KvConfig) -> Result<()> {
    let mut manifest = KvConfig::new();
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    let k_max = resolve(args.k_max, cfg, "k_max", 25.0f64)?;
    let k_steps = resolve(args.k_steps, cfg, "k_steps", 51usize)?;
    let seed = resolve(args.seed, cfg, "seed", 0u64)?;
    let restarts = resolve(args.restarts, cfg, "restarts", 5usize)?;
    let max_iters = resolve(args.max_iters, cfg, "max_iters", 5000usize)?;
    if k_steps < 2 || k_max <= 0.0 {
        return Err(Error::InvalidInput(
            "need k_max > 0 and at least 2 k steps".into(),
        ));
    }
    let model = super::load_model(&args.model, cfg, &mut manifest)?;

    let beta_raw = args
        .beta_ref
        .or_else(|| cfg.get("beta_ref").map(|s| s.to_string()))
        .unwrap_or_else(|| {
            vec!["0"; model.num_shape_coeffs()].join(",")
        });
    let beta_ref = ShapeParams {
        coeffs: beta_raw
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad shape coefficient {t:?}")))
            })
            .collect::<Result<_>>()?,
    };

    let optim = OptimConfig {
        max_iters,
        learning_rate: 0.01,
        rel_tol: 1e-10,
        seed,
        restarts,
    };
    let (delta, objective) = optimize_ambiguity_direction(&model, &beta_ref, &optim)?;
    let k_values: Vec<f64> = (0..k_steps)
        .map(|i| k_max * i as f64 / (k_steps - 1) as f64)
        .collect();
    let curve = sweep_ambiguity(&model, &beta_ref, &delta, objective, &k_values)?;
    curve.write_csv(&out)?;

    manifest.set("out", out.display());
    manifest.set("beta_ref", &beta_raw);
    manifest.set("k_max", k_max);
    manifest.set("k_steps", k_steps);
    manifest.set("seed", seed);
    manifest.set("restarts", restarts);
    manifest.set("max_iters", max_iters);
    manifest.set("objective", objective);
    manifest.set(
        "delta",
        delta
            .coeffs
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.write_manifest(&out.with_extension("manifest"), "ambiguity")?;
    let final_dist = curve.max_landmark_dist_mm.last().copied().unwrap_or(0.0);
    println!(
        "ambiguity: objective {:.4}, max landmark distance {:.2} mm at k={k_max} -> {}",
        objective,
        final_dist,
        out.display()
    );
    Ok(())
}
