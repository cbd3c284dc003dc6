//! `model`: export the synthetic body model file for a seed.

use std::path::PathBuf;

use anthrokit_core::body::make_default_model;
use anthrokit_core::error::Result;

use crate::config::{resolve, resolve_required, KvConfig};
use crate::ModelArgs;

pub fn run(args: ModelArgs, cfg: &KvConfig) -> Result<()> {
    let mut manifest = KvConfig::new();
    let out: PathBuf = resolve_required(args.out, cfg, "out")?;
    let seed = resolve(args.seed, cfg, "seed", 0u64)?;
    let model = make_default_model(seed);
    model.save(&out)?;
    manifest.set("seed", seed);
    manifest.set("out", out.display());
    manifest.write_manifest(&out.with_extension("manifest"), "model")?;
    println!(
        "model: seed {} ({} vertices, {} faces) -> {}",
        seed,
        model.num_vertices(),
        model.faces.len(),
        out.display()
    );
    Ok(())
}
