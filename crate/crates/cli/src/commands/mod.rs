//! Subcommand implementations.

pub mod ambiguity;
pub mod baseline;
pub mod eval;
pub mod gen;
pub mod model;
pub mod noise;
pub mod predict;
pub mod select;
pub mod train;

use std::path::PathBuf;

use anthrokit_core::body::{make_default_model, BodyModel};
use anthrokit_core::error::Result;

use crate::config::{require_file, resolve, KvConfig};
use crate::ModelSource;

/// Resolves the body model (file wins over seed) and records the choice in
/// the manifest.
pub fn load_model(
    source: &ModelSource,
    cfg: &KvConfig,
    manifest: &mut KvConfig,
) -> Result<BodyModel> {
    let file: Option<PathBuf> = source
        .model_file
        .clone()
        .or_else(|| cfg.get("model_file").map(PathBuf::from));
    if let Some(path) = file {
        require_file(&path, "body model")?;
        manifest.set("model_file", path.display());
        return BodyModel::load(&path);
    }
    let seed = resolve(source.model_seed, cfg, "model_seed", 0u64)?;
    manifest.set("model_seed", seed);
    Ok(make_default_model(seed))
}
