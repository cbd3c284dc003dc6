//! anthrokit-core — pose-independent body measurement estimation from sparse
//! 3D landmarks.
//!
//! The pipeline stages are:
//!
//! 1. **Landmarks** — the canonical 70-landmark registry and the pelvis-frame
//!    normalization that removes rigid placement.
//! 2. **Features** — pose-independent landmark-pair distances selected by
//!    median deviation from the A-pose reference across many poses.
//! 3. **Regressor** — a from-scratch MLP mapping the 210 normalized
//!    coordinates plus selected distances to 11 body measurements.
//! 4. **Synthetic body** — an articulated parametric body (skeleton, linear
//!    blend skinning, linear shape basis) generating posed landmark datasets
//!    with ground-truth A-pose measurements, and the fit-and-repose baseline.
//! 5. **Mesh** — plane cross-sections for circumference measurement and
//!    on-surface landmark perturbation for noise studies.
//! 6. **Analysis** — the landmark/measurement ambiguity sweep and the
//!    MAE / sequence-deviation metrics.

pub mod analysis;
pub mod body;
pub mod dataset;
pub mod error;
pub mod features;
pub mod landmarks;
pub mod measurements;
pub mod mesh;
pub mod mlp;
pub mod optim;
pub mod registry;
pub mod rng;

pub use error::{Error, Result};
