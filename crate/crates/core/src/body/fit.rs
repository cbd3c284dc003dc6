//! Fitting the body model to observed posed landmarks.
//!
//! First-order minimization (Adam, central-difference gradients) of the mean
//! squared landmark distance over shape, pose and root translation. Rotations
//! are optimized in radians, the translation in decimeter-scale units so one
//! learning rate suits all parameter groups. Non-convergence is not an error:
//! the final RMS residual is reported and the caller decides.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::landmarks::LandmarkSet;
use crate::optim::{minimize, numeric_gradient, OptimConfig};
use crate::registry::NUM_LANDMARKS;

use super::lbs::{forward_kinematics, skin_point};
use super::{BodyModel, PoseParams, ShapeParams};

/// Millimeters per internal translation unit.
const TRANSLATION_SCALE: f64 = 100.0;

/// Outcome of a landmark fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub shape: ShapeParams,
    pub pose: PoseParams,
    /// Root-mean-square landmark distance (mm).
    pub residual_mm: f64,
    pub iterations: usize,
}

fn pack(model: &BodyModel, shape: &ShapeParams, pose: &PoseParams) -> Vec<f64> {
    let j = model.num_joints();
    let mut x = Vec::with_capacity(j * 3 + 3 + model.num_shape_coeffs());
    for r in &pose.joint_rotations {
        x.extend_from_slice(&[r.x, r.y, r.z]);
    }
    let t = pose.root_translation / TRANSLATION_SCALE;
    x.extend_from_slice(&[t.x, t.y, t.z]);
    x.extend_from_slice(&shape.coeffs);
    x
}

fn unpack(model: &BodyModel, x: &[f64]) -> (ShapeParams, PoseParams) {
    let j = model.num_joints();
    let mut pose = PoseParams::rest(j);
    for k in 0..j {
        pose.joint_rotations[k] = Vector3::new(x[3 * k], x[3 * k + 1], x[3 * k + 2]);
    }
    pose.root_translation =
        Vector3::new(x[3 * j], x[3 * j + 1], x[3 * j + 2]) * TRANSLATION_SCALE;
    let shape = ShapeParams {
        coeffs: x[3 * j + 3..].to_vec(),
    };
    (shape, pose)
}

/// Mean squared landmark distance (mm^2) for packed parameters. Rotations are
/// evaluated as given (no norm clamp); the optimizer stays well inside +-pi
/// for realistic inputs.
fn objective(model: &BodyModel, observed: &[Vector3<f64>], x: &[f64]) -> f64 {
    let (shape, pose) = unpack(model, x);
    let transforms = forward_kinematics(model, &pose);
    let mut total = 0.0;
    for (i, &v) in model.landmark_vertex_ids.iter().enumerate() {
        let mut p = model.template_vertices[v];
        for (c, &coeff) in shape.coeffs.iter().enumerate() {
            if coeff != 0.0 {
                p += model.shape_basis[c][v] * coeff;
            }
        }
        let posed = skin_point(model, &transforms, v, &p);
        total += (posed.coords - observed[i]).norm_squared();
    }
    total / NUM_LANDMARKS as f64
}

/// Fits shape, pose and root translation to observed landmarks, starting
/// from `init`. Deterministic given the config and initialization.
pub fn fit_body_to_landmarks(
    model: &BodyModel,
    observed: &LandmarkSet,
    init: (&ShapeParams, &PoseParams),
    config: &OptimConfig,
) -> Result<FitResult> {
    if !observed.all_finite() {
        return Err(Error::NonFinite("observed landmarks".into()));
    }
    init.0.validate(model.num_shape_coeffs())?;
    init.1.validate(model.num_joints())?;
    if config.max_iters == 0 || config.learning_rate <= 0.0 {
        return Err(Error::InvalidInput(
            "fit config needs positive iteration and step bounds".into(),
        ));
    }
    let observed_v: Vec<Vector3<f64>> = observed.coords.iter().map(|p| p.coords).collect();

    let x0 = pack(model, init.0, init.1);
    let steps = vec![1e-6; x0.len()];
    let f = |x: &[f64]| objective(model, &observed_v, x);
    let g = |x: &[f64], out: &mut [f64]| numeric_gradient(&f, x, &steps, out);
    let outcome = minimize(f, g, x0, config);

    let (shape, pose) = unpack(model, &outcome.params);
    Ok(FitResult {
        shape,
        pose,
        residual_mm: outcome.objective.max(0.0).sqrt(),
        iterations: outcome.iterations,
    })
}
