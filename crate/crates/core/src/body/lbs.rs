//! Linear blend skinning and forward kinematics.
//!
//! Skinning uses the offset form `v' = v + sum_j w_vj * ((q_j (v - r_j) -
//! (v - r_j)) + o_j)` where `q_j` is the accumulated joint rotation, `r_j`
//! the rest joint position and `o_j = p_j - r_j` the posed joint offset.
//! Every term vanishes identically at rest, so the zero pose reproduces the
//! shaped template bit-for-bit.

use nalgebra::{Point3, UnitQuaternion, Vector3};

use crate::error::Result;
use crate::landmarks::LandmarkSet;
use crate::mesh::Mesh;
use crate::registry::NUM_LANDMARKS;

use super::{BodyModel, PoseParams, ShapeParams};

/// Accumulated world rotation and joint offset per joint.
pub(crate) struct JointTransforms {
    pub rotations: Vec<UnitQuaternion<f64>>,
    pub offsets: Vec<Vector3<f64>>,
}

pub(crate) fn forward_kinematics(model: &BodyModel, pose: &PoseParams) -> JointTransforms {
    let n = model.joints.len();
    let mut rotations = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    for (j, joint) in model.joints.iter().enumerate() {
        let local = UnitQuaternion::from_scaled_axis(pose.joint_rotations[j]);
        match joint.parent {
            None => {
                rotations.push(local);
                offsets.push(pose.root_translation);
            }
            Some(p) => {
                let delta = joint.rest - model.joints[p].rest;
                let q_parent: UnitQuaternion<f64> = rotations[p];
                let rotated = q_parent * delta;
                rotations.push(q_parent * local);
                offsets.push(offsets[p] + (rotated - delta));
            }
        }
    }
    JointTransforms { rotations, offsets }
}

pub(crate) fn skin_point(
    model: &BodyModel,
    transforms: &JointTransforms,
    vertex: usize,
    p: &Point3<f64>,
) -> Point3<f64> {
    let mut out = *p;
    for &(j, w) in &model.skin_weights[vertex] {
        let local = p - model.joints[j].rest;
        let moved = (transforms.rotations[j] * local - local) + transforms.offsets[j];
        out += moved * w;
    }
    out
}

/// Poses the shaped template with linear blend skinning.
pub fn pose_mesh(model: &BodyModel, shape: &ShapeParams, pose: &PoseParams) -> Result<Mesh> {
    pose.validate(model.num_joints())?;
    let shaped = model.shaped_template(shape)?;
    let transforms = forward_kinematics(model, pose);
    let vertices: Vec<Point3<f64>> = shaped
        .iter()
        .enumerate()
        .map(|(v, p)| skin_point(model, &transforms, v, p))
        .collect();
    Ok(Mesh {
        vertices,
        faces: model.faces.clone(),
    })
}

/// Posed positions of the 70 landmark vertices, in registry order. Equals
/// [`pose_mesh`] followed by a vertex gather, but only skins the landmark
/// vertices.
pub fn landmarks_of(
    model: &BodyModel,
    shape: &ShapeParams,
    pose: &PoseParams,
    subject_id: &str,
    pose_id: &str,
) -> Result<LandmarkSet> {
    pose.validate(model.num_joints())?;
    shape.validate(model.num_shape_coeffs())?;
    let transforms = forward_kinematics(model, pose);
    let mut coords = Vec::with_capacity(NUM_LANDMARKS);
    for &v in &model.landmark_vertex_ids {
        // Shape displacement for just this vertex.
        let mut p = model.template_vertices[v];
        for (c, &coeff) in shape.coeffs.iter().enumerate() {
            if coeff != 0.0 {
                p += model.shape_basis[c][v] * coeff;
            }
        }
        coords.push(skin_point(model, &transforms, v, &p));
    }
    LandmarkSet::new(coords, subject_id, pose_id)
}

/// The fitted shape posed back to the A-pose (zero rotations, zero
/// translation).
pub fn repose_to_apose(model: &BodyModel, shape: &ShapeParams) -> Result<Mesh> {
    pose_mesh(model, shape, &PoseParams::rest(model.num_joints()))
}
