//! Synthetic parametric articulated body model.
//!
//! A desk-scale stand-in for a statistical human body model: a template mesh
//! in the A-pose, a 16-joint skeleton deformed by linear blend skinning, a
//! linear shape basis, the 70 registry landmarks pinned to mesh vertices, and
//! constructive definitions of the 11 body measurements. It generates posed
//! landmark datasets with A-pose ground-truth measurements and supports the
//! fit-and-repose baseline.

mod build;
mod fit;
mod generate;
mod lbs;
mod measure;
mod serialize;

pub use build::make_default_model;
pub use fit::{fit_body_to_landmarks, FitResult};
pub use generate::{
    generate_dataset, sample_pose, sample_shape, GeneratedDataset, PoseFamily, PoseMix,
    RecordParams,
};
pub use lbs::{landmarks_of, pose_mesh, repose_to_apose};
pub use measure::measure_ground_truth;
pub use serialize::{read_params_file, write_params_file};

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::registry::NUM_LANDMARKS;

/// One skeleton joint: a rest position and a parent (None for the pelvis
/// root). Joints are stored parents-first.
#[derive(Debug, Clone)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    pub rest: Point3<f64>,
}

/// Number of skeleton joints.
pub const NUM_JOINTS: usize = 16;
/// Number of shape basis channels.
pub const NUM_SHAPE_COEFFS: usize = 8;

/// How a measurement is evaluated on the A-pose mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementKind {
    /// Perimeter of the cross-section loop nearest the anchor landmark.
    Circumference,
    /// Euclidean distance between two anchor landmarks.
    Length,
    /// Vertical (y) extent of the whole mesh.
    Stature,
}

impl MeasurementKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasurementKind::Circumference => "circumference",
            MeasurementKind::Length => "length",
            MeasurementKind::Stature => "stature",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "circumference" => Ok(MeasurementKind::Circumference),
            "length" => Ok(MeasurementKind::Length),
            "stature" => Ok(MeasurementKind::Stature),
            other => Err(Error::Parse(format!("unknown measurement kind {other:?}"))),
        }
    }
}

/// Constructive definition of one body measurement.
#[derive(Debug, Clone)]
pub struct MeasurementDef {
    pub name: String,
    pub kind: MeasurementKind,
    /// Landmark names: one height anchor for circumferences, two endpoints
    /// for lengths, none for stature.
    pub anchors: Vec<String>,
    /// Slicing plane normal in the A-pose frame (circumferences only).
    pub plane_normal: Vector3<f64>,
}

/// Synthetic articulated body model.
#[derive(Debug, Clone)]
pub struct BodyModel {
    /// A-pose template vertices (mm).
    pub template_vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub joints: Vec<Joint>,
    /// Sparse row-stochastic skin weights: per vertex, (joint, weight) pairs.
    pub skin_weights: Vec<Vec<(usize, f64)>>,
    /// Linear displacement basis: `shape_basis[channel][vertex]`.
    pub shape_basis: Vec<Vec<Vector3<f64>>>,
    /// Registry-ordered landmark vertex indices.
    pub landmark_vertex_ids: Vec<usize>,
    pub measurement_defs: Vec<MeasurementDef>,
    /// Seed the model was built from (provenance).
    pub build_seed: u64,
}

/// Pose: per-joint axis-angle rotations plus a root translation (mm).
#[derive(Debug, Clone, PartialEq)]
pub struct PoseParams {
    pub joint_rotations: Vec<Vector3<f64>>,
    pub root_translation: Vector3<f64>,
}

impl PoseParams {
    /// The A-pose: zero rotations, zero translation.
    pub fn rest(num_joints: usize) -> Self {
        PoseParams {
            joint_rotations: vec![Vector3::zeros(); num_joints],
            root_translation: Vector3::zeros(),
        }
    }

    pub fn validate(&self, num_joints: usize) -> Result<()> {
        if self.joint_rotations.len() != num_joints {
            return Err(Error::DimensionMismatch(format!(
                "pose has {} joint rotations, model has {num_joints} joints",
                self.joint_rotations.len()
            )));
        }
        for (i, r) in self.joint_rotations.iter().enumerate() {
            if !(r.x.is_finite() && r.y.is_finite() && r.z.is_finite()) {
                return Err(Error::NonFinite(format!("rotation of joint {i}")));
            }
            if r.norm() > std::f64::consts::PI + 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "axis-angle norm {} of joint {i} exceeds pi",
                    r.norm()
                )));
            }
        }
        if !(self.root_translation.x.is_finite()
            && self.root_translation.y.is_finite()
            && self.root_translation.z.is_finite())
        {
            return Err(Error::NonFinite("root translation".into()));
        }
        Ok(())
    }
}

/// Shape: coefficients of the linear displacement basis (dimensionless).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeParams {
    pub coeffs: Vec<f64>,
}

impl ShapeParams {
    pub fn zeros(num_coeffs: usize) -> Self {
        ShapeParams {
            coeffs: vec![0.0; num_coeffs],
        }
    }

    pub fn validate(&self, num_coeffs: usize) -> Result<()> {
        if self.coeffs.len() != num_coeffs {
            return Err(Error::DimensionMismatch(format!(
                "shape has {} coeffs, model has {num_coeffs}",
                self.coeffs.len()
            )));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("shape coefficients".into()));
        }
        Ok(())
    }
}

impl BodyModel {
    pub fn num_vertices(&self) -> usize {
        self.template_vertices.len()
    }

    pub fn num_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn num_shape_coeffs(&self) -> usize {
        self.shape_basis.len()
    }

    /// Template vertices displaced by the shape basis. Zero coefficients are
    /// skipped so a zero shape reproduces the template bit-for-bit.
    pub fn shaped_template(&self, shape: &ShapeParams) -> Result<Vec<Point3<f64>>> {
        shape.validate(self.num_shape_coeffs())?;
        let mut verts = self.template_vertices.clone();
        for (c, &coeff) in shape.coeffs.iter().enumerate() {
            if coeff == 0.0 {
                continue;
            }
            let channel = &self.shape_basis[c];
            for (v, p) in verts.iter_mut().enumerate() {
                *p += channel[v] * coeff;
            }
        }
        Ok(verts)
    }

    /// Landmark pairs whose vertices are rigidly bound to the same single
    /// joint; their distance is pose-invariant by construction.
    pub fn rigid_landmark_pairs(&self) -> Vec<(usize, usize)> {
        let single_joint = |v: usize| -> Option<usize> {
            let row = &self.skin_weights[v];
            if row.len() == 1 && (row[0].1 - 1.0).abs() < 1e-12 {
                Some(row[0].0)
            } else {
                None
            }
        };
        let joints: Vec<Option<usize>> = self
            .landmark_vertex_ids
            .iter()
            .map(|&v| single_joint(v))
            .collect();
        let mut pairs = Vec::new();
        for i in 0..NUM_LANDMARKS {
            for j in i + 1..NUM_LANDMARKS {
                if let (Some(a), Some(b)) = (joints[i], joints[j]) {
                    if a == b {
                        pairs.push((i, j));
                    }
                }
            }
        }
        pairs
    }

    /// Checks the structural invariants: row-stochastic non-negative skin
    /// weights, a parents-first joint tree rooted at joint 0, and valid,
    /// distinct landmark vertices.
    pub fn validate(&self) -> Result<()> {
        let v = self.num_vertices();
        if self.skin_weights.len() != v {
            return Err(Error::DimensionMismatch(format!(
                "{} skin weight rows for {v} vertices",
                self.skin_weights.len()
            )));
        }
        for (i, row) in self.skin_weights.iter().enumerate() {
            let sum: f64 = row.iter().map(|&(_, w)| w).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "skin weight row {i} sums to {sum}, expected 1"
                )));
            }
            if row.iter().any(|&(j, w)| j >= self.num_joints() || w < 0.0) {
                return Err(Error::InvalidInput(format!("bad skin weight entry in row {i}")));
            }
        }
        if self.joints.is_empty() || self.joints[0].parent.is_some() {
            return Err(Error::InvalidInput("joint 0 must be the root".into()));
        }
        for (j, joint) in self.joints.iter().enumerate().skip(1) {
            match joint.parent {
                Some(p) if p < j => {}
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "joint {j} ({}) must have a parent earlier in the list",
                        joint.name
                    )))
                }
            }
        }
        if self.landmark_vertex_ids.len() != NUM_LANDMARKS {
            return Err(Error::DimensionMismatch(format!(
                "{} landmark vertices, expected {NUM_LANDMARKS}",
                self.landmark_vertex_ids.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &id in &self.landmark_vertex_ids {
            if id >= v {
                return Err(Error::InvalidInput(format!("landmark vertex {id} out of range")));
            }
            if !seen.insert(id) {
                return Err(Error::InvalidInput(format!("landmark vertex {id} duplicated")));
            }
        }
        for f in &self.faces {
            if f.iter().any(|&i| i >= v) {
                return Err(Error::InvalidInput("face references missing vertex".into()));
            }
        }
        for basis in &self.shape_basis {
            if basis.len() != v {
                return Err(Error::DimensionMismatch(
                    "shape basis channel length mismatch".into(),
                ));
            }
        }
        Ok(())
    }
}
