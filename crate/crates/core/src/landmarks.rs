//! Landmark sets and pelvis-frame coordinate normalization.
//!
//! Normalization removes the rigid placement of a subject: the pelvis anchor
//! triangle (Middle Psis, Lt. Asis, Rt. Asis) is moved to the origin, its
//! normal aligned with +y (sign picked so the Nuchale landmark lies on the
//! positive side), and the landmarks rotated about y until Rt. Asis sits on
//! the +z half-axis. Two landmark sets of the same body in the same pose then
//! coincide no matter how the subject was placed in the scanner.

use nalgebra::{Matrix3, Point3, Unit, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::registry::{LandmarkRegistry, NUM_LANDMARKS};

/// 70 named 3D points (millimeters) for one subject in one pose, ordered per
/// [`LandmarkRegistry`].
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    pub coords: Vec<Point3<f64>>,
    pub subject_id: String,
    pub pose_id: String,
}

impl LandmarkSet {
    /// Builds a landmark set, enforcing the length invariant. Coordinates may
    /// be non-finite here (missing landmarks parse to NaN); operations that
    /// require finite data reject them with [`Error::NonFinite`].
    pub fn new(coords: Vec<Point3<f64>>, subject_id: &str, pose_id: &str) -> Result<Self> {
        if coords.len() != NUM_LANDMARKS {
            return Err(Error::DimensionMismatch(format!(
                "landmark set has {} points, expected {}",
                coords.len(),
                NUM_LANDMARKS
            )));
        }
        Ok(LandmarkSet {
            coords,
            subject_id: subject_id.to_string(),
            pose_id: pose_id.to_string(),
        })
    }

    pub fn all_finite(&self) -> bool {
        self.coords
            .iter()
            .all(|p| p.x.is_finite() && p.y.is_finite() && p.z.is_finite())
    }

    fn ensure_finite(&self) -> Result<()> {
        for (i, p) in self.coords.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "landmark {i} of subject {:?} pose {:?}",
                    self.subject_id, self.pose_id
                )));
            }
        }
        Ok(())
    }
}

/// Rigid transform (rotation then translation, millimeters) mapping raw
/// landmarks into the normalized pelvis frame.
#[derive(Debug, Clone)]
pub struct PelvisFrame {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl PelvisFrame {
    pub fn identity() -> Self {
        PelvisFrame {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    /// Max absolute entry of RᵀR − I; zero for a perfect rotation.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.rotation.transpose() * self.rotation - Matrix3::identity();
        d.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Minimum pelvis triangle area; below this the anchors are collinear.
pub const MIN_TRIANGLE_AREA_MM2: f64 = 1e-6;
/// Minimum xz-projection norm of Rt. Asis for the y-rotation to be defined.
const MIN_ASIS_XZ_NORM_MM: f64 = 1e-6;
/// Nuchale closer than this to the triangle plane cannot disambiguate the
/// normal sign; treated as corrupt data.
const MIN_NUCHALE_OFFSET_MM: f64 = 1e-9;

/// Quaternion rotating unit vector `from` onto unit vector `to`, with a
/// deterministic 180-degree fallback for anti-parallel inputs.
fn rotation_between_units(from: &Vector3<f64>, to: &Vector3<f64>) -> UnitQuaternion<f64> {
    let dot = from.dot(to);
    if dot < -1.0 + 1e-12 {
        // Anti-parallel: rotate pi about any axis perpendicular to `from`.
        let axis = if from.x.abs() < 0.9 {
            Vector3::x().cross(from)
        } else {
            Vector3::z().cross(from)
        };
        return UnitQuaternion::from_axis_angle(&Unit::new_normalize(axis), std::f64::consts::PI);
    }
    UnitQuaternion::rotation_between(from, to)
        .unwrap_or_else(UnitQuaternion::identity)
}

/// Normalizes a landmark set into the pelvis frame.
///
/// Returns the transformed landmarks and the rigid transform that realizes
/// them (`frame.apply(input[i]) == output[i]` bit-for-bit).
pub fn normalize(
    landmarks: &LandmarkSet,
    registry: &LandmarkRegistry,
) -> Result<(LandmarkSet, PelvisFrame)> {
    landmarks.ensure_finite()?;
    let anchors = registry.pelvis_anchors()?;

    let lt_psis = landmarks.coords[anchors.lt_psis];
    let rt_psis = landmarks.coords[anchors.rt_psis];
    let lt_asis = landmarks.coords[anchors.lt_asis];
    let rt_asis = landmarks.coords[anchors.rt_asis];
    let nuchale = landmarks.coords[anchors.nuchale];

    let middle_psis = Point3::from((lt_psis.coords + rt_psis.coords) * 0.5);

    // Triangle {Middle Psis, Lt. Asis, Rt. Asis}.
    let e1 = lt_asis - middle_psis;
    let e2 = rt_asis - middle_psis;
    let cross = e1.cross(&e2);
    let area = 0.5 * cross.norm();
    if area < MIN_TRIANGLE_AREA_MM2 {
        return Err(Error::DegeneratePelvis(format!(
            "pelvis triangle area {area:.3e} mm^2 below {MIN_TRIANGLE_AREA_MM2:.0e}"
        )));
    }

    let centroid = Point3::from((middle_psis.coords + lt_asis.coords + rt_asis.coords) / 3.0);

    // Normal sign: Nuchale must lie on the positive side.
    let mut normal = cross / cross.norm();
    let nuchale_offset = (nuchale - centroid).dot(&normal);
    if nuchale_offset.abs() < MIN_NUCHALE_OFFSET_MM {
        return Err(Error::DegeneratePelvis(
            "Nuchale lies in the pelvis triangle plane; normal sign undefined".to_string(),
        ));
    }
    if nuchale_offset < 0.0 {
        normal = -normal;
    }

    // Step 1: rotate the triangle normal onto +y.
    let r1 = rotation_between_units(&normal, &Vector3::y());

    // Step 2: rotate about y so Rt. Asis lands on the +z half-axis.
    let ra = r1 * (rt_asis - centroid);
    let xz_norm = (ra.x * ra.x + ra.z * ra.z).sqrt();
    if xz_norm < MIN_ASIS_XZ_NORM_MM {
        return Err(Error::DegeneratePelvis(format!(
            "Rt. Asis xz-projection norm {xz_norm:.3e} mm below {MIN_ASIS_XZ_NORM_MM:.0e}"
        )));
    }
    let angle = -ra.x.atan2(ra.z);
    let r2 = UnitQuaternion::from_axis_angle(&Unit::new_unchecked(Vector3::y()), angle);

    let rotation = (r2 * r1).to_rotation_matrix().into_inner();
    let translation = -(rotation * centroid.coords);
    let frame = PelvisFrame {
        rotation,
        translation,
    };

    let coords: Vec<Point3<f64>> = landmarks.coords.iter().map(|p| frame.apply(p)).collect();
    let normalized = LandmarkSet {
        coords,
        subject_id: landmarks.subject_id.clone(),
        pose_id: landmarks.pose_id.clone(),
    };
    Ok((normalized, frame))
}

/// Unravels the landmark coordinates into a `70 * 3 = 210` element vector,
/// `out[3i..3i+3] = (x, y, z)` of landmark `i`.
pub fn flatten(landmarks: &LandmarkSet) -> Vec<f64> {
    let mut out = Vec::with_capacity(NUM_LANDMARKS * 3);
    for p in &landmarks.coords {
        out.push(p.x);
        out.push(p.y);
        out.push(p.z);
    }
    out
}

/// Inverse of [`flatten`].
pub fn unflatten(values: &[f64], subject_id: &str, pose_id: &str) -> Result<LandmarkSet> {
    if values.len() != NUM_LANDMARKS * 3 {
        return Err(Error::DimensionMismatch(format!(
            "expected {} values, got {}",
            NUM_LANDMARKS * 3,
            values.len()
        )));
    }
    let coords = values
        .chunks_exact(3)
        .map(|c| Point3::new(c[0], c[1], c[2]))
        .collect();
    LandmarkSet::new(coords, subject_id, pose_id)
}
