//! Ground-truth measurement extraction on the A-pose mesh.

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::measurements::{MeasurementVector, NUM_MEASUREMENTS};
use crate::mesh::{loop_perimeter, plane_cross_section, Mesh};
use crate::registry::LandmarkRegistry;

use super::{BodyModel, MeasurementKind, ShapeParams};

/// Evaluates the 11 measurement definitions on the shaped A-pose mesh:
/// lengths are landmark distances, circumferences are perimeters of the
/// cross-section loop passing nearest the anchor landmark (the anchor lies on
/// the cut plane, so its own loop runs through it while loops on other body
/// parts stay far away), stature is the vertical mesh extent. All in
/// millimeters.
pub fn measure_ground_truth(model: &BodyModel, shape: &ShapeParams) -> Result<MeasurementVector> {
    let registry = LandmarkRegistry::standard();
    let shaped = model.shaped_template(shape)?;
    let mesh = Mesh {
        vertices: shaped,
        faces: model.faces.clone(),
    };
    let landmark_pos = |name: &str| -> Result<Point3<f64>> {
        let idx = registry.index_of(name)?;
        Ok(mesh.vertices[model.landmark_vertex_ids[idx]])
    };

    if model.measurement_defs.len() != NUM_MEASUREMENTS {
        return Err(Error::DimensionMismatch(format!(
            "model defines {} measurements, expected {NUM_MEASUREMENTS}",
            model.measurement_defs.len()
        )));
    }
    let mut values = [0.0f64; NUM_MEASUREMENTS];
    for (k, def) in model.measurement_defs.iter().enumerate() {
        values[k] = match def.kind {
            MeasurementKind::Length => {
                let a = landmark_pos(&def.anchors[0])?;
                let b = landmark_pos(&def.anchors[1])?;
                (a - b).norm()
            }
            MeasurementKind::Circumference => {
                let anchor = landmark_pos(&def.anchors[0])?;
                let section = plane_cross_section(&mesh, &anchor, &def.plane_normal)?;
                let li = section.nearest_loop_by_distance(&anchor);
                loop_perimeter(&section.loops[li])
            }
            MeasurementKind::Stature => {
                let (lo, hi) = mesh.bounds();
                hi.y - lo.y
            }
        };
    }
    MeasurementVector::new(values)
}
