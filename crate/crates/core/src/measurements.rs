//! The 11 named body measurements.

use crate::error::{Error, Result};

/// Number of body measurements.
pub const NUM_MEASUREMENTS: usize = 11;

/// Measurement names in canonical order. C. = circumference, H. = height,
/// L. = length.
pub const MEASUREMENT_NAMES: [&str; NUM_MEASUREMENTS] = [
    "Ankle C.",
    "Shoulder-elbow L.",
    "Shoulder-wrist L.",
    "Spine-wrist L.",
    "Chest C.",
    "Crotch H.",
    "Head C.",
    "Hip C. H.",
    "Hip C.",
    "Neck base C.",
    "Stature",
];

/// 11 scalar body measurements in millimeters, ordered per
/// [`MEASUREMENT_NAMES`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    pub values_mm: [f64; NUM_MEASUREMENTS],
}

impl MeasurementVector {
    pub fn new(values_mm: [f64; NUM_MEASUREMENTS]) -> Result<Self> {
        if values_mm.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("measurement vector".to_string()));
        }
        Ok(MeasurementVector { values_mm })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() != NUM_MEASUREMENTS {
            return Err(Error::DimensionMismatch(format!(
                "expected {} measurements, got {}",
                NUM_MEASUREMENTS,
                values.len()
            )));
        }
        let mut arr = [0.0; NUM_MEASUREMENTS];
        arr.copy_from_slice(values);
        MeasurementVector::new(arr)
    }

    /// Value by measurement name.
    pub fn get(&self, name: &str) -> Option<f64> {
        MEASUREMENT_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values_mm[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_fixed_order() {
        assert_eq!(MEASUREMENT_NAMES[0], "Ankle C.");
        assert_eq!(MEASUREMENT_NAMES[10], "Stature");
        assert_eq!(MEASUREMENT_NAMES.len(), 11);
    }

    #[test]
    fn non_finite_rejected() {
        let mut v = [0.0; NUM_MEASUREMENTS];
        v[3] = f64::INFINITY;
        assert!(MeasurementVector::new(v).is_err());
    }
}
