//! Canonical registry of the 70 body landmarks.
//!
//! Every landmark set, dataset file and feature selection refers to landmarks
//! through this fixed, ordered name list. The five pelvis/neck anchors used by
//! coordinate normalization are resolvable by name.

use crate::error::{Error, Result};

/// Registry schema version, embedded in model and selection files.
pub const REGISTRY_VERSION: &str = "caesar70.v1";

/// Number of landmarks.
pub const NUM_LANDMARKS: usize = 70;

/// The 70 landmark names in canonical order (head to toe, right before left).
pub const LANDMARK_NAMES: [&str; NUM_LANDMARKS] = [
    "Sellion",
    "Rt. Infraorbitale",
    "Lt. Infraorbitale",
    "Supramenton",
    "Rt. Tragion",
    "Rt. Gonion",
    "Lt. Tragion",
    "Lt. Gonion",
    "Nuchale",
    "Cervicale",
    "Rt. Clavicale",
    "Lt. Clavicale",
    "Suprasternale",
    "Substernale",
    "Rt. Thelion",
    "Lt. Thelion",
    "Rt. 10th Rib",
    "Lt. 10th Rib",
    "10th Rib Midspine",
    "Rt. Asis",
    "Lt. Asis",
    "Rt. Iliocristale",
    "Lt. Iliocristale",
    "Rt. Psis",
    "Lt. Psis",
    "Crotch",
    "Rt. Trochanterion",
    "Lt. Trochanterion",
    "Rt. Acromion",
    "Lt. Acromion",
    "Rt. Axilla Ant.",
    "Lt. Axilla Ant.",
    "Rt. Axilla Post.",
    "Lt. Axilla Post.",
    "Rt. Olecranon",
    "Lt. Olecranon",
    "Rt. Humeral Lateral Epicondyle",
    "Lt. Humeral Lateral Epicondyle",
    "Rt. Humeral Medial Epicondyle",
    "Lt. Humeral Medial Epicondyle",
    "Rt. Radiale",
    "Lt. Radiale",
    "Rt. Radial Styloid",
    "Lt. Radial Styloid",
    "Rt. Ulnar Styloid",
    "Lt. Ulnar Styloid",
    "Rt. Metacarpale II",
    "Lt. Metacarpale II",
    "Rt. Metacarpale V",
    "Lt. Metacarpale V",
    "Rt. Dactylion",
    "Lt. Dactylion",
    "Rt. Knee Crease",
    "Lt. Knee Crease",
    "Rt. Femoral Lateral Epicondyle",
    "Lt. Femoral Lateral Epicondyle",
    "Rt. Femoral Medial Epicondyle",
    "Lt. Femoral Medial Epicondyle",
    "Rt. Lateral Malleolus",
    "Lt. Lateral Malleolus",
    "Rt. Medial Malleolus",
    "Lt. Medial Malleolus",
    "Rt. Sphyrion",
    "Lt. Sphyrion",
    "Rt. Calcaneus Post.",
    "Lt. Calcaneus Post.",
    "Rt. Metatarsal Phal. I",
    "Lt. Metatarsal Phal. I",
    "Rt. Metatarsal Phal. V",
    "Lt. Metatarsal Phal. V",
];

/// Ordered landmark name registry with by-name lookup.
#[derive(Debug, Clone)]
pub struct LandmarkRegistry {
    names: Vec<String>,
    version: String,
}

impl LandmarkRegistry {
    /// The canonical 70-landmark registry.
    pub fn standard() -> Self {
        LandmarkRegistry {
            names: LANDMARK_NAMES.iter().map(|s| s.to_string()).collect(),
            version: REGISTRY_VERSION.to_string(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Index of a landmark by its exact name.
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown landmark name: {name:?}")))
    }

    pub fn name_of(&self, index: usize) -> &str {
        &self.names[index]
    }

    /// Indices of the five normalization anchors.
    pub fn pelvis_anchors(&self) -> Result<PelvisAnchors> {
        Ok(PelvisAnchors {
            lt_psis: self.index_of("Lt. Psis")?,
            rt_psis: self.index_of("Rt. Psis")?,
            lt_asis: self.index_of("Lt. Asis")?,
            rt_asis: self.index_of("Rt. Asis")?,
            nuchale: self.index_of("Nuchale")?,
        })
    }
}

/// Resolved indices of the landmarks anchoring the pelvis frame.
#[derive(Debug, Clone, Copy)]
pub struct PelvisAnchors {
    pub lt_psis: usize,
    pub rt_psis: usize,
    pub lt_asis: usize,
    pub rt_asis: usize,
    pub nuchale: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn registry_has_70_unique_names() {
        let reg = LandmarkRegistry::standard();
        assert_eq!(reg.len(), 70);
        let unique: HashSet<&str> = reg.names().iter().map(|s| s.as_str()).collect();
        assert_eq!(unique.len(), 70);
    }

    #[test]
    fn anchors_resolve() {
        let reg = LandmarkRegistry::standard();
        let a = reg.pelvis_anchors().unwrap();
        assert_eq!(reg.name_of(a.nuchale), "Nuchale");
        assert_eq!(reg.name_of(a.rt_asis), "Rt. Asis");
        assert_eq!(reg.name_of(a.lt_asis), "Lt. Asis");
        assert_eq!(reg.name_of(a.rt_psis), "Rt. Psis");
        assert_eq!(reg.name_of(a.lt_psis), "Lt. Psis");
    }
}
