//! Property tests for the pipeline invariants.

use anthrokit_core::analysis::{mae, sequence_std, LabeledMeasurements};
use anthrokit_core::dataset::Sex;
use anthrokit_core::features::{select_features, NUM_PAIRS};
use anthrokit_core::landmarks::{flatten, normalize, unflatten, LandmarkSet};
use anthrokit_core::measurements::{MeasurementVector, NUM_MEASUREMENTS};
use anthrokit_core::registry::{LandmarkRegistry, NUM_LANDMARKS};
use nalgebra::{Point3, Unit, UnitQuaternion, Vector3};
use proptest::prelude::*;

fn landmark_set_strategy() -> impl Strategy<Value = LandmarkSet> {
    proptest::collection::vec(
        (
            -400.0..400.0f64,
            0.0..1800.0f64,
            -300.0..300.0f64,
        ),
        NUM_LANDMARKS,
    )
    .prop_map(|pts| {
        let coords = pts
            .into_iter()
            .map(|(x, y, z)| Point3::new(x, y, z))
            .collect();
        LandmarkSet::new(coords, "s", "p").unwrap()
    })
}

fn rigid_strategy() -> impl Strategy<Value = (UnitQuaternion<f64>, Vector3<f64>)> {
    (
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        -std::f64::consts::PI..std::f64::consts::PI,
        (-2000.0..2000.0f64, -2000.0..2000.0f64, -2000.0..2000.0f64),
    )
        .prop_filter_map("axis too small", |(axis, angle, t)| {
            let v = Vector3::new(axis.0, axis.1, axis.2);
            if v.norm() < 1e-3 {
                return None;
            }
            Some((
                UnitQuaternion::from_axis_angle(&Unit::new_normalize(v), angle),
                Vector3::new(t.0, t.1, t.2),
            ))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_rigid_invariant(set in landmark_set_strategy(), rigid in rigid_strategy()) {
        let reg = LandmarkRegistry::standard();
        if let Ok((base, _)) = normalize(&set, &reg) {
            let (q, t) = rigid;
            let moved_coords: Vec<Point3<f64>> =
                set.coords.iter().map(|p| Point3::from(q * p.coords + t)).collect();
            let moved = LandmarkSet::new(moved_coords, "s", "p").unwrap();
            let (norm, _) = normalize(&moved, &reg).unwrap();
            for (a, b) in base.coords.iter().zip(&norm.coords) {
                prop_assert!((a - b).norm() < 1e-6, "deviation {}", (a - b).norm());
            }
        }
    }

    #[test]
    fn normalization_is_idempotent(set in landmark_set_strategy()) {
        let reg = LandmarkRegistry::standard();
        if let Ok((once, _)) = normalize(&set, &reg) {
            let (twice, _) = normalize(&once, &reg).unwrap();
            for (a, b) in once.coords.iter().zip(&twice.coords) {
                prop_assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn flatten_roundtrips(set in landmark_set_strategy()) {
        let rt = unflatten(&flatten(&set), "s", "p").unwrap();
        prop_assert_eq!(set.coords, rt.coords);
    }

    #[test]
    fn selection_grows_with_threshold(
        sets in proptest::collection::vec(landmark_set_strategy(), 2..6),
        t1 in 1.0..200.0f64,
        bump in 1.0..200.0f64,
    ) {
        let reference = sets[0].clone();
        let samples: Vec<_> = sets[1..].iter().cloned().map(Ok).collect();
        let low = select_features(&reference, samples, t1).unwrap();
        let samples: Vec<_> = sets[1..].iter().cloned().map(Ok).collect();
        let high = select_features(&reference, samples, t1 + bump).unwrap();
        prop_assert!(low.pairs.len() <= high.pairs.len());
        let high_set: std::collections::HashSet<_> = high.pairs.iter().collect();
        for p in &low.pairs {
            prop_assert!(high_set.contains(p));
        }
        prop_assert_eq!(low.per_pair_median_dev_mm.len(), NUM_PAIRS);
    }

    #[test]
    fn mae_is_symmetric(
        vals_a in proptest::collection::vec(0.0..2000.0f64, NUM_MEASUREMENTS),
        vals_b in proptest::collection::vec(0.0..2000.0f64, NUM_MEASUREMENTS),
    ) {
        let a = vec![LabeledMeasurements {
            subject_id: "s".into(),
            sex: Sex::Unspecified,
            values: MeasurementVector::from_slice(&vals_a).unwrap(),
        }];
        let b = vec![LabeledMeasurements {
            subject_id: "s".into(),
            sex: Sex::Unspecified,
            values: MeasurementVector::from_slice(&vals_b).unwrap(),
        }];
        let r1 = mae(&a, &b).unwrap();
        let r2 = mae(&b, &a).unwrap();
        prop_assert_eq!(r1.per_measurement_mm, r2.per_measurement_mm);
        prop_assert_eq!(r1.amae_mm, r2.amae_mm);
    }

    #[test]
    fn sequence_std_ignores_constant_offsets(
        frames in proptest::collection::vec(
            proptest::collection::vec(0.0..2000.0f64, NUM_MEASUREMENTS),
            2..8,
        ),
        offset in -500.0..500.0f64,
    ) {
        let base: Vec<MeasurementVector> = frames
            .iter()
            .map(|v| MeasurementVector::from_slice(v).unwrap())
            .collect();
        let shifted: Vec<MeasurementVector> = frames
            .iter()
            .map(|v| {
                let vals: Vec<f64> = v.iter().map(|x| x + offset).collect();
                MeasurementVector::from_slice(&vals).unwrap()
            })
            .collect();
        let a = sequence_std(&base).unwrap();
        let b = sequence_std(&shifted).unwrap();
        for j in 0..NUM_MEASUREMENTS {
            prop_assert!((a[j] - b[j]).abs() < 1e-9);
        }
    }
}
