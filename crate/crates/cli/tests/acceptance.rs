//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS line with its measured numbers (`--nocapture` shows them).
//!
//! 1.  Normalization rigid invariance (1000 seeded pairs, 1e-6 mm, < 5 s)
//! 2.  Backprop vs central differences (20 random nets, < 1e-5, < 10 s)
//! 3.  Selection medians == sort oracle; rigid-pair recall 100%
//! 4.  Cross-section analytic oracles (cylinder 0.5%, cube 1e-9 relative)
//! 5.  End-to-end pose independence (200x40 corpus, family aMAE ratio,
//!     per-subject spread)
//! 6.  Linear-target sanity (held-out MAE < 2 mm with 1 mm label noise)
//! 7.  Landmark-noise robustness (aMAE degradation <= 1.5 mm at 5.6 mm)
//! 8.  Ambiguity: circumference error >= 1.5x landmark distance; zero row
//!     at k=0; S<=3 grid oracle within 1%
//! 9.  Metric formulas on hand-computed values
//! 10. Byte-identical reruns from manifests, any thread count

use std::sync::OnceLock;
use std::time::Instant;

use anthrokit_core::analysis::{
    mae, optimize_ambiguity_direction, sequence_std, sweep_ambiguity, LabeledMeasurements,
};
use anthrokit_core::body::{
    generate_dataset, make_default_model, pose_mesh, BodyModel, GeneratedDataset, Joint,
    MeasurementDef, MeasurementKind, PoseFamily, PoseMix, ShapeParams,
};
use anthrokit_core::dataset::{DatasetRecord, Sex};
use anthrokit_core::features::{
    feature_vector, pairwise_distances, select_features, FeatureSelection,
};
use anthrokit_core::landmarks::{normalize, LandmarkSet};
use anthrokit_core::measurements::{MeasurementVector, MEASUREMENT_NAMES, NUM_MEASUREMENTS};
use anthrokit_core::mesh::{
    loop_perimeter, perturb_landmark_on_surface, plane_cross_section, shapes,
};
use anthrokit_core::mlp::{loss_and_grad, predict, train, MlpModel, TrainConfig};
use anthrokit_core::optim::OptimConfig;
use anthrokit_core::registry::{LandmarkRegistry, NUM_LANDMARKS};
use anthrokit_core::rng;
use nalgebra::{Point3, Unit, UnitQuaternion, Vector3};
use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;

fn random_landmarks(seed: u64) -> LandmarkSet {
    let reg = LandmarkRegistry::standard();
    let mut r = rng::stream(seed, "acc-lm", &[]);
    loop {
        let coords: Vec<Point3<f64>> = (0..NUM_LANDMARKS)
            .map(|_| {
                Point3::new(
                    r.gen_range(-400.0..400.0),
                    r.gen_range(0.0..1800.0),
                    r.gen_range(-300.0..300.0),
                )
            })
            .collect();
        let set = LandmarkSet::new(coords, "s", "p").unwrap();
        if normalize(&set, &reg).is_ok() {
            return set;
        }
    }
}

#[test]
fn acceptance_01_normalization_rigid_invariance() {
    let reg = LandmarkRegistry::standard();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..1000u64 {
        let set = random_landmarks(k);
        let mut r = rng::stream(k, "acc-rigid", &[]);
        let axis = Vector3::new(
            r.gen_range(-1.0..1.0f64),
            r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
        );
        let axis = if axis.norm() < 1e-6 { Vector3::x() } else { axis };
        let q = UnitQuaternion::from_axis_angle(
            &Unit::new_normalize(axis),
            r.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let t = Vector3::new(
            r.gen_range(-2000.0..2000.0),
            r.gen_range(-2000.0..2000.0),
            r.gen_range(-2000.0..2000.0),
        );
        let moved_coords: Vec<Point3<f64>> =
            set.coords.iter().map(|p| Point3::from(q * p.coords + t)).collect();
        let moved = LandmarkSet::new(moved_coords, "s", "p").unwrap();
        let (a, _) = normalize(&set, &reg).unwrap();
        let (b, _) = normalize(&moved, &reg).unwrap();
        for (pa, pb) in a.coords.iter().zip(&b.coords) {
            worst = worst.max((pa - pb).norm());
        }
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-6, "worst deviation {worst} mm");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 (normalization rigid invariance): PASS - worst {worst:.2e} mm over 1000 pairs in {elapsed:.2?}"
    );
}

#[test]
fn acceptance_02_gradient_correctness() {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut seed = 0u64;
    let mut global_max_rel: f64 = 0.0;
    while checked < 20 {
        seed += 1;
        let mut r = rng::stream(seed, "acc-grad", &[]);
        let dims = [
            r.gen_range(3..=20usize),
            r.gen_range(3..=12usize),
            r.gen_range(2..=8usize),
            r.gen_range(1..=4usize),
        ];
        let mut model = MlpModel::zeros(&dims).unwrap();
        for w in model.weights.iter_mut() {
            for v in w.iter_mut() {
                *v = r.gen_range(-0.8..0.8);
            }
        }
        for b in model.biases.iter_mut() {
            for v in b.iter_mut() {
                *v = r.gen_range(-0.4..0.4);
            }
        }
        let x = Array2::from_shape_fn((4, dims[0]), |_| r.gen_range(-1.0..1.0));
        let y = Array2::from_shape_fn((4, dims[3]), |_| r.gen_range(-1.0..1.0));

        // Central differences are only valid away from the ReLU kinks.
        let mut kink_free = true;
        {
            let mut a = x.clone();
            let last = model.weights.len() - 1;
            for (l, (w, b)) in model.weights.iter().zip(&model.biases).enumerate() {
                let mut s = a.dot(&w.t());
                s += b;
                if l < last {
                    if s.iter().any(|&v| v.abs() < 1e-3) {
                        kink_free = false;
                    }
                    s.mapv_inplace(|v| v.max(0.0));
                }
                a = s;
            }
        }
        if !kink_free {
            continue;
        }
        checked += 1;

        let (_, grads) = loss_and_grad(&model, &x, &y).unwrap();
        let h = 1e-4;
        for l in 0..model.weights.len() {
            let shape = model.weights[l].raw_dim();
            for i in 0..shape[0] {
                for j in 0..shape[1] {
                    let orig = model.weights[l][[i, j]];
                    model.weights[l][[i, j]] = orig + h;
                    let (lp, _) = loss_and_grad(&model, &x, &y).unwrap();
                    model.weights[l][[i, j]] = orig - h;
                    let (lm, _) = loss_and_grad(&model, &x, &y).unwrap();
                    model.weights[l][[i, j]] = orig;
                    let num = (lp - lm) / (2.0 * h);
                    let ana = grads.weights[l][[i, j]];
                    let denom = ana.abs().max(num.abs()).max(1e-6);
                    global_max_rel = global_max_rel.max((ana - num).abs() / denom);
                }
            }
            for i in 0..model.biases[l].len() {
                let orig = model.biases[l][i];
                model.biases[l][i] = orig + h;
                let (lp, _) = loss_and_grad(&model, &x, &y).unwrap();
                model.biases[l][i] = orig - h;
                let (lm, _) = loss_and_grad(&model, &x, &y).unwrap();
                model.biases[l][i] = orig;
                let num = (lp - lm) / (2.0 * h);
                let ana = grads.biases[l][i];
                let denom = ana.abs().max(num.abs()).max(1e-6);
                global_max_rel = global_max_rel.max((ana - num).abs() / denom);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(global_max_rel < 1e-5, "max relative error {global_max_rel}");
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 2 (gradient correctness): PASS - max relative error {global_max_rel:.2e} over 20 networks in {elapsed:.2?}"
    );
}

#[test]
fn acceptance_03_selection_oracle_and_rigid_recall() {
    let model = make_default_model(0);
    let shape = ShapeParams::zeros(model.num_shape_coeffs());
    let rest = anthrokit_core::body::PoseParams::rest(model.num_joints());
    let reference =
        anthrokit_core::body::landmarks_of(&model, &shape, &rest, "s0000", "apose").unwrap();
    let mut samples = Vec::new();
    for p in 0..50usize {
        let family = match p % 12 {
            0 => PoseFamily::Standing,
            1 => PoseFamily::Sitting,
            _ => PoseFamily::Varied,
        };
        let mut r = rng::stream(3000, "acc-sel", &[p as u64]);
        let pose = anthrokit_core::body::sample_pose(&model, family, &mut r);
        samples.push(
            anthrokit_core::body::landmarks_of(&model, &shape, &pose, "s0000", &format!("p{p}"))
                .unwrap(),
        );
    }
    let selection =
        select_features(&reference, samples.iter().cloned().map(Ok), 10.0).unwrap();

    // Brute-force sort oracle over all 2415 pairs.
    let ref_d = pairwise_distances(&reference);
    let sample_d: Vec<Vec<f64>> = samples.iter().map(pairwise_distances).collect();
    for k in 0..ref_d.len() {
        let mut devs: Vec<f64> = sample_d.iter().map(|d| (d[k] - ref_d[k]).abs()).collect();
        devs.sort_by(f64::total_cmp);
        assert_eq!(
            selection.per_pair_median_dev_mm[k],
            devs[(devs.len() - 1) / 2],
            "median mismatch at pair {k}"
        );
    }

    // Rigid-bone pairs: 100% recall at any positive threshold.
    let rigid = model.rigid_landmark_pairs();
    assert!(!rigid.is_empty());
    for threshold in [1e-9, 1e-3, 10.0] {
        let sel = select_features(&reference, samples.iter().cloned().map(Ok), threshold).unwrap();
        let chosen: std::collections::HashSet<_> = sel.pairs.iter().cloned().collect();
        for pair in &rigid {
            assert!(
                chosen.contains(pair),
                "rigid pair {pair:?} missed at threshold {threshold}"
            );
        }
    }
    println!(
        "ACCEPTANCE 3 (selection oracle + rigid recall): PASS - 2415 medians exact, {} rigid pairs recalled at all thresholds",
        rigid.len()
    );
}

#[test]
fn acceptance_04_cross_section_analytic_oracles() {
    // Cylinder: 64 segments within 0.5% of 2*pi*r.
    let r = 137.0;
    let cyl = shapes::cylinder(r, 500.0, 64, 4);
    let cs = plane_cross_section(&cyl, &Point3::new(0.0, 250.0, 0.0), &Vector3::y()).unwrap();
    assert_eq!(cs.loops.len(), 1);
    let perim = loop_perimeter(&cs.loops[0]);
    let exact = 2.0 * std::f64::consts::PI * r;
    let cyl_rel = (perim - exact).abs() / exact;
    assert!(cyl_rel < 0.005, "cylinder relative error {cyl_rel}");

    // 1 m cube: center slice perimeter 4000 mm to 1e-9 relative.
    let cube = shapes::cuboid(Point3::origin(), 500.0, 500.0, 500.0);
    let cs = plane_cross_section(&cube, &Point3::origin(), &Vector3::y()).unwrap();
    assert_eq!(cs.loops.len(), 1);
    let perim = loop_perimeter(&cs.loops[0]);
    let cube_rel = (perim - 4000.0).abs() / 4000.0;
    assert!(cube_rel < 1e-9, "cube relative error {cube_rel}");
    println!(
        "ACCEPTANCE 4 (cross-section oracles): PASS - cylinder {cyl_rel:.2e} rel, cube {cube_rel:.2e} rel"
    );
}

// ---------------------------------------------------------------------------
// Shared end-to-end fixture for criteria 5 and 7: a 200-subject x 40-pose
// corpus, a 368-wide feature selection from one subject's poses, and a model
// trained with the default configuration.
// ---------------------------------------------------------------------------

struct EndToEnd {
    model: BodyModel,
    data: GeneratedDataset,
    selection: FeatureSelection,
    mlp: MlpModel,
    test_idx: Vec<usize>,
}

fn end_to_end() -> &'static EndToEnd {
    static FIXTURE: OnceLock<EndToEnd> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let model = make_default_model(0);
        let mix = PoseMix::paper_proportions();

        let sel_data = generate_dataset(&model, 1, 1500, &mix, 2000).unwrap();
        let selection = select_features(
            &sel_data.apose_records[0].landmarks,
            sel_data.records.iter().map(|r| Ok(r.landmarks.clone())),
            10.0,
        )
        .unwrap()
        .truncated(158);
        assert_eq!(selection.feature_len(), 368);

        let data = generate_dataset(&model, 200, 40, &mix, 1000).unwrap();
        let train_recs: Vec<DatasetRecord> = data
            .records
            .iter()
            .filter(|r| r.landmarks.subject_id < "s0160".to_string())
            .cloned()
            .collect();
        let test_idx: Vec<usize> = (0..data.records.len())
            .filter(|&i| data.records[i].landmarks.subject_id >= "s0160".to_string())
            .collect();

        let config = TrainConfig {
            seed: 7,
            ..Default::default()
        };
        let (mlp, _) = train(&train_recs, &selection, &config).unwrap();
        EndToEnd {
            model,
            data,
            selection,
            mlp,
            test_idx,
        }
    })
}

fn amae_of(rows: &[(String, MeasurementVector, MeasurementVector)]) -> f64 {
    let gt: Vec<LabeledMeasurements> = rows
        .iter()
        .map(|(s, g, _)| LabeledMeasurements {
            subject_id: s.clone(),
            sex: Sex::Unspecified,
            values: g.clone(),
        })
        .collect();
    let est: Vec<LabeledMeasurements> = rows
        .iter()
        .map(|(s, _, e)| LabeledMeasurements {
            subject_id: s.clone(),
            sex: Sex::Unspecified,
            values: e.clone(),
        })
        .collect();
    mae(&gt, &est).unwrap().amae_mm.unwrap()
}

#[test]
fn acceptance_05_end_to_end_pose_independence() {
    let start = Instant::now();
    let fx = end_to_end();
    let preds: Vec<(usize, MeasurementVector)> = fx
        .test_idx
        .par_iter()
        .map(|&i| {
            (
                i,
                predict(&fx.mlp, &fx.data.records[i].landmarks, &fx.selection).unwrap(),
            )
        })
        .collect();

    // (a) unseen extreme poses within 25% relative of near-A poses.
    let mut stand_rows = Vec::new();
    let mut var_rows = Vec::new();
    for (i, p) in &preds {
        let rec = &fx.data.records[*i];
        let row = (
            rec.landmarks.subject_id.clone(),
            rec.measurements.clone().unwrap(),
            p.clone(),
        );
        match PoseFamily::of_pose_id(&rec.landmarks.pose_id).unwrap() {
            PoseFamily::Standing => stand_rows.push(row),
            PoseFamily::Varied => var_rows.push(row),
            PoseFamily::Sitting => {}
        }
    }
    assert!(stand_rows.len() >= 100 && var_rows.len() >= 1000);
    let amae_stand = amae_of(&stand_rows);
    let amae_var = amae_of(&var_rows);
    let ratio = amae_var / amae_stand;
    assert!(
        ratio <= 1.25,
        "extreme-pose aMAE {amae_var:.2} exceeds near-A aMAE {amae_stand:.2} by {:.1}% (> 25%)",
        (ratio - 1.0) * 100.0
    );

    // (b) per-subject prediction spread across poses below 5 mm per
    // measurement.
    let mut by_subject: std::collections::BTreeMap<String, Vec<MeasurementVector>> =
        Default::default();
    for (i, p) in &preds {
        by_subject
            .entry(fx.data.records[*i].landmarks.subject_id.clone())
            .or_default()
            .push(p.clone());
    }
    let mut worst_spread: f64 = 0.0;
    for frames in by_subject.values() {
        let stds = sequence_std(frames).unwrap();
        for s in stds {
            worst_spread = worst_spread.max(s);
        }
    }
    assert!(
        worst_spread < 5.0,
        "per-subject prediction spread {worst_spread:.2} mm exceeds 5 mm"
    );
    println!(
        "ACCEPTANCE 5 (end-to-end pose independence): PASS - aMAE near-A {amae_stand:.2} mm, extreme {amae_var:.2} mm (ratio {ratio:.3}), worst spread {worst_spread:.2} mm, total {:.0?}",
        start.elapsed()
    );
}

#[test]
fn acceptance_06_learnable_linear_targets_with_noise() {
    let model = make_default_model(0);
    let mix = PoseMix::paper_proportions();
    let data = generate_dataset(&model, 275, 2, &mix, 31).unwrap();
    let reference = data.apose_records[0].landmarks.clone();
    let selection = select_features(
        &reference,
        data.records
            .iter()
            .filter(|r| r.landmarks.subject_id == "s0000")
            .map(|r| Ok(r.landmarks.clone())),
        10.0,
    )
    .unwrap()
    .truncated(158);
    assert_eq!(selection.feature_len(), 368);

    let reg = LandmarkRegistry::standard();
    let d = selection.feature_len();
    let mut wrng = rng::stream(77, "acc-linear", &[]);
    let w: Vec<Vec<f64>> = (0..NUM_MEASUREMENTS)
        .map(|_| {
            (0..d)
                .map(|i| {
                    if i < 210 {
                        wrng.gen_range(-0.002..0.002)
                    } else {
                        wrng.gen_range(-0.02..0.02)
                    }
                })
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..NUM_MEASUREMENTS)
        .map(|_| wrng.gen_range(500.0..1500.0))
        .collect();

    // Labels: exact linear map of the 368 features plus 1 mm Gaussian noise.
    let mut records = data.records.clone();
    let mut noise_rng = rng::stream(99, "acc-label-noise", &[]);
    let mut gauss = || -> f64 {
        let u1: f64 = noise_rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = noise_rng.gen_range(0.0..1.0);
        ((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()).clamp(-3.0, 3.0)
    };
    let mut clean = Vec::with_capacity(records.len());
    for rec in records.iter_mut() {
        let (norm, _) = normalize(&rec.landmarks, &reg).unwrap();
        let fv = feature_vector(&norm, &selection);
        let mut vals = [0.0; NUM_MEASUREMENTS];
        for j in 0..NUM_MEASUREMENTS {
            vals[j] = b[j] + w[j].iter().zip(&fv).map(|(a, x)| a * x).sum::<f64>();
        }
        clean.push(vals);
        for v in vals.iter_mut() {
            *v += gauss();
        }
        rec.measurements = Some(MeasurementVector::new(vals).unwrap());
    }

    let train_recs: Vec<DatasetRecord> = records
        .iter()
        .filter(|r| r.landmarks.subject_id < "s0250".to_string())
        .cloned()
        .collect();
    let test_pairs: Vec<(&DatasetRecord, [f64; NUM_MEASUREMENTS])> = records
        .iter()
        .zip(&clean)
        .filter(|(r, _)| r.landmarks.subject_id >= "s0250".to_string())
        .map(|(r, c)| (r, *c))
        .collect();
    assert_eq!(train_recs.len(), 500);

    let config = TrainConfig {
        epochs: 200, // within the 500-epoch budget
        batch_size: 32,
        learning_rate: 1e-2,
        weight_decay: 1e-3,
        landmark_jitter_mm: 0.0,
        seed: 3,
        validation_fraction: 0.1,
        early_stop_patience: 0,
        ..Default::default()
    };
    let (mlp, _) = train(&train_recs, &selection, &config).unwrap();

    // Held-out MAE against the noise-free linear targets.
    let mut mae_per = [0.0f64; NUM_MEASUREMENTS];
    for (rec, clean_vals) in &test_pairs {
        let pred = predict(&mlp, &rec.landmarks, &selection).unwrap();
        for j in 0..NUM_MEASUREMENTS {
            mae_per[j] += (pred.values_mm[j] - clean_vals[j]).abs();
        }
    }
    let worst = mae_per
        .iter()
        .map(|v| v / test_pairs.len() as f64)
        .fold(0.0f64, f64::max);
    assert!(worst < 2.0, "worst held-out per-measurement MAE {worst:.3} mm");
    println!(
        "ACCEPTANCE 6 (learnable linear targets): PASS - worst held-out MAE {worst:.3} mm (< 2 mm) within {} epochs",
        config.epochs
    );
}

#[test]
fn acceptance_07_noise_robustness() {
    let start = Instant::now();
    let fx = end_to_end();
    let rows: Vec<(
        (String, MeasurementVector, MeasurementVector),
        (String, MeasurementVector, MeasurementVector),
    )> = fx
        .test_idx
        .par_iter()
        .map(|&i| {
            let rec = &fx.data.records[i];
            let par = &fx.data.params[i];
            let clean_pred = predict(&fx.mlp, &rec.landmarks, &fx.selection).unwrap();
            let mesh = pose_mesh(&fx.model, &par.shape, &par.pose).unwrap();
            let mut lm = rec.landmarks.clone();
            for (lm_idx, point) in lm.coords.iter_mut().enumerate() {
                let s = rng::derive_seed(555, "acc-noise", &[i as u64, lm_idx as u64]);
                *point = perturb_landmark_on_surface(&mesh, point, 5.6, s).unwrap();
            }
            let noisy_pred = predict(&fx.mlp, &lm, &fx.selection).unwrap();
            let truth = rec.measurements.clone().unwrap();
            let id = rec.landmarks.subject_id.clone();
            (
                (id.clone(), truth.clone(), clean_pred),
                (id, truth, noisy_pred),
            )
        })
        .collect();
    let clean_rows: Vec<_> = rows.iter().map(|(c, _)| c.clone()).collect();
    let noisy_rows: Vec<_> = rows.iter().map(|(_, n)| n.clone()).collect();
    let amae_clean = amae_of(&clean_rows);
    let amae_noisy = amae_of(&noisy_rows);
    let degradation = amae_noisy - amae_clean;
    assert!(
        degradation <= 1.5,
        "aMAE degraded by {degradation:.2} mm (clean {amae_clean:.2}, noisy {amae_noisy:.2})"
    );
    println!(
        "ACCEPTANCE 7 (noise robustness): PASS - aMAE {amae_clean:.2} -> {amae_noisy:.2} mm (degradation {degradation:.2} <= 1.5 mm) in {:.0?}",
        start.elapsed()
    );
}

#[test]
fn acceptance_08_ambiguity_qualitative() {
    let model = make_default_model(0);
    let beta_ref = ShapeParams::zeros(model.num_shape_coeffs());
    let cfg = OptimConfig {
        max_iters: 3000,
        learning_rate: 0.01,
        rel_tol: 1e-10,
        seed: 4,
        restarts: 5,
    };
    let (delta, objective) = optimize_ambiguity_direction(&model, &beta_ref, &cfg).unwrap();
    let k_values: Vec<f64> = (0..26).map(|i| i as f64).collect();
    let curve = sweep_ambiguity(&model, &beta_ref, &delta, objective, &k_values).unwrap();

    // k = 0 row exactly zero.
    assert_eq!(curve.max_landmark_dist_mm[0], 0.0);
    assert!(curve.measurement_err_mm[0].iter().all(|&v| v == 0.0));

    // At matched max-landmark-distance, some circumference error is at least
    // 1.5x larger.
    let circumference_idx: Vec<usize> = MEASUREMENT_NAMES
        .iter()
        .enumerate()
        .filter(|(_, n)| n.ends_with("C."))
        .map(|(i, _)| i)
        .collect();
    let mut best_ratio: f64 = 0.0;
    let mut at_dist = 0.0;
    for (step, &dist) in curve.max_landmark_dist_mm.iter().enumerate() {
        if dist < 1.0 {
            continue;
        }
        for &j in &circumference_idx {
            let ratio = curve.measurement_err_mm[step][j] / dist;
            if ratio > best_ratio {
                best_ratio = ratio;
                at_dist = dist;
            }
        }
    }
    assert!(
        best_ratio >= 1.5,
        "no circumference error reaches 1.5x the landmark distance (best {best_ratio:.2})"
    );

    // S <= 3 grid oracle within 1% of the optimizer objective.
    let toy = toy_linear_model();
    let cfg = OptimConfig {
        max_iters: 4000,
        learning_rate: 0.01,
        rel_tol: 1e-12,
        seed: 2,
        restarts: 5,
    };
    let (_, toy_objective) =
        optimize_ambiguity_direction(&toy, &ShapeParams::zeros(3), &cfg).unwrap();
    let oracle = grid_oracle(&toy);
    let rel = (toy_objective - oracle).abs() / oracle.max(1e-12);
    assert!(
        rel <= 0.01,
        "optimizer {toy_objective} vs grid oracle {oracle} ({:.2}% off)",
        rel * 100.0
    );
    println!(
        "ACCEPTANCE 8 (ambiguity): PASS - circumference/landmark ratio {best_ratio:.1} at {at_dist:.1} mm, k=0 exact zero, grid oracle within {:.2}%",
        rel * 100.0
    );
}

/// Toy S = 3 model with a landmark map small enough for a unit-norm optimum.
fn toy_linear_model() -> BodyModel {
    let n = 80usize;
    let template_vertices: Vec<Point3<f64>> =
        (0..n).map(|i| Point3::new(i as f64 * 10.0, 0.0, 0.0)).collect();
    let shape_basis: Vec<Vec<Vector3<f64>>> = (0..3)
        .map(|c| {
            (0..n)
                .map(|v| {
                    let mut r = rng::stream(400, "acc-toy-basis", &[c as u64, v as u64]);
                    Vector3::new(
                        r.gen_range(-2.0..2.0),
                        r.gen_range(-2.0..2.0),
                        r.gen_range(-2.0..2.0),
                    )
                })
                .collect()
        })
        .collect();
    let reg = LandmarkRegistry::standard();
    let mut defs: Vec<MeasurementDef> = (0..10)
        .map(|j| MeasurementDef {
            name: format!("m{j}"),
            kind: MeasurementKind::Length,
            anchors: vec![reg.name_of(2 * j).to_string(), reg.name_of(2 * j + 1).to_string()],
            plane_normal: Vector3::y(),
        })
        .collect();
    defs.push(MeasurementDef {
        name: "Stature".into(),
        kind: MeasurementKind::Stature,
        anchors: vec![],
        plane_normal: Vector3::y(),
    });
    BodyModel {
        template_vertices,
        faces: vec![],
        joints: vec![Joint {
            name: "root".into(),
            parent: None,
            rest: Point3::origin(),
        }],
        skin_weights: vec![vec![(0, 1.0)]; n],
        shape_basis,
        landmark_vertex_ids: (0..NUM_LANDMARKS).collect(),
        measurement_defs: defs,
        build_seed: 0,
    }
}

fn grid_oracle(model: &BodyModel) -> f64 {
    let blocks: Vec<Vec<Vector3<f64>>> = model
        .landmark_vertex_ids
        .iter()
        .map(|&v| model.shape_basis.iter().map(|ch| ch[v]).collect())
        .collect();
    let cost = |u: &[f64; 3]| -> f64 {
        let mut total = 0.0;
        for block in &blocks {
            let mut m = Vector3::zeros();
            for (c, b) in block.iter().enumerate() {
                m += b * u[c];
            }
            total += m.norm() / 1000.0;
        }
        total
    };
    let steps = 400usize;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let phi = std::f64::consts::PI * i as f64 / steps as f64;
        for j in 0..(2 * steps) {
            let theta = std::f64::consts::PI * j as f64 / steps as f64;
            let u = [phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()];
            let c = cost(&u);
            // At a fixed direction the radial optimum is c (at radius 1) when
            // c < 1, else 1 (at radius 0).
            best = best.min(if c < 1.0 { c } else { 1.0 });
        }
    }
    best
}

#[test]
fn acceptance_09_metric_formulas() {
    // MAE: gt {100, 200}, est {90, 210} -> 10 for that measurement.
    let mk = |v0: f64| {
        let mut vals = [0.0; NUM_MEASUREMENTS];
        vals[0] = v0;
        MeasurementVector::new(vals).unwrap()
    };
    let lab = |id: &str, v: MeasurementVector| LabeledMeasurements {
        subject_id: id.into(),
        sex: Sex::Unspecified,
        values: v,
    };
    let gt = vec![lab("a", mk(100.0)), lab("b", mk(200.0))];
    let est = vec![lab("a", mk(90.0)), lab("b", mk(210.0))];
    let rep = mae(&gt, &est).unwrap();
    assert_eq!(rep.per_measurement_mm[0], 10.0);
    let amae = rep.amae_mm.unwrap();
    let mean = rep.per_measurement_mm.iter().sum::<f64>() / NUM_MEASUREMENTS as f64;
    assert!((amae - mean).abs() <= 1e-12 * mean.max(1.0));

    // est == gt -> exactly zero.
    let zero = mae(&gt, &gt).unwrap();
    assert!(zero.per_measurement_mm.iter().all(|&v| v == 0.0));
    assert_eq!(zero.amae_mm.unwrap(), 0.0);

    // sequence_std: frames {10, 12, 8} -> differences {2, -2}, population
    // std exactly 2; a constant sequence gives exactly 0.
    let stds = sequence_std(&[mk(10.0), mk(12.0), mk(8.0)]).unwrap();
    assert_eq!(stds[0], 2.0);
    let stds = sequence_std(&[mk(7.0), mk(7.0), mk(7.0), mk(7.0)]).unwrap();
    assert!(stds.iter().all(|&v| v == 0.0));
    println!("ACCEPTANCE 9 (metric formulas): PASS - MAE, aMAE and sequence std match hand computations exactly");
}

#[test]
fn acceptance_10_reproducibility_from_manifests() {
    use std::fs;
    use std::process::Command as Process;
    let bin = env!("CARGO_BIN_EXE_anthrokit");
    let dir = tempfile::tempdir().unwrap();
    let dirp = dir.path();

    let run_bin = |args: &[&str]| {
        let out = Process::new(bin).args(args).output().unwrap();
        assert!(
            out.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let p = |x: &std::path::Path| x.to_str().unwrap().to_string();

    // Serial baseline run of the full pipeline.
    let data = dirp.join("data");
    run_bin(&[
        "--threads", "1", "gen", "--out-dir", &p(&data), "--subjects", "5",
        "--poses-per-subject", "6", "--seed", "17",
    ]);
    let sel = dirp.join("sel.txt");
    run_bin(&[
        "--threads", "1", "select", "--poses", &p(&data.join("train.tsv")), "--subject",
        "s0000", "--reference", &p(&data.join("apose.tsv")), "--out", &p(&sel),
    ]);
    let model = dirp.join("model.txt");
    run_bin(&[
        "--threads", "1", "train", "--dataset", &p(&data.join("train.tsv")), "--selection",
        &p(&sel), "--out", &p(&model), "--epochs", "3", "--batch-size", "16",
    ]);
    let pred = dirp.join("pred.csv");
    run_bin(&[
        "--threads", "1", "predict", "--dataset", &p(&data.join("test.tsv")), "--selection",
        &p(&sel), "--model", &p(&model), "--out", &p(&pred),
    ]);

    let outputs = [
        data.join("train.tsv"),
        data.join("test.tsv"),
        data.join("apose.tsv"),
        data.join("params.tsv"),
        sel.clone(),
        model.clone(),
        model.with_extension("log.csv"),
        pred.clone(),
    ];
    let baseline: Vec<Vec<u8>> = outputs.iter().map(|f| fs::read(f).unwrap()).collect();

    // Rerun every stage purely from its manifest, still serial: byte-equal.
    for (manifest, cmd) in [
        (data.join("gen.manifest"), "gen"),
        (sel.with_extension("manifest"), "select"),
        (model.with_extension("manifest"), "train"),
        (pred.with_extension("manifest"), "predict"),
    ] {
        run_bin(&["--threads", "1", "--config", &p(&manifest), cmd]);
    }
    for (f, want) in outputs.iter().zip(&baseline) {
        assert_eq!(&fs::read(f).unwrap(), want, "{} changed on serial rerun", f.display());
    }

    // Rerun at a different thread count: still byte-equal.
    for (manifest, cmd) in [
        (data.join("gen.manifest"), "gen"),
        (sel.with_extension("manifest"), "select"),
        (model.with_extension("manifest"), "train"),
        (pred.with_extension("manifest"), "predict"),
    ] {
        run_bin(&["--threads", "4", "--config", &p(&manifest), cmd]);
    }
    for (f, want) in outputs.iter().zip(&baseline) {
        assert_eq!(
            &fs::read(f).unwrap(),
            want,
            "{} changed at 4 threads",
            f.display()
        );
    }
    println!("ACCEPTANCE 10 (reproducibility): PASS - gen/select/train/predict byte-identical from manifests at 1 and 4 threads");
}
