use anthrokit_core::analysis::{mae, sequence_std, LabeledMeasurements};
use anthrokit_core::body::*;
use anthrokit_core::dataset::{DatasetRecord, Sex};
use anthrokit_core::features::select_features;
use anthrokit_core::measurements::NUM_MEASUREMENTS;
use anthrokit_core::mesh::perturb_landmark_on_surface;
use anthrokit_core::mlp::{predict, train, TrainConfig};
use anthrokit_core::rng::derive_seed;
use rayon::prelude::*;
use std::time::Instant;

fn amae_of(rows: &[(String, anthrokit_core::measurements::MeasurementVector, anthrokit_core::measurements::MeasurementVector)]) -> f64 {
    let gt: Vec<LabeledMeasurements> = rows.iter().map(|(s, g, _)| LabeledMeasurements { subject_id: s.clone(), sex: Sex::Unspecified, values: g.clone() }).collect();
    let est: Vec<LabeledMeasurements> = rows.iter().map(|(s, _, e)| LabeledMeasurements { subject_id: s.clone(), sex: Sex::Unspecified, values: e.clone() }).collect();
    mae(&gt, &est).unwrap().amae_mm.unwrap()
}

fn main() {
  for jitter in [1.5f64, 2.5, 4.0] {
    let t0 = Instant::now();
    println!("=== landmark_jitter_mm = {jitter} ===");
    let model = make_default_model(0);
    let mix = PoseMix::paper_proportions();

    // Selection corpus: one subject, many poses.
    let sel_data = generate_dataset(&model, 1, 1500, &mix, 2000).unwrap();
    let selection = select_features(
        &sel_data.apose_records[0].landmarks,
        sel_data.records.iter().map(|r| Ok(r.landmarks.clone())),
        10.0,
    ).unwrap();
    println!("[{:.0?}] selection: {} pairs", t0.elapsed(), selection.pairs.len());
    let selection = selection.truncated(158);

    // Main corpus.
    let data = generate_dataset(&model, 200, 40, &mix, 1000).unwrap();
    println!("[{:.0?}] dataset: {} records", t0.elapsed(), data.records.len());
    let train_recs: Vec<DatasetRecord> = data.records.iter().filter(|r| r.landmarks.subject_id < "s0160".to_string()).cloned().collect();
    let test_idx: Vec<usize> = (0..data.records.len()).filter(|&i| data.records[i].landmarks.subject_id >= "s0160".to_string()).collect();

    let config = TrainConfig { seed: 7, landmark_jitter_mm: jitter, ..Default::default() };
    let (mlp, log) = train(&train_recs, &selection, &config).unwrap();
    let meta_epochs = log.len();
    println!("[{:.0?}] trained: {} epochs, final train mse {:.3}, val {:?}", t0.elapsed(), meta_epochs, log.last().unwrap().train_mse, log.last().unwrap().val_mse);

    // Predict on test.
    let preds: Vec<_> = test_idx.par_iter().map(|&i| {
        let rec = &data.records[i];
        (i, predict(&mlp, &rec.landmarks, &selection).unwrap())
    }).collect();

    let mut stand_rows = Vec::new();
    let mut var_rows = Vec::new();
    let mut sit_rows = Vec::new();
    for (i, p) in &preds {
        let rec = &data.records[*i];
        let row = (rec.landmarks.subject_id.clone(), rec.measurements.clone().unwrap(), p.clone());
        match PoseFamily::of_pose_id(&rec.landmarks.pose_id).unwrap() {
            PoseFamily::Standing => stand_rows.push(row),
            PoseFamily::Sitting => sit_rows.push(row),
            PoseFamily::Varied => var_rows.push(row),
        }
    }
    let amae_stand = amae_of(&stand_rows);
    let amae_var = amae_of(&var_rows);
    let amae_sit = amae_of(&sit_rows);
    println!("[{:.0?}] aMAE: standing {:.2} ({} rows), sitting {:.2} ({}), varied {:.2} ({}); ratio var/stand {:.3}",
        t0.elapsed(), amae_stand, stand_rows.len(), amae_sit, sit_rows.len(), amae_var, var_rows.len(), amae_var / amae_stand);

    // (b) per-subject spread across poses.
    let mut by_subject: std::collections::BTreeMap<String, Vec<anthrokit_core::measurements::MeasurementVector>> = Default::default();
    for (i, p) in &preds {
        by_subject.entry(data.records[*i].landmarks.subject_id.clone()).or_default().push(p.clone());
    }
    let mut worst_spread = 0.0f64;
    let mut mean_spread = 0.0f64;
    let mut count = 0;
    for (_s, frames) in &by_subject {
        let stds = sequence_std(frames).unwrap();
        for j in 0..NUM_MEASUREMENTS {
            worst_spread = worst_spread.max(stds[j]);
            mean_spread += stds[j];
            count += 1;
        }
    }
    println!("[{:.0?}] spread: worst {:.2} mm, mean {:.2} mm over {} subject-measurements", t0.elapsed(), worst_spread, mean_spread / count as f64, count);

    // #7: noise robustness on a 400-record subsample.
    let sub_idx: Vec<usize> = test_idx.iter().step_by(4).cloned().collect();
    let noisy_rows: Vec<_> = sub_idx.par_iter().map(|&i| {
        let rec = &data.records[i];
        let par = &data.params[i];
        let mesh = pose_mesh(&model, &par.shape, &par.pose).unwrap();
        let mut lm = rec.landmarks.clone();
        for (lm_idx, point) in lm.coords.iter_mut().enumerate() {
            let s = derive_seed(555, "noise", &[i as u64, lm_idx as u64]);
            *point = perturb_landmark_on_surface(&mesh, point, 5.6, s).unwrap();
        }
        let p = predict(&mlp, &lm, &selection).unwrap();
        (rec.landmarks.subject_id.clone(), rec.measurements.clone().unwrap(), p)
    }).collect();
    let clean_rows: Vec<_> = preds.iter().filter(|(i, _)| sub_idx.contains(i)).map(|(i, p)| (data.records[*i].landmarks.subject_id.clone(), data.records[*i].measurements.clone().unwrap(), p.clone())).collect();
    let amae_clean = amae_of(&clean_rows);
    let amae_noisy = amae_of(&noisy_rows);
    println!("[{:.0?}] noise: clean aMAE {:.2}, noisy {:.2}, degradation {:.2} mm", t0.elapsed(), amae_clean, amae_noisy, amae_noisy - amae_clean);
  }
}
