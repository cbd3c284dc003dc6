//! Shape-ambiguity analysis and evaluation metrics.
//!
//! The ambiguity search asks whether different body shapes can share nearly
//! identical landmarks: it finds a unit-norm shape displacement `delta`
//! minimizing the summed landmark movement at the rest pose plus a unit-norm
//! penalty, then sweeps `beta_ref + k * delta` and reports, per step, the
//! maximum landmark distance against the per-measurement error.
//!
//! Metrics: per-measurement MAE with its average (aMAE), and the per
//! measurement standard deviation of frame-minus-first-frame differences for
//! sequences (population convention).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::Vector3;
use rand::Rng;
use rayon::prelude::*;

use crate::body::{measure_ground_truth, BodyModel, ShapeParams};
use crate::dataset::Sex;
use crate::error::{Error, Result};
use crate::measurements::{MeasurementVector, MEASUREMENT_NAMES, NUM_MEASUREMENTS};
use crate::optim::{minimize, OptimConfig};
use crate::rng;

pub const REPORT_FORMAT: &str = "anthrokit-report-v1";
pub const CURVE_FORMAT: &str = "anthrokit-curve-v1";

/// Landmark shape-Jacobian blocks at the rest pose: `B[i]` maps shape
/// displacements to the movement of landmark `i` (columns = channels, mm per
/// unit coefficient). Exact because the landmark map is linear at rest.
fn landmark_blocks(model: &BodyModel) -> Vec<Vec<Vector3<f64>>> {
    model
        .landmark_vertex_ids
        .iter()
        .map(|&v| model.shape_basis.iter().map(|ch| ch[v]).collect())
        .collect()
}

/// Millimeters per meter; the ambiguity objective balances landmark movement
/// against a unit-norm penalty at meter scale.
const MM_PER_M: f64 = 1000.0;

fn ambiguity_objective(blocks: &[Vec<Vector3<f64>>], delta: &[f64]) -> f64 {
    let mut total = 0.0;
    for block in blocks {
        let mut v = Vector3::zeros();
        for (c, b) in block.iter().enumerate() {
            v += b * delta[c];
        }
        total += v.norm() / MM_PER_M;
    }
    let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
    total + (norm - 1.0).abs()
}

fn ambiguity_gradient(blocks: &[Vec<Vector3<f64>>], delta: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|g| *g = 0.0);
    for block in blocks {
        let mut v = Vector3::zeros();
        for (c, b) in block.iter().enumerate() {
            v += b * delta[c];
        }
        let n = v.norm();
        if n > 1e-12 {
            let u = v / n;
            for (c, b) in block.iter().enumerate() {
                out[c] += b.dot(&u) / MM_PER_M;
            }
        }
    }
    let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm > 1e-12 {
        let s = if norm >= 1.0 { 1.0 } else { -1.0 };
        for (c, g) in out.iter_mut().enumerate() {
            *g += s * delta[c] / norm;
        }
    }
}

/// Finds the unit-norm shape direction with the smallest summed landmark
/// movement at the rest pose. Multi-start Adam; deterministic for a given
/// config, ties broken by start index. Non-convergence is reported through
/// the objective, never raised.
pub fn optimize_ambiguity_direction(
    model: &BodyModel,
    beta_ref: &ShapeParams,
    config: &OptimConfig,
) -> Result<(ShapeParams, f64)> {
    beta_ref.validate(model.num_shape_coeffs())?;
    let blocks = landmark_blocks(model);
    let s = model.num_shape_coeffs();

    let starts: Vec<Vec<f64>> = (0..config.restarts.max(1))
        .map(|k| {
            let mut r = rng::stream(config.seed, "ambiguity-start", &[k as u64]);
            let mut v: Vec<f64> = (0..s).map(|_| r.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
            v.iter_mut().for_each(|x| *x /= n);
            v
        })
        .collect();

    let outcomes: Vec<_> = starts
        .into_par_iter()
        .map(|x0| {
            minimize(
                |x| ambiguity_objective(&blocks, x),
                |x, g| ambiguity_gradient(&blocks, x, g),
                x0,
                config,
            )
        })
        .collect();
    let mut best = outcomes
        .into_iter()
        .min_by(|a, b| a.objective.partial_cmp(&b.objective).unwrap())
        .expect("at least one start");
    // Near the optimum the unit-norm penalty's radial subgradient dominates
    // Adam's per-coordinate scaling and tangential progress stalls. Polish on
    // the unit sphere directly: project the landmark-term gradient onto the
    // tangent space and renormalize after each step.
    let norm = best.params.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm > 1e-9 {
        let mut u: Vec<f64> = best.params.iter().map(|d| d / norm).collect();
        let mut g = vec![0.0; s];
        let mut eta = 0.05;
        let mut since_improvement = 0usize;
        let mut best_u = u.clone();
        let mut best_f = ambiguity_objective(&blocks, &u);
        for _ in 0..config.max_iters {
            ambiguity_gradient(&blocks, &u, &mut g);
            let radial: f64 = g.iter().zip(&u).map(|(gi, ui)| gi * ui).sum();
            let mut step_norm = 0.0;
            for i in 0..s {
                let t = g[i] - radial * u[i];
                u[i] -= eta * t;
                step_norm += t * t;
            }
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            u.iter_mut().for_each(|x| *x /= n);
            let f = ambiguity_objective(&blocks, &u);
            if f < best_f {
                best_f = f;
                best_u.copy_from_slice(&u);
                since_improvement = 0;
            } else {
                since_improvement += 1;
                if since_improvement >= 20 {
                    eta *= 0.5;
                    u.copy_from_slice(&best_u);
                    since_improvement = 0;
                    if eta < 1e-9 {
                        break;
                    }
                }
            }
            if step_norm.sqrt() < 1e-14 {
                break;
            }
        }
        if best_f < best.objective {
            best.objective = best_f;
            best.params = best_u;
        }
    }
    Ok((ShapeParams { coeffs: best.params }, best.objective))
}

/// Ambiguity sweep results: per step the worst landmark displacement and the
/// per-measurement error against the reference shape.
#[derive(Debug, Clone)]
pub struct AmbiguityCurve {
    pub steps: Vec<f64>,
    pub max_landmark_dist_mm: Vec<f64>,
    /// `measurement_err_mm[step][measurement]`.
    pub measurement_err_mm: Vec<[f64; NUM_MEASUREMENTS]>,
    pub delta: ShapeParams,
    /// Final objective of the direction optimization.
    pub objective: f64,
}

/// Evaluates the curve along `beta_ref + k * delta` for each step `k`.
pub fn sweep_ambiguity(
    model: &BodyModel,
    beta_ref: &ShapeParams,
    delta: &ShapeParams,
    objective: f64,
    k_values: &[f64],
) -> Result<AmbiguityCurve> {
    beta_ref.validate(model.num_shape_coeffs())?;
    delta.validate(model.num_shape_coeffs())?;
    if !k_values.iter().any(|&k| k == 0.0) {
        return Err(Error::InvalidInput("k grid must include 0".into()));
    }
    let blocks = landmark_blocks(model);
    let ref_measure = measure_ground_truth(model, beta_ref)?;

    let rows: Vec<Result<(f64, [f64; NUM_MEASUREMENTS])>> = k_values
        .par_iter()
        .map(|&k| {
            let shape = ShapeParams {
                coeffs: beta_ref
                    .coeffs
                    .iter()
                    .zip(&delta.coeffs)
                    .map(|(b, d)| b + k * d)
                    .collect(),
            };
            // Landmark displacement is linear at rest: k * B_i delta.
            let mut max_dist = 0.0f64;
            for block in &blocks {
                let mut v = Vector3::zeros();
                for (c, b) in block.iter().enumerate() {
                    v += b * (k * delta.coeffs[c]);
                }
                max_dist = max_dist.max(v.norm());
            }
            let m = measure_ground_truth(model, &shape)?;
            let mut err = [0.0f64; NUM_MEASUREMENTS];
            for (j, e) in err.iter_mut().enumerate() {
                *e = (m.values_mm[j] - ref_measure.values_mm[j]).abs();
            }
            Ok((max_dist, err))
        })
        .collect();

    let mut max_landmark_dist_mm = Vec::with_capacity(k_values.len());
    let mut measurement_err_mm = Vec::with_capacity(k_values.len());
    for row in rows {
        let (d, e) = row?;
        max_landmark_dist_mm.push(d);
        measurement_err_mm.push(e);
    }
    Ok(AmbiguityCurve {
        steps: k_values.to_vec(),
        max_landmark_dist_mm,
        measurement_err_mm,
        delta: delta.clone(),
        objective,
    })
}

impl AmbiguityCurve {
    /// Plot-ready CSV: k, max landmark distance, one column per measurement.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# {CURVE_FORMAT}")?;
        let mut header = String::from("k,max_landmark_dist_mm");
        for name in MEASUREMENT_NAMES {
            header.push(',');
            header.push_str(&name.replace(' ', "_").replace(',', "_"));
        }
        writeln!(w, "{header}")?;
        for (i, &k) in self.steps.iter().enumerate() {
            let mut line = format!("{k},{}", self.max_landmark_dist_mm[i]);
            for v in self.measurement_err_mm[i] {
                line.push_str(&format!(",{v}"));
            }
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One evaluated subject/frame: id, sex tag and measurement values.
#[derive(Debug, Clone)]
pub struct LabeledMeasurements {
    pub subject_id: String,
    pub sex: Sex,
    pub values: MeasurementVector,
}

/// Which metric an [`EvalReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mae,
    SequenceStd,
}

/// Evaluation report: per-measurement values plus the aMAE footer for the
/// MAE metric, with optional sex-stratified sub-reports.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub metric: Metric,
    pub n: usize,
    pub per_measurement_mm: Vec<f64>,
    pub amae_mm: Option<f64>,
    pub stratified: Vec<(String, EvalReport)>,
}

fn mae_values(gt: &[&LabeledMeasurements], est: &[&LabeledMeasurements]) -> Vec<f64> {
    let n = gt.len() as f64;
    let mut out = vec![0.0; NUM_MEASUREMENTS];
    for (g, e) in gt.iter().zip(est) {
        for j in 0..NUM_MEASUREMENTS {
            out[j] += (g.values.values_mm[j] - e.values.values_mm[j]).abs();
        }
    }
    out.iter_mut().for_each(|v| *v /= n);
    out
}

/// Per-measurement mean absolute error between paired ground truth and
/// estimates, with the aMAE average. Pairs are matched by position and must
/// agree on subject ids. Sub-reports appear per sex when M/F tags exist.
pub fn mae(gt: &[LabeledMeasurements], est: &[LabeledMeasurements]) -> Result<EvalReport> {
    if gt.len() != est.len() {
        return Err(Error::LengthMismatch(format!(
            "gt has {} entries, est has {}",
            gt.len(),
            est.len()
        )));
    }
    if gt.is_empty() {
        return Err(Error::LengthMismatch("empty evaluation inputs".into()));
    }
    for (g, e) in gt.iter().zip(est) {
        if g.subject_id != e.subject_id {
            return Err(Error::IdMismatch(format!(
                "paired ids {:?} vs {:?}",
                g.subject_id, e.subject_id
            )));
        }
    }
    let build = |gs: Vec<&LabeledMeasurements>, es: Vec<&LabeledMeasurements>| -> EvalReport {
        let per = mae_values(&gs, &es);
        let amae = per.iter().sum::<f64>() / NUM_MEASUREMENTS as f64;
        EvalReport {
            metric: Metric::Mae,
            n: gs.len(),
            per_measurement_mm: per,
            amae_mm: Some(amae),
            stratified: Vec::new(),
        }
    };
    let mut report = build(gt.iter().collect(), est.iter().collect());
    for (sex, label) in [(Sex::Male, "sex=M"), (Sex::Female, "sex=F")] {
        let idx: Vec<usize> = (0..gt.len()).filter(|&i| gt[i].sex == sex).collect();
        if !idx.is_empty() {
            let gs: Vec<&LabeledMeasurements> = idx.iter().map(|&i| &gt[i]).collect();
            let es: Vec<&LabeledMeasurements> = idx.iter().map(|&i| &est[i]).collect();
            report.stratified.push((label.to_string(), build(gs, es)));
        }
    }
    Ok(report)
}

/// Per-measurement standard deviation of `m(t) - m(0)` over frames `t >= 1`
/// (population convention: divide by the count of differences).
pub fn sequence_std(frames: &[MeasurementVector]) -> Result<[f64; NUM_MEASUREMENTS]> {
    if frames.len() < 2 {
        return Err(Error::TooFewFrames { got: frames.len() });
    }
    let first = &frames[0];
    let n = (frames.len() - 1) as f64;
    let mut mean = [0.0f64; NUM_MEASUREMENTS];
    for f in &frames[1..] {
        for j in 0..NUM_MEASUREMENTS {
            mean[j] += f.values_mm[j] - first.values_mm[j];
        }
    }
    mean.iter_mut().for_each(|v| *v /= n);
    let mut var = [0.0f64; NUM_MEASUREMENTS];
    for f in &frames[1..] {
        for j in 0..NUM_MEASUREMENTS {
            let d = f.values_mm[j] - first.values_mm[j] - mean[j];
            var[j] += d * d;
        }
    }
    let mut out = [0.0f64; NUM_MEASUREMENTS];
    for j in 0..NUM_MEASUREMENTS {
        out[j] = (var[j] / n).sqrt();
    }
    Ok(out)
}

impl EvalReport {
    /// Report from a sequence-std evaluation.
    pub fn from_sequence(stds: [f64; NUM_MEASUREMENTS], n_frames: usize) -> Self {
        EvalReport {
            metric: Metric::SequenceStd,
            n: n_frames,
            per_measurement_mm: stds.to_vec(),
            amae_mm: None,
            stratified: Vec::new(),
        }
    }

    /// CSV: rows = measurements, aMAE footer for the MAE metric.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# {REPORT_FORMAT}")?;
        let col = match self.metric {
            Metric::Mae => "mae_mm",
            Metric::SequenceStd => "std_mm",
        };
        writeln!(w, "measurement,{col}")?;
        for (name, v) in MEASUREMENT_NAMES.iter().zip(&self.per_measurement_mm) {
            writeln!(w, "{},{}", name.replace(',', "_"), v)?;
        }
        if let Some(amae) = self.amae_mm {
            writeln!(w, "aMAE,{amae}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Structured-text twin, including stratified sub-reports.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_text_to(&mut w, "")?;
        w.flush()?;
        Ok(())
    }

    fn write_text_to<W: Write>(&self, w: &mut W, label: &str) -> Result<()> {
        if label.is_empty() {
            writeln!(w, "{REPORT_FORMAT}")?;
        } else {
            writeln!(w, "[{label}]")?;
        }
        writeln!(
            w,
            "metric\t{}",
            match self.metric {
                Metric::Mae => "mae",
                Metric::SequenceStd => "sequence_std (population)",
            }
        )?;
        writeln!(w, "n\t{}", self.n)?;
        for (name, v) in MEASUREMENT_NAMES.iter().zip(&self.per_measurement_mm) {
            writeln!(w, "{name}\t{v}")?;
        }
        if let Some(amae) = self.amae_mm {
            writeln!(w, "aMAE\t{amae}")?;
        }
        for (label, sub) in &self.stratified {
            sub.write_text_to(w, label)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::make_default_model;

    fn lm(id: &str, sex: Sex, vals: [f64; NUM_MEASUREMENTS]) -> LabeledMeasurements {
        LabeledMeasurements {
            subject_id: id.to_string(),
            sex,
            values: MeasurementVector::new(vals).unwrap(),
        }
    }

    #[test]
    fn mae_hand_computed() {
        // Two subjects, first measurement off by 10 each, rest exact.
        let mut a = [0.0; NUM_MEASUREMENTS];
        let mut b = [0.0; NUM_MEASUREMENTS];
        a[0] = 100.0;
        b[0] = 200.0;
        let gt = vec![lm("s0", Sex::Male, a), lm("s1", Sex::Female, b)];
        let mut ea = a;
        let mut eb = b;
        ea[0] = 90.0;
        eb[0] = 210.0;
        let est = vec![lm("s0", Sex::Male, ea), lm("s1", Sex::Female, eb)];
        let rep = mae(&gt, &est).unwrap();
        assert_eq!(rep.per_measurement_mm[0], 10.0);
        assert_eq!(rep.amae_mm.unwrap(), 10.0 / NUM_MEASUREMENTS as f64);
        assert_eq!(rep.stratified.len(), 2);
        assert_eq!(rep.stratified[0].1.per_measurement_mm[0], 10.0);
    }

    #[test]
    fn mae_exact_match_is_zero_and_symmetric() {
        let gt = vec![lm("s0", Sex::Unspecified, [5.0; NUM_MEASUREMENTS])];
        let rep = mae(&gt, &gt).unwrap();
        assert!(rep.per_measurement_mm.iter().all(|&v| v == 0.0));
        assert_eq!(rep.amae_mm.unwrap(), 0.0);

        let a = vec![lm("s0", Sex::Unspecified, [5.0; NUM_MEASUREMENTS])];
        let mut vals = [5.0; NUM_MEASUREMENTS];
        vals[3] = 8.5;
        let b = vec![lm("s0", Sex::Unspecified, vals)];
        let r1 = mae(&a, &b).unwrap();
        let r2 = mae(&b, &a).unwrap();
        assert_eq!(r1.per_measurement_mm, r2.per_measurement_mm);
    }

    #[test]
    fn mae_amae_is_mean_of_per_measurement() {
        let mut va = [0.0; NUM_MEASUREMENTS];
        let mut vb = [0.0; NUM_MEASUREMENTS];
        for j in 0..NUM_MEASUREMENTS {
            va[j] = 10.0 * j as f64;
            vb[j] = 10.0 * j as f64 + (j as f64 - 3.0);
        }
        let gt = vec![lm("s", Sex::Unspecified, va)];
        let est = vec![lm("s", Sex::Unspecified, vb)];
        let rep = mae(&gt, &est).unwrap();
        let mean = rep.per_measurement_mm.iter().sum::<f64>() / NUM_MEASUREMENTS as f64;
        let amae = rep.amae_mm.unwrap();
        assert!((amae - mean).abs() <= 1e-12 * mean.abs().max(1.0));
    }

    #[test]
    fn mae_rejects_mismatches() {
        let gt = vec![lm("s0", Sex::Unspecified, [0.0; NUM_MEASUREMENTS])];
        let est = vec![lm("s1", Sex::Unspecified, [0.0; NUM_MEASUREMENTS])];
        assert!(matches!(mae(&gt, &est), Err(Error::IdMismatch(_))));
        assert!(matches!(mae(&gt, &[]), Err(Error::LengthMismatch(_))));
    }

    #[test]
    fn sequence_std_hand_computed() {
        let f = |v: f64| {
            let mut vals = [0.0; NUM_MEASUREMENTS];
            vals[0] = v;
            MeasurementVector::new(vals).unwrap()
        };
        // Frames {10, 12, 8}: differences {2, -2}, population std 2.
        let stds = sequence_std(&[f(10.0), f(12.0), f(8.0)]).unwrap();
        assert_eq!(stds[0], 2.0);
        assert!(stds[1..].iter().all(|&v| v == 0.0));

        let constant = vec![f(7.0); 5];
        let stds = sequence_std(&constant).unwrap();
        assert!(stds.iter().all(|&v| v == 0.0));

        assert!(matches!(
            sequence_std(&[f(1.0)]),
            Err(Error::TooFewFrames { got: 1 })
        ));
    }

    #[test]
    fn sequence_std_shift_invariant() {
        let mk = |base: f64| {
            let vals = [base; NUM_MEASUREMENTS];
            MeasurementVector::new(vals).unwrap()
        };
        let frames: Vec<MeasurementVector> = [3.0, 5.0, 2.0, 9.0].iter().map(|&v| mk(v)).collect();
        let shifted: Vec<MeasurementVector> =
            [103.0, 105.0, 102.0, 109.0].iter().map(|&v| mk(v)).collect();
        assert_eq!(
            sequence_std(&frames).unwrap(),
            sequence_std(&shifted).unwrap()
        );
    }

    #[test]
    fn ambiguity_direction_is_near_unit_norm_with_small_objective() {
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
        let norm = delta.coeffs.iter().map(|d| d * d).sum::<f64>().sqrt();
        assert!((0.99..=1.01).contains(&norm), "norm {norm}");
        // The soft-tissue panel channel gives a direction with tiny landmark
        // footprint; the optimum objective must be well below the trivial
        // objective 1 (delta = 0).
        assert!(objective < 0.5, "objective {objective}");
    }

    #[test]
    fn sweep_origin_row_is_exactly_zero() {
        let model = make_default_model(0);
        let beta_ref = ShapeParams::zeros(model.num_shape_coeffs());
        let mut delta = ShapeParams::zeros(model.num_shape_coeffs());
        delta.coeffs[7] = 1.0;
        let curve =
            sweep_ambiguity(&model, &beta_ref, &delta, 0.0, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(curve.max_landmark_dist_mm[0], 0.0);
        assert!(curve.measurement_err_mm[0].iter().all(|&v| v == 0.0));
        // Landmark distance is |k| * const for the linear map.
        let ratio = curve.max_landmark_dist_mm[2] / curve.max_landmark_dist_mm[1];
        assert!((ratio - 2.0).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn sweep_requires_zero_step() {
        let model = make_default_model(0);
        let beta_ref = ShapeParams::zeros(8);
        let delta = ShapeParams::zeros(8);
        assert!(sweep_ambiguity(&model, &beta_ref, &delta, 0.0, &[1.0]).is_err());
    }
}
