//! Seeded synthetic dataset generation.
//!
//! Poses are drawn from three families: `standing` (near-A-pose jitter up to
//! 10 degrees), `sitting` (hip/knee flexion 70-110 degrees plus jitter) and
//! `varied` (uniform rotations within per-joint limits, hinge-only elbows and
//! knees, root orientation up to 90 degrees). Every record derives its own
//! RNG stream from (seed, subject, pose), so generation parallelizes without
//! changing the output.

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{DatasetRecord, Sex};
use crate::error::{Error, Result};
use crate::measurements::MeasurementVector;
use crate::rng;

use super::build::{arm_direction, joints};
use super::{landmarks_of, measure_ground_truth, BodyModel, PoseParams, ShapeParams};

/// Fractions of the three pose families; must sum to 1.
#[derive(Debug, Clone, Copy)]
pub struct PoseMix {
    pub standing: f64,
    pub sitting: f64,
    pub varied: f64,
}

impl PoseMix {
    /// The mirrored 1000/1000/10000 proportions.
    pub fn paper_proportions() -> Self {
        PoseMix {
            standing: 1.0 / 12.0,
            sitting: 1.0 / 12.0,
            varied: 10.0 / 12.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.standing + self.sitting + self.varied;
        if (s - 1.0).abs() > 1e-9 || self.standing < 0.0 || self.sitting < 0.0 || self.varied < 0.0
        {
            return Err(Error::InvalidInput(format!(
                "pose mix fractions must be non-negative and sum to 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Pose family of a generated record, encoded in its pose id prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoseFamily {
    Standing,
    Sitting,
    Varied,
}

impl PoseFamily {
    pub fn prefix(&self) -> &'static str {
        match self {
            PoseFamily::Standing => "stand",
            PoseFamily::Sitting => "sit",
            PoseFamily::Varied => "var",
        }
    }

    /// Recovers the family from a generated pose id.
    pub fn of_pose_id(pose_id: &str) -> Option<PoseFamily> {
        if pose_id.starts_with("stand") {
            Some(PoseFamily::Standing)
        } else if pose_id.starts_with("sit") {
            Some(PoseFamily::Sitting)
        } else if pose_id.starts_with("var") {
            Some(PoseFamily::Varied)
        } else {
            None
        }
    }
}

/// Shape and pose parameters behind one generated record; persisted alongside
/// the dataset so augmentation can rebuild the exact posed mesh.
#[derive(Debug, Clone)]
pub struct RecordParams {
    pub subject_id: String,
    pub pose_id: String,
    pub shape: ShapeParams,
    pub pose: PoseParams,
}

/// A generated dataset: posed records with ground-truth measurements, the
/// per-subject A-pose records, and the per-record parameters.
#[derive(Debug)]
pub struct GeneratedDataset {
    pub records: Vec<DatasetRecord>,
    pub apose_records: Vec<DatasetRecord>,
    pub params: Vec<RecordParams>,
}

const DEG: f64 = std::f64::consts::PI / 180.0;

fn random_axis(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn jitter_rotation(rng: &mut ChaCha8Rng, max_angle: f64) -> Vector3<f64> {
    let axis = random_axis(rng);
    axis * rng.gen_range(0.0..max_angle)
}

/// Per-joint rotation limit for the varied family (radians).
fn varied_limit(j: usize) -> f64 {
    use joints::*;
    match j {
        PELVIS => 90.0 * DEG,
        SPINE => 20.0 * DEG,
        NECK => 25.0 * DEG,
        HEAD => 20.0 * DEG,
        L_SHOULDER | R_SHOULDER => 80.0 * DEG,
        L_ELBOW | R_ELBOW | L_KNEE | R_KNEE => 90.0 * DEG,
        L_WRIST | R_WRIST | L_ANKLE | R_ANKLE => 30.0 * DEG,
        L_HIP | R_HIP => 70.0 * DEG,
        _ => 20.0 * DEG,
    }
}

/// Elbow flexion hinge axis for a side; positive angles swing the forearm
/// anteriorly.
fn elbow_hinge(sigma: f64) -> Vector3<f64> {
    let d = arm_direction(sigma);
    Vector3::new(d.y, -d.x, 0.0)
}

/// Knee flexion hinge (+x swings the heel posteriorly).
fn knee_hinge() -> Vector3<f64> {
    Vector3::x()
}

/// Hip flexion hinge (-x swings the thigh anteriorly).
fn hip_hinge() -> Vector3<f64> {
    -Vector3::x()
}

/// Draws a pose from a family.
pub fn sample_pose(model: &BodyModel, family: PoseFamily, rng: &mut ChaCha8Rng) -> PoseParams {
    use joints::*;
    let j = model.num_joints();
    let mut pose = PoseParams::rest(j);
    match family {
        PoseFamily::Standing => {
            for rot in pose.joint_rotations.iter_mut() {
                *rot = jitter_rotation(rng, 10.0 * DEG);
            }
            pose.root_translation = Vector3::new(
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-50.0..50.0),
            );
        }
        PoseFamily::Sitting => {
            for rot in pose.joint_rotations.iter_mut() {
                *rot = jitter_rotation(rng, 8.0 * DEG);
            }
            let hip = rng.gen_range(70.0..110.0) * DEG;
            let knee = rng.gen_range(70.0..110.0) * DEG;
            for (h, k) in [(L_HIP, L_KNEE), (R_HIP, R_KNEE)] {
                let dh = rng.gen_range(-5.0..5.0) * DEG;
                let dk = rng.gen_range(-5.0..5.0) * DEG;
                pose.joint_rotations[h] = hip_hinge() * (hip + dh);
                pose.joint_rotations[k] = knee_hinge() * (knee + dk);
            }
            pose.root_translation = Vector3::new(
                rng.gen_range(-100.0..100.0),
                rng.gen_range(-450.0..-350.0),
                rng.gen_range(-100.0..100.0),
            );
        }
        PoseFamily::Varied => {
            for (ji, rot) in pose.joint_rotations.iter_mut().enumerate() {
                let limit = varied_limit(ji);
                *rot = match ji {
                    L_ELBOW => elbow_hinge(1.0) * rng.gen_range(0.0..limit),
                    R_ELBOW => elbow_hinge(-1.0) * rng.gen_range(0.0..limit),
                    L_KNEE | R_KNEE => knee_hinge() * rng.gen_range(0.0..limit),
                    _ => jitter_rotation(rng, limit),
                };
            }
            pose.root_translation = Vector3::new(
                rng.gen_range(-300.0..300.0),
                rng.gen_range(-300.0..300.0),
                rng.gen_range(-300.0..300.0),
            );
        }
    }
    pose
}

/// Standard-normal draw (Box-Muller), clipped to keep shapes plausible.
fn clipped_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    z.clamp(-2.5, 2.5)
}

/// Draws a subject shape from the seeded zero-mean distribution.
pub fn sample_shape(model: &BodyModel, rng: &mut ChaCha8Rng) -> ShapeParams {
    ShapeParams {
        coeffs: (0..model.num_shape_coeffs())
            .map(|_| clipped_normal(rng))
            .collect(),
    }
}

/// Largest-remainder apportionment of `total` poses over the three families.
fn family_counts(mix: &PoseMix, total: usize) -> [usize; 3] {
    let fracs = [mix.standing, mix.sitting, mix.varied];
    let raw: Vec<f64> = fracs.iter().map(|f| f * total as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut remaining = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        (raw[b] - raw[b].floor())
            .partial_cmp(&(raw[a] - raw[a].floor()))
            .unwrap()
            .then(a.cmp(&b))
    });
    for &i in &order {
        if remaining == 0 {
            break;
        }
        counts[i] += 1;
        remaining -= 1;
    }
    [counts[0], counts[1], counts[2]]
}

fn family_of_index(counts: &[usize; 3], pose_idx: usize) -> PoseFamily {
    if pose_idx < counts[0] {
        PoseFamily::Standing
    } else if pose_idx < counts[0] + counts[1] {
        PoseFamily::Sitting
    } else {
        PoseFamily::Varied
    }
}

/// Generates `n_subjects * poses_per_subject` posed landmark records paired
/// with the subject's A-pose ground-truth measurements, plus per-subject
/// A-pose reference records. Deterministic given the seed, at any thread
/// count.
pub fn generate_dataset(
    model: &BodyModel,
    n_subjects: usize,
    poses_per_subject: usize,
    pose_mix: &PoseMix,
    seed: u64,
) -> Result<GeneratedDataset> {
    if n_subjects == 0 || poses_per_subject == 0 {
        return Err(Error::InvalidInput(
            "subject and pose counts must be at least 1".into(),
        ));
    }
    pose_mix.validate()?;
    let counts = family_counts(pose_mix, poses_per_subject);

    struct SubjectBlock {
        records: Vec<DatasetRecord>,
        apose: DatasetRecord,
        params: Vec<RecordParams>,
    }

    let blocks: Vec<Result<SubjectBlock>> = (0..n_subjects)
        .into_par_iter()
        .map(|s| -> Result<SubjectBlock> {
            let subject_id = format!("s{s:04}");
            let mut shape_rng = rng::stream(seed, "shape", &[s as u64]);
            let shape = sample_shape(model, &mut shape_rng);
            let truth: MeasurementVector = measure_ground_truth(model, &shape)?;

            let rest = PoseParams::rest(model.num_joints());
            let apose_lm = landmarks_of(model, &shape, &rest, &subject_id, "apose")?;
            let apose = DatasetRecord {
                landmarks: apose_lm,
                measurements: Some(truth.clone()),
                sex: Sex::Unspecified,
            };

            let mut records = Vec::with_capacity(poses_per_subject);
            let mut params = Vec::with_capacity(poses_per_subject);
            for p in 0..poses_per_subject {
                let family = family_of_index(&counts, p);
                let mut pose_rng = rng::stream(seed, "pose", &[s as u64, p as u64]);
                let pose = sample_pose(model, family, &mut pose_rng);
                let pose_id = format!("{}{p:04}", family.prefix());
                let lm = landmarks_of(model, &shape, &pose, &subject_id, &pose_id)?;
                records.push(DatasetRecord {
                    landmarks: lm,
                    measurements: Some(truth.clone()),
                    sex: Sex::Unspecified,
                });
                params.push(RecordParams {
                    subject_id: subject_id.clone(),
                    pose_id,
                    shape: shape.clone(),
                    pose,
                });
            }
            Ok(SubjectBlock {
                records,
                apose,
                params,
            })
        })
        .collect();

    let mut records = Vec::with_capacity(n_subjects * poses_per_subject);
    let mut apose_records = Vec::with_capacity(n_subjects);
    let mut params = Vec::with_capacity(n_subjects * poses_per_subject);
    for block in blocks {
        let block = block?;
        records.extend(block.records);
        apose_records.push(block.apose);
        params.extend(block.params);
    }
    Ok(GeneratedDataset {
        records,
        apose_records,
        params,
    })
}
