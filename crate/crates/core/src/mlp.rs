//! Measurement regression MLP: forward pass, backpropagation, mini-batch
//! training and model persistence.
//!
//! The network is a plain fully connected stack with ReLU after every layer
//! except the last. Features and targets are standardized by training-set
//! statistics stored in the model file and applied symmetrically at
//! prediction time, so the public interface stays in raw feature/millimeter
//! space. Hand-built models default to identity standardization.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::DatasetRecord;
use crate::error::{Error, Result};
use crate::features::{feature_vector, FeatureSelection};
use crate::landmarks::{normalize, LandmarkSet};
use crate::measurements::{MeasurementVector, MEASUREMENT_NAMES, NUM_MEASUREMENTS};
use crate::registry::{LandmarkRegistry, REGISTRY_VERSION};
use crate::rng;

pub const MLP_FORMAT: &str = "anthrokit-mlp-v1";
/// Identifier of the landmark normalization the model expects.
pub const NORMALIZATION_ID: &str = "pelvis.v1";

/// Ties a trained model to its input pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub registry_version: String,
    pub selection_digest: String,
    pub normalization_id: String,
}

/// Optimizer choice for training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    AdamLike,
    SgdMomentum,
}

impl Optimizer {
    pub fn as_str(&self) -> &'static str {
        match self {
            Optimizer::AdamLike => "adam-like",
            Optimizer::SgdMomentum => "sgd-momentum",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "adam-like" => Ok(Optimizer::AdamLike),
            "sgd-momentum" => Ok(Optimizer::SgdMomentum),
            other => Err(Error::Parse(format!("unknown optimizer {other:?}"))),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Fraction of subjects held out for validation, in [0, 0.5].
    pub validation_fraction: f64,
    /// Epochs without validation improvement before stopping (0 disables).
    pub early_stop_patience: usize,
    /// Decoupled L2 weight decay per step (0 disables).
    pub weight_decay: f64,
    /// Std-dev of seeded Gaussian jitter added to raw training landmarks
    /// before normalization (mm, 0 disables). Emulates landmarking error so
    /// the regressor does not over-trust exact coordinates.
    pub landmark_jitter_mm: f64,
    /// Hidden layer widths; the paper configuration is [194, 97].
    pub hidden_dims: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 256,
            epochs: 500,
            seed: 0,
            optimizer: Optimizer::AdamLike,
            validation_fraction: 0.1,
            early_stop_patience: 50,
            weight_decay: 1e-4,
            landmark_jitter_mm: 2.0,
            hidden_dims: vec![194, 97],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::InvalidInput("learning rate must be finite and >= 0".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidInput("batch size and epochs must be positive".into()));
        }
        if !(0.0..=0.5).contains(&self.validation_fraction) {
            return Err(Error::InvalidInput(
                "validation fraction must lie in [0, 0.5]".into(),
            ));
        }
        if self.hidden_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidInput("hidden dims must be positive".into()));
        }
        if self.weight_decay < 0.0 || !self.weight_decay.is_finite() {
            return Err(Error::InvalidInput("weight decay must be finite and >= 0".into()));
        }
        if self.landmark_jitter_mm < 0.0 || !self.landmark_jitter_mm.is_finite() {
            return Err(Error::InvalidInput(
                "landmark jitter must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Provenance stored with a trained model.
#[derive(Debug, Clone)]
pub struct TrainedMeta {
    pub config: TrainConfig,
    pub epochs_run: usize,
    pub best_epoch: Option<usize>,
}

/// Fully connected measurement regressor.
#[derive(Debug, Clone)]
pub struct MlpModel {
    pub layer_dims: Vec<usize>,
    /// `weights[l]` has shape (layer_dims[l+1], layer_dims[l]).
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub x_mean: Array1<f64>,
    pub x_std: Array1<f64>,
    pub y_mean: Array1<f64>,
    pub y_std: Array1<f64>,
    pub input_spec: InputSpec,
    pub output_names: Vec<String>,
    pub trained_meta: Option<TrainedMeta>,
}

/// Per-layer gradients from [`loss_and_grad`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// One line of the training log.
#[derive(Debug, Clone)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: Option<f64>,
}

impl MlpModel {
    /// Zero-initialized model with identity standardization; useful for
    /// hand-built configurations and tests.
    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::InvalidInput("need at least input and output dims".into()));
        }
        let weights = layer_dims
            .windows(2)
            .map(|w| Array2::zeros((w[1], w[0])))
            .collect();
        let biases = layer_dims[1..].iter().map(|&d| Array1::zeros(d)).collect();
        let d_out = *layer_dims.last().unwrap();
        Ok(MlpModel {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            x_mean: Array1::zeros(layer_dims[0]),
            x_std: Array1::ones(layer_dims[0]),
            y_mean: Array1::zeros(d_out),
            y_std: Array1::ones(d_out),
            input_spec: InputSpec {
                registry_version: REGISTRY_VERSION.to_string(),
                selection_digest: String::new(),
                normalization_id: NORMALIZATION_ID.to_string(),
            },
            output_names: if d_out == NUM_MEASUREMENTS {
                MEASUREMENT_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                (0..d_out).map(|i| format!("out{i}")).collect()
            },
            trained_meta: None,
        })
    }

    fn check_shapes(&self) -> Result<()> {
        let l = self.layer_dims.len() - 1;
        if self.weights.len() != l || self.biases.len() != l {
            return Err(Error::DimensionMismatch("layer count mismatch".into()));
        }
        for (i, w) in self.weights.iter().enumerate() {
            if w.shape() != [self.layer_dims[i + 1], self.layer_dims[i]]
                || self.biases[i].len() != self.layer_dims[i + 1]
            {
                return Err(Error::DimensionMismatch(format!(
                    "layer {i} shapes do not chain with layer_dims"
                )));
            }
        }
        Ok(())
    }

    /// Raw network outputs for a standardized batch (rows = samples).
    fn forward_core(&self, z: &Array2<f64>) -> Array2<f64> {
        let mut a = z.clone();
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut s = a.dot(&w.t());
            s += b;
            if l < last {
                s.mapv_inplace(|v| v.max(0.0));
            }
            a = s;
        }
        a
    }

    /// Full-pipeline batch prediction: standardize, run the network,
    /// de-standardize.
    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_shapes()?;
        if x.ncols() != self.layer_dims[0] {
            return Err(Error::DimensionMismatch(format!(
                "input width {} != layer_dims[0] = {}",
                x.ncols(),
                self.layer_dims[0]
            )));
        }
        let z = (x - &self.x_mean) / &self.x_std;
        let out = self.forward_core(&z);
        Ok(out * &self.y_std + &self.y_mean)
    }

    /// Single-vector forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let xm = Array2::from_shape_vec((1, x.len()), x.to_vec())
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        let y = self.forward_batch(&xm)?;
        Ok(y.row(0).to_vec())
    }

    /// Forward pass for measurement-width models.
    pub fn forward_measurements(&self, x: &[f64]) -> Result<MeasurementVector> {
        MeasurementVector::from_slice(&self.forward(x)?)
    }
}

/// Mean squared error of the full pipeline over a batch, with gradients for
/// every weight and bias from backpropagation of exactly that scalar.
///
/// `x` is (B, d_in) raw features, `y_true` is (B, d_out) raw targets; the
/// loss is averaged over both the batch and the output dimensions.
pub fn loss_and_grad(
    model: &MlpModel,
    x: &Array2<f64>,
    y_true: &Array2<f64>,
) -> Result<(f64, Gradients)> {
    model.check_shapes()?;
    let b = x.nrows();
    let d_out = *model.layer_dims.last().unwrap();
    if y_true.nrows() != b || y_true.ncols() != d_out || x.ncols() != model.layer_dims[0] {
        return Err(Error::DimensionMismatch(format!(
            "batch shapes x{:?} y{:?} vs dims {:?}",
            x.shape(),
            y_true.shape(),
            model.layer_dims
        )));
    }

    // Forward, keeping pre-activations and activations.
    let z = (x - &model.x_mean) / &model.x_std;
    let last = model.weights.len() - 1;
    let mut activations: Vec<Array2<f64>> = vec![z];
    let mut preacts: Vec<Array2<f64>> = Vec::with_capacity(model.weights.len());
    for (l, (w, bias)) in model.weights.iter().zip(&model.biases).enumerate() {
        let mut s = activations[l].dot(&w.t());
        s += bias;
        preacts.push(s.clone());
        if l < last {
            s.mapv_inplace(|v| v.max(0.0));
        }
        activations.push(s);
    }

    // Raw-space prediction error; the de-standardization scale folds into the
    // output delta.
    let y_pred = activations.last().unwrap() * &model.y_std + &model.y_mean;
    let diff = &y_pred - y_true;
    let loss = diff.mapv(|v| v * v).sum() / (b * d_out) as f64;

    let scale = 2.0 / (b * d_out) as f64;
    let mut delta = diff * &model.y_std * scale;

    let mut grad_w: Vec<Array2<f64>> = Vec::with_capacity(model.weights.len());
    let mut grad_b: Vec<Array1<f64>> = Vec::with_capacity(model.weights.len());
    for l in (0..model.weights.len()).rev() {
        if l < last {
            // ReLU mask from the stored pre-activation.
            delta.zip_mut_with(&preacts[l], |d, &s| {
                if s <= 0.0 {
                    *d = 0.0;
                }
            });
        }
        grad_w.push(delta.t().dot(&activations[l]));
        grad_b.push(delta.sum_axis(Axis(0)));
        if l > 0 {
            delta = delta.dot(&model.weights[l]);
        }
    }
    grad_w.reverse();
    grad_b.reverse();
    Ok((
        loss,
        Gradients {
            weights: grad_w,
            biases: grad_b,
        },
    ))
}

/// Normalizes and featurizes a labeled record set into (X, Y, subject ids).
/// `jitter` optionally adds seeded Gaussian noise to the raw landmarks of
/// flagged rows before normalization.
fn featurize(
    records: &[&DatasetRecord],
    selection: &FeatureSelection,
    registry: &LandmarkRegistry,
    jitter: Option<(u64, f64, &[bool])>,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let d_in = selection.feature_len();
    let rows: Vec<Result<Vec<f64>>> = records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let jittered;
            let landmarks = match jitter {
                Some((seed, sigma, apply)) if apply[i] && sigma > 0.0 => {
                    let mut lm = rec.landmarks.clone();
                    let mut r = rng::stream(seed, "train-jitter", &[i as u64]);
                    let mut gauss = || -> f64 {
                        let u1: f64 = r.gen_range(f64::EPSILON..1.0);
                        let u2: f64 = r.gen_range(0.0..1.0);
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                    };
                    for p in lm.coords.iter_mut() {
                        p.x += sigma * gauss();
                        p.y += sigma * gauss();
                        p.z += sigma * gauss();
                    }
                    jittered = lm;
                    &jittered
                }
                _ => &rec.landmarks,
            };
            let (norm, _) = normalize(landmarks, registry)?;
            Ok(feature_vector(&norm, selection))
        })
        .collect();
    let mut x = Array2::zeros((records.len(), d_in));
    let mut y = Array2::zeros((records.len(), NUM_MEASUREMENTS));
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        x.row_mut(i).assign(&Array1::from(row));
        y.row_mut(i)
            .assign(&Array1::from(records[i].measurements.as_ref().unwrap().values_mm.to_vec()));
    }
    Ok((x, y))
}

/// Subject-level validation split: deterministic shuffle of the unique
/// subject ids, keeping at least one training subject.
fn split_subjects(subjects: &[String], fraction: f64, seed: u64) -> Vec<bool> {
    let mut unique: Vec<&String> = Vec::new();
    for s in subjects {
        if !unique.contains(&s) {
            unique.push(s);
        }
    }
    unique.sort();
    let mut order: Vec<usize> = (0..unique.len()).collect();
    let mut r = rng::stream(seed, "val-split", &[]);
    for i in (1..order.len()).rev() {
        let j = r.gen_range(0..=i);
        order.swap(i, j);
    }
    let n_val = ((fraction * unique.len() as f64).floor() as usize).min(unique.len().saturating_sub(1));
    let val_set: std::collections::HashSet<&String> =
        order[..n_val].iter().map(|&i| unique[i]).collect();
    subjects.iter().map(|s| val_set.contains(s)).collect()
}

fn column_stats(data: &Array2<f64>) -> (Array1<f64>, Array1<f64>) {
    let mean = data.mean_axis(Axis(0)).unwrap();
    let mut var = Array1::zeros(data.ncols());
    for row in data.rows() {
        let d = &row - &mean;
        var += &d.mapv(|v| v * v);
    }
    var /= data.nrows() as f64;
    // Features and targets are millimeter-scale. Columns that barely vary in
    // training (the normalization pins the pelvis anchors near fixed
    // coordinates) carry no shape signal but still receive full landmarking
    // noise at test time; a millimeter floor keeps them from blowing up to
    // hundreds of standard deviations under that noise.
    let std = var.mapv(|v| v.sqrt().max(1.0));
    (mean, std)
}

struct AdamState {
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
    t: i32,
}

impl AdamState {
    fn new(model: &MlpModel) -> Self {
        AdamState {
            m_w: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            v_w: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            m_b: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            v_b: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &Gradients, lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let b1t = 1.0 - B1.powi(self.t);
        let b2t = 1.0 - B2.powi(self.t);
        for l in 0..model.weights.len() {
            azip_adam(&mut model.weights[l], &mut self.m_w[l], &mut self.v_w[l], &grads.weights[l], lr, b1t, b2t, B1, B2, EPS);
            azip_adam1(&mut model.biases[l], &mut self.m_b[l], &mut self.v_b[l], &grads.biases[l], lr, b1t, b2t, B1, B2, EPS);
        }
    }

    fn step_momentum(&mut self, model: &mut MlpModel, grads: &Gradients, lr: f64) {
        const MU: f64 = 0.9;
        for l in 0..model.weights.len() {
            ndarray::Zip::from(&mut self.m_w[l])
                .and(&grads.weights[l])
                .for_each(|m, &g| *m = MU * *m + g);
            ndarray::Zip::from(&mut model.weights[l])
                .and(&self.m_w[l])
                .for_each(|w, &m| *w -= lr * m);
            ndarray::Zip::from(&mut self.m_b[l])
                .and(&grads.biases[l])
                .for_each(|m, &g| *m = MU * *m + g);
            ndarray::Zip::from(&mut model.biases[l])
                .and(&self.m_b[l])
                .for_each(|b, &m| *b -= lr * m);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn azip_adam(
    w: &mut Array2<f64>,
    m: &mut Array2<f64>,
    v: &mut Array2<f64>,
    g: &Array2<f64>,
    lr: f64,
    b1t: f64,
    b2t: f64,
    b1: f64,
    b2: f64,
    eps: f64,
) {
    ndarray::Zip::from(w).and(m).and(v).and(g).for_each(|w, m, v, &g| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let mh = *m / b1t;
        let vh = *v / b2t;
        *w -= lr * mh / (vh.sqrt() + eps);
    });
}

#[allow(clippy::too_many_arguments)]
fn azip_adam1(
    w: &mut Array1<f64>,
    m: &mut Array1<f64>,
    v: &mut Array1<f64>,
    g: &Array1<f64>,
    lr: f64,
    b1t: f64,
    b2t: f64,
    b1: f64,
    b2: f64,
    eps: f64,
) {
    ndarray::Zip::from(w).and(m).and(v).and(g).for_each(|w, m, v, &g| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let mh = *m / b1t;
        let vh = *v / b2t;
        *w -= lr * mh / (vh.sqrt() + eps);
    });
}

/// Raw-space MSE of the model over a full matrix pair.
fn dataset_mse(model: &MlpModel, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let pred = model.forward_batch(x).expect("shapes checked");
    let diff = &pred - y;
    diff.mapv(|v| v * v).sum() / (y.nrows() * y.ncols()) as f64
}

/// Trains the measurement regressor on labeled records.
///
/// Records are normalized and featurized through `selection`; training
/// minimizes the MSE in standardized target space with seeded deterministic
/// initialization and shuffling. With a validation split the best-validation
/// model is returned, otherwise the final model.
pub fn train(
    records: &[DatasetRecord],
    selection: &FeatureSelection,
    config: &TrainConfig,
) -> Result<(MlpModel, Vec<EpochStats>)> {
    config.validate()?;
    let registry = LandmarkRegistry::standard();
    let labeled: Vec<&DatasetRecord> =
        records.iter().filter(|r| r.measurements.is_some()).collect();
    if labeled.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} labeled records, need at least 2",
            labeled.len()
        )));
    }
    let subjects: Vec<String> = labeled
        .iter()
        .map(|r| r.landmarks.subject_id.clone())
        .collect();

    let is_val = if config.validation_fraction > 0.0 {
        split_subjects(&subjects, config.validation_fraction, config.seed)
    } else {
        vec![false; subjects.len()]
    };
    let train_idx: Vec<usize> = (0..labeled.len()).filter(|&i| !is_val[i]).collect();
    let val_idx: Vec<usize> = (0..labeled.len()).filter(|&i| is_val[i]).collect();
    if train_idx.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} training records after validation split",
            train_idx.len()
        )));
    }
    // Jitter applies to training rows only; validation stays clean.
    let is_train: Vec<bool> = is_val.iter().map(|v| !v).collect();
    let (x, y) = featurize(
        &labeled,
        selection,
        &registry,
        Some((config.seed, config.landmark_jitter_mm, &is_train)),
    )?;
    let x_train = x.select(Axis(0), &train_idx);
    let y_train = y.select(Axis(0), &train_idx);
    let x_val = x.select(Axis(0), &val_idx);
    let y_val = y.select(Axis(0), &val_idx);

    let (x_mean, x_std) = column_stats(&x_train);
    let (y_mean, y_std) = column_stats(&y_train);

    let mut dims = vec![selection.feature_len()];
    dims.extend_from_slice(&config.hidden_dims);
    dims.push(NUM_MEASUREMENTS);
    let mut model = MlpModel::zeros(&dims)?;
    model.x_mean = x_mean;
    model.x_std = x_std;
    model.y_mean = y_mean;
    model.y_std = y_std;
    model.input_spec.selection_digest = selection.digest();

    // He-style seeded uniform initialization.
    let mut init_rng = rng::stream(config.seed, "mlp-init", &[]);
    for w in model.weights.iter_mut() {
        let bound = (6.0 / w.ncols() as f64).sqrt();
        for v in w.iter_mut() {
            *v = init_rng.gen_range(-bound..bound);
        }
    }

    let mut adam = AdamState::new(&model);
    let mut best: Option<(f64, Vec<Array2<f64>>, Vec<Array1<f64>>, usize)> = None;
    let mut log = Vec::with_capacity(config.epochs);
    let mut epochs_without_improvement = 0usize;
    let mut epochs_run = 0usize;

    let n = train_idx.len();
    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 1..=config.epochs {
        epochs_run = epoch;
        // Cosine learning-rate decay; the floor keeps late epochs alive.
        let progress = (epoch - 1) as f64 / config.epochs as f64;
        let lr = config.learning_rate
            * (0.05 + 0.95 * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()));
        let mut shuffle_rng = rng::stream(config.seed, "mlp-shuffle", &[epoch as u64]);
        for i in (1..n).rev() {
            let j = shuffle_rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for chunk in order.chunks(config.batch_size) {
            let xb = x_train.select(Axis(0), chunk);
            let yb = y_train.select(Axis(0), chunk);
            let (loss, grads) = loss_and_grad(&model, &xb, &yb)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            if config.weight_decay > 0.0 {
                let shrink = 1.0 - lr * config.weight_decay;
                for w in model.weights.iter_mut() {
                    w.mapv_inplace(|v| v * shrink);
                }
            }
            match config.optimizer {
                Optimizer::AdamLike => adam.step(&mut model, &grads, lr),
                Optimizer::SgdMomentum => adam.step_momentum(&mut model, &grads, lr),
            }
        }

        let train_mse = dataset_mse(&model, &x_train, &y_train);
        if !train_mse.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        let val_mse = if val_idx.is_empty() {
            None
        } else {
            Some(dataset_mse(&model, &x_val, &y_val))
        };
        log.push(EpochStats {
            epoch,
            train_mse,
            val_mse,
        });

        if let Some(v) = val_mse {
            let improved = best.as_ref().map_or(true, |(b, _, _, _)| v < *b);
            if improved {
                best = Some((v, model.weights.clone(), model.biases.clone(), epoch));
                epochs_without_improvement = 0;
            } else {
                epochs_without_improvement += 1;
                if config.early_stop_patience > 0
                    && epochs_without_improvement >= config.early_stop_patience
                {
                    break;
                }
            }
        }
    }

    let best_epoch = if let Some((_, w, b, e)) = best {
        model.weights = w;
        model.biases = b;
        Some(e)
    } else {
        None
    };
    model.trained_meta = Some(TrainedMeta {
        config: config.clone(),
        epochs_run,
        best_epoch,
    });
    Ok((model, log))
}

/// Predicts the 11 measurements for a raw (posed) landmark set:
/// normalize, featurize through the selection, forward.
pub fn predict(
    model: &MlpModel,
    landmarks: &LandmarkSet,
    selection: &FeatureSelection,
) -> Result<MeasurementVector> {
    let digest = selection.digest();
    if digest != model.input_spec.selection_digest {
        return Err(Error::SelectionMismatch {
            expected: model.input_spec.selection_digest.clone(),
            actual: digest,
        });
    }
    let registry = LandmarkRegistry::standard();
    let (norm, _) = normalize(landmarks, &registry)?;
    model.forward_measurements(&feature_vector(&norm, selection))
}

/// Writes the per-epoch training log as CSV.
pub fn write_training_log(path: &Path, log: &[EpochStats]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "epoch,train_mse,val_mse")?;
    for e in log {
        match e.val_mse {
            Some(v) => writeln!(w, "{},{},{}", e.epoch, e.train_mse, v)?,
            None => writeln!(w, "{},{},", e.epoch, e.train_mse)?,
        }
    }
    w.flush()?;
    Ok(())
}

fn write_vec_line<W: Write>(out: &mut W, key: &str, values: &[f64]) -> Result<()> {
    let mut line = String::from(key);
    for v in values {
        line.push('\t');
        line.push_str(&format!("{v}"));
    }
    writeln!(out, "{line}")?;
    Ok(())
}

impl MlpModel {
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{MLP_FORMAT}")?;
        writeln!(out, "registry_version\t{}", self.input_spec.registry_version)?;
        writeln!(out, "selection_digest\t{}", self.input_spec.selection_digest)?;
        writeln!(out, "normalization_id\t{}", self.input_spec.normalization_id)?;
        writeln!(out, "output_names\t{}", self.output_names.join(";"))?;
        let dims: Vec<String> = self.layer_dims.iter().map(|d| d.to_string()).collect();
        writeln!(out, "layer_dims\t{}", dims.join("\t"))?;
        write_vec_line(out, "x_mean", self.x_mean.as_slice().unwrap())?;
        write_vec_line(out, "x_std", self.x_std.as_slice().unwrap())?;
        write_vec_line(out, "y_mean", self.y_mean.as_slice().unwrap())?;
        write_vec_line(out, "y_std", self.y_std.as_slice().unwrap())?;
        match &self.trained_meta {
            Some(meta) => writeln!(
                out,
                "trained_meta\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                meta.config.learning_rate,
                meta.config.batch_size,
                meta.config.epochs,
                meta.config.seed,
                meta.config.optimizer.as_str(),
                meta.config.validation_fraction,
                meta.config.early_stop_patience,
                meta.config.weight_decay,
                meta.config.landmark_jitter_mm,
                meta.epochs_run,
                meta.best_epoch.map(|e| e as i64).unwrap_or(-1),
                meta.config
                    .hidden_dims
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            )?,
            None => writeln!(out, "trained_meta\t-")?,
        }
        for (l, w) in self.weights.iter().enumerate() {
            writeln!(out, "layer\t{l}")?;
            for row in w.rows() {
                write_vec_line(out, "w", row.as_slice().unwrap())?;
            }
            write_vec_line(out, "b", self.biases[l].as_slice().unwrap())?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("truncated model file".into()))?
                .map_err(Error::from)
        };
        let magic = next()?;
        if magic != MLP_FORMAT {
            return Err(Error::Parse(format!("unknown model format {magic:?}")));
        }
        let mut kv = |key: &str| -> Result<String> {
            let line = next()?;
            let (k, v) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("bad model line {line:?}")))?;
            if k != key {
                return Err(Error::Parse(format!("expected {key:?}, got {k:?}")));
            }
            Ok(v.to_string())
        };
        let registry_version = kv("registry_version")?;
        let selection_digest = kv("selection_digest")?;
        let normalization_id = kv("normalization_id")?;
        let output_names: Vec<String> = kv("output_names")?.split(';').map(|s| s.to_string()).collect();
        let layer_dims: Vec<usize> = kv("layer_dims")?
            .split('\t')
            .map(|t| t.parse().map_err(|_| Error::Parse("bad layer dim".into())))
            .collect::<Result<_>>()?;
        let parse_vec = |s: String| -> Result<Vec<f64>> {
            s.split('\t')
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad real {t:?}"))))
                .collect()
        };
        let x_mean = Array1::from(parse_vec(kv("x_mean")?)?);
        let x_std = Array1::from(parse_vec(kv("x_std")?)?);
        let y_mean = Array1::from(parse_vec(kv("y_mean")?)?);
        let y_std = Array1::from(parse_vec(kv("y_std")?)?);
        let meta_line = kv("trained_meta")?;
        let trained_meta = if meta_line == "-" {
            None
        } else {
            let p: Vec<&str> = meta_line.split('\t').collect();
            if p.len() != 12 {
                return Err(Error::Parse("trained_meta needs 12 fields".into()));
            }
            let best: i64 = p[10].parse().map_err(|_| Error::Parse("bad best epoch".into()))?;
            Some(TrainedMeta {
                config: TrainConfig {
                    learning_rate: p[0].parse().map_err(|_| Error::Parse("bad lr".into()))?,
                    batch_size: p[1].parse().map_err(|_| Error::Parse("bad batch".into()))?,
                    epochs: p[2].parse().map_err(|_| Error::Parse("bad epochs".into()))?,
                    seed: p[3].parse().map_err(|_| Error::Parse("bad seed".into()))?,
                    optimizer: Optimizer::parse(p[4])?,
                    validation_fraction: p[5]
                        .parse()
                        .map_err(|_| Error::Parse("bad val fraction".into()))?,
                    early_stop_patience: p[6]
                        .parse()
                        .map_err(|_| Error::Parse("bad patience".into()))?,
                    weight_decay: p[7]
                        .parse()
                        .map_err(|_| Error::Parse("bad weight decay".into()))?,
                    landmark_jitter_mm: p[8]
                        .parse()
                        .map_err(|_| Error::Parse("bad landmark jitter".into()))?,
                    hidden_dims: if p[11].is_empty() {
                        vec![]
                    } else {
                        p[11].split(';')
                            .map(|t| t.parse().map_err(|_| Error::Parse("bad hidden dim".into())))
                            .collect::<Result<_>>()?
                    },
                },
                epochs_run: p[9].parse().map_err(|_| Error::Parse("bad epochs_run".into()))?,
                best_epoch: if best < 0 { None } else { Some(best as usize) },
            })
        };

        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..layer_dims.len() - 1 {
            let header = next()?;
            if header != format!("layer\t{l}") {
                return Err(Error::Parse(format!("expected layer {l} header, got {header:?}")));
            }
            let (rows, cols) = (layer_dims[l + 1], layer_dims[l]);
            let mut w = Array2::zeros((rows, cols));
            for r in 0..rows {
                let line = next()?;
                let vals = parse_vec(
                    line.strip_prefix("w\t")
                        .ok_or_else(|| Error::Parse("expected weight row".into()))?
                        .to_string(),
                )?;
                if vals.len() != cols {
                    return Err(Error::Parse("weight row width mismatch".into()));
                }
                w.row_mut(r).assign(&Array1::from(vals));
            }
            let line = next()?;
            let b = parse_vec(
                line.strip_prefix("b\t")
                    .ok_or_else(|| Error::Parse("expected bias row".into()))?
                    .to_string(),
            )?;
            if b.len() != rows {
                return Err(Error::Parse("bias width mismatch".into()));
            }
            weights.push(w);
            biases.push(Array1::from(b));
        }
        let model = MlpModel {
            layer_dims,
            weights,
            biases,
            x_mean,
            x_std,
            y_mean,
            y_std,
            input_spec: InputSpec {
                registry_version,
                selection_digest,
                normalization_id,
            },
            output_names,
            trained_meta,
        };
        model.check_shapes()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| {
            Error::InvalidInput(format!("cannot open model {}: {e}", path.display()))
        })?;
        Self::read_from(BufReader::new(f))
    }
}
