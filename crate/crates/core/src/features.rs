//! Pose-independent landmark-distance feature selection.
//!
//! Candidate features are all C(70,2) = 2415 pairwise landmark distances.
//! Across many posed samples of a single subject, a pair is kept when the
//! median absolute deviation of its distance from the A-pose reference
//! distance stays below a threshold (10 mm by default). Selected distances
//! are appended to the 210 flattened coordinates to form the regression
//! input.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::landmarks::{flatten, LandmarkSet};
use crate::registry::{LandmarkRegistry, NUM_LANDMARKS};

/// C(70, 2).
pub const NUM_PAIRS: usize = NUM_LANDMARKS * (NUM_LANDMARKS - 1) / 2;

pub const SELECTION_FORMAT: &str = "anthrokit-selection-v1";

/// Median convention for even-length samples: the lower-middle order
/// statistic, never an average of two elements.
pub const MEDIAN_CONVENTION: &str = "lower-middle";

/// Lexicographic index of the pair (i, j), i < j.
pub fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < NUM_LANDMARKS);
    i * NUM_LANDMARKS - i * (i + 1) / 2 + (j - i - 1)
}

/// Inverse of [`pair_index`].
pub fn pair_from_index(k: usize) -> (usize, usize) {
    debug_assert!(k < NUM_PAIRS);
    let mut i = 0;
    let mut offset = 0;
    loop {
        let row = NUM_LANDMARKS - 1 - i;
        if k < offset + row {
            return (i, i + 1 + (k - offset));
        }
        offset += row;
        i += 1;
    }
}

/// All 2415 pairwise distances in lexicographic pair order (mm).
pub fn pairwise_distances(landmarks: &LandmarkSet) -> Vec<f64> {
    let mut out = Vec::with_capacity(NUM_PAIRS);
    for i in 0..NUM_LANDMARKS {
        let pi = landmarks.coords[i];
        for pj in &landmarks.coords[i + 1..] {
            out.push((pi - pj).norm());
        }
    }
    out
}

/// The selected pose-independent distance features plus audit statistics.
#[derive(Debug, Clone)]
pub struct FeatureSelection {
    /// Selected (i, j) landmark index pairs, i < j, sorted lexicographically.
    pub pairs: Vec<(usize, usize)>,
    pub threshold_mm: f64,
    /// Median absolute deviation from the reference distance for every
    /// candidate pair (all 2415, for audit).
    pub per_pair_median_dev_mm: Vec<f64>,
    pub reference_subject_id: String,
    pub n_poses: usize,
    pub median_convention: String,
}

impl FeatureSelection {
    /// Selection retaining every pair, with zero deviations. Used for wiring
    /// tests; real selections come from [`select_features`].
    pub fn all_pairs(reference_subject_id: &str) -> Self {
        FeatureSelection {
            pairs: (0..NUM_PAIRS).map(pair_from_index).collect(),
            threshold_mm: f64::INFINITY,
            per_pair_median_dev_mm: vec![0.0; NUM_PAIRS],
            reference_subject_id: reference_subject_id.to_string(),
            n_poses: 0,
            median_convention: MEDIAN_CONVENTION.to_string(),
        }
    }

    /// Input width of the regressor fed by this selection.
    pub fn feature_len(&self) -> usize {
        NUM_LANDMARKS * 3 + self.pairs.len()
    }

    /// Keeps at most `max_pairs` selected pairs, preferring the smallest
    /// median deviations (ties by pair index), in lexicographic order.
    pub fn truncated(mut self, max_pairs: usize) -> Self {
        if self.pairs.len() > max_pairs {
            let mut by_dev: Vec<(usize, usize)> = self.pairs.clone();
            by_dev.sort_by(|a, b| {
                let da = self.per_pair_median_dev_mm[pair_index(a.0, a.1)];
                let db = self.per_pair_median_dev_mm[pair_index(b.0, b.1)];
                da.total_cmp(&db).then(a.cmp(b))
            });
            by_dev.truncate(max_pairs);
            by_dev.sort();
            self.pairs = by_dev;
        }
        self
    }

    /// SHA-256 hex digest of the canonical serialization. Embedded in model
    /// files so predictions can verify they were given the same selection.
    pub fn digest(&self) -> String {
        let mut bytes = Vec::new();
        self.write_to(&mut bytes).expect("in-memory write");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let out = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in out {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        let reg = LandmarkRegistry::standard();
        writeln!(out, "{SELECTION_FORMAT}")?;
        writeln!(out, "registry_version\t{}", reg.version())?;
        writeln!(out, "threshold_mm\t{}", self.threshold_mm)?;
        writeln!(out, "reference_subject_id\t{}", self.reference_subject_id)?;
        writeln!(out, "n_poses\t{}", self.n_poses)?;
        writeln!(out, "median_convention\t{}", self.median_convention)?;
        writeln!(out, "pairs\t{}", self.pairs.len())?;
        for &(i, j) in &self.pairs {
            writeln!(out, "{}\t{}", reg.name_of(i), reg.name_of(j))?;
        }
        writeln!(out, "medians\t{}", self.per_pair_median_dev_mm.len())?;
        for (k, dev) in self.per_pair_median_dev_mm.iter().enumerate() {
            let (i, j) = pair_from_index(k);
            writeln!(out, "{}\t{}\t{}", reg.name_of(i), reg.name_of(j), dev)?;
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
        fn next(lines: &mut impl Iterator<Item = std::io::Result<String>>) -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("truncated selection file".into()))?
                .map_err(Error::from)
        }
        fn kv(
            lines: &mut impl Iterator<Item = std::io::Result<String>>,
            key: &str,
        ) -> Result<String> {
            let line = next(lines)?;
            let (k, v) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("bad selection line {line:?}")))?;
            if k != key {
                return Err(Error::Parse(format!("expected key {key:?}, got {k:?}")));
            }
            Ok(v.to_string())
        }

        let reg = LandmarkRegistry::standard();
        let mut lines = input.lines();
        let magic = next(&mut lines)?;
        if magic != SELECTION_FORMAT {
            return Err(Error::Parse(format!("unknown selection format {magic:?}")));
        }
        let registry_version = kv(&mut lines, "registry_version")?;
        if registry_version != reg.version() {
            return Err(Error::Parse(format!(
                "selection registry version {registry_version:?} does not match {:?}",
                reg.version()
            )));
        }
        let threshold_mm: f64 = kv(&mut lines, "threshold_mm")?
            .parse()
            .map_err(|_| Error::Parse("bad threshold".into()))?;
        let reference_subject_id = kv(&mut lines, "reference_subject_id")?;
        let n_poses: usize = kv(&mut lines, "n_poses")?
            .parse()
            .map_err(|_| Error::Parse("bad n_poses".into()))?;
        let median_convention = kv(&mut lines, "median_convention")?;
        let n_pairs: usize = kv(&mut lines, "pairs")?
            .parse()
            .map_err(|_| Error::Parse("bad pair count".into()))?;
        let mut pairs = Vec::with_capacity(n_pairs);
        for _ in 0..n_pairs {
            let line = next(&mut lines)?;
            let (a, b) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("bad pair line {line:?}")))?;
            let i = reg.index_of(a).map_err(|e| Error::Parse(e.to_string()))?;
            let j = reg.index_of(b).map_err(|e| Error::Parse(e.to_string()))?;
            if i >= j {
                return Err(Error::Parse(format!("pair {a:?},{b:?} not in canonical order")));
            }
            pairs.push((i, j));
        }
        let n_medians: usize = kv(&mut lines, "medians")?
            .parse()
            .map_err(|_| Error::Parse("bad median count".into()))?;
        if n_medians != NUM_PAIRS {
            return Err(Error::Parse(format!(
                "selection lists {n_medians} medians, expected {NUM_PAIRS}"
            )));
        }
        let mut per_pair_median_dev_mm = vec![0.0; NUM_PAIRS];
        for slot in per_pair_median_dev_mm.iter_mut() {
            let line = next(&mut lines)?;
            let mut it = line.split('\t');
            let a = it.next().ok_or_else(|| Error::Parse("bad median line".into()))?;
            let b = it.next().ok_or_else(|| Error::Parse("bad median line".into()))?;
            let v = it.next().ok_or_else(|| Error::Parse("bad median line".into()))?;
            let _ = (reg.index_of(a), reg.index_of(b));
            *slot = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad median value {v:?}")))?;
        }
        Ok(FeatureSelection {
            pairs,
            threshold_mm,
            per_pair_median_dev_mm,
            reference_subject_id,
            n_poses,
            median_convention,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| {
            Error::InvalidInput(format!("cannot open selection {}: {e}", path.display()))
        })?;
        Self::read_from(BufReader::new(f))
    }
}

/// Memory policy for [`select_features_with`].
#[derive(Debug, Clone)]
pub struct SelectOptions {
    /// Maximum number of deviation values (n_poses * 2415) buffered in
    /// memory; beyond this the values spill to a temporary file and medians
    /// are taken in a second, chunked pass.
    pub memory_cap_values: usize,
    /// Directory for the spill file (system temp dir when `None`).
    pub spill_dir: Option<PathBuf>,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            memory_cap_values: 50_000_000,
            spill_dir: None,
        }
    }
}

/// Lower-middle order statistic, selected in place.
fn median_lower_middle(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let idx = (values.len() - 1) / 2;
    let (_, m, _) = values.select_nth_unstable_by(idx, f64::total_cmp);
    *m
}

fn deviations(reference: &[f64], sample: &LandmarkSet) -> Result<Vec<f64>> {
    if !sample.all_finite() {
        return Err(Error::NonFinite(format!(
            "posed sample subject {:?} pose {:?}",
            sample.subject_id, sample.pose_id
        )));
    }
    let d = pairwise_distances(sample);
    Ok(d.iter().zip(reference).map(|(s, r)| (s - r).abs()).collect())
}

/// Selects pose-independent pairs with default memory options.
pub fn select_features<I>(
    reference_apose: &LandmarkSet,
    posed_samples: I,
    threshold_mm: f64,
) -> Result<FeatureSelection>
where
    I: IntoIterator<Item = Result<LandmarkSet>>,
{
    select_features_with(reference_apose, posed_samples, threshold_mm, &SelectOptions::default())
}

/// Selects pose-independent pairs, spilling deviations to disk when they
/// exceed the configured memory cap.
pub fn select_features_with<I>(
    reference_apose: &LandmarkSet,
    posed_samples: I,
    threshold_mm: f64,
    options: &SelectOptions,
) -> Result<FeatureSelection>
where
    I: IntoIterator<Item = Result<LandmarkSet>>,
{
    if !(threshold_mm > 0.0) {
        return Err(Error::InvalidInput(format!(
            "threshold must be positive, got {threshold_mm}"
        )));
    }
    if !reference_apose.all_finite() {
        return Err(Error::NonFinite("reference landmark set".into()));
    }
    let reference = pairwise_distances(reference_apose);
    let max_in_memory_samples = (options.memory_cap_values / NUM_PAIRS).max(1);

    // Pass 1: stream samples, buffering deviations sample-major; spill to a
    // temp file once the cap is reached.
    let mut buffered: Vec<Vec<f64>> = Vec::new();
    let mut spill: Option<File> = None;
    let mut n_poses = 0usize;
    for sample in posed_samples {
        let devs = deviations(&reference, &sample?)?;
        n_poses += 1;
        if spill.is_none() && buffered.len() >= max_in_memory_samples {
            let mut file = match &options.spill_dir {
                Some(dir) => tempfile_in(dir)?,
                None => tempfile_in(&std::env::temp_dir())?,
            };
            let mut w = BufWriter::new(&mut file);
            for row in &buffered {
                write_f64_row(&mut w, row)?;
            }
            w.flush()?;
            drop(w);
            buffered.clear();
            buffered.shrink_to_fit();
            spill = Some(file);
        }
        match &mut spill {
            Some(file) => write_f64_row(file, &devs)?,
            None => buffered.push(devs),
        }
    }
    if n_poses == 0 {
        return Err(Error::EmptyStream);
    }

    let medians = match spill {
        None => {
            // Transpose in memory: per-pair sample vectors.
            let mut medians = vec![0.0f64; NUM_PAIRS];
            let mut column = vec![0.0f64; n_poses];
            for (k, m) in medians.iter_mut().enumerate() {
                for (s, row) in buffered.iter().enumerate() {
                    column[s] = row[k];
                }
                *m = median_lower_middle(&mut column);
            }
            medians
        }
        Some(mut file) => {
            // Pass 2: chunked column gathers from the spill file.
            let chunk = (options.memory_cap_values / n_poses).max(1).min(NUM_PAIRS);
            let mut medians = vec![0.0f64; NUM_PAIRS];
            let mut columns = vec![0.0f64; chunk * n_poses];
            let mut row = vec![0.0f64; NUM_PAIRS];
            let mut start = 0;
            while start < NUM_PAIRS {
                let width = chunk.min(NUM_PAIRS - start);
                file.seek(SeekFrom::Start(0))?;
                let mut r = BufReader::new(&mut file);
                for s in 0..n_poses {
                    read_f64_row(&mut r, &mut row)?;
                    for c in 0..width {
                        columns[c * n_poses + s] = row[start + c];
                    }
                }
                for c in 0..width {
                    medians[start + c] =
                        median_lower_middle(&mut columns[c * n_poses..(c + 1) * n_poses]);
                }
                start += width;
            }
            medians
        }
    };

    let pairs = medians
        .iter()
        .enumerate()
        .filter(|(_, &dev)| dev < threshold_mm)
        .map(|(k, _)| pair_from_index(k))
        .collect();
    Ok(FeatureSelection {
        pairs,
        threshold_mm,
        per_pair_median_dev_mm: medians,
        reference_subject_id: reference_apose.subject_id.clone(),
        n_poses,
        median_convention: MEDIAN_CONVENTION.to_string(),
    })
}

fn tempfile_in(dir: &Path) -> Result<File> {
    // Anonymous temp file: unlinked on creation where the platform allows.
    let path = dir.join(format!(
        "anthrokit-spill-{}-{:x}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    ));
    let file = std::fs::OpenOptions::new()
        .create_new(true)
        .read(true)
        .write(true)
        .open(&path)?;
    let _ = std::fs::remove_file(&path);
    Ok(file)
}

fn write_f64_row<W: Write>(w: &mut W, row: &[f64]) -> Result<()> {
    for v in row {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64_row<R: Read>(r: &mut R, row: &mut [f64]) -> Result<()> {
    let mut buf = [0u8; 8];
    for v in row.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    Ok(())
}

/// Concatenates the 210 flattened coordinates with the selected pair
/// distances (selection order). The landmarks must already be normalized;
/// this function does not re-normalize.
pub fn feature_vector(landmarks: &LandmarkSet, selection: &FeatureSelection) -> Vec<f64> {
    let mut out = flatten(landmarks);
    out.reserve(selection.pairs.len());
    for &(i, j) in &selection.pairs {
        out.push((landmarks.coords[i] - landmarks.coords[j]).norm());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn coincident_set() -> LandmarkSet {
        LandmarkSet::new(vec![Point3::origin(); NUM_LANDMARKS], "s", "p").unwrap()
    }

    fn random_set(rng: &mut impl Rng) -> LandmarkSet {
        let coords = (0..NUM_LANDMARKS)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-500.0..500.0),
                    rng.gen_range(-500.0..500.0),
                    rng.gen_range(-500.0..500.0),
                )
            })
            .collect();
        LandmarkSet::new(coords, "s", "p").unwrap()
    }

    #[test]
    fn pair_index_roundtrip() {
        let mut k = 0;
        for i in 0..NUM_LANDMARKS {
            for j in i + 1..NUM_LANDMARKS {
                assert_eq!(pair_index(i, j), k);
                assert_eq!(pair_from_index(k), (i, j));
                k += 1;
            }
        }
        assert_eq!(k, NUM_PAIRS);
    }

    #[test]
    fn coincident_landmarks_give_zero_distances() {
        let d = pairwise_distances(&coincident_set());
        assert_eq!(d.len(), NUM_PAIRS);
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_separated_pair() {
        let mut set = coincident_set();
        set.coords[4] = Point3::new(100.0, 0.0, 0.0);
        let d = pairwise_distances(&set);
        for (k, &v) in d.iter().enumerate() {
            let (i, j) = pair_from_index(k);
            if i == 4 || j == 4 {
                assert_eq!(v, 100.0);
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn matches_brute_force_oracle() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..20 {
            let set = random_set(&mut rng);
            let fast = pairwise_distances(&set);
            // Brute-force double loop, independent of the index arithmetic.
            let mut slow = Vec::new();
            for i in 0..NUM_LANDMARKS {
                for j in 0..NUM_LANDMARKS {
                    if i < j {
                        slow.push((set.coords[i] - set.coords[j]).norm());
                    }
                }
            }
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn reference_only_stream_selects_everything() {
        let reference = {
            let mut rng = StdRng::seed_from_u64(1);
            random_set(&mut rng)
        };
        let sel = select_features(&reference, vec![Ok(reference.clone())], 10.0).unwrap();
        assert_eq!(sel.pairs.len(), NUM_PAIRS);
        assert!(sel.per_pair_median_dev_mm.iter().all(|&d| d == 0.0));
        assert_eq!(sel.n_poses, 1);
    }

    #[test]
    fn hand_built_median_thresholds() {
        // Pair (0,1) deviates by {0, 5, 20} mm; median (lower-middle) is 5.
        let mut reference = coincident_set();
        reference.coords[1] = Point3::new(100.0, 0.0, 0.0);
        let mut samples = Vec::new();
        for delta in [0.0, 5.0, 20.0] {
            let mut s = reference.clone();
            s.coords[1] = Point3::new(100.0 + delta, 0.0, 0.0);
            samples.push(s);
        }
        let k01 = pair_index(0, 1);
        let sel =
            select_features(&reference, samples.iter().cloned().map(Ok), 10.0).unwrap();
        assert_eq!(sel.per_pair_median_dev_mm[k01], 5.0);
        assert!(sel.pairs.contains(&(0, 1)));
        let sel = select_features(&reference, samples.into_iter().map(Ok), 4.0).unwrap();
        assert_eq!(sel.per_pair_median_dev_mm[k01], 5.0);
        assert!(!sel.pairs.contains(&(0, 1)));
    }

    #[test]
    fn empty_stream_rejected() {
        let reference = coincident_set();
        let err = select_features(&reference, Vec::new(), 10.0).unwrap_err();
        assert!(matches!(err, Error::EmptyStream));
    }

    #[test]
    fn spill_path_matches_in_memory() {
        let mut rng = StdRng::seed_from_u64(77);
        let reference = random_set(&mut rng);
        let samples: Vec<LandmarkSet> = (0..17).map(|_| random_set(&mut rng)).collect();
        let in_mem = select_features(
            &reference,
            samples.iter().cloned().map(Ok),
            10.0,
        )
        .unwrap();
        // Force the spill path with a tiny cap.
        let opts = SelectOptions {
            memory_cap_values: NUM_PAIRS * 3,
            spill_dir: None,
        };
        let spilled =
            select_features_with(&reference, samples.iter().cloned().map(Ok), 10.0, &opts)
                .unwrap();
        assert_eq!(in_mem.pairs, spilled.pairs);
        assert_eq!(in_mem.per_pair_median_dev_mm, spilled.per_pair_median_dev_mm);
    }

    #[test]
    fn selection_file_roundtrip_and_digest() {
        let mut rng = StdRng::seed_from_u64(5);
        let reference = random_set(&mut rng);
        let samples: Vec<_> = (0..9).map(|_| Ok(random_set(&mut rng))).collect();
        let sel = select_features(&reference, samples, 300.0).unwrap();
        let mut buf = Vec::new();
        sel.write_to(&mut buf).unwrap();
        let parsed = FeatureSelection::read_from(buf.as_slice()).unwrap();
        assert_eq!(sel.pairs, parsed.pairs);
        assert_eq!(sel.per_pair_median_dev_mm, parsed.per_pair_median_dev_mm);
        assert_eq!(sel.digest(), parsed.digest());
    }

    #[test]
    fn feature_vector_layout() {
        let mut rng = StdRng::seed_from_u64(6);
        let set = random_set(&mut rng);
        let empty = FeatureSelection {
            pairs: vec![],
            threshold_mm: 1.0,
            per_pair_median_dev_mm: vec![0.0; NUM_PAIRS],
            reference_subject_id: "s".into(),
            n_poses: 1,
            median_convention: MEDIAN_CONVENTION.into(),
        };
        assert_eq!(feature_vector(&set, &empty), flatten(&set));
        let all = FeatureSelection::all_pairs("s");
        let fv = feature_vector(&set, &all);
        assert_eq!(fv.len(), 210 + NUM_PAIRS);
        assert_eq!(&fv[..210], flatten(&set).as_slice());
        assert_eq!(&fv[210..], pairwise_distances(&set).as_slice());
    }
}
