//! Landmark dataset files.
//!
//! UTF-8, line-delimited, tab-separated. The header line declares the format
//! version, the unit ("mm" or "cm") and the 70 landmark names in column
//! order. Each record holds: subject id, pose id, 210 coordinate values,
//! optionally 11 measurement values, and a sex tag ("M"/"F"/"-"). A missing
//! landmark is written as the literal token `NA` for each of its three
//! coordinates and parses to NaN.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::landmarks::LandmarkSet;
use crate::measurements::{MeasurementVector, NUM_MEASUREMENTS};
use crate::registry::{LandmarkRegistry, NUM_LANDMARKS};

pub const DATASET_FORMAT: &str = "anthrokit-dataset-v1";

/// Sex tag carried by dataset records. The synthetic generator emits
/// [`Sex::Unspecified`]; evaluation stratifies when M/F tags are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sex {
    Male,
    Female,
    Unspecified,
}

impl Sex {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sex::Male => "M",
            Sex::Female => "F",
            Sex::Unspecified => "-",
        }
    }

    pub fn parse(token: &str) -> Result<Sex> {
        match token {
            "M" => Ok(Sex::Male),
            "F" => Ok(Sex::Female),
            "-" => Ok(Sex::Unspecified),
            other => Err(Error::Parse(format!("invalid sex tag {other:?}"))),
        }
    }
}

/// One dataset record: posed landmarks plus optional A-pose ground-truth
/// measurements.
#[derive(Debug, Clone)]
pub struct DatasetRecord {
    pub landmarks: LandmarkSet,
    pub measurements: Option<MeasurementVector>,
    pub sex: Sex,
}

fn fmt_coord(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v}")
    }
}

/// Serializes records to a writer. Always writes unit `mm`, registry column
/// order, and a trailing sex field.
pub fn write_records<W: Write>(
    out: &mut W,
    registry: &LandmarkRegistry,
    records: &[DatasetRecord],
) -> Result<()> {
    let mut header = String::new();
    header.push_str(DATASET_FORMAT);
    header.push_str("\tmm");
    for name in registry.names() {
        header.push('\t');
        header.push_str(name);
    }
    writeln!(out, "{header}")?;

    let mut line = String::new();
    for rec in records {
        line.clear();
        line.push_str(&rec.landmarks.subject_id);
        line.push('\t');
        line.push_str(&rec.landmarks.pose_id);
        for p in &rec.landmarks.coords {
            let _ = write!(line, "\t{}\t{}\t{}", fmt_coord(p.x), fmt_coord(p.y), fmt_coord(p.z));
        }
        if let Some(m) = &rec.measurements {
            for v in &m.values_mm {
                let _ = write!(line, "\t{v}");
            }
        }
        line.push('\t');
        line.push_str(rec.sex.as_str());
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_dataset(
    path: &Path,
    registry: &LandmarkRegistry,
    records: &[DatasetRecord],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_records(&mut w, registry, records)?;
    w.flush()?;
    Ok(())
}

fn parse_coord(token: &str, line_no: usize) -> Result<f64> {
    if token == "NA" {
        return Ok(f64::NAN);
    }
    token
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line_no}: bad coordinate {token:?}")))
}

/// Parses a dataset from a reader, reordering columns into registry order and
/// converting to millimeters when the header declares `cm`.
pub fn read_records<R: BufRead>(
    input: R,
    registry: &LandmarkRegistry,
) -> Result<Vec<DatasetRecord>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty dataset file".to_string()))??;
    let fields: Vec<&str> = header.split('\t').collect();
    if fields.len() != 2 + NUM_LANDMARKS {
        return Err(Error::Parse(format!(
            "header has {} fields, expected {}",
            fields.len(),
            2 + NUM_LANDMARKS
        )));
    }
    if fields[0] != DATASET_FORMAT {
        return Err(Error::Parse(format!(
            "unknown dataset format {:?}, expected {DATASET_FORMAT:?}",
            fields[0]
        )));
    }
    let scale = match fields[1] {
        "mm" => 1.0,
        "cm" => 10.0,
        other => return Err(Error::Parse(format!("unknown unit {other:?}"))),
    };
    // Column index in the file for each registry landmark.
    let mut col_of = vec![usize::MAX; NUM_LANDMARKS];
    for (file_col, name) in fields[2..].iter().enumerate() {
        let reg_idx = registry
            .index_of(name)
            .map_err(|_| Error::Parse(format!("unknown landmark name in header: {name:?}")))?;
        if col_of[reg_idx] != usize::MAX {
            return Err(Error::Parse(format!("duplicate landmark in header: {name:?}")));
        }
        col_of[reg_idx] = file_col;
    }

    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let base = 2 + NUM_LANDMARKS * 3;
        let (has_meas, has_sex) = match fields.len() {
            n if n == base => (false, false),
            n if n == base + 1 => (false, true),
            n if n == base + NUM_MEASUREMENTS => (true, false),
            n if n == base + NUM_MEASUREMENTS + 1 => (true, true),
            n => {
                return Err(Error::Parse(format!(
                    "line {line_no}: record has {n} fields, expected {base} (+measurements/sex)"
                )))
            }
        };
        let subject_id = fields[0];
        let pose_id = fields[1];
        let mut coords = vec![Point3::origin(); NUM_LANDMARKS];
        for (reg_idx, &file_col) in col_of.iter().enumerate() {
            let off = 2 + file_col * 3;
            let x = parse_coord(fields[off], line_no)?;
            let y = parse_coord(fields[off + 1], line_no)?;
            let z = parse_coord(fields[off + 2], line_no)?;
            coords[reg_idx] = Point3::new(x * scale, y * scale, z * scale);
        }
        let measurements = if has_meas {
            let off = base;
            let mut vals = [0.0; NUM_MEASUREMENTS];
            for (k, v) in vals.iter_mut().enumerate() {
                *v = fields[off + k]
                    .parse::<f64>()
                    .map_err(|_| {
                        Error::Parse(format!(
                            "line {line_no}: bad measurement {:?}",
                            fields[off + k]
                        ))
                    })?
                    * scale;
            }
            Some(MeasurementVector::new(vals).map_err(|_| {
                Error::Parse(format!("line {line_no}: non-finite measurement"))
            })?)
        } else {
            None
        };
        let sex = if has_sex {
            Sex::parse(fields[fields.len() - 1])
                .map_err(|e| Error::Parse(format!("line {line_no}: {e}")))?
        } else {
            Sex::Unspecified
        };
        records.push(DatasetRecord {
            landmarks: LandmarkSet::new(coords, subject_id, pose_id)?,
            measurements,
            sex,
        });
    }
    Ok(records)
}

pub fn read_dataset(path: &Path, registry: &LandmarkRegistry) -> Result<Vec<DatasetRecord>> {
    let f = File::open(path).map_err(|e| {
        Error::InvalidInput(format!("cannot open dataset {}: {e}", path.display()))
    })?;
    read_records(BufReader::new(f), registry)
}
