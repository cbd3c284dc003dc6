//! Predictions CSV: one row per evaluated record, values in millimeters with
//! fixed 4-decimal formatting (stable bytes across bit-level input jitter).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anthrokit_core::error::{Error, Result};
use anthrokit_core::measurements::{MeasurementVector, MEASUREMENT_NAMES, NUM_MEASUREMENTS};

pub const PREDICTIONS_FORMAT: &str = "anthrokit-predictions-v1";

#[derive(Debug, Clone)]
pub struct PredictionRow {
    pub subject_id: String,
    pub pose_id: String,
    pub values: MeasurementVector,
}

pub fn write_predictions(path: &Path, rows: &[PredictionRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {PREDICTIONS_FORMAT}")?;
    let mut header = String::from("subject_id,pose_id");
    for name in MEASUREMENT_NAMES {
        header.push(',');
        header.push_str(&name.replace(' ', "_").replace(',', "_"));
    }
    writeln!(w, "{header}")?;
    for row in rows {
        let mut line = format!("{},{}", row.subject_id, row.pose_id);
        for v in row.values.values_mm {
            line.push_str(&format!(",{v:.4}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRow>> {
    let f = File::open(path).map_err(|e| {
        Error::InvalidInput(format!("cannot open predictions {}: {e}", path.display()))
    })?;
    let mut lines = BufReader::new(f).lines();
    let magic = lines
        .next()
        .ok_or_else(|| Error::Parse("empty predictions file".into()))??;
    if magic != format!("# {PREDICTIONS_FORMAT}") {
        return Err(Error::Parse(format!("unknown predictions format {magic:?}")));
    }
    let _header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing predictions header".into()))??;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 + NUM_MEASUREMENTS {
            return Err(Error::Parse(format!(
                "predictions line {}: {} fields, expected {}",
                i + 3,
                fields.len(),
                2 + NUM_MEASUREMENTS
            )));
        }
        let mut vals = [0.0; NUM_MEASUREMENTS];
        for (k, v) in vals.iter_mut().enumerate() {
            *v = fields[2 + k]
                .parse()
                .map_err(|_| Error::Parse(format!("predictions line {}: bad value", i + 3)))?;
        }
        rows.push(PredictionRow {
            subject_id: fields[0].to_string(),
            pose_id: fields[1].to_string(),
            values: MeasurementVector::new(vals)
                .map_err(|_| Error::Parse(format!("predictions line {}: non-finite", i + 3)))?,
        });
    }
    Ok(rows)
}
