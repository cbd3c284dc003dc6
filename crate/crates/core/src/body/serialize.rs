//! Versioned structured-text serialization of the body model and the
//! per-record generation parameters. Reals are written in shortest
//! round-trip form, so save -> load -> save is byte-identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::registry::NUM_LANDMARKS;

use super::{BodyModel, Joint, MeasurementDef, MeasurementKind, PoseParams, RecordParams, ShapeParams};

pub const BODY_FORMAT: &str = "anthrokit-body-v1";
pub const PARAMS_FORMAT: &str = "anthrokit-params-v1";

impl BodyModel {
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{BODY_FORMAT}")?;
        writeln!(out, "seed\t{}", self.build_seed)?;
        writeln!(
            out,
            "counts\t{}\t{}\t{}\t{}\t{}\t{}",
            self.num_vertices(),
            self.faces.len(),
            self.num_joints(),
            self.num_shape_coeffs(),
            self.landmark_vertex_ids.len(),
            self.measurement_defs.len()
        )?;
        for v in &self.template_vertices {
            writeln!(out, "{}\t{}\t{}", v.x, v.y, v.z)?;
        }
        for f in &self.faces {
            writeln!(out, "{}\t{}\t{}", f[0], f[1], f[2])?;
        }
        for j in &self.joints {
            let parent = j.parent.map(|p| p as i64).unwrap_or(-1);
            writeln!(out, "{}\t{}\t{}\t{}\t{}", j.name, parent, j.rest.x, j.rest.y, j.rest.z)?;
        }
        for row in &self.skin_weights {
            let mut line = format!("{}", row.len());
            for &(j, w) in row {
                line.push_str(&format!("\t{j}\t{w}"));
            }
            writeln!(out, "{line}")?;
        }
        for channel in &self.shape_basis {
            for d in channel {
                writeln!(out, "{}\t{}\t{}", d.x, d.y, d.z)?;
            }
        }
        for &id in &self.landmark_vertex_ids {
            writeln!(out, "{id}")?;
        }
        for def in &self.measurement_defs {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                def.name,
                def.kind.as_str(),
                def.anchors.join(";"),
                def.plane_normal.x,
                def.plane_normal.y,
                def.plane_normal.z
            )?;
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
                .ok_or_else(|| Error::Parse("truncated body model file".into()))?
                .map_err(Error::from)
        };
        let magic = next()?;
        if magic != BODY_FORMAT {
            return Err(Error::Parse(format!("unknown body format {magic:?}")));
        }
        let seed_line = next()?;
        let build_seed: u64 = seed_line
            .strip_prefix("seed\t")
            .ok_or_else(|| Error::Parse("missing seed line".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad seed".into()))?;
        let counts_line = next()?;
        let nums: Vec<usize> = counts_line
            .strip_prefix("counts\t")
            .ok_or_else(|| Error::Parse("missing counts line".into()))?
            .split('\t')
            .map(|t| t.parse().map_err(|_| Error::Parse("bad count".into())))
            .collect::<Result<_>>()?;
        if nums.len() != 6 {
            return Err(Error::Parse("counts line needs 6 entries".into()));
        }
        let (nv, nf, nj, ns, nl, nm) = (nums[0], nums[1], nums[2], nums[3], nums[4], nums[5]);
        if nl != NUM_LANDMARKS {
            return Err(Error::Parse(format!("model has {nl} landmarks, expected {NUM_LANDMARKS}")));
        }

        let parse_f = |t: &str| -> Result<f64> {
            t.parse().map_err(|_| Error::Parse(format!("bad real {t:?}")))
        };
        let mut template_vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = next()?;
            let p: Vec<&str> = line.split('\t').collect();
            if p.len() != 3 {
                return Err(Error::Parse("vertex line needs 3 fields".into()));
            }
            template_vertices.push(Point3::new(parse_f(p[0])?, parse_f(p[1])?, parse_f(p[2])?));
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let line = next()?;
            let p: Vec<&str> = line.split('\t').collect();
            if p.len() != 3 {
                return Err(Error::Parse("face line needs 3 fields".into()));
            }
            let f: Vec<usize> = p
                .iter()
                .map(|t| t.parse().map_err(|_| Error::Parse("bad face index".into())))
                .collect::<Result<_>>()?;
            faces.push([f[0], f[1], f[2]]);
        }
        let mut joints = Vec::with_capacity(nj);
        for _ in 0..nj {
            let line = next()?;
            let p: Vec<&str> = line.split('\t').collect();
            if p.len() != 5 {
                return Err(Error::Parse("joint line needs 5 fields".into()));
            }
            let parent: i64 = p[1].parse().map_err(|_| Error::Parse("bad parent".into()))?;
            joints.push(Joint {
                name: p[0].to_string(),
                parent: if parent < 0 { None } else { Some(parent as usize) },
                rest: Point3::new(parse_f(p[2])?, parse_f(p[3])?, parse_f(p[4])?),
            });
        }
        let mut skin_weights = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = next()?;
            let p: Vec<&str> = line.split('\t').collect();
            let k: usize = p[0].parse().map_err(|_| Error::Parse("bad weight count".into()))?;
            if p.len() != 1 + 2 * k {
                return Err(Error::Parse("weight line arity mismatch".into()));
            }
            let mut row = Vec::with_capacity(k);
            for e in 0..k {
                let j: usize = p[1 + 2 * e]
                    .parse()
                    .map_err(|_| Error::Parse("bad weight joint".into()))?;
                row.push((j, parse_f(p[2 + 2 * e])?));
            }
            skin_weights.push(row);
        }
        let mut shape_basis = Vec::with_capacity(ns);
        for _ in 0..ns {
            let mut channel = Vec::with_capacity(nv);
            for _ in 0..nv {
                let line = next()?;
                let p: Vec<&str> = line.split('\t').collect();
                if p.len() != 3 {
                    return Err(Error::Parse("basis line needs 3 fields".into()));
                }
                channel.push(Vector3::new(parse_f(p[0])?, parse_f(p[1])?, parse_f(p[2])?));
            }
            shape_basis.push(channel);
        }
        let mut landmark_vertex_ids = Vec::with_capacity(nl);
        for _ in 0..nl {
            let line = next()?;
            landmark_vertex_ids
                .push(line.parse().map_err(|_| Error::Parse("bad landmark vertex".into()))?);
        }
        let mut measurement_defs = Vec::with_capacity(nm);
        for _ in 0..nm {
            let line = next()?;
            let p: Vec<&str> = line.split('\t').collect();
            if p.len() != 6 {
                return Err(Error::Parse("measurement line needs 6 fields".into()));
            }
            measurement_defs.push(MeasurementDef {
                name: p[0].to_string(),
                kind: MeasurementKind::parse(p[1])?,
                anchors: if p[2].is_empty() {
                    vec![]
                } else {
                    p[2].split(';').map(|s| s.to_string()).collect()
                },
                plane_normal: Vector3::new(parse_f(p[3])?, parse_f(p[4])?, parse_f(p[5])?),
            });
        }
        let model = BodyModel {
            template_vertices,
            faces,
            joints,
            skin_weights,
            shape_basis,
            landmark_vertex_ids,
            measurement_defs,
            build_seed,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| {
            Error::InvalidInput(format!("cannot open body model {}: {e}", path.display()))
        })?;
        Self::read_from(BufReader::new(f))
    }
}

/// Writes the per-record generation parameters (shape coefficients, joint
/// rotations, root translation) keyed by subject and pose id.
pub fn write_params_file(path: &Path, params: &[RecordParams]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{PARAMS_FORMAT}")?;
    for p in params {
        let mut line = format!("{}\t{}\t{}", p.subject_id, p.pose_id, p.shape.coeffs.len());
        for c in &p.shape.coeffs {
            line.push_str(&format!("\t{c}"));
        }
        line.push_str(&format!("\t{}", p.pose.joint_rotations.len()));
        for r in &p.pose.joint_rotations {
            line.push_str(&format!("\t{}\t{}\t{}", r.x, r.y, r.z));
        }
        let t = p.pose.root_translation;
        line.push_str(&format!("\t{}\t{}\t{}", t.x, t.y, t.z));
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_params_file(path: &Path) -> Result<Vec<RecordParams>> {
    let f = File::open(path).map_err(|e| {
        Error::InvalidInput(format!("cannot open params {}: {e}", path.display()))
    })?;
    let mut lines = BufReader::new(f).lines();
    let magic = lines
        .next()
        .ok_or_else(|| Error::Parse("empty params file".into()))??;
    if magic != PARAMS_FORMAT {
        return Err(Error::Parse(format!("unknown params format {magic:?}")));
    }
    let parse_f = |t: &str| -> Result<f64> {
        t.parse().map_err(|_| Error::Parse(format!("bad real {t:?}")))
    };
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let p: Vec<&str> = line.split('\t').collect();
        let mut i = 0;
        let mut take = |n: usize| -> Result<&[&str]> {
            if i + n > p.len() {
                return Err(Error::Parse("truncated params record".into()));
            }
            let s = &p[i..i + n];
            i += n;
            Ok(s)
        };
        let head = take(3)?;
        let subject_id = head[0].to_string();
        let pose_id = head[1].to_string();
        let ns: usize = head[2].parse().map_err(|_| Error::Parse("bad coeff count".into()))?;
        let coeffs: Vec<f64> = take(ns)?.iter().map(|t| parse_f(t)).collect::<Result<_>>()?;
        let nj: usize = take(1)?[0]
            .parse()
            .map_err(|_| Error::Parse("bad joint count".into()))?;
        let mut joint_rotations = Vec::with_capacity(nj);
        for _ in 0..nj {
            let r = take(3)?;
            joint_rotations.push(Vector3::new(parse_f(r[0])?, parse_f(r[1])?, parse_f(r[2])?));
        }
        let t = take(3)?;
        let root_translation = Vector3::new(parse_f(t[0])?, parse_f(t[1])?, parse_f(t[2])?);
        if i != p.len() {
            return Err(Error::Parse("trailing fields in params record".into()));
        }
        out.push(RecordParams {
            subject_id,
            pose_id,
            shape: ShapeParams { coeffs },
            pose: PoseParams {
                joint_rotations,
                root_translation,
            },
        });
    }
    Ok(out)
}
