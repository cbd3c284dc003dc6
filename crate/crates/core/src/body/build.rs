//! Construction of the default synthetic body.
//!
//! The body is a union of closed tube and ellipsoid parts (torso, neck, head,
//! and per side: upper arm, forearm, hand, thigh, shank, foot). Each part is
//! watertight on its own, so every measurement plane cuts closed loops. Limb
//! parts are rigidly bound to a single joint; the torso blends pelvis, spine
//! and neck weights along its height. Landmarks are pinned to the mesh
//! vertices nearest anatomically chosen stations.

use nalgebra::{Point3, Vector3};
use rand::Rng;

use crate::registry::{LandmarkRegistry, NUM_LANDMARKS};
use crate::rng;

use super::{BodyModel, Joint, MeasurementDef, MeasurementKind, NUM_JOINTS, NUM_SHAPE_COEFFS};

/// A-pose arm abduction from vertical, radians.
pub(crate) const ARM_ABDUCTION_RAD: f64 = 20.0 * std::f64::consts::PI / 180.0;

/// Joint indices, fixed by construction.
pub mod joints {
    pub const PELVIS: usize = 0;
    pub const SPINE: usize = 1;
    pub const NECK: usize = 2;
    pub const HEAD: usize = 3;
    pub const L_SHOULDER: usize = 4;
    pub const L_ELBOW: usize = 5;
    pub const L_WRIST: usize = 6;
    pub const R_SHOULDER: usize = 7;
    pub const R_ELBOW: usize = 8;
    pub const R_WRIST: usize = 9;
    pub const L_HIP: usize = 10;
    pub const L_KNEE: usize = 11;
    pub const L_ANKLE: usize = 12;
    pub const R_HIP: usize = 13;
    pub const R_KNEE: usize = 14;
    pub const R_ANKLE: usize = 15;
}

/// A-pose arm direction for a side (`sigma` +1 left, -1 right).
pub(crate) fn arm_direction(sigma: f64) -> Vector3<f64> {
    Vector3::new(
        sigma * ARM_ABDUCTION_RAD.sin(),
        -ARM_ABDUCTION_RAD.cos(),
        0.0,
    )
}

/// Shoulder joint rest position for a side.
pub(crate) fn shoulder_rest(sigma: f64) -> Point3<f64> {
    Point3::new(sigma * 175.0, 1395.0, 0.0)
}

#[derive(Clone)]
enum PartAxis {
    /// Tube axis segment.
    Line(Point3<f64>, Point3<f64>),
    /// Radial center (head).
    Center(Point3<f64>),
}

struct Part {
    name: &'static str,
    start: usize,
    end: usize,
    axis: PartAxis,
}

struct Builder {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    weights: Vec<Vec<(usize, f64)>>,
    parts: Vec<Part>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            vertices: Vec::new(),
            faces: Vec::new(),
            weights: Vec::new(),
            parts: Vec::new(),
        }
    }

    /// Closed tube: rings of `segments` vertices around per-ring centers,
    /// elliptical radii along `u`/`v`, capped with fans. One weight row per
    /// ring; caps reuse the end rings' weights.
    #[allow(clippy::too_many_arguments)]
    fn add_tube(
        &mut self,
        name: &'static str,
        rings: &[(Point3<f64>, f64, f64)],
        u: Vector3<f64>,
        v: Vector3<f64>,
        segments: usize,
        ring_weights: &[Vec<(usize, f64)>],
        axis: PartAxis,
    ) {
        assert!(rings.len() >= 2 && ring_weights.len() == rings.len());
        let base = self.vertices.len();
        for (r, &(center, ru, rv)) in rings.iter().enumerate() {
            for s in 0..segments {
                let a = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
                self.vertices.push(center + u * (ru * a.cos()) + v * (rv * a.sin()));
                self.weights.push(ring_weights[r].clone());
            }
        }
        let first_cap = self.vertices.len();
        self.vertices.push(rings[0].0);
        self.weights.push(ring_weights[0].clone());
        let last_cap = self.vertices.len();
        self.vertices.push(rings[rings.len() - 1].0);
        self.weights.push(ring_weights[ring_weights.len() - 1].clone());

        let ring_v = |r: usize, s: usize| base + r * segments + (s % segments);
        for r in 0..rings.len() - 1 {
            for s in 0..segments {
                let (a, b, c, d) = (
                    ring_v(r, s),
                    ring_v(r, s + 1),
                    ring_v(r + 1, s + 1),
                    ring_v(r + 1, s),
                );
                self.faces.push([a, b, c]);
                self.faces.push([a, c, d]);
            }
        }
        for s in 0..segments {
            self.faces.push([first_cap, ring_v(0, s + 1), ring_v(0, s)]);
            self.faces
                .push([last_cap, ring_v(rings.len() - 1, s), ring_v(rings.len() - 1, s + 1)]);
        }
        self.parts.push(Part {
            name,
            start: base,
            end: self.vertices.len(),
            axis,
        });
    }

    fn add_ellipsoid(
        &mut self,
        name: &'static str,
        center: Point3<f64>,
        rx: f64,
        ry: f64,
        rz: f64,
        rings: usize,
        segments: usize,
        weight: Vec<(usize, f64)>,
    ) {
        let base = self.vertices.len();
        self.vertices.push(center + Vector3::new(0.0, ry, 0.0));
        self.weights.push(weight.clone());
        for r in 1..rings {
            let phi = std::f64::consts::PI * r as f64 / rings as f64;
            for s in 0..segments {
                let theta = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
                self.vertices.push(Point3::new(
                    center.x + rx * phi.sin() * theta.cos(),
                    center.y + ry * phi.cos(),
                    center.z + rz * phi.sin() * theta.sin(),
                ));
                self.weights.push(weight.clone());
            }
        }
        let south = self.vertices.len();
        self.vertices.push(center - Vector3::new(0.0, ry, 0.0));
        self.weights.push(weight);

        let ring_v = |r: usize, s: usize| base + 1 + (r - 1) * segments + (s % segments);
        for s in 0..segments {
            self.faces.push([base, ring_v(1, s + 1), ring_v(1, s)]);
            self.faces
                .push([south, ring_v(rings - 1, s), ring_v(rings - 1, s + 1)]);
        }
        for r in 1..rings - 1 {
            for s in 0..segments {
                let (a, b, c, d) = (
                    ring_v(r, s),
                    ring_v(r, s + 1),
                    ring_v(r + 1, s + 1),
                    ring_v(r + 1, s),
                );
                self.faces.push([a, b, c]);
                self.faces.push([a, c, d]);
            }
        }
        self.parts.push(Part {
            name,
            start: base,
            end: self.vertices.len(),
            axis: PartAxis::Center(center),
        });
    }

    fn part(&self, name: &str) -> &Part {
        self.parts.iter().find(|p| p.name == name).expect("part exists")
    }

    fn nearest_vertex_in_part(
        &self,
        part: &str,
        target: Point3<f64>,
        used: &mut std::collections::HashSet<usize>,
    ) -> usize {
        let p = self.part(part);
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for i in p.start..p.end {
            if used.contains(&i) {
                continue;
            }
            let d = (self.vertices[i] - target).norm_squared();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        used.insert(best);
        best
    }
}

/// Torso skin weights as a function of station height: pelvis below, spine in
/// the middle, neck at the top, with linear crossfades.
fn torso_weights(y: f64) -> Vec<(usize, f64)> {
    use joints::*;
    if y <= 1000.0 {
        vec![(PELVIS, 1.0)]
    } else if y < 1200.0 {
        let t = (y - 1000.0) / 200.0;
        vec![(PELVIS, 1.0 - t), (SPINE, t)]
    } else if y <= 1320.0 {
        vec![(SPINE, 1.0)]
    } else if y < 1420.0 {
        let t = (y - 1320.0) / 100.0;
        vec![(SPINE, 1.0 - t), (NECK, t)]
    } else {
        vec![(NECK, 1.0)]
    }
}

fn neck_weights(y: f64) -> Vec<(usize, f64)> {
    use joints::*;
    if y <= 1470.0 {
        vec![(NECK, 1.0)]
    } else if y < 1540.0 {
        let t = (y - 1470.0) / 70.0;
        vec![(NECK, 1.0 - t), (HEAD, t)]
    } else {
        vec![(HEAD, 1.0)]
    }
}

fn gauss(y: f64, center: f64, sigma: f64) -> f64 {
    let t = (y - center) / sigma;
    (-t * t).exp()
}

/// Wrapped angular distance in radians.
fn ang_dist(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    if d > std::f64::consts::PI {
        d = 2.0 * std::f64::consts::PI - d;
    }
    d
}

/// Builds the default deterministic humanoid: 16 joints, 8 shape channels,
/// >= 2000 vertices, the 70 registry landmarks and the 11 measurement
/// definitions. Identical seeds produce identical models.
pub fn make_default_model(seed: u64) -> BodyModel {
    use joints::*;

    let mut b = Builder::new();

    // ---- torso -------------------------------------------------------
    let torso_rings: Vec<(f64, f64, f64)> = vec![
        (830.0, 150.0, 110.0),
        (880.0, 160.0, 115.0),
        (910.0, 162.0, 117.0),
        (940.0, 160.0, 115.0),
        (1010.0, 152.0, 112.0),
        (1080.0, 142.0, 105.0),
        (1150.0, 148.0, 108.0),
        (1230.0, 168.0, 118.0),
        (1280.0, 165.0, 115.0),
        (1330.0, 150.0, 105.0),
        (1390.0, 135.0, 95.0),
        (1420.0, 90.0, 75.0),
    ];
    let rings: Vec<(Point3<f64>, f64, f64)> = torso_rings
        .iter()
        .map(|&(y, rx, rz)| (Point3::new(0.0, y, 0.0), rx, rz))
        .collect();
    let weights: Vec<_> = torso_rings.iter().map(|&(y, _, _)| torso_weights(y)).collect();
    b.add_tube(
        "torso",
        &rings,
        Vector3::x(),
        Vector3::z(),
        36,
        &weights,
        PartAxis::Line(Point3::new(0.0, 830.0, 0.0), Point3::new(0.0, 1420.0, 0.0)),
    );

    // ---- neck --------------------------------------------------------
    let neck_rings: Vec<(f64, f64, f64)> = vec![
        (1395.0, 55.0, 52.0),
        (1430.0, 55.0, 52.0),
        (1470.0, 54.0, 51.0),
        (1510.0, 53.0, 50.0),
        (1540.0, 52.0, 49.0),
    ];
    let rings: Vec<(Point3<f64>, f64, f64)> = neck_rings
        .iter()
        .map(|&(y, rx, rz)| (Point3::new(0.0, y, 5.0), rx, rz))
        .collect();
    let weights: Vec<_> = neck_rings.iter().map(|&(y, _, _)| neck_weights(y)).collect();
    b.add_tube(
        "neck",
        &rings,
        Vector3::x(),
        Vector3::z(),
        20,
        &weights,
        PartAxis::Line(Point3::new(0.0, 1395.0, 5.0), Point3::new(0.0, 1540.0, 5.0)),
    );

    // ---- head --------------------------------------------------------
    let head_center = Point3::new(0.0, 1625.0, 10.0);
    b.add_ellipsoid("head", head_center, 80.0, 115.0, 95.0, 16, 24, vec![(HEAD, 1.0)]);

    // ---- arms, hands -------------------------------------------------
    for (sigma, sh, el, wr) in [
        (1.0, L_SHOULDER, L_ELBOW, L_WRIST),
        (-1.0, R_SHOULDER, R_ELBOW, R_WRIST),
    ] {
        let dir = arm_direction(sigma);
        let shoulder = shoulder_rest(sigma);
        let elbow = shoulder + dir * 300.0;
        let wrist = elbow + dir * 250.0;
        let fingertip = wrist + dir * 170.0;
        let u = Vector3::new(dir.y, -dir.x, 0.0);
        let v = Vector3::z();

        let side = |n: &'static str| -> &'static str {
            // Static names keep Part lookup simple.
            match (sigma > 0.0, n) {
                (true, "upper_arm") => "l_upper_arm",
                (true, "forearm") => "l_forearm",
                (true, "hand") => "l_hand",
                (false, "upper_arm") => "r_upper_arm",
                (false, "forearm") => "r_forearm",
                (false, "hand") => "r_hand",
                _ => unreachable!(),
            }
        };

        let start = shoulder - dir * 25.0;
        let radii = [(50.0, 48.0), (47.0, 45.0), (44.0, 42.0), (42.0, 40.0), (40.0, 38.0), (38.0, 36.0)];
        let rings: Vec<(Point3<f64>, f64, f64)> = (0..6)
            .map(|i| (start + dir * (65.0 * i as f64), radii[i].0, radii[i].1))
            .collect();
        let w = vec![vec![(sh, 1.0)]; 6];
        b.add_tube(side("upper_arm"), &rings, u, v, 18, &w, PartAxis::Line(start, elbow));

        let fstart = elbow - dir * 15.0;
        let radii = [(36.0, 34.0), (33.0, 31.0), (31.0, 29.0), (29.0, 27.0), (27.0, 25.0)];
        let rings: Vec<(Point3<f64>, f64, f64)> = (0..5)
            .map(|i| (fstart + dir * (66.25 * i as f64), radii[i].0, radii[i].1))
            .collect();
        let w = vec![vec![(el, 1.0)]; 5];
        b.add_tube(side("forearm"), &rings, u, v, 18, &w, PartAxis::Line(fstart, wrist));

        let hstart = wrist - dir * 10.0;
        let radii = [(34.0, 18.0), (30.0, 15.0), (24.0, 12.0), (12.0, 6.0)];
        let rings: Vec<(Point3<f64>, f64, f64)> = (0..4)
            .map(|i| (hstart + dir * (60.0 * i as f64), radii[i].0, radii[i].1))
            .collect();
        let w = vec![vec![(wr, 1.0)]; 4];
        b.add_tube(side("hand"), &rings, u, v, 12, &w, PartAxis::Line(hstart, fingertip));
    }

    // ---- legs, feet ----------------------------------------------------
    for (sigma, hip, knee, ankle) in [
        (1.0, L_HIP, L_KNEE, L_ANKLE),
        (-1.0, R_HIP, R_KNEE, R_ANKLE),
    ] {
        let x = sigma * 95.0;
        let side = |n: &'static str| -> &'static str {
            match (sigma > 0.0, n) {
                (true, "thigh") => "l_thigh",
                (true, "shank") => "l_shank",
                (true, "foot") => "l_foot",
                (false, "thigh") => "r_thigh",
                (false, "shank") => "r_shank",
                (false, "foot") => "r_foot",
                _ => unreachable!(),
            }
        };

        let thigh_rings: Vec<(f64, f64, f64)> = vec![
            (860.0, 82.0, 80.0),
            (790.0, 76.0, 74.0),
            (720.0, 70.0, 68.0),
            (650.0, 65.0, 63.0),
            (580.0, 60.0, 58.0),
            (510.0, 57.0, 55.0),
            (480.0, 56.0, 54.0),
        ];
        let rings: Vec<(Point3<f64>, f64, f64)> = thigh_rings
            .iter()
            .map(|&(y, rx, rz)| (Point3::new(x, y, 0.0), rx, rz))
            .collect();
        let w = vec![vec![(hip, 1.0)]; rings.len()];
        b.add_tube(
            side("thigh"),
            &rings,
            Vector3::x(),
            Vector3::z(),
            18,
            &w,
            PartAxis::Line(Point3::new(x, 860.0, 0.0), Point3::new(x, 480.0, 0.0)),
        );

        let shank_rings: Vec<(f64, f64, f64)> = vec![
            (495.0, 52.0, 50.0),
            (420.0, 48.0, 46.0),
            (340.0, 44.0, 42.0),
            (260.0, 40.0, 38.0),
            (180.0, 37.0, 35.0),
            (110.0, 36.0, 34.0),
            (85.0, 35.0, 33.0),
        ];
        let rings: Vec<(Point3<f64>, f64, f64)> = shank_rings
            .iter()
            .map(|&(y, rx, rz)| (Point3::new(x, y, 0.0), rx, rz))
            .collect();
        let w = vec![vec![(knee, 1.0)]; rings.len()];
        b.add_tube(
            side("shank"),
            &rings,
            Vector3::x(),
            Vector3::z(),
            18,
            &w,
            PartAxis::Line(Point3::new(x, 495.0, 0.0), Point3::new(x, 85.0, 0.0)),
        );

        let foot_rings: Vec<(f64, f64, f64)> = vec![
            (-80.0, 52.0, 38.0),
            (-20.0, 54.0, 38.0),
            (40.0, 53.0, 36.0),
            (100.0, 50.0, 34.0),
            (150.0, 46.0, 32.0),
            (190.0, 38.0, 28.0),
        ];
        let rings: Vec<(Point3<f64>, f64, f64)> = foot_rings
            .iter()
            .map(|&(z, rx, ry)| (Point3::new(x, 40.0, z), rx, ry))
            .collect();
        let w = vec![vec![(ankle, 1.0)]; rings.len()];
        b.add_tube(
            side("foot"),
            &rings,
            Vector3::x(),
            Vector3::y(),
            18,
            &w,
            PartAxis::Line(Point3::new(x, 40.0, -80.0), Point3::new(x, 40.0, 190.0)),
        );
    }

    // ---- deterministic jitter ------------------------------------------
    let mut jrng = rng::stream(seed, "mesh-jitter", &[]);
    for p in b.vertices.iter_mut() {
        p.x += jrng.gen_range(-0.35..0.35);
        p.y += jrng.gen_range(-0.35..0.35);
        p.z += jrng.gen_range(-0.35..0.35);
    }

    // ---- landmarks -------------------------------------------------------
    // (registry name, part, station). sigma baked into the coordinates.
    let lm_targets: Vec<(&str, &str, Point3<f64>)> = landmark_stations();
    let registry = LandmarkRegistry::standard();
    let mut used = std::collections::HashSet::new();
    let mut landmark_vertex_ids = vec![usize::MAX; NUM_LANDMARKS];
    for (name, part, target) in &lm_targets {
        let idx = registry.index_of(name).expect("station names match registry");
        landmark_vertex_ids[idx] = b.nearest_vertex_in_part(part, *target, &mut used);
    }

    // ---- shape basis ----------------------------------------------------
    let radial_of = |p: &Point3<f64>, axis: &PartAxis| -> Vector3<f64> {
        match axis {
            PartAxis::Line(a, bb) => {
                let d = bb - a;
                let len2 = d.norm_squared();
                let t = ((p - a).dot(&d) / len2).clamp(0.0, 1.0);
                p - (a + d * t)
            }
            PartAxis::Center(c) => p - c,
        }
    };

    let mut shape_basis: Vec<Vec<Vector3<f64>>> =
        vec![vec![Vector3::zeros(); b.vertices.len()]; NUM_SHAPE_COEFFS];
    let lobes_rad: [f64; 4] = [55.0, 125.0, -55.0, -125.0].map(|d: f64| d.to_radians());
    let panel_sigma = 12.0f64.to_radians();
    for part in &b.parts {
        let is_torso = part.name == "torso";
        let is_neck = part.name == "neck";
        let is_head = part.name == "head";
        let is_arm = part.name.ends_with("upper_arm")
            || part.name.ends_with("forearm")
            || part.name.ends_with("hand");
        let is_leg = part.name.ends_with("thigh")
            || part.name.ends_with("shank")
            || part.name.ends_with("foot");
        let sigma = if part.name.starts_with("l_") { 1.0 } else { -1.0 };
        for vi in part.start..part.end {
            let p = b.vertices[vi];
            let radial = radial_of(&p, &part.axis);

            // c0: stature (vertical stretch anchored at the floor).
            shape_basis[0][vi] = Vector3::new(0.0, 0.035 * p.y, 0.0);
            if is_torso || is_neck {
                // c1: overall torso girth.
                shape_basis[1][vi] = radial * 0.05;
            }
            if is_torso {
                // c2/c3: localized chest and hip girth.
                shape_basis[2][vi] = radial * (0.05 * gauss(p.y, 1230.0, 110.0));
                shape_basis[3][vi] = radial * (0.05 * gauss(p.y, 900.0, 90.0));
                // c7: soft-tissue panels between landmark stations; large
                // circumference effect, little landmark motion.
                let rn = radial.norm();
                if rn > 1e-9 {
                    let theta = p.x.atan2(p.z);
                    let h: f64 = lobes_rad
                        .iter()
                        .map(|&l| {
                            let t = ang_dist(theta, l) / panel_sigma;
                            (-t * t).exp()
                        })
                        .sum();
                    let g = gauss(p.y, 1240.0, 130.0) + 0.7 * gauss(p.y, 905.0, 80.0);
                    shape_basis[7][vi] = radial * (8.0 * g * h / rn);
                }
            }
            if is_arm || is_leg {
                // c4: limb thickness.
                shape_basis[4][vi] = radial * 0.06;
            }
            if is_arm {
                // c5: arm length (axial stretch from the shoulder).
                let dir = arm_direction(sigma);
                let axial = (p - shoulder_rest(sigma)).dot(&dir).max(0.0);
                shape_basis[5][vi] = dir * (0.04 * axial);
            }
            if is_head {
                // c6: head size.
                shape_basis[6][vi] = (p - head_center) * 0.05;
            }
        }
    }

    // ---- skeleton ------------------------------------------------------
    let mk = |name: &str, parent: Option<usize>, x: f64, y: f64, z: f64| Joint {
        name: name.to_string(),
        parent,
        rest: Point3::new(x, y, z),
    };
    let joints = vec![
        mk("pelvis", None, 0.0, 930.0, 0.0),
        mk("spine", Some(PELVIS), 0.0, 1150.0, 0.0),
        mk("neck", Some(SPINE), 0.0, 1400.0, 5.0),
        mk("head", Some(NECK), 0.0, 1540.0, 8.0),
        mk("l_shoulder", Some(SPINE), 175.0, 1395.0, 0.0),
        mk("l_elbow", Some(L_SHOULDER), 277.6, 1113.1, 0.0),
        mk("l_wrist", Some(L_ELBOW), 363.1, 878.2, 0.0),
        mk("r_shoulder", Some(SPINE), -175.0, 1395.0, 0.0),
        mk("r_elbow", Some(R_SHOULDER), -277.6, 1113.1, 0.0),
        mk("r_wrist", Some(R_ELBOW), -363.1, 878.2, 0.0),
        mk("l_hip", Some(PELVIS), 95.0, 880.0, 0.0),
        mk("l_knee", Some(L_HIP), 95.0, 480.0, 0.0),
        mk("l_ankle", Some(L_KNEE), 95.0, 90.0, 0.0),
        mk("r_hip", Some(PELVIS), -95.0, 880.0, 0.0),
        mk("r_knee", Some(R_HIP), -95.0, 480.0, 0.0),
        mk("r_ankle", Some(R_KNEE), -95.0, 90.0, 0.0),
    ];
    debug_assert_eq!(joints.len(), NUM_JOINTS);

    // ---- measurement definitions -----------------------------------------
    // Slicing planes are tilted ~10 degrees off horizontal: the tube rings
    // are horizontal, so a plane through a ring vertex with a +y normal
    // would be near-coplanar with its ring and cut degenerate slivers.
    let slice_normal = Vector3::new(0.15, 1.0, 0.09).normalize();
    let circ = |name: &str, anchor: &str| MeasurementDef {
        name: name.to_string(),
        kind: MeasurementKind::Circumference,
        anchors: vec![anchor.to_string()],
        plane_normal: slice_normal,
    };
    let length = |name: &str, a: &str, bn: &str| MeasurementDef {
        name: name.to_string(),
        kind: MeasurementKind::Length,
        anchors: vec![a.to_string(), bn.to_string()],
        plane_normal: Vector3::y(),
    };
    let measurement_defs = vec![
        circ("Ankle C.", "Rt. Lateral Malleolus"),
        length("Shoulder-elbow L.", "Rt. Acromion", "Rt. Humeral Lateral Epicondyle"),
        length("Shoulder-wrist L.", "Rt. Acromion", "Rt. Ulnar Styloid"),
        length("Spine-wrist L.", "Cervicale", "Rt. Ulnar Styloid"),
        circ("Chest C.", "Rt. Thelion"),
        length("Crotch H.", "Crotch", "Rt. Sphyrion"),
        circ("Head C.", "Sellion"),
        length("Hip C. H.", "Rt. Trochanterion", "Rt. Lateral Malleolus"),
        circ("Hip C.", "Rt. Trochanterion"),
        circ("Neck base C.", "Cervicale"),
        MeasurementDef {
            name: "Stature".to_string(),
            kind: MeasurementKind::Stature,
            anchors: vec![],
            plane_normal: Vector3::y(),
        },
    ];

    let model = BodyModel {
        template_vertices: b.vertices,
        faces: b.faces,
        joints,
        skin_weights: b.weights,
        shape_basis,
        landmark_vertex_ids,
        measurement_defs,
        build_seed: seed,
    };
    model.validate().expect("default model invariants");
    model
}

/// Anatomical stations for the 70 landmarks: (registry name, part, target).
fn landmark_stations() -> Vec<(&'static str, &'static str, Point3<f64>)> {
    let mut t: Vec<(&'static str, &'static str, Point3<f64>)> = Vec::with_capacity(70);
    let mut push = |name: &'static str, part: &'static str, x: f64, y: f64, z: f64| {
        t.push((name, part, Point3::new(x, y, z)));
    };

    // Head and neck.
    push("Sellion", "head", 0.0, 1595.0, 102.0);
    push("Rt. Infraorbitale", "head", -28.0, 1580.0, 92.0);
    push("Lt. Infraorbitale", "head", 28.0, 1580.0, 92.0);
    push("Supramenton", "head", 0.0, 1525.0, 58.0);
    push("Rt. Tragion", "head", -78.0, 1600.0, 10.0);
    push("Rt. Gonion", "head", -58.0, 1525.0, 40.0);
    push("Lt. Tragion", "head", 78.0, 1600.0, 10.0);
    push("Lt. Gonion", "head", 58.0, 1525.0, 40.0);
    push("Nuchale", "head", 0.0, 1545.0, -58.0);
    push("Cervicale", "neck", 0.0, 1430.0, -50.0);

    // Torso.
    push("Rt. Clavicale", "torso", -55.0, 1390.0, 88.0);
    push("Lt. Clavicale", "torso", 55.0, 1390.0, 88.0);
    push("Suprasternale", "torso", 0.0, 1400.0, 92.0);
    push("Substernale", "torso", 0.0, 1180.0, 110.0);
    push("Rt. Thelion", "torso", -60.0, 1230.0, 118.0);
    push("Lt. Thelion", "torso", 60.0, 1230.0, 118.0);
    push("Rt. 10th Rib", "torso", -98.0, 1080.0, 88.0);
    push("Lt. 10th Rib", "torso", 98.0, 1080.0, 88.0);
    push("10th Rib Midspine", "torso", 0.0, 1080.0, -105.0);
    push("Rt. Asis", "torso", -82.0, 910.0, 112.0);
    push("Lt. Asis", "torso", 82.0, 910.0, 112.0);
    push("Rt. Iliocristale", "torso", -155.0, 1010.0, 10.0);
    push("Lt. Iliocristale", "torso", 155.0, 1010.0, 10.0);
    push("Rt. Psis", "torso", -38.0, 940.0, -112.0);
    push("Lt. Psis", "torso", 38.0, 940.0, -112.0);
    push("Crotch", "torso", 0.0, 830.0, 0.0);
    push("Rt. Trochanterion", "torso", -160.0, 920.0, 0.0);
    push("Lt. Trochanterion", "torso", 160.0, 920.0, 0.0);
    push("Rt. Axilla Ant.", "torso", -140.0, 1330.0, 55.0);
    push("Lt. Axilla Ant.", "torso", 140.0, 1330.0, 55.0);
    push("Rt. Axilla Post.", "torso", -140.0, 1330.0, -55.0);
    push("Lt. Axilla Post.", "torso", 140.0, 1330.0, -55.0);

    // Arms (right sigma = -1, left sigma = +1).
    push("Rt. Acromion", "r_upper_arm", -180.0, 1420.0, 0.0);
    push("Lt. Acromion", "l_upper_arm", 180.0, 1420.0, 0.0);
    push("Rt. Olecranon", "r_forearm", -283.0, 1105.0, -38.0);
    push("Lt. Olecranon", "l_forearm", 283.0, 1105.0, -38.0);
    push("Rt. Humeral Lateral Epicondyle", "r_upper_arm", -320.0, 1115.0, 0.0);
    push("Lt. Humeral Lateral Epicondyle", "l_upper_arm", 320.0, 1115.0, 0.0);
    push("Rt. Humeral Medial Epicondyle", "r_upper_arm", -240.0, 1110.0, 0.0);
    push("Lt. Humeral Medial Epicondyle", "l_upper_arm", 240.0, 1110.0, 0.0);
    push("Rt. Radiale", "r_forearm", -318.0, 1078.0, 5.0);
    push("Lt. Radiale", "l_forearm", 318.0, 1078.0, 5.0);
    push("Rt. Radial Styloid", "r_forearm", -388.0, 888.0, 18.0);
    push("Lt. Radial Styloid", "l_forearm", 388.0, 888.0, 18.0);
    push("Rt. Ulnar Styloid", "r_forearm", -348.0, 878.0, -22.0);
    push("Lt. Ulnar Styloid", "l_forearm", 348.0, 878.0, -22.0);
    push("Rt. Metacarpale II", "r_hand", -408.0, 788.0, 20.0);
    push("Lt. Metacarpale II", "l_hand", 408.0, 788.0, 20.0);
    push("Rt. Metacarpale V", "r_hand", -380.0, 782.0, -20.0);
    push("Lt. Metacarpale V", "l_hand", 380.0, 782.0, -20.0);
    push("Rt. Dactylion", "r_hand", -421.3, 718.4, 0.0);
    push("Lt. Dactylion", "l_hand", 421.3, 718.4, 0.0);

    // Legs and feet.
    push("Rt. Knee Crease", "r_shank", -95.0, 478.0, -52.0);
    push("Lt. Knee Crease", "l_shank", 95.0, 478.0, -52.0);
    push("Rt. Femoral Lateral Epicondyle", "r_thigh", -152.0, 500.0, 0.0);
    push("Lt. Femoral Lateral Epicondyle", "l_thigh", 152.0, 500.0, 0.0);
    push("Rt. Femoral Medial Epicondyle", "r_thigh", -38.0, 500.0, 0.0);
    push("Lt. Femoral Medial Epicondyle", "l_thigh", 38.0, 500.0, 0.0);
    push("Rt. Lateral Malleolus", "r_shank", -131.0, 110.0, 0.0);
    push("Lt. Lateral Malleolus", "l_shank", 131.0, 110.0, 0.0);
    push("Rt. Medial Malleolus", "r_shank", -60.0, 108.0, 0.0);
    push("Lt. Medial Malleolus", "l_shank", 60.0, 108.0, 0.0);
    push("Rt. Sphyrion", "r_shank", -60.0, 80.0, 5.0);
    push("Lt. Sphyrion", "l_shank", 60.0, 80.0, 5.0);
    push("Rt. Calcaneus Post.", "r_foot", -95.0, 42.0, -78.0);
    push("Lt. Calcaneus Post.", "l_foot", 95.0, 42.0, -78.0);
    push("Rt. Metatarsal Phal. I", "r_foot", -55.0, 35.0, 145.0);
    push("Lt. Metatarsal Phal. I", "l_foot", 55.0, 35.0, 145.0);
    push("Rt. Metatarsal Phal. V", "r_foot", -138.0, 35.0, 115.0);
    push("Lt. Metatarsal Phal. V", "l_foot", 138.0, 35.0, 115.0);

    t
}
