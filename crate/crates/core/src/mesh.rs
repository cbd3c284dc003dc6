//! Triangle-mesh geometry: plane cross-sections, loop perimeters, and
//! on-surface landmark perturbation.
//!
//! Cross-sections cut the mesh with a plane by exact triangle/plane
//! intersection and stitch the resulting segments into closed loops. Loops
//! are ordered and oriented canonically so results are reproducible
//! regardless of face order or thread count.

use nalgebra::{Point3, Unit, UnitVector3, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Indexed triangle mesh, coordinates in millimeters.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// Axis-aligned bounds as (min, max) corners.
    pub fn bounds(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Closest point on the mesh surface to `p`, with the owning face index.
    pub fn closest_surface_point(&self, p: &Point3<f64>) -> (Point3<f64>, usize) {
        let mut best = (Point3::origin(), 0usize);
        let mut best_d2 = f64::INFINITY;
        for (fi, f) in self.faces.iter().enumerate() {
            let q = closest_point_on_triangle(
                p,
                &self.vertices[f[0]],
                &self.vertices[f[1]],
                &self.vertices[f[2]],
            );
            let d2 = (q - p).norm_squared();
            if d2 < best_d2 {
                best_d2 = d2;
                best = (q, fi);
            }
        }
        best
    }

    /// Unit normal of face `fi` (zero-area faces fall back to +y).
    pub fn face_normal(&self, fi: usize) -> UnitVector3<f64> {
        let f = self.faces[fi];
        let n = (self.vertices[f[1]] - self.vertices[f[0]])
            .cross(&(self.vertices[f[2]] - self.vertices[f[0]]));
        if n.norm() < 1e-12 {
            Unit::new_unchecked(Vector3::y())
        } else {
            Unit::new_normalize(n)
        }
    }
}

/// Plane/mesh intersection: closed polyline loops lying on the source plane.
#[derive(Debug, Clone)]
pub struct CrossSection {
    /// Closed loops (the closing segment last->first is implicit), ordered by
    /// centroid, each starting at its lexicographically smallest point.
    pub loops: Vec<Vec<Point3<f64>>>,
    pub plane_point: Point3<f64>,
    pub plane_normal: UnitVector3<f64>,
}

impl CrossSection {
    /// Centroid of a loop's points.
    pub fn loop_centroid(points: &[Point3<f64>]) -> Point3<f64> {
        let mut c = Vector3::zeros();
        for p in points {
            c += p.coords;
        }
        Point3::from(c / points.len() as f64)
    }

    /// Index of the loop whose centroid is nearest to `anchor`.
    pub fn nearest_loop_by_centroid(&self, anchor: &Point3<f64>) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, lp) in self.loops.iter().enumerate() {
            let d = (Self::loop_centroid(lp) - anchor).norm();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Index of the loop whose polyline passes nearest to `anchor`.
    pub fn nearest_loop_by_distance(&self, anchor: &Point3<f64>) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, lp) in self.loops.iter().enumerate() {
            let (_, _, d) = nearest_point_on_loop(lp, anchor);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Consecutive loop points closer than this are merged.
const MIN_LOOP_SEGMENT_MM: f64 = 1e-9;
/// Offset used to resolve plane-through-vertex degeneracies.
const SYMBOLIC_OFFSET_MM: f64 = 1e-9;

fn lex_less(a: &Point3<f64>, b: &Point3<f64>) -> bool {
    (a.x, a.y, a.z) < (b.x, b.y, b.z)
}

/// Cuts the mesh with the plane through `plane_point` with normal
/// `plane_normal` and stitches the intersection into closed loops.
pub fn plane_cross_section(
    mesh: &Mesh,
    plane_point: &Point3<f64>,
    plane_normal: &Vector3<f64>,
) -> Result<CrossSection> {
    if plane_normal.norm() < 1e-12 {
        return Err(Error::InvalidInput("plane normal is zero".into()));
    }
    let n = Unit::new_normalize(*plane_normal);

    // Signed vertex distances; shift the plane offset until no vertex lies
    // exactly on it, so every crossing is a clean two-edge cut.
    let mut dist: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|v| (v - plane_point).dot(&n))
        .collect();
    let mut attempts = 0;
    while dist.iter().any(|&d| d == 0.0) {
        for d in dist.iter_mut() {
            *d += SYMBOLIC_OFFSET_MM;
        }
        attempts += 1;
        if attempts > 64 {
            return Err(Error::OpenCrossSection(
                "could not resolve plane-through-vertex degeneracy".into(),
            ));
        }
    }

    // Intersection point per crossed edge, keyed by sorted vertex pair.
    let mut edge_points: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::new();
    let mut points: Vec<Point3<f64>> = Vec::new();
    let mut adjacency: Vec<Vec<usize>> = Vec::new();

    let mut point_for_edge = |a: usize, b: usize,
                              points: &mut Vec<Point3<f64>>,
                              adjacency: &mut Vec<Vec<usize>>|
     -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        *edge_points.entry(key).or_insert_with(|| {
            let (va, vb) = (mesh.vertices[key.0], mesh.vertices[key.1]);
            let (da, db) = (dist[key.0], dist[key.1]);
            let t = da / (da - db);
            let mut p = va + (vb - va) * t;
            // Snap onto the nominal plane so section points satisfy the
            // plane equation to machine precision.
            let off = (p - plane_point).dot(&n);
            p -= n.into_inner() * off;
            points.push(p);
            adjacency.push(Vec::new());
            points.len() - 1
        })
    };

    let mut any_crossing = false;
    for f in &mesh.faces {
        let d = [dist[f[0]], dist[f[1]], dist[f[2]]];
        let mut crossed: Vec<usize> = Vec::with_capacity(2);
        for e in 0..3 {
            let (a, b) = (f[e], f[(e + 1) % 3]);
            if (d[e] > 0.0) != (d[(e + 1) % 3] > 0.0) {
                crossed.push(point_for_edge(a, b, &mut points, &mut adjacency));
            }
        }
        match crossed.len() {
            0 => {}
            2 => {
                any_crossing = true;
                adjacency[crossed[0]].push(crossed[1]);
                adjacency[crossed[1]].push(crossed[0]);
            }
            _ => {
                return Err(Error::OpenCrossSection(
                    "triangle crosses the plane with an odd edge count".into(),
                ))
            }
        }
    }
    if !any_crossing {
        return Err(Error::EmptyCrossSection(format!(
            "plane through ({:.1}, {:.1}, {:.1}) misses the mesh",
            plane_point.x, plane_point.y, plane_point.z
        )));
    }

    // Every node must link exactly two segments, or the cut is open.
    for (i, adj) in adjacency.iter().enumerate() {
        if adj.len() != 2 {
            return Err(Error::OpenCrossSection(format!(
                "section point {i} has degree {}, expected 2 (non-manifold or boundary edge)",
                adj.len()
            )));
        }
    }

    // Walk the degree-2 graph into cycles.
    let mut visited = vec![false; points.len()];
    let mut loops: Vec<Vec<Point3<f64>>> = Vec::new();
    for start in 0..points.len() {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut prev = start;
        let mut cur = adjacency[start][0];
        while cur != start {
            visited[cur] = true;
            cycle.push(cur);
            let next = if adjacency[cur][0] == prev {
                adjacency[cur][1]
            } else {
                adjacency[cur][0]
            };
            prev = cur;
            cur = next;
        }
        let mut loop_points: Vec<Point3<f64>> = cycle.into_iter().map(|i| points[i]).collect();
        dedupe_loop(&mut loop_points);
        if loop_points.len() >= 3 {
            loops.push(canonicalize_loop(loop_points));
        }
    }
    if loops.is_empty() {
        return Err(Error::EmptyCrossSection(
            "intersection collapsed to degenerate slivers".into(),
        ));
    }
    loops.sort_by(|a, b| {
        let ca = CrossSection::loop_centroid(a);
        let cb = CrossSection::loop_centroid(b);
        (ca.x, ca.y, ca.z).partial_cmp(&(cb.x, cb.y, cb.z)).unwrap()
    });
    Ok(CrossSection {
        loops,
        plane_point: *plane_point,
        plane_normal: n,
    })
}

fn dedupe_loop(points: &mut Vec<Point3<f64>>) {
    let mut out: Vec<Point3<f64>> = Vec::with_capacity(points.len());
    for p in points.iter() {
        if out.last().map_or(true, |q| (p - q).norm() > MIN_LOOP_SEGMENT_MM) {
            out.push(*p);
        }
    }
    while out.len() >= 2 && (out[0] - *out.last().unwrap()).norm() <= MIN_LOOP_SEGMENT_MM {
        out.pop();
    }
    *points = out;
}

/// Rotates the loop to start at its lexicographically smallest point and
/// orients it so the second point is the smaller neighbor.
fn canonicalize_loop(points: Vec<Point3<f64>>) -> Vec<Point3<f64>> {
    let m = points.len();
    let mut start = 0;
    for i in 1..m {
        if lex_less(&points[i], &points[start]) {
            start = i;
        }
    }
    let next = (start + 1) % m;
    let prev = (start + m - 1) % m;
    let forward = lex_less(&points[next], &points[prev]);
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let idx = if forward {
            (start + k) % m
        } else {
            (start + m - k % m) % m
        };
        out.push(points[idx]);
    }
    out
}

/// Perimeter of a closed loop, including the closing segment.
pub fn loop_perimeter(points: &[Point3<f64>]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..points.len() {
        let j = (i + 1) % points.len();
        total += (points[j] - points[i]).norm();
    }
    total
}

fn nearest_point_on_segment(a: &Point3<f64>, b: &Point3<f64>, p: &Point3<f64>) -> (Point3<f64>, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 <= 0.0 {
        0.0
    } else {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    };
    let q = a + ab * t;
    let d = (q - p).norm();
    (q, d)
}

/// Nearest point on a closed polyline: (segment index, point, distance).
fn nearest_point_on_loop(points: &[Point3<f64>], p: &Point3<f64>) -> (usize, Point3<f64>, f64) {
    let mut best = (0usize, points[0], f64::INFINITY);
    for i in 0..points.len() {
        let j = (i + 1) % points.len();
        let (q, d) = nearest_point_on_segment(&points[i], &points[j], p);
        if d < best.2 {
            best = (i, q, d);
        }
    }
    best
}

/// Walks `arc` millimeters along the closed polyline from a point on segment
/// `seg`, in `dir` (+1 with the winding, -1 against it).
fn walk_loop(points: &[Point3<f64>], seg: usize, start: Point3<f64>, arc: f64, dir: i8) -> Point3<f64> {
    let m = points.len();
    let mut remaining = arc;
    let mut cur = start;
    // Vertex the walk is heading towards.
    let mut target = if dir > 0 { (seg + 1) % m } else { seg };
    loop {
        let to_target = points[target] - cur;
        let d = to_target.norm();
        if remaining <= d || d == 0.0 {
            if d == 0.0 {
                return cur;
            }
            return cur + to_target * (remaining / d);
        }
        remaining -= d;
        cur = points[target];
        target = if dir > 0 {
            (target + 1) % m
        } else {
            (target + m - 1) % m
        };
    }
}

pub(crate) fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Point3<f64> {
    // Ericson, Real-Time Collision Detection, 5.1.5.
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Planes whose normal is closer than this to the surface normal are
/// near-tangent and rejected when sampling perturbation planes. The margin
/// covers coarse tessellations, where a mildly tangent plane through a vertex
/// can miss the adjacent facets entirely.
const MIN_TRANSVERSAL_ANGLE_RAD: f64 = 25.0 * std::f64::consts::PI / 180.0;
/// A sampled cut must pass at least this close to the landmark to be used.
const MAX_LOOP_START_OFFSET_MM: f64 = 2.5;

/// Moves a landmark along the mesh surface by a random arc length up to
/// `max_dist_mm`, following the cross-section of the mesh with a random
/// plane through the landmark.
///
/// The landmark is expected to lie on (or within ~1 mm of) the surface.
/// Empty cuts are retried with a fresh plane up to 10 times. Deterministic
/// for a given seed.
pub fn perturb_landmark_on_surface(
    mesh: &Mesh,
    landmark_point: &Point3<f64>,
    max_dist_mm: f64,
    seed: u64,
) -> Result<Point3<f64>> {
    if max_dist_mm < 0.0 {
        return Err(Error::InvalidInput(format!(
            "max_dist_mm must be non-negative, got {max_dist_mm}"
        )));
    }
    let (_, face) = mesh.closest_surface_point(landmark_point);
    let surface_normal = mesh.face_normal(face);
    let max_axial_dot = (std::f64::consts::FRAC_PI_2 - MIN_TRANSVERSAL_ANGLE_RAD).sin();

    let mut rng = rng::stream(seed, "surface-perturb", &[]);
    let mut last_err = None;
    for _attempt in 0..10 {
        // Uniform direction on the sphere, rejecting near-tangent planes
        // (normal too close to the surface normal cuts a degenerate sliver).
        let dir = loop {
            let v = Vector3::new(
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(-1.0..1.0f64),
            );
            let norm = v.norm();
            if norm < 1e-3 || norm > 1.0 {
                continue;
            }
            let u = v / norm;
            if u.dot(&surface_normal).abs() <= max_axial_dot {
                break u;
            }
        };
        let section = match plane_cross_section(mesh, landmark_point, &dir) {
            Ok(s) => s,
            Err(e @ Error::EmptyCrossSection(_)) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let loop_idx = section.nearest_loop_by_distance(landmark_point);
        let lp = &section.loops[loop_idx];
        let (seg, start, offset) = nearest_point_on_loop(lp, landmark_point);
        if offset > MAX_LOOP_START_OFFSET_MM {
            // The cut missed the landmark's neighborhood (near-tangent plane
            // on a coarse patch); try another plane.
            last_err = Some(Error::EmptyCrossSection(format!(
                "cut passes {offset:.2} mm away from the landmark"
            )));
            continue;
        }
        if max_dist_mm == 0.0 {
            return Ok(start);
        }
        let arc = rng.gen_range(0.0..=max_dist_mm);
        let dir_sign: i8 = if rng.gen::<bool>() { 1 } else { -1 };
        return Ok(walk_loop(lp, seg, start, arc, dir_sign));
    }
    Err(last_err.unwrap_or_else(|| {
        Error::EmptyCrossSection("no transversal plane produced a cross-section".into())
    }))
}

pub mod shapes {
    //! Primitive meshes used by tests and calibration.

    use super::Mesh;
    use nalgebra::Point3;

    /// Closed cylinder along +y: `segments` points per ring, `rings + 1`
    /// rings from y=0 to y=height, capped with triangle fans.
    pub fn cylinder(radius: f64, height: f64, segments: usize, rings: usize) -> Mesh {
        assert!(segments >= 3 && rings >= 1);
        let mut vertices = Vec::new();
        for r in 0..=rings {
            let y = height * r as f64 / rings as f64;
            for s in 0..segments {
                let a = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
                vertices.push(Point3::new(radius * a.cos(), y, radius * a.sin()));
            }
        }
        let bottom_center = vertices.len();
        vertices.push(Point3::new(0.0, 0.0, 0.0));
        let top_center = vertices.len();
        vertices.push(Point3::new(0.0, height, 0.0));

        let mut faces = Vec::new();
        let ring = |r: usize, s: usize| r * segments + (s % segments);
        for r in 0..rings {
            for s in 0..segments {
                let (a, b, c, d) = (ring(r, s), ring(r, s + 1), ring(r + 1, s + 1), ring(r + 1, s));
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
        for s in 0..segments {
            faces.push([bottom_center, ring(0, s + 1), ring(0, s)]);
            faces.push([top_center, ring(rings, s), ring(rings, s + 1)]);
        }
        Mesh { vertices, faces }
    }

    /// Axis-aligned box centered at `center` with the given half-extents.
    pub fn cuboid(center: Point3<f64>, hx: f64, hy: f64, hz: f64) -> Mesh {
        let corners: Vec<Point3<f64>> = (0..8)
            .map(|i| {
                Point3::new(
                    center.x + if i & 1 == 0 { -hx } else { hx },
                    center.y + if i & 2 == 0 { -hy } else { hy },
                    center.z + if i & 4 == 0 { -hz } else { hz },
                )
            })
            .collect();
        // Two triangles per face, outward winding.
        let faces = vec![
            [0, 2, 3], [0, 3, 1], // -z
            [4, 5, 7], [4, 7, 6], // +z
            [0, 1, 5], [0, 5, 4], // -y
            [2, 6, 7], [2, 7, 3], // +y
            [0, 4, 6], [0, 6, 2], // -x
            [1, 3, 7], [1, 7, 5], // +x
        ];
        Mesh {
            vertices: corners,
            faces,
        }
    }

    /// Latitude/longitude sphere.
    pub fn uv_sphere(center: Point3<f64>, radius: f64, rings: usize, segments: usize) -> Mesh {
        assert!(rings >= 2 && segments >= 3);
        let mut vertices = Vec::new();
        vertices.push(center + nalgebra::Vector3::new(0.0, radius, 0.0));
        for r in 1..rings {
            let phi = std::f64::consts::PI * r as f64 / rings as f64;
            for s in 0..segments {
                let theta = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
                vertices.push(Point3::new(
                    center.x + radius * phi.sin() * theta.cos(),
                    center.y + radius * phi.cos(),
                    center.z + radius * phi.sin() * theta.sin(),
                ));
            }
        }
        let south = vertices.len();
        vertices.push(center + nalgebra::Vector3::new(0.0, -radius, 0.0));

        let mut faces = Vec::new();
        let ring = |r: usize, s: usize| 1 + (r - 1) * segments + (s % segments);
        for s in 0..segments {
            faces.push([0, ring(1, s + 1), ring(1, s)]);
            faces.push([south, ring(rings - 1, s), ring(rings - 1, s + 1)]);
        }
        for r in 1..rings - 1 {
            for s in 0..segments {
                let (a, b, c, d) = (ring(r, s), ring(r, s + 1), ring(r + 1, s + 1), ring(r + 1, s));
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
        Mesh { vertices, faces }
    }
}

/// Minimal OFF-style reader: optional `# unit: mm|cm` comment, `OFF` magic,
/// counts line, vertex lines, triangle face lines. Coordinates are converted
/// to millimeters.
pub fn read_off<R: std::io::BufRead>(input: R) -> Result<Mesh> {
    let mut scale = 1.0f64;
    let mut tokens: Vec<String> = Vec::new();
    let mut saw_magic = false;
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let c = comment.trim().to_ascii_lowercase();
            if let Some(unit) = c.strip_prefix("unit:") {
                scale = match unit.trim() {
                    "mm" => 1.0,
                    "cm" => 10.0,
                    other => return Err(Error::Parse(format!("unknown OFF unit {other:?}"))),
                };
            }
            continue;
        }
        if !saw_magic {
            if trimmed != "OFF" {
                return Err(Error::Parse(format!("expected OFF magic, got {trimmed:?}")));
            }
            saw_magic = true;
            continue;
        }
        tokens.extend(trimmed.split_whitespace().map(|s| s.to_string()));
    }
    if !saw_magic {
        return Err(Error::Parse("missing OFF magic".into()));
    }
    let mut it = tokens.iter();
    let mut next_num = |what: &str| -> Result<f64> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("OFF truncated at {what}")))?
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad OFF number at {what}")))
    };
    let nv = next_num("vertex count")? as usize;
    let nf = next_num("face count")? as usize;
    let _ne = next_num("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let x = next_num(&format!("vertex {i}"))? * scale;
        let y = next_num(&format!("vertex {i}"))? * scale;
        let z = next_num(&format!("vertex {i}"))? * scale;
        vertices.push(Point3::new(x, y, z));
    }
    let mut faces = Vec::with_capacity(nf);
    for i in 0..nf {
        let arity = next_num(&format!("face {i}"))? as usize;
        if arity != 3 {
            return Err(Error::Parse(format!(
                "face {i} has {arity} vertices; only triangles are supported"
            )));
        }
        let a = next_num("face index")? as usize;
        let b = next_num("face index")? as usize;
        let c = next_num("face index")? as usize;
        if a >= nv || b >= nv || c >= nv {
            return Err(Error::Parse(format!("face {i} references missing vertex")));
        }
        faces.push([a, b, c]);
    }
    Ok(Mesh { vertices, faces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cube_center_slice_is_square() {
        // 1 m cube: center slice perimeter is exactly 4000 mm.
        let cube = shapes::cuboid(Point3::origin(), 500.0, 500.0, 500.0);
        let cs = plane_cross_section(&cube, &Point3::origin(), &Vector3::y()).unwrap();
        assert_eq!(cs.loops.len(), 1);
        let perim = loop_perimeter(&cs.loops[0]);
        assert_relative_eq!(perim, 4000.0, max_relative = 1e-9);
    }

    #[test]
    fn cylinder_circumference_converges() {
        let r = 120.0;
        let cyl = shapes::cylinder(r, 400.0, 64, 4);
        let cs = plane_cross_section(&cyl, &Point3::new(0.0, 200.0, 0.0), &Vector3::y()).unwrap();
        assert_eq!(cs.loops.len(), 1);
        let perim = loop_perimeter(&cs.loops[0]);
        let exact = 2.0 * std::f64::consts::PI * r;
        assert!((perim - exact).abs() / exact < 0.005, "perim {perim} vs {exact}");
    }

    #[test]
    fn plane_above_mesh_is_empty() {
        let cube = shapes::cuboid(Point3::origin(), 10.0, 10.0, 10.0);
        let err =
            plane_cross_section(&cube, &Point3::new(0.0, 100.0, 0.0), &Vector3::y()).unwrap_err();
        assert!(matches!(err, Error::EmptyCrossSection(_)));
    }

    #[test]
    fn open_mesh_is_rejected() {
        // Single triangle: its edges bound only one face.
        let tri = Mesh {
            vertices: vec![
                Point3::new(0.0, -10.0, 0.0),
                Point3::new(10.0, 10.0, 0.0),
                Point3::new(-10.0, 10.0, 0.0),
            ],
            faces: vec![[0, 1, 2]],
        };
        let err = plane_cross_section(&tri, &Point3::origin(), &Vector3::y()).unwrap_err();
        assert!(matches!(err, Error::OpenCrossSection(_)));
    }

    #[test]
    fn plane_through_vertices_resolves_deterministically() {
        let cube = shapes::cuboid(Point3::origin(), 500.0, 500.0, 500.0);
        // Plane exactly through the top face vertices.
        let a = plane_cross_section(&cube, &Point3::new(0.0, 500.0, 0.0), &Vector3::y());
        let b = plane_cross_section(&cube, &Point3::new(0.0, 500.0, 0.0), &Vector3::y());
        match (a, b) {
            (Ok(sa), Ok(sb)) => {
                assert_eq!(sa.loops, sb.loops);
            }
            (Err(Error::EmptyCrossSection(_)), Err(Error::EmptyCrossSection(_))) => {}
            other => panic!("inconsistent degenerate handling: {other:?}"),
        }
    }

    #[test]
    fn section_points_lie_on_plane() {
        let cyl = shapes::cylinder(80.0, 300.0, 48, 3);
        let normal = Vector3::new(0.3, 1.0, -0.2);
        let point = Point3::new(5.0, 150.0, -3.0);
        let cs = plane_cross_section(&cyl, &point, &normal).unwrap();
        let n = cs.plane_normal;
        for lp in &cs.loops {
            for p in lp {
                assert!(((p - point).dot(&n)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn perimeter_closed_forms() {
        // Equilateral triangle, side 10.
        let h = 10.0 * 3f64.sqrt() / 2.0;
        let tri = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(10.0, 0.0, 0.0),
            Point3::new(5.0, 0.0, h),
        ];
        assert_relative_eq!(loop_perimeter(&tri), 30.0, max_relative = 1e-12);

        // Regular 64-gon inscribed in radius 100.
        let n = 64;
        let poly: Vec<Point3<f64>> = (0..n)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Point3::new(100.0 * a.cos(), 0.0, 100.0 * a.sin())
            })
            .collect();
        let expect = n as f64 * 2.0 * 100.0 * (std::f64::consts::PI / n as f64).sin();
        assert_relative_eq!(loop_perimeter(&poly), expect, max_relative = 1e-12);
    }

    #[test]
    fn perimeter_rigid_invariance() {
        use nalgebra::UnitQuaternion;
        let cyl = shapes::cylinder(90.0, 300.0, 32, 3);
        let cs = plane_cross_section(&cyl, &Point3::new(0.0, 150.0, 0.0), &Vector3::y()).unwrap();
        let p0 = loop_perimeter(&cs.loops[0]);

        let q = UnitQuaternion::from_euler_angles(0.4, -1.1, 0.7);
        let t = Vector3::new(100.0, -50.0, 30.0);
        let moved = Mesh {
            vertices: cyl
                .vertices
                .iter()
                .map(|v| Point3::from(q * v.coords + t))
                .collect(),
            faces: cyl.faces.clone(),
        };
        let mp = Point3::from(q * Vector3::new(0.0, 150.0, 0.0) + t);
        let mn = q * Vector3::y();
        let cs2 = plane_cross_section(&moved, &mp, &mn).unwrap();
        let p1 = loop_perimeter(&cs2.loops[0]);
        assert_relative_eq!(p0, p1, max_relative = 1e-9);
    }

    #[test]
    fn perturbation_zero_distance_returns_nearest_loop_point() {
        let sphere = shapes::uv_sphere(Point3::origin(), 200.0, 32, 32);
        let lm = Point3::new(0.0, 0.0, 200.0);
        let p = perturb_landmark_on_surface(&sphere, &lm, 0.0, 9).unwrap();
        // Nearest loop point is close to the landmark itself.
        assert!((p - lm).norm() < 25.0, "moved {}", (p - lm).norm());
    }

    #[test]
    fn perturbation_stays_on_sphere_within_budget() {
        let r = 200.0;
        let sphere = shapes::uv_sphere(Point3::origin(), r, 48, 48);
        let lm = Point3::new(0.0, 0.0, r);
        let max_dist = 5.6;
        for seed in 0..30u64 {
            let p = perturb_landmark_on_surface(&sphere, &lm, max_dist, seed).unwrap();
            // On the tessellated sphere within chord sag tolerance.
            assert!((p.coords.norm() - r).abs() < 0.01 * r);
            // Geodesic from the walk start (= near the landmark) bounded by
            // the arc budget plus tessellation slack.
            let (start, _) = sphere.closest_surface_point(&lm);
            let a = start.coords.normalize();
            let b = p.coords.normalize();
            let geo = a.dot(&b).clamp(-1.0, 1.0).acos() * r;
            assert!(
                geo <= max_dist * 1.001 + 1.5,
                "geodesic {geo} exceeds budget {max_dist}"
            );
        }
    }

    #[test]
    fn perturbation_is_deterministic() {
        let sphere = shapes::uv_sphere(Point3::origin(), 150.0, 24, 24);
        let lm = Point3::new(0.0, 150.0, 0.0);
        let a = perturb_landmark_on_surface(&sphere, &lm, 5.6, 1234).unwrap();
        let b = perturb_landmark_on_surface(&sphere, &lm, 5.6, 1234).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn off_reader_parses_counts_and_units() {
        let text = "# unit: cm\nOFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let mesh = read_off(text.as_bytes()).unwrap();
        assert_eq!(mesh.vertices.len(), 3);
        assert_eq!(mesh.faces.len(), 1);
        assert_eq!(mesh.vertices[1].x, 10.0); // cm -> mm
        assert!(read_off("not off".as_bytes()).is_err());
    }
}
