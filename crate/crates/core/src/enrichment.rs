//! Crack geometry, enrichment functions, node classification and cut-element
//! subdivision.

use serde::{Deserialize, Serialize};

use crate::basis::DegenerationSet;
use crate::error::{Error, Result};
use crate::mesh::{signed_area, Mesh, Point};

/// Relative snap tolerance for crack points close to element vertices.
pub const SNAP_TOL: f64 = 1e-12;

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Open polyline crack. The last vertex is the (single) propagating tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrackPath {
    vertices: Vec<Point>,
}

impl CrackPath {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidCrack("a crack needs at least two vertices".into()));
        }
        for w in vertices.windows(2) {
            if dist(w[0], w[1]) == 0.0 {
                return Err(Error::InvalidCrack("consecutive vertices coincide".into()));
            }
        }
        let n = vertices.len() - 1;
        for i in 0..n {
            for j in i + 2..n {
                if segments_intersect(vertices[i], vertices[i + 1], vertices[j], vertices[j + 1]) {
                    return Err(Error::InvalidCrack(format!("segments {i} and {j} intersect")));
                }
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn tip(&self) -> Point {
        *self.vertices.last().expect("non-empty")
    }

    /// Direction of the last segment, radians.
    pub fn tip_angle(&self) -> f64 {
        let n = self.vertices.len();
        let d = sub(self.vertices[n - 1], self.vertices[n - 2]);
        d[1].atan2(d[0])
    }

    pub fn frame(&self) -> TipFrame {
        TipFrame::new(self.tip(), self.tip_angle())
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| dist(a, b)).sum()
    }

    /// Appends a segment of `length` at absolute direction `angle`.
    pub fn extend(&mut self, angle: f64, length: f64) -> Result<()> {
        let tip = self.tip();
        let next = [tip[0] + length * angle.cos(), tip[1] + length * angle.sin()];
        let mut v = self.vertices.clone();
        v.push(next);
        *self = CrackPath::new(v)?;
        Ok(())
    }
}

/// Tip-aligned frame: local x along the crack extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipFrame {
    pub origin: Point,
    pub angle: f64,
    cos: f64,
    sin: f64,
}

impl TipFrame {
    pub fn new(origin: Point, angle: f64) -> Self {
        Self { origin, angle, cos: angle.cos(), sin: angle.sin() }
    }

    pub fn to_local(&self, p: Point) -> Point {
        let d = sub(p, self.origin);
        [self.cos * d[0] + self.sin * d[1], -self.sin * d[0] + self.cos * d[1]]
    }

    pub fn to_global(&self, q: Point) -> Point {
        [self.origin[0] + self.cos * q[0] - self.sin * q[1], self.origin[1] + self.sin * q[0] + self.cos * q[1]]
    }

    /// Rotates a local vector into the global frame.
    pub fn vector_to_global(&self, v: [f64; 2]) -> [f64; 2] {
        [self.cos * v[0] - self.sin * v[1], self.sin * v[0] + self.cos * v[1]]
    }

    pub fn vector_to_local(&self, v: [f64; 2]) -> [f64; 2] {
        [self.cos * v[0] + self.sin * v[1], -self.sin * v[0] + self.cos * v[1]]
    }

    /// Rotates a Voigt stress `(xx, yy, xy)` from local to global axes.
    pub fn stress_to_global(&self, s: [f64; 3]) -> [f64; 3] {
        rotate_stress(s, self.cos, self.sin)
    }

    pub fn stress_to_local(&self, s: [f64; 3]) -> [f64; 3] {
        rotate_stress(s, self.cos, -self.sin)
    }

    /// Polar coordinates `(r, theta)`, `theta` in `(-pi, pi]`.
    pub fn polar(&self, p: Point) -> (f64, f64) {
        let q = self.to_local(p);
        (q[0].hypot(q[1]), q[1].atan2(q[0]))
    }
}

/// Tensor rotation by the angle with cosine `c` and sine `s`.
pub fn rotate_stress(st: [f64; 3], c: f64, s: f64) -> [f64; 3] {
    let [sx, sy, txy] = st;
    [
        c * c * sx + s * s * sy - 2.0 * s * c * txy,
        s * s * sx + c * c * sy + 2.0 * s * c * txy,
        s * c * (sx - sy) + (c * c - s * s) * txy,
    ]
}

/// +1 left of the oriented polyline, -1 right; points exactly on it give +1.
pub fn heaviside(crack: &CrackPath, p: Point) -> f64 {
    let v = crack.vertices();
    let mut best = (f64::INFINITY, 0usize, 0.0);
    for k in 0..v.len() - 1 {
        let (a, b) = (v[k], v[k + 1]);
        let d = sub(b, a);
        let t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1]);
        let t = t.clamp(0.0, 1.0);
        let q = [a[0] + t * d[0], a[1] + t * d[1]];
        let dd = dist(p, q);
        if dd < best.0 {
            best = (dd, k, t);
        }
    }
    let (_, k, t) = best;
    let left_normal = |k: usize| {
        let d = sub(v[k + 1], v[k]);
        let l = d[0].hypot(d[1]);
        [-d[1] / l, d[0] / l]
    };
    let s = if t == 1.0 && k + 2 < v.len() {
        // closest point is an interior kink: pseudo-normal of both segments
        let n = left_normal(k);
        let m = left_normal(k + 1);
        let d = sub(p, v[k + 1]);
        (n[0] + m[0]) * d[0] + (n[1] + m[1]) * d[1]
    } else if t == 0.0 && k > 0 {
        let n = left_normal(k - 1);
        let m = left_normal(k);
        let d = sub(p, v[k]);
        (n[0] + m[0]) * d[0] + (n[1] + m[1]) * d[1]
    } else {
        cross(sub(v[k + 1], v[k]), sub(p, v[k]))
    };
    if s < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// The four near-tip branch functions and their global gradients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BranchEval {
    pub values: [f64; 4],
    pub grads: [[f64; 2]; 4],
}

/// Branch functions from tip polar coordinates, with `(d/dr, d/dtheta)`.
pub fn branch_polar(r: f64, theta: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let sr = r.sqrt();
    let (s2, c2) = (0.5 * theta).sin_cos();
    let (s, c) = theta.sin_cos();
    let values = [sr * s2, sr * c2, sr * s2 * s, sr * c2 * s];
    let dtheta = [0.5 * sr * c2, -0.5 * sr * s2, sr * (0.5 * c2 * s + s2 * c), sr * (-0.5 * s2 * s + c2 * c)];
    let mut d = [[0.0; 2]; 4];
    for k in 0..4 {
        d[k] = [values[k] / (2.0 * r), dtheta[k]];
    }
    (values, d)
}

pub fn branch_functions(frame: &TipFrame, p: Point) -> Result<BranchEval> {
    let (r, theta) = frame.polar(p);
    if r == 0.0 {
        return Err(Error::TipSingularity);
    }
    let (values, d) = branch_polar(r, theta);
    let (s, c) = theta.sin_cos();
    let mut grads = [[0.0; 2]; 4];
    for k in 0..4 {
        let [fr, ft] = d[k];
        let local = [c * fr - s / r * ft, s * fr + c / r * ft];
        grads[k] = frame.vector_to_global(local);
    }
    Ok(BranchEval { values, grads })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnrichmentKind {
    None,
    Heaviside,
    Tip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnrichmentScheme {
    /// Tip enrichment on the nodes of the tip element only.
    Topological,
    /// Tip enrichment on every node within `radius` of the tip.
    Fixed { radius: f64 },
}

/// How the crack meets one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutStatus {
    Uncut,
    /// Split completely into two parts.
    Split,
    /// Contains the crack tip.
    Tip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEnrichment {
    pub kinds: Vec<EnrichmentKind>,
    pub scheme: EnrichmentScheme,
    pub elements: Vec<CutStatus>,
}

impl NodeEnrichment {
    pub fn none(mesh: &Mesh) -> Self {
        Self {
            kinds: vec![EnrichmentKind::None; mesh.n_nodes()],
            scheme: EnrichmentScheme::Topological,
            elements: vec![CutStatus::Uncut; mesh.n_elements()],
        }
    }

    pub fn count(&self, kind: EnrichmentKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }

    pub fn is_cut(&self, e: usize) -> bool {
        self.elements[e] != CutStatus::Uncut
    }
}

/// Parts of the crack polyline inside a (counter-clockwise) triangle, as
/// segment pieces that pass through its interior.
fn crack_pieces(v: [Point; 3], crack: &CrackPath) -> Vec<(Point, Point)> {
    let area = signed_area(v[0], v[1], v[2]);
    let scale = dist(v[0], v[1]).max(dist(v[1], v[2])).max(dist(v[2], v[0]));
    let tol = 1e-12;
    let mut pieces = Vec::new();
    for (a, b) in crack.segments() {
        let d = sub(b, a);
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        let mut empty = false;
        for k in 0..3 {
            let e = sub(v[(k + 1) % 3], v[k]);
            // inside: cross(e, p - v_k) >= 0
            let f0 = cross(e, sub(a, v[k]));
            let df = cross(e, d);
            if df.abs() < 1e-300 {
                if f0 < -tol * scale * scale {
                    empty = true;
                    break;
                }
            } else {
                let t = -f0 / df;
                if df > 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
        if empty || t1 - t0 <= 1e-12 {
            continue;
        }
        let p0 = [a[0] + t0 * d[0], a[1] + t0 * d[1]];
        let p1 = [a[0] + t1 * d[0], a[1] + t1 * d[1]];
        let mid = [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
        let inside = (0..3).all(|k| signed_area(v[k], v[(k + 1) % 3], mid) > tol * area);
        if inside && dist(p0, p1) > tol * scale {
            pieces.push((p0, p1));
        }
    }
    pieces
}

pub fn cut_status(mesh: &Mesh, e: usize, crack: &CrackPath) -> CutStatus {
    let v = mesh.vertices(e);
    if mesh.contains(e, crack.tip(), 1e-12) {
        // a tip sitting on a vertex or edge counts for every touching element
        return CutStatus::Tip;
    }
    if crack_pieces(v, crack).is_empty() {
        CutStatus::Uncut
    } else {
        CutStatus::Split
    }
}

pub fn classify_nodes(mesh: &Mesh, crack: &CrackPath, scheme: EnrichmentScheme) -> NodeEnrichment {
    let elements: Vec<CutStatus> = (0..mesh.n_elements()).map(|e| cut_status(mesh, e, crack)).collect();
    let mut kinds = vec![EnrichmentKind::None; mesh.n_nodes()];
    for (e, status) in elements.iter().enumerate() {
        if *status == CutStatus::Split {
            for &n in &mesh.triangles[e] {
                kinds[n] = EnrichmentKind::Heaviside;
            }
        }
    }
    let tip_present = elements.contains(&CutStatus::Tip);
    for (e, status) in elements.iter().enumerate() {
        if *status == CutStatus::Tip {
            for &n in &mesh.triangles[e] {
                kinds[n] = EnrichmentKind::Tip;
            }
        }
    }
    if let (EnrichmentScheme::Fixed { radius }, true) = (scheme, tip_present) {
        let tip = crack.tip();
        for (n, p) in mesh.nodes.iter().enumerate() {
            if dist(*p, tip) <= radius {
                kinds[n] = EnrichmentKind::Tip;
            }
        }
    }
    NodeEnrichment { kinds, scheme, elements }
}

pub fn degeneration_from_enrichment(enrichment: &NodeEnrichment, mesh: &Mesh) -> DegenerationSet {
    let mut flags: Vec<bool> = enrichment.kinds.iter().map(|&k| k != EnrichmentKind::None).collect();
    for (e, status) in enrichment.elements.iter().enumerate() {
        if *status != CutStatus::Uncut {
            for &n in &mesh.triangles[e] {
                flags[n] = true;
            }
        }
    }
    DegenerationSet { flags }
}

/// Boundary parameter of a point on triangle `v`: edge index plus fraction.
fn boundary_param(v: [Point; 3], p: Point) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..3 {
        let a = v[k];
        let d = sub(v[(k + 1) % 3], a);
        let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
        let q = [a[0] + t * d[0], a[1] + t * d[1]];
        let dd = dist(p, q);
        if dd < best.0 {
            best = (dd, k as f64 + t);
        }
    }
    best.1 % 3.0
}

fn on_boundary(v: [Point; 3], p: Point, tol: f64) -> bool {
    let area = signed_area(v[0], v[1], v[2]);
    (0..3).any(|k| {
        let e = dist(v[k], v[(k + 1) % 3]);
        signed_area(v[k], v[(k + 1) % 3], p).abs() * 2.0 / e <= tol * area.sqrt()
    })
}

fn snap(v: [Point; 3], p: Point, tol: f64) -> Point {
    for &q in &v {
        if dist(p, q) <= tol {
            return q;
        }
    }
    p
}

/// Sub-triangulation of a triangle whose sub-cells do not straddle the crack.
pub fn subdivide_triangle(v: [Point; 3], crack: &CrackPath) -> Vec<[Point; 3]> {
    let parent = signed_area(v[0], v[1], v[2]);
    let mut out = Vec::new();
    subdivide_rec(v, crack, parent, 0, &mut out);
    out
}

pub fn subdivide_cut_element(mesh: &Mesh, element: usize, crack: &CrackPath) -> Vec<[Point; 3]> {
    subdivide_triangle(mesh.vertices(element), crack)
}

fn fan(apex: Point, ring: &[Point], parent: f64) -> Vec<[Point; 3]> {
    let mut tris = Vec::new();
    for i in 0..ring.len() {
        let t = [apex, ring[i], ring[(i + 1) % ring.len()]];
        if signed_area(t[0], t[1], t[2]) > 1e-12 * parent {
            tris.push(t);
        }
    }
    tris
}

fn subdivide_rec(v: [Point; 3], crack: &CrackPath, parent: f64, depth: usize, out: &mut Vec<[Point; 3]>) {
    let pieces = crack_pieces(v, crack);
    if pieces.is_empty() || depth > 8 {
        out.push(v);
        return;
    }
    let diam = dist(v[0], v[1]).max(dist(v[1], v[2])).max(dist(v[2], v[0]));
    let tol = SNAP_TOL * diam;
    let mut boundary_pts: Vec<Point> = Vec::new();
    let mut interior: Option<Point> = None;
    for &(p0, p1) in &pieces {
        for p in [p0, p1] {
            let p = snap(v, p, tol);
            if on_boundary(v, p, SNAP_TOL) {
                boundary_pts.push(p);
            } else if interior.is_none() {
                interior = Some(p);
            }
        }
    }
    // ring of triangle vertices plus crack exits, counter-clockwise
    let mut ring: Vec<(f64, Point)> = v.iter().enumerate().map(|(k, &p)| (k as f64, p)).collect();
    for p in boundary_pts {
        if v.contains(&p) {
            continue;
        }
        let s = boundary_param(v, p);
        if ring.iter().all(|(_, q)| dist(*q, p) > tol) {
            ring.push((s, p));
        }
    }
    ring.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ring: Vec<Point> = ring.into_iter().map(|(_, p)| p).collect();

    let children = if let Some(q) = interior {
        fan(q, &ring, parent)
    } else {
        // split along the first chord
        let (a, b) = pieces[0];
        let (a, b) = (snap(v, a, tol), snap(v, b, tol));
        let ia = ring.iter().position(|&p| dist(p, a) <= tol);
        let ib = ring.iter().position(|&p| dist(p, b) <= tol);
        let (Some(ia), Some(ib)) = (ia, ib) else {
            out.push(v);
            return;
        };
        let (ia, ib) = if ia < ib { (ia, ib) } else { (ib, ia) };
        let first: Vec<Point> = ring[ia..=ib].to_vec();
        let mut second: Vec<Point> = ring[ib..].to_vec();
        second.extend_from_slice(&ring[..=ia]);
        let mut tris = Vec::new();
        for poly in [first, second] {
            for i in 1..poly.len().saturating_sub(1) {
                let t = [poly[0], poly[i], poly[i + 1]];
                if signed_area(t[0], t[1], t[2]) > 1e-12 * parent {
                    tris.push(t);
                }
            }
        }
        tris
    };
    for t in children {
        subdivide_rec(t, crack, parent, depth + 1, out);
    }
}
