//! Mesh generators for the benchmark geometries.

use std::f64::consts::PI;

use crate::enrichment::CrackPath;
use crate::error::{Error, Result};
use crate::mesh::{generate_structured, signed_area, Mesh, Point};

/// Quarter of a square plate `[0, half_width]^2` with a hole of `radius` at
/// the origin. The `(n + 1)^2` nodes sit on a grid mapped between the arc and
/// the outer edges, the arc point at 45 degrees facing the outer corner.
pub fn plate_hole_quarter(n: usize, radius: f64, half_width: f64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("plate mesh needs at least one cell".into()));
    }
    if !(radius > 0.0 && half_width > radius) {
        return Err(Error::InvalidArgument("plate needs 0 < radius < half width".into()));
    }
    let outer = |s: f64| -> Point {
        if s <= 0.5 {
            [half_width, half_width * 2.0 * s]
        } else {
            [half_width * (2.0 - 2.0 * s), half_width]
        }
    };
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        let s = j as f64 / n as f64;
        let a = [radius * (0.5 * PI * s).cos(), radius * (0.5 * PI * s).sin()];
        let b = outer(s);
        for i in 0..=n {
            let t = i as f64 / n as f64;
            nodes.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (n0, n1, n2, n3) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            // the shorter diagonal keeps cells near the corner well shaped
            let d02 = dist(nodes[n0], nodes[n2]);
            let d13 = dist(nodes[n1], nodes[n3]);
            if d02 <= d13 {
                triangles.push([n0, n1, n2]);
                triangles.push([n0, n2, n3]);
            } else {
                triangles.push([n0, n1, n3]);
                triangles.push([n1, n2, n3]);
            }
        }
    }
    Mesh::new(nodes, triangles)
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Square `[-half, half]^2` split into `n x n` cells, `n` odd so that no
/// node row lies on `y = 0`.
pub fn centered_square(n: usize, half: f64, distortion: f64, seed: u64) -> Result<Mesh> {
    if n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("square mesh needs odd n, got {n}")));
    }
    Ok(generate_structured(n, n, 2.0 * half, 2.0 * half, distortion, seed)?.translate(-half, -half))
}

/// Edge crack along `y = 0` from the left side of the centered square to a
/// tip a quarter cell right of the center, strictly inside an element.
pub fn edge_crack(n: usize, half: f64) -> Result<CrackPath> {
    let h = 2.0 * half / n as f64;
    CrackPath::new(vec![[-half, 0.0], [0.25 * h, 0.0]])
}

/// Square mesh with the edge crack cut into it: nodes on `y = 0` left of
/// the center are doubled and the copies belong to the elements below.
#[derive(Debug, Clone)]
pub struct SlitMesh {
    pub mesh: Mesh,
    /// For every node, the node it duplicates (lower crack face copies only).
    pub duplicate_of: Vec<Option<usize>>,
}

impl SlitMesh {
    pub fn is_lower_face(&self, node: usize) -> bool {
        self.duplicate_of[node].is_some()
    }
}

/// Square `[-half, half]^2` with `n x n` cells, `n` even, slit along
/// `y = 0` from `x = -half` to the center node.
pub fn slit_square(n: usize, half: f64) -> Result<SlitMesh> {
    if !n.is_multiple_of(2) || n == 0 {
        return Err(Error::InvalidArgument(format!("slit mesh needs even n, got {n}")));
    }
    let base = generate_structured(n, n, 2.0 * half, 2.0 * half, 0.0, 0)?.translate(-half, -half);
    let mut nodes = base.nodes.clone();
    let mut duplicate_of = vec![None; nodes.len()];
    let row = n / 2;
    let mut copy = vec![None; nodes.len()];
    for i in 0..n / 2 {
        let orig = row * (n + 1) + i;
        copy[orig] = Some(nodes.len());
        nodes.push(base.nodes[orig]);
        duplicate_of.push(Some(orig));
    }
    let triangles = base
        .triangles
        .iter()
        .enumerate()
        .map(|(e, tri)| if base.centroid(e)[1] < 0.0 { tri.map(|v| copy[v].unwrap_or(v)) } else { *tri })
        .collect();
    Ok(SlitMesh { mesh: Mesh::new(nodes, triangles)?, duplicate_of })
}

/// Bowyer-Watson Delaunay triangulation of distinct points.
pub fn delaunay(points: &[Point]) -> Result<Vec<[usize; 3]>> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument("triangulation needs three points".into()));
    }
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let big = 1e3 * span;
    let mut pts = points.to_vec();
    let sup = pts.len();
    pts.push([mid[0] - big, mid[1] - big]);
    pts.push([mid[0] + big, mid[1] - big]);
    pts.push([mid[0], mid[1] + big]);

    #[derive(Clone, Copy)]
    struct Tri {
        v: [usize; 3],
        c: Point,
        r2: f64,
    }
    let make = |v: [usize; 3], pts: &[Point]| -> Tri {
        let (a, b, c) = (pts[v[0]], pts[v[1]], pts[v[2]]);
        let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
        let a2 = a[0] * a[0] + a[1] * a[1];
        let b2 = b[0] * b[0] + b[1] * b[1];
        let c2 = c[0] * c[0] + c[1] * c[1];
        let cx = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
        let cy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
        let r2 = (a[0] - cx).powi(2) + (a[1] - cy).powi(2);
        Tri { v, c: [cx, cy], r2 }
    };

    // sweep in x: a triangle whose circumcircle lies left of the current
    // point can never be invalidated again
    let mut order: Vec<usize> = (0..sup).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(points[a][1].total_cmp(&points[b][1])));
    let mut live = vec![make([sup, sup + 1, sup + 2], &pts)];
    let mut done: Vec<Tri> = Vec::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    for &i in &order {
        let p = pts[i];
        edges.clear();
        let mut k = 0;
        while k < live.len() {
            let t = live[k];
            let dx = p[0] - t.c[0];
            if dx > 0.0 && dx * dx > t.r2 {
                done.push(live.swap_remove(k));
                continue;
            }
            let d2 = dx * dx + (p[1] - t.c[1]).powi(2);
            if d2 < t.r2 * (1.0 - 1e-12) {
                for e in [[t.v[0], t.v[1]], [t.v[1], t.v[2]], [t.v[2], t.v[0]]] {
                    edges.push(e);
                }
                live.swap_remove(k);
                continue;
            }
            k += 1;
        }
        // cavity boundary: edges seen once
        let mut keys: Vec<([usize; 2], [usize; 2])> = edges
            .iter()
            .map(|&e| {
                let mut key = e;
                key.sort_unstable();
                (key, e)
            })
            .collect();
        keys.sort_by_key(|x| x.0);
        let mut j = 0;
        while j < keys.len() {
            let mut m = j + 1;
            while m < keys.len() && keys[m].0 == keys[j].0 {
                m += 1;
            }
            if m - j == 1 {
                let e = keys[j].1;
                live.push(make([e[0], e[1], i], &pts));
            }
            j = m;
        }
    }
    done.extend(live);
    let tris: Vec<[usize; 3]> = done
        .into_iter()
        .filter(|t| t.v.iter().all(|&v| v < sup))
        .map(|t| t.v)
        .filter(|v| signed_area(points[v[0]], points[v[1]], points[v[2]]).abs() > 0.0)
        .collect();
    Ok(tris)
}

/// Three-point-bend beam with three holes and an initial edge crack.
#[derive(Debug, Clone, PartialEq)]
pub struct HoledBeam {
    pub length: f64,
    pub height: f64,
    /// Pinned support, roller support and loaded point.
    pub pin: Point,
    pub roller: Point,
    pub load: Point,
    pub holes: Vec<(Point, f64)>,
    /// Initial crack mouth on the bottom edge and crack length.
    pub crack_x: f64,
    pub crack_length: f64,
}

impl HoledBeam {
    /// Beam with the crack `offset` left of mid-span, `crack_length` deep.
    pub fn new(offset: f64, crack_length: f64) -> Self {
        Self {
            length: 20.0,
            height: 8.0,
            pin: [1.0, 0.0],
            roller: [19.0, 0.0],
            load: [10.0, 8.0],
            holes: [2.75, 4.75, 6.75].iter().map(|&y| ([6.0, y], 0.25)).collect(),
            crack_x: 10.0 - offset,
            crack_length,
        }
    }

    pub fn crack(&self) -> Result<CrackPath> {
        CrackPath::new(vec![[self.crack_x, 0.0], [self.crack_x, self.crack_length]])
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] > 0.0
            && p[0] < self.length
            && p[1] > 0.0
            && p[1] < self.height
            && self.holes.iter().all(|&(c, r)| dist(p, c) > r)
    }

    /// Delaunay mesh with nominal node spacing `spacing`.
    pub fn mesh(&self, spacing: f64) -> Result<Mesh> {
        if !(spacing > 0.0) || spacing > 0.5 * self.height {
            return Err(Error::InvalidArgument(format!("bad mesh spacing {spacing}")));
        }
        let s = spacing;
        let (w, h) = (self.length, self.height);
        let mouth = [self.crack_x, 0.0];
        let required = [self.pin, self.roller, self.load];
        let mut pts: Vec<Point> = Vec::new();

        let corners = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            let m = (dist(a, b) / s).round().max(1.0) as usize;
            for i in 0..m {
                let t = i as f64 / m as f64;
                let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let corner = i == 0;
                if !corner && required.iter().any(|&q| dist(p, q) < 0.4 * s) {
                    continue;
                }
                if dist(p, mouth) < 0.25 * s {
                    continue;
                }
                pts.push(p);
            }
        }
        pts.extend(required);
        for &(c, r) in &self.holes {
            let m = ((2.0 * PI * r / s).ceil() as usize).max(8);
            for i in 0..m {
                let a = 2.0 * PI * i as f64 / m as f64;
                pts.push([c[0] + r * a.cos(), c[1] + r * a.sin()]);
            }
        }
        let dy = s * 3f64.sqrt() / 2.0;
        let rows = (h / dy).floor() as usize;
        for j in 1..=rows {
            let y = j as f64 * dy;
            let shift = if j % 2 == 1 { 0.5 * s } else { 0.0 };
            let mut x = shift;
            while x < w {
                let p = [x, y];
                let clear_edges = x > 0.5 * s && x < w - 0.5 * s && y > 0.5 * s && y < h - 0.5 * s;
                let clear_holes = self.holes.iter().all(|&(c, r)| dist(p, c) > r + 0.6 * s);
                let clear_crack = !((p[0] - self.crack_x).abs() < 0.25 * s && p[1] < self.crack_length + 0.25 * s);
                if clear_edges && clear_holes && clear_crack {
                    pts.push(p);
                }
                x += s;
            }
        }
        let tris = delaunay(&pts)?;
        let tris: Vec<[usize; 3]> = tris
            .into_iter()
            .filter(|t| {
                let c = [
                    (pts[t[0]][0] + pts[t[1]][0] + pts[t[2]][0]) / 3.0,
                    (pts[t[0]][1] + pts[t[1]][1] + pts[t[2]][1]) / 3.0,
                ];
                self.holes.iter().all(|&(hc, r)| dist(c, hc) > r)
            })
            .collect();
        Mesh::new(pts, tris)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quarter_plate_area() {
        for n in [4, 10, 20] {
            let m = plate_hole_quarter(n, 1.0, 5.0).unwrap();
            assert_eq!(m.n_nodes(), (n + 1) * (n + 1));
            let exact = 25.0 - PI / 4.0;
            // straight chords cut off circular segments
            let chords = 0.5 * (PI / 2.0 / n as f64 - (PI / 2.0 / n as f64).sin()) * n as f64;
            assert!((m.total_area() - (exact + chords)).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn square_and_crack() {
        let m = centered_square(11, 5.0, 0.0, 0).unwrap();
        assert_eq!(m.n_nodes(), 144);
        assert!(m.nodes.iter().all(|p| p[1].abs() > 1e-9));
        let c = edge_crack(11, 5.0).unwrap();
        let tip = c.tip();
        assert!((tip[0] - 10.0 / 44.0).abs() < 1e-15);
        assert!(centered_square(10, 5.0, 0.0, 0).is_err());
    }

    #[test]
    fn slit_duplicates_left_row() {
        let s = slit_square(4, 5.0).unwrap();
        assert_eq!(s.mesh.n_nodes(), 25 + 2);
        assert_eq!(s.duplicate_of.iter().filter(|d| d.is_some()).count(), 2);
        // slit faces add two boundary edges per face
        assert_eq!(s.mesh.boundary_edges.len(), 16 + 4);
        assert!((s.mesh.total_area() - 100.0).abs() < 1e-10);
    }

    fn empty_circumcircles(pts: &[Point], tris: &[[usize; 3]]) -> bool {
        tris.iter().all(|t| {
            let (a, b, c) = (pts[t[0]], pts[t[1]], pts[t[2]]);
            pts.iter().enumerate().all(|(i, &p)| {
                if t.contains(&i) {
                    return true;
                }
                // incircle determinant, positive when p is inside for ccw abc
                let m = |q: Point| [q[0] - p[0], q[1] - p[1], (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)];
                let (u, v, w) = (m(a), m(b), m(c));
                let det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
                    + u[2] * (v[0] * w[1] - v[1] * w[0]);
                let orient = signed_area(a, b, c).signum();
                det * orient <= 1e-9
            })
        })
    }

    #[test]
    fn delaunay_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point> = (0..300).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0)]).collect();
        let tris = delaunay(&pts).unwrap();
        assert!(empty_circumcircles(&pts, &tris));
        // Euler: interior triangulation of the hull has 2n - 2 - h triangles
        let mesh = Mesh::new(pts.clone(), tris.clone()).unwrap();
        let hull = mesh.boundary_edges.len();
        assert_eq!(tris.len(), 2 * pts.len() - 2 - hull);
    }

    #[test]
    fn holed_beam_mesh() {
        let beam = HoledBeam::new(6.0, 1.0);
        let m = beam.mesh(0.4).unwrap();
        // each hole is an inscribed octagon at this spacing
        let octagon = 0.5 * 8.0 * 0.0625 * (2.0 * PI / 8.0).sin();
        let area = m.total_area();
        assert!((area - (160.0 - 3.0 * octagon)).abs() < 1e-9, "{area}");
        for q in [beam.pin, beam.roller, beam.load] {
            assert!(m.nodes.iter().any(|&p| dist(p, q) < 1e-12));
        }
        assert!(!m.nodes.iter().any(|&p| dist(p, [beam.crack_x, 0.0]) < 0.05));
    }
}
