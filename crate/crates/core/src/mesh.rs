//! Triangular meshes, node patches and support sets.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative area below which a triangle is rejected as degenerate.
pub const DEGENERATE_AREA_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    /// Edge endpoints in the counter-clockwise order of the owning triangle.
    pub nodes: [usize; 2],
    pub element: usize,
    pub normal: [f64; 2],
}

impl BoundaryEdge {
    pub fn length(&self, mesh: &Mesh) -> f64 {
        let a = mesh.nodes[self.nodes[0]];
        let b = mesh.nodes[self.nodes[1]];
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    pub fn midpoint(&self, mesh: &Mesh) -> Point {
        let a = mesh.nodes[self.nodes[0]];
        let b = mesh.nodes[self.nodes[1]];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    /// Builds a mesh, reorienting clockwise triangles and extracting the boundary.
    pub fn new(nodes: Vec<Point>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if nodes.is_empty() || triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh needs nodes and triangles".into()));
        }
        let (lo, hi) = bounding_box(&nodes);
        let bbox_area = ((hi[0] - lo[0]) * (hi[1] - lo[1])).max(f64::MIN_POSITIVE);
        let mut seen = BTreeSet::new();
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nodes.len() {
                    return Err(Error::DanglingNode { tri: t, node: v });
                }
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area.abs() < DEGENERATE_AREA_TOL * bbox_area {
                return Err(Error::DegenerateTriangle(t));
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
            let mut key = *tri;
            key.sort_unstable();
            if !seen.insert(key) {
                return Err(Error::DuplicateTriangle(t));
            }
        }
        let boundary_edges = extract_boundary(&nodes, &triangles)?;
        Ok(Self { nodes, triangles, boundary_edges })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self, e: usize) -> [Point; 3] {
        let t = self.triangles[e];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    pub fn area(&self, e: usize) -> f64 {
        let [a, b, c] = self.vertices(e);
        signed_area(a, b, c)
    }

    pub fn centroid(&self, e: usize) -> Point {
        let [a, b, c] = self.vertices(e);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Longest edge length of element `e`.
    pub fn diameter(&self, e: usize) -> f64 {
        let [a, b, c] = self.vertices(e);
        let d = |p: Point, q: Point| (p[0] - q[0]).hypot(p[1] - q[1]);
        d(a, b).max(d(b, c)).max(d(c, a))
    }

    /// Circumradius of element `e`.
    pub fn circumradius(&self, e: usize) -> f64 {
        let [a, b, c] = self.vertices(e);
        let d = |p: Point, q: Point| (p[0] - q[0]).hypot(p[1] - q[1]);
        d(a, b) * d(b, c) * d(c, a) / (4.0 * self.area(e))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.area(e)).sum()
    }

    /// Mean element size, `sqrt(2 * mean area)`.
    pub fn mean_size(&self) -> f64 {
        (2.0 * self.total_area() / self.n_elements() as f64).sqrt()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        bounding_box(&self.nodes)
    }

    /// Barycentric coordinates of `p` in element `e`.
    pub fn barycentric(&self, e: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.vertices(e);
        let area = signed_area(a, b, c);
        [signed_area(p, b, c) / area, signed_area(a, p, c) / area, signed_area(a, b, p) / area]
    }

    pub fn contains(&self, e: usize, p: Point, tol: f64) -> bool {
        self.barycentric(e, p).iter().all(|&l| l >= -tol)
    }

    /// First element (ascending index) whose closed triangle contains `p`.
    pub fn locate(&self, p: Point) -> Option<usize> {
        self.locate_all(p, 1e-12).into_iter().next()
    }

    pub fn locate_all(&self, p: Point, tol: f64) -> Vec<usize> {
        (0..self.n_elements()).filter(|&e| self.contains(e, p, tol)).collect()
    }

    /// Nodes lying on at least one boundary edge.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut flags = vec![false; self.n_nodes()];
        for edge in &self.boundary_edges {
            flags[edge.nodes[0]] = true;
            flags[edge.nodes[1]] = true;
        }
        flags
    }

    pub fn translate(mut self, dx: f64, dy: f64) -> Self {
        for p in &mut self.nodes {
            p[0] += dx;
            p[1] += dy;
        }
        self
    }

    /// Canonical text form; `parse_mesh(m.to_text())` reproduces `m` exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "$Nodes");
        let _ = writeln!(s, "{}", self.nodes.len());
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "{} {:?} {:?}", i + 1, p[0], p[1]);
        }
        let _ = writeln!(s, "$Elements");
        let _ = writeln!(s, "{}", self.triangles.len());
        for (i, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(s, "{} {} {} {}", i + 1, t[0] + 1, t[1] + 1, t[2] + 1);
        }
        let _ = writeln!(s, "$End");
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn bounding_box(nodes: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in nodes {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn extract_boundary(nodes: &[Point], triangles: &[[usize; 3]]) -> Result<Vec<BoundaryEdge>> {
    let mut count: HashMap<(usize, usize), (usize, usize, [usize; 2])> = HashMap::new();
    for (e, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let a = t[k];
            let b = t[(k + 1) % 3];
            let key = (a.min(b), a.max(b));
            let entry = count.entry(key).or_insert((0, e, [a, b]));
            entry.0 += 1;
        }
    }
    let mut edges = Vec::new();
    for (key, (n, e, ab)) in count {
        match n {
            1 => {
                let a = nodes[ab[0]];
                let b = nodes[ab[1]];
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                edges.push((
                    key,
                    BoundaryEdge { nodes: ab, element: e, normal: [(b[1] - a[1]) / len, -(b[0] - a[0]) / len] },
                ));
            }
            2 => {}
            _ => return Err(Error::InvalidMesh(format!("edge ({}, {}) shared by {n} triangles", key.0, key.1))),
        }
    }
    edges.sort_by_key(|(key, _)| *key);
    Ok(edges.into_iter().map(|(_, e)| e).collect())
}

/// Parses the `$Nodes` / `$Elements` / `$End` text format.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, &format!("unexpected end of file, expected {what}")));

    let (ln, tag) = next("$Nodes")?;
    if tag != "$Nodes" {
        return Err(err(ln, "expected $Nodes"));
    }
    let (ln, count) = next("node count")?;
    let n: usize = count.parse().map_err(|_| err(ln, "bad node count"))?;
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let (ln, line) = next("node record")?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(ln, "node record needs <id> <x> <y>"));
        }
        let id: usize = f[0].parse().map_err(|_| err(ln, "bad node id"))?;
        if id != i + 1 {
            return Err(err(ln, "node ids must be 1-based and contiguous"));
        }
        let x: f64 = f[1].parse().map_err(|_| err(ln, "bad x coordinate"))?;
        let y: f64 = f[2].parse().map_err(|_| err(ln, "bad y coordinate"))?;
        nodes.push([x, y]);
    }
    let (ln, tag) = next("$Elements")?;
    if tag != "$Elements" {
        return Err(err(ln, "expected $Elements"));
    }
    let (ln, count) = next("element count")?;
    let m: usize = count.parse().map_err(|_| err(ln, "bad element count"))?;
    let mut triangles = Vec::with_capacity(m);
    for i in 0..m {
        let (ln, line) = next("element record")?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(err(ln, "element record needs <id> <v1> <v2> <v3>"));
        }
        let id: usize = f[0].parse().map_err(|_| err(ln, "bad element id"))?;
        if id != i + 1 {
            return Err(err(ln, "element ids must be 1-based and contiguous"));
        }
        let mut tri = [0usize; 3];
        for k in 0..3 {
            let v: usize = f[k + 1].parse().map_err(|_| err(ln, "bad vertex index"))?;
            if v == 0 || v > n {
                return Err(Error::DanglingNode { tri: i, node: v });
            }
            tri[k] = v - 1;
        }
        triangles.push(tri);
    }
    let (ln, tag) = next("$End")?;
    if tag != "$End" {
        return Err(err(ln, "expected $End"));
    }
    Mesh::new(nodes, triangles)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

/// Elements adjacent to a node and their area weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePatch {
    pub node: usize,
    /// Ascending element indices.
    pub elements: Vec<usize>,
    pub weights: Vec<f64>,
}

pub fn build_patches(mesh: &Mesh) -> Vec<NodePatch> {
    let mut elements = vec![Vec::new(); mesh.n_nodes()];
    for (e, t) in mesh.triangles.iter().enumerate() {
        for &v in t {
            elements[v].push(e);
        }
    }
    elements
        .into_iter()
        .enumerate()
        .map(|(node, elements)| {
            let areas: Vec<f64> = elements.iter().map(|&e| mesh.area(e)).collect();
            let total: f64 = areas.iter().sum();
            let weights = areas.iter().map(|a| a / total).collect();
            NodePatch { node, elements, weights }
        })
        .collect()
}

/// Nodes whose data influence the double interpolant inside one element.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    pub element: usize,
    /// The element's three vertices first (in element order), then the
    /// remaining patch nodes ascending.
    pub nodes: Vec<usize>,
}

impl SupportSet {
    pub fn local_index(&self, node: usize) -> Option<usize> {
        self.nodes.iter().position(|&n| n == node)
    }
}

pub fn support_set(mesh: &Mesh, patches: &[NodePatch], element: usize) -> SupportSet {
    let tri = mesh.triangles[element];
    let mut others = BTreeSet::new();
    for &v in &tri {
        for &e in &patches[v].elements {
            for &w in &mesh.triangles[e] {
                if !tri.contains(&w) {
                    others.insert(w);
                }
            }
        }
    }
    let mut nodes = tri.to_vec();
    nodes.extend(others);
    SupportSet { element, nodes }
}

/// Regular `nx` x `ny` grid on `[0, width] x [0, height]`, two triangles per
/// cell split along the rising diagonal. Interior nodes are jittered by up to
/// `distortion` times the cell size in each direction.
pub fn generate_structured(nx: usize, ny: usize, width: f64, height: f64, distortion: f64, seed: u64) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument("nx and ny must be at least 1".into()));
    }
    if !(0.0..0.5).contains(&distortion) {
        return Err(Error::InvalidArgument(format!("distortion {distortion} outside [0, 0.5)")));
    }
    if width <= 0.0 || height <= 0.0 {
        return Err(Error::InvalidArgument("width and height must be positive".into()));
    }
    let dx = width / nx as f64;
    let dy = height / ny as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let mut p = [i as f64 * dx, j as f64 * dy];
            let interior = i > 0 && i < nx && j > 0 && j < ny;
            if interior && distortion > 0.0 {
                p[0] += rng.gen_range(-1.0..=1.0) * distortion * dx;
                p[1] += rng.gen_range(-1.0..=1.0) * distortion * dy;
            }
            nodes.push(p);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (n0, n1, n2, n3) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([n0, n1, n2]);
            triangles.push([n0, n2, n3]);
        }
    }
    for (t, tri) in triangles.iter().enumerate() {
        if signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]) <= 0.0 {
            return Err(Error::InvalidMesh(format!("distortion inverted triangle {t}")));
        }
    }
    Mesh::new(nodes, triangles)
}
