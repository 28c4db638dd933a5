//! Double-interpolation shape functions.
//!
//! The first interpolation stage is the linear T3 field; the second stage
//! re-interpolates it cubically on each triangle from nodal values and
//! area-weighted averaged nodal gradients. Because the averaged gradient at a
//! vertex draws on every element of its patch, the shape functions of one
//! element are supported on the vertices of all patch elements of its three
//! vertices.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::{signed_area, support_set, Mesh, NodePatch, Point};

/// Tolerance on barycentric coordinates for point-in-element checks.
pub const INSIDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaCoords {
    pub l: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub area: f64,
}

impl AreaCoords {
    /// Area coordinates of `p` in the triangle `v` (counter-clockwise), without
    /// an inside check.
    pub fn new(v: [Point; 3], p: Point) -> Self {
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        let mut c = [0.0; 3];
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            a[i] = v[j][0] * v[k][1] - v[k][0] * v[j][1];
            b[i] = v[j][1] - v[k][1];
            c[i] = v[k][0] - v[j][0];
        }
        let area = signed_area(v[0], v[1], v[2]);
        let two = 2.0 * area;
        let mut l = [0.0; 3];
        for i in 0..3 {
            l[i] = (a[i] + b[i] * p[0] + c[i] * p[1]) / two;
        }
        Self { l, b, c, area }
    }

    /// Derivatives of the area coordinates, `[L_{i,x}, L_{i,y}]`.
    pub fn gradients(&self) -> [[f64; 2]; 3] {
        let two = 2.0 * self.area;
        [[self.b[0] / two, self.c[0] / two], [self.b[1] / two, self.c[1] / two], [self.b[2] / two, self.c[2] / two]]
    }
}

pub fn area_coordinates(mesh: &Mesh, element: usize, point: Point) -> Result<AreaCoords> {
    let coords = AreaCoords::new(mesh.vertices(element), point);
    if coords.l.iter().any(|&l| l < -INSIDE_TOL) {
        return Err(Error::PointOutside { element, x: point[0], y: point[1] });
    }
    Ok(coords)
}

/// The nine cubic functions of the second interpolation stage and their
/// gradients. Index 0..3 follows the element's vertex order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BasisTriplet {
    /// Value interpolants (`phi`).
    pub phi: [f64; 3],
    /// x-slope interpolants (`psi`).
    pub psi: [f64; 3],
    /// y-slope interpolants.
    pub chi: [f64; 3],
    pub phi_grad: [[f64; 2]; 3],
    pub psi_grad: [[f64; 2]; 3],
    pub chi_grad: [[f64; 2]; 3],
}

pub fn basis_triplet(coords: &AreaCoords) -> BasisTriplet {
    let l = coords.l;
    let dl = coords.gradients();
    let chain = |d: [f64; 3], idx: [usize; 3]| -> [f64; 2] {
        let mut g = [0.0; 2];
        for m in 0..3 {
            g[0] += d[m] * dl[idx[m]][0];
            g[1] += d[m] * dl[idx[m]][1];
        }
        g
    };
    let mut out = BasisTriplet::default();
    for v in 0..3 {
        let idx = [v, (v + 1) % 3, (v + 2) % 3];
        let (li, lj, lk) = (l[idx[0]], l[idx[1]], l[idx[2]]);
        let (bj, bk) = (coords.b[idx[1]], coords.b[idx[2]]);
        let (cj, ck) = (coords.c[idx[1]], coords.c[idx[2]]);

        let phi = li + li * li * lj + li * li * lk - li * lj * lj - li * lk * lk;
        let dphi =
            [1.0 + 2.0 * li * lj + 2.0 * li * lk - lj * lj - lk * lk, li * li - 2.0 * li * lj, li * li - 2.0 * li * lk];
        // the two cubic bubbles attached to edges IK and IJ
        let a = lk * li * li + 0.5 * li * lj * lk;
        let da = [2.0 * lk * li + 0.5 * lj * lk, 0.5 * li * lk, li * li + 0.5 * li * lj];
        let q = li * li * lj + 0.5 * li * lj * lk;
        let dq = [2.0 * li * lj + 0.5 * lj * lk, li * li + 0.5 * li * lk, 0.5 * li * lj];

        let psi = -cj * a + ck * q;
        let dpsi = [0, 1, 2].map(|m| -cj * da[m] + ck * dq[m]);
        let chi = bj * a - bk * q;
        let dchi = [0, 1, 2].map(|m| bj * da[m] - bk * dq[m]);

        out.phi[v] = phi;
        out.psi[v] = psi;
        out.chi[v] = chi;
        out.phi_grad[v] = chain(dphi, idx);
        out.psi_grad[v] = chain(dpsi, idx);
        out.chi_grad[v] = chain(dchi, idx);
    }
    out
}

/// Per-node flag: `true` replaces the averaged nodal gradient by the host
/// element's own T3 gradient (C0 node).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegenerationSet {
    pub flags: Vec<bool>,
}

impl DegenerationSet {
    pub fn none(n_nodes: usize) -> Self {
        Self { flags: vec![false; n_nodes] }
    }

    pub fn all(n_nodes: usize) -> Self {
        Self { flags: vec![true; n_nodes] }
    }

    /// Every node on the mesh boundary.
    pub fn boundary(mesh: &Mesh) -> Self {
        Self { flags: mesh.boundary_nodes() }
    }

    pub fn union(mut self, other: &DegenerationSet) -> Self {
        for (a, b) in self.flags.iter_mut().zip(&other.flags) {
            *a |= *b;
        }
        self
    }

    pub fn is_degenerated(&self, node: usize) -> bool {
        self.flags[node]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

fn t3_gradients(mesh: &Mesh, e: usize) -> [[f64; 2]; 3] {
    AreaCoords::new(mesh.vertices(e), mesh.nodes[mesh.triangles[e][0]]).gradients()
}

/// Averaged gradient of every shape function at `node`, as a sparse row of
/// `(L, dN_L/dx, dN_L/dy)` sorted by `L`.
pub fn averaged_gradient_row(
    mesh: &Mesh,
    patches: &[NodePatch],
    degeneration: &DegenerationSet,
    node: usize,
    host_element: usize,
) -> Vec<(usize, f64, f64)> {
    debug_assert!(mesh.triangles[host_element].contains(&node));
    let mut acc: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    if degeneration.is_degenerated(node) {
        let g = t3_gradients(mesh, host_element);
        for (k, &v) in mesh.triangles[host_element].iter().enumerate() {
            acc.insert(v, (g[k][0], g[k][1]));
        }
    } else {
        let patch = &patches[node];
        for (&e, &w) in patch.elements.iter().zip(&patch.weights) {
            let g = t3_gradients(mesh, e);
            for (k, &v) in mesh.triangles[e].iter().enumerate() {
                let entry = acc.entry(v).or_insert((0.0, 0.0));
                entry.0 += w * g[k][0];
                entry.1 += w * g[k][1];
            }
        }
    }
    acc.into_iter().map(|(n, (gx, gy))| (n, gx, gy)).collect()
}

/// Shape functions (values and gradients) at one point, over a support set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShapeEval {
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
}

impl ShapeEval {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Interpolates nodal scalar data.
    pub fn interpolate(&self, data: &[f64]) -> f64 {
        self.nodes.iter().zip(&self.values).map(|(&n, v)| v * data[n]).sum()
    }

    pub fn interpolate_grad(&self, data: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (k, &n) in self.nodes.iter().enumerate() {
            g[0] += self.grad_x[k] * data[n];
            g[1] += self.grad_y[k] * data[n];
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interpolation {
    /// Linear three-node triangle.
    Linear,
    /// Double interpolation.
    Double,
}

/// Point-independent data of one element: its support nodes and, per vertex,
/// the averaged gradient coefficients of every support node.
#[derive(Debug, Clone)]
struct ElementBasis {
    nodes: Vec<usize>,
    /// For each support node: `[gx_I, gy_I, gx_J, gy_J, gx_K, gy_K]`.
    coeffs: Vec<[f64; 6]>,
}

/// Cached shape-function data for a whole mesh.
#[derive(Debug, Clone)]
pub struct Basis {
    pub kind: Interpolation,
    elements: Vec<ElementBasis>,
}

impl Basis {
    pub fn new(mesh: &Mesh, patches: &[NodePatch], degeneration: &DegenerationSet, kind: Interpolation) -> Self {
        let elements = match kind {
            Interpolation::Linear => {
                mesh.triangles.iter().map(|t| ElementBasis { nodes: t.to_vec(), coeffs: Vec::new() }).collect()
            }
            Interpolation::Double => {
                let shared: Vec<Option<Vec<(usize, f64, f64)>>> = (0..mesh.n_nodes())
                    .map(|n| {
                        if degeneration.is_degenerated(n) || patches[n].elements.is_empty() {
                            None
                        } else {
                            Some(averaged_gradient_row(mesh, patches, degeneration, n, patches[n].elements[0]))
                        }
                    })
                    .collect();
                (0..mesh.n_elements())
                    .map(|e| {
                        let support = support_set(mesh, patches, e);
                        let mut coeffs = vec![[0.0; 6]; support.nodes.len()];
                        for (v, &node) in mesh.triangles[e].iter().enumerate() {
                            let owned;
                            let row = match &shared[node] {
                                Some(r) => r,
                                None => {
                                    owned = averaged_gradient_row(mesh, patches, degeneration, node, e);
                                    &owned
                                }
                            };
                            for &(n, gx, gy) in row {
                                let l = support.local_index(n).expect("gradient row inside support");
                                coeffs[l][2 * v] = gx;
                                coeffs[l][2 * v + 1] = gy;
                            }
                        }
                        // neighbours reached only through degenerated vertices carry nothing
                        let (nodes, coeffs) = support
                            .nodes
                            .into_iter()
                            .zip(coeffs)
                            .enumerate()
                            .filter(|(l, (_, c))| *l < 3 || c.iter().any(|&x| x != 0.0))
                            .map(|(_, nc)| nc)
                            .unzip();
                        ElementBasis { nodes, coeffs }
                    })
                    .collect()
            }
        };
        Self { kind, elements }
    }

    pub fn support(&self, element: usize) -> &[usize] {
        &self.elements[element].nodes
    }

    /// Evaluates at `p` without checking that `p` lies in the element.
    pub fn eval_into(&self, mesh: &Mesh, element: usize, p: Point, out: &mut ShapeEval) {
        let eb = &self.elements[element];
        let coords = AreaCoords::new(mesh.vertices(element), p);
        let n = eb.nodes.len();
        out.nodes.clear();
        out.nodes.extend_from_slice(&eb.nodes);
        out.values.resize(n, 0.0);
        out.grad_x.resize(n, 0.0);
        out.grad_y.resize(n, 0.0);
        match self.kind {
            Interpolation::Linear => {
                let g = coords.gradients();
                for k in 0..3 {
                    out.values[k] = coords.l[k];
                    out.grad_x[k] = g[k][0];
                    out.grad_y[k] = g[k][1];
                }
            }
            Interpolation::Double => {
                let t = basis_triplet(&coords);
                for (l, c) in eb.coeffs.iter().enumerate() {
                    let mut val = 0.0;
                    let mut gx = 0.0;
                    let mut gy = 0.0;
                    for v in 0..3 {
                        let (cx, cy) = (c[2 * v], c[2 * v + 1]);
                        val += t.psi[v] * cx + t.chi[v] * cy;
                        gx += t.psi_grad[v][0] * cx + t.chi_grad[v][0] * cy;
                        gy += t.psi_grad[v][1] * cx + t.chi_grad[v][1] * cy;
                    }
                    if l < 3 {
                        val += t.phi[l];
                        gx += t.phi_grad[l][0];
                        gy += t.phi_grad[l][1];
                    }
                    out.values[l] = val;
                    out.grad_x[l] = gx;
                    out.grad_y[l] = gy;
                }
            }
        }
    }

    pub fn eval(&self, mesh: &Mesh, element: usize, p: Point) -> ShapeEval {
        let mut out = ShapeEval::default();
        self.eval_into(mesh, element, p, &mut out);
        out
    }

    pub fn shape_functions(&self, mesh: &Mesh, element: usize, p: Point) -> Result<ShapeEval> {
        area_coordinates(mesh, element, p)?;
        Ok(self.eval(mesh, element, p))
    }
}

/// One-off evaluation of the double-interpolation shape functions.
pub fn shape_functions(
    mesh: &Mesh,
    patches: &[NodePatch],
    degeneration: &DegenerationSet,
    element: usize,
    point: Point,
) -> Result<ShapeEval> {
    area_coordinates(mesh, element, point)?;
    let support = support_set(mesh, patches, element);
    let coords = AreaCoords::new(mesh.vertices(element), point);
    let t = basis_triplet(&coords);
    let n = support.nodes.len();
    let mut out =
        ShapeEval { nodes: support.nodes.clone(), values: vec![0.0; n], grad_x: vec![0.0; n], grad_y: vec![0.0; n] };
    for (v, &node) in mesh.triangles[element].iter().enumerate() {
        out.values[v] += t.phi[v];
        out.grad_x[v] += t.phi_grad[v][0];
        out.grad_y[v] += t.phi_grad[v][1];
        for (n, cx, cy) in averaged_gradient_row(mesh, patches, degeneration, node, element) {
            let l = support.local_index(n).expect("gradient row inside support");
            out.values[l] += t.psi[v] * cx + t.chi[v] * cy;
            out.grad_x[l] += t.psi_grad[v][0] * cx + t.chi_grad[v][0] * cy;
            out.grad_y[l] += t.psi_grad[v][1] * cx + t.chi_grad[v][1] * cy;
        }
    }
    Ok(out)
}

/// 1D shape functions at a point: support nodes with values and derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape1d {
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

/// Averaged derivative row at node `i` of a sorted 1D grid, host element `host`
/// (element `k` spans nodes `k` and `k + 1`).
pub fn averaged_derivative_1d(nodes: &[f64], i: usize, host: usize, degenerated: &[bool]) -> Vec<(usize, f64)> {
    let n_el = nodes.len() - 1;
    let elem = |k: usize| -> [(usize, f64); 2] {
        let h = nodes[k + 1] - nodes[k];
        [(k, -1.0 / h), (k + 1, 1.0 / h)]
    };
    let mut adjacent = Vec::new();
    if i > 0 {
        adjacent.push(i - 1);
    }
    if i < n_el {
        adjacent.push(i);
    }
    if degenerated[i] || adjacent.len() == 1 {
        return elem(host).to_vec();
    }
    let total: f64 = adjacent.iter().map(|&k| nodes[k + 1] - nodes[k]).sum();
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for &k in &adjacent {
        let w = (nodes[k + 1] - nodes[k]) / total;
        for (n, d) in elem(k) {
            *acc.entry(n).or_insert(0.0) += w * d;
        }
    }
    acc.into_iter().collect()
}

/// Cubic Hermite double interpolation on 1D element `element` (nodes
/// `element` and `element + 1` of the sorted grid `nodes`).
pub fn shape_functions_1d(nodes: &[f64], element: usize, x: f64, degenerated: &[bool]) -> Result<Shape1d> {
    if element + 1 >= nodes.len() {
        return Err(Error::InvalidArgument(format!("element {element} out of range")));
    }
    let (xi, xj) = (nodes[element], nodes[element + 1]);
    let c = xj - xi;
    let tol = INSIDE_TOL * c.abs();
    if x < xi - tol || x > xj + tol {
        return Err(Error::PointOutside { element, x, y: 0.0 });
    }
    let li = (xj - x) / c;
    let lj = (x - xi) / c;
    let (dli, dlj) = (-1.0 / c, 1.0 / c);

    let phi_i = li + li * li * lj - li * lj * lj;
    let dphi_i = dli * (1.0 + 2.0 * li * lj - lj * lj) + dlj * (li * li - 2.0 * li * lj);
    let psi_i = c * lj * li * li;
    let dpsi_i = c * (dlj * li * li + 2.0 * lj * li * dli);
    let phi_j = lj + lj * lj * li - lj * li * li;
    let dphi_j = dlj * (1.0 + 2.0 * lj * li - li * li) + dli * (lj * lj - 2.0 * lj * li);
    let psi_j = -c * li * lj * lj;
    let dpsi_j = -c * (dli * lj * lj + 2.0 * li * lj * dlj);

    let mut acc: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    *acc.entry(element).or_default() = (phi_i, dphi_i);
    *acc.entry(element + 1).or_default() = (phi_j, dphi_j);
    for (node, psi, dpsi) in [(element, psi_i, dpsi_i), (element + 1, psi_j, dpsi_j)] {
        for (l, g) in averaged_derivative_1d(nodes, node, element, degenerated) {
            let entry = acc.entry(l).or_default();
            entry.0 += psi * g;
            entry.1 += dpsi * g;
        }
    }
    let mut out = Shape1d { nodes: Vec::new(), values: Vec::new(), derivs: Vec::new() };
    for (n, (v, d)) in acc {
        out.nodes.push(n);
        out.values.push(v);
        out.derivs.push(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_patches, generate_structured};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const UNIT: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    fn random_triangle(rng: &mut ChaCha8Rng) -> [Point; 3] {
        loop {
            let v = [0, 1, 2].map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let a = signed_area(v[0], v[1], v[2]);
            if a > 0.1 {
                return v;
            }
        }
    }

    #[test]
    fn area_coordinates_examples() {
        let c = AreaCoords::new(UNIT, [1.0 / 3.0, 1.0 / 3.0]);
        for l in c.l {
            assert!((l - 1.0 / 3.0).abs() < 1e-15);
        }
        let c = AreaCoords::new(UNIT, [0.0, 0.0]);
        assert_eq!(c.l, [1.0, 0.0, 0.0]);
        let c = AreaCoords::new(UNIT, [0.2, 0.3]);
        assert!((c.l[0] - 0.5).abs() < 1e-15);
        assert!((c.l[1] - 0.2).abs() < 1e-15);
        assert!((c.l[2] - 0.3).abs() < 1e-15);
        let m = Mesh::new(UNIT.to_vec(), vec![[0, 1, 2]]).unwrap();
        assert!(matches!(area_coordinates(&m, 0, [0.8, 0.8]), Err(Error::PointOutside { .. })));
    }

    #[test]
    fn interpolating_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let v = random_triangle(&mut rng);
            for (l, &vertex) in v.iter().enumerate() {
                let t = basis_triplet(&AreaCoords::new(v, vertex));
                for i in 0..3 {
                    let d = if i == l { 1.0 } else { 0.0 };
                    let close = |a: f64, b: f64| (a - b).abs() < 1e-10;
                    assert!(close(t.phi[i], d) && close(t.phi_grad[i][0], 0.0) && close(t.phi_grad[i][1], 0.0));
                    assert!(close(t.psi[i], 0.0) && close(t.psi_grad[i][0], d) && close(t.psi_grad[i][1], 0.0));
                    assert!(close(t.chi[i], 0.0) && close(t.chi_grad[i][0], 0.0) && close(t.chi_grad[i][1], d));
                }
            }
        }
    }

    #[test]
    fn triplet_gradients_match_finite_differences() {
        let v = [[0.1, -0.2], [1.3, 0.1], [0.4, 0.9]];
        let p = [(0.1 + 1.3 + 0.4) / 3.0, (-0.2 + 0.1 + 0.9) / 3.0];
        let h = 1e-6;
        let t = basis_triplet(&AreaCoords::new(v, p));
        let at = |dx: f64, dy: f64| basis_triplet(&AreaCoords::new(v, [p[0] + dx, p[1] + dy]));
        let (xp, xm, yp, ym) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
        for i in 0..3 {
            let fd = |f: fn(&BasisTriplet, usize) -> f64| {
                [(f(&xp, i) - f(&xm, i)) / (2.0 * h), (f(&yp, i) - f(&ym, i)) / (2.0 * h)]
            };
            let pairs = [
                (fd(|t, i| t.phi[i]), t.phi_grad[i]),
                (fd(|t, i| t.psi[i]), t.psi_grad[i]),
                (fd(|t, i| t.chi[i]), t.chi_grad[i]),
            ];
            for (fd, an) in pairs {
                assert!((fd[0] - an[0]).abs() < 1e-6 && (fd[1] - an[1]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn degenerated_row_uses_host_gradients() {
        let m = generate_structured(3, 3, 1.0, 1.0, 0.0, 0).unwrap();
        let p = build_patches(&m);
        let deg = DegenerationSet::all(m.n_nodes());
        let node = 5;
        let host = p[node].elements[2];
        let row = averaged_gradient_row(&m, &p, &deg, node, host);
        assert_eq!(row.len(), 3);
        let c = AreaCoords::new(m.vertices(host), [0.0, 0.0]);
        for (k, &v) in m.triangles[host].iter().enumerate() {
            let (_, gx, gy) = row.iter().find(|r| r.0 == v).copied().unwrap();
            assert!((gx - c.b[k] / (2.0 * c.area)).abs() < 1e-14);
            assert!((gy - c.c[k] / (2.0 * c.area)).abs() < 1e-14);
        }
    }

    #[test]
    fn averaged_row_is_exact_for_linear_fields() {
        let m = generate_structured(4, 4, 1.0, 1.0, 0.25, 9).unwrap();
        let p = build_patches(&m);
        let deg = DegenerationSet::none(m.n_nodes());
        let (alpha, beta) = (0.7, -1.9);
        let node = 2 * 5 + 2;
        let row = averaged_gradient_row(&m, &p, &deg, node, p[node].elements[0]);
        let gx: f64 = row.iter().map(|&(n, gx, _)| gx * (alpha * m.nodes[n][0] + beta * m.nodes[n][1])).sum();
        let gy: f64 = row.iter().map(|&(n, _, gy)| gy * (alpha * m.nodes[n][0] + beta * m.nodes[n][1])).sum();
        assert!((gx - alpha).abs() < 1e-12 && (gy - beta).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_central_difference() {
        let h = 0.25;
        let nodes: Vec<f64> = (0..5).map(|i| i as f64 * h).collect();
        let row = averaged_derivative_1d(&nodes, 2, 1, &[false; 5]);
        assert_eq!(row.len(), 3);
        assert!((row[0].1 + 1.0 / (2.0 * h)).abs() < 1e-14);
        assert!(row[1].1.abs() < 1e-14);
        assert!((row[2].1 - 1.0 / (2.0 * h)).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_shape_functions() {
        let nodes: Vec<f64> = (0..7).map(|i| i as f64 / 6.0).collect();
        let mut deg = vec![false; 7];
        deg[0] = true;
        deg[6] = true;
        let s = shape_functions_1d(&nodes, 2, nodes[2], &deg).unwrap();
        for (k, &n) in s.nodes.iter().enumerate() {
            let d = if n == 2 { 1.0 } else { 0.0 };
            assert!((s.values[k] - d).abs() < 1e-14);
        }
        assert_eq!(s.nodes, vec![1, 2, 3, 4]);
        let mid = 0.5 * (nodes[2] + nodes[3]);
        let s = shape_functions_1d(&nodes, 2, mid, &deg).unwrap();
        assert!((s.values.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // quadratic data: central differences are exact
        let u: f64 = s.nodes.iter().zip(&s.values).map(|(&n, v)| v * nodes[n] * nodes[n]).sum();
        assert!((u - mid * mid).abs() < 1e-14);
        assert!(shape_functions_1d(&nodes, 2, 0.9, &deg).is_err());
    }

    #[test]
    fn full_degeneration_collapses_to_linear() {
        let m = generate_structured(5, 5, 1.0, 1.0, 0.3, 4).unwrap();
        let p = build_patches(&m);
        let deg = DegenerationSet::all(m.n_nodes());
        let dfem = Basis::new(&m, &p, &deg, Interpolation::Double);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let e = rng.gen_range(0..m.n_elements());
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            let [v0, v1, v2] = m.vertices(e);
            let x =
                [v0[0] + a * (v1[0] - v0[0]) + b * (v2[0] - v0[0]), v0[1] + a * (v1[1] - v0[1]) + b * (v2[1] - v0[1])];
            let s = dfem.eval(&m, e, x);
            let lin = AreaCoords::new(m.vertices(e), x);
            for (k, &n) in s.nodes.iter().enumerate() {
                let expect = m.triangles[e].iter().position(|&v| v == n).map_or(0.0, |i| lin.l[i]);
                assert!((s.values[k] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cached_and_direct_evaluation_agree() {
        let m = generate_structured(4, 3, 2.0, 1.0, 0.2, 1).unwrap();
        let p = build_patches(&m);
        let deg = DegenerationSet::boundary(&m);
        let basis = Basis::new(&m, &p, &deg, Interpolation::Double);
        for e in 0..m.n_elements() {
            let x = m.centroid(e);
            let a = basis.shape_functions(&m, e, x).unwrap();
            let b = shape_functions(&m, &p, &deg, e, x).unwrap();
            // the cache drops support nodes that only degenerated vertices reach
            for k in 0..b.len() {
                match a.nodes.iter().position(|&n| n == b.nodes[k]) {
                    Some(j) => {
                        assert!((a.values[j] - b.values[k]).abs() < 1e-14);
                        assert!((a.grad_x[j] - b.grad_x[k]).abs() < 1e-12);
                    }
                    None => assert!(b.values[k] == 0.0 && b.grad_x[k] == 0.0 && b.grad_y[k] == 0.0),
                }
            }
        }
    }
}
