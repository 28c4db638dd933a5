//! Discretisation of a cracked or uncracked elastic body, element matrices,
//! global assembly, boundary conditions and the linear solve.

use serde::{Deserialize, Serialize};

use crate::basis::{Basis, DegenerationSet, Interpolation, ShapeEval};
use crate::enrichment::{
    branch_functions, classify_nodes, degeneration_from_enrichment, heaviside, subdivide_triangle, CrackPath,
    CutStatus, EnrichmentKind, EnrichmentScheme, NodeEnrichment, TipFrame,
};
use crate::error::{Error, Result};
use crate::material::Material;
use crate::mesh::{build_patches, Mesh, NodePatch, Point};
use crate::quadrature::{LineRule, TriangleRule};
use crate::sparse::{solve_pcg, CgOptions, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fem,
    Dfem,
    Xfem,
    Xdfem,
}

impl Method {
    pub fn interpolation(self) -> Interpolation {
        match self {
            Method::Fem | Method::Xfem => Interpolation::Linear,
            Method::Dfem | Method::Xdfem => Interpolation::Double,
        }
    }

    pub fn is_enriched(self) -> bool {
        matches!(self, Method::Xfem | Method::Xdfem)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Fem => "fem",
            Method::Dfem => "dfem",
            Method::Xfem => "xfem",
            Method::Xdfem => "xdfem",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fem" | "t3" => Ok(Method::Fem),
            "dfem" => Ok(Method::Dfem),
            "xfem" => Ok(Method::Xfem),
            "xdfem" => Ok(Method::Xdfem),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

/// Which crack enrichment an enriched method uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Enrichment {
    /// Heaviside on split elements, branch functions on the tip element.
    Topological,
    /// Heaviside on split elements, branch functions within `radius`.
    Fixed { radius: f64 },
    /// Heaviside on split elements only; the discontinuity stops at the
    /// boundary of the tip element.
    HeavisideOnly,
}

impl Enrichment {
    pub fn name(&self) -> &'static str {
        match self {
            Enrichment::Topological => "topological",
            Enrichment::Fixed { .. } => "fixed",
            Enrichment::HeavisideOnly => "heaviside",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Uncut linear elements.
    pub linear: usize,
    /// Uncut double-interpolation elements.
    pub double: usize,
    /// Elements carrying branch functions, and tip sub-cells.
    pub tip: usize,
    /// Put the collapsed vertex of tip sub-cell rules at the tip.
    pub almost_polar: bool,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { linear: 1, double: 5, tip: 8, almost_polar: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub method: Method,
    pub enrichment: Enrichment,
    /// Degenerate every outer-boundary node as well.
    pub degenerate_boundary: bool,
    pub quadrature: QuadratureOptions,
}

impl ModelOptions {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            enrichment: Enrichment::Topological,
            degenerate_boundary: false,
            quadrature: QuadratureOptions::default(),
        }
    }

    pub fn with_enrichment(mut self, enrichment: Enrichment) -> Self {
        self.enrichment = enrichment;
        self
    }
}

/// Global unknown layout: two displacement DOFs per node first, then two
/// Heaviside DOFs per Heaviside node, then eight branch DOFs per tip node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub n_nodes: usize,
    pub heaviside: Vec<Option<usize>>,
    pub tip: Vec<Option<usize>>,
    pub total: usize,
}

impl DofMap {
    pub fn new(enrichment: &NodeEnrichment) -> Self {
        let n = enrichment.kinds.len();
        let mut next = 2 * n;
        let mut heaviside = vec![None; n];
        let mut tip = vec![None; n];
        for (i, k) in enrichment.kinds.iter().enumerate() {
            if *k == EnrichmentKind::Heaviside {
                heaviside[i] = Some(next);
                next += 2;
            }
        }
        for (i, k) in enrichment.kinds.iter().enumerate() {
            if *k == EnrichmentKind::Tip {
                tip[i] = Some(next);
                next += 8;
            }
        }
        Self { n_nodes: n, heaviside, tip, total: next }
    }

    pub fn u(&self, node: usize, component: usize) -> usize {
        2 * node + component
    }

    /// First DOF of every DOF pair owned by `node`.
    pub fn node_pairs(&self, node: usize, out: &mut Vec<usize>) {
        out.push(2 * node);
        if let Some(a) = self.heaviside[node] {
            out.push(a);
        }
        if let Some(b) = self.tip[node] {
            out.extend((0..4).map(|k| b + 2 * k));
        }
    }
}

/// A 3x2 strain-displacement block `[g_x 0; 0 g_y; g_y g_x]`.
pub fn b_block(gx: f64, gy: f64) -> [[f64; 2]; 3] {
    [[gx, 0.0], [0.0, gy], [gy, gx]]
}

pub fn b_matrix_std(shape: &ShapeEval, local: usize) -> [[f64; 2]; 3] {
    b_block(shape.grad_x[local], shape.grad_y[local])
}

/// Block of the shifted Heaviside function `N (H - H_I)` on a region where
/// `H` is constant.
pub fn b_matrix_heaviside(shape: &ShapeEval, local: usize, h_point: f64, h_node: f64) -> [[f64; 2]; 3] {
    let s = h_point - h_node;
    b_block(s * shape.grad_x[local], s * shape.grad_y[local])
}

/// Gradient of `N (f - f_I)` by the product rule.
pub fn shifted_gradient(n: f64, grad_n: [f64; 2], f: f64, grad_f: [f64; 2], f_node: f64) -> [f64; 2] {
    let s = f - f_node;
    [grad_n[0] * s + n * grad_f[0], grad_n[1] * s + n * grad_f[1]]
}

/// The 3x8 block of the four shifted branch functions, columns ordered
/// `(alpha, component)`.
pub fn b_matrix_tip(
    shape: &ShapeEval,
    local: usize,
    f: &[f64; 4],
    grad_f: &[[f64; 2]; 4],
    f_node: &[f64; 4],
) -> [[f64; 8]; 3] {
    let n = shape.values[local];
    let gn = [shape.grad_x[local], shape.grad_y[local]];
    let mut out = [[0.0; 8]; 3];
    for a in 0..4 {
        let g = shifted_gradient(n, gn, f[a], grad_f[a], f_node[a]);
        let b = b_block(g[0], g[1]);
        for r in 0..3 {
            out[r][2 * a] = b[r][0];
            out[r][2 * a + 1] = b[r][1];
        }
    }
    out
}

/// `B_k^T C B_l` for two scalar functions with gradients `g` and `h`.
#[inline]
pub fn pair_stiffness(c: &[[f64; 3]; 3], g: [f64; 2], h: [f64; 2]) -> [[f64; 2]; 2] {
    let (c11, c12, c22, c33) = (c[0][0], c[0][1], c[1][1], c[2][2]);
    [
        [g[0] * c11 * h[0] + g[1] * c33 * h[1], g[0] * c12 * h[1] + g[1] * c33 * h[0]],
        [g[1] * c12 * h[0] + g[0] * c33 * h[1], g[1] * c22 * h[1] + g[0] * c33 * h[0]],
    ]
}

/// A quadrature point with its absolute weight and the Heaviside value of
/// the region it samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint {
    pub x: Point,
    pub w: f64,
    pub h: f64,
}

/// Scalar approximation functions of one element at one point. Each entry
/// drives the DOF pair starting at `pairs[k]`.
#[derive(Debug, Clone, Default)]
pub struct Funcs {
    pub pairs: Vec<usize>,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
    shape: ShapeEval,
}

impl Funcs {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn displacement(&self, d: &[f64]) -> [f64; 2] {
        let mut u = [0.0; 2];
        for (k, &p) in self.pairs.iter().enumerate() {
            u[0] += self.values[k] * d[p];
            u[1] += self.values[k] * d[p + 1];
        }
        u
    }

    /// Engineering strain `(xx, yy, 2xy)`.
    pub fn strain(&self, d: &[f64]) -> [f64; 3] {
        let mut e = [0.0; 3];
        for (k, &p) in self.pairs.iter().enumerate() {
            let [gx, gy] = self.grads[k];
            e[0] += gx * d[p];
            e[1] += gy * d[p + 1];
            e[2] += gy * d[p] + gx * d[p + 1];
        }
        e
    }

    /// Full displacement gradient `[[u_x,x, u_x,y], [u_y,x, u_y,y]]`.
    pub fn displacement_gradient(&self, d: &[f64]) -> [[f64; 2]; 2] {
        let mut g = [[0.0; 2]; 2];
        for (k, &p) in self.pairs.iter().enumerate() {
            let [gx, gy] = self.grads[k];
            g[0][0] += gx * d[p];
            g[0][1] += gy * d[p];
            g[1][0] += gx * d[p + 1];
            g[1][1] += gy * d[p + 1];
        }
        g
    }
}

#[derive(Debug, Clone)]
struct Subcell {
    v: [Point; 3],
    h: f64,
    /// Index of the vertex sitting on the crack tip.
    tip_vertex: Option<usize>,
}

/// A mesh prepared for one method: basis, enrichment, DOF layout and
/// integration cells.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub patches: Vec<NodePatch>,
    pub material: Material,
    pub options: ModelOptions,
    pub crack: Option<CrackPath>,
    pub frame: Option<TipFrame>,
    pub enrichment: NodeEnrichment,
    pub degeneration: DegenerationSet,
    pub basis: Basis,
    pub dofs: DofMap,
    node_h: Vec<f64>,
    node_f: Vec<[f64; 4]>,
    element_h: Vec<f64>,
    subcells: Vec<Option<Vec<Subcell>>>,
    has_tip_funcs: Vec<bool>,
}

impl Discretization {
    pub fn new(mesh: Mesh, material: Material, crack: Option<CrackPath>, options: ModelOptions) -> Result<Self> {
        material.validate()?;
        let method = options.method;
        if method.is_enriched() && crack.is_none() {
            return Err(Error::InvalidArgument(format!("{} needs a crack", method.name())));
        }
        if let Enrichment::Fixed { radius } = options.enrichment {
            if !(radius > 0.0) {
                return Err(Error::InvalidArgument("fixed enrichment radius must be positive".into()));
            }
        }
        let patches = build_patches(&mesh);
        let crack = if method.is_enriched() { crack } else { None };

        let enrichment = match &crack {
            None => NodeEnrichment::none(&mesh),
            Some(c) => {
                let scheme = match options.enrichment {
                    Enrichment::Fixed { radius } => EnrichmentScheme::Fixed { radius },
                    _ => EnrichmentScheme::Topological,
                };
                let mut en = classify_nodes(&mesh, c, scheme);
                if options.enrichment == Enrichment::HeavisideOnly {
                    for k in en.kinds.iter_mut() {
                        if *k == EnrichmentKind::Tip {
                            *k = EnrichmentKind::None;
                        }
                    }
                    for (e, s) in en.elements.iter().enumerate() {
                        if *s == CutStatus::Split {
                            for &n in &mesh.triangles[e] {
                                en.kinds[n] = EnrichmentKind::Heaviside;
                            }
                        }
                    }
                }
                en
            }
        };

        let degeneration = match method.interpolation() {
            Interpolation::Linear => DegenerationSet::all(mesh.n_nodes()),
            Interpolation::Double => {
                let mut d = degeneration_from_enrichment(&enrichment, &mesh);
                if options.degenerate_boundary {
                    d = d.union(&DegenerationSet::boundary(&mesh));
                }
                d
            }
        };
        let basis = Basis::new(&mesh, &patches, &degeneration, method.interpolation());
        let dofs = DofMap::new(&enrichment);
        let frame = crack.as_ref().map(|c| c.frame());

        let mut node_h = vec![0.0; mesh.n_nodes()];
        let mut node_f = vec![[0.0; 4]; mesh.n_nodes()];
        let mut element_h = vec![1.0; mesh.n_elements()];
        let mut subcells = vec![None; mesh.n_elements()];
        if let (Some(c), Some(f)) = (&crack, &frame) {
            for n in 0..mesh.n_nodes() {
                if dofs.heaviside[n].is_some() {
                    node_h[n] = heaviside(c, mesh.nodes[n]);
                }
                if dofs.tip[n].is_some() {
                    node_f[n] = match branch_functions(f, mesh.nodes[n]) {
                        Ok(b) => b.values,
                        Err(_) => [0.0; 4],
                    };
                }
            }
            let tip = c.tip();
            for e in 0..mesh.n_elements() {
                element_h[e] = heaviside(c, mesh.centroid(e));
                let status = enrichment.elements[e];
                let split = status == CutStatus::Split
                    || (status == CutStatus::Tip && options.enrichment != Enrichment::HeavisideOnly);
                if split {
                    let cells = subdivide_triangle(mesh.vertices(e), c)
                        .into_iter()
                        .map(|v| {
                            let cen = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
                            let tip_vertex = v.iter().position(|&p| p == tip);
                            Subcell { v, h: heaviside(c, cen), tip_vertex }
                        })
                        .collect();
                    subcells[e] = Some(cells);
                }
            }
        }
        let has_tip_funcs =
            (0..mesh.n_elements()).map(|e| basis.support(e).iter().any(|&n| dofs.tip[n].is_some())).collect();

        Ok(Self {
            mesh,
            patches,
            material,
            options,
            crack,
            frame,
            enrichment,
            degeneration,
            basis,
            dofs,
            node_h,
            node_f,
            element_h,
            subcells,
            has_tip_funcs,
        })
    }

    /// Same model with another degeneration set; the basis is rebuilt.
    pub fn with_degeneration(mut self, degeneration: DegenerationSet) -> Self {
        self.basis = Basis::new(&self.mesh, &self.patches, &degeneration, self.method().interpolation());
        self.degeneration = degeneration;
        self
    }

    pub fn method(&self) -> Method {
        self.options.method
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.total
    }

    /// DOF pair starts of element `e`, in the order `eval_funcs` fills them.
    pub fn element_pairs(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &n in self.basis.support(e) {
            self.dofs.node_pairs(n, &mut out);
        }
        out
    }

    /// Approximation functions of element `e` at `p`; `h` is the Heaviside
    /// value of the region containing `p`.
    pub fn eval_funcs(&self, e: usize, p: Point, h: f64, out: &mut Funcs) {
        self.basis.eval_into(&self.mesh, e, p, &mut out.shape);
        out.pairs.clear();
        out.values.clear();
        out.grads.clear();
        let branch = if self.has_tip_funcs[e] {
            let frame = self.frame.as_ref().expect("tip functions need a frame");
            Some(branch_functions(frame, p).unwrap_or_default())
        } else {
            None
        };
        let shape = &out.shape;
        for (k, &n) in shape.nodes.iter().enumerate() {
            let v = shape.values[k];
            let g = [shape.grad_x[k], shape.grad_y[k]];
            out.pairs.push(2 * n);
            out.values.push(v);
            out.grads.push(g);
            if let Some(a) = self.dofs.heaviside[n] {
                let s = h - self.node_h[n];
                out.pairs.push(a);
                out.values.push(v * s);
                out.grads.push([g[0] * s, g[1] * s]);
            }
            if let Some(b) = self.dofs.tip[n] {
                let br = branch.as_ref().expect("branch data");
                for a in 0..4 {
                    out.pairs.push(b + 2 * a);
                    out.values.push(v * (br.values[a] - self.node_f[n][a]));
                    out.grads.push(shifted_gradient(v, g, br.values[a], br.grads[a], self.node_f[n][a]));
                }
            }
        }
    }

    /// Heaviside value to use at a point of element `e`.
    pub fn heaviside_at(&self, e: usize, p: Point) -> f64 {
        match (&self.subcells[e], &self.crack) {
            (Some(_), Some(c)) => heaviside(c, p),
            _ => self.element_h[e],
        }
    }

    fn stiffness_degree(&self, e: usize) -> usize {
        let q = &self.options.quadrature;
        if self.has_tip_funcs[e] {
            return q.tip;
        }
        match self.options.method.interpolation() {
            Interpolation::Linear => q.linear,
            Interpolation::Double => q.double,
        }
    }

    /// Integration points of element `e`. `degree` overrides the stiffness
    /// rule; `polar` forces the collapsed vertex of tip sub-cells onto the tip.
    pub fn integration_points(&self, e: usize, degree: Option<usize>, polar: bool) -> Vec<QPoint> {
        let degree = degree.unwrap_or_else(|| self.stiffness_degree(e));
        let rule = TriangleRule::with_degree(degree);
        match &self.subcells[e] {
            None => {
                let h = self.element_h[e];
                rule.map(self.mesh.vertices(e)).map(|(x, w)| QPoint { x, w, h }).collect()
            }
            Some(cells) => {
                let mut out = Vec::new();
                let tip_degree = degree.max(self.options.quadrature.tip);
                for cell in cells {
                    match cell.tip_vertex {
                        Some(k) if self.has_tip_funcs[e] || polar => {
                            let at_tip = polar || self.options.quadrature.almost_polar;
                            let k = if at_tip { k } else { (k + 1) % 3 };
                            let r = TriangleRule::collapsed(tip_degree).rotated(k);
                            out.extend(r.map(cell.v).map(|(x, w)| QPoint { x, w, h: cell.h }));
                        }
                        _ => out.extend(rule.map(cell.v).map(|(x, w)| QPoint { x, w, h: cell.h })),
                    }
                }
                out
            }
        }
    }

    /// Element stiffness over all DOF pairs of the element.
    pub fn element_stiffness(&self, e: usize) -> Result<ElementMatrix> {
        let pairs = self.element_pairs(e);
        let m = pairs.len();
        let dim = 2 * m;
        let mut k = vec![0.0; dim * dim];
        let c = self.material.elasticity();
        let mut f = Funcs::default();
        for q in self.integration_points(e, None, false) {
            self.eval_funcs(e, q.x, q.h, &mut f);
            debug_assert_eq!(f.pairs, pairs);
            for a in 0..m {
                let ga = f.grads[a];
                for b in a..m {
                    let s = pair_stiffness(&c, ga, f.grads[b]);
                    let (r, col) = (2 * a, 2 * b);
                    k[r * dim + col] += q.w * s[0][0];
                    k[r * dim + col + 1] += q.w * s[0][1];
                    k[(r + 1) * dim + col] += q.w * s[1][0];
                    k[(r + 1) * dim + col + 1] += q.w * s[1][1];
                }
            }
        }
        // mirror the upper block triangle
        for a in 0..m {
            for b in 0..a {
                for i in 0..2 {
                    for j in 0..2 {
                        k[(2 * a + i) * dim + 2 * b + j] = k[(2 * b + j) * dim + 2 * a + i];
                    }
                }
            }
        }
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(e));
        }
        let dofs = pairs.iter().flat_map(|&p| [p, p + 1]).collect();
        Ok(ElementMatrix { dofs, k, f: vec![0.0; dim] })
    }

    fn element_body_force(&self, e: usize, load: &LoadCase, em: &mut ElementMatrix) {
        let Some(b) = &load.body_force else { return };
        let mut f = Funcs::default();
        for q in self.integration_points(e, None, false) {
            self.eval_funcs(e, q.x, q.h, &mut f);
            let bx = b(q.x);
            for (k, &v) in f.values.iter().enumerate() {
                em.f[2 * k] += q.w * v * bx[0];
                em.f[2 * k + 1] += q.w * v * bx[1];
            }
        }
    }

    /// Sparsity pattern: DOF rows coupled through shared element supports.
    fn pattern(&self) -> CsrMatrix {
        let n_nodes = self.mesh.n_nodes();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
        for e in 0..self.mesh.n_elements() {
            let s = self.basis.support(e);
            for &a in s {
                adj[a].extend_from_slice(s);
            }
        }
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); self.dofs.total];
        let mut pairs = Vec::new();
        for (a, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            let mut cols = Vec::new();
            for &b in list.iter() {
                pairs.clear();
                self.dofs.node_pairs(b, &mut pairs);
                for &p in &pairs {
                    cols.push(p);
                    cols.push(p + 1);
                }
            }
            cols.sort_unstable();
            pairs.clear();
            self.dofs.node_pairs(a, &mut pairs);
            for &p in &pairs {
                row_cols[p] = cols.clone();
                row_cols[p + 1] = cols.clone();
            }
        }
        let mut row_ptr = vec![0usize; self.dofs.total + 1];
        let mut cols = Vec::new();
        for (i, rc) in row_cols.into_iter().enumerate() {
            cols.extend(rc);
            row_ptr[i + 1] = cols.len();
        }
        let nnz = cols.len();
        CsrMatrix { n: self.dofs.total, row_ptr, cols, vals: vec![0.0; nnz] }
    }

    /// Global stiffness and load vector. Element matrices are computed in
    /// parallel chunks and scattered in element order, so the result does not
    /// depend on the worker count.
    pub fn assemble(&self, load: &LoadCase) -> Result<(CsrMatrix, Vec<f64>)> {
        let mut k = self.pattern();
        let mut f = vec![0.0; self.dofs.total];
        let n_el = self.mesh.n_elements();
        const CHUNK: usize = 512;
        let mut start = 0;
        while start < n_el {
            let end = (start + CHUNK).min(n_el);
            let mats: Vec<Result<ElementMatrix>> = map_range(start..end, |e| {
                let mut em = self.element_stiffness(e)?;
                self.element_body_force(e, load, &mut em);
                Ok(em)
            });
            for em in mats {
                let em = em?;
                scatter(&mut k, &mut f, &em);
            }
            start = end;
        }
        self.add_tractions(load, &mut f);
        for &(node, force) in &load.point_loads {
            f[2 * node] += force[0];
            f[2 * node + 1] += force[1];
        }
        Ok((k, f))
    }

    fn add_tractions(&self, load: &LoadCase, f: &mut [f64]) {
        if load.tractions.is_empty() {
            return;
        }
        let line = LineRule::with_degree(6);
        let mut funcs = Funcs::default();
        for edge in &self.mesh.boundary_edges {
            let a = self.mesh.nodes[edge.nodes[0]];
            let b = self.mesh.nodes[edge.nodes[1]];
            let mid = edge.midpoint(&self.mesh);
            let Some(tr) = load.tractions.iter().find(|t| (t.selector)(mid, edge.normal)) else { continue };
            let e = edge.element;
            // split the edge where the crack crosses it
            let mut cuts = vec![0.0, 1.0];
            if let (Some(_), Some(c)) = (&self.subcells[e], &self.crack) {
                for (p, q) in c.segments() {
                    if let Some(t) = segment_param(a, b, p, q) {
                        cuts.push(t);
                    }
                }
                cuts.sort_by(|x, y| x.total_cmp(y));
            }
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            for w in cuts.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                if t1 - t0 < 1e-14 {
                    continue;
                }
                let tm = 0.5 * (t0 + t1);
                let h = self.heaviside_at(e, lerp(a, b, tm));
                for (&s, &ws) in line.points.iter().zip(&line.weights) {
                    let t = t0 + s * (t1 - t0);
                    let x = lerp(a, b, t);
                    let wt = ws * (t1 - t0) * len;
                    let tv = (tr.value)(x, edge.normal);
                    self.eval_funcs(e, x, h, &mut funcs);
                    for (k, &p) in funcs.pairs.iter().enumerate() {
                        f[p] += wt * funcs.values[k] * tv[0];
                        f[p + 1] += wt * funcs.values[k] * tv[1];
                    }
                }
            }
        }
    }

    /// Displacement and engineering strain at a point of element `e`.
    pub fn field_at(&self, e: usize, p: Point, h: f64, d: &[f64], funcs: &mut Funcs) -> ([f64; 2], [f64; 3]) {
        self.eval_funcs(e, p, h, funcs);
        (funcs.displacement(d), funcs.strain(d))
    }

    /// Displacement at an arbitrary point of the mesh.
    pub fn displacement_at(&self, p: Point, d: &[f64]) -> Option<[f64; 2]> {
        let e = self.mesh.locate(p)?;
        let mut funcs = Funcs::default();
        let h = self.heaviside_at(e, p);
        Some(self.field_at(e, p, h, d, &mut funcs).0)
    }

    /// Builds, constrains and solves the system.
    pub fn solve(&self, load: &LoadCase, cg: CgOptions) -> Result<Solution> {
        let (k, f) = self.assemble(load)?;
        let fixed = dirichlet_vector(&self.dofs, &load.dirichlet)?;
        let mut kc = k.clone();
        let mut rhs = f.clone();
        kc.eliminate(&fixed, &mut rhs);
        let sol = solve_pcg(&kc, &rhs, cg)?;
        let kd = k.apply(&sol.x);
        let reactions = fixed.iter().enumerate().filter(|(_, v)| v.is_some()).map(|(i, _)| (i, kd[i] - f[i])).collect();
        Ok(Solution { d: sol.x, iterations: sol.iterations, residual: sol.residual, reactions })
    }
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Parameter along `a-b` where it properly crosses segment `p-q`.
fn segment_param(a: Point, b: Point, p: Point, q: Point) -> Option<f64> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [q[0] - p[0], q[1] - p[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den.abs() < 1e-300 {
        return None;
    }
    let ap = [p[0] - a[0], p[1] - a[1]];
    let t = (ap[0] * s[1] - ap[1] * s[0]) / den;
    let u = (ap[0] * r[1] - ap[1] * r[0]) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some(t)
}

#[cfg(feature = "parallel")]
pub(crate) fn map_range<T: Send>(range: std::ops::Range<usize>, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<T: Send>(range: std::ops::Range<usize>, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    range.map(f).collect()
}

/// Dense element block over `dofs`, with its load contribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrix {
    pub dofs: Vec<usize>,
    /// Row-major `dofs.len()` squared.
    pub k: Vec<f64>,
    pub f: Vec<f64>,
}

impl ElementMatrix {
    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.dim() + j]
    }
}

fn scatter(k: &mut CsrMatrix, f: &mut [f64], em: &ElementMatrix) {
    let n = em.dim();
    for i in 0..n {
        let r = em.dofs[i];
        f[r] += em.f[i];
        let start = k.row_ptr[r];
        let cols = &k.cols[start..k.row_ptr[r + 1]];
        for j in 0..n {
            let v = em.k[i * n + j];
            if v != 0.0 {
                let pos = cols.binary_search(&em.dofs[j]).expect("column in pattern");
                k.vals[start + pos] += v;
            }
        }
    }
}

/// Prescribed displacement component at a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletEntry {
    pub node: usize,
    pub component: usize,
    pub value: f64,
}

pub type EdgeSelector = Box<dyn Fn(Point, [f64; 2]) -> bool + Send + Sync>;
pub type TractionFn = Box<dyn Fn(Point, [f64; 2]) -> [f64; 2] + Send + Sync>;
pub type BodyForceFn = Box<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// Traction on the boundary edges accepted by `selector` (called with the
/// edge midpoint and outward normal).
pub struct Traction {
    pub selector: EdgeSelector,
    pub value: TractionFn,
}

#[derive(Default)]
pub struct LoadCase {
    pub dirichlet: Vec<DirichletEntry>,
    pub tractions: Vec<Traction>,
    pub body_force: Option<BodyForceFn>,
    pub point_loads: Vec<(usize, [f64; 2])>,
}

impl LoadCase {
    /// Prescribes `u(x)` on every node accepted by `select`.
    pub fn fix_nodes(&mut self, mesh: &Mesh, select: impl Fn(Point) -> bool, u: impl Fn(Point) -> [f64; 2]) {
        for (n, &p) in mesh.nodes.iter().enumerate() {
            if select(p) {
                let v = u(p);
                self.dirichlet.push(DirichletEntry { node: n, component: 0, value: v[0] });
                self.dirichlet.push(DirichletEntry { node: n, component: 1, value: v[1] });
            }
        }
    }

    pub fn fix_component(&mut self, mesh: &Mesh, select: impl Fn(Point) -> bool, component: usize, value: f64) {
        for (n, &p) in mesh.nodes.iter().enumerate() {
            if select(p) {
                self.dirichlet.push(DirichletEntry { node: n, component, value });
            }
        }
    }

    pub fn add_traction(
        &mut self,
        selector: impl Fn(Point, [f64; 2]) -> bool + Send + Sync + 'static,
        value: impl Fn(Point, [f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) {
        self.tractions.push(Traction { selector: Box::new(selector), value: Box::new(value) });
    }
}

/// Per-DOF prescribed values; duplicate entries must agree.
pub fn dirichlet_vector(dofs: &DofMap, entries: &[DirichletEntry]) -> Result<Vec<Option<f64>>> {
    let mut fixed: Vec<Option<f64>> = vec![None; dofs.total];
    for e in entries {
        if e.node >= dofs.n_nodes || e.component > 1 {
            return Err(Error::InvalidArgument(format!("bad Dirichlet entry {e:?}")));
        }
        let i = dofs.u(e.node, e.component);
        match fixed[i] {
            Some(v) if v != e.value => return Err(Error::ConflictingDirichlet(i)),
            _ => fixed[i] = Some(e.value),
        }
    }
    Ok(fixed)
}

/// Applies Dirichlet entries to `(k, f)` by symmetric elimination.
pub fn apply_dirichlet(k: &mut CsrMatrix, f: &mut [f64], dofs: &DofMap, entries: &[DirichletEntry]) -> Result<()> {
    let fixed = dirichlet_vector(dofs, entries)?;
    k.eliminate(&fixed, f);
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub d: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// `(dof, K d - f)` at every constrained DOF.
    pub reactions: Vec<(usize, f64)>,
}

impl Solution {
    pub fn nodal_displacements(&self, n_nodes: usize) -> Vec<[f64; 2]> {
        (0..n_nodes).map(|n| [self.d[2 * n], self.d[2 * n + 1]]).collect()
    }
}

/// Rigid-body motions restricted to the displacement DOFs.
pub fn rigid_modes(mesh: &Mesh, total: usize) -> [Vec<f64>; 3] {
    let mut m = [vec![0.0; total], vec![0.0; total], vec![0.0; total]];
    for (n, p) in mesh.nodes.iter().enumerate() {
        m[0][2 * n] = 1.0;
        m[1][2 * n + 1] = 1.0;
        m[2][2 * n] = -p[1];
        m[2][2 * n + 1] = p[0];
    }
    m
}
