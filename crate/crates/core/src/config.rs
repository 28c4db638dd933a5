//! JSON run configurations and the single-run driver.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticalField, LinearField, PlateHole, Timoshenko, Westergaard};
use crate::assembly::{DirichletEntry, Discretization, Enrichment, LoadCase, Method, ModelOptions, QuadratureOptions};
use crate::cases::{growth_domain, RunRecord};
use crate::enrichment::CrackPath;
use crate::error::{Error, Result};
use crate::fracture::{
    interaction_integral_sifs, propagate, CrackHistory, InteractionDomain, SifPair, DEFAULT_DOMAIN_FACTOR,
};
use crate::material::{Material, PlaneState};
use crate::mesh::{generate_structured, load_mesh, Mesh, Point};
use crate::meshgen::{centered_square, plate_hole_quarter, HoledBeam};
use crate::norms::{l2_and_energy_norms, recover_nodal_stress, StressRecovery, NORM_DEGREE};
use crate::sparse::CgOptions;
use crate::vtk::to_vtk;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default = "default_case")]
    pub case: String,
    pub mesh: MeshSource,
    pub method: Method,
    #[serde(default = "default_enrichment")]
    pub enrichment: Enrichment,
    pub material: Material,
    pub load: LoadSpec,
    #[serde(default)]
    pub crack: Option<Vec<Point>>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub quadrature: QuadratureOptions,
    #[serde(default)]
    pub degenerate_boundary: bool,
    #[serde(default)]
    pub propagation: Option<PropagationConfig>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_case() -> String {
    "run".into()
}

fn default_enrichment() -> Enrichment {
    Enrichment::Topological
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = CgOptions::default();
        Self { tol: d.tol, max_iter: d.max_iter }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    pub increment: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    /// Mesh file, relative to the config file.
    File { path: PathBuf },
    /// `nx x ny` cells on `[x0, x0 + width] x [y0, y0 + height]`.
    Structured {
        nx: usize,
        ny: usize,
        width: f64,
        height: f64,
        #[serde(default)]
        origin: Point,
        #[serde(default)]
        distortion: f64,
    },
    /// Odd `n x n` cells on `[-half, half]^2`.
    CenteredSquare {
        n: usize,
        half: f64,
        #[serde(default)]
        distortion: f64,
    },
    /// Quarter plate with a hole at the origin.
    PlateHole { n: usize, radius: f64, half_width: f64 },
    /// Three-point-bend beam with three holes.
    HoledBeam { offset: f64, crack_length: f64, spacing: f64 },
}

impl MeshSource {
    pub fn build(&self, base: &Path, seed: u64) -> Result<Mesh> {
        match self {
            MeshSource::File { path } => load_mesh(base.join(path)),
            MeshSource::Structured { nx, ny, width, height, origin, distortion } => {
                Ok(generate_structured(*nx, *ny, *width, *height, *distortion, seed)?.translate(origin[0], origin[1]))
            }
            MeshSource::CenteredSquare { n, half, distortion } => centered_square(*n, *half, *distortion, seed),
            MeshSource::PlateHole { n, radius, half_width } => plate_hole_quarter(*n, *radius, *half_width),
            MeshSource::HoledBeam { offset, crack_length, spacing } => {
                HoledBeam::new(*offset, *crack_length).mesh(*spacing)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadSpec {
    /// Exact near-tip displacements on every outer node; needs a crack.
    CrackTip {
        #[serde(rename = "K_I")]
        k1: f64,
        #[serde(rename = "K_II")]
        k2: f64,
    },
    /// Linear displacement `u0 + grad x` on every outer node.
    Linear { u0: [f64; 2], grad: [[f64; 2]; 2] },
    /// Quarter plate: symmetry on the axes, exact traction on `x = L`, `y = L`.
    PlateHole { sigma: f64, radius: f64 },
    /// Cantilever on `[0, L] x [-W/2, W/2]`: exact displacement at `x = 0`,
    /// exact traction at `x = L`.
    Cantilever { p: f64, length: f64, depth: f64 },
    /// Pin, roller and a downward point load at the nearest nodes.
    ThreePointBend { pin: Point, roller: Point, load_point: Point, force: f64 },
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema {} unsupported, expected {SCHEMA_VERSION}", self.schema)));
        }
        self.material.validate()?;
        match (self.method.is_enriched(), &self.crack) {
            (true, None) => return Err(Error::Config(format!("{} needs a crack", self.method.name()))),
            (false, Some(_)) => return Err(Error::Config(format!("{} cannot carry a crack", self.method.name()))),
            _ => {}
        }
        if let Enrichment::Fixed { radius } = self.enrichment {
            if !(radius > 0.0) {
                return Err(Error::Config(format!("fixed enrichment radius {radius} must be positive")));
            }
        }
        if matches!(self.load, LoadSpec::CrackTip { .. }) && self.crack.is_none() {
            return Err(Error::Config("a crack-tip load needs a crack".into()));
        }
        if let Some(p) = self.propagation {
            if self.crack.is_none() || !(p.increment > 0.0) {
                return Err(Error::Config("propagation needs a crack and a positive increment".into()));
            }
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::Config("solver tolerance must be positive".into()));
        }
        Ok(())
    }

    fn options(&self) -> ModelOptions {
        ModelOptions {
            method: self.method,
            enrichment: self.enrichment,
            degenerate_boundary: self.degenerate_boundary,
            quadrature: self.quadrature,
        }
    }

    fn cg(&self) -> CgOptions {
        CgOptions { tol: self.solver.tol, max_iter: self.solver.max_iter }
    }
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    /// Final mesh and its nodal displacements (standard part).
    pub mesh: Mesh,
    pub displacement: Vec<[f64; 2]>,
    pub vtk: String,
    pub history: Option<CrackHistory>,
}

fn exact_field(load: &LoadSpec, material: Material, crack: Option<&CrackPath>) -> Option<Box<dyn AnalyticalField>> {
    match *load {
        LoadSpec::CrackTip { k1, k2 } => crack
            .map(|c| Box::new(Westergaard::new(SifPair::new(k1, k2), material, c.frame())) as Box<dyn AnalyticalField>),
        LoadSpec::Linear { u0, grad } => Some(Box::new(LinearField { u0, grad, material })),
        LoadSpec::PlateHole { sigma, radius } => Some(Box::new(PlateHole { a: radius, sigma, material })),
        LoadSpec::Cantilever { p, length, depth } => Some(Box::new(Timoshenko { p, l: length, w: depth, material })),
        LoadSpec::ThreePointBend { .. } => None,
    }
}

fn nearest(mesh: &Mesh, p: Point) -> usize {
    (0..mesh.n_nodes())
        .min_by(|&a, &b| {
            let d = |n: usize| (mesh.nodes[n][0] - p[0]).hypot(mesh.nodes[n][1] - p[1]);
            d(a).total_cmp(&d(b))
        })
        .unwrap_or(0)
}

fn load_case(spec: &LoadSpec, mesh: &Mesh, exact: Option<&dyn AnalyticalField>) -> Result<LoadCase> {
    let (lo, hi) = mesh.bounding_box();
    let tol = 1e-9 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let near = move |a: f64, b: f64| (a - b).abs() < tol;
    let mut load = LoadCase::default();
    let outer = mesh.boundary_nodes();
    match *spec {
        LoadSpec::CrackTip { .. } | LoadSpec::Linear { .. } => {
            let f = exact.ok_or_else(|| Error::Config("load has no exact field".into()))?;
            for (n, &p) in mesh.nodes.iter().enumerate() {
                if outer[n] {
                    let u = f.displacement(p)?;
                    load.dirichlet.push(DirichletEntry { node: n, component: 0, value: u[0] });
                    load.dirichlet.push(DirichletEntry { node: n, component: 1, value: u[1] });
                }
            }
        }
        LoadSpec::PlateHole { sigma, radius } => {
            load.fix_component(mesh, |p| near(p[0], 0.0), 0, 0.0);
            load.fix_component(mesh, |p| near(p[1], 0.0), 1, 0.0);
            let field = PlateHole { a: radius, sigma, material: Material::new(1.0, 0.3, PlaneState::PlaneStress)? };
            let l = hi[0];
            load.add_traction(
                move |m, n| (near(m[0], l) && n[0] > 0.5) || (near(m[1], l) && n[1] > 0.5),
                move |x, n| {
                    let s = field.stress(x).unwrap_or([0.0; 3]);
                    [s[0] * n[0] + s[2] * n[1], s[2] * n[0] + s[1] * n[1]]
                },
            );
        }
        LoadSpec::Cantilever { p, length, depth } => {
            let f = exact.ok_or_else(|| Error::Config("load has no exact field".into()))?;
            load.fix_nodes(mesh, |q| near(q[0], 0.0), |q| f.displacement(q).unwrap_or([0.0; 2]));
            let beam =
                Timoshenko { p, l: length, w: depth, material: Material::new(1.0, 0.3, PlaneState::PlaneStress)? };
            load.add_traction(
                move |m, n| near(m[0], length) && n[0] > 0.5,
                move |x, _| {
                    let s = beam.stress(x).unwrap_or([0.0; 3]);
                    [s[0], s[2]]
                },
            );
        }
        LoadSpec::ThreePointBend { pin, roller, load_point, force } => {
            let (a, b, c) = (nearest(mesh, pin), nearest(mesh, roller), nearest(mesh, load_point));
            for (node, component) in [(a, 0), (a, 1), (b, 1)] {
                load.dirichlet.push(DirichletEntry { node, component, value: 0.0 });
            }
            load.point_loads.push((c, [0.0, -force]));
        }
    }
    Ok(load)
}

/// Runs one configuration. `base` resolves relative mesh paths.
pub fn run(config: &RunConfig, base: &Path) -> Result<RunOutput> {
    config.validate()?;
    let mesh = config.mesh.build(base, config.seed)?;
    let crack = config.crack.clone().map(CrackPath::new).transpose()?;
    let material = config.material;
    let exact = exact_field(&config.load, material, crack.as_ref());

    let mut history = None;
    let final_crack = match (config.propagation, crack.clone()) {
        (Some(p), Some(initial)) => {
            let (lo, hi) = mesh.bounding_box();
            let probe = mesh.clone();
            let inside = move |q: Point| {
                q[0] > lo[0] && q[0] < hi[0] && q[1] > lo[1] && q[1] < hi[1] && probe.locate(q).is_some()
            };
            let h = propagate(initial, p.increment, p.steps, inside, |c| {
                let disc = Discretization::new(mesh.clone(), material, Some(c.clone()), config.options())?;
                let load = load_case(&config.load, &disc.mesh, exact.as_deref())?;
                let sol = disc.solve(&load, config.cg())?;
                let domain = growth_domain(&disc)?;
                interaction_integral_sifs(&disc, &sol.d, &domain)
            })?;
            let c = h.crack.clone();
            history = Some(h);
            Some(c)
        }
        (_, c) => c,
    };

    let disc = Discretization::new(mesh, material, final_crack, config.options())?;
    let load = load_case(&config.load, &disc.mesh, exact.as_deref())?;
    let sol = disc.solve(&load, config.cg())?;
    let (r_d, r_e) = match &exact {
        Some(f) if history.is_none() => l2_and_energy_norms(&disc, &sol.d, f.as_ref(), NORM_DEGREE)?,
        _ => (f64::NAN, f64::NAN),
    };
    let sifs = match disc.crack {
        Some(_) => {
            Some(interaction_integral_sifs(&disc, &sol.d, &InteractionDomain::scaled(&disc, DEFAULT_DOMAIN_FACTOR)?)?)
        }
        None => None,
    };
    let recovery = match config.method.interpolation() {
        crate::basis::Interpolation::Double => StressRecovery::Direct,
        crate::basis::Interpolation::Linear => StressRecovery::Averaged,
    };
    let stress = recover_nodal_stress(&disc, &sol.d, recovery);
    let displacement = sol.nodal_displacements(disc.mesh.n_nodes());
    let vtk = to_vtk(&disc.mesh, &displacement, Some(&stress.stress))?;
    let record = RunRecord {
        case: config.case.clone(),
        method: config.method.name().into(),
        enrichment: if disc.crack.is_some() { config.enrichment.name().into() } else { "none".into() },
        dofs: disc.n_dofs(),
        h: disc.mesh.mean_size(),
        r_d,
        r_e,
        k1: sifs.map(|k| k.k1),
        k2: sifs.map(|k| k.k2),
        cg_iters: sol.iterations,
        wall_ms: None,
    };
    Ok(RunOutput { record, mesh: disc.mesh, displacement, vtk, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PATCH: &str = r#"{
        "schema": 1,
        "case": "patch",
        "mesh": {"generator": "structured", "nx": 4, "ny": 4, "width": 1.0, "height": 1.0, "distortion": 0.2},
        "method": "dfem",
        "material": {"E": 1000.0, "nu": 0.3, "state": "plane_stress"},
        "load": {"kind": "linear", "u0": [0.0, 0.0], "grad": [[0.001, 0.0], [0.0, -0.0003]]},
        "degenerate_boundary": true
    }"#;

    #[test]
    fn patch_config_runs() {
        let c = RunConfig::from_json(PATCH).unwrap();
        let out = run(&c, Path::new(".")).unwrap();
        assert!(out.record.r_d < 1e-8 && out.record.r_e < 1e-6, "{:?}", out.record);
        assert!(out.vtk.starts_with("# vtk"));
        assert!(out.history.is_none());
        let again = run(&c, Path::new(".")).unwrap();
        assert_eq!(out.vtk, again.vtk);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let bad_schema = PATCH.replace("\"schema\": 1", "\"schema\": 7");
        assert!(matches!(RunConfig::from_json(&bad_schema), Err(Error::Config(_))));
        let enriched = PATCH.replace("\"dfem\"", "\"xdfem\"");
        assert!(RunConfig::from_json(&enriched).is_err());
        let unknown = PATCH.replace("\"case\"", "\"bogus\": 1, \"case\"");
        assert!(RunConfig::from_json(&unknown).is_err());
        let fixed = enriched.replace(
            "\"method\": \"xdfem\",",
            "\"method\": \"xdfem\", \"crack\": [[0,0.5],[0.5,0.5]], \"enrichment\": {\"kind\": \"fixed\", \"radius\": 0.0},",
        );
        assert!(RunConfig::from_json(&fixed).is_err());
    }
}
