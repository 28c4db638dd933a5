//! The benchmark studies: bar, plate with a hole, cantilever, edge crack,
//! inclined crack and crack growth in the holed beam.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytic::{inclined_sifs, AnalyticalField, Bar1d, PlateHole, Timoshenko, Westergaard};
use crate::assembly::{Discretization, Enrichment, LoadCase, Method, ModelOptions, Solution};
use crate::basis::Interpolation;
use crate::enrichment::{CrackPath, TipFrame};
use crate::error::{Error, Result};
use crate::fracture::{
    interaction_integral_sifs, propagate, CrackHistory, InteractionDomain, SifPair, DEFAULT_DOMAIN_FACTOR,
};
use crate::material::{Material, PlaneState};
use crate::mesh::{generate_structured, Mesh, Point};
use crate::meshgen::{centered_square, edge_crack, plate_hole_quarter, slit_square, HoledBeam};
use crate::norms::{convergence_rate, l2_and_energy_norms, NORM_DEGREE};
use crate::onedim::{solve_bar, uniform_grid};
use crate::sparse::CgOptions;

pub const DEFAULT_E: f64 = 1000.0;
pub const DEFAULT_NU: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Paper,
    #[default]
    Desk,
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            _ => Err(Error::Config(format!("unknown scale '{s}'"))),
        }
    }
}

/// One row of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub case: String,
    pub method: String,
    pub enrichment: String,
    pub dofs: usize,
    pub h: f64,
    #[serde(rename = "R_d")]
    pub r_d: f64,
    #[serde(rename = "R_e")]
    pub r_e: f64,
    #[serde(rename = "K_I")]
    pub k1: Option<f64>,
    #[serde(rename = "K_II")]
    pub k2: Option<f64>,
    pub cg_iters: usize,
    pub wall_ms: Option<f64>,
}

impl RunRecord {
    fn new(case: &str, disc: &Discretization, h: f64) -> Self {
        let enrichment = if disc.crack.is_some() { disc.options.enrichment.name() } else { "none" };
        Self {
            case: case.into(),
            method: disc.method().name().into(),
            enrichment: enrichment.into(),
            dofs: disc.n_dofs(),
            h,
            r_d: f64::NAN,
            r_e: f64::NAN,
            k1: None,
            k2: None,
            cg_iters: 0,
            wall_ms: None,
        }
    }
}

/// Convergence slopes of one method over a refinement family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slopes {
    pub method: String,
    pub enrichment: String,
    pub displacement: f64,
    pub energy: f64,
}

/// Slopes per (method, enrichment) group, in first-appearance order.
pub fn slopes(records: &[RunRecord]) -> Result<Vec<Slopes>> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in records {
        let k = (r.method.clone(), r.enrichment.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(m, e)| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.method == m && r.enrichment == e).collect();
            let d: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.r_d)).collect();
            let en: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.r_e)).collect();
            Ok(Slopes { method: m, enrichment: e, displacement: convergence_rate(&d)?, energy: convergence_rate(&en)? })
        })
        .collect()
}

/// Solves, measures errors against `exact` and fills the record.
fn solve_and_measure(
    disc: &Discretization,
    load: &LoadCase,
    exact: &dyn AnalyticalField,
    record: &mut RunRecord,
) -> Result<Solution> {
    let sol = disc.solve(load, CgOptions::default())?;
    let (r_d, r_e) = l2_and_energy_norms(disc, &sol.d, exact, NORM_DEGREE)?;
    record.r_d = r_d;
    record.r_e = r_e;
    record.cg_iters = sol.iterations;
    Ok(sol)
}

fn timed<T>(timings: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    let t0 = Instant::now();
    let v = f()?;
    Ok((v, timings.then(|| t0.elapsed().as_secs_f64() * 1e3)))
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9 * (1.0 + b.abs())
}

// ---------------------------------------------------------------- bar

/// Bar rows for FEM and double interpolation over the element counts.
pub fn bar_study(counts: &[usize]) -> Result<Vec<RunRecord>> {
    let bar = Bar1d::default();
    let mut out = Vec::new();
    for (kind, name) in [(Interpolation::Linear, "fem"), (Interpolation::Double, "dfem")] {
        for &n in counts {
            let s = solve_bar(&bar, &uniform_grid(bar.length, n), kind)?;
            out.push(RunRecord {
                case: "bar1d".into(),
                method: name.into(),
                enrichment: "none".into(),
                dofs: n + 1,
                h: bar.length / n as f64,
                r_d: s.r_d,
                r_e: s.r_e,
                k1: None,
                k2: None,
                cg_iters: 0,
                wall_ms: None,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- plate

pub const PLATE_HALF_WIDTH: f64 = 5.0;
pub const PLATE_HOLE_RADIUS: f64 = 1.0;

pub fn plate_hole_levels(scale: Scale) -> Vec<usize> {
    match scale {
        Scale::Paper => vec![10, 20, 40, 80],
        Scale::Desk => vec![10, 20, 40],
    }
}

/// Quarter plate with exact tractions on the outer edges and symmetry on
/// the cut edges.
pub fn plate_hole_run(n: usize, method: Method, timings: bool) -> Result<RunRecord> {
    let material = Material::new(DEFAULT_E, DEFAULT_NU, PlaneState::PlaneStress)?;
    let exact = PlateHole { a: PLATE_HOLE_RADIUS, sigma: 1.0, material };
    let mesh = plate_hole_quarter(n, PLATE_HOLE_RADIUS, PLATE_HALF_WIDTH)?;
    let ((rec, _), ms) = timed(timings, || {
        let disc = Discretization::new(mesh, material, None, ModelOptions::new(method))?;
        let mut rec = RunRecord::new("plate-hole", &disc, 1.0 / n as f64);
        let mut load = LoadCase::default();
        load.fix_component(&disc.mesh, |p| near(p[0], 0.0), 0, 0.0);
        load.fix_component(&disc.mesh, |p| near(p[1], 0.0), 1, 0.0);
        let l = PLATE_HALF_WIDTH;
        load.add_traction(
            move |m, nrm| (near(m[0], l) && nrm[0] > 0.5) || (near(m[1], l) && nrm[1] > 0.5),
            move |x, nrm| {
                let s = exact.stress(x).unwrap_or([0.0; 3]);
                [s[0] * nrm[0] + s[2] * nrm[1], s[2] * nrm[0] + s[1] * nrm[1]]
            },
        );
        let sol = solve_and_measure(&disc, &load, &exact, &mut rec)?;
        Ok((rec, sol))
    })?;
    Ok(RunRecord { wall_ms: ms, ..rec })
}

pub fn plate_hole_study(scale: Scale, methods: &[Method], timings: bool) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for &m in methods {
        for n in plate_hole_levels(scale) {
            out.push(plate_hole_run(n, m, timings)?);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- cantilever

pub const BEAM_LENGTH: f64 = 48.0;
pub const BEAM_DEPTH: f64 = 12.0;
pub const BEAM_LOAD: f64 = 1000.0;

/// `(nx, ny)` of the cantilever meshes.
pub fn timoshenko_levels(_scale: Scale) -> Vec<(usize, usize)> {
    vec![(10, 3), (20, 6), (40, 12), (80, 24)]
}

pub fn timoshenko_mesh(nx: usize, ny: usize) -> Result<Mesh> {
    Ok(generate_structured(nx, ny, BEAM_LENGTH, BEAM_DEPTH, 0.0, 0)?.translate(0.0, -0.5 * BEAM_DEPTH))
}

/// Cantilever with exact displacements on the left end and exact traction
/// on the right end.
pub fn timoshenko_run(nx: usize, ny: usize, method: Method, timings: bool) -> Result<RunRecord> {
    let material = Material::new(DEFAULT_E, DEFAULT_NU, PlaneState::PlaneStress)?;
    let exact = Timoshenko { p: BEAM_LOAD, l: BEAM_LENGTH, w: BEAM_DEPTH, material };
    let mesh = timoshenko_mesh(nx, ny)?;
    let (rec, ms) = timed(timings, || {
        let disc = Discretization::new(mesh, material, None, ModelOptions::new(method))?;
        let mut rec = RunRecord::new("timoshenko", &disc, BEAM_LENGTH / nx as f64);
        let mut load = LoadCase::default();
        load.fix_nodes(&disc.mesh, |p| near(p[0], 0.0), |p| exact.displacement(p).unwrap_or([0.0; 2]));
        load.add_traction(
            |m, nrm| near(m[0], BEAM_LENGTH) && nrm[0] > 0.5,
            move |x, _| {
                let s = exact.stress(x).unwrap_or([0.0; 3]);
                [s[0], s[2]]
            },
        );
        solve_and_measure(&disc, &load, &exact, &mut rec)?;
        Ok(rec)
    })?;
    Ok(RunRecord { wall_ms: ms, ..rec })
}

pub fn timoshenko_study(scale: Scale, methods: &[Method], timings: bool) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for &m in methods {
        for (nx, ny) in timoshenko_levels(scale) {
            out.push(timoshenko_run(nx, ny, m, timings)?);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- edge crack

pub const CRACK_BOX_HALF: f64 = 5.0;
/// Tip enrichment radius of the fixed-area scheme, a fifth of the modelled
/// crack length.
pub const FIXED_AREA_RADIUS: f64 = 1.0;
/// Jitter of the distorted crack meshes, as a fraction of the cell size.
pub const CRACK_DISTORTION: f64 = 0.2;

/// Cell counts giving 334, 4726, 7834 and 17134 enriched DOFs.
pub fn griffith_levels(_scale: Scale) -> Vec<usize> {
    vec![11, 47, 61, 91]
}

/// Boundary regime of the edge-crack study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrackModel {
    /// Crack cut into the mesh with doubled nodes.
    Explicit,
    /// Crack carried by enrichment.
    Enriched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GriffithSetup {
    pub n: usize,
    pub method: Method,
    pub enrichment: Enrichment,
    pub distortion: f64,
    pub seed: u64,
    pub sifs: SifPair,
}

impl GriffithSetup {
    /// Mode I with `K_I = sqrt(pi)`, the field of a unit-stress crack of unit
    /// half length.
    pub fn mode_one(n: usize, method: Method) -> Self {
        Self {
            n,
            method,
            enrichment: Enrichment::Topological,
            distortion: 0.0,
            seed: 1,
            sifs: SifPair::new(std::f64::consts::PI.sqrt(), 0.0),
        }
    }
}

fn crack_material() -> Result<Material> {
    Material::new(DEFAULT_E, DEFAULT_NU, PlaneState::PlaneStrain)
}

fn on_box(p: Point, half: f64) -> bool {
    near(p[0].abs(), half) || near(p[1].abs(), half)
}

/// Enriched model of a crack in the centered box with exact near-tip
/// displacements on the whole outer boundary. Returns the discretisation
/// and solution too, for SIF extraction and output.
pub fn crack_box_run(
    case: &str,
    mesh: Mesh,
    crack: CrackPath,
    sifs: SifPair,
    options: ModelOptions,
    h: f64,
    timings: bool,
) -> Result<(RunRecord, Discretization, Solution)> {
    let material = crack_material()?;
    let exact = Westergaard::new(sifs, material, crack.frame());
    let t0 = Instant::now();
    let disc = Discretization::new(mesh, material, Some(crack), options)?;
    let mut rec = RunRecord::new(case, &disc, h);
    let mut load = LoadCase::default();
    let half = CRACK_BOX_HALF;
    load.fix_nodes(&disc.mesh, |p| on_box(p, half), |p| exact.displacement(p).unwrap_or([0.0; 2]));
    let sol = solve_and_measure(&disc, &load, &exact, &mut rec)?;
    let domain = InteractionDomain::scaled(&disc, DEFAULT_DOMAIN_FACTOR)?;
    let k = interaction_integral_sifs(&disc, &sol.d, &domain)?;
    rec.k1 = Some(k.k1);
    rec.k2 = Some(k.k2);
    rec.wall_ms = timings.then(|| t0.elapsed().as_secs_f64() * 1e3);
    Ok((rec, disc, sol))
}

pub fn griffith_run(setup: &GriffithSetup, timings: bool) -> Result<RunRecord> {
    let mesh = centered_square(setup.n, CRACK_BOX_HALF, setup.distortion, setup.seed)?;
    let crack = edge_crack(setup.n, CRACK_BOX_HALF)?;
    let options = ModelOptions::new(setup.method).with_enrichment(setup.enrichment);
    let case = if setup.distortion > 0.0 { "griffith-distorted" } else { "griffith" };
    let h = 2.0 * CRACK_BOX_HALF / setup.n as f64;
    let (mut rec, _, _) = crack_box_run(case, mesh, crack, setup.sifs, options, h, timings)?;
    let k0 = setup.sifs.k1.hypot(setup.sifs.k2);
    rec.k1 = rec.k1.map(|k| k / k0);
    rec.k2 = rec.k2.map(|k| k / k0);
    Ok(rec)
}

/// Edge crack cut into the mesh, solved without enrichment. `n` must be
/// even so the slit runs along a node row.
pub fn griffith_slit_run(n: usize, method: Method, sifs: SifPair, timings: bool) -> Result<RunRecord> {
    if method.is_enriched() {
        return Err(Error::InvalidArgument("an explicit crack needs an unenriched method".into()));
    }
    let slit = slit_square(n, CRACK_BOX_HALF)?;
    let material = crack_material()?;
    let exact = Westergaard::new(sifs, material, TipFrame::new([0.0, 0.0], 0.0));
    let h = 2.0 * CRACK_BOX_HALF / n as f64;
    let (rec, ms) = timed(timings, || {
        let mut opts = ModelOptions::new(method);
        // the crack faces are boundary: keep nodal gradients on one side
        opts.degenerate_boundary = true;
        let disc = Discretization::new(slit.mesh.clone(), material, None, opts)?;
        let mut rec = RunRecord::new("griffith-explicit", &disc, h);
        rec.enrichment = "explicit".into();
        let mut load = LoadCase::default();
        for (node, &p) in disc.mesh.nodes.iter().enumerate() {
            if !on_box(p, CRACK_BOX_HALF) {
                continue;
            }
            // lower-face copies take the field from below the crack
            let q = if slit.is_lower_face(node) { [p[0], -1e-12] } else { p };
            let u = exact.displacement(q)?;
            for (c, v) in u.into_iter().enumerate() {
                load.dirichlet.push(crate::assembly::DirichletEntry { node, component: c, value: v });
            }
        }
        solve_and_measure(&disc, &load, &exact, &mut rec)?;
        Ok(rec)
    })?;
    Ok(RunRecord { wall_ms: ms, ..rec })
}

/// Table of the edge crack on structured and distorted meshes.
pub fn griffith_study(
    scale: Scale,
    methods: &[Method],
    enrichments: &[Enrichment],
    distorted: bool,
    timings: bool,
) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    let distortions: &[f64] = if distorted { &[0.0, CRACK_DISTORTION] } else { &[0.0] };
    for &dist in distortions {
        for &en in enrichments {
            for &m in methods {
                for n in griffith_levels(scale) {
                    let mut s = GriffithSetup::mode_one(n, m);
                    s.enrichment = en;
                    s.distortion = dist;
                    out.push(griffith_run(&s, timings)?);
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- inclined crack

pub const INCLINED_HALF_LENGTH: f64 = 1000.0;
pub const INCLINED_CELLS: usize = 47;

/// The `count` angles `k pi / (2 (count - 1))`.
pub fn inclined_angles(count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![0.0];
    }
    (0..count).map(|k| 0.5 * std::f64::consts::PI * k as f64 / (count - 1) as f64).collect()
}

/// Tip of an inclined crack inside the box, on a line at `beta`, with exact
/// mixed-mode displacements on the box boundary. SIFs are normalised by
/// `sigma sqrt(pi a)`.
pub fn inclined_run(beta: f64, n: usize, method: Method, timings: bool) -> Result<RunRecord> {
    let mesh = centered_square(n, CRACK_BOX_HALF, 0.0, 0)?;
    let h = 2.0 * CRACK_BOX_HALF / n as f64;
    let tip = [0.25 * h, 0.0];
    let (s, c) = beta.sin_cos();
    let reach = 4.0 * CRACK_BOX_HALF;
    let crack = CrackPath::new(vec![[tip[0] - reach * c, tip[1] - reach * s], tip])?;
    let sifs = inclined_sifs(1.0, INCLINED_HALF_LENGTH, beta);
    let (mut rec, _, _) =
        crack_box_run("inclined", mesh, crack, sifs, ModelOptions::new(method), h, timings).or_else(|e| match e {
            // the unloaded crack at beta = pi/2 has no norm to compare against
            Error::ZeroExactNorm => zero_load_run(beta, n, method, h),
            e => Err(e),
        })?;
    let k0 = (std::f64::consts::PI * INCLINED_HALF_LENGTH).sqrt();
    rec.k1 = rec.k1.map(|k| k / k0);
    rec.k2 = rec.k2.map(|k| k / k0);
    rec.h = beta;
    Ok(rec)
}

fn zero_load_run(beta: f64, n: usize, method: Method, h: f64) -> Result<(RunRecord, Discretization, Solution)> {
    let mesh = centered_square(n, CRACK_BOX_HALF, 0.0, 0)?;
    let tip = [0.25 * h, 0.0];
    let (s, c) = beta.sin_cos();
    let reach = 4.0 * CRACK_BOX_HALF;
    let crack = CrackPath::new(vec![[tip[0] - reach * c, tip[1] - reach * s], tip])?;
    let disc = Discretization::new(mesh, crack_material()?, Some(crack), ModelOptions::new(method))?;
    let mut rec = RunRecord::new("inclined", &disc, h);
    let mut load = LoadCase::default();
    load.fix_nodes(&disc.mesh, |p| on_box(p, CRACK_BOX_HALF), |_| [0.0; 2]);
    let sol = disc.solve(&load, CgOptions::default())?;
    let domain = InteractionDomain::scaled(&disc, DEFAULT_DOMAIN_FACTOR)?;
    let k = interaction_integral_sifs(&disc, &sol.d, &domain)?;
    rec.r_d = 0.0;
    rec.r_e = 0.0;
    rec.k1 = Some(k.k1);
    rec.k2 = Some(k.k2);
    rec.cg_iters = sol.iterations;
    Ok((rec, disc, sol))
}

pub fn inclined_study(angles: &[f64], methods: &[Method], timings: bool) -> Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    for &m in methods {
        for &b in angles {
            out.push(inclined_run(b, INCLINED_CELLS, m, timings)?);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- crack growth

/// Crack growth in the three-point-bend beam with three holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSetup {
    /// Crack offset left of mid-span.
    pub offset: f64,
    pub crack_length: f64,
    pub increment: f64,
    pub steps: usize,
    /// Nominal node spacing of the mesh.
    pub spacing: f64,
    pub method: Method,
    pub nu: f64,
}

/// Node spacing that gives roughly the node count of the reference mesh.
pub const FULL_SPACING: f64 = 0.0813;

impl GrowthSetup {
    /// Offset, initial length and increment of the three reference cases.
    pub fn case(index: usize, scale: Scale, method: Method) -> Result<Self> {
        let (offset, crack_length, increment, steps) = match index {
            1 => (5.0, 1.5, 0.1, 50),
            2 => (6.0, 1.0, 0.06, 69),
            3 => (6.0, 2.5, 0.1, 45),
            _ => return Err(Error::Config(format!("no beam case {index}"))),
        };
        let (spacing, increment, steps) = match scale {
            Scale::Paper => (FULL_SPACING, increment, steps),
            // a quarter of the nodes doubles the spacing
            Scale::Desk => (2.0 * FULL_SPACING, 2.0 * increment, 20),
        };
        Ok(Self { offset, crack_length, increment, steps, spacing, method, nu: 0.37 })
    }
}

pub fn holed_beam_growth(setup: &GrowthSetup) -> Result<CrackHistory> {
    let beam = HoledBeam::new(setup.offset, setup.crack_length);
    let mesh = beam.mesh(setup.spacing)?;
    let material = Material::new(DEFAULT_E, setup.nu, PlaneState::PlaneStrain)?;
    let pin = nearest_node(&mesh, beam.pin);
    let roller = nearest_node(&mesh, beam.roller);
    let loaded = nearest_node(&mesh, beam.load);
    let method = setup.method;
    let inside = |p: Point| beam.contains(p);
    propagate(beam.crack()?, setup.increment, setup.steps, inside, |crack| {
        let disc = Discretization::new(mesh.clone(), material, Some(crack.clone()), ModelOptions::new(method))?;
        let mut load = LoadCase::default();
        for (node, c) in [(pin, 0), (pin, 1), (roller, 1)] {
            load.dirichlet.push(crate::assembly::DirichletEntry { node, component: c, value: 0.0 });
        }
        load.point_loads.push((loaded, [0.0, -1.0]));
        let sol = disc.solve(&load, CgOptions::default())?;
        let domain = growth_domain(&disc)?;
        interaction_integral_sifs(&disc, &sol.d, &domain)
    })
}

/// Near holes and edges the default domain may reach a free boundary; the
/// radius then shrinks as long as it stays above the tip element size.
pub(crate) fn growth_domain(disc: &Discretization) -> Result<InteractionDomain> {
    let mut last = None;
    for f in [DEFAULT_DOMAIN_FACTOR, 2.0, 1.5, 1.2] {
        match InteractionDomain::scaled(disc, f) {
            Ok(d) => return Ok(d),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::InteractionDomain("no admissible radius".into())))
}

fn nearest_node(mesh: &Mesh, p: Point) -> usize {
    (0..mesh.n_nodes())
        .min_by(|&a, &b| {
            let da = (mesh.nodes[a][0] - p[0]).hypot(mesh.nodes[a][1] - p[1]);
            let db = (mesh.nodes[b][0] - p[0]).hypot(mesh.nodes[b][1] - p[1]);
            da.total_cmp(&db)
        })
        .unwrap_or(0)
}
