//! Browser bindings. Every entry point returns a JSON string so the page
//! needs nothing beyond `JSON.parse`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dfemlab::assembly::Method;
use dfemlab::config::{self, RunConfig, RunOutput};
use dfemlab::fracture::{hoop_stress_angle, SifPair};
use dfemlab::Error;

#[derive(Serialize)]
pub struct Frame {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub displacement: Vec<[f64; 2]>,
    pub crack: Option<Vec<[f64; 2]>>,
    pub dofs: usize,
    pub r_d: f64,
    pub r_e: f64,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub cg_iters: usize,
}

impl Frame {
    fn new(out: RunOutput, crack: Option<Vec<[f64; 2]>>) -> Self {
        Self {
            nodes: out.mesh.nodes,
            triangles: out.mesh.triangles,
            displacement: out.displacement,
            crack,
            dofs: out.record.dofs,
            r_d: out.record.r_d,
            r_e: out.record.r_e,
            k1: out.record.k1,
            k2: out.record.k2,
            cg_iters: out.record.cg_iters,
        }
    }
}

fn solve(json: &str) -> Result<Frame, Error> {
    let cfg = RunConfig::from_json(json)?;
    let out = config::run(&cfg, std::path::Path::new("."))?;
    Ok(Frame::new(out, cfg.crack))
}

/// Tip-loaded cantilever, `nx x ny` cells, with `fem` or `dfem`.
pub fn cantilever(method: &str, nx: usize, ny: usize) -> Result<Frame, Error> {
    let m: Method = method.parse()?;
    if m.is_enriched() || nx == 0 || ny == 0 || nx * ny > 4000 {
        return Err(Error::InvalidArgument("cantilever needs fem or dfem and at most 4000 cells".into()));
    }
    solve(&format!(
        r#"{{"schema":1,"mesh":{{"generator":"structured","nx":{nx},"ny":{ny},"width":48.0,"height":12.0,"origin":[0.0,-6.0]}},
        "method":"{}","material":{{"E":1000.0,"nu":0.3,"state":"plane_stress"}},
        "load":{{"kind":"cantilever","p":1000.0,"length":48.0,"depth":12.0}}}}"#,
        m.name()
    ))
}

/// Edge crack in `[-5, 5]^2` with near-tip displacements on the boundary.
pub fn edge_crack(method: &str, n: usize, k1: f64, k2: f64) -> Result<Frame, Error> {
    let m: Method = method.parse()?;
    if !m.is_enriched() || n.is_multiple_of(2) || !(5..=61).contains(&n) {
        return Err(Error::InvalidArgument("edge crack needs xfem or xdfem and an odd n in 5..=61".into()));
    }
    let tip = 10.0 / n as f64 / 4.0;
    solve(&format!(
        r#"{{"schema":1,"mesh":{{"generator":"centered_square","n":{n},"half":5.0}},
        "method":"{}","crack":[[-5.0,0.0],[{tip:?},0.0]],
        "material":{{"E":1000.0,"nu":0.3,"state":"plane_strain"}},
        "load":{{"kind":"crack_tip","K_I":{k1:?},"K_II":{k2:?}}}}}"#,
        m.name()
    ))
}

/// Kink angle of the maximum hoop stress criterion, in degrees.
pub fn kink_angle(k1: f64, k2: f64) -> Result<f64, Error> {
    Ok(hoop_stress_angle(SifPair::new(k1, k2))?.to_degrees())
}

fn to_js<T: Serialize>(r: Result<T, Error>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())))
}

#[wasm_bindgen(js_name = solveCantilever)]
pub fn solve_cantilever(method: &str, nx: usize, ny: usize) -> Result<String, JsValue> {
    to_js(cantilever(method, nx, ny))
}

#[wasm_bindgen(js_name = solveEdgeCrack)]
pub fn solve_edge_crack(method: &str, n: usize, k1: f64, k2: f64) -> Result<String, JsValue> {
    to_js(edge_crack(method, n, k1, k2))
}

#[wasm_bindgen(js_name = kinkAngle)]
pub fn kink_angle_js(k1: f64, k2: f64) -> Result<f64, JsValue> {
    kink_angle(k1, k2).map_err(|e| JsValue::from_str(&e.to_string()))
}
