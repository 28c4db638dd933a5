//! Stress intensity factors, the maximum hoop stress direction and
//! quasi-static crack growth.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analytic::Westergaard;
use crate::assembly::{Discretization, Funcs};
use crate::enrichment::CrackPath;
use crate::error::{Error, Result};
use crate::mesh::Point;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SifPair {
    #[serde(rename = "K_I")]
    pub k1: f64,
    #[serde(rename = "K_II")]
    pub k2: f64,
}

impl SifPair {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self { k1, k2 }
    }

    /// Divides both factors by `sigma sqrt(pi a)`.
    pub fn normalized(&self, sigma: f64, a: f64) -> SifPair {
        let k0 = sigma * (PI * a).sqrt();
        SifPair { k1: self.k1 / k0, k2: self.k2 / k0 }
    }

    pub fn scaled(&self, s: f64) -> SifPair {
        SifPair { k1: s * self.k1, k2: s * self.k2 }
    }
}

/// Plateau weight: one at nodes within `radius` of the tip, zero outside,
/// linear inside elements.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionDomain {
    pub radius: f64,
    pub q: Vec<f64>,
    /// Elements with a non-constant weight, where the integrand lives.
    pub elements: Vec<usize>,
}

/// Characteristic size `sqrt(2 A)` of the element holding the tip.
pub fn tip_element_size(disc: &Discretization) -> Result<f64> {
    let crack = disc.crack.as_ref().ok_or_else(|| Error::InvalidCrack("no crack in the model".into()))?;
    let e = disc
        .mesh
        .locate(crack.tip())
        .ok_or_else(|| Error::InteractionDomain("crack tip is outside the mesh".into()))?;
    Ok((2.0 * disc.mesh.area(e)).sqrt())
}

impl InteractionDomain {
    pub fn new(disc: &Discretization, radius: f64) -> Result<Self> {
        let crack = disc.crack.as_ref().ok_or_else(|| Error::InvalidCrack("no crack in the model".into()))?;
        let tip = crack.tip();
        let size = tip_element_size(disc)?;
        if !(radius > size) {
            return Err(Error::InteractionDomain(format!("radius {radius} not above the tip element size {size}")));
        }
        let mesh = &disc.mesh;
        let q: Vec<f64> =
            mesh.nodes.iter().map(|p| if (p[0] - tip[0]).hypot(p[1] - tip[1]) <= radius { 1.0 } else { 0.0 }).collect();
        let boundary = mesh.boundary_nodes();
        if (0..mesh.n_nodes()).any(|n| boundary[n] && q[n] != 0.0) {
            return Err(Error::InteractionDomain(format!("radius {radius} reaches the outer boundary")));
        }
        let elements = (0..mesh.n_elements())
            .filter(|&e| {
                let t = mesh.triangles[e];
                let s: f64 = t.iter().map(|&n| q[n]).sum();
                s > 0.0 && s < 3.0
            })
            .collect();
        Ok(Self { radius, q, elements })
    }

    /// Radius of `factor` tip element sizes.
    pub fn scaled(disc: &Discretization, factor: f64) -> Result<Self> {
        Self::new(disc, factor * tip_element_size(disc)?)
    }
}

/// Default interaction radius in tip element sizes.
pub const DEFAULT_DOMAIN_FACTOR: f64 = 3.0;

/// Both SIFs from the domain form of the interaction integral.
pub fn interaction_integral_sifs(disc: &Discretization, d: &[f64], domain: &InteractionDomain) -> Result<SifPair> {
    let frame = disc.frame.ok_or_else(|| Error::InvalidCrack("no crack in the model".into()))?;
    let mat = disc.material;
    let aux1 = Westergaard::new(SifPair::new(1.0, 0.0), mat, frame);
    let aux2 = Westergaard::new(SifPair::new(0.0, 1.0), mat, frame);
    let (c, s) = (frame.angle.cos(), frame.angle.sin());
    let mut integral = [0.0; 2];
    let mut funcs = Funcs::default();
    for &e in &domain.elements {
        let t = disc.mesh.triangles[e];
        let g = crate::basis::AreaCoords::new(disc.mesh.vertices(e), disc.mesh.centroid(e)).gradients();
        let mut gq = [0.0; 2];
        for k in 0..3 {
            gq[0] += domain.q[t[k]] * g[k][0];
            gq[1] += domain.q[t[k]] * g[k][1];
        }
        let gq = frame.vector_to_local(gq);
        for qp in disc.integration_points(e, Some(disc.options.quadrature.tip), true) {
            disc.eval_funcs(e, qp.x, qp.h, &mut funcs);
            let gg = funcs.displacement_gradient(d);
            // R G R^T with R the global-to-local rotation
            let r = [[c, s], [-s, c]];
            let mut gl = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let mut v = 0.0;
                    for k in 0..2 {
                        for l in 0..2 {
                            v += r[i][k] * gg[k][l] * r[j][l];
                        }
                    }
                    gl[i][j] = v;
                }
            }
            let eps = [gl[0][0], gl[1][1], gl[0][1] + gl[1][0]];
            let sig = mat.stress(eps);
            let (rr, th) = frame.polar(qp.x);
            for (m, aux) in [&aux1, &aux2].iter().enumerate() {
                let a = aux.local(rr, th)?;
                let aeps = [a.grad[0][0], a.grad[1][1], a.grad[0][1] + a.grad[1][0]];
                let w = sig[0] * aeps[0] + sig[1] * aeps[1] + sig[2] * aeps[2];
                let st = [[sig[0], sig[2]], [sig[2], sig[1]]];
                let sa = [[a.stress[0], a.stress[2]], [a.stress[2], a.stress[1]]];
                let mut v = 0.0;
                for j in 0..2 {
                    let mut term = 0.0;
                    for i in 0..2 {
                        term += st[i][j] * a.grad[i][0] + sa[i][j] * gl[i][0];
                    }
                    if j == 0 {
                        term -= w;
                    }
                    v += term * gq[j];
                }
                integral[m] += qp.w * v;
            }
        }
    }
    let es = mat.e_star();
    Ok(SifPair { k1: 0.5 * es * integral[0], k2: 0.5 * es * integral[1] })
}

/// Kink angle of maximum hoop stress, in the tip frame, in `(-pi, pi)`.
pub fn hoop_stress_angle(sifs: SifPair) -> Result<f64> {
    let SifPair { k1, k2 } = sifs;
    if !(k1.is_finite() && k2.is_finite()) || (k1 == 0.0 && k2 == 0.0) {
        return Err(Error::NoPropagationDirection);
    }
    if k2 == 0.0 {
        // pure opening; a closing crack has no preferred kink either
        return Ok(0.0);
    }
    let root = (k1 * k1 + 8.0 * k2 * k2).sqrt();
    // tan(theta/2) = (K_I - root) / (4 K_II), rationalised for K_I > 0 where
    // the numerator would cancel
    let t = if k1 > 0.0 { -2.0 * k2 / (k1 + root) } else { (k1 - root) / (4.0 * k2) };
    Ok(2.0 * t.atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub tip: Point,
    pub sifs: SifPair,
    pub theta_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StopStatus {
    Completed,
    LeftDomain { step: usize },
    Failed { step: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrackHistory {
    pub crack: CrackPath,
    pub steps: Vec<StepRecord>,
    pub status: StopStatus,
}

impl CrackHistory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,tip_x,tip_y,K_I,K_II,theta_c\n");
        for r in &self.steps {
            let _ =
                writeln!(s, "{},{:?},{:?},{:?},{:?},{:?}", r.step, r.tip[0], r.tip[1], r.sifs.k1, r.sifs.k2, r.theta_c);
        }
        s
    }
}

/// Grows `initial` by `steps` straight increments. Each step evaluates the
/// SIFs of the current crack, turns by the hoop stress angle and appends a
/// segment of length `increment`. Stops early, with a status, when the new
/// tip leaves the body or a step fails.
pub fn propagate(
    initial: CrackPath,
    increment: f64,
    steps: usize,
    inside: impl Fn(Point) -> bool,
    mut sifs_for: impl FnMut(&CrackPath) -> Result<SifPair>,
) -> Result<CrackHistory> {
    if !(increment > 0.0) {
        return Err(Error::InvalidArgument("crack increment must be positive".into()));
    }
    let mut crack = initial;
    let mut records = Vec::new();
    for step in 0..steps {
        let sifs = match sifs_for(&crack) {
            Ok(s) => s,
            Err(e) => {
                return Ok(CrackHistory {
                    crack,
                    steps: records,
                    status: StopStatus::Failed { step, reason: e.to_string() },
                })
            }
        };
        let theta = match hoop_stress_angle(sifs) {
            Ok(t) => t,
            Err(e) => {
                return Ok(CrackHistory {
                    crack,
                    steps: records,
                    status: StopStatus::Failed { step, reason: e.to_string() },
                })
            }
        };
        records.push(StepRecord { step, tip: crack.tip(), sifs, theta_c: theta });
        let angle = crack.tip_angle() + theta;
        let tip = crack.tip();
        let next = [tip[0] + increment * angle.cos(), tip[1] + increment * angle.sin()];
        if !inside(next) {
            return Ok(CrackHistory { crack, steps: records, status: StopStatus::LeftDomain { step } });
        }
        if let Err(e) = crack.extend(angle, increment) {
            return Ok(CrackHistory {
                crack,
                steps: records,
                status: StopStatus::Failed { step, reason: e.to_string() },
            });
        }
    }
    Ok(CrackHistory { crack, steps: records, status: StopStatus::Completed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hoop_angles() {
        let deg = |r: f64| r.to_degrees();
        assert_eq!(hoop_stress_angle(SifPair::new(2.0, 0.0)).unwrap(), 0.0);
        let t = deg(hoop_stress_angle(SifPair::new(0.0, 1.0)).unwrap());
        assert!((t + (1.0f64 / 3.0).acos().to_degrees()).abs() < 1e-9);
        assert!((t + 70.528779).abs() < 1e-5);
        let t = deg(hoop_stress_angle(SifPair::new(0.0, -1.0)).unwrap());
        assert!((t - 70.528779).abs() < 1e-5);
        let t = deg(hoop_stress_angle(SifPair::new(1.0, 1.0)).unwrap());
        assert!((t - deg(2.0 * (-0.5f64).atan())).abs() < 1e-9);
        assert!(matches!(hoop_stress_angle(SifPair::new(0.0, 0.0)), Err(Error::NoPropagationDirection)));
    }

    /// The kink angle maximises the hoop stress
    /// `cos(t/2) [K_I cos^2(t/2) - 1.5 K_II sin t]`.
    #[test]
    fn hoop_angle_maximises_hoop_stress() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let k1: f64 = rng.gen_range(-0.2..2.0);
            let k2: f64 = rng.gen_range(-2.0..2.0);
            let t = hoop_stress_angle(SifPair::new(k1, k2)).unwrap();
            assert!(t > -PI && t < PI);
            if k2 != 0.0 {
                assert_eq!(t.signum(), -k2.signum());
            }
            let hoop = |t: f64| (0.5 * t).cos() * (k1 * (0.5 * t).cos().powi(2) - 1.5 * k2 * t.sin());
            // stationary and no better sample on a fine grid
            let best = (0..20000)
                .map(|i| -PI + 2.0 * PI * (i as f64 + 0.5) / 20000.0)
                .fold(f64::NEG_INFINITY, |m, x| m.max(hoop(x)));
            assert!(hoop(t) >= best - 1e-6 * best.abs().max(1.0), "k1={k1} k2={k2}");
            for lam in [1e-3, 0.5, 7.0, 1e4] {
                let ts = hoop_stress_angle(SifPair::new(lam * k1, lam * k2)).unwrap();
                assert!((ts - t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn propagation_stops_cleanly() {
        let c = CrackPath::new(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let h = propagate(c.clone(), 0.5, 10, |p| p[0] < 2.2, |_| Ok(SifPair::new(1.0, 0.0))).unwrap();
        assert_eq!(h.status, StopStatus::LeftDomain { step: 2 });
        assert_eq!(h.crack.vertices().len(), 4);
        let h = propagate(c.clone(), 0.5, 3, |_| true, |_| Ok(SifPair::new(0.0, 0.0))).unwrap();
        assert!(matches!(h.status, StopStatus::Failed { step: 0, .. }));
        assert!(propagate(c, 0.0, 3, |_| true, |_| Ok(SifPair::new(1.0, 0.0))).is_err());
    }

    #[test]
    fn history_csv() {
        let c = CrackPath::new(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let h = propagate(c, 0.25, 2, |_| true, |_| Ok(SifPair::new(1.0, 0.5))).unwrap();
        let csv = h.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,tip_x,tip_y,K_I,K_II,theta_c");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,1.0,0.0,1.0,0.5,"));
    }
}
