//! Error norms, convergence rates and nodal stress recovery.

use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticalField;
use crate::assembly::{map_range, Discretization, Funcs};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, NodePatch};

/// Relative errors of one run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormReport {
    pub r_d: f64,
    pub r_e: f64,
    pub dofs: usize,
    pub cg_iterations: usize,
}

/// Quadrature degree for error integrals.
pub const NORM_DEGREE: usize = 8;

/// Relative L2 displacement error and relative energy-norm error of `d`
/// against `exact`, integrated sub-cell-wise on cut elements.
pub fn l2_and_energy_norms(
    disc: &Discretization,
    d: &[f64],
    exact: &dyn AnalyticalField,
    degree: usize,
) -> Result<(f64, f64)> {
    let mat = disc.material;
    let per_element: Vec<Result<[f64; 4]>> = map_range(0..disc.mesh.n_elements(), |e| {
        let mut funcs = Funcs::default();
        let mut acc = [0.0; 4];
        for q in disc.integration_points(e, Some(degree), true) {
            let (uh, eh) = disc.field_at(e, q.x, q.h, d, &mut funcs);
            let u = exact.displacement(q.x)?;
            let s = exact.stress(q.x)?;
            let eps = mat.strain(s);
            let sh = mat.stress(eh);
            let du = [uh[0] - u[0], uh[1] - u[1]];
            let ds = [sh[0] - s[0], sh[1] - s[1], sh[2] - s[2]];
            let de = [eh[0] - eps[0], eh[1] - eps[1], eh[2] - eps[2]];
            acc[0] += q.w * (du[0] * du[0] + du[1] * du[1]);
            acc[1] += q.w * (u[0] * u[0] + u[1] * u[1]);
            acc[2] += q.w * (ds[0] * de[0] + ds[1] * de[1] + ds[2] * de[2]);
            acc[3] += q.w * (s[0] * eps[0] + s[1] * eps[1] + s[2] * eps[2]);
        }
        Ok(acc)
    });
    let mut tot = [0.0; 4];
    for a in per_element {
        let a = a?;
        for k in 0..4 {
            tot[k] += a[k];
        }
    }
    if tot[1] <= 0.0 || tot[3] <= 0.0 {
        return Err(Error::ZeroExactNorm);
    }
    Ok(((tot[0] / tot[1]).sqrt(), (tot[2] / tot[3]).sqrt()))
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_rate(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("a rate needs at least two points".into()));
    }
    if series.iter().any(|&(h, e)| !(h > 0.0) || !(e > 0.0)) {
        return Err(Error::InvalidArgument("rates need positive sizes and errors".into()));
    }
    let n = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Convergence rate against `1/sqrt(dofs)`, the size measure for
/// unstructured families.
pub fn convergence_rate_dofs(series: &[(usize, f64)]) -> Result<f64> {
    let s: Vec<(f64, f64)> = series.iter().map(|&(n, e)| (1.0 / (n as f64).sqrt(), e)).collect();
    convergence_rate(&s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StressRecovery {
    /// Evaluate the approximation at the node itself.
    Direct,
    /// Area-weighted average of element mean stresses.
    Averaged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalStress {
    pub stress: Vec<[f64; 3]>,
    /// Nodes where `Direct` fell back to averaging.
    pub averaged: Vec<bool>,
}

/// Area-weighted average of per-element values at every node.
pub fn average_to_nodes(mesh: &Mesh, patches: &[NodePatch], element_values: &[[f64; 3]]) -> Vec<[f64; 3]> {
    (0..mesh.n_nodes())
        .map(|n| {
            let mut s = [0.0; 3];
            for (&e, &w) in patches[n].elements.iter().zip(&patches[n].weights) {
                for k in 0..3 {
                    s[k] += w * element_values[e][k];
                }
            }
            s
        })
        .collect()
}

/// Mean stress of every element.
pub fn element_mean_stress(disc: &Discretization, d: &[f64]) -> Vec<[f64; 3]> {
    let mut funcs = Funcs::default();
    (0..disc.mesh.n_elements())
        .map(|e| {
            let mut s = [0.0; 3];
            let mut area = 0.0;
            for q in disc.integration_points(e, None, true) {
                let (_, eps) = disc.field_at(e, q.x, q.h, d, &mut funcs);
                let st = disc.material.stress(eps);
                for k in 0..3 {
                    s[k] += q.w * st[k];
                }
                area += q.w;
            }
            s.map(|v| v / area)
        })
        .collect()
}

pub fn recover_nodal_stress(disc: &Discretization, d: &[f64], method: StressRecovery) -> NodalStress {
    let mesh = &disc.mesh;
    let averaged_values = average_to_nodes(mesh, &disc.patches, &element_mean_stress(disc, d));
    match method {
        StressRecovery::Averaged => NodalStress { stress: averaged_values, averaged: vec![true; mesh.n_nodes()] },
        StressRecovery::Direct => {
            let mut funcs = Funcs::default();
            let mut stress = Vec::with_capacity(mesh.n_nodes());
            let mut averaged = Vec::with_capacity(mesh.n_nodes());
            let linear = disc.method().interpolation() == crate::basis::Interpolation::Linear;
            for n in 0..mesh.n_nodes() {
                let patch = &disc.patches[n];
                if linear || disc.degeneration.is_degenerated(n) || patch.elements.is_empty() {
                    stress.push(averaged_values[n]);
                    averaged.push(true);
                    continue;
                }
                let e = patch.elements[0];
                let p = mesh.nodes[n];
                let h = disc.heaviside_at(e, p);
                let (_, eps) = disc.field_at(e, p, h, d, &mut funcs);
                stress.push(disc.material.stress(eps));
                averaged.push(false);
            }
            NodalStress { stress, averaged }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::LinearField;
    use crate::assembly::{Method, ModelOptions};
    use crate::material::{Material, PlaneState};
    use crate::mesh::{build_patches, generate_structured};

    #[test]
    fn rates() {
        let s: Vec<(f64, f64)> = [0.5, 0.25, 0.125, 0.0625].iter().map(|&h: &f64| (h, h * h)).collect();
        assert!((convergence_rate(&s).unwrap() - 2.0).abs() < 1e-6);
        let s: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&h: &f64| (h, 3.0 * h.powf(1.5))).collect();
        assert!((convergence_rate(&s).unwrap() - 1.5).abs() < 1e-6);
        assert!(convergence_rate(&[(1.0, 0.0), (0.5, 1.0)]).is_err());
    }

    #[test]
    fn interpolated_linear_field_has_zero_error() {
        let mesh = generate_structured(4, 4, 1.0, 1.0, 0.25, 3).unwrap();
        let m = Material::new(1000.0, 0.3, PlaneState::PlaneStress).unwrap();
        let f = LinearField { u0: [0.1, -0.2], grad: [[1e-3, 2e-3], [-5e-4, 3e-3]], material: m };
        for method in [Method::Fem, Method::Dfem] {
            let disc = Discretization::new(mesh.clone(), m, None, ModelOptions::new(method)).unwrap();
            let mut d = vec![0.0; disc.n_dofs()];
            for (n, &p) in disc.mesh.nodes.iter().enumerate() {
                let u = f.displacement(p).unwrap();
                d[2 * n] = u[0];
                d[2 * n + 1] = u[1];
            }
            let (rd, re) = l2_and_energy_norms(&disc, &d, &f, NORM_DEGREE).unwrap();
            assert!(rd < 1e-9 && re < 1e-9, "{method:?}: {rd} {re}");
            for rec in [StressRecovery::Direct, StressRecovery::Averaged] {
                let ns = recover_nodal_stress(&disc, &d, rec);
                let exact = f.stress([0.0, 0.0]).unwrap();
                for s in ns.stress {
                    for k in 0..3 {
                        assert!((s[k] - exact[k]).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn checkerboard_average() {
        let mesh = generate_structured(2, 1, 2.0, 1.0, 0.0, 0).unwrap();
        let patches = build_patches(&mesh);
        // elements 0 and 1 fill cell 0, elements 2 and 3 cell 1; equal areas
        let vals = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let avg = average_to_nodes(&mesh, &patches, &vals);
        // node 1 (bottom middle) touches elements 0, 2 and 3
        assert_eq!(patches[1].elements, vec![0, 2, 3]);
        assert!((avg[1][0] - 2.0 / 3.0).abs() < 1e-15 && (avg[1][1] - 1.0 / 3.0).abs() < 1e-15);
        // node 0 touches elements 0 and 1
        assert!((avg[0][0] - 0.5).abs() < 1e-15);
    }
}
