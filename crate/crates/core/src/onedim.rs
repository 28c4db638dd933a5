//! Axially loaded bar: linear FEM against double-interpolation DFEM.

use crate::analytic::Bar1d;
use crate::basis::{shape_functions_1d, Interpolation};
use crate::error::{Error, Result};
use crate::quadrature::LineRule;
use crate::sparse::solve_dense;

#[derive(Debug, Clone, PartialEq)]
pub struct BarSolution {
    pub nodes: Vec<f64>,
    pub u: Vec<f64>,
    pub r_d: f64,
    pub r_e: f64,
}

/// Uniform grid of `n` elements on `[0, L]`.
pub fn uniform_grid(length: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| length * i as f64 / n as f64).collect()
}

struct Shape {
    nodes: Vec<usize>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

fn shape(nodes: &[f64], e: usize, x: f64, kind: Interpolation, deg: &[bool]) -> Result<Shape> {
    match kind {
        Interpolation::Double => {
            let s = shape_functions_1d(nodes, e, x, deg)?;
            Ok(Shape { nodes: s.nodes, values: s.values, derivs: s.derivs })
        }
        Interpolation::Linear => {
            let h = nodes[e + 1] - nodes[e];
            let t = (x - nodes[e]) / h;
            Ok(Shape { nodes: vec![e, e + 1], values: vec![1.0 - t, t], derivs: vec![-1.0 / h, 1.0 / h] })
        }
    }
}

/// Galerkin solution of the bar on the sorted grid `nodes` with `u(0) = 0`,
/// plus relative L2 and energy errors against the closed form.
pub fn solve_bar(bar: &Bar1d, nodes: &[f64], kind: Interpolation) -> Result<BarSolution> {
    let n = nodes.len();
    if n < 2 {
        return Err(Error::InvalidArgument("a bar needs at least one element".into()));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("bar nodes must increase strictly".into()));
    }
    if (nodes[0]).abs() > 1e-12 * bar.length || (nodes[n - 1] - bar.length).abs() > 1e-12 * bar.length {
        return Err(Error::InvalidArgument("bar nodes must span [0, L]".into()));
    }
    let deg = vec![false; n];
    let ea = bar.modulus * bar.area;
    let rule = LineRule::gauss(4);
    let mut k = vec![vec![0.0; n]; n];
    let mut f = vec![0.0; n];
    for e in 0..n - 1 {
        let h = nodes[e + 1] - nodes[e];
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let x = nodes[e] + t * h;
            let s = shape(nodes, e, x, kind, &deg)?;
            for a in 0..s.nodes.len() {
                f[s.nodes[a]] += w * h * bar.force * s.values[a];
                for b in 0..s.nodes.len() {
                    k[s.nodes[a]][s.nodes[b]] += w * h * ea * s.derivs[a] * s.derivs[b];
                }
            }
        }
    }
    // u(0) = 0: drop the first row and column
    let kr: Vec<Vec<f64>> = k[1..].iter().map(|row| row[1..].to_vec()).collect();
    let mut u = vec![0.0];
    u.extend(solve_dense(kr, f[1..].to_vec())?);

    let rule = LineRule::gauss(6);
    let mut acc = [0.0; 4];
    for e in 0..n - 1 {
        let h = nodes[e + 1] - nodes[e];
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let x = nodes[e] + t * h;
            let s = shape(nodes, e, x, kind, &deg)?;
            let uh: f64 = s.nodes.iter().zip(&s.values).map(|(&i, v)| v * u[i]).sum();
            let eh: f64 = s.nodes.iter().zip(&s.derivs).map(|(&i, v)| v * u[i]).sum();
            let (ue, ee) = (bar.displacement(x), bar.strain(x));
            acc[0] += w * h * (uh - ue).powi(2);
            acc[1] += w * h * ue * ue;
            acc[2] += w * h * ea * (eh - ee).powi(2);
            acc[3] += w * h * ea * ee * ee;
        }
    }
    Ok(BarSolution { nodes: nodes.to_vec(), u, r_d: (acc[0] / acc[1]).sqrt(), r_e: (acc[2] / acc[3]).sqrt() })
}
