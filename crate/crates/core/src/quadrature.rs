//! Quadrature rules on the unit interval and on triangles.
//!
//! Triangle rules use barycentric points and weights normalised to sum to one,
//! so an integral over a triangle of area `A` is `A * sum(w_i f(x_i))`.

use std::f64::consts::PI;

use crate::mesh::Point;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    pub fn gauss(n: usize) -> Self {
        assert!(n >= 1);
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = 0.5 * (1.0 - x);
            points[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { points, weights }
    }

    /// Smallest Gauss rule exact for polynomials of `degree`.
    pub fn with_degree(degree: usize) -> Self {
        Self::gauss(degree / 2 + 1)
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    pub fn centroid() -> Self {
        Self { points: vec![[1.0 / 3.0; 3]], weights: vec![1.0], degree: 1 }
    }

    pub fn three_point() -> Self {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        Self { points: vec![[a, b, b], [b, a, b], [b, b, a]], weights: vec![1.0 / 3.0; 3], degree: 2 }
    }

    /// Seven-point symmetric rule, exact to degree 5.
    pub fn seven_point() -> Self {
        let s = 15f64.sqrt();
        let a1 = (6.0 - s) / 21.0;
        let a2 = (6.0 + s) / 21.0;
        let w1 = (155.0 - s) / 1200.0;
        let w2 = (155.0 + s) / 1200.0;
        let mut points = vec![[1.0 / 3.0; 3]];
        let mut weights = vec![9.0 / 40.0];
        for (a, w) in [(a1, w1), (a2, w2)] {
            let b = 1.0 - 2.0 * a;
            points.extend([[b, a, a], [a, b, a], [a, a, b]]);
            weights.extend([w; 3]);
        }
        Self { points, weights, degree: 5 }
    }

    /// Collapsed Gauss product rule exact to `degree`, with the collapsed edge
    /// at vertex 0. The Jacobian vanishes linearly at vertex 0, which cancels a
    /// `1/r` singularity located there.
    pub fn collapsed(degree: usize) -> Self {
        let n = degree / 2 + 1;
        let g = LineRule::gauss(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in g.points.iter().zip(&g.weights) {
            for (&v, &wv) in g.points.iter().zip(&g.weights) {
                points.push([1.0 - u, u * (1.0 - v), u * v]);
                weights.push(2.0 * u * wu * wv);
            }
        }
        Self { points, weights, degree }
    }

    /// The cheapest rule here that is exact to `degree`.
    pub fn with_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self::centroid(),
            2 => Self::three_point(),
            3..=5 => Self::seven_point(),
            d => Self::collapsed(d),
        }
    }

    /// Rotates barycentric components so that the rule's vertex 0 lands on
    /// vertex `k` of the target triangle.
    pub fn rotated(&self, k: usize) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| {
                let mut q = [0.0; 3];
                for i in 0..3 {
                    q[(i + k) % 3] = p[i];
                }
                q
            })
            .collect();
        Self { points, weights: self.weights.clone(), degree: self.degree }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical points of the rule on triangle `v` with absolute weights.
    pub fn map(&self, v: [Point; 3]) -> impl Iterator<Item = (Point, f64)> + '_ {
        let area = crate::mesh::signed_area(v[0], v[1], v[2]).abs();
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            let x = l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0];
            let y = l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1];
            ([x, y], w * area)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact integral of `x^p y^q` over the reference triangle (0,0),(1,0),(0,1).
    fn monomial_integral(p: u32, q: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        fact(p) * fact(q) / fact(p + q + 2)
    }

    fn check_exact(rule: &TriangleRule) {
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for total in 0..=rule.degree as u32 {
            for p in 0..=total {
                let q = total - p;
                let num: f64 = rule.map(v).map(|(x, w)| w * x[0].powi(p as i32) * x[1].powi(q as i32)).sum();
                let exact = monomial_integral(p, q);
                assert!((num - exact).abs() < 1e-14, "degree {} monomial x^{p} y^{q}", rule.degree);
            }
        }
    }

    #[test]
    fn gauss_legendre() {
        for n in 1..12 {
            let g = LineRule::gauss(n);
            assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for k in 0..(2 * n) as i32 {
                let num: f64 = g.points.iter().zip(&g.weights).map(|(x, w)| w * x.powi(k)).sum();
                assert!((num - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn triangle_rules_are_exact() {
        check_exact(&TriangleRule::centroid());
        check_exact(&TriangleRule::three_point());
        check_exact(&TriangleRule::seven_point());
        for d in [4, 6, 8, 10, 16] {
            check_exact(&TriangleRule::collapsed(d));
            check_exact(&TriangleRule::collapsed(d).rotated(2));
        }
    }

    #[test]
    fn seven_point_misses_degree_six() {
        let r = TriangleRule::seven_point();
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let num: f64 = r.map(v).map(|(x, w)| w * x[0].powi(6)).sum();
        assert!((num - monomial_integral(6, 0)).abs() > 1e-8);
    }
}
