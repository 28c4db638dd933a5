//! Closed-form reference solutions used by the benchmarks and by the
//! interaction integral.

use std::f64::consts::PI;

use crate::enrichment::TipFrame;
use crate::error::{Error, Result};
use crate::fracture::SifPair;
use crate::material::Material;
use crate::mesh::Point;

/// A 2D displacement and stress field given in closed form.
pub trait AnalyticalField: Sync {
    fn displacement(&self, p: Point) -> Result<[f64; 2]>;
    /// Voigt stress `(xx, yy, xy)`.
    fn stress(&self, p: Point) -> Result<[f64; 3]>;
}

/// Bar fixed at `x = 0`, free at `x = L`, under a uniform axial body force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar1d {
    pub length: f64,
    pub area: f64,
    pub modulus: f64,
    pub force: f64,
}

impl Default for Bar1d {
    fn default() -> Self {
        Self { length: 1.0, area: 1.0, modulus: 1.0, force: 1.0 }
    }
}

impl Bar1d {
    pub fn displacement(&self, x: f64) -> f64 {
        let s = x / self.length;
        self.force * self.length * self.length / (self.modulus * self.area) * (s - 0.5 * s * s)
    }

    pub fn stress(&self, x: f64) -> f64 {
        self.force * self.length / self.area * (1.0 - x / self.length)
    }

    pub fn strain(&self, x: f64) -> f64 {
        self.stress(x) / self.modulus
    }
}

/// Points up to this fraction inside the rim are accepted, so quadrature
/// points of a mesh whose straight edges cut the arc still evaluate.
pub const RIM_TOL: f64 = 0.02;

/// Infinite plate with a circular hole of radius `a` under unit-direction
/// remote tension `sigma` along x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateHole {
    pub a: f64,
    pub sigma: f64,
    pub material: Material,
}

impl PlateHole {
    fn polar(&self, p: Point) -> Result<(f64, f64)> {
        let r = p[0].hypot(p[1]);
        if r < self.a * (1.0 - RIM_TOL) {
            return Err(Error::OutsideFieldDomain(format!("r = {r} inside the hole")));
        }
        Ok((r, p[1].atan2(p[0])))
    }
}

impl AnalyticalField for PlateHole {
    fn displacement(&self, p: Point) -> Result<[f64; 2]> {
        let (r, t) = self.polar(p)?;
        let a = self.a;
        let k = self.material.kappa();
        let f = self.sigma * a / (8.0 * self.material.mu());
        let (ar, ar3) = (a / r, (a / r).powi(3));
        let ux = f
            * (r / a * (k + 1.0) * t.cos() + 2.0 * ar * ((1.0 + k) * t.cos() + (3.0 * t).cos())
                - 2.0 * ar3 * (3.0 * t).cos());
        let uy = f
            * (r / a * (k - 3.0) * t.sin() + 2.0 * ar * ((1.0 - k) * t.sin() + (3.0 * t).sin())
                - 2.0 * ar3 * (3.0 * t).sin());
        Ok([ux, uy])
    }

    fn stress(&self, p: Point) -> Result<[f64; 3]> {
        let (r, t) = self.polar(p)?;
        let a2 = (self.a / r).powi(2);
        let a4 = a2 * a2;
        let (c2, c4, s2, s4) = ((2.0 * t).cos(), (4.0 * t).cos(), (2.0 * t).sin(), (4.0 * t).sin());
        let s = self.sigma;
        Ok([
            s * (1.0 - a2 * (1.5 * c2 + c4) + 1.5 * a4 * c4),
            s * (-a2 * (0.5 * c2 - c4) - 1.5 * a4 * c4),
            s * (-a2 * (0.5 * s2 + s4) + 1.5 * a4 * s4),
        ])
    }
}

/// Cantilever of length `l` and depth `w` on `[0, l] x [-w/2, w/2]`, end
/// shear `p` at `x = l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timoshenko {
    pub p: f64,
    pub l: f64,
    pub w: f64,
    pub material: Material,
}

impl Timoshenko {
    pub fn inertia(&self) -> f64 {
        self.w.powi(3) / 12.0
    }
}

impl AnalyticalField for Timoshenko {
    fn displacement(&self, q: Point) -> Result<[f64; 2]> {
        let [x, y] = q;
        let (p, l, w) = (self.p, self.l, self.w);
        let (e, nu) = (self.material.e, self.material.nu);
        let ei = e * self.inertia();
        let ux = p * y / (6.0 * ei) * ((6.0 * l - 3.0 * x) * x + (2.0 + nu) * (y * y - w * w / 4.0));
        let uy =
            -p / (6.0 * ei) * (3.0 * nu * y * y * (l - x) + (4.0 + 5.0 * nu) * w * w * x / 4.0 + (3.0 * l - x) * x * x);
        Ok([ux, uy])
    }

    fn stress(&self, q: Point) -> Result<[f64; 3]> {
        let [x, y] = q;
        let i = self.inertia();
        Ok([self.p * (self.l - x) * y / i, 0.0, -self.p / (2.0 * i) * (self.w * self.w / 4.0 - y * y)])
    }
}

/// Near-tip state in the tip frame: displacement, its gradient
/// `[[u_x,x, u_x,y], [u_y,x, u_y,y]]` and Voigt stress.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TipState {
    pub u: [f64; 2],
    pub grad: [[f64; 2]; 2],
    pub stress: [f64; 3],
}

/// Mixed-mode singular near-tip field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Westergaard {
    pub sifs: SifPair,
    pub material: Material,
    pub frame: TipFrame,
}

impl Westergaard {
    pub fn new(sifs: SifPair, material: Material, frame: TipFrame) -> Self {
        Self { sifs, material, frame }
    }

    /// State at tip polar coordinates `(r, theta)`, in the tip frame.
    pub fn local(&self, r: f64, theta: f64) -> Result<TipState> {
        if !(r > 0.0) {
            return Err(Error::OutsideFieldDomain("r = 0 at the crack tip".into()));
        }
        let (k1, k2) = (self.sifs.k1, self.sifs.k2);
        let mu = self.material.mu();
        let kap = self.material.kappa();
        let (s, c) = (0.5 * theta).sin_cos();
        let (s3, c3) = (1.5 * theta).sin_cos();
        let sr = r.sqrt();
        let a = k1 / (2.0 * mu * (2.0 * PI).sqrt());
        let b = k2 / (2.0 * mu * (2.0 * PI).sqrt());

        // u = sqrt(r) g(theta)
        let gx = a * c * (kap - 1.0 + 2.0 * s * s) + b * s * (kap + 1.0 + 2.0 * c * c);
        let gy = a * s * (kap + 1.0 - 2.0 * c * c) + b * c * (1.0 - kap + 2.0 * s * s);
        let dgx = a * (-0.5 * s * (kap - 1.0 + 2.0 * s * s) + 2.0 * s * c * c)
            + b * (0.5 * c * (kap + 1.0 + 2.0 * c * c) - 2.0 * s * s * c);
        let dgy = a * (0.5 * c * (kap + 1.0 - 2.0 * c * c) + 2.0 * s * s * c)
            + b * (-0.5 * s * (1.0 - kap + 2.0 * s * s) + 2.0 * s * c * c);
        let (st, ct) = theta.sin_cos();
        let d = |g: f64, dg: f64| {
            let ur = g / (2.0 * sr);
            let ut = sr * dg;
            [ct * ur - st / r * ut, st * ur + ct / r * ut]
        };
        let grad = [d(gx, dgx), d(gy, dgy)];

        let f = 1.0 / (2.0 * PI * r).sqrt();
        let stress = [
            f * (k1 * c * (1.0 - s * s3) - k2 * s * (2.0 + c * c3)),
            f * (k1 * c * (1.0 + s * s3) + k2 * s * c * c3),
            f * (k1 * s * c * c3 + k2 * c * (1.0 - s * s3)),
        ];
        Ok(TipState { u: [sr * gx, sr * gy], grad, stress })
    }
}

impl AnalyticalField for Westergaard {
    fn displacement(&self, p: Point) -> Result<[f64; 2]> {
        let (r, t) = self.frame.polar(p);
        Ok(self.frame.vector_to_global(self.local(r, t)?.u))
    }

    fn stress(&self, p: Point) -> Result<[f64; 3]> {
        let (r, t) = self.frame.polar(p);
        Ok(self.frame.stress_to_global(self.local(r, t)?.stress))
    }
}

/// SIFs of a centre crack of half length `a` inclined at `beta` under
/// remote tension `sigma` normal to the x axis.
pub fn inclined_sifs(sigma: f64, a: f64, beta: f64) -> SifPair {
    let k0 = sigma * (PI * a).sqrt();
    let (s, c) = beta.sin_cos();
    SifPair { k1: k0 * c * c, k2: k0 * c * s }
}

/// Linear displacement field `u = u0 + G x` with its constant stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField {
    pub u0: [f64; 2],
    pub grad: [[f64; 2]; 2],
    pub material: Material,
}

impl AnalyticalField for LinearField {
    fn displacement(&self, p: Point) -> Result<[f64; 2]> {
        let g = self.grad;
        Ok([self.u0[0] + g[0][0] * p[0] + g[0][1] * p[1], self.u0[1] + g[1][0] * p[0] + g[1][1] * p[1]])
    }

    fn stress(&self, _: Point) -> Result<[f64; 3]> {
        let g = self.grad;
        Ok(self.material.stress([g[0][0], g[1][1], g[0][1] + g[1][0]]))
    }
}
