use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneState {
    PlaneStress,
    PlaneStrain,
}

/// Which plane-stress Kolosov constant to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KolosovForm {
    /// `(3 - nu) / (1 + nu)`.
    #[default]
    Standard,
    /// `(1 - nu) / (3 + nu)`, reproduced verbatim for comparison runs only.
    Inverted,
}

/// Isotropic linear-elastic material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    #[serde(rename = "E")]
    pub e: f64,
    pub nu: f64,
    pub state: PlaneState,
    #[serde(default)]
    pub kolosov: KolosovForm,
}

impl Material {
    pub fn new(e: f64, nu: f64, state: PlaneState) -> Result<Self> {
        let m = Self { e, nu, state, kolosov: KolosovForm::Standard };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e > 0.0) || !(0.0..0.5).contains(&self.nu) {
            return Err(Error::InvalidArgument(format!("invalid material E={} nu={}", self.e, self.nu)));
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    pub fn kappa(&self) -> f64 {
        let nu = self.nu;
        match (self.state, self.kolosov) {
            (PlaneState::PlaneStrain, _) => 3.0 - 4.0 * nu,
            (PlaneState::PlaneStress, KolosovForm::Standard) => (3.0 - nu) / (1.0 + nu),
            (PlaneState::PlaneStress, KolosovForm::Inverted) => (1.0 - nu) / (3.0 + nu),
        }
    }

    /// Effective modulus used to convert energy release rates to SIFs.
    pub fn e_star(&self) -> f64 {
        match self.state {
            PlaneState::PlaneStress => self.e,
            PlaneState::PlaneStrain => self.e / (1.0 - self.nu * self.nu),
        }
    }

    /// Voigt elasticity matrix for `(xx, yy, engineering xy)`.
    pub fn elasticity(&self) -> [[f64; 3]; 3] {
        let (e, nu) = (self.e, self.nu);
        match self.state {
            PlaneState::PlaneStress => {
                let f = e / (1.0 - nu * nu);
                [[f, f * nu, 0.0], [f * nu, f, 0.0], [0.0, 0.0, f * (1.0 - nu) / 2.0]]
            }
            PlaneState::PlaneStrain => {
                let f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
                [[f * (1.0 - nu), f * nu, 0.0], [f * nu, f * (1.0 - nu), 0.0], [0.0, 0.0, f * (1.0 - 2.0 * nu) / 2.0]]
            }
        }
    }

    pub fn stress(&self, strain: [f64; 3]) -> [f64; 3] {
        let c = self.elasticity();
        [0, 1, 2].map(|i| c[i][0] * strain[0] + c[i][1] * strain[1] + c[i][2] * strain[2])
    }

    /// Engineering strain from in-plane stress.
    pub fn strain(&self, stress: [f64; 3]) -> [f64; 3] {
        let (e, nu) = (self.e, self.nu);
        let [sx, sy, txy] = stress;
        let g = self.mu();
        match self.state {
            PlaneState::PlaneStress => [(sx - nu * sy) / e, (sy - nu * sx) / e, txy / g],
            PlaneState::PlaneStrain => {
                let f = (1.0 + nu) / e;
                [f * ((1.0 - nu) * sx - nu * sy), f * ((1.0 - nu) * sy - nu * sx), txy / g]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        let m = Material::new(1000.0, 0.3, PlaneState::PlaneStrain).unwrap();
        assert!((m.mu() - 1000.0 / 2.6).abs() < 1e-12);
        assert!((m.kappa() - 1.8).abs() < 1e-15);
        let s = Material::new(1000.0, 0.3, PlaneState::PlaneStress).unwrap();
        assert!((s.kappa() - 2.7 / 1.3).abs() < 1e-15);
        let inv = Material { kolosov: KolosovForm::Inverted, ..s };
        assert!((inv.kappa() - 0.7 / 3.3).abs() < 1e-15);
        assert!(Material::new(-1.0, 0.3, PlaneState::PlaneStress).is_err());
        assert!(Material::new(1.0, 0.5, PlaneState::PlaneStress).is_err());
    }

    #[test]
    fn compliance_inverts_elasticity() {
        for state in [PlaneState::PlaneStress, PlaneState::PlaneStrain] {
            let m = Material::new(210.0, 0.27, state).unwrap();
            let eps = [1e-3, -4e-4, 2.5e-4];
            let back = m.strain(m.stress(eps));
            for k in 0..3 {
                assert!((back[k] - eps[k]).abs() < 1e-15);
            }
            let c = m.elasticity();
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(c[i][j], c[j][i]);
                }
            }
        }
    }
}
