use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{check_theta, SpherePoint, DEFAULT_POLE_EPS};

/// Frame angle `zeta(phi) = k phi + phi0 + sum_n (c_n cos n phi + s_n sin n phi)`
/// of a field that is parallel along every meridian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaSpec {
    pub k: i64,
    pub phi0: f64,
    /// `(c_n, s_n)` for `n = 1..=N`.
    #[serde(default)]
    pub fourier: Vec<(f64, f64)>,
}

impl ZetaSpec {
    /// The meridian-type field `X_{m,k}` with phase `phi0`.
    pub fn meridian(k: i64, phi0: f64) -> Self {
        Self { k, phi0, fourier: Vec::new() }
    }

    pub fn with_fourier(mut self, fourier: Vec<(f64, f64)>) -> Self {
        self.fourier = fourier;
        self
    }

    pub fn zeta(&self, phi: f64) -> f64 {
        // the periodic part uses the reduced angle so that zeta(2 pi) - zeta(0) = 2 pi k
        let reduced = phi.rem_euclid(TAU);
        let mut periodic = 0.0;
        for (n, (c, s)) in self.fourier.iter().enumerate() {
            let (sn, cn) = ((n + 1) as f64 * reduced).sin_cos();
            periodic += c * cn + s * sn;
        }
        self.k as f64 * phi + self.phi0 + periodic
    }

    pub fn zeta_prime(&self, phi: f64) -> f64 {
        let reduced = phi.rem_euclid(TAU);
        let mut d = self.k as f64;
        for (n, (c, s)) in self.fourier.iter().enumerate() {
            let m = (n + 1) as f64;
            let (sn, cn) = (m * reduced).sin_cos();
            d += m * (s * cn - c * sn);
        }
        d
    }

    /// Euclidean norm of the Fourier perturbation coefficients.
    pub fn perturbation_norm(&self) -> f64 {
        self.fourier.iter().map(|(c, s)| c * c + s * s).sum::<f64>().sqrt()
    }

    pub fn is_pure(&self) -> bool {
        self.fourier.iter().all(|&(c, s)| c == 0.0 && s == 0.0)
    }
}

/// Frame coefficients `(cos zeta, sin zeta)` of a meridian-parallel field.
pub fn eval_meridian(spec: &ZetaSpec, p: SpherePoint) -> Result<(f64, f64)> {
    check_theta(p.theta, DEFAULT_POLE_EPS)?;
    let (s, c) = spec.zeta(p.phi).sin_cos();
    Ok((c, s))
}
