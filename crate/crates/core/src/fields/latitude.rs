use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolError};
use crate::geometry::{check_theta, SpherePoint, DEFAULT_POLE_EPS};

/// Field parallel along every circle of latitude, `a = sin eta`, `b = cos eta`
/// with `eta = phi cos(theta) + phi0`. Defined off the meridian `phi = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatitudeSpec {
    pub phi0: f64,
}

impl LatitudeSpec {
    pub fn new(phi0: f64) -> Self {
        Self { phi0 }
    }

    pub fn eta(&self, theta: f64, phi: f64) -> f64 {
        phi * theta.cos() + self.phi0
    }

    /// Frame angle `pi/2 - eta`.
    pub fn angle(&self, theta: f64, phi: f64) -> f64 {
        FRAC_PI_2 - self.eta(theta, phi)
    }

    /// `eta(theta, 2 pi) - eta(theta, 0) = 2 pi cos(theta)`.
    pub fn holonomy_mismatch(&self, theta: f64) -> f64 {
        self.eta(theta, TAU) - self.eta(theta, 0.0)
    }
}

pub(crate) fn check_slit(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < TAU {
        Ok(())
    } else {
        Err(VolError::SlitDomain { phi })
    }
}

pub fn eval_latitude(spec: &LatitudeSpec, p: SpherePoint) -> Result<(f64, f64)> {
    check_theta(p.theta, DEFAULT_POLE_EPS)?;
    check_slit(p.phi)?;
    let (s, c) = spec.eta(p.theta, p.phi).sin_cos();
    Ok((s, c))
}
