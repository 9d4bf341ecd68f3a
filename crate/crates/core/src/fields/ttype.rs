//! Fields parallel along the loxodromes of a constant-coefficient frame
//! field `T = a_T e_theta + b_T e_phi`.
//!
//! The value at a query point is obtained by following the loxodrome back to
//! a transversal curve, reading the initial angle there and transporting it
//! forward with `nabla_T X = 0`, i.e. `dalpha = -cos(theta) dphi` along the
//! flow. The integration parameter is the coordinate that changes
//! monotonically along the flow (`theta` when `a_T != 0`, `phi` otherwise).

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolError};
use crate::fields::latitude::LatitudeSpec;
use crate::fields::zeta::ZetaSpec;
use crate::geometry::{check_theta, SpherePoint, DEFAULT_POLE_EPS};
use crate::ode::{integrate, OdeConfig};

const DIRECTION_TOL: f64 = 1e-12;

/// Curve carrying the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Transversal {
    /// The circle `theta = pi/2`; crossed once by every loxodrome with `a_T != 0`.
    Equator,
    /// The meridian `phi = phi`; the field is then defined off this meridian.
    Meridian { phi: f64 },
}

/// Initial angle on the transversal, taken from a closed-form field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialData {
    Meridian(ZetaSpec),
    Latitude(LatitudeSpec),
}

impl InitialData {
    fn angle_at(&self, theta: f64, phi: f64) -> f64 {
        match self {
            InitialData::Meridian(z) => z.zeta(phi),
            InitialData::Latitude(l) => l.angle(theta, phi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTypeSpec {
    /// `(a_T, b_T)` on the unit circle.
    pub direction: (f64, f64),
    pub initial: InitialData,
    pub transversal: Transversal,
}

impl TTypeSpec {
    /// Uses the equator as transversal unless `a_T = 0`, in which case the
    /// loxodromes are parallels and the meridian `phi = 0` is used instead.
    pub fn new(direction: (f64, f64), initial: InitialData) -> Result<Self> {
        let transversal = if direction.0.abs() > DIRECTION_TOL {
            Transversal::Equator
        } else {
            Transversal::Meridian { phi: 0.0 }
        };
        Self::with_transversal(direction, initial, transversal)
    }

    pub fn with_transversal(
        direction: (f64, f64),
        initial: InitialData,
        transversal: Transversal,
    ) -> Result<Self> {
        let (a, b) = direction;
        let norm = a.hypot(b);
        if !((norm - 1.0).abs() <= DIRECTION_TOL) {
            return Err(VolError::NonUnit { a, b, norm });
        }
        match transversal {
            Transversal::Equator if a.abs() <= DIRECTION_TOL => Err(VolError::Invalid(
                "loxodromes along parallels never reach the equator".into(),
            )),
            Transversal::Meridian { .. } if b.abs() <= DIRECTION_TOL => Err(VolError::Invalid(
                "loxodromes along meridians never reach a transversal meridian".into(),
            )),
            _ => Ok(Self { direction, initial, transversal }),
        }
    }

    /// Whether the field is defined (and continuous) on all of the punctured sphere.
    pub fn is_global(&self) -> bool {
        matches!(
            (&self.transversal, &self.initial),
            (Transversal::Equator, InitialData::Meridian(_))
        )
    }
}

/// Result of a transport, with the norm drift before the final renormalisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transported {
    pub a: f64,
    pub b: f64,
    pub drift: f64,
}

pub fn eval_ttype(spec: &TTypeSpec, p: SpherePoint) -> Result<(f64, f64)> {
    let t = transport(spec, p, &OdeConfig::default())?;
    Ok((t.a, t.b))
}

pub fn transport(spec: &TTypeSpec, p: SpherePoint, cfg: &OdeConfig) -> Result<Transported> {
    check_theta(p.theta, DEFAULT_POLE_EPS)?;
    let (at, bt) = spec.direction;
    let state = match spec.transversal {
        Transversal::Equator => {
            let slope = bt / at;
            // foot of the loxodrome on the equator
            let back = integrate(
                |theta, _y: &[f64; 1]| [slope / theta.sin()],
                p.theta,
                [p.phi],
                FRAC_PI_2,
                cfg,
                |_, _| Ok(()),
            )?;
            let foot_phi = back[0];
            let alpha0 = spec.initial.angle_at(FRAC_PI_2, foot_phi);
            let (s0, c0) = alpha0.sin_cos();
            let fwd = integrate(
                |theta, y: &[f64; 3]| {
                    let (s, c) = theta.sin_cos();
                    let omega = slope * c / s;
                    [slope / s, omega * y[2], -omega * y[1]]
                },
                FRAC_PI_2,
                [foot_phi, c0, s0],
                p.theta,
                cfg,
                |_, _| Ok(()),
            )?;
            [fwd[1], fwd[2]]
        }
        Transversal::Meridian { phi: phi_t } => {
            if !(p.phi > phi_t && p.phi < phi_t + TAU) {
                return Err(VolError::SlitDomain { phi: p.phi });
            }
            let foot_phi = if bt > 0.0 { phi_t } else { phi_t + TAU };
            let slope = at / bt;
            let eps = DEFAULT_POLE_EPS.max(1e-6);
            let guard = |_: f64, y: &[f64; 1]| check_theta(y[0], eps).map_err(|_| VolError::FlowEscape { theta: y[0] });
            let back = integrate(
                |_phi, y: &[f64; 1]| [slope * y[0].sin()],
                p.phi,
                [p.theta],
                foot_phi,
                cfg,
                guard,
            )?;
            let foot_theta = back[0];
            let alpha0 = spec.initial.angle_at(foot_theta, foot_phi);
            let (s0, c0) = alpha0.sin_cos();
            let fwd = integrate(
                |_phi, y: &[f64; 3]| {
                    let (s, c) = y[0].sin_cos();
                    [slope * s, c * y[2], -c * y[1]]
                },
                foot_phi,
                [foot_theta, c0, s0],
                p.phi,
                cfg,
                |_, _| Ok(()),
            )?;
            [fwd[1], fwd[2]]
        }
    };
    let norm = state[0].hypot(state[1]);
    Ok(Transported { a: state[0] / norm, b: state[1] / norm, drift: (norm - 1.0).abs() })
}
