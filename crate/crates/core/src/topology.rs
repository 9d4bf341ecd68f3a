//! Winding of a field relative to parallel transport around circles of
//! latitude, and the resulting indices at the two punctures.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolError};
use crate::fields::AngleField;
use crate::geometry::{SphereChart, SpherePoint};
use crate::ode::{integrate, OdeConfig};

pub const DEFAULT_WINDING_SAMPLES: usize = 720;
pub const MAX_DOUBLINGS: u32 = 3;
/// Colatitudes at which the pole limits are estimated (mirrored for the south pole).
pub const POLE_PROBES: [f64; 3] = [0.02, 0.01, 0.005];
pub const ROUNDING_TOL: f64 = 0.05;

/// Orientation convention for the winding.
///
/// `Mirrored` (the default) measures the reflected field `(a, -b)` against
/// the transported frame, so that `X_{m,k}` winds by `cos(theta) - k` and the
/// indices come out as `(1 - k, 1 + k)` at (north, south). `Standard` measures
/// the field itself (`k + cos(theta)`), which swaps the two indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    #[default]
    Mirrored,
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    #[serde(rename = "index_N")]
    pub index_n: i64,
    #[serde(rename = "index_S")]
    pub index_s: i64,
    pub euler_sum: i64,
    pub winding_samples: Vec<(f64, f64)>,
    pub orientation: Orientation,
}

/// Angle from `(ra, rb)` to `(a, b)` in `(-pi, pi]`.
fn relative_angle(ra: f64, rb: f64, a: f64, b: f64) -> f64 {
    (ra * b - rb * a).atan2(ra * a + rb * b)
}

fn wrap(d: f64) -> f64 {
    let w = (d + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Total turning / 2 pi of the field against a vector parallel-transported
/// once around `theta = theta_c`, starting from `e_theta` at `phi = 0`.
///
/// Sampling doubles while some step turns by more than `pi/2`. A field that
/// turns by nearly a whole multiple of `2 pi` between samples aliases and
/// cannot be detected this way.
pub fn winding_relative_parallel(
    field: &AngleField,
    theta_c: f64,
    samples: usize,
    orientation: Orientation,
) -> Result<f64> {
    if !field.domain().is_full() {
        return Err(VolError::SlitCircle);
    }
    SphereChart::unit().check_theta(theta_c)?;
    if samples < 4 {
        return Err(VolError::Invalid(format!("need at least 4 samples per circle, got {samples}")));
    }
    let mut n = samples;
    for _ in 0..=MAX_DOUBLINGS {
        if let Some(total) = unwrap_once(field, theta_c, n, orientation)? {
            return Ok(total / TAU);
        }
        n *= 2;
    }
    Err(VolError::UnwrapFailure { theta: theta_c, doublings: MAX_DOUBLINGS })
}

/// `None` when an adjacent jump exceeds `pi/2`.
fn unwrap_once(field: &AngleField, theta: f64, n: usize, orientation: Orientation) -> Result<Option<f64>> {
    let cfg = OdeConfig::default();
    let c = theta.cos();
    let sign = match orientation {
        Orientation::Mirrored => -1.0,
        Orientation::Standard => 1.0,
    };
    let mut reference = [1.0, 0.0];
    let mut prev = {
        let (a, b) = field.eval(SpherePoint::new(theta, 0.0))?;
        relative_angle(reference[0], reference[1], a, sign * b)
    };
    let mut total = 0.0;
    for j in 1..=n {
        let (p0, p1) = (TAU * (j - 1) as f64 / n as f64, TAU * j as f64 / n as f64);
        // nabla_phi R = 0 in frame coefficients: da = cos(theta) b dphi, db = -cos(theta) a dphi
        reference = integrate(|_, y: &[f64; 2]| [c * y[1], -c * y[0]], p0, reference, p1, &cfg, |_, _| Ok(()))?;
        let (a, b) = field.eval(SpherePoint::new(theta, p1))?;
        let cur = relative_angle(reference[0], reference[1], a, sign * b);
        let step = wrap(cur - prev);
        if step.abs() > PI / 2.0 {
            return Ok(None);
        }
        total += step;
        prev = cur;
    }
    Ok(Some(total))
}

fn pole_limit(field: &AngleField, thetas: impl Iterator<Item = f64>, orientation: Orientation, samples: &mut Vec<(f64, f64)>) -> Result<i64> {
    let mut values = Vec::new();
    for t in thetas {
        let w = winding_relative_parallel(field, t, DEFAULT_WINDING_SAMPLES, orientation)?;
        samples.push((t, w));
        values.push(w);
    }
    let last = *values.last().expect("probe list is nonempty");
    let rounded = last.round();
    if (last - rounded).abs() > ROUNDING_TOL || values.iter().any(|v| v.round() != rounded) {
        return Err(VolError::NonIntegerWinding { value: last, tol: ROUNDING_TOL });
    }
    Ok(rounded as i64)
}

/// `index_N = round(w(theta -> 0))`, `index_S = -round(w(theta -> pi))`.
pub fn index_at_poles(field: &AngleField, orientation: Orientation) -> Result<IndexReport> {
    if !field.domain().is_full() {
        return Err(VolError::SlitCircle);
    }
    let mut samples = Vec::new();
    let north = pole_limit(field, POLE_PROBES.iter().copied(), orientation, &mut samples)?;
    let south = -pole_limit(field, POLE_PROBES.iter().map(|t| PI - t), orientation, &mut samples)?;
    Ok(IndexReport { index_n: north, index_s: south, euler_sum: north + south, winding_samples: samples, orientation })
}

/// The indices of a field on the sphere minus two points must add up to 2.
pub fn poincare_hopf_check(report: &IndexReport) -> bool {
    report.euler_sum == 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{GridField, InitialData, TTypeSpec, ZetaSpec};
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn coordinate_field_winding() {
        let w = winding_relative_parallel(&AngleField::meridian(0, 0.0), FRAC_PI_3, 720, Orientation::Mirrored).unwrap();
        assert!((w - 0.5).abs() < 1e-8);
    }

    #[test]
    fn meridian_closed_form() {
        for k in 0..=5 {
            for i in 1..=10 {
                let theta = PI * i as f64 / 11.0;
                for phi0 in [0.0, 1.3] {
                    let f = AngleField::meridian(k, phi0);
                    let w = winding_relative_parallel(&f, theta, 720, Orientation::Mirrored).unwrap();
                    assert!((w - (theta.cos() - k as f64)).abs() < 1e-8, "k={k} theta={theta} w={w}");
                    let ws = winding_relative_parallel(&f, theta, 720, Orientation::Standard).unwrap();
                    assert!((ws - (theta.cos() + k as f64)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn indices() {
        for k in 0..=5 {
            let r = index_at_poles(&AngleField::meridian(k, 0.0), Orientation::Mirrored).unwrap();
            assert_eq!((r.index_n, r.index_s), (1 - k, 1 + k));
            assert!(poincare_hopf_check(&r));
            let s = index_at_poles(&AngleField::meridian(k, 0.0), Orientation::Standard).unwrap();
            assert_eq!((s.index_n, s.index_s), (1 + k, 1 - k));
        }
        let fake = IndexReport { index_n: 0, index_s: 0, euler_sum: 0, winding_samples: vec![], orientation: Orientation::Mirrored };
        assert!(!poincare_hopf_check(&fake));
    }

    #[test]
    fn phase_invariance_is_exact() {
        let a = index_at_poles(&AngleField::meridian(2, 0.0), Orientation::Mirrored).unwrap();
        let b = index_at_poles(&AngleField::meridian(2, 2.5), Orientation::Mirrored).unwrap();
        for ((_, wa), (_, wb)) in a.winding_samples.iter().zip(&b.winding_samples) {
            assert!((wa - wb).abs() < 1e-12);
        }
    }

    #[test]
    fn slit_fields_rejected() {
        let err = winding_relative_parallel(&AngleField::latitude(0.0), 1.0, 720, Orientation::Mirrored).unwrap_err();
        assert_eq!(err, VolError::SlitCircle);
        assert!(index_at_poles(&AngleField::latitude(0.0), Orientation::Mirrored).is_err());
    }

    #[test]
    fn coarse_sampling_refines_or_fails() {
        // 4 samples are too few for k = 3, but doubling copes; for k = -10 every
        // level from 4 to 32 samples turns by more than pi/2 per step
        let f = AngleField::meridian(3, 0.0);
        let w = winding_relative_parallel(&f, 1.0, 4, Orientation::Mirrored).unwrap();
        assert!((w - (1f64.cos() - 3.0)).abs() < 1e-8);
        let f = AngleField::meridian(-10, 0.0);
        assert!(matches!(
            winding_relative_parallel(&f, 1.0, 4, Orientation::Mirrored),
            Err(VolError::UnwrapFailure { .. })
        ));
    }

    #[test]
    fn grid_field_indices() {
        // theta is clamped outside the lattice, so near the poles this is X_{m,1}
        let g = GridField::from_fn(8, 16, 1, (0.3, PI - 0.3), 1.0, |_, p| p).unwrap();
        let r = index_at_poles(&AngleField::Grid(g), Orientation::Mirrored).unwrap();
        assert_eq!((r.index_n, r.index_s), (0, 2));
    }

    #[test]
    fn ttype_field_indices() {
        let spec = TTypeSpec::new((0.8, 0.6), InitialData::Meridian(ZetaSpec::meridian(1, 0.0))).unwrap();
        let r = index_at_poles(&AngleField::TType(spec), Orientation::Mirrored).unwrap();
        assert_eq!((r.index_n, r.index_s), (0, 2));
        assert!(poincare_hopf_check(&r));
    }
}
