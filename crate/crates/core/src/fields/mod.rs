//! Unit vector fields on the punctured sphere, described by their frame
//! angle `alpha` against `(e_theta, e_phi)`: `X = cos(alpha) e_theta + sin(alpha) e_phi`.

mod grid;
mod latitude;
mod spec_io;
mod ttype;
mod zeta;

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolError};
use crate::geometry::{FrameField, SpherePoint};

pub use grid::{GridField, VFGRID_HEADER_LEN, VFGRID_MAGIC};
pub use latitude::{eval_latitude, LatitudeSpec};
pub use spec_io::{SpecDocument, SPEC_SCHEMA};
pub use ttype::{eval_ttype, transport, InitialData, TTypeSpec, Transported, Transversal};
pub use zeta::{eval_meridian, ZetaSpec};


const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Meridian,
    ZetaFamily,
    Latitude,
    TType,
    Grid,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Meridian => "meridian",
            Family::ZetaFamily => "zeta-family",
            Family::Latitude => "latitude",
            Family::TType => "t-type",
            Family::Grid => "grid",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a field can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldDomain {
    /// All of the punctured sphere.
    Full,
    /// The punctured sphere minus the meridian `phi = phi` (mod 2 pi).
    Slit { phi: f64 },
}

impl FieldDomain {
    pub fn is_full(&self) -> bool {
        matches!(self, FieldDomain::Full)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AngleField {
    /// Parallel along meridians, angle `zeta(phi)`.
    Meridian(ZetaSpec),
    /// Parallel along circles of latitude.
    Latitude(LatitudeSpec),
    /// Parallel along the loxodromes of a constant-coefficient field.
    TType(TTypeSpec),
    Grid(GridField),
}

impl AngleField {
    pub fn meridian(k: i64, phi0: f64) -> Self {
        AngleField::Meridian(ZetaSpec::meridian(k, phi0))
    }

    pub fn latitude(phi0: f64) -> Self {
        AngleField::Latitude(LatitudeSpec::new(phi0))
    }

    pub fn family(&self) -> Family {
        match self {
            AngleField::Meridian(z) if z.is_pure() => Family::Meridian,
            AngleField::Meridian(_) => Family::ZetaFamily,
            AngleField::Latitude(_) => Family::Latitude,
            AngleField::TType(_) => Family::TType,
            AngleField::Grid(_) => Family::Grid,
        }
    }

    pub fn domain(&self) -> FieldDomain {
        match self {
            AngleField::Meridian(_) | AngleField::Grid(_) => FieldDomain::Full,
            AngleField::Latitude(_) => FieldDomain::Slit { phi: 0.0 },
            AngleField::TType(t) => match t.transversal {
                Transversal::Equator if t.is_global() => FieldDomain::Full,
                // latitude data on the equator is itself cut at phi = 0
                Transversal::Equator => FieldDomain::Slit { phi: 0.0 },
                Transversal::Meridian { phi } => FieldDomain::Slit { phi },
            },
        }
    }

    /// Winding `k` with `alpha(theta, 2 pi) = alpha(theta, 0) + 2 pi k`, for
    /// fields defined on whole circles of latitude.
    pub fn winding(&self) -> Option<i64> {
        match self {
            AngleField::Meridian(z) => Some(z.k),
            AngleField::Grid(g) => Some(g.winding()),
            AngleField::TType(t) if t.is_global() => match &t.initial {
                InitialData::Meridian(z) => Some(z.k),
                InitialData::Latitude(_) => None,
            },
            _ => None,
        }
    }

    /// Frame angle at `p`. Closed-form families return the unwrapped lift;
    /// transported fields return the principal value.
    pub fn angle(&self, p: SpherePoint) -> Result<f64> {
        match self {
            AngleField::Meridian(z) => {
                eval_meridian(z, p)?;
                Ok(z.zeta(p.phi))
            }
            AngleField::Latitude(l) => {
                eval_latitude(l, p)?;
                Ok(l.angle(p.theta, p.phi))
            }
            AngleField::TType(t) => {
                let (a, b) = eval_ttype(t, self.reduce_phi(p))?;
                Ok(b.atan2(a))
            }
            AngleField::Grid(g) => g.angle(p),
        }
    }

    /// Frame coefficients `(a, b)`.
    pub fn eval(&self, p: SpherePoint) -> Result<(f64, f64)> {
        match self {
            AngleField::Meridian(z) => eval_meridian(z, p),
            AngleField::Latitude(l) => eval_latitude(l, p),
            AngleField::TType(t) => eval_ttype(t, self.reduce_phi(p)),
            AngleField::Grid(g) => g.frame(p),
        }
    }

    /// Global T-type fields are periodic in `phi`; slit ones keep the caller's value.
    fn reduce_phi(&self, p: SpherePoint) -> SpherePoint {
        if self.domain().is_full() {
            SpherePoint::new(p.theta, p.phi.rem_euclid(TAU))
        } else {
            p
        }
    }
}

impl FrameField for AngleField {
    fn frame(&self, p: SpherePoint) -> Result<(f64, f64)> {
        self.eval(p)
    }
}

/// The `Y` completing `(X, Y)` to a direct orthonormal frame: `(-b, a)`.
pub fn orthonormal_complement(a: f64, b: f64) -> Result<(f64, f64)> {
    let norm = a.hypot(b);
    if !((norm - 1.0).abs() <= UNIT_TOL) {
        return Err(VolError::NonUnit { a, b, norm });
    }
    Ok((-b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FdConfig, SphereChart, TangentVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn complement_examples() {
        assert_eq!(orthonormal_complement(1.0, 0.0).unwrap(), (-0.0, 1.0));
        assert_eq!(orthonormal_complement(0.0, 1.0).unwrap(), (-1.0, 0.0));
        let z = 0.7_f64;
        let (ya, yb) = orthonormal_complement(z.cos(), z.sin()).unwrap();
        assert!((ya + z.sin()).abs() < 1e-16 && (yb - z.cos()).abs() < 1e-16);
        assert!(matches!(orthonormal_complement(0.5, 0.5), Err(VolError::NonUnit { .. })));
    }

    #[test]
    fn unit_norm_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fields = [
            AngleField::meridian(3, 0.4),
            AngleField::Meridian(ZetaSpec::meridian(-1, 0.0).with_fourier(vec![(0.3, -0.2)])),
            AngleField::latitude(1.1),
        ];
        for f in &fields {
            for _ in 0..100_000 {
                let p = SpherePoint::new(rng.gen_range(1e-6..PI - 1e-6), rng.gen_range(1e-9..TAU));
                let (a, b) = f.eval(p).unwrap();
                assert!((a.hypot(b) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transported_fields_are_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let spec = TTypeSpec::new((0.8, -0.6), InitialData::Meridian(ZetaSpec::meridian(1, 0.3))).unwrap();
        for _ in 0..200 {
            let p = SpherePoint::new(rng.gen_range(0.05..PI - 0.05), rng.gen_range(0.0..TAU));
            let t = transport(&spec, p, &Default::default()).unwrap();
            assert!(t.drift < 1e-9);
            assert!((t.a.hypot(t.b) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn phase_shift_is_rigid_rotation() {
        let (f0, f1) = (AngleField::meridian(2, 0.1), AngleField::meridian(2, 0.9));
        for (theta, phi) in [(0.3, 0.1), (1.5, 2.2), (2.9, 5.9)] {
            let p = SpherePoint::new(theta, phi);
            let (a0, b0) = f0.eval(p).unwrap();
            let (a1, b1) = f1.eval(p).unwrap();
            let (s, c) = 0.8_f64.sin_cos();
            assert!((a1 - (c * a0 - s * b0)).abs() < 1e-14);
            assert!((b1 - (s * a0 + c * b0)).abs() < 1e-14);
        }
    }

    #[test]
    fn families_are_parallel_along_their_curves() {
        let chart = SphereChart::unit();
        let fd = FdConfig::default();
        let mer = AngleField::meridian(2, 0.3);
        let lat = AngleField::latitude(0.0);
        let mut worst = (0.0_f64, 0.0_f64);
        for i in 1..20 {
            for j in 1..20 {
                let p = SpherePoint::new(PI * i as f64 / 20.0, TAU * j as f64 / 20.0);
                let dm = chart.covariant_derivative(&mer, TangentVector::new(1.0, 0.0), p, fd).unwrap();
                let dl = chart.covariant_derivative(&lat, TangentVector::new(0.0, 1.0), p, fd).unwrap();
                worst.0 = worst.0.max(dm.max_abs());
                worst.1 = worst.1.max(dl.max_abs());
            }
        }
        assert!(worst.0 < 1e-6 && worst.1 < 1e-6, "{worst:?}");
    }

    #[test]
    fn latitude_theta_derivative() {
        // nabla_theta X = phi sin(theta) Y
        let chart = SphereChart::unit();
        let lat = AngleField::latitude(0.0);
        for (theta, phi) in [(0.5, 1.0), (1.2, 3.0), (2.5, 5.5)] {
            let p = SpherePoint::new(theta, phi);
            let d = chart.covariant_derivative(&lat, TangentVector::new(1.0, 0.0), p, FdConfig::default()).unwrap();
            let (a, b) = lat.eval(p).unwrap();
            let (ya, yb) = orthonormal_complement(a, b).unwrap();
            let expected = chart.frame_vector(theta, phi * theta.sin() * ya, phi * theta.sin() * yb);
            assert!((d - expected).max_abs() < 1e-6);
        }
    }

    #[test]
    fn covariant_derivative_is_additive() {
        let chart = SphereChart::unit();
        let f = AngleField::Meridian(ZetaSpec::meridian(1, 0.2).with_fourier(vec![(0.1, 0.2)]));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = SpherePoint::new(rng.gen_range(0.3..2.8), rng.gen_range(0.0..TAU));
            let u = TangentVector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let v = TangentVector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let fd = FdConfig::default();
            let lhs = chart.covariant_derivative(&f, u + v, p, fd).unwrap();
            let rhs = chart.covariant_derivative(&f, u, p, fd).unwrap() + chart.covariant_derivative(&f, v, p, fd).unwrap();
            assert!((lhs - rhs).max_abs() < 1e-8);
        }
    }

    #[test]
    fn slit_fields_reject_cut() {
        let lat = AngleField::latitude(0.0);
        assert_eq!(lat.domain(), FieldDomain::Slit { phi: 0.0 });
        assert!(lat.eval(SpherePoint::new(1.0, 0.0)).unwrap_err().is_domain());
        assert_eq!(lat.winding(), None);
        assert_eq!(AngleField::meridian(4, 0.0).winding(), Some(4));
    }

    #[test]
    fn ttype_meridian_matches_closed_form() {
        let zeta = ZetaSpec::meridian(2, 0.0).with_fourier(vec![(0.2, 0.1)]);
        let t = AngleField::TType(TTypeSpec::new((1.0, 0.0), InitialData::Meridian(zeta.clone())).unwrap());
        let m = AngleField::Meridian(zeta);
        for (theta, phi) in [(0.2, 0.5), (1.9, 4.0), (2.9, 6.0)] {
            let p = SpherePoint::new(theta, phi);
            let (a, b) = t.eval(p).unwrap();
            let (ea, eb) = m.eval(p).unwrap();
            assert!((a - ea).abs() < 1e-7 && (b - eb).abs() < 1e-7);
        }
        assert_eq!(t.domain(), FieldDomain::Full);
        assert_eq!(t.winding(), Some(2));
    }
}
