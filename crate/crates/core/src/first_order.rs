//! The A-function, its normalisation `m = A / sqrt(1 + |A|^2)` ("magnus"),
//! and the three residual operators built from it.
//!
//! With `(X, Y)` the direct orthonormal frame of the field,
//! `A0 = <nabla_X X, Y>`, `A1 = <nabla_Y X, Y>` and `A = A1 + i A0`.
//!
//! * Cauchy–Riemann residual: `d m / d zbar = (1/2)(d_x + i d_phi) m` in the
//!   Mercator chart.
//! * Euler–Lagrange residual: `X(A0 / w) + Y(A1 / w)`, `w = sqrt(1 + |A|^2)`.
//! * Real-part residual: `X(A1 / w) - Y(A0 / w)`.
//!
//! The last two are the imaginary and real parts of `dm(X + iY)`, and since
//! `X + iY = 2 e^{-i alpha} d_zbar / (r sin theta)` they are controlled by the
//! Cauchy–Riemann residual.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VolError};
use crate::fields::{orthonormal_complement, AngleField, FieldDomain, LatitudeSpec, ZetaSpec};
use crate::geometry::{
    check_theta, mercator_x_unchecked, theta_of_x, FdConfig, FrameField, SphereChart, SpherePoint,
    DEFAULT_FD_STEP,
};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AComponents {
    pub a0: f64,
    pub a1: f64,
}

impl AComponents {
    pub const fn new(a0: f64, a1: f64) -> Self {
        Self { a0, a1 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0 * self.a0 + self.a1 * self.a1
    }

    /// `A = A1 + i A0`.
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.a1, self.a0)
    }

    /// Inverse of [`magnus`]; requires `|m| < 1`.
    pub fn from_magnus(m: Complex64) -> Result<Self> {
        let n2 = m.norm_sqr();
        if !(n2 < 1.0) {
            return Err(VolError::Invalid(format!("|m| = {} is not below 1", n2.sqrt())));
        }
        let a = m / (1.0 - n2).sqrt();
        Ok(Self::new(a.im, a.re))
    }
}

/// `A / sqrt(1 + |A|^2)`, of modulus strictly below one.
pub fn magnus(a: AComponents) -> Complex64 {
    let n2 = a.norm_sqr();
    if n2.is_infinite() {
        // keep the modulus below one for extreme inputs
        let big = a.a0.abs().max(a.a1.abs());
        let (s0, s1) = (a.a0 / big, a.a1 / big);
        let w = (s0 * s0 + s1 * s1).sqrt();
        return Complex64::new(s1 / w, s0 / w) * (1.0 - f64::EPSILON);
    }
    a.as_complex() / (1.0 + n2).sqrt()
}

/// A-components from the covariant derivative of an arbitrary unit field.
pub fn a_components_generic<F: FrameField + ?Sized>(
    chart: &SphereChart,
    field: &F,
    p: SpherePoint,
    fd: FdConfig,
) -> Result<AComponents> {
    chart.check_theta(p.theta)?;
    let (a, b) = field.frame(p)?;
    let (ya, yb) = orthonormal_complement(a, b)?;
    let x = chart.frame_vector(p.theta, a, b);
    let y = chart.frame_vector(p.theta, ya, yb);
    let nabla_x = chart.covariant_derivative(field, x, p, fd)?;
    let nabla_y = chart.covariant_derivative(field, y, p, fd)?;
    Ok(AComponents::new(
        chart.inner(p.theta, nabla_x, y)?,
        chart.inner(p.theta, nabla_y, y)?,
    ))
}

/// A-components of a field with angle `alpha` from its partial derivatives:
/// `A0 = (a/r) alpha_theta + b (alpha_phi + cos theta)/(r sin theta)`,
/// `A1 = -(b/r) alpha_theta + a (alpha_phi + cos theta)/(r sin theta)`.
pub fn a_components_from_angle(theta: f64, alpha: f64, alpha_theta: f64, alpha_phi: f64, r: f64) -> AComponents {
    let (b, a) = alpha.sin_cos();
    let (s, c) = theta.sin_cos();
    let q = (alpha_phi + c) / (r * s);
    AComponents::new(a * alpha_theta / r + b * q, -b * alpha_theta / r + a * q)
}

/// Closed form for meridian-parallel fields:
/// `A0 = sin(zeta)(zeta' + cos theta)/(r sin theta)`, `A1 = cos(zeta)(...)`.
pub fn a_components_meridian(spec: &ZetaSpec, theta: f64, phi: f64, r: f64) -> Result<AComponents> {
    check_theta(theta, crate::geometry::DEFAULT_POLE_EPS)?;
    let (sz, cz) = spec.zeta(phi).sin_cos();
    let (s, c) = theta.sin_cos();
    let q = (spec.zeta_prime(phi) + c) / (r * s);
    Ok(AComponents::new(sz * q, cz * q))
}

/// Closed form for the latitude field: `A0 = a phi sin(theta)/r`, `A1 = -b phi sin(theta)/r`.
pub fn a_components_latitude(spec: &LatitudeSpec, theta: f64, phi: f64, r: f64) -> Result<AComponents> {
    let (a, b) = crate::fields::eval_latitude(spec, SpherePoint::new(theta, phi))?;
    let w = phi * theta.sin() / r;
    Ok(AComponents::new(a * w, -b * w))
}

/// Closed-form A-components when the family has them.
pub fn a_components_closed(field: &AngleField, p: SpherePoint, r: f64) -> Option<Result<AComponents>> {
    match field {
        AngleField::Meridian(z) => Some(a_components_meridian(z, p.theta, p.phi, r)),
        AngleField::Latitude(l) => Some(a_components_latitude(l, p.theta, p.phi, r)),
        _ => None,
    }
}

/// Directional identity along `X + iY` for `zeta = k phi + phi0`:
/// `(1/r) f'(theta) - k f / (r sin theta)` with
/// `f = (k + cos theta) / sqrt(r^2 sin^2 theta + (k + cos theta)^2)`. Purely real.
pub fn meridian_directional_identity(spec: &ZetaSpec, theta: f64, r: f64) -> Result<Complex64> {
    if !spec.is_pure() {
        return Err(VolError::Invalid("identity holds for zeta = k phi + phi0 only".into()));
    }
    check_theta(theta, crate::geometry::DEFAULT_POLE_EPS)?;
    let k = spec.k as f64;
    let (s, c) = theta.sin_cos();
    let u = k + c;
    let d = r * r * s * s + u * u;
    let f = u / d.sqrt();
    let f_prime = -r * r * s * (s * s + u * c) / (d * d.sqrt());
    Ok(Complex64::new(f_prime / r - k * f / (r * s), 0.0))
}

/// How the residual operators obtain A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ASource {
    /// Closed forms where available, otherwise finite differences.
    #[default]
    Auto,
    /// Always through the covariant derivative.
    Generic,
}

/// Anything the residual operators can act on: a frame and its A-components.
pub trait FirstOrderField: Sync {
    fn frame_at(&self, p: SpherePoint) -> Result<(f64, f64)>;
    fn a_at(&self, chart: &SphereChart, p: SpherePoint) -> Result<AComponents>;
}

/// An [`AngleField`] together with the rule for computing its A-components.
#[derive(Debug, Clone, Copy)]
pub struct FieldInput<'a> {
    pub field: &'a AngleField,
    pub source: ASource,
    pub fd: FdConfig,
}

impl<'a> FieldInput<'a> {
    pub fn new(field: &'a AngleField) -> Self {
        Self { field, source: ASource::Auto, fd: FdConfig::default() }
    }

    pub fn with_source(mut self, source: ASource) -> Self {
        self.source = source;
        self
    }
}

impl FirstOrderField for FieldInput<'_> {
    fn frame_at(&self, p: SpherePoint) -> Result<(f64, f64)> {
        self.field.eval(p)
    }

    fn a_at(&self, chart: &SphereChart, p: SpherePoint) -> Result<AComponents> {
        if self.source == ASource::Auto {
            if let Some(a) = a_components_closed(self.field, p, chart.radius()) {
                return a;
            }
        }
        a_components_generic(chart, self.field, p, self.fd)
    }
}

/// A frame and an independently prescribed A (for testing the operators).
pub struct Synthetic<F, G> {
    pub frame: F,
    pub a: G,
}

impl<F, G> FirstOrderField for Synthetic<F, G>
where
    F: Fn(SpherePoint) -> Result<(f64, f64)> + Sync,
    G: Fn(SpherePoint) -> Result<AComponents> + Sync,
{
    fn frame_at(&self, p: SpherePoint) -> Result<(f64, f64)> {
        (self.frame)(p)
    }

    fn a_at(&self, _chart: &SphereChart, p: SpherePoint) -> Result<AComponents> {
        (self.a)(p)
    }
}

fn magnus_at<F: FirstOrderField + ?Sized>(field: &F, chart: &SphereChart, p: SpherePoint) -> Result<Complex64> {
    Ok(magnus(field.a_at(chart, p)?))
}

/// `d m / d zbar` by central differences in the Mercator chart.
pub fn cr_residual<F: FirstOrderField + ?Sized>(
    field: &F,
    chart: &SphereChart,
    p: SpherePoint,
    fd: FdConfig,
) -> Result<Complex64> {
    chart.check_theta(p.theta)?;
    let x0 = mercator_x_unchecked(p.theta);
    let pair = |m: Complex64| [m.re, m.im];
    let dx = fd.derivative2(|t| Ok(pair(magnus_at(field, chart, SpherePoint::new(theta_of_x(x0 + t), p.phi))?)))?;
    let dphi = fd.derivative2(|t| Ok(pair(magnus_at(field, chart, SpherePoint::new(p.theta, p.phi + t))?)))?;
    let dx = Complex64::new(dx[0], dx[1]);
    let dphi = Complex64::new(dphi[0], dphi[1]);
    Ok(0.5 * (dx + Complex64::i() * dphi))
}

/// `X(m)` and `Y(m)` of the normalised components `(A0/w, A1/w)`, by central
/// differences along straight coordinate lines `p +- h X`, `p +- h Y`.
fn frame_derivatives<F: FirstOrderField + ?Sized>(
    field: &F,
    chart: &SphereChart,
    p: SpherePoint,
    step: f64,
) -> Result<([f64; 2], [f64; 2])> {
    chart.check_theta(p.theta)?;
    let (a, b) = field.frame_at(p)?;
    let (ya, yb) = orthonormal_complement(a, b)?;
    let xv = chart.frame_vector(p.theta, a, b);
    let yv = chart.frame_vector(p.theta, ya, yb);
    let normalised = |q: SpherePoint| -> Result<[f64; 2]> {
        let m = magnus_at(field, chart, q)?;
        Ok([m.im, m.re])
    };
    let along = |v| -> Result<[f64; 2]> {
        let plus = normalised(p.offset(v, step))?;
        let minus = normalised(p.offset(v, -step))?;
        Ok([(plus[0] - minus[0]) / (2.0 * step), (plus[1] - minus[1]) / (2.0 * step)])
    };
    Ok((along(xv)?, along(yv)?))
}

/// `X(A0/w) + Y(A1/w)`.
pub fn el_residual<F: FirstOrderField + ?Sized>(field: &F, chart: &SphereChart, p: SpherePoint, step: f64) -> Result<f64> {
    let (dx, dy) = frame_derivatives(field, chart, p, step)?;
    Ok(dx[0] + dy[1])
}

/// `X(A1/w) - Y(A0/w)`.
pub fn realpart_residual<F: FirstOrderField + ?Sized>(field: &F, chart: &SphereChart, p: SpherePoint, step: f64) -> Result<f64> {
    let (dx, dy) = frame_derivatives(field, chart, p, step)?;
    Ok(dx[1] - dy[0])
}

/// `dm(X + iY) = realpart + i el` recovered from the Cauchy–Riemann residual.
pub fn directional_from_cr(cr: Complex64, alpha: f64, theta: f64, r: f64) -> Complex64 {
    2.0 * Complex64::from_polar(1.0, -alpha) * cr / (r * theta.sin())
}

/// Sampling lattice for residual sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Distance kept from each pole.
    pub eps: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_theta: 101, n_phi: 101, eps: 0.05 }
    }
}

impl GridSpec {
    /// `theta` nodes spanning `[eps, pi - eps]` inclusively.
    pub fn thetas(&self) -> Vec<f64> {
        linspace(self.eps, PI - self.eps, self.n_theta)
    }

    /// `2 pi j / n` on full domains; `[cut + eps, cut + 2 pi - eps]` inclusively on slit domains.
    pub fn phis(&self, domain: FieldDomain) -> Vec<f64> {
        match domain {
            FieldDomain::Full => (0..self.n_phi).map(|j| TAU * j as f64 / self.n_phi as f64).collect(),
            FieldDomain::Slit { phi } => linspace(phi + self.eps, phi + TAU - self.eps, self.n_phi),
        }
    }

    pub fn points(&self, domain: FieldDomain) -> Vec<SpherePoint> {
        let phis = self.phis(domain);
        self.thetas()
            .into_iter()
            .flat_map(|t| phis.iter().map(move |&p| SpherePoint::new(t, p)))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_theta < 2 || self.n_phi < 2 || !(self.eps > 0.0 && self.eps < PI / 2.0) {
            return Err(VolError::Invalid(format!("bad residual grid {self:?}")));
        }
        Ok(())
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualConfig {
    /// Step of the directional differences in the Euler–Lagrange and real-part residuals.
    pub step: f64,
    /// Differences for the Cauchy–Riemann residual.
    pub cr_fd: FdConfig,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        Self { step: DEFAULT_FD_STEP, cr_fd: FdConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub theta: f64,
    pub phi: f64,
    pub cr: Complex64,
    pub el: f64,
    pub realpart: f64,
}

/// Largest absolute value and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    pub value: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SupNorm {
    fn of<I: Iterator<Item = (f64, f64, f64)>>(it: I) -> Self {
        let mut best = SupNorm { value: 0.0, theta: f64::NAN, phi: f64::NAN };
        for (v, theta, phi) in it {
            let v = v.abs();
            let better = v > best.value
                || (v == best.value && (best.theta.is_nan() || (theta, phi) < (best.theta, best.phi)));
            if better {
                best = SupNorm { value: v, theta, phi };
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub grid: GridSpec,
    pub domain: FieldDomain,
    pub radius: f64,
    pub config: ResidualConfig,
    pub sup_cr: SupNorm,
    pub sup_el: SupNorm,
    pub sup_realpart: SupNorm,
    pub points: Vec<ResidualPoint>,
}

impl ResidualReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,phi,cr_re,cr_im,el,realpart\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{},{},{}", p.theta, p.phi, p.cr.re, p.cr.im, p.el, p.realpart);
        }
        out
    }
}

/// Evaluates all three residuals on every grid point.
pub fn residual_report<F: FirstOrderField + ?Sized>(
    field: &F,
    domain: FieldDomain,
    chart: &SphereChart,
    grid: GridSpec,
    config: ResidualConfig,
) -> Result<ResidualReport> {
    grid.validate()?;
    let points = grid.points(domain);
    let evaluated: Vec<ResidualPoint> = points
        .par_iter()
        .map(|&p| {
            let cr = cr_residual(field, chart, p, config.cr_fd)?;
            let (dx, dy) = frame_derivatives(field, chart, p, config.step)?;
            Ok(ResidualPoint { theta: p.theta, phi: p.phi, cr, el: dx[0] + dy[1], realpart: dx[1] - dy[0] })
        })
        .collect::<Result<_>>()?;
    let sup = |f: fn(&ResidualPoint) -> f64| SupNorm::of(evaluated.iter().map(|p| (f(p), p.theta, p.phi)));
    Ok(ResidualReport {
        grid,
        domain,
        radius: chart.radius(),
        config,
        sup_cr: sup(|p| p.cr.norm()),
        sup_el: sup(|p| p.el),
        sup_realpart: sup(|p| p.realpart),
        points: evaluated,
    })
}

/// Residual report of an [`AngleField`] with the default A-source.
pub fn field_residuals(field: &AngleField, chart: &SphereChart, grid: GridSpec, config: ResidualConfig) -> Result<ResidualReport> {
    residual_report(&FieldInput::new(field), field.domain(), chart, grid, config)
}
