//! The round sphere of radius `r` in colatitude/longitude coordinates
//! `(theta, phi)` and its Mercator conformal chart `z = x + i phi`.
//!
//! Metric: `r^2 dtheta^2 + r^2 sin^2(theta) dphi^2 = lambda (dx^2 + dphi^2)`
//! with `lambda = r^2 sin^2(theta)` and `dtheta = sin(theta) dx`.
//!
//! Fields are described by frame coefficients `(a, b)` against the
//! orthonormal frame `e_theta = (1/r) d_theta`, `e_phi = 1/(r sin theta) d_phi`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolError};

/// Points closer than this to a pole are rejected by pointwise geometry.
pub const DEFAULT_POLE_EPS: f64 = 1e-9;

/// Default central-difference step in `(theta, phi)`.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Default step in the conformal chart for second derivatives (curvature).
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-3;

/// Second differences below this step are swamped by round-off.
pub const MIN_CURVATURE_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub theta: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub const fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Moves the point by `t * v` in coordinates (a straight coordinate line).
    pub fn offset(self, v: TangentVector, t: f64) -> Self {
        Self {
            theta: self.theta + t * v.d_theta,
            phi: self.phi + t * v.d_phi,
        }
    }
}

/// A tangent vector in the coordinate basis `(d_theta, d_phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TangentVector {
    pub d_theta: f64,
    pub d_phi: f64,
}

impl TangentVector {
    pub const ZERO: TangentVector = TangentVector { d_theta: 0.0, d_phi: 0.0 };

    pub const fn new(d_theta: f64, d_phi: f64) -> Self {
        Self { d_theta, d_phi }
    }

    pub fn max_abs(self) -> f64 {
        self.d_theta.abs().max(self.d_phi.abs())
    }
}

impl Add for TangentVector {
    type Output = TangentVector;
    fn add(self, o: TangentVector) -> TangentVector {
        TangentVector::new(self.d_theta + o.d_theta, self.d_phi + o.d_phi)
    }
}

impl Sub for TangentVector {
    type Output = TangentVector;
    fn sub(self, o: TangentVector) -> TangentVector {
        TangentVector::new(self.d_theta - o.d_theta, self.d_phi - o.d_phi)
    }
}

impl Neg for TangentVector {
    type Output = TangentVector;
    fn neg(self) -> TangentVector {
        TangentVector::new(-self.d_theta, -self.d_phi)
    }
}

impl Mul<TangentVector> for f64 {
    type Output = TangentVector;
    fn mul(self, v: TangentVector) -> TangentVector {
        TangentVector::new(self * v.d_theta, self * v.d_phi)
    }
}

/// Anything that yields unit frame coefficients `(a, b)` at a point.
pub trait FrameField {
    fn frame(&self, p: SpherePoint) -> Result<(f64, f64)>;
}

impl<F> FrameField for F
where
    F: Fn(SpherePoint) -> Result<(f64, f64)>,
{
    fn frame(&self, p: SpherePoint) -> Result<(f64, f64)> {
        self(p)
    }
}

/// Central-difference settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub step: f64,
    /// Apply one level of Richardson extrapolation, `(4 D(h/2) - D(h)) / 3`.
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: DEFAULT_FD_STEP, richardson: true }
    }
}

impl FdConfig {
    pub fn plain(step: f64) -> Self {
        Self { step, richardson: false }
    }

    /// Derivative of `g` at `t = 0` where `g(t)` is a pair-valued function.
    pub(crate) fn derivative2<G>(&self, g: G) -> Result<[f64; 2]>
    where
        G: Fn(f64) -> Result<[f64; 2]>,
    {
        let central = |h: f64| -> Result<[f64; 2]> {
            let plus = g(h)?;
            let minus = g(-h)?;
            Ok([(plus[0] - minus[0]) / (2.0 * h), (plus[1] - minus[1]) / (2.0 * h)])
        };
        let coarse = central(self.step)?;
        if !self.richardson {
            return Ok(coarse);
        }
        let fine = central(0.5 * self.step)?;
        Ok([
            (4.0 * fine[0] - coarse[0]) / 3.0,
            (4.0 * fine[1] - coarse[1]) / 3.0,
        ])
    }
}

/// Index of a coordinate in Christoffel tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Theta = 0,
    Phi = 1,
}

/// Christoffel symbols `gamma[k][i][j]` with `nabla_i d_j = gamma[k][i][j] d_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelTable {
    pub gamma: [[[f64; 2]; 2]; 2],
}

impl ChristoffelTable {
    pub fn symbol(&self, k: Coord, i: Coord, j: Coord) -> f64 {
        self.gamma[k as usize][i as usize][j as usize]
    }

    /// `nabla_{d_i} d_j` as a coordinate vector.
    pub fn nabla(&self, i: Coord, j: Coord) -> TangentVector {
        TangentVector::new(
            self.gamma[0][i as usize][j as usize],
            self.gamma[1][i as usize][j as usize],
        )
    }

    /// Coefficient `cot(theta)` of `nabla_theta d_phi = nabla_phi d_theta`.
    pub fn theta_phi(&self) -> f64 {
        self.gamma[1][0][1]
    }

    /// Coefficient `-cos(theta) sin(theta)` of `nabla_phi d_phi` along `d_theta`.
    pub fn phi_phi(&self) -> f64 {
        self.gamma[0][1][1]
    }

    /// `Gamma^k_ij v^i w^j`.
    pub fn contract(&self, v: TangentVector, w: TangentVector) -> TangentVector {
        let vi = [v.d_theta, v.d_phi];
        let wj = [w.d_theta, w.d_phi];
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *o += self.gamma[k][i][j] * vi[i] * wj[j];
                }
            }
        }
        TangentVector::new(out[0], out[1])
    }
}

/// The radius-`r` sphere with a pole guard band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereChart {
    radius: f64,
    pole_eps: f64,
}

impl Default for SphereChart {
    fn default() -> Self {
        Self::unit()
    }
}

impl SphereChart {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(VolError::Invalid(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { radius, pole_eps: DEFAULT_POLE_EPS })
    }

    pub fn unit() -> Self {
        Self { radius: 1.0, pole_eps: DEFAULT_POLE_EPS }
    }

    pub fn with_pole_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(VolError::Invalid(format!("pole guard {eps} must lie in (0, 0.5)")));
        }
        self.pole_eps = eps;
        Ok(self)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn pole_eps(&self) -> f64 {
        self.pole_eps
    }

    /// Rejects colatitudes outside `[eps, pi - eps]`.
    pub fn check_theta(&self, theta: f64) -> Result<()> {
        check_theta(theta, self.pole_eps)
    }

    pub fn conformal_factor(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        let s = theta.sin();
        Ok(self.radius * self.radius * s * s)
    }

    /// Diagonal metric coefficients `(g_theta_theta, g_phi_phi)`.
    pub fn metric(&self, theta: f64) -> Result<[f64; 2]> {
        self.check_theta(theta)?;
        let r2 = self.radius * self.radius;
        let s = theta.sin();
        Ok([r2, r2 * s * s])
    }

    pub fn inner(&self, theta: f64, u: TangentVector, v: TangentVector) -> Result<f64> {
        let [g_tt, g_pp] = self.metric(theta)?;
        Ok(g_tt * u.d_theta * v.d_theta + g_pp * u.d_phi * v.d_phi)
    }

    /// Coordinate vector of `a e_theta + b e_phi`.
    pub fn frame_vector(&self, theta: f64, a: f64, b: f64) -> TangentVector {
        TangentVector::new(a / self.radius, b / (self.radius * theta.sin()))
    }

    /// Frame coefficients `(a, b)` of a coordinate vector.
    pub fn frame_coefficients(&self, theta: f64, v: TangentVector) -> (f64, f64) {
        (self.radius * v.d_theta, self.radius * theta.sin() * v.d_phi)
    }

    pub fn christoffel(&self, theta: f64) -> Result<ChristoffelTable> {
        christoffel(theta, self.pole_eps)
    }

    /// Gauss curvature `K = -(2/lambda) d^2 log(lambda) / dz dzbar`, evaluated by
    /// central second differences of `log lambda` in the Mercator chart with one
    /// Richardson level. `step` is measured in the chart abscissa `x`.
    pub fn gauss_curvature(&self, p: SpherePoint, step: f64) -> Result<f64> {
        if !(step.is_finite() && step >= MIN_CURVATURE_STEP) {
            return Err(VolError::StepUnderflow { step, min: MIN_CURVATURE_STEP });
        }
        self.check_theta(p.theta)?;
        let x0 = mercator_x_unchecked(p.theta);
        let r2 = self.radius * self.radius;
        // lambda in chart coordinates; phi enters only through the chart point.
        let log_lambda = |x: f64, _phi: f64| {
            let s = theta_of_x(x).sin();
            (r2 * s * s).ln()
        };
        let second = |h: f64| {
            let f0 = log_lambda(x0, p.phi);
            let dxx = (log_lambda(x0 + h, p.phi) - 2.0 * f0 + log_lambda(x0 - h, p.phi)) / (h * h);
            let dpp = (log_lambda(x0, p.phi + h) - 2.0 * f0 + log_lambda(x0, p.phi - h)) / (h * h);
            dxx + dpp
        };
        let coarse = second(step);
        let fine = second(0.5 * step);
        let laplacian = (4.0 * fine - coarse) / 3.0;
        let lambda = self.conformal_factor(p.theta)?;
        // d^2/dz dzbar = (1/4) laplacian
        Ok(-(2.0 / lambda) * 0.25 * laplacian)
    }

    /// `nabla_dir X` at `p` for the unit field with frame coefficients `(a, b)`.
    ///
    /// Coordinate components of `X` are differenced centrally (only along the
    /// coordinates that `dir` actually uses), then the Christoffel terms are added.
    pub fn covariant_derivative<F: FrameField + ?Sized>(
        &self,
        field: &F,
        dir: TangentVector,
        p: SpherePoint,
        fd: FdConfig,
    ) -> Result<TangentVector> {
        self.check_theta(p.theta)?;
        let coords = |q: SpherePoint| -> Result<[f64; 2]> {
            self.check_theta(q.theta)?;
            let (a, b) = field.frame(q)?;
            let v = self.frame_vector(q.theta, a, b);
            Ok([v.d_theta, v.d_phi])
        };
        let here = coords(p)?;
        let x = TangentVector::new(here[0], here[1]);

        let mut deriv = TangentVector::ZERO;
        if dir.d_theta != 0.0 {
            let d = fd.derivative2(|t| coords(SpherePoint::new(p.theta + t, p.phi)))?;
            deriv = deriv + dir.d_theta * TangentVector::new(d[0], d[1]);
        }
        if dir.d_phi != 0.0 {
            let d = fd.derivative2(|t| coords(SpherePoint::new(p.theta, p.phi + t)))?;
            deriv = deriv + dir.d_phi * TangentVector::new(d[0], d[1]);
        }
        let gamma = self.christoffel(p.theta)?;
        Ok(deriv + gamma.contract(dir, x))
    }
}

pub(crate) fn check_theta(theta: f64, eps: f64) -> Result<()> {
    if theta.is_finite() && theta >= eps && theta <= PI - eps {
        Ok(())
    } else {
        Err(VolError::PoleDomain { theta, eps })
    }
}

/// `lambda = r^2 sin^2(theta)`.
pub fn conformal_factor(theta: f64, r: f64) -> Result<f64> {
    SphereChart::new(r)?.conformal_factor(theta)
}

/// Mercator abscissa `x = log tan(theta/2)`, normalised so that `x(pi/2) = 0`.
pub fn mercator_x(theta: f64) -> Result<f64> {
    check_theta(theta, DEFAULT_POLE_EPS)?;
    Ok(mercator_x_unchecked(theta))
}

pub(crate) fn mercator_x_unchecked(theta: f64) -> f64 {
    (0.5 * theta).tan().ln()
}

/// Inverse of [`mercator_x`]: `theta = 2 atan(e^x)`.
pub fn theta_of_x(x: f64) -> f64 {
    2.0 * x.exp().atan()
}

/// Levi-Civita connection of the round sphere (independent of the radius).
pub fn christoffel(theta: f64, pole_eps: f64) -> Result<ChristoffelTable> {
    check_theta(theta, pole_eps)?;
    let (s, c) = theta.sin_cos();
    let cot = c / s;
    let mut gamma = [[[0.0; 2]; 2]; 2];
    gamma[0][1][1] = -c * s;
    gamma[1][0][1] = cot;
    gamma[1][1][0] = cot;
    Ok(ChristoffelTable { gamma })
}
