//! The volume functional `vol(X) = int sqrt(1 + A0^2 + A1^2) dA`, its closed
//! reductions, the classical bounds, and the region `Omega` on which the
//! latitude field beats the coordinate field.
//!
//! In terms of the frame angle the density against `dtheta dphi` is
//! `r sqrt(r^2 sin^2 theta + sin^2 theta alpha_theta^2 + (alpha_phi + cos theta)^2)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VolError};
use crate::fields::AngleField;
use crate::first_order::{a_components_closed, a_components_generic};
use crate::geometry::{FdConfig, SphereChart, SpherePoint};
use crate::quadrature::{adaptive_simpson, neumaier_sum, tensor_integrate, GaussLegendre, NeumaierSum};

/// Round-off floor of the refinement error estimate, relative to the value.
const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Seed of the `Omega` sampling check.
pub const OMEGA_SAMPLE_SEED: u64 = 0x00C0_FFEE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainRegion {
    /// `(0, pi) x (0, 2 pi)`.
    Full,
    Rectangle { theta: (f64, f64), phi: (f64, f64) },
    /// `{0 < phi < 2 pi, phi sin^2(theta) < |cos(theta)|}`.
    Omega,
}

impl DomainRegion {
    pub fn rectangle(theta: (f64, f64), phi: (f64, f64)) -> Result<Self> {
        let ok = theta.0 >= 0.0 && theta.1 <= PI && theta.0 < theta.1 && phi.0 < phi.1 && phi.1 - phi.0 <= TAU + 1e-12;
        if !ok || !(theta.0.is_finite() && theta.1.is_finite() && phi.0.is_finite() && phi.1.is_finite()) {
            return Err(VolError::Invalid(format!("rectangle {theta:?} x {phi:?} is not a nonempty subset of D")));
        }
        Ok(DomainRegion::Rectangle { theta, phi })
    }

    /// Euclidean area `int dtheta dphi`.
    pub fn euclidean_area(&self) -> f64 {
        match *self {
            DomainRegion::Full => 2.0 * PI * PI,
            DomainRegion::Rectangle { theta, phi } => (theta.1 - theta.0) * (phi.1 - phi.0),
            DomainRegion::Omega => omega_euclidean_area(),
        }
    }

    /// `r^2 int sin(theta) dtheta dphi`.
    pub fn spherical_area(&self, r: f64) -> f64 {
        let r2 = r * r;
        match *self {
            DomainRegion::Full => 4.0 * PI * r2,
            DomainRegion::Rectangle { theta, phi } => r2 * (theta.0.cos() - theta.1.cos()) * (phi.1 - phi.0),
            DomainRegion::Omega => {
                // int_0^pi sin(theta) min(2 pi, |cos|/sin^2) dtheta, symmetric halves
                let t0 = theta0_solve();
                let polar = TAU * (1.0 - t0.cos());
                let band = -(t0.sin().ln()); // int_{t0}^{pi/2} cos/sin
                r2 * 2.0 * (polar + band)
            }
        }
    }

    pub fn contains(&self, theta: f64, phi: f64) -> bool {
        match *self {
            DomainRegion::Full => theta > 0.0 && theta < PI && (0.0..TAU).contains(&phi),
            DomainRegion::Rectangle { theta: t, phi: p } => theta >= t.0 && theta <= t.1 && phi >= p.0 && phi <= p.1,
            DomainRegion::Omega => omega_contains(theta, phi),
        }
    }

    fn theta_phi_box(&self) -> ((f64, f64), (f64, f64)) {
        match *self {
            DomainRegion::Full | DomainRegion::Omega => ((0.0, PI), (0.0, TAU)),
            DomainRegion::Rectangle { theta, phi } => (theta, phi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    TensorGaussLegendre,
    AdaptiveSimpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    /// Panels in `theta` and `phi` (tensor rule).
    pub panels: (usize, usize),
    /// Gauss points per panel and direction.
    pub points: usize,
    /// Relative tolerance; the absolute budget is `tolerance * max(1, |value|)`.
    pub tolerance: f64,
    /// Evaluate pole endpoints of the adaptive rule at the pole guard instead.
    pub pole_clamp: bool,
    /// Smallest cell area of the predicate-region subdivision.
    pub min_cell_area: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::TensorGaussLegendre,
            panels: (256, 256),
            points: 4,
            tolerance: 1e-8,
            pole_clamp: true,
            min_cell_area: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn with_panels(mut self, n_theta: usize, n_phi: usize) -> Self {
        self.panels = (n_theta, n_phi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels.0 < 4 || self.panels.1 < 4 {
            return Err(VolError::Invalid(format!("at least 4 panels per direction required, got {:?}", self.panels)));
        }
        if self.points == 0 || !(self.tolerance > 0.0) || !(self.min_cell_area > 0.0) {
            return Err(VolError::Invalid("quadrature points, tolerance and cell area must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeResult {
    pub value: f64,
    /// Absolute error estimate.
    pub error: f64,
    pub region: DomainRegion,
    pub radius: f64,
    pub quadrature: QuadratureSpec,
}

/// `sqrt(1 + |A|^2) r^2 sin(theta)`, the density against `dtheta dphi`.
pub fn volume_integrand(field: &AngleField, p: SpherePoint, chart: &SphereChart) -> Result<f64> {
    let r = chart.radius();
    let a = match a_components_closed(field, p, r) {
        Some(a) => a?,
        None => a_components_generic(chart, field, p, FdConfig::default())?,
    };
    Ok((1.0 + a.norm_sqr()).sqrt() * r * r * p.theta.sin())
}

/// Integrates `f(theta, phi)` over a region. `f` must be continuous up to the
/// closure of rectangles; predicate regions tolerate a kink across the boundary.
pub fn integrate_region<F>(f: &F, region: &DomainRegion, spec: &QuadratureSpec, pole_eps: f64) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    spec.validate()?;
    if let DomainRegion::Omega = region {
        return integrate_omega(f, spec);
    }
    let (theta, phi) = region.theta_phi_box();
    let (value, error) = match spec.rule {
        QuadratureRule::TensorGaussLegendre => {
            let rule = GaussLegendre::new(spec.points);
            let fine = tensor_integrate(f, &rule, theta, phi, spec.panels)?;
            let coarse = tensor_integrate(f, &rule, theta, phi, ((spec.panels.0 / 2).max(1), (spec.panels.1 / 2).max(1)))?;
            (fine, (fine - coarse).abs() + ROUNDOFF_FLOOR * fine.abs())
        }
        QuadratureRule::AdaptiveSimpson => {
            let clamp = |t: f64| if spec.pole_clamp { t.clamp(pole_eps, PI - pole_eps) } else { t };
            let budget = spec.tolerance;
            let depth = 30;
            let failure = std::sync::Mutex::new(None);
            let inner = |t: f64| -> f64 {
                if failure.lock().unwrap().is_some() {
                    return f64::NAN;
                }
                let g = |p: f64| match f(clamp(t), p) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        f64::NAN
                    }
                };
                match adaptive_simpson(&g, phi.0, phi.1, budget / (theta.1 - theta.0), depth) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        f64::NAN
                    }
                }
            };
            let value = adaptive_simpson(&inner, theta.0, theta.1, budget, depth);
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            (value?, 2.0 * budget)
        }
    };
    if !value.is_finite() {
        return Err(VolError::NonConvergence { estimate: f64::INFINITY, budget: spec.tolerance });
    }
    let budget = spec.tolerance * value.abs().max(1.0);
    if error > budget {
        return Err(VolError::NonConvergence { estimate: error, budget });
    }
    Ok((value, error))
}

/// Volume of `field` over `region`.
pub fn volume(field: &AngleField, region: &DomainRegion, spec: &QuadratureSpec, chart: &SphereChart) -> Result<VolumeResult> {
    let f = |theta: f64, phi: f64| volume_integrand(field, SpherePoint::new(theta, phi), chart);
    let (value, error) = integrate_region(&f, region, spec, chart.pole_eps())?;
    Ok(VolumeResult { value, error, region: *region, radius: chart.radius(), quadrature: *spec })
}

/// `phi_extent * int r sqrt(r^2 sin^2 theta + (k + cos theta)^2) dtheta` by a
/// high-order 1-D rule. Over the full `theta` range nodes are paired about the
/// equator, which makes the result exactly even in `k`.
pub fn volume_meridian_closed(k: i64, theta: (f64, f64), phi_extent: f64, r: f64) -> f64 {
    let kf = k as f64;
    let rule = GaussLegendre::new(16);
    let panels = 64;
    let density = |s: f64, c: f64| r * (r * r * s * s + (kf + c) * (kf + c)).sqrt();
    let integral = if theta == (0.0, PI) {
        // theta = pi/2 -+ d: sin = cos d, cos = +-sin d
        let half = rule.composite_nodes(0.0, FRAC_PI_2, panels);
        neumaier_sum(half.iter().map(|&(d, w)| {
            let (sd, cd) = d.sin_cos();
            w * (density(cd, sd) + density(cd, -sd))
        }))
    } else {
        neumaier_sum(
            rule.composite_nodes(theta.0, theta.1, panels)
                .into_iter()
                .map(|(t, w)| w * density(t.sin(), t.cos())),
        )
    };
    integral * phi_extent
}

/// Full-sphere volume of `X_{m,k}` on the radius-`r` sphere.
pub fn meridian_volume(k: i64, r: f64) -> f64 {
    volume_meridian_closed(k, (0.0, PI), TAU, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub k: i64,
    pub region: DomainRegion,
    pub volume: f64,
    pub euclidean_area: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub holds: bool,
}

/// `(k - 1) area < vol(X_{m,k} | region) < (k + 1) area` on the unit sphere.
pub fn bounds_check(k: i64, region: &DomainRegion, spec: &QuadratureSpec) -> Result<BoundsReport> {
    if k < 1 {
        return Err(VolError::Invalid(format!("the sandwich bounds need k >= 1, got {k}")));
    }
    let vol = match region {
        DomainRegion::Full => meridian_volume(k, 1.0),
        _ => volume(&AngleField::meridian(k, 0.0), region, spec, &SphereChart::unit())?.value,
    };
    let area = region.euclidean_area();
    let lower = (k - 1) as f64 * area;
    let upper = (k + 1) as f64 * area;
    Ok(BoundsReport {
        k,
        region: *region,
        volume: vol,
        euclidean_area: area,
        lower,
        upper,
        lower_margin: vol - lower,
        upper_margin: upper - vol,
        holds: lower < vol && vol < upper,
    })
}

/// `(pi + |I_S| + |I_N| - 2) 2 pi`.
pub fn bcj_lower_bound(index_s: i64, index_n: i64) -> f64 {
    (PI + index_s.unsigned_abs() as f64 + index_n.unsigned_abs() as f64 - 2.0) * TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: i64,
    pub volume: f64,
    pub lower_bound_thm3: f64,
    pub upper_bound_thm3: f64,
    pub bcj_bound: f64,
}

/// One row per `k` for the meridian fields on the unit sphere.
pub fn meridian_sweep(ks: impl IntoIterator<Item = i64>) -> Vec<SweepRow> {
    ks.into_iter()
        .map(|k| SweepRow {
            k,
            volume: meridian_volume(k, 1.0),
            lower_bound_thm3: (k.abs() - 1) as f64 * 2.0 * PI * PI,
            upper_bound_thm3: (k.abs() + 1) as f64 * 2.0 * PI * PI,
            bcj_bound: bcj_lower_bound(1 + k, (1 - k).abs()),
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("k,volume,lower_bound_thm3,upper_bound_thm3,bcj_bound\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.k, r.volume, r.lower_bound_thm3, r.upper_bound_thm3, r.bcj_bound);
    }
    out
}

// ---------------------------------------------------------------------------
// Omega

/// `cos(theta) / sin^2(theta) - 2 pi`, decreasing on `(0, pi/2)`.
fn theta0_residual(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c / (s * s) - TAU
}

/// Root of `cos(theta)/sin^2(theta) = 2 pi` by bisection alone.
pub fn theta0_bisection() -> f64 {
    let (mut lo, mut hi) = (1e-3, FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if theta0_residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root by Newton's method from a coarse bracket midpoint.
pub fn theta0_newton() -> f64 {
    let mut t: f64 = 0.4;
    for _ in 0..50 {
        let (s, c) = t.sin_cos();
        // d/dtheta (cos / sin^2) = -(sin^2 + 2 cos^2) / sin^3
        let d = -(s * s + 2.0 * c * c) / (s * s * s);
        let step = theta0_residual(t) / d;
        t -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    t
}

/// The colatitude `theta0` in `(0, pi/2)` where `cos/sin^2 = 2 pi`; bisection
/// to bracket, then Newton to polish.
pub fn theta0_solve() -> f64 {
    let mut t = theta0_bisection();
    for _ in 0..3 {
        let (s, c) = t.sin_cos();
        let d = -(s * s + 2.0 * c * c) / (s * s * s);
        t -= theta0_residual(t) / d;
    }
    t
}

pub fn omega_contains(theta: f64, phi: f64) -> bool {
    let (s, c) = theta.sin_cos();
    theta > 0.0 && theta < PI && phi > 0.0 && phi < TAU && phi * s * s < c.abs()
}

/// `4 pi theta0 + 2 (1/sin(theta0) - 1)`.
pub fn omega_euclidean_area() -> f64 {
    let t0 = theta0_solve();
    2.0 * TAU * t0 + 2.0 * (1.0 / t0.sin() - 1.0)
}

pub fn omega_region() -> DomainRegion {
    DomainRegion::Omega
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Inside,
    Outside,
    Boundary,
}

/// Conservative classification of `[t0, t1] x [p0, p1]` against `Omega`.
fn classify_omega(t0: f64, t1: f64, p0: f64, p1: f64) -> Cell {
    if p1 <= 0.0 || p0 >= TAU || t1 <= 0.0 || t0 >= PI {
        return Cell::Outside;
    }
    let s2 = |t: f64| t.sin().powi(2);
    let crosses_equator = t0 <= FRAC_PI_2 && t1 >= FRAC_PI_2;
    let (s2_lo, s2_hi) = {
        let (a, b) = (s2(t0), s2(t1));
        (a.min(b), if crosses_equator { 1.0 } else { a.max(b) })
    };
    let (c_lo, c_hi) = {
        let (a, b) = (t0.cos().abs(), t1.cos().abs());
        (if crosses_equator { 0.0 } else { a.min(b) }, a.max(b))
    };
    // tiny slack keeps rounding in the bounds from misclassifying
    let slack = 1e-14;
    let inside_box = p0 >= 0.0 && p1 <= TAU && t0 >= 0.0 && t1 <= PI;
    if inside_box && p1 * s2_hi - c_lo < -slack {
        Cell::Inside
    } else if p0.max(0.0) * s2_lo - c_hi > slack {
        Cell::Outside
    } else {
        Cell::Boundary
    }
}

struct OmegaCtx<'a, F> {
    f: &'a F,
    interior: GaussLegendre,
    leaf: GaussLegendre,
    min_area: f64,
}

impl<F> OmegaCtx<'_, F>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    fn cell(&self, t: (f64, f64), p: (f64, f64), acc: &mut NeumaierSum, err: &mut f64) -> Result<()> {
        match classify_omega(t.0, t.1, p.0, p.1) {
            Cell::Outside => Ok(()),
            Cell::Inside => {
                for (x, wx) in self.interior.mapped(t.0, t.1) {
                    for (y, wy) in self.interior.mapped(p.0, p.1) {
                        acc.add(wx * wy * (self.f)(x, y)?);
                    }
                }
                Ok(())
            }
            Cell::Boundary => {
                let area = (t.1 - t.0) * (p.1 - p.0);
                if area < self.min_area {
                    let mut fmax = 0.0_f64;
                    for (x, wx) in self.leaf.mapped(t.0, t.1) {
                        for (y, wy) in self.leaf.mapped(p.0, p.1) {
                            let v = (self.f)(x, y)?;
                            fmax = fmax.max(v.abs());
                            if omega_contains(x, y) {
                                acc.add(wx * wy * v);
                            }
                        }
                    }
                    *err += area * fmax;
                    return Ok(());
                }
                let tm = 0.5 * (t.0 + t.1);
                let pm = 0.5 * (p.0 + p.1);
                self.cell((t.0, tm), (p.0, pm), acc, err)?;
                self.cell((t.0, tm), (pm, p.1), acc, err)?;
                self.cell((tm, t.1), (p.0, pm), acc, err)?;
                self.cell((tm, t.1), (pm, p.1), acc, err)
            }
        }
    }
}

/// Cell-classification integration over `Omega`. Returns the value and a
/// bound on the error contributed by boundary cells.
fn integrate_omega<F>(f: &F, spec: &QuadratureSpec) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let ctx = OmegaCtx { f, interior: GaussLegendre::new(6), leaf: GaussLegendre::new(2), min_area: spec.min_cell_area };
    let (nt, np) = (32usize, 64usize);
    let (dt, dp) = (PI / nt as f64, TAU / np as f64);
    let cells: Vec<(f64, f64)> = (0..nt * np)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / np, idx % np);
            let mut acc = NeumaierSum::new();
            let mut err = 0.0;
            ctx.cell(
                (i as f64 * dt, (i + 1) as f64 * dt),
                (j as f64 * dp, (j + 1) as f64 * dp),
                &mut acc,
                &mut err,
            )?;
            Ok((acc.value(), err))
        })
        .collect::<Result<_>>()?;
    let value = neumaier_sum(cells.iter().map(|c| c.0));
    let error = neumaier_sum(cells.iter().map(|c| c.1));
    Ok((value, error))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCheck {
    pub samples: usize,
    pub violations: usize,
    /// Largest `(1 + phi^2 sin^2) sin^2` seen; must stay below one.
    pub max_lhs: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaComparison {
    pub theta0: f64,
    pub theta0_residual: f64,
    pub vol_latitude: VolumeResult,
    /// Euclidean area by the same cell integration.
    pub vol_euclidean: VolumeResult,
    pub vol_euclidean_closed: f64,
    pub margin: f64,
    pub pointwise: PointwiseCheck,
    pub holds: bool,
}

/// Samples `n` points of `Omega` uniformly and checks `(1 + phi^2 sin^2) sin^2 < 1`.
pub fn omega_pointwise_check(n: usize, seed: u64) -> PointwiseCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = 0;
    let mut violations = 0;
    let mut max_lhs = 0.0_f64;
    while taken < n {
        let theta = rng.gen_range(0.0..PI);
        let phi = rng.gen_range(0.0..TAU);
        if !omega_contains(theta, phi) {
            continue;
        }
        taken += 1;
        let s2 = theta.sin().powi(2);
        let lhs = (1.0 + phi * phi * s2) * s2;
        max_lhs = max_lhs.max(lhs);
        if !(lhs < 1.0) {
            violations += 1;
        }
    }
    PointwiseCheck { samples: n, violations, max_lhs, seed }
}

/// `vol(X_l | Omega)` against `vol_Euc(Omega)` on the unit sphere.
pub fn omega_compare(phi0: f64, spec: &QuadratureSpec) -> Result<OmegaComparison> {
    let chart = SphereChart::unit();
    let field = AngleField::latitude(phi0);
    let region = DomainRegion::Omega;
    let vol_latitude = volume(&field, &region, spec, &chart)?;
    let (area, area_err) = integrate_region(&|_, _| Ok(1.0), &region, spec, chart.pole_eps())?;
    let vol_euclidean = VolumeResult { value: area, error: area_err, region, radius: 1.0, quadrature: *spec };
    let theta0 = theta0_solve();
    let pointwise = omega_pointwise_check(10_000, OMEGA_SAMPLE_SEED);
    let closed = omega_euclidean_area();
    let margin = closed - vol_latitude.value;
    Ok(OmegaComparison {
        theta0,
        theta0_residual: theta0_residual(theta0).abs(),
        vol_latitude,
        vol_euclidean,
        vol_euclidean_closed: closed,
        margin,
        holds: margin > vol_latitude.error && pointwise.violations == 0,
        pointwise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ZetaSpec;

    /// Complete elliptic integral of the second kind `E(m)` via the AGM.
    fn ellip_e(m: f64) -> f64 {
        if m == 1.0 {
            return 1.0;
        }
        let (mut a, mut b) = (1.0_f64, (1.0 - m).sqrt());
        let mut c = m.sqrt();
        let mut sum = 0.5 * c * c;
        let mut pow = 0.5;
        for _ in 0..40 {
            let an = 0.5 * (a + b);
            let bn = (a * b).sqrt();
            c = 0.5 * (a - b);
            pow *= 2.0;
            sum += pow * c * c;
            a = an;
            b = bn;
            if c.abs() < 1e-17 {
                break;
            }
        }
        PI / (2.0 * a) * (1.0 - sum)
    }

    #[test]
    fn closed_form_values() {
        assert!((meridian_volume(0, 1.0) - 2.0 * PI * PI).abs() < 1e-12);
        // -4 sqrt(2) pi [sqrt(1 - t)]_{-1}^{1}
        let chain = -4.0 * 2f64.sqrt() * PI * ((1.0f64 - 1.0).sqrt() - (1.0f64 + 1.0).sqrt());
        assert!((chain - 8.0 * PI).abs() < 1e-13);
        assert!((meridian_volume(1, 1.0) - chain).abs() < 1e-12);
    }

    #[test]
    fn elliptic_oracle() {
        for k in 0..8i64 {
            let kf = k as f64;
            let oracle = TAU * 2.0 * (1.0 + kf) * ellip_e(4.0 * kf / (1.0 + kf).powi(2));
            assert!((meridian_volume(k, 1.0) - oracle).abs() < 1e-10 * oracle, "k={k}");
        }
    }

    #[test]
    fn evenness_is_exact() {
        for k in 1..=10 {
            assert_eq!(meridian_volume(k, 1.0), meridian_volume(-k, 1.0));
            assert_eq!(meridian_volume(k, 0.7), meridian_volume(-k, 0.7));
        }
    }

    #[test]
    fn two_d_matches_closed() {
        let chart = SphereChart::unit();
        let spec = QuadratureSpec::default();
        for (k, expected) in [(0, 2.0 * PI * PI), (1, 8.0 * PI)] {
            let v = volume(&AngleField::meridian(k, 0.3), &DomainRegion::Full, &spec, &chart).unwrap();
            assert!((v.value - expected).abs() < 1e-8 * expected, "{k}: {}", v.value);
            assert!(v.error <= 1e-8 * expected);
        }
        let v = volume(&AngleField::meridian(2, 0.0), &DomainRegion::Full, &spec, &chart).unwrap();
        assert!((v.value - meridian_volume(2, 1.0)).abs() < 1e-8 * v.value);
    }

    #[test]
    fn latitude_density() {
        let chart = SphereChart::new(2.0).unwrap();
        let f = AngleField::latitude(0.3);
        let p = SpherePoint::new(1.1, 2.5);
        let d = volume_integrand(&f, p, &chart).unwrap();
        let expected = 2.0 * (4.0 + (2.5 * 1.1f64.sin()).powi(2)).sqrt() * 1.1f64.sin();
        assert!((d - expected).abs() < 1e-13);
        let parallel = AngleField::meridian(0, 0.0);
        let d = volume_integrand(&parallel, SpherePoint::new(FRAC_PI_2, 0.1), &SphereChart::unit()).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn refinement_within_estimate() {
        let chart = SphereChart::unit();
        let f = AngleField::Meridian(ZetaSpec::meridian(1, 0.0).with_fourier(vec![(0.2, 0.1)]));
        let coarse = volume(&f, &DomainRegion::Full, &QuadratureSpec::default().with_panels(128, 128), &chart).unwrap();
        let fine = volume(&f, &DomainRegion::Full, &QuadratureSpec::default().with_panels(256, 256), &chart).unwrap();
        assert!((fine.value - coarse.value).abs() <= coarse.error.max(1e-13 * coarse.value));
    }

    #[test]
    fn non_convergence_reported() {
        let chart = SphereChart::unit();
        // a rapidly oscillating zeta is not resolved by 4 x 4 panels
        let f = AngleField::Meridian(ZetaSpec::meridian(0, 0.0).with_fourier(vec![(0.0, 0.0); 39].into_iter().chain([(3.0, 0.0)]).collect()));
        let spec = QuadratureSpec { panels: (4, 4), points: 2, ..QuadratureSpec::default() };
        assert!(matches!(volume(&f, &DomainRegion::Full, &spec, &chart), Err(VolError::NonConvergence { .. })));
        assert!(QuadratureSpec::default().with_panels(2, 8).validate().is_err());
    }

    #[test]
    fn adaptive_rule_agrees() {
        let chart = SphereChart::unit();
        let spec = QuadratureSpec { rule: QuadratureRule::AdaptiveSimpson, tolerance: 1e-9, ..QuadratureSpec::default() };
        let v = volume(&AngleField::meridian(1, 0.0), &DomainRegion::Full, &spec, &chart).unwrap();
        assert!((v.value - 8.0 * PI).abs() < 1e-7);
        let strict = QuadratureSpec { pole_clamp: false, ..spec };
        assert!(volume(&AngleField::meridian(1, 0.0), &DomainRegion::Full, &strict, &chart).unwrap_err().is_domain());
    }

    #[test]
    fn bounds_examples() {
        let spec = QuadratureSpec::default();
        let b = bounds_check(1, &DomainRegion::Full, &spec).unwrap();
        assert!(b.holds && b.lower == 0.0 && (b.volume - 8.0 * PI).abs() < 1e-12);
        let b = bounds_check(4, &DomainRegion::Full, &spec).unwrap();
        assert!(b.holds);
        assert!(bcj_lower_bound(5, 3) < b.lower);
        let rect = DomainRegion::rectangle((PI / 4.0, PI / 2.0), (0.0, PI)).unwrap();
        let b = bounds_check(2, &rect, &spec.with_panels(32, 32)).unwrap();
        assert!(b.holds && b.lower_margin > 0.0 && b.upper_margin > 0.0);
        assert!(bounds_check(0, &DomainRegion::Full, &spec).is_err());
    }

    #[test]
    fn bcj_examples() {
        assert!((bcj_lower_bound(2, 0) - 2.0 * PI * PI).abs() < 1e-15);
        assert!((bcj_lower_bound(1, 1) - 2.0 * PI * PI).abs() < 1e-15);
        for k in 1..6 {
            let expected = (PI + 2.0 * k as f64 - 2.0) * TAU;
            assert!((bcj_lower_bound(1 + k, 1 - k) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn theta0_roots_agree() {
        let (b, n, t) = (theta0_bisection(), theta0_newton(), theta0_solve());
        assert!((b - n).abs() < 1e-12 && (t - n).abs() < 1e-12);
        assert!(t > 0.0 && t < FRAC_PI_2);
        assert!(theta0_residual(t).abs() < 1e-12);
    }

    #[test]
    fn omega_areas() {
        let (area, err) = integrate_region(&|_, _| Ok(1.0), &DomainRegion::Omega, &QuadratureSpec::default(), 1e-9).unwrap();
        let closed = omega_euclidean_area();
        assert!((area - closed).abs() <= err + 1e-9, "{area} {closed} {err}");
        let (sph, err) = integrate_region(&|t: f64, _| Ok(t.sin()), &DomainRegion::Omega, &QuadratureSpec::default(), 1e-9).unwrap();
        assert!((sph - DomainRegion::Omega.spherical_area(1.0)).abs() <= err + 1e-9);
    }

    #[test]
    fn omega_latitude_fibered_oracle() {
        // inner integral int_0^L sqrt(1 + s^2 phi^2) dphi in closed form
        let inner = |t: f64| {
            let s = t.sin();
            let l = (t.cos().abs() / (s * s)).min(TAU);
            let g = |phi: f64| 0.5 * (phi * (1.0 + s * s * phi * phi).sqrt() + (s * phi).asinh() / s);
            s * g(l)
        };
        let t0 = theta0_solve();
        let gl = GaussLegendre::new(20);
        let mut oracle = 0.0;
        for (a, b) in [(0.0, t0), (t0, FRAC_PI_2), (FRAC_PI_2, PI - t0), (PI - t0, PI)] {
            for (x, w) in gl.composite_nodes(a, b, 64) {
                oracle += w * inner(x);
            }
        }
        let cmp = omega_compare(0.0, &QuadratureSpec::default()).unwrap();
        assert!((cmp.vol_latitude.value - oracle).abs() <= cmp.vol_latitude.error + 1e-9);
        assert!(cmp.holds && cmp.margin > 0.0);
        assert_eq!(cmp.pointwise.violations, 0);
        assert!(cmp.theta0_residual < 1e-12);
    }

    #[test]
    fn omega_monte_carlo_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_101);
        let n = 400_000;
        let (mut s1, mut s2, mut a1) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let t = rng.gen_range(0.0..PI);
            let p = rng.gen_range(0.0..TAU);
            if omega_contains(t, p) {
                let v = (1.0 + (p * t.sin()).powi(2)).sqrt() * t.sin();
                s1 += v;
                s2 += v * v;
                a1 += 1.0;
            }
        }
        let box_area = 2.0 * PI * PI;
        let nf = n as f64;
        let mean = s1 / nf;
        let se = ((s2 / nf - mean * mean) / nf).sqrt() * box_area;
        let p = a1 / nf;
        let area_se = (p * (1.0 - p) / nf).sqrt() * box_area;
        let cmp = omega_compare(0.0, &QuadratureSpec::default()).unwrap();
        assert!((mean * box_area - cmp.vol_latitude.value).abs() < 3.0 * se);
        assert!((p * box_area - cmp.vol_euclidean.value).abs() < 3.0 * area_se);
    }

    #[test]
    fn sweep_rows() {
        let rows = meridian_sweep(0..=3);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("k,volume,lower_bound_thm3,upper_bound_thm3,bcj_bound\n"));
        assert_eq!(csv.lines().count(), 5);
        for r in &rows {
            assert!(r.bcj_bound <= r.volume);
        }
    }

    #[test]
    fn volume_dominates_spherical_area() {
        let chart = SphereChart::unit();
        let spec = QuadratureSpec::default().with_panels(32, 32);
        let region = DomainRegion::rectangle((0.3, 1.9), (0.5, 4.0)).unwrap();
        for f in [AngleField::meridian(3, 0.0), AngleField::latitude(0.2)] {
            let v = volume(&f, &region, &spec, &chart).unwrap();
            assert!(v.value >= region.spherical_area(1.0));
        }
    }
}
