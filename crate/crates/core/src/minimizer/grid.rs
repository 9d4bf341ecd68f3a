//! Gradient descent over lattice-discretised angle fields with winding `k`.
//!
//! The lattice has nodes `theta_i` uniform on `[theta_min, theta_max]` and
//! `phi_j = 2 pi j / n_phi`; the column `j = n_phi` is `alpha(i, 0) + 2 pi k`,
//! so the winding relation holds exactly. Each cell contributes the density
//! `r sqrt(r^2 sin^2 + sin^2 alpha_theta^2 + (alpha_phi + cos)^2) = r^2 sin sqrt(1 + |A|^2)`
//! at its centre, with `alpha_theta`, `alpha_phi` averaged edge differences.
//! The two polar caps outside the lattice take `alpha_phi` from the boundary
//! row and `alpha_theta = 0`, so the objective covers the whole sphere.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BestSoFar, MinimizeError, OptimizationTrace};
use crate::error::{Result, VolError};
use crate::fields::GridField;
use crate::quadrature::{neumaier_sum, GaussLegendre};
use crate::volume::{bcj_lower_bound, volume_meridian_closed};

const CAP_PANELS: usize = 2;
const CAP_POINTS: usize = 8;
const CURVATURE_STEP: f64 = 1e-4;

/// The discretised volume functional for one lattice layout.
#[derive(Debug, Clone)]
pub struct GridObjective {
    n_theta: usize,
    n_phi: usize,
    k: i64,
    radius: f64,
    dtheta: f64,
    dphi: f64,
    /// `(sin, cos)` at the centre of each cell row.
    mid: Vec<(f64, f64)>,
    /// `(r^2 sin^2, cos, weight)` on `[0, theta_min]` and `[theta_max, pi]`.
    north_cap: Vec<(f64, f64, f64)>,
    south_cap: Vec<(f64, f64, f64)>,
}

impl GridObjective {
    pub fn new(n_theta: usize, n_phi: usize, k: i64, theta_range: (f64, f64), radius: f64) -> Result<Self> {
        // validates the layout
        let probe = GridField::new(n_theta, n_phi, k, theta_range, radius, vec![0.0; n_theta * n_phi])?;
        Ok(Self::for_field(&probe))
    }

    pub fn for_field(field: &GridField) -> Self {
        let (tmin, tmax) = field.theta_range();
        let r = field.radius();
        let dtheta = field.dtheta();
        let mid = (0..field.n_theta() - 1).map(|i| (tmin + (i as f64 + 0.5) * dtheta).sin_cos()).collect();
        let rule = GaussLegendre::new(CAP_POINTS);
        let cap = |a: f64, b: f64| -> Vec<(f64, f64, f64)> {
            rule.composite_nodes(a, b, CAP_PANELS)
                .into_iter()
                .map(|(t, w)| {
                    let (s, c) = t.sin_cos();
                    (r * r * s * s, c, w)
                })
                .collect()
        };
        Self {
            n_theta: field.n_theta(),
            n_phi: field.n_phi(),
            k: field.winding(),
            radius: r,
            dtheta,
            dphi: field.dphi(),
            mid,
            north_cap: cap(0.0, tmin),
            south_cap: cap(tmax, PI),
        }
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cell_area(&self) -> f64 {
        self.dtheta * self.dphi
    }

    /// `alpha(i, j)` for `j` in `0..=n_phi`.
    #[inline]
    fn at(&self, alpha: &[f64], i: usize, j: usize) -> f64 {
        if j == self.n_phi {
            alpha[i * self.n_phi] + TAU * self.k as f64
        } else {
            alpha[i * self.n_phi + j]
        }
    }

    #[inline]
    fn cell(&self, i: usize, a00: f64, a01: f64, a10: f64, a11: f64) -> f64 {
        let (s, c) = self.mid[i];
        let r = self.radius;
        let at = (a10 - a00 + a11 - a01) / (2.0 * self.dtheta);
        let ap = (a01 - a00 + a11 - a10) / (2.0 * self.dphi) + c;
        r * (r * r * s * s + s * s * at * at + ap * ap).sqrt() * self.cell_area()
    }

    #[inline]
    fn cap(&self, nodes: &[(f64, f64, f64)], a0: f64, a1: f64) -> f64 {
        let ap = (a1 - a0) / self.dphi;
        let r = self.radius;
        let mut s = 0.0;
        for &(rs2, c, w) in nodes {
            s += w * (rs2 + (ap + c) * (ap + c)).sqrt();
        }
        r * s * self.dphi
    }

    fn cell_at(&self, alpha: &[f64], i: usize, j: usize) -> f64 {
        self.cell(i, self.at(alpha, i, j), self.at(alpha, i, j + 1), self.at(alpha, i + 1, j), self.at(alpha, i + 1, j + 1))
    }

    /// Objective value; rows are summed in parallel but combined in order.
    pub fn value(&self, alpha: &[f64]) -> f64 {
        assert_eq!(alpha.len(), self.len(), "angle vector has the wrong length");
        let last = self.n_theta - 1;
        let rows: Vec<f64> = (0..self.n_theta + 1)
            .into_par_iter()
            .map(|row| {
                let terms = (0..self.n_phi).map(|j| match row {
                    0 => self.cap(&self.north_cap, self.at(alpha, 0, j), self.at(alpha, 0, j + 1)),
                    r if r == self.n_theta => self.cap(&self.south_cap, self.at(alpha, last, j), self.at(alpha, last, j + 1)),
                    r => self.cell_at(alpha, r - 1, j),
                });
                neumaier_sum(terms)
            })
            .collect();
        neumaier_sum(rows)
    }

    /// Sum of the terms that involve node `(i, j)`, with `delta` added to it.
    fn local(&self, alpha: &[f64], i: usize, j: usize, delta: f64) -> f64 {
        let n = self.n_phi;
        let get = |ii: usize, jj: usize| {
            let v = self.at(alpha, ii, jj);
            if ii == i && jj % n == j {
                v + delta
            } else {
                v
            }
        };
        let cols = [(j + n - 1) % n, j];
        let mut total = 0.0;
        for &jj in &cols {
            if i > 0 {
                total += self.cell(i - 1, get(i - 1, jj), get(i - 1, jj + 1), get(i, jj), get(i, jj + 1));
            }
            if i + 1 < self.n_theta {
                total += self.cell(i, get(i, jj), get(i, jj + 1), get(i + 1, jj), get(i + 1, jj + 1));
            }
            if i == 0 {
                total += self.cap(&self.north_cap, get(0, jj), get(0, jj + 1));
            }
            if i + 1 == self.n_theta {
                total += self.cap(&self.south_cap, get(i, jj), get(i, jj + 1));
            }
        }
        total
    }

    /// Central finite-difference gradient, node by node over the affected terms.
    pub fn gradient(&self, alpha: &[f64], step: f64) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / self.n_phi, idx % self.n_phi);
                (self.local(alpha, i, j, step) - self.local(alpha, i, j, -step)) / (2.0 * step)
            })
            .collect()
    }

    /// Diagonal of the Hessian by second differences, floored to stay positive.
    pub fn curvature(&self, alpha: &[f64], step: f64) -> Vec<f64> {
        let floor = 1e-12 * self.cell_area();
        (0..self.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / self.n_phi, idx % self.n_phi);
                let d = self.local(alpha, i, j, step) - 2.0 * self.local(alpha, i, j, 0.0) + self.local(alpha, i, j, -step);
                (d / (step * step)).max(floor)
            })
            .collect()
    }

    /// Max-norm of the gradient divided by the cell area, a grid-independent scale.
    pub fn scaled_norm(&self, g: &[f64]) -> f64 {
        g.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / self.cell_area()
    }
}

/// Samples of `X_{m,k}` (`alpha = k phi`) on the lattice of `config`.
pub fn meridian_grid(k: i64, config: &GridConfig) -> Result<GridField> {
    GridField::from_fn(config.n_theta, config.n_phi, k, config.theta_range(), config.radius, |_, phi| k as f64 * phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_theta: usize,
    pub n_phi: usize,
    /// The lattice spans `[margin, pi - margin]`.
    pub theta_margin: f64,
    pub radius: f64,
    pub seed: u64,
    /// Size of the smooth random perturbation of `k phi` at the start.
    pub start_amplitude: f64,
    pub max_iterations: usize,
    /// Stop when the scaled gradient norm drops below this.
    pub gtol: f64,
    /// ...or when `patience` successive steps each gain less than `ftol * |f|`.
    pub ftol: f64,
    pub patience: usize,
    pub fd_step: f64,
    pub armijo: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_theta: 64,
            n_phi: 64,
            theta_margin: 0.05,
            radius: 1.0,
            seed: 1,
            start_amplitude: 0.3,
            max_iterations: 20_000,
            gtol: 1e-6,
            ftol: 1e-13,
            patience: 20,
            fd_step: 1e-6,
            armijo: 1e-4,
        }
    }
}

impl GridConfig {
    pub fn theta_range(&self) -> (f64, f64) {
        (self.theta_margin, PI - self.theta_margin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub field: GridField,
    pub k: i64,
    pub volume: f64,
    /// Full-sphere volume of `X_{m,k}`.
    pub closed: f64,
    /// `|objective(X_{m,k} samples) - closed|`, the tolerance for comparisons with `closed`.
    pub discretization_error: f64,
    /// BCJ bound for indices `(1 - k, 1 + k)`; only stated on the unit sphere.
    pub bcj_bound: Option<f64>,
    pub trace: OptimizationTrace,
}

impl GridResult {
    pub fn margin_to_closed(&self) -> f64 {
        self.volume - self.closed
    }

    pub fn respects_bcj(&self) -> bool {
        self.bcj_bound.is_none_or(|b| self.volume >= b - self.discretization_error)
    }
}

fn starting_point(k: i64, config: &GridConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let phase = rng.gen_range(0.0..TAU);
    let amp = config.start_amplitude;
    let mut modes = Vec::new();
    for m in 1..=3 {
        for n in 0..=2 {
            let scale = amp / (m as f64 * (n + 1) as f64);
            modes.push((m as f64, n as f64, rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale)));
        }
    }
    let mut alpha = Vec::with_capacity(config.n_theta * config.n_phi);
    for i in 0..config.n_theta {
        let u = PI * i as f64 / (config.n_theta - 1) as f64;
        for j in 0..config.n_phi {
            let phi = TAU * j as f64 / config.n_phi as f64;
            let mut v = k as f64 * phi + phase;
            for &(m, n, a, b) in &modes {
                v += (m * u).sin() * (a * (n * phi).cos() + b * (n * phi).sin());
            }
            alpha.push(v);
        }
    }
    alpha
}

/// Gradient descent, scaled by the Hessian diagonal, with Barzilai–Borwein
/// step guesses and Armijo backtracking, from a seeded perturbation of
/// `k phi`. Every accepted step decreases the objective.
pub fn minimize_grid(k: i64, config: &GridConfig) -> std::result::Result<GridResult, MinimizeError> {
    if config.n_theta < 32 || config.n_phi < 32 {
        return Err(VolError::Invalid(format!("grid search needs at least 32x32 nodes, got {}x{}", config.n_theta, config.n_phi)).into());
    }
    if !(config.theta_margin > 0.0 && config.theta_margin < PI / 2.0) {
        return Err(VolError::Invalid(format!("theta margin must lie in (0, pi/2), got {}", config.theta_margin)).into());
    }
    if !(config.fd_step > 0.0) {
        return Err(VolError::Invalid("finite-difference step must be positive".into()).into());
    }
    let clock = Instant::now();
    let objective = GridObjective::new(config.n_theta, config.n_phi, k, config.theta_range(), config.radius)?;

    let mut x = starting_point(k, config);
    let mut f = objective.value(&x);
    let mut g = objective.gradient(&x, config.fd_step);
    let mut diag = objective.curvature(&x, CURVATURE_STEP);
    let mut evaluations = 2;
    let mut history = vec![f];
    let mut measure = objective.scaled_norm(&g);
    // unit steps are Newton steps for the diagonal model
    let mut t = 1.0;
    let mut converged = measure <= config.gtol;
    let mut stalled = 0;
    let mut iterations = 0;

    while !converged && iterations < config.max_iterations {
        iterations += 1;
        let d: Vec<f64> = g.iter().zip(&diag).map(|(gi, hi)| -gi / hi).collect();
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let mut step = t;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, di)| a + step * di).collect();
            let ft = objective.value(&trial);
            evaluations += 1;
            if ft.is_finite() && ft <= f + config.armijo * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no descent left at working precision
            converged = true;
            break;
        };
        let g_new = objective.gradient(&x_new, config.fd_step);
        diag = objective.curvature(&x_new, CURVATURE_STEP);
        evaluations += 1;
        // Barzilai–Borwein step in the metric of the diagonal model
        let (mut sy, mut sds) = (0.0, 0.0);
        for idx in 0..x.len() {
            let s = x_new[idx] - x[idx];
            sy += s * (g_new[idx] - g[idx]);
            sds += s * diag[idx] * s;
        }
        t = if sy > 0.0 { sds / sy } else { 2.0 * step };
        if f - f_new <= config.ftol * f.abs() {
            stalled += 1;
        } else {
            stalled = 0;
        }
        x = x_new;
        f = f_new;
        g = g_new;
        history.push(f);
        measure = objective.scaled_norm(&g);
        converged = measure <= config.gtol || stalled >= config.patience;
    }

    let field = GridField::new(config.n_theta, config.n_phi, k, config.theta_range(), config.radius, x)?;
    let violation = field.constraint_violation();
    if violation > 1e-9 {
        return Err(MinimizeError::ConstraintViolation(violation));
    }
    let closed = volume_meridian_closed(k, (0.0, PI), TAU, config.radius);
    let reference = objective.value(meridian_grid(k, config)?.values());
    let result = GridResult {
        field,
        k,
        volume: f,
        closed,
        discretization_error: (reference - closed).abs(),
        bcj_bound: (config.radius == 1.0).then(|| bcj_lower_bound(1 + k, 1 - k)),
        trace: OptimizationTrace {
            iterations,
            evaluations,
            objective: history,
            terminal_measure: measure,
            converged,
            wall_clock_secs: clock.elapsed().as_secs_f64(),
        },
    };
    if converged {
        Ok(result)
    } else {
        Err(MinimizeError::BudgetExhausted(Box::new(BestSoFar::Grid(result))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn objective_error(k: i64, n: usize) -> f64 {
        let cfg = GridConfig { n_theta: n, n_phi: n, ..GridConfig::default() };
        let obj = GridObjective::new(n, n, k, cfg.theta_range(), 1.0).unwrap();
        let v = obj.value(meridian_grid(k, &cfg).unwrap().values());
        (v - volume_meridian_closed(k, (0.0, PI), TAU, 1.0)).abs()
    }

    #[test]
    fn second_order_consistency() {
        // X_{m,0} has constant density, which the midpoint rule integrates exactly
        assert!(objective_error(0, 17) < 1e-12);
        for k in 1..=3 {
            let (e1, e2, e3) = (objective_error(k, 17), objective_error(k, 33), objective_error(k, 65));
            // spacing halves each time (n - 1 doubles)
            let (p1, p2) = ((e1 / e2).log2(), (e2 / e3).log2());
            assert!(p1 > 1.8 && p2 > 1.8, "k={k}: errors {e1:e} {e2:e} {e3:e}");
        }
    }

    #[test]
    fn phase_does_not_matter() {
        let cfg = GridConfig { n_theta: 20, n_phi: 24, ..GridConfig::default() };
        let obj = GridObjective::new(20, 24, 2, cfg.theta_range(), 1.0).unwrap();
        let a = meridian_grid(2, &cfg).unwrap();
        let shifted: Vec<f64> = a.values().iter().map(|v| v + 1.7).collect();
        assert!((obj.value(a.values()) - obj.value(&shifted)).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_global_difference() {
        let cfg = GridConfig { n_theta: 10, n_phi: 12, ..GridConfig::default() };
        let obj = GridObjective::new(10, 12, 1, cfg.theta_range(), 1.0).unwrap();
        let x = starting_point(1, &GridConfig { n_theta: 10, n_phi: 12, ..GridConfig::default() });
        let g = obj.gradient(&x, 1e-6);
        for idx in [0, 5, 11, 12, 60, 119] {
            let h = 1e-5;
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[idx] += h;
            xm[idx] -= h;
            let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
            assert!((fd - g[idx]).abs() < 1e-7, "node {idx}: {fd} vs {}", g[idx]);
        }
    }

    #[test]
    fn meridian_is_stationary() {
        let cfg = GridConfig { n_theta: 16, n_phi: 16, ..GridConfig::default() };
        let obj = GridObjective::new(16, 16, 2, cfg.theta_range(), 1.0).unwrap();
        let g = obj.gradient(meridian_grid(2, &cfg).unwrap().values(), 1e-6);
        assert!(obj.scaled_norm(&g) < 1e-6);
    }

    #[test]
    fn small_grids_rejected() {
        let cfg = GridConfig { n_theta: 16, ..GridConfig::default() };
        assert!(matches!(minimize_grid(0, &cfg), Err(MinimizeError::Invalid(_))));
    }

    #[test]
    fn short_run_is_monotone_and_reports_budget() {
        let cfg = GridConfig { n_theta: 32, n_phi: 32, max_iterations: 15, ..GridConfig::default() };
        match minimize_grid(1, &cfg) {
            Err(MinimizeError::BudgetExhausted(best)) => match *best {
                BestSoFar::Grid(r) => {
                    assert!(r.trace.is_monotone());
                    assert_eq!(r.trace.iterations, 15);
                    assert!(r.volume >= r.closed - r.discretization_error);
                }
                _ => panic!("wrong payload"),
            },
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }
}
