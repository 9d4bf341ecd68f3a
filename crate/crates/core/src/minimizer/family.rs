//! Minimisation over meridian-parallel fields `zeta(phi) = k phi + phi0 + Fourier`.
//!
//! Their volume is `r int int sqrt(r^2 sin^2 theta + (zeta'(phi) + cos theta)^2) dtheta dphi`,
//! a convex functional of `zeta'`, so by Jensen's inequality the pure field
//! `zeta' = k` minimises it within the family.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::simplex::{nelder_mead, NelderMeadConfig};
use super::{MinimizeError, OptimizationTrace};
use crate::error::{Result, VolError};
use crate::fields::ZetaSpec;
use crate::quadrature::{neumaier_sum, GaussLegendre};
use crate::volume::volume_meridian_closed;

/// Tensor Gauss–Legendre layout for the family objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyQuadrature {
    pub theta_panels: usize,
    pub phi_panels: usize,
    pub points: usize,
    /// Relative tolerance of the refinement check in [`family_volume`].
    pub tolerance: f64,
}

impl Default for FamilyQuadrature {
    fn default() -> Self {
        Self { theta_panels: 32, phi_panels: 16, points: 8, tolerance: 1e-6 }
    }
}

/// Precomputed nodes for evaluating the family volume at many `zeta`.
#[derive(Debug, Clone)]
pub struct FamilyObjective {
    pub k: i64,
    pub n_fourier: usize,
    pub radius: f64,
    pub quadrature: FamilyQuadrature,
    /// `(r^2 sin^2, cos, weight)` per theta node.
    theta_nodes: Vec<(f64, f64, f64)>,
    /// `(weight, [cos n phi, sin n phi] for n = 1..=N)` per phi node.
    phi_nodes: Vec<(f64, Vec<(f64, f64)>)>,
}

impl FamilyObjective {
    pub fn new(k: i64, n_fourier: usize, radius: f64, quadrature: FamilyQuadrature) -> Result<Self> {
        if !(radius > 0.0) || quadrature.theta_panels == 0 || quadrature.phi_panels == 0 || quadrature.points == 0 {
            return Err(VolError::Invalid("family objective needs positive radius and panel counts".into()));
        }
        let rule = GaussLegendre::new(quadrature.points);
        let theta_nodes = rule
            .composite_nodes(0.0, PI, quadrature.theta_panels)
            .into_iter()
            .map(|(t, w)| {
                let (s, c) = t.sin_cos();
                (radius * radius * s * s, c, w)
            })
            .collect();
        let phi_nodes = rule
            .composite_nodes(0.0, TAU, quadrature.phi_panels)
            .into_iter()
            .map(|(p, w)| (w, (1..=n_fourier).map(|n| ((n as f64 * p).cos(), (n as f64 * p).sin())).collect()))
            .collect();
        Ok(Self { k, n_fourier, radius, quadrature, theta_nodes, phi_nodes })
    }

    /// Parameter vector `(phi0, c_1..c_N, s_1..s_N)` to a spec.
    pub fn spec_of(&self, x: &[f64]) -> ZetaSpec {
        let n = self.n_fourier;
        ZetaSpec::meridian(self.k, x[0]).with_fourier((0..n).map(|i| (x[1 + i], x[1 + n + i])).collect())
    }

    pub fn params_of(&self, spec: &ZetaSpec) -> Vec<f64> {
        let n = self.n_fourier;
        let mut x = vec![0.0; 1 + 2 * n];
        x[0] = spec.phi0;
        for (i, &(c, s)) in spec.fourier.iter().take(n).enumerate() {
            x[1 + i] = c;
            x[1 + n + i] = s;
        }
        x
    }

    /// Volume from `zeta'` at the phi nodes.
    fn integrate(&self, zeta_prime: impl Fn(&[(f64, f64)]) -> f64) -> f64 {
        let r = self.radius;
        neumaier_sum(self.phi_nodes.iter().map(|(wp, trig)| {
            let zp = zeta_prime(trig);
            let row = neumaier_sum(self.theta_nodes.iter().map(|&(rs2, c, wt)| wt * (rs2 + (zp + c) * (zp + c)).sqrt()));
            wp * r * row
        }))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.n_fourier;
        let k = self.k as f64;
        self.integrate(|trig| {
            let mut d = k;
            for (i, &(cn, sn)) in trig.iter().enumerate() {
                let m = (i + 1) as f64;
                d += m * (x[1 + n + i] * cn - x[1 + i] * sn);
            }
            d
        })
    }

    /// Volume of an arbitrary spec with the same winding (any Fourier length).
    pub fn value_of(&self, spec: &ZetaSpec) -> f64 {
        if spec.fourier.len() <= self.n_fourier {
            return self.value(&self.params_of(spec));
        }
        let big = FamilyObjective::new(self.k, spec.fourier.len(), self.radius, self.quadrature).expect("validated on construction");
        big.value(&big.params_of(spec))
    }
}

/// Panel doublings allowed in [`family_volume`] beyond the requested layout.
pub const MAX_REFINEMENTS: u32 = 4;

/// Volume of the meridian-parallel field `zeta`.
///
/// The result at the requested panels is compared with half as many; while
/// the difference exceeds `tolerance * max(1, |V|)` the panel counts are
/// doubled, at most [`MAX_REFINEMENTS`] times. Steep perturbations for which
/// `zeta' + cos(theta)` vanishes near a pole need this.
pub fn family_volume(zeta: &ZetaSpec, quadrature: &FamilyQuadrature, radius: f64) -> Result<f64> {
    let at = |q: FamilyQuadrature| -> Result<f64> {
        let obj = FamilyObjective::new(zeta.k, zeta.fourier.len(), radius, q)?;
        Ok(obj.value(&obj.params_of(zeta)))
    };
    let halved = FamilyQuadrature {
        theta_panels: (quadrature.theta_panels / 2).max(1),
        phi_panels: (quadrature.phi_panels / 2).max(1),
        ..*quadrature
    };
    let mut coarse = at(halved)?;
    let mut q = *quadrature;
    let mut estimate = f64::INFINITY;
    let mut budget = 0.0;
    for _ in 0..=MAX_REFINEMENTS {
        let v = at(q)?;
        estimate = (v - coarse).abs();
        budget = quadrature.tolerance * v.abs().max(1.0);
        if v.is_finite() && estimate <= budget {
            return Ok(v);
        }
        coarse = v;
        q.theta_panels *= 2;
        q.phi_panels *= 2;
    }
    Err(VolError::NonConvergence { estimate, budget })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub n_fourier: usize,
    pub radius: f64,
    pub quadrature: FamilyQuadrature,
    pub simplex: NelderMeadConfig,
    /// Seed of the random start when no explicit start is given.
    pub seed: u64,
    /// Half-width of the uniform distribution of random starting coefficients.
    pub start_amplitude: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            n_fourier: 6,
            radius: 1.0,
            quadrature: FamilyQuadrature::default(),
            simplex: NelderMeadConfig::default(),
            seed: 1,
            start_amplitude: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResult {
    pub zeta: ZetaSpec,
    pub volume: f64,
    /// `volume_meridian_closed(k)` on the same sphere.
    pub closed: f64,
    pub relative_gap: f64,
    pub perturbation_norm: f64,
    pub trace: OptimizationTrace,
}

/// Seeded random starting point `(phi0, c, s)`.
pub fn random_start(n_fourier: usize, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![rng.gen_range(0.0..TAU)];
    x.extend((0..2 * n_fourier).map(|_| rng.gen_range(-amplitude..=amplitude)));
    x
}

/// Simplex search over `(phi0, c_1..c_N, s_1..s_N)` at fixed winding `k`.
pub fn minimize_in_family(k: i64, start: Option<&ZetaSpec>, config: &FamilyConfig) -> std::result::Result<FamilyResult, MinimizeError> {
    if config.n_fourier == 0 {
        return Err(MinimizeError::Invalid(VolError::Invalid("Fourier truncation N must be at least 1".into())));
    }
    let clock = Instant::now();
    let objective = FamilyObjective::new(k, config.n_fourier, config.radius, config.quadrature).map_err(MinimizeError::Invalid)?;
    let x0 = match start {
        Some(s) => {
            if s.k != k {
                return Err(MinimizeError::Invalid(VolError::Invalid(format!("start has winding {}, expected {k}", s.k))));
            }
            objective.params_of(s)
        }
        None => random_start(config.n_fourier, config.start_amplitude, config.seed),
    };
    let out = nelder_mead(&|x: &[f64]| objective.value(x), &x0, &config.simplex);
    let zeta = objective.spec_of(&out.x);
    let closed = volume_meridian_closed(k, (0.0, PI), TAU, config.radius);
    let result = FamilyResult {
        perturbation_norm: zeta.perturbation_norm(),
        relative_gap: (out.f - closed) / closed,
        volume: out.f,
        closed,
        zeta,
        trace: OptimizationTrace {
            iterations: out.iterations,
            evaluations: out.evals,
            objective: out.history,
            terminal_measure: out.simplex_size,
            converged: out.converged,
            wall_clock_secs: clock.elapsed().as_secs_f64(),
        },
    };
    if out.converged {
        Ok(result)
    } else {
        Err(MinimizeError::BudgetExhausted(Box::new(super::BestSoFar::Family(result))))
    }
}
