//! Nelder–Mead simplex search with dimension-adapted coefficients and restarts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    pub max_evals: usize,
    /// Stop when the spread of simplex values is below `ftol * max(1, |f_best|)`...
    pub ftol: f64,
    /// ...and every vertex lies within `xtol` (max-norm) of the best one.
    pub xtol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Fresh simplices built around the best point after convergence.
    pub restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { max_evals: 40_000, ftol: 1e-15, xtol: 1e-8, initial_step: 0.1, restarts: 6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub history: Vec<f64>,
    /// Final max-norm distance of the simplex vertices from the best vertex.
    pub simplex_size: f64,
}

struct Counter<'a, F> {
    f: &'a F,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Counter<'_, F> {
    fn one(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        sanitize((self.f)(x))
    }

    fn many(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        self.evals += xs.len();
        xs.par_iter().map(|x| sanitize((self.f)(x))).collect()
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimises `f` from `x0`. Non-finite values are treated as `+inf`.
pub fn nelder_mead<F>(f: &F, x0: &[f64], cfg: &NelderMeadConfig) -> NelderMeadOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = x0.len();
    let nf = n.max(1) as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut counter = Counter { f, evals: 0 };
    let mut history = Vec::new();
    let mut best_x = x0.to_vec();
    let mut best_f = counter.one(x0);
    let mut converged = false;
    let mut iterations = 0;
    let mut simplex_size = f64::INFINITY;

    for round in 0..=cfg.restarts {
        let start_f = best_f;
        let mut verts: Vec<Vec<f64>> = vec![best_x.clone()];
        for i in 0..n {
            let mut v = best_x.clone();
            v[i] += cfg.initial_step;
            verts.push(v);
        }
        let mut vals = vec![best_f];
        vals.extend(counter.many(&verts[1..]));
        converged = false;

        while counter.evals < cfg.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
            verts = order.iter().map(|&i| verts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();
            iterations += 1;
            history.push(vals[0].min(best_f));

            simplex_size = verts[1..]
                .iter()
                .map(|v| v.iter().zip(&verts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            let spread = vals[n] - vals[0];
            if spread <= cfg.ftol * vals[0].abs().max(1.0) && simplex_size <= cfg.xtol {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..n).map(|d| verts[..n].iter().map(|v| v[d]).sum::<f64>() / nf).collect();
            let towards = |t: f64| -> Vec<f64> { (0..n).map(|d| centroid[d] + t * (verts[n][d] - centroid[d])).collect() };

            let xr = towards(-alpha);
            let fr = counter.one(&xr);
            if fr < vals[0] {
                let xe = towards(-alpha * beta);
                let fe = counter.one(&xe);
                if fe < fr {
                    verts[n] = xe;
                    vals[n] = fe;
                } else {
                    verts[n] = xr;
                    vals[n] = fr;
                }
            } else if fr < vals[n - 1] {
                verts[n] = xr;
                vals[n] = fr;
            } else {
                let (xc, fc) = if fr < vals[n] {
                    let xc = towards(-alpha * gamma);
                    let fc = counter.one(&xc);
                    (xc, fc)
                } else {
                    let xc = towards(gamma);
                    let fc = counter.one(&xc);
                    (xc, fc)
                };
                if fc < vals[n].min(fr) {
                    verts[n] = xc;
                    vals[n] = fc;
                } else {
                    for i in 1..=n {
                        for d in 0..n {
                            verts[i][d] = verts[0][d] + delta * (verts[i][d] - verts[0][d]);
                        }
                    }
                    let new_vals = counter.many(&verts[1..]);
                    vals[1..].copy_from_slice(&new_vals);
                }
            }
        }

        let (bi, _) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("simplex is nonempty");
        if vals[bi] < best_f {
            best_f = vals[bi];
            best_x = verts[bi].clone();
        }
        if !converged {
            break;
        }
        // a restart that gains nothing confirms the minimum
        if start_f - best_f <= cfg.ftol * best_f.abs().max(1.0) && round > 0 {
            break;
        }
    }

    NelderMeadOutcome { x: best_x, f: best_f, evals: counter.evals, iterations, converged, history, simplex_size }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2)).sum::<f64>();
        let out = nelder_mead(&f, &[0.0; 6], &NelderMeadConfig::default());
        assert!(out.converged);
        assert!(out.x.iter().all(|v| (v - 0.5).abs() < 1e-6), "{:?}", out.x);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let out = nelder_mead(&f, &[-1.2, 1.0], &NelderMeadConfig { initial_step: 0.5, ..Default::default() });
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn budget_is_respected() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let out = nelder_mead(&f, &[3.0; 10], &NelderMeadConfig { max_evals: 50, ..Default::default() });
        assert!(!out.converged);
        assert!(out.evals <= 50 + 10);
    }

    #[test]
    fn nan_is_rejected() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) };
        let out = nelder_mead(&f, &[0.5], &NelderMeadConfig::default());
        assert!((out.x[0] - 1.0).abs() < 1e-6);
    }
}
