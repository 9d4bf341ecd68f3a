//! Gauss–Legendre rules, composite tensor products, adaptive Simpson, and
//! compensated summation.

use rayon::prelude::*;

use crate::error::{Result, VolError};

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Chebyshev-like initial guesses. Nodes are
    /// returned in increasing order and placed symmetrically.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        neumaier_sum(self.mapped(a, b).map(|(x, w)| w * f(x)))
    }

    /// Composite rule: `panels` equal panels on `[a, b]`, nodes listed in order.
    /// Node pairs are placed at `mid -+ d` from a shared offset `d`, and
    /// share their weight exactly.
    pub fn composite_nodes(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mid = 0.5 * (a + b);
        let n = panels * self.len();
        let mut out = vec![(0.0, 0.0); n];
        for idx in 0..n.div_ceil(2) {
            let (pi, qi) = (idx / self.len(), idx % self.len());
            let lo = a + pi as f64 * h;
            let offset = 0.5 * h * (1.0 + self.nodes[qi]);
            // distance from the midpoint, shared by the mirrored node
            let d = mid - (lo + offset);
            let w = 0.5 * h * self.weights[qi];
            out[idx] = (mid - d, w);
            out[n - 1 - idx] = (mid + d, w);
        }
        out
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite tensor Gauss–Legendre over `[a0, b0] x [a1, b1]`.
///
/// Rows (first coordinate) are evaluated in parallel; each row is summed in
/// order and the row sums are combined in order, so the result does not
/// depend on the number of worker threads.
pub fn tensor_integrate<F>(
    f: &F,
    rule: &GaussLegendre,
    x_range: (f64, f64),
    y_range: (f64, f64),
    panels: (usize, usize),
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let xs = rule.composite_nodes(x_range.0, x_range.1, panels.0);
    let ys = rule.composite_nodes(y_range.0, y_range.1, panels.1);
    let rows: Vec<f64> = xs
        .par_iter()
        .map(|&(x, wx)| {
            let mut s = NeumaierSum::new();
            for &(y, wy) in &ys {
                s.add(wy * f(x, y)?);
            }
            Ok(wx * s.value())
        })
        .collect::<Result<_>>()?;
    Ok(neumaier_sum(rows))
}

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut acc = NeumaierSum::new();
    let mut worst = 0.0_f64;
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, &mut acc, &mut worst);
    if worst > tol {
        return Err(VolError::NonConvergence { estimate: worst, budget: tol });
    }
    Ok(acc.value())
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    acc: &mut NeumaierSum,
    worst: &mut f64,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        // refining cannot repair a non-finite integrand
        *worst = f64::INFINITY;
        acc.add(delta);
        return;
    }
    if delta.abs() <= 15.0 * tol || depth == 0 {
        if depth == 0 && delta.abs() > 15.0 * tol {
            *worst = worst.max(delta.abs() / 15.0);
        }
        acc.add(left + right + delta / 15.0);
        return;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc, worst);
    simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc, worst);
}
