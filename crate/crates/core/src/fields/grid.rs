//! Angle fields sampled on a regular `(theta, phi)` lattice.
//!
//! Nodes are `theta_i = theta_min + i (theta_max - theta_min) / (n_theta - 1)`
//! and `phi_j = 2 pi j / n_phi`. Values are the unwrapped frame angle; the
//! column `j = n_phi` is implied by `alpha(theta, 2 pi) = alpha(theta, 0) + 2 pi k`.
//!
//! # VFGRID binary layout (all little-endian)
//!
//! | offset | size | content                        |
//! |--------|------|--------------------------------|
//! | 0      | 8    | magic `VFGRID01`               |
//! | 8      | 4    | `n_theta` (u32)                |
//! | 12     | 4    | `n_phi` (u32)                  |
//! | 16     | 8    | winding `k` (i64)              |
//! | 24     | 8    | `theta_min` (f64)              |
//! | 32     | 8    | `theta_max` (f64)              |
//! | 40     | 8    | radius (f64)                   |
//! | 48     | 8 n  | `alpha`, theta-major (f64)     |

use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolError};
use crate::geometry::{check_theta, SpherePoint, DEFAULT_POLE_EPS};

pub const VFGRID_MAGIC: &[u8; 8] = b"VFGRID01";
pub const VFGRID_HEADER_LEN: usize = 16;
const PARAM_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    n_theta: usize,
    n_phi: usize,
    k: i64,
    theta_min: f64,
    theta_max: f64,
    radius: f64,
    alpha: Vec<f64>,
}

impl GridField {
    pub fn new(
        n_theta: usize,
        n_phi: usize,
        k: i64,
        theta_range: (f64, f64),
        radius: f64,
        alpha: Vec<f64>,
    ) -> Result<Self> {
        let (theta_min, theta_max) = theta_range;
        if n_theta < 2 || n_phi < 4 {
            return Err(VolError::Invalid(format!("grid {n_theta}x{n_phi} is too small")));
        }
        if !(theta_min > 0.0 && theta_max < PI && theta_min < theta_max) {
            return Err(VolError::Invalid(format!(
                "theta range [{theta_min}, {theta_max}] must lie inside (0, pi)"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(VolError::Invalid(format!("radius must be positive, got {radius}")));
        }
        if alpha.len() != n_theta * n_phi {
            return Err(VolError::Invalid(format!(
                "expected {} values, got {}",
                n_theta * n_phi,
                alpha.len()
            )));
        }
        if let Some(bad) = alpha.iter().find(|v| !v.is_finite()) {
            return Err(VolError::Invalid(format!("non-finite angle {bad}")));
        }
        Ok(Self { n_theta, n_phi, k, theta_min, theta_max, radius, alpha })
    }

    /// Samples `alpha(theta, phi)` at the lattice nodes.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(
        n_theta: usize,
        n_phi: usize,
        k: i64,
        theta_range: (f64, f64),
        radius: f64,
        f: F,
    ) -> Result<Self> {
        let dtheta = (theta_range.1 - theta_range.0) / (n_theta.max(2) - 1) as f64;
        let dphi = TAU / n_phi.max(1) as f64;
        let mut alpha = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            for j in 0..n_phi {
                alpha.push(f(theta_range.0 + i as f64 * dtheta, j as f64 * dphi));
            }
        }
        Self::new(n_theta, n_phi, k, theta_range, radius, alpha)
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn winding(&self) -> i64 {
        self.k
    }

    pub fn theta_range(&self) -> (f64, f64) {
        (self.theta_min, self.theta_max)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dtheta(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.n_theta - 1) as f64
    }

    pub fn dphi(&self) -> f64 {
        TAU / self.n_phi as f64
    }

    pub fn theta_node(&self, i: usize) -> f64 {
        self.theta_min + i as f64 * self.dtheta()
    }

    pub fn phi_node(&self, j: usize) -> f64 {
        j as f64 * self.dphi()
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.alpha
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.alpha[i * self.n_phi + j]
    }

    /// Angle at node `(i, j)` for any integer `j`, using the winding to wrap.
    pub fn wrapped(&self, i: usize, j: i64) -> f64 {
        let n = self.n_phi as i64;
        let q = j.div_euclid(n);
        let r = j.rem_euclid(n) as usize;
        self.get(i, r) + TAU * (self.k * q) as f64
    }

    /// Largest violation of the winding relation; zero by construction.
    pub fn constraint_violation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n_theta {
            let closed = self.wrapped(i, self.n_phi as i64) - self.get(i, 0);
            worst = worst.max((closed - TAU * self.k as f64).abs());
        }
        worst
    }

    /// Catmull–Rom interpolation; `theta` is clamped to the lattice range.
    pub fn angle(&self, p: SpherePoint) -> Result<f64> {
        check_theta(p.theta, DEFAULT_POLE_EPS)?;
        if !p.phi.is_finite() {
            return Err(VolError::Invalid(format!("non-finite longitude {}", p.phi)));
        }
        let u = ((p.theta - self.theta_min) / self.dtheta()).clamp(0.0, (self.n_theta - 1) as f64);
        let i0 = (u.floor() as usize).min(self.n_theta - 2);
        let tu = u - i0 as f64;

        let v = p.phi / self.dphi();
        let j0 = v.floor() as i64;
        let tv = v - j0 as f64;

        let row = |i: i64| -> f64 {
            let i = i.clamp(0, self.n_theta as i64 - 1) as usize;
            let s = [
                self.wrapped(i, j0 - 1),
                self.wrapped(i, j0),
                self.wrapped(i, j0 + 1),
                self.wrapped(i, j0 + 2),
            ];
            catmull_rom(s, tv)
        };
        let i0 = i0 as i64;
        Ok(catmull_rom([row(i0 - 1), row(i0), row(i0 + 1), row(i0 + 2)], tu))
    }

    pub fn frame(&self, p: SpherePoint) -> Result<(f64, f64)> {
        let (s, c) = self.angle(p)?.sin_cos();
        Ok((c, s))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(VFGRID_MAGIC)?;
        w.write_all(&(self.n_theta as u32).to_le_bytes())?;
        w.write_all(&(self.n_phi as u32).to_le_bytes())?;
        w.write_all(&self.k.to_le_bytes())?;
        w.write_all(&self.theta_min.to_le_bytes())?;
        w.write_all(&self.theta_max.to_le_bytes())?;
        w.write_all(&self.radius.to_le_bytes())?;
        for v in &self.alpha {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(VFGRID_HEADER_LEN + PARAM_LEN + 8 * self.alpha.len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| VolError::Invalid(format!("reading grid: {e}")))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| VolError::Invalid(format!("malformed VFGRID data: {msg}"));
        if bytes.len() < VFGRID_HEADER_LEN + PARAM_LEN {
            return Err(bad("truncated header"));
        }
        if &bytes[..8] != VFGRID_MAGIC {
            return Err(bad("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let n_theta = u32_at(8);
        let n_phi = u32_at(12);
        let k = i64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let theta_min = f64_at(24);
        let theta_max = f64_at(32);
        let radius = f64_at(40);
        let n = n_theta
            .checked_mul(n_phi)
            .ok_or_else(|| bad("grid size overflows"))?;
        let start = VFGRID_HEADER_LEN + PARAM_LEN;
        if bytes.len() != start + 8 * n {
            return Err(bad(&format!("expected {} value bytes, found {}", 8 * n, bytes.len() - start)));
        }
        let alpha = (0..n).map(|m| f64_at(start + 8 * m)).collect();
        Self::new(n_theta, n_phi, k, (theta_min, theta_max), radius, alpha)
    }
}

fn catmull_rom(p: [f64; 4], t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    0.5 * (2.0 * p[1]
        + (p[2] - p[0]) * t
        + (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) * t2
        + (3.0 * p[1] - p[0] - 3.0 * p[2] + p[3]) * t3)
}
