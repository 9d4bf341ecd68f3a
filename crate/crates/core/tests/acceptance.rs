//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volfield::fields::{eval_latitude, InitialData};
use volfield::first_order::{field_residuals, GridSpec, ResidualConfig};
use volfield::geometry::DEFAULT_CURVATURE_STEP;
use volfield::minimizer::{family_volume, minimize_grid, minimize_in_family, FamilyConfig, FamilyQuadrature, GridConfig};
use volfield::topology::{index_at_poles, poincare_hopf_check, Orientation};
use volfield::volume::{bcj_lower_bound, meridian_volume, omega_compare, volume, volume_meridian_closed};
use volfield::{AngleField, DomainRegion, LatitudeSpec, QuadratureSpec, SphereChart, SpherePoint, TTypeSpec, ZetaSpec};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn full_volume(k: i64) -> Result<(f64, Duration), String> {
    let t = Instant::now();
    let v = volume(&AngleField::meridian(k, 0.0), &DomainRegion::Full, &QuadratureSpec::default(), &SphereChart::unit())
        .map_err(|e| e.to_string())?;
    Ok((v.value, t.elapsed()))
}

fn c1_parallel_field_volume() -> Outcome {
    let (v, dt) = full_volume(0)?;
    let target = 2.0 * PI * PI;
    ensure(rel(v, target) < 1e-8, || format!("vol = {v}, expected {target}"))?;
    ensure(dt < Duration::from_secs(1), || format!("took {dt:?}"))?;
    Ok(format!("vol = {v:.12} (rel err {:.1e}, {dt:.2?})", rel(v, target)))
}

fn c2_first_meridian_volume() -> Outcome {
    let (v, dt) = full_volume(1)?;
    let target = 8.0 * PI;
    ensure(rel(v, target) < 1e-8, || format!("vol = {v}, expected {target}"))?;
    ensure(dt < Duration::from_secs(1), || format!("took {dt:?}"))?;
    // 2 pi int sqrt(2 + 2 cos) = -4 sqrt(2) pi [sqrt(1 - t)]_{t=-1}^{1}
    let chain = -4.0 * 2f64.sqrt() * PI * (0f64.sqrt() - 2f64.sqrt());
    ensure(rel(chain, target) < 1e-15, || format!("antiderivative chain gives {chain}"))?;
    let closed = volume_meridian_closed(1, (0.0, PI), TAU, 1.0);
    ensure(rel(closed, chain) < 1e-13, || format!("1-D rule gives {closed}"))?;
    Ok(format!("vol = {v:.12} (rel err {:.1e}, {dt:.2?}); chain = {chain:.12}", rel(v, target)))
}

fn c3_sandwich_and_evenness() -> Outcome {
    let area = 2.0 * PI * PI;
    let mut worst_even = 0.0_f64;
    for k in 1..=10i64 {
        let v = meridian_volume(k, 1.0);
        let lower = (k - 1) as f64 * area;
        let upper = (k + 1) as f64 * area;
        ensure(lower < v && v < upper, || format!("k={k}: {lower} < {v} < {upper} fails"))?;
        let (v2d, _) = full_volume(k)?;
        ensure(rel(v2d, v) < 1e-8, || format!("k={k}: 2-D quadrature {v2d} vs 1-D {v}"))?;
        let (vneg, _) = full_volume(-k)?;
        ensure((vneg - v2d).abs() < 1e-12, || format!("k={k}: vol(-k) - vol(k) = {:e}", vneg - v2d))?;
        worst_even = worst_even.max((vneg - v2d).abs()).max((meridian_volume(-k, 1.0) - v).abs());
    }
    Ok(format!("k = 1..10 strictly inside ((k-1) 2pi^2, (k+1) 2pi^2); max |vol(k) - vol(-k)| = {worst_even:.1e}"))
}

fn c4_euler_lagrange() -> Outcome {
    let chart = SphereChart::unit();
    let mut summary = Vec::new();
    for k in 0..=5 {
        let f = AngleField::meridian(k, 0.0);
        let coarse = field_residuals(&f, &chart, GridSpec::default(), ResidualConfig::default()).map_err(|e| e.to_string())?;
        let fine = field_residuals(&f, &chart, GridSpec::default(), ResidualConfig { step: 0.5e-5, ..ResidualConfig::default() })
            .map_err(|e| e.to_string())?;
        let (a, b) = (coarse.sup_el.value, fine.sup_el.value);
        ensure(a < 1e-4, || format!("k={k}: EL sup {a:e}"))?;
        // an exactly vanishing residual (k = 0) satisfies this with 0 <= 0
        ensure(3.0 * b <= a, || format!("k={k}: halving the step took {a:e} to {b:e}"))?;
        summary.push(format!("k={k}: {a:.1e}->{b:.1e}"));
    }
    Ok(summary.join(", "))
}

fn c5_nonvanishing_residuals() -> Outcome {
    let chart = SphereChart::unit();
    let m1 = field_residuals(&AngleField::meridian(1, 0.0), &chart, GridSpec::default(), ResidualConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(m1.sup_realpart.value > 0.1, || format!("real part sup {}", m1.sup_realpart.value))?;
    let lat = field_residuals(&AngleField::latitude(0.0), &chart, GridSpec::default(), ResidualConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(lat.sup_el.value > 1e-3, || format!("latitude EL sup {}", lat.sup_el.value))?;
    Ok(format!(
        "real part sup (k=1) = {:.3e} at theta={:.3}; latitude EL sup = {:.3e}",
        m1.sup_realpart.value, m1.sup_realpart.theta, lat.sup_el.value
    ))
}

fn c6_indices() -> Outcome {
    let mut summary = Vec::new();
    for k in 0..=5i64 {
        let r = index_at_poles(&AngleField::meridian(k, 0.0), Orientation::default()).map_err(|e| e.to_string())?;
        ensure((r.index_n, r.index_s) == (1 - k, 1 + k), || format!("k={k}: got ({}, {})", r.index_n, r.index_s))?;
        ensure(poincare_hopf_check(&r) && r.euler_sum == 2, || format!("k={k}: sum {}", r.euler_sum))?;
        summary.push(format!("k={k}:({},{})", r.index_n, r.index_s));
    }
    Ok(format!("(N,S) {} ; all sums 2", summary.join(" ")))
}

fn c7_bcj() -> Outcome {
    for k in 0..=10i64 {
        let b = bcj_lower_bound(1 + k, (1 - k).abs());
        let v = meridian_volume(k, 1.0);
        ensure(b <= v, || format!("k={k}: bound {b} > vol {v}"))?;
    }
    let b1 = bcj_lower_bound(2, 0);
    ensure((b1 - 2.0 * PI * PI).abs() < 1e-12, || format!("k=1 bound {b1}, expected 2 pi^2"))?;
    ensure(b1 < 8.0 * PI, || "k=1: 2 pi^2 < 8 pi fails".into())?;
    Ok(format!("k = 0..10 hold; k=1: {b1:.9} = 2pi^2 < 8pi = {:.9}", 8.0 * PI))
}

fn c8_omega() -> Outcome {
    let c = omega_compare(0.0, &QuadratureSpec::default()).map_err(|e| e.to_string())?;
    ensure(c.margin > 0.0 && c.holds, || format!("margin {} (error bound {})", c.margin, c.vol_latitude.error))?;
    ensure(c.pointwise.samples >= 10_000 && c.pointwise.violations == 0, || format!("{:?}", c.pointwise))?;
    ensure(c.theta0_residual < 1e-12, || format!("theta0 residual {:e}", c.theta0_residual))?;
    Ok(format!(
        "vol(X_l|Omega) = {:.9} < vol_Euc = {:.9}, margin {:.3e}; {} points, max lhs {:.6}; theta0 = {:.12} (res {:.1e})",
        c.vol_latitude.value, c.vol_euclidean_closed, c.margin, c.pointwise.samples, c.pointwise.max_lhs, c.theta0, c.theta0_residual
    ))
}

fn c9_curvature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0_f64;
    for r in [0.5, 1.0, 2.0] {
        let chart = SphereChart::new(r).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let p = SpherePoint::new(rng.gen_range(0.05..PI - 0.05), rng.gen_range(0.0..TAU));
            let k = chart.gauss_curvature(p, DEFAULT_CURVATURE_STEP).map_err(|e| e.to_string())?;
            let err = (k - 1.0 / (r * r)).abs();
            ensure(err < 1e-6, || format!("r={r} at {p:?}: K = {k}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("60 points, max |K - 1/r^2| = {worst:.1e}"))
}

fn c10_ttype() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let constant = TTypeSpec::new((1.0, 0.0), InitialData::Meridian(ZetaSpec::meridian(0, 0.0))).map_err(|e| e.to_string())?;
    let lat = LatitudeSpec::new(0.0);
    let latitude = TTypeSpec::new((0.0, 1.0), InitialData::Latitude(lat)).map_err(|e| e.to_string())?;
    let (mut worst_c, mut worst_l) = (0.0_f64, 0.0_f64);
    for _ in 0..50 {
        let p = SpherePoint::new(rng.gen_range(0.05..PI - 0.05), rng.gen_range(0.05..TAU - 0.05));
        let (a, b) = AngleField::TType(constant.clone()).eval(p).map_err(|e| e.to_string())?;
        worst_c = worst_c.max((a - 1.0).abs()).max(b.abs());
        let (a, b) = AngleField::TType(latitude.clone()).eval(p).map_err(|e| e.to_string())?;
        let (ea, eb) = eval_latitude(&lat, p).map_err(|e| e.to_string())?;
        worst_l = worst_l.max((a - ea).abs()).max((b - eb).abs());
    }
    ensure(worst_c < 1e-8, || format!("constant field off by {worst_c:e}"))?;
    ensure(worst_l < 1e-7, || format!("latitude field off by {worst_l:e}"))?;
    Ok(format!("50 points: constant field err {worst_c:.1e}, latitude field err {worst_l:.1e}"))
}

fn c11_optimizer() -> Outcome {
    let mut lines = Vec::new();
    for (k, target) in [(0, 2.0 * PI * PI), (1, 8.0 * PI)] {
        let t = Instant::now();
        let cfg = FamilyConfig { seed: 2024 + k as u64, ..FamilyConfig::default() };
        let r = minimize_in_family(k, None, &cfg).map_err(|e| format!("family k={k}: {e}"))?;
        let dt = t.elapsed();
        ensure(rel(r.volume, target) < 1e-4, || format!("family k={k}: {} vs {target}", r.volume))?;
        ensure(r.perturbation_norm < 1e-3, || format!("family k={k}: perturbation {}", r.perturbation_norm))?;
        ensure(dt < Duration::from_secs(30), || format!("family k={k} took {dt:?}"))?;
        ensure(r.trace.is_monotone(), || format!("family k={k}: trace not monotone"))?;
        lines.push(format!("family k={k}: {:.9} ({dt:.1?})", r.volume));
    }

    let q = FamilyQuadrature::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..=3i64 {
        let closed = volume_meridian_closed(k, (0.0, PI), TAU, 1.0);
        for _ in 0..100 {
            let n = rng.gen_range(1..=4);
            let fourier = (0..n).map(|_| (rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))).collect();
            let zeta = ZetaSpec::meridian(k, rng.gen_range(0.0..TAU)).with_fourier(fourier);
            let v = family_volume(&zeta, &q, 1.0).map_err(|e| e.to_string())?;
            ensure(v >= closed - 1e-9, || format!("Jensen fails for {zeta:?}: {v} < {closed}"))?;
        }
    }
    lines.push("Jensen 400/400".into());

    for (k, target) in [(0, 2.0 * PI * PI), (1, 8.0 * PI)] {
        let t = Instant::now();
        let r = minimize_grid(k, &GridConfig::default()).map_err(|e| format!("grid k={k}: {e}"))?;
        let dt = t.elapsed();
        ensure(rel(r.volume, target) < 0.02, || format!("grid k={k}: {} vs {target}", r.volume))?;
        ensure(dt < Duration::from_secs(300), || format!("grid k={k} took {dt:?}"))?;
        ensure(r.trace.is_monotone(), || format!("grid k={k}: trace not monotone"))?;
        lines.push(format!("grid k={k}: {:.9} (rel {:.1e}, {dt:.1?})", r.volume, rel(r.volume, target)));
    }
    Ok(lines.join("; "))
}

fn higher_winding_properties() -> Outcome {
    let mut lines = Vec::new();
    for k in 2..=3i64 {
        let r = minimize_grid(k, &GridConfig::default()).map_err(|e| format!("grid k={k}: {e}"))?;
        ensure(r.volume >= r.closed - r.discretization_error, || {
            format!("k={k}: grid {} beats closed {} beyond tolerance {:e}", r.volume, r.closed, r.discretization_error)
        })?;
        let bcj = r.bcj_bound.expect("unit sphere");
        ensure(r.volume >= bcj - r.discretization_error, || format!("k={k}: grid {} below BCJ {bcj}", r.volume))?;
        let fam = minimize_in_family(k, None, &FamilyConfig { seed: 7 + k as u64, ..FamilyConfig::default() })
            .map_err(|e| format!("family k={k}: {e}"))?;
        ensure(fam.volume >= fam.closed - 1e-9, || format!("k={k}: family {} beats closed {}", fam.volume, fam.closed))?;
        ensure(rel(fam.volume, fam.closed) < 1e-4, || format!("k={k}: family {} vs closed {}", fam.volume, fam.closed))?;
        lines.push(format!("k={k}: grid - closed = {:+.2e} (tol {:.1e}), BCJ {bcj:.6}", r.volume - r.closed, r.discretization_error));
    }
    Ok(lines.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1 vol(X_m0) = 2pi^2", c1_parallel_field_volume),
        ("2 vol(X_m1) = 8pi", c2_first_meridian_volume),
        ("3 sandwich bounds and k <-> -k", c3_sandwich_and_evenness),
        ("4 Euler-Lagrange residual", c4_euler_lagrange),
        ("5 non-vanishing residuals", c5_nonvanishing_residuals),
        ("6 pole indices", c6_indices),
        ("7 BCJ bound", c7_bcj),
        ("8 Omega region", c8_omega),
        ("9 Gauss curvature", c9_curvature),
        ("10 T-type transport", c10_ttype),
        ("11 optimizers", c11_optimizer),
        ("k>=2 properties", higher_winding_properties),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
