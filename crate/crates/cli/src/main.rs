mod args;
mod output;

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use volfield::fields::{InitialData, SpecDocument};
use volfield::first_order::{field_residuals, GridSpec, ResidualConfig};
use volfield::minimizer::{
    minimize_grid, minimize_in_family, BestSoFar, FamilyConfig, FamilyResult, GridConfig, GridResult, MinimizeError,
    NelderMeadConfig,
};
use volfield::topology::{index_at_poles, poincare_hopf_check, Orientation};
use volfield::volume::{bounds_check, meridian_sweep, omega_compare, sweep_csv, volume, QuadratureRule};
use volfield::{
    AngleField, DomainRegion, FieldDomain, GridField, LatitudeSpec, QuadratureSpec, SphereChart, SpherePoint, TTypeSpec,
    VolError, ZetaSpec,
};

use args::*;
use output::{emit, json, sig, Format, Table, TABLE_DIGITS};

const EXIT_DOMAIN: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Vol(VolError),
    /// The best point is reported before exiting.
    Budget(String),
    Io(String),
}

impl From<VolError> for CliError {
    fn from(e: VolError) -> Self {
        CliError::Vol(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Vol(e) if e.is_domain() => EXIT_DOMAIN,
            CliError::Vol(_) | CliError::Budget(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Budget(m) | CliError::Io(m) => f.write_str(m),
            CliError::Vol(e) => write!(f, "{e}"),
        }
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Ok(n) = std::env::var("VOLFIELD_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: VOLFIELD_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    let result = match cli.command {
        Command::Volume(a) => cmd_volume(a),
        Command::Residuals(a) => cmd_residuals(a),
        Command::Index(a) => cmd_index(a),
        Command::CompareRegion(a) => cmd_compare_region(a),
        Command::Minimize(a) => cmd_minimize(a),
        Command::FieldSample(a) => cmd_field_sample(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_text(path: &std::path::Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn build_field(a: &FieldArgs) -> Result<AngleField, CliError> {
    if let Some(path) = &a.spec {
        return Ok(SpecDocument::from_json(&read_text(path)?)?.to_field()?);
    }
    if let Some(path) = &a.field_file {
        let file = fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok(AngleField::Grid(GridField::read_from(file)?));
    }
    if a.fourier.len() % 2 != 0 {
        return Err(CliError::Usage("--fourier takes pairs c1,s1,c2,s2,...".into()));
    }
    let zeta = || ZetaSpec::meridian(a.k, a.phi0).with_fourier(a.fourier.chunks(2).map(|p| (p[0], p[1])).collect());
    let family = a.family.unwrap_or(FamilyArg::Meridian);
    if family != FamilyArg::TType && !a.ttype_dir.is_empty() {
        return Err(CliError::Usage("--ttype-dir applies to --family ttype only".into()));
    }
    match family {
        FamilyArg::Meridian | FamilyArg::ZetaFamily => Ok(AngleField::Meridian(zeta())),
        FamilyArg::Latitude => {
            if a.k != 0 || !a.fourier.is_empty() {
                return Err(CliError::Usage("latitude fields take only --phi0".into()));
            }
            Ok(AngleField::latitude(a.phi0))
        }
        FamilyArg::TType => {
            let [ta, tb] = a.ttype_dir[..] else {
                return Err(CliError::Usage("--family ttype requires --ttype-dir a,b".into()));
            };
            let initial = match a.initial {
                InitialArg::Meridian => InitialData::Meridian(zeta()),
                InitialArg::Latitude => InitialData::Latitude(LatitudeSpec::new(a.phi0)),
            };
            Ok(AngleField::TType(TTypeSpec::new((ta, tb), initial)?))
        }
        FamilyArg::Grid => Err(CliError::Usage("--family grid needs --field-file PATH".into())),
    }
}

fn build_region(r: &RegionArgs) -> Result<DomainRegion, CliError> {
    if r.omega {
        return Ok(DomainRegion::Omega);
    }
    match r.region[..] {
        [] => Ok(DomainRegion::Full),
        [t1, t2, p1, p2] => Ok(DomainRegion::rectangle((t1, t2), (p1, p2))?),
        _ => Err(CliError::Usage("--region takes theta1,theta2,phi1,phi2".into())),
    }
}

fn describe(field: &AngleField) -> String {
    match field {
        AngleField::Meridian(z) if z.is_pure() => format!("meridian k={} phi0={}", z.k, z.phi0),
        AngleField::Meridian(z) => format!("zeta-family k={} phi0={} fourier={:?}", z.k, z.phi0, z.fourier),
        AngleField::Latitude(l) => format!("latitude phi0={}", l.phi0),
        AngleField::TType(t) => format!("ttype T=({}, {})", t.direction.0, t.direction.1),
        AngleField::Grid(g) => format!("grid {}x{} k={}", g.n_theta(), g.n_phi(), g.winding()),
    }
}

fn region_name(r: &DomainRegion) -> String {
    match r {
        DomainRegion::Full => "full".into(),
        DomainRegion::Omega => "omega".into(),
        DomainRegion::Rectangle { theta, phi } => format!("[{}, {}] x [{}, {}]", theta.0, theta.1, phi.0, phi.1),
    }
}

#[derive(Serialize)]
struct VolumeReport<'a> {
    field: &'a AngleField,
    #[serde(flatten)]
    result: volfield::VolumeResult,
}

fn cmd_volume(a: VolumeArgs) -> CliResult {
    let field = build_field(&a.field)?;
    let region = build_region(&a.region)?;
    let chart = SphereChart::new(a.common.radius)?;
    let spec = QuadratureSpec {
        rule: match a.rule {
            RuleArg::Gauss => QuadratureRule::TensorGaussLegendre,
            RuleArg::Simpson => QuadratureRule::AdaptiveSimpson,
        },
        panels: a.grid,
        tolerance: a.tolerance,
        ..QuadratureSpec::default()
    };
    let result = volume(&field, &region, &spec, &chart)?;
    let text = match a.common.format {
        Format::Json => json(&VolumeReport { field: &field, result }),
        f => {
            let t = Table::new()
                .text("field", describe(&field))
                .text("region", region_name(&region))
                .num("radius", result.radius)
                .num("volume", result.value)
                .num("error", result.error);
            if f == Format::Csv {
                t.csv()
            } else {
                t.render()
            }
        }
    };
    emit(&text, &a.common.out)
}

fn cmd_residuals(a: ResidualArgs) -> CliResult {
    let field = build_field(&a.field)?;
    let chart = SphereChart::new(a.common.radius)?;
    let grid = GridSpec { n_theta: a.grid.0, n_phi: a.grid.1, eps: a.eps };
    let config = ResidualConfig { step: a.step, ..ResidualConfig::default() };
    let report = field_residuals(&field, &chart, grid, config)?;
    let text = match a.common.format {
        Format::Csv => {
            for (name, s) in [("cr", report.sup_cr), ("el", report.sup_el), ("realpart", report.sup_realpart)] {
                eprintln!("sup {name} = {} at theta={} phi={}", s.value, s.theta, s.phi);
            }
            report.to_csv()
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Summary<'a> {
                field: &'a AngleField,
                grid: GridSpec,
                domain: FieldDomain,
                radius: f64,
                config: ResidualConfig,
                sup_cr: volfield::first_order::SupNorm,
                sup_el: volfield::first_order::SupNorm,
                sup_realpart: volfield::first_order::SupNorm,
            }
            json(&Summary {
                field: &field,
                grid: report.grid,
                domain: report.domain,
                radius: report.radius,
                config: report.config,
                sup_cr: report.sup_cr,
                sup_el: report.sup_el,
                sup_realpart: report.sup_realpart,
            })
        }
        Format::Table => {
            let at = |s: volfield::first_order::SupNorm| {
                format!("{}  at theta={} phi={}", sig(s.value, TABLE_DIGITS), sig(s.theta, 6), sig(s.phi, 6))
            };
            Table::new()
                .text("field", describe(&field))
                .text("grid", format!("{}x{} eps={}", grid.n_theta, grid.n_phi, grid.eps))
                .text("sup |CR|", at(report.sup_cr))
                .text("sup |EL|", at(report.sup_el))
                .text("sup |realpart|", at(report.sup_realpart))
                .render()
        }
    };
    emit(&text, &a.common.out)
}

fn cmd_index(a: IndexArgs) -> CliResult {
    let field = build_field(&a.field)?;
    let orientation = match a.orientation {
        OrientationArg::Mirrored => Orientation::Mirrored,
        OrientationArg::Standard => Orientation::Standard,
    };
    let report = index_at_poles(&field, orientation)?;
    let text = match a.common.format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut out = String::from("theta,winding\n");
            for (t, w) in &report.winding_samples {
                let _ = writeln!(out, "{t},{w}");
            }
            out
        }
        Format::Table => format!(
            "{}N:{} S:{} sum:{}{}\n",
            match &field {
                AngleField::Meridian(z) => format!("k:{} ", z.k),
                _ => String::new(),
            },
            report.index_n,
            report.index_s,
            report.euler_sum,
            if poincare_hopf_check(&report) { "" } else { " (expected 2)" }
        ),
    };
    emit(&text, &a.common.out)
}

fn cmd_compare_region(a: CompareArgs) -> CliResult {
    let region = build_region(&a.region)?;
    let spec = QuadratureSpec::default().with_panels(a.grid.0, a.grid.1);
    if a.common.radius != 1.0 {
        return Err(CliError::Usage("region comparisons are stated on the unit sphere".into()));
    }
    let text = match region {
        DomainRegion::Omega => {
            let c = omega_compare(a.phi0, &spec)?;
            match a.common.format {
                Format::Json => json(&c),
                f => {
                    let t = Table::new()
                        .text("verdict", if c.holds { "vol(X_l|Omega) < vol_Euc(Omega)" } else { "inequality not confirmed" })
                        .num("vol(X_l|Omega)", c.vol_latitude.value)
                        .num("vol_Euc(Omega)", c.vol_euclidean_closed)
                        .num("vol_Euc(Omega) quadrature", c.vol_euclidean.value)
                        .num("margin", c.margin)
                        .num("relative margin", c.margin / c.vol_euclidean_closed)
                        .num("error bound", c.vol_latitude.error)
                        .num("theta0", c.theta0)
                        .num("theta0 residual", c.theta0_residual)
                        .text("pointwise samples", c.pointwise.samples.to_string())
                        .text("pointwise violations", c.pointwise.violations.to_string())
                        .num("max (1+phi^2 sin^2) sin^2", c.pointwise.max_lhs);
                    if f == Format::Csv {
                        t.csv()
                    } else {
                        t.render()
                    }
                }
            }
        }
        DomainRegion::Full | DomainRegion::Rectangle { .. } => {
            let b = bounds_check(a.k, &region, &spec)?;
            match a.common.format {
                Format::Json => json(&b),
                f => {
                    let t = Table::new()
                        .text("verdict", if b.holds { "(k-1) area < vol < (k+1) area" } else { "bounds violated" })
                        .text("k", b.k.to_string())
                        .text("region", region_name(&region))
                        .num("volume", b.volume)
                        .num("lower", b.lower)
                        .num("upper", b.upper)
                        .num("lower margin", b.lower_margin)
                        .num("upper margin", b.upper_margin);
                    if f == Format::Csv {
                        t.csv()
                    } else {
                        t.render()
                    }
                }
            }
        }
    };
    emit(&text, &a.common.out)
}

#[derive(Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
enum MinimizeReport<'a> {
    Family(&'a FamilyResult),
    Grid(GridSummary<'a>),
}

/// Grid result without the lattice values, which go to `--field-out`.
#[derive(Serialize)]
struct GridSummary<'a> {
    k: i64,
    n_theta: usize,
    n_phi: usize,
    volume: f64,
    closed: f64,
    discretization_error: f64,
    bcj_bound: Option<f64>,
    trace: &'a volfield::minimizer::OptimizationTrace,
}

fn cmd_minimize(a: MinimizeArgs) -> CliResult {
    let outcome = match a.method {
        MethodArg::Family => {
            let mut cfg = FamilyConfig { n_fourier: a.terms, radius: a.common.radius, seed: a.seed, ..FamilyConfig::default() };
            if let Some(b) = a.budget {
                cfg.simplex = NelderMeadConfig { max_evals: b, ..cfg.simplex };
            }
            minimize_in_family(a.k, None, &cfg).map(BestSoFar::Family)
        }
        MethodArg::Grid => {
            let mut cfg = GridConfig { n_theta: a.grid.0, n_phi: a.grid.1, radius: a.common.radius, seed: a.seed, ..GridConfig::default() };
            if let Some(b) = a.budget {
                cfg.max_iterations = b;
            }
            minimize_grid(a.k, &cfg).map(BestSoFar::Grid)
        }
    };
    let (best, exhausted) = match outcome {
        Ok(best) => (best, false),
        Err(MinimizeError::BudgetExhausted(best)) => (*best, true),
        Err(MinimizeError::Invalid(e)) => return Err(e.into()),
        Err(e @ MinimizeError::ConstraintViolation(_)) => return Err(CliError::Budget(e.to_string())),
    };
    let trace = match &best {
        BestSoFar::Family(r) => &r.trace,
        BestSoFar::Grid(r) => &r.trace,
    };
    eprintln!("wall clock {:.3} s", trace.wall_clock_secs);
    if let Some(path) = &a.trace_out {
        fs::write(path, trace.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &a.field_out {
        let written = match &best {
            BestSoFar::Family(r) => fs::write(path, SpecDocument::from_field(&AngleField::Meridian(r.zeta.clone()))?.to_json()),
            BestSoFar::Grid(r) => fs::write(path, r.field.to_bytes()),
        };
        written.map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let text = match (&best, a.common.format) {
        (_, Format::Csv) => trace.to_csv(),
        (BestSoFar::Family(r), Format::Json) => json(&MinimizeReport::Family(r)),
        (BestSoFar::Grid(r), Format::Json) => json(&MinimizeReport::Grid(grid_summary(r))),
        (BestSoFar::Family(r), Format::Table) => Table::new()
            .text("method", "family")
            .text("k", a.k.to_string())
            .num("volume", r.volume)
            .num("closed form", r.closed)
            .num("relative gap", r.relative_gap)
            .num("perturbation norm", r.perturbation_norm)
            .text("phi0", sig(r.zeta.phi0, TABLE_DIGITS))
            .text("iterations", r.trace.iterations.to_string())
            .text("evaluations", r.trace.evaluations.to_string())
            .num("simplex size", r.trace.terminal_measure)
            .text("converged", r.trace.converged.to_string())
            .render(),
        (BestSoFar::Grid(r), Format::Table) => {
            let mut t = Table::new()
                .text("method", "grid")
                .text("k", a.k.to_string())
                .text("lattice", format!("{}x{}", r.field.n_theta(), r.field.n_phi()))
                .num("volume", r.volume)
                .num("closed form", r.closed)
                .num("volume - closed", r.volume - r.closed)
                .num("discretization error", r.discretization_error);
            if let Some(b) = r.bcj_bound {
                t = t.num("BCJ bound", b).text("BCJ respected", r.respects_bcj().to_string());
            }
            t.text("iterations", r.trace.iterations.to_string())
                .num("gradient measure", r.trace.terminal_measure)
                .text("converged", r.trace.converged.to_string())
                .render()
        }
    };
    emit(&text, &a.common.out)?;
    if exhausted {
        return Err(CliError::Budget("budget exhausted before convergence; best point reported".into()));
    }
    Ok(())
}

fn grid_summary(r: &GridResult) -> GridSummary<'_> {
    GridSummary {
        k: r.k,
        n_theta: r.field.n_theta(),
        n_phi: r.field.n_phi(),
        volume: r.volume,
        closed: r.closed,
        discretization_error: r.discretization_error,
        bcj_bound: r.bcj_bound,
        trace: &r.trace,
    }
}

/// Cell-centred `theta`; `phi = 2 pi j / m` on full domains, cell-centred
/// after the slit otherwise.
fn sample_points(n: usize, m: usize, domain: FieldDomain) -> Vec<SpherePoint> {
    let mut pts = Vec::with_capacity(n * m);
    for i in 0..n {
        let theta = (i as f64 + 0.5) * PI / n as f64;
        for j in 0..m {
            let phi = match domain {
                FieldDomain::Full => TAU * j as f64 / m as f64,
                FieldDomain::Slit { phi } => phi + (j as f64 + 0.5) * TAU / m as f64,
            };
            pts.push(SpherePoint::new(theta, phi));
        }
    }
    pts
}

fn cmd_field_sample(a: SampleArgs) -> CliResult {
    let field = build_field(&a.field)?;
    let pts = sample_points(a.grid.0, a.grid.1, field.domain());
    let rows = pts
        .iter()
        .map(|p| field.eval(*p).map(|(ca, cb)| [p.theta, p.phi, ca, cb]))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Samples<'a> {
                field: &'a AngleField,
                columns: [&'static str; 4],
                rows: Vec<[f64; 4]>,
            }
            json(&Samples { field: &field, columns: ["theta", "phi", "a", "b"], rows })
        }
        Format::Csv => {
            let mut out = String::from("theta,phi,a,b\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{}", r[0], r[1], r[2], r[3]);
            }
            out
        }
        Format::Table => {
            let mut out = format!("{:>12} {:>12} {:>12} {:>12}\n", "theta", "phi", "a", "b");
            for r in &rows {
                let _ = writeln!(out, "{:>12} {:>12} {:>12} {:>12}", sig(r[0], 9), sig(r[1], 9), sig(r[2], 9), sig(r[3], 9));
            }
            out
        }
    };
    emit(&text, &a.out)
}

fn cmd_sweep(a: SweepArgs) -> CliResult {
    if a.k_min > a.k_max {
        return Err(CliError::Usage(format!("empty range {}..={}", a.k_min, a.k_max)));
    }
    let rows = meridian_sweep(a.k_min..=a.k_max);
    let text = match a.format {
        Format::Csv => sweep_csv(&rows),
        Format::Json => json(&rows),
        Format::Table => {
            let mut out = format!("{:>4} {:>14} {:>14} {:>14} {:>14}\n", "k", "volume", "lower", "upper", "bcj");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:>4} {:>14} {:>14} {:>14} {:>14}",
                    r.k,
                    sig(r.volume, TABLE_DIGITS),
                    sig(r.lower_bound_thm3, TABLE_DIGITS),
                    sig(r.upper_bound_thm3, TABLE_DIGITS),
                    sig(r.bcj_bound, TABLE_DIGITS)
                );
            }
            out
        }
    };
    emit(&text, &a.out)
}
