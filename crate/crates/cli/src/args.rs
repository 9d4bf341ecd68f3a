use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

/// Volumes, first-order residuals, indices and minimisers for unit vector
/// fields on the sphere minus two antipodal points.
#[derive(Debug, Parser)]
#[command(name = "volfield", version, about, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Volume of a field over the full domain, a rectangle, or Omega.
    Volume(VolumeArgs),
    /// Cauchy–Riemann, Euler–Lagrange and real-part residuals on a grid.
    Residuals(ResidualArgs),
    /// Indices at the north and south punctures.
    Index(IndexArgs),
    /// Latitude field against the Euclidean area on Omega, or the sandwich bounds on a rectangle.
    CompareRegion(CompareArgs),
    /// Search for a minimal-volume field at fixed winding.
    Minimize(MinimizeArgs),
    /// Frame coefficients (theta, phi, a, b) on a cell-centred grid, for plotting.
    FieldSample(SampleArgs),
    /// Meridian volumes and bounds for a range of windings.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Meridian,
    #[value(name = "zeta-family")]
    ZetaFamily,
    Latitude,
    #[value(name = "ttype", alias = "t-type")]
    TType,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitialArg {
    Meridian,
    Latitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    Mirrored,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Family,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Gauss,
    Simpson,
}

/// `NxM`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got {s:?}"))?;
    let n = a.trim().parse::<usize>().map_err(|e| format!("{a:?}: {e}"))?;
    let m = b.trim().parse::<usize>().map_err(|e| format!("{b:?}: {e}"))?;
    if n == 0 || m == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((n, m))
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// Field family.
    #[arg(long, value_enum, conflicts_with_all = ["spec", "field_file"])]
    pub family: Option<FamilyArg>,
    /// Winding number of the meridian-type angle.
    #[arg(short = 'k', long = "k", allow_negative_numbers = true, default_value_t = 0)]
    pub k: i64,
    /// Phase of the field.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub phi0: f64,
    /// Fourier perturbation of the meridian angle: c1,s1,c2,s2,...
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 1..)]
    pub fourier: Vec<f64>,
    /// Direction `a,b` of the transported field T (ttype family).
    #[arg(long = "ttype-dir", value_delimiter = ',', allow_negative_numbers = true, num_args = 1..)]
    pub ttype_dir: Vec<f64>,
    /// Initial data along the transversal (ttype family).
    #[arg(long, value_enum, default_value = "meridian")]
    pub initial: InitialArg,
    /// Field from a volfield-spec/1 JSON document.
    #[arg(long, value_name = "PATH", conflicts_with = "field_file")]
    pub spec: Option<PathBuf>,
    /// Grid field from a VFGRID01 file.
    #[arg(long = "field-file", value_name = "PATH")]
    pub field_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    /// Rectangle theta1,theta2,phi1,phi2 of the parameter domain.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 1.., conflicts_with = "omega")]
    pub region: Vec<f64>,
    /// The region {phi sin^2(theta) < |cos(theta)|, 0 < phi < 2 pi}.
    #[arg(long)]
    pub omega: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Radius of the sphere.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub region: RegionArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Quadrature panels NxM in (theta, phi).
    #[arg(long, value_parser = parse_grid, default_value = "256x256")]
    pub grid: (usize, usize),
    #[arg(long, value_enum, default_value = "gauss")]
    pub rule: RuleArg,
    /// Relative tolerance of the quadrature.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sample grid NxM in (theta, phi).
    #[arg(long, value_parser = parse_grid, default_value = "101x101")]
    pub grid: (usize, usize),
    /// Distance kept from the poles (and from the slit).
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Step of the directional differences.
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "mirrored")]
    pub orientation: OrientationArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Winding for the sandwich bounds on a rectangle.
    #[arg(short = 'k', long = "k", allow_negative_numbers = true, default_value_t = 1)]
    pub k: i64,
    /// Phase of the latitude field on Omega.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub phi0: f64,
    /// Quadrature panels NxM.
    #[arg(long, value_parser = parse_grid, default_value = "256x256")]
    pub grid: (usize, usize),
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "family")]
    pub method: MethodArg,
    #[arg(short = 'k', long = "k", allow_negative_numbers = true, default_value_t = 0)]
    pub k: i64,
    /// Seed of the random start.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Lattice NxM of the grid search.
    #[arg(long, value_parser = parse_grid, default_value = "64x64")]
    pub grid: (usize, usize),
    /// Fourier terms of the family search.
    #[arg(long, default_value_t = 6)]
    pub terms: usize,
    /// Objective evaluations (family) or iterations (grid).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Write the final field (spec JSON for family, VFGRID for grid).
    #[arg(long = "field-out", value_name = "PATH")]
    pub field_out: Option<PathBuf>,
    /// Write the trace as iteration,objective CSV.
    #[arg(long = "trace-out", value_name = "PATH")]
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Sample grid NxM in (theta, phi).
    #[arg(long, value_parser = parse_grid, default_value = "24x48")]
    pub grid: (usize, usize),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "k-min", allow_negative_numbers = true, default_value_t = 0)]
    pub k_min: i64,
    #[arg(long = "k-max", allow_negative_numbers = true, default_value_t = 10)]
    pub k_max: i64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
