//! Command-line front end: build, certify, knot, census and geodesic runs
//! with JSON/CSV/OBJ exports.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geodesic::{
    closure_check, find_torus_geodesic, geodesic_residual, integrate_geodesic_with,
    random_admissible_start, write_trajectory_csv, GeodesicOptions, GeodesicState, TorusSolution,
    CLOSURE_TOLERANCE, DEFAULT_ODE_TOLERANCE,
};
use crate::knot::{classify_torus_knot, winding_numbers};
use crate::metric::{
    build_metric_with_tolerance, curvature_scan, gcd, oracle_cross_check, QuotientMetric,
    CORE_DELTA, DEFAULT_WARP_TOLERANCE,
};
use crate::quotient::hopf_circle_image;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_WARP: i32 = 2;
pub const EXIT_POSITIVITY: i32 = 3;
pub const EXIT_GEODESY: i32 = 4;

const DEFAULT_RHO: f64 = 0.25;
const DEFAULT_GRID: usize = 2001;
const DEFAULT_ORACLE_SAMPLES: usize = 1000;
const DEFAULT_CURVE_SAMPLES: usize = 4096;
const DEFAULT_LENGTH: f64 = 200.0;
const HOPF_RESIDUAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "s3knots",
    version,
    about = "Positively curved cyclic quotients of S^3 and their knotted closed geodesics"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Order of the rotation of the first coordinate (t-circles).
    #[arg(short = 'm', global = true)]
    pub m: Option<u32>,
    /// Order of the rotation of the second coordinate (theta-circles).
    #[arg(short = 'n', global = true)]
    pub n: Option<u32>,
    /// Collar width around each core circle.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true)]
    pub tol_warp: Option<f64>,
    #[arg(long, global = true)]
    pub tol_ode: Option<f64>,
    #[arg(long, global = true)]
    pub tol_closure: Option<f64>,
    /// Radial grid size for warp verification and curvature scans.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Extra export formats (repeatable).
    #[arg(long = "format", value_enum, global = true)]
    pub formats: Vec<Format>,
    /// JSON file with any of the flag values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Obj,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build both warps and verify their properties.
    Build,
    /// Certify positive curvature and the round middle band.
    Certify {
        /// Random samples for the finite-difference cross-check.
        #[arg(long)]
        samples: Option<usize>,
        /// Negates the warp concavity on the middle band (negative control).
        #[arg(long, hide = true)]
        inject_concavity_defect: bool,
    },
    /// Classify the image of the Hopf circle `z2 = lambda z1`.
    Knot {
        #[arg(long, allow_hyphen_values = true)]
        lambda_re: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lambda_im: Option<f64>,
        /// Use the conjugate circle `z2 = conj(lambda z1)`.
        #[arg(long)]
        conjugated: bool,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Enumerate torus geodesics for all coprime windings within bounds.
    Census {
        #[arg(long)]
        p_max: Option<u32>,
        #[arg(long)]
        q_max: Option<u32>,
    },
    /// Integrate one geodesic and report conservation.
    Geodesic {
        /// Start radius; a random admissible start is drawn when absent.
        #[arg(long)]
        r0: Option<f64>,
        /// Direction in the orthonormal frame (r, theta, t), normalized.
        #[arg(long, num_args = 3, value_names = ["VR", "VTHETA", "VT"], allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
        #[arg(long)]
        length: Option<f64>,
    },
}

/// Values accepted from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub m: Option<u32>,
    pub n: Option<u32>,
    pub rho: Option<f64>,
    pub tol_warp: Option<f64>,
    pub tol_ode: Option<f64>,
    pub tol_closure: Option<f64>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub formats: Option<Vec<Format>>,
    pub samples: Option<usize>,
    pub lambda_re: Option<f64>,
    pub lambda_im: Option<f64>,
    pub conjugated: Option<bool>,
    pub p_max: Option<u32>,
    pub q_max: Option<u32>,
    pub length: Option<f64>,
}

/// Validated run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub m: u32,
    pub n: u32,
    pub rho: f64,
    pub tol_warp: f64,
    pub tol_ode: f64,
    pub tol_closure: f64,
    pub grid: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub formats: Vec<Format>,
}

impl RunConfig {
    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotCoprime { .. } | Error::InfeasibleZone { .. } | Error::NoRoot(_) => EXIT_WARP,
        Error::CoreApproach { .. }
        | Error::DriftAbort { .. }
        | Error::StepSizeUnderflow { .. }
        | Error::NoSolution { .. }
        | Error::NotClosed { .. }
        | Error::WindingAmbiguous { .. }
        | Error::NotCoprimeWindings { .. }
        | Error::TooFewSamples { .. } => EXIT_GEODESY,
        Error::Domain(_)
        | Error::InvalidArgument(_)
        | Error::CoreSingularity { .. }
        | Error::DegeneratePlane { .. }
        | Error::NotOnSphere { .. }
        | Error::CollarViolation { .. } => EXIT_USAGE,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage(format!("json: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

pub fn load_config_file(path: &Path) -> CliResult<ConfigFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))
}

fn positive(name: &str, x: f64) -> CliResult<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::usage(format!(
            "{name} = {x} must be positive and finite"
        )))
    }
}

/// Merges flags over the file and checks every value before any work.
pub fn resolve(args: &CommonArgs, file: &ConfigFile) -> CliResult<RunConfig> {
    let m = args.m.or(file.m).unwrap_or(2);
    let n = args.n.or(file.n).unwrap_or(3);
    if m == 0 || n == 0 {
        return Err(Failure::usage("m and n must be positive"));
    }
    if gcd(m as u64, n as u64) != 1 {
        // a warp-level failure by contract
        return Err(Error::NotCoprime {
            m: m as i64,
            n: n as i64,
        }
        .into());
    }
    let rho = args.rho.or(file.rho).unwrap_or(DEFAULT_RHO);
    if !(rho > 0.0 && rho < FRAC_PI_4) {
        return Err(Failure::usage(format!("rho = {rho} must lie in (0, pi/4)")));
    }
    let grid = args.grid.or(file.grid).unwrap_or(DEFAULT_GRID);
    if grid < 500 {
        return Err(Failure::usage(format!(
            "grid = {grid} must be at least 500"
        )));
    }
    let mut formats = if args.formats.is_empty() {
        file.formats
            .clone()
            .unwrap_or_else(|| vec![Format::Csv, Format::Json])
    } else {
        args.formats.clone()
    };
    formats.sort();
    formats.dedup();
    Ok(RunConfig {
        m,
        n,
        rho,
        tol_warp: positive(
            "tol-warp",
            args.tol_warp
                .or(file.tol_warp)
                .unwrap_or(DEFAULT_WARP_TOLERANCE),
        )?,
        tol_ode: positive(
            "tol-ode",
            args.tol_ode
                .or(file.tol_ode)
                .unwrap_or(DEFAULT_ODE_TOLERANCE),
        )?,
        tol_closure: positive(
            "tol-closure",
            args.tol_closure
                .or(file.tol_closure)
                .unwrap_or(CLOSURE_TOLERANCE),
        )?,
        grid,
        out: args
            .out
            .clone()
            .or(file.out.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        seed: args.seed.or(file.seed).unwrap_or(0),
        formats,
    })
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn metric_for(cfg: &RunConfig) -> CliResult<QuotientMetric> {
    Ok(build_metric_with_tolerance(
        cfg.m,
        cfg.n,
        cfg.rho,
        cfg.tol_warp,
    )?)
}

#[derive(Debug, Serialize)]
struct WarpReports {
    theta: crate::warp::PropertyReport,
    t: crate::warp::PropertyReport,
    passed: bool,
}

pub fn cmd_build(cfg: &RunConfig) -> CliResult<()> {
    let metric = metric_for(cfg)?;
    if metric.is_round() {
        println!("round metric: m = n = 1, no collar is modified");
    }
    let theta = metric.theta_profile().verify(cfg.grid)?;
    let t = metric.t_profile().verify(cfg.grid)?;
    let passed = theta.passed() && t.passed();
    write_json(&cfg.out, "metric.json", &metric)?;
    write_json(
        &cfg.out,
        "warp_report.json",
        &WarpReports {
            theta: theta.clone(),
            t: t.clone(),
            passed,
        },
    )?;
    for (name, r) in [("theta warp", &theta), ("t warp", &t)] {
        let seam = r
            .seam_jumps_a
            .iter()
            .chain(&r.seam_jumps_b)
            .fold(0.0_f64, |a, &b| a.max(b));
        println!(
            "{name}: n = {}, s = {:.6}, min sigma' = {:.3e}, max sigma'' = {:.3e}, seams < {:.1e}, constraint residual {:.1e}: {}",
            r.n,
            if name == "theta warp" { metric.theta_profile().s() } else { metric.t_profile().s() },
            r.min_first_derivative,
            r.max_second_derivative,
            seam,
            r.constraint_residual,
            if r.passed() { "ok" } else { "FAILED" }
        );
    }
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_WARP,
            message: "warp verification failed".into(),
        })
    }
}

#[derive(Debug, Serialize)]
struct Certificate<'a> {
    scan: &'a crate::metric::CurvatureReport,
    oracle: &'a crate::metric::OracleCheck,
    passed: bool,
}

pub fn cmd_certify(cfg: &RunConfig, samples: usize, defect: bool) -> CliResult<()> {
    let mut metric = metric_for(cfg)?;
    if defect {
        metric = metric.with_concavity_defect();
    }
    let mut scan = curvature_scan(&metric, cfg.grid)?;
    let oracle = oracle_cross_check(&metric, samples, cfg.seed)?;
    let passed = scan.passed() && oracle.passed();
    scan.write_csv(create(&cfg.out, "curvature.csv")?)?;
    if cfg.wants(Format::Json) {
        scan.rows.clear();
        write_json(
            &cfg.out,
            "curvature_report.json",
            &Certificate {
                scan: &scan,
                oracle: &oracle,
                passed,
            },
        )?;
    }
    println!(
        "min curvature {:.6} at r = {:.6} ({}), refined {:.6}",
        scan.min_curvature, scan.argmin_r, scan.argmin_plane, scan.refined_min_curvature
    );
    println!(
        "middle band |K - 1| = {:.3e} (< {:.0e}), off-diagonal {:.3e}",
        scan.middle_band_deviation, scan.band_tolerance, scan.off_diagonal_max
    );
    println!(
        "oracle: {} samples, max scaled error {:.3e} (< {:.0e}); {} bump-zone samples, max {:.3e}",
        oracle.samples,
        oracle.max_scaled_error,
        oracle.tolerance,
        oracle.bump_zone_samples,
        oracle.bump_zone_max_scaled_error
    );
    if passed {
        println!("certificate: positive");
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_POSITIVITY,
            message: format!(
                "certificate failed: positive {}, band round {}, diagonal {}, oracle {}",
                scan.positive(),
                scan.band_round(),
                scan.diagonal(),
                oracle.passed()
            ),
        })
    }
}

#[derive(Debug, Serialize)]
struct KnotReport {
    lambda: [f64; 2],
    conjugated: bool,
    radius: f64,
    residual: f64,
    period: f64,
    windings: (i64, i64),
    knot: crate::knot::KnotType,
}

pub fn cmd_knot(
    cfg: &RunConfig,
    lambda: Complex64,
    conjugated: bool,
    samples: usize,
) -> CliResult<()> {
    let metric = metric_for(cfg)?;
    let curve = hopf_circle_image(cfg.m, cfg.n, cfg.rho, lambda, conjugated, samples)?;
    let name = if conjugated {
        "curve_hopf_conjugated"
    } else {
        "curve_hopf"
    };
    curve.write_csv(create(&cfg.out, &format!("{name}.csv"))?)?;
    if cfg.wants(Format::Obj) {
        curve.write_obj(create(&cfg.out, &format!("{name}.obj"))?)?;
    }
    let residual = geodesic_residual(&metric, &curve)?;
    if !(residual < HOPF_RESIDUAL_TOLERANCE) {
        return Err(Failure {
            code: EXIT_GEODESY,
            message: format!("geodesic residual {residual:e} exceeds {HOPF_RESIDUAL_TOLERANCE:e}"),
        });
    }
    let closure = closure_check(&curve, cfg.tol_closure)?;
    let windings = winding_numbers(&curve)?;
    let knot = classify_torus_knot(windings.0, windings.1)?;
    let report = KnotReport {
        lambda: [lambda.re, lambda.im],
        conjugated,
        radius: curve.r[0],
        residual,
        period: closure.period,
        windings,
        knot,
    };
    if cfg.wants(Format::Json) {
        write_json(&cfg.out, "knot.json", &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

/// One row of the census table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub p: i64,
    pub q: i64,
    /// `radii`, `band`, `no_solution` or `error`.
    pub status: String,
    pub radii: Vec<f64>,
    pub band: Option<(f64, f64)>,
    pub knot: String,
    pub periods: Vec<f64>,
    pub residuals: Vec<f64>,
    pub note: String,
}

fn census_row(metric: &QuotientMetric, p: i64, q: i64) -> CensusRow {
    let knot = classify_torus_knot(p, q)
        .map(|k| k.label)
        .unwrap_or_else(|e| e.to_string());
    let mut row = CensusRow {
        p,
        q,
        status: String::new(),
        radii: Vec::new(),
        band: None,
        knot,
        periods: Vec::new(),
        residuals: Vec::new(),
        note: String::new(),
    };
    match find_torus_geodesic(metric, p, q) {
        Ok(sol) => {
            for g in sol.geodesics() {
                row.radii.push(g.r);
                row.periods.push(g.closure.period);
                row.residuals.push(g.residual);
            }
            match sol {
                TorusSolution::Radii { .. } => row.status = "radii".into(),
                TorusSolution::DegenerateBand { band, .. } => {
                    row.status = "band".into();
                    row.band = Some(band);
                    row.note = "representative at the band midpoint".into();
                }
            }
        }
        Err(e @ Error::NoSolution { .. }) => {
            row.status = "no_solution".into();
            row.note = e.to_string();
        }
        Err(e) => {
            row.status = "error".into();
            row.note = e.to_string();
        }
    }
    row
}

/// All coprime `(p, q)` with `0 <= p <= p_max`, `0 <= q <= q_max`, sorted.
pub fn census_pairs(p_max: u32, q_max: u32) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for p in 0..=p_max as i64 {
        for q in 0..=q_max as i64 {
            if (p, q) != (0, 0) && gcd(p as u64, q as u64) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

pub fn census(metric: &QuotientMetric, p_max: u32, q_max: u32) -> Vec<CensusRow> {
    census_pairs(p_max, q_max)
        .par_iter()
        .map(|&(p, q)| census_row(metric, p, q))
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:e}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_census_csv<W: Write>(rows: &[CensusRow], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "p,q,status,radii,band_lo,band_hi,knot,period,residual,note"
    )?;
    for r in rows {
        let (lo, hi) = r
            .band
            .map(|(a, b)| (format!("{a:e}"), format!("{b:e}")))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},\"{}\"",
            r.p,
            r.q,
            r.status,
            join(&r.radii),
            lo,
            hi,
            r.knot,
            join(&r.periods),
            join(&r.residuals),
            r.note.replace('"', "'")
        )?;
    }
    Ok(())
}

pub fn cmd_census(cfg: &RunConfig, p_max: u32, q_max: u32) -> CliResult<()> {
    if p_max < 1 || q_max < 1 {
        return Err(Failure::usage("census bounds must be at least 1"));
    }
    let metric = metric_for(cfg)?;
    let rows = census(&metric, p_max, q_max);
    let mut w = create(&cfg.out, "census.csv")?;
    write_census_csv(&rows, &mut w)?;
    w.flush()?;
    if cfg.wants(Format::Json) {
        write_json(&cfg.out, "census.json", &rows)?;
    }
    for r in &rows {
        println!(
            "({:>2},{:>2}) {:<11} {:<10} {}",
            r.p,
            r.q,
            r.status,
            r.knot,
            match r.status.as_str() {
                "band" => format!("band {:?}", r.band.unwrap()),
                "radii" => format!("r = {}", join(&r.radii)),
                _ => String::new(),
            }
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct GeodesicRun {
    start: GeodesicState,
    length: f64,
    conservation: crate::geodesic::ConservationReport,
}

pub fn cmd_geodesic(
    cfg: &RunConfig,
    r0: Option<f64>,
    direction: Option<[f64; 3]>,
    length: f64,
) -> CliResult<()> {
    let metric = metric_for(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = match r0 {
        None => random_admissible_start(&metric, &mut rng, 2.0 * CORE_DELTA),
        Some(r) => {
            let d = direction.unwrap_or([0.0, 1.0, 1.0]);
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Failure::usage("direction must be a non-zero vector"));
            }
            let (f, h) = metric.warps(r);
            GeodesicState {
                r,
                theta: 0.0,
                t: 0.0,
                vr: d[0] / norm,
                vtheta: d[1] / norm / f,
                vt: d[2] / norm / h,
            }
        }
    };
    let opts = GeodesicOptions {
        tolerance: cfg.tol_ode,
        ..GeodesicOptions::default()
    };
    let (curve, conservation) = integrate_geodesic_with(&metric, &start, length, &opts)?;
    if cfg.wants(Format::Csv) {
        write_trajectory_csv(&metric, &curve, create(&cfg.out, "curve_geodesic.csv")?)?;
    }
    if cfg.wants(Format::Obj) {
        curve.write_obj(create(&cfg.out, "curve_geodesic.obj")?)?;
    }
    let run = GeodesicRun {
        start,
        length,
        conservation,
    };
    if cfg.wants(Format::Json) {
        write_json(&cfg.out, "conservation.json", &run)?;
    }
    println!("{}", serde_json::to_string_pretty(&run)?);
    Ok(())
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let file = match &cli.common.config {
        Some(p) => load_config_file(p)?,
        None => ConfigFile::default(),
    };
    let cfg = resolve(&cli.common, &file)?;
    fs::create_dir_all(&cfg.out)?;
    match &cli.command {
        Command::Build => cmd_build(&cfg),
        Command::Certify {
            samples,
            inject_concavity_defect,
        } => cmd_certify(
            &cfg,
            samples.or(file.samples).unwrap_or(DEFAULT_ORACLE_SAMPLES),
            *inject_concavity_defect,
        ),
        Command::Knot {
            lambda_re,
            lambda_im,
            conjugated,
            samples,
        } => {
            let lambda = Complex64::new(
                lambda_re.or(file.lambda_re).unwrap_or(1.0),
                lambda_im.or(file.lambda_im).unwrap_or(0.0),
            );
            cmd_knot(
                &cfg,
                lambda,
                *conjugated || file.conjugated.unwrap_or(false),
                samples.or(file.samples).unwrap_or(DEFAULT_CURVE_SAMPLES),
            )
        }
        Command::Census { p_max, q_max } => cmd_census(
            &cfg,
            p_max.or(file.p_max).unwrap_or(5),
            q_max.or(file.q_max).unwrap_or(5),
        ),
        Command::Geodesic {
            r0,
            direction,
            length,
        } => {
            let length = positive("length", length.or(file.length).unwrap_or(DEFAULT_LENGTH))?;
            if let Some(r) = r0 {
                if !(*r > 2.0 * CORE_DELTA && *r < TAU / 4.0 - 2.0 * CORE_DELTA) {
                    return Err(Failure::usage(format!("r0 = {r} is too close to a core")));
                }
            }
            let direction = direction.as_ref().map(|d| [d[0], d[1], d[2]]);
            cmd_geodesic(&cfg, *r0, direction, length)
        }
    }
}
