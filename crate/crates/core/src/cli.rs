//! The `kstab` command line: one job file in, one JSON report out.
//!
//! Exit codes: `0` success (and agreement, when a check was requested),
//! `1` a check failed, `2` bad input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::conventions::Conventions;
use crate::error::{Error, Result};
use crate::futaki;
use crate::job::{Job, JobSpec, SCHEMA};
use crate::mabuchi::{self, Forcing, PotentialSpec, SymplecticPotential};
use crate::pick;
use crate::quadrature::GradedQuadratureSpec;
use crate::rational::{int, parse_rational, to_f64, Rational};
use crate::report::format_f64;
use crate::rootsystem::{RootSystem, Series};

#[derive(Debug, Parser)]
#[command(name = "kstab", version, about = "Futaki invariants, lattice-sum asymptotics and Mabuchi functionals")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Grading depth of the boundary-graded quadrature.
    #[arg(long, global = true)]
    pub quad_depth: Option<u32>,
    /// Grading ratio, as `p/q`.
    #[arg(long, global = true)]
    pub quad_ratio: Option<String>,
    /// Quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Omit the `meta` block (timestamp, version) from the report.
    #[arg(long, global = true)]
    pub no_meta: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Volume, average scalar curvature and Futaki invariant.
    Futaki(FutakiArgs),
    /// Two-term lattice-sum asymptotics of a polynomial.
    Pick(PickArgs),
    /// Mabuchi functional and Euler–Lagrange residual.
    Mabuchi(MabuchiArgs),
    /// Scalar curvature of a potential on a grid.
    Scalar(ScalarArgs),
    /// Weyl dimension of an irreducible representation.
    Dims(DimsArgs),
}

#[derive(Debug, Args)]
pub struct FutakiArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Cross-check against the lattice-sum oracle at `R` and `R + 1`.
    #[arg(long)]
    pub oracle: bool,
    /// Largest dilation sampled by the oracle.
    #[arg(long)]
    pub kmax: Option<u64>,
    /// Lift height, as `p/q`.
    #[arg(long = "R")]
    pub r: Option<String>,
}

#[derive(Debug, Args)]
pub struct PickArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub kset: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct MabuchiArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Potential file; defaults to the job's `potential`, then to `u_σ`.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// `paper`, `csc` or `zero`.
    #[arg(long = "A")]
    pub a: Option<String>,
    /// Residual grid refinement `m` (points of `P ∩ (1/m)ℤⁿ`).
    #[arg(long)]
    pub grid: Option<u64>,
    /// CSV file for the residual grid.
    #[arg(long, default_value = "residual.csv")]
    pub csv: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScalarArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub potential: Option<PathBuf>,
    #[arg(long)]
    pub grid: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DimsArgs {
    #[arg(long)]
    pub series: String,
    #[arg(long)]
    pub rank: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Vec<i64>,
}

/// Adopted factor choices, written into every report.
#[derive(Debug, Serialize)]
pub struct ConventionBlock {
    #[serde(flatten)]
    pub factors: Conventions,
    pub weight: &'static str,
    pub lift_projection: &'static str,
    #[serde(rename = "A_paper")]
    pub a_paper: &'static str,
    #[serde(rename = "A_csc")]
    pub a_csc: &'static str,
    pub pick_remainder: &'static str,
}

impl Default for ConventionBlock {
    fn default() -> Self {
        ConventionBlock {
            factors: Conventions::default(),
            weight: "k(R - f(lambda/k))",
            lift_projection: "drop last coordinate",
            a_paper: "(a - f_G)/2",
            a_csc: "2(a - f_G)",
            pick_remainder: "O(k^(n-2))",
        }
    }
}

#[derive(Debug, Serialize)]
struct Meta {
    version: &'static str,
    timestamp: u64,
    threads: usize,
}

#[derive(Debug, Serialize)]
struct Report<T: Serialize> {
    schema: &'static str,
    command: &'static str,
    convention: ConventionBlock,
    result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<Meta>,
}

/// Outcome of one command: JSON body, pass/fail and a one-line summary.
struct Outcome<T: Serialize> {
    command: &'static str,
    result: T,
    passed: bool,
    summary: String,
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InterpolationMismatch { .. } | Error::NonFinite(_) => 1,
        _ => 2,
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Reports go to `--out` or `stdout`; summaries and errors to `stderr`.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.global.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let result = match &cli.command {
        Command::Futaki(a) => futaki_cmd(a).and_then(|o| emit(&cli.global, o)),
        Command::Pick(a) => pick_cmd(a).and_then(|o| emit(&cli.global, o)),
        Command::Mabuchi(a) => mabuchi_cmd(&cli.global, a).and_then(|o| emit(&cli.global, o)),
        Command::Scalar(a) => scalar_cmd(&cli.global, a).and_then(|o| emit(&cli.global, o)),
        Command::Dims(a) => dims_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kstab: {e}");
            if matches!(e, Error::NotPositive { .. }) {
                eprintln!("kstab: every vertex of P must lie in the open positive chamber (ampleness)");
            }
            exit_code_for(&e)
        }
    }
}

fn emit<T: Serialize>(global: &GlobalArgs, outcome: Outcome<T>) -> Result<i32> {
    let meta = (!global.no_meta).then(|| Meta {
        version: env!("CARGO_PKG_VERSION"),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        threads: rayon::current_num_threads(),
    });
    let report = Report {
        schema: SCHEMA,
        command: outcome.command,
        convention: ConventionBlock::default(),
        result: outcome.result,
        meta,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    match &global.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    eprintln!("{}", outcome.summary);
    Ok(if outcome.passed { 0 } else { 1 })
}

fn load(path: &Path) -> Result<Job> {
    JobSpec::from_path(path)?.build()
}

fn quadrature(global: &GlobalArgs, job: &Job) -> Result<GradedQuadratureSpec> {
    let mut spec = job.spec.options.quadrature.clone().unwrap_or_default();
    if let Some(d) = global.quad_depth {
        spec.depth = d;
    }
    if let Some(r) = &global.quad_ratio {
        spec.ratio = parse_rational(r)?;
    }
    if let Some(t) = global.tol {
        spec.tolerance = t;
    }
    spec.validate()?;
    Ok(spec)
}

/// Smallest integer `R` with `f ≤ R − 1` on the vertices of `P`.
fn default_height(job: &Job, f: &crate::pl::PiecewiseAffine) -> Rational {
    let top = job
        .polytope
        .vertices()
        .iter()
        .map(|v| f.eval(v))
        .max()
        .expect("polytopes have vertices");
    Rational::from_integer(top.ceil().to_integer()) + int(1)
}

#[derive(Debug, Serialize)]
struct FutakiResult {
    #[serde(rename = "R", with = "crate::rational::serde_rational")]
    r: Rational,
    #[serde(flatten)]
    report: futaki::FutakiReport,
}

fn futaki_cmd(args: &FutakiArgs) -> Result<Outcome<FutakiResult>> {
    let job = load(&args.spec)?;
    let f = job
        .f
        .clone()
        .ok_or_else(|| Error::Parse("field `f`: the futaki command needs a piecewise-affine function".into()))?;
    let weight = job.root_system.weight();
    let r = match (&args.r, &job.spec.r) {
        (Some(s), _) => parse_rational(s)?,
        (None, Some(r)) => r.clone(),
        (None, None) => default_height(&job, &f),
    };
    let kmax = args.kmax.or(job.spec.options.kmax);
    let report = if args.oracle {
        let samples = match kmax {
            Some(kmax) => {
                let m = f.sampling_period(&job.polytope)?;
                (1..=kmax / m).map(|t| t * m).collect()
            }
            None => futaki::default_samples(&weight, &job.polytope, &f)?,
        };
        futaki::futaki_cross_check(&weight, &job.polytope, &f, &r, Some(&samples))?
    } else {
        futaki::futaki_report(&weight, &job.polytope, &f)?
    };
    let passed = report.agreement.unwrap_or(true);
    let summary = match &report.f1_oracle {
        Some(o) => format!(
            "F1 closed = {}, oracle = {}, agreement = {}",
            report.f1_closed, o, passed
        ),
        None => format!("F1 = {}, vol_W = {}, a = {}", report.f1_closed, report.vol_w, report.a),
    };
    Ok(Outcome {
        command: "futaki",
        result: FutakiResult { r, report },
        passed,
        summary,
    })
}

fn pick_cmd(args: &PickArgs) -> Result<Outcome<pick::PickCheck>> {
    let job = load(&args.spec)?;
    let h = job
        .h
        .clone()
        .ok_or_else(|| Error::Parse("field `h`: the pick command needs a polynomial".into()))?;
    let kset = args
        .kset
        .clone()
        .or_else(|| job.spec.options.kset.clone())
        .unwrap_or_else(|| vec![4, 8, 16, 32, 64]);
    let check = pick::pick_check(&job.polytope, &h, &kset)?;
    let passed = check.passed || check.informational;
    let summary = format!(
        "c_n = {}, c_(n-1) = {}, {}: {}{}",
        show(&check.fit.c_top),
        show(&check.fit.c_next),
        if check.passed { "PASS" } else { "FAIL" },
        check.reason,
        if check.informational { " (h not convex; informational)" } else { "" }
    );
    Ok(Outcome {
        command: "pick",
        result: check,
        passed,
        summary,
    })
}

fn show(s: &pick::Scalar) -> String {
    match s {
        pick::Scalar::Exact(q) => q.to_string(),
        pick::Scalar::Float(x) => format_f64(*x),
    }
}

fn potential(job: &Job, file: Option<&PathBuf>) -> Result<SymplecticPotential> {
    let spec = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            serde_path_to_error::deserialize::<_, PotentialSpec>(de)
                .map_err(|e| Error::Parse(format!("{}: field `{}`: {}", path.display(), e.path(), e.inner())))?
        }
        None => job.spec.potential.clone().unwrap_or(PotentialSpec {
            canonical: true,
            perturbation: None,
        }),
    };
    spec.build(&job.polytope)
}

fn default_grid(job: &Job) -> u64 {
    match job.polytope.dim() {
        1 => 100,
        2 => 16,
        _ => 6,
    }
}

#[derive(Debug, Serialize)]
struct MabuchiResult {
    #[serde(rename = "A")]
    a: &'static str,
    #[serde(flatten)]
    value: mabuchi::MabuchiValue,
    residual_csv: String,
    residual_points: usize,
    #[serde(serialize_with = "crate::report::serialize_f64")]
    residual_max_abs: f64,
}

fn mabuchi_cmd(global: &GlobalArgs, args: &MabuchiArgs) -> Result<Outcome<MabuchiResult>> {
    let job = load(&args.spec)?;
    let spec = quadrature(global, &job)?;
    let u = potential(&job, args.potential.as_ref())?;
    let preset = args
        .a
        .clone()
        .or_else(|| job.spec.options.a_preset.clone())
        .unwrap_or_else(|| "paper".into());
    let forcing: Forcing = preset.parse()?;
    let weight = job.root_system.weight();
    let value = mabuchi::mabuchi_eval(&weight, &u, &forcing, &spec)?;
    let grid = args.grid.or(job.spec.options.grid).unwrap_or_else(|| default_grid(&job));
    let residuals = mabuchi::residual_grid(&weight, &u, &forcing, grid)?;
    write_residual_csv(&args.csv, job.polytope.dim(), &residuals)?;
    let max_abs = residuals.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
    let passed = !value.flagged;
    let summary = format!(
        "F_A = {} (error estimate {}{}), residual grid written to {}",
        format_f64(value.value),
        format_f64(value.error_estimate),
        if value.flagged { ", above tolerance" } else { "" },
        args.csv.display()
    );
    Ok(Outcome {
        command: "mabuchi",
        result: MabuchiResult {
            a: forcing.name(),
            value,
            residual_csv: args.csv.display().to_string(),
            residual_points: residuals.len(),
            residual_max_abs: max_abs,
        },
        passed,
        summary,
    })
}

fn write_residual_csv(path: &Path, n: usize, rows: &[(Vec<f64>, f64)]) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain(std::iter::once("r".into())).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (x, r) in rows {
        let cells: Vec<String> = x.iter().chain(std::iter::once(r)).map(|v| format_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
struct ScalarPoint {
    #[serde(serialize_with = "crate::report::serialize_vec_f64")]
    x: Vec<f64>,
    #[serde(rename = "S", serialize_with = "crate::report::serialize_f64")]
    s: f64,
}

#[derive(Debug, Serialize)]
struct ScalarResult {
    #[serde(serialize_with = "crate::report::serialize_f64")]
    total: f64,
    #[serde(serialize_with = "crate::report::serialize_f64")]
    error_estimate: f64,
    #[serde(with = "crate::rational::serde_rational")]
    a_times_vol_w: Rational,
    identity_holds: bool,
    grid: Vec<ScalarPoint>,
}

fn scalar_cmd(global: &GlobalArgs, args: &ScalarArgs) -> Result<Outcome<ScalarResult>> {
    let job = load(&args.spec)?;
    let spec = quadrature(global, &job)?;
    let u = potential(&job, args.potential.as_ref())?;
    let weight = job.root_system.weight();
    let grid = args.grid.or(job.spec.options.grid).unwrap_or_else(|| default_grid(&job));
    let points = mabuchi::interior_grid(&job.polytope, grid)
        .into_iter()
        .map(|x| {
            let s = mabuchi::scalar_curvature(&weight, &u, &x)?;
            Ok(ScalarPoint { x, s })
        })
        .collect::<Result<Vec<_>>>()?;
    let (total, target) = mabuchi::total_scalar_curvature(&weight, &u, &spec, &Conventions::default())?;
    let target_f = to_f64(&target);
    let tol = global.tol.unwrap_or(1e-6).max(total.error_estimate);
    let identity_holds = (total.value - target_f).abs() <= tol * target_f.abs().max(1.0);
    let summary = format!(
        "∫ S W = {} vs a·Vol_W = {} ({})",
        format_f64(total.value),
        target,
        if identity_holds { "ok" } else { "mismatch" }
    );
    Ok(Outcome {
        command: "scalar",
        result: ScalarResult {
            total: total.value,
            error_estimate: total.error_estimate,
            a_times_vol_w: target,
            identity_holds,
            grid: points,
        },
        passed: identity_holds,
        summary,
    })
}

fn dims_cmd(args: &DimsArgs) -> Result<i32> {
    let series: Series = args.series.parse().map_err(|_| Error::UnsupportedSeries {
        series: args.series.clone(),
        rank: args.rank,
    })?;
    let rs = RootSystem::classical(series, args.rank)?;
    let d = rs.dimension(&args.lambda)?;
    match d.to_integer().to_u64() {
        Some(v) if d.is_integer() => println!("{v}"),
        _ => println!("{d}"),
    }
    Ok(0)
}
