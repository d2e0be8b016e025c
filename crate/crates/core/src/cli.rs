//! The `skewspec` command line: argument parsing, model resolution,
//! dispatch to the library, and output files with JSON sidecars.
//!
//! Exit codes: 0 on success, 2 on usage or validation errors, 3 on
//! numerical failures.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::density::{density_csv, density_table, edge_bounds, edge_csv, DensityOptions, TABLE_NS};
use crate::dynamics::{Frequency, PotentialForm, SamplingFunction, TorusPoint};
use crate::error::{Error, Result};
use crate::fastvar::resonant_csv;
use crate::format::sig12;
use crate::greens::{resonance_grid, unsuitability_grid_with, Predicate, SuitabilityParams, TorusGrid};
use crate::operator::ModelParams;
use crate::perturb::{good_x_set, toy_induction_step, trace_curve, ToyStepConfig, TraceOptions};
use crate::suite;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "SKEWSPEC_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "skewspec",
    version,
    about = "Spectral experiments for finite skew-shift Schrodinger operators",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct GlobalArgs {
    /// Worker threads (overridden by SKEWSPEC_THREADS)
    #[arg(long, global = true, value_parser = positive_usize)]
    pub threads: Option<usize>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON sidecar path; defaults to `<out>.json` when --out is given
    #[arg(long, global = true)]
    pub sidecar: Option<PathBuf>,
    /// Seed for randomized harnesses
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// V(n) = 2cos(2 pi sqrt2 n^2), h = 1
    #[value(name = "appendixA")]
    #[serde(rename = "appendixA")]
    AppendixA,
    /// f = cos(2 pi t) on the skew-shift, h = 0.1
    Cos,
    /// f = 2cos(2 pi t) on the skew-shift, h = 0.1
    Cos2,
}

/// Model overrides shared by the model-based commands.
#[derive(Args, Debug, Serialize, Default)]
pub struct ModelArgs {
    /// Builtin model the overrides apply to
    #[arg(long, value_enum)]
    pub model: Option<Preset>,
    /// Sampling function as a JSON coefficient file
    #[arg(long = "f", value_name = "FILE", conflicts_with = "amplitude")]
    pub f_file: Option<PathBuf>,
    /// Use f = A cos(2 pi t)
    #[arg(long, value_parser = positive_f64)]
    pub amplitude: Option<f64>,
    /// Rotation number, reduced mod 1
    #[arg(long, value_parser = positive_f64)]
    pub alpha: Option<f64>,
    /// Hopping strength
    #[arg(long, value_parser = positive_f64)]
    pub h: Option<f64>,
    /// skew or square
    #[arg(long)]
    pub form: Option<PotentialForm>,
    #[arg(long, value_parser = finite_f64)]
    pub x: Option<f64>,
    #[arg(long, value_parser = finite_f64)]
    pub y: Option<f64>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Density table from minimal 6-eigenvalue spans
    Density(DensityArgs),
    /// Spectral edge bounds
    Edges(EdgesArgs),
    /// Cells where E is within tol of the spectrum of H^{[-w,w]}
    ResonanceGrid(ResonanceArgs),
    /// Cells where [-N,N] is not suitable
    SuitabilityGrid(SuitabilityArgs),
    /// Trace the level curve lambda(x, xi(x)) = E
    TraceCurve(TraceArgs),
    /// Fast-variable resonant measure on synthetic sets
    FastvarCheck(FastvarArgs),
    /// Randomized perturbation, derivative, stability and gluing suites
    PerturbSuite(SuiteArgs),
    /// Sampled set of x keeping neighbours away from E
    GoodX(GoodXArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Window half-widths, comma separated
    #[arg(long = "N", value_delimiter = ',', value_parser = positive_i64)]
    pub n: Vec<i64>,
    #[arg(long, default_value_t = 1e-12, value_parser = positive_f64)]
    pub tol: f64,
    /// Also compute the plain-double phase variant
    #[arg(long)]
    pub naive: bool,
    /// Eigenvalues per certifying span
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(2..))]
    pub count_threshold: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct EdgesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "N", default_value_t = 2000, value_parser = positive_i64)]
    pub n: i64,
    /// Allowed shortfall of each inner edge bound
    #[arg(long, default_value_t = 1e-3, value_parser = nonnegative_f64)]
    pub slack: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct ResonanceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1, value_parser = nonnegative_i64)]
    pub window: i64,
    #[arg(long = "E", default_value_t = 0.0, value_parser = finite_f64)]
    pub e: f64,
    #[arg(long, default_value_t = 400, value_parser = positive_usize)]
    pub nx: usize,
    #[arg(long, default_value_t = 400, value_parser = positive_usize)]
    pub ny: usize,
    #[arg(long, default_value_t = 0.01, value_parser = positive_f64)]
    pub tol: f64,
    #[arg(long, value_enum)]
    pub format: Option<GridFormat>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridFormat {
    Csv,
    Pgm,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateArg {
    Definition,
    Hs,
}

#[derive(Args, Debug, Serialize)]
pub struct SuitabilityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "N", default_value_t = 4, value_parser = positive_i64)]
    pub n: i64,
    #[arg(long = "E", default_value_t = 0.0, value_parser = finite_f64)]
    pub e: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub gamma: f64,
    #[arg(long = "Gamma", default_value_t = 4.0, value_parser = positive_f64)]
    pub big_gamma: f64,
    #[arg(long, default_value_t = 1)]
    pub p: u32,
    #[arg(long, default_value_t = 200, value_parser = positive_usize)]
    pub nx: usize,
    #[arg(long, default_value_t = 200, value_parser = positive_usize)]
    pub ny: usize,
    #[arg(long, value_enum, default_value_t = PredicateArg::Definition)]
    pub predicate: PredicateArg,
    #[arg(long, value_enum)]
    pub format: Option<GridFormat>,
}

#[derive(Args, Debug, Serialize)]
pub struct TraceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1, value_parser = nonnegative_i64)]
    pub window: i64,
    #[arg(long = "E", default_value_t = 0.0, value_parser = finite_f64)]
    pub e: f64,
    /// Number of equally spaced x samples in [0, 1)
    #[arg(long, default_value_t = 500, value_parser = positive_usize)]
    pub nx: usize,
    /// Slope bound for the curve
    #[arg(long, default_value_t = 0.25, value_parser = positive_f64)]
    pub delta: f64,
    /// Isolation radius
    #[arg(long, default_value_t = 0.02, value_parser = positive_f64)]
    pub eps: f64,
    /// Centre of the anchor search
    #[arg(long, default_value_t = 0.25, value_parser = finite_f64)]
    pub y0: f64,
    #[arg(long, default_value_t = 0.05, value_parser = positive_f64)]
    pub anchor_radius: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct FastvarArgs {
    /// Number of random synthetic sets
    #[arg(long, default_value_t = 50, value_parser = positive_usize)]
    pub cases: usize,
    /// Largest R drawn
    #[arg(long = "max-R", default_value_t = 8, value_parser = positive_i64)]
    pub max_r: i64,
    #[arg(long, default_value_t = 4000, value_parser = positive_usize)]
    pub nx: usize,
    /// Branch counts are checked for every l up to this value
    #[arg(long, default_value_t = 64, value_parser = positive_i64)]
    pub max_ell: i64,
}

#[derive(Args, Debug, Serialize)]
pub struct SuiteArgs {
    /// Instances per suite
    #[arg(long, default_value_t = 100, value_parser = positive_usize)]
    pub cases: usize,
    /// Coupling of the toy induction step
    #[arg(long, default_value_t = 1e-3, value_parser = positive_f64)]
    pub toy_h: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct GoodXArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "M", default_value_t = 1, value_parser = nonnegative_i64)]
    pub m: i64,
    /// Energy; defaults to f(y)
    #[arg(long = "E", value_parser = finite_f64)]
    pub e: Option<f64>,
    #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
    pub nx: usize,
}

fn finite_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v = finite_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn nonnegative_f64(s: &str) -> std::result::Result<f64, String> {
    let v = finite_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be nonnegative, got {v}"))
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s}")),
    }
}

fn positive_i64(s: &str) -> std::result::Result<i64, String> {
    match s.parse::<i64>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s}")),
    }
}

fn nonnegative_i64(s: &str) -> std::result::Result<i64, String> {
    match s.parse::<i64>() {
        Ok(v) if v >= 0 => Ok(v),
        _ => Err(format!("expected a nonnegative integer, got {s}")),
    }
}

impl Preset {
    fn params(self) -> ModelParams {
        let skew = |amplitude: f64| ModelParams {
            f: SamplingFunction::cosine(amplitude),
            alpha: Frequency::sqrt2(),
            h: 0.1,
            phase: TorusPoint::new(0.0, 0.0),
            form: PotentialForm::Skew,
        };
        match self {
            Preset::AppendixA => ModelParams::square_root_two_model(),
            Preset::Cos => skew(1.0),
            Preset::Cos2 => skew(2.0),
        }
    }
}

impl ModelArgs {
    /// The preset (or the command's default) with every override applied.
    pub fn resolve(&self, default: Preset) -> Result<ModelParams> {
        let mut p = self.model.unwrap_or(default).params();
        if let Some(path) = &self.f_file {
            p.f = SamplingFunction::from_json_str(&std::fs::read_to_string(path)?)?;
        }
        if let Some(a) = self.amplitude {
            p.f = SamplingFunction::cosine(a);
        }
        if let Some(a) = self.alpha {
            p.alpha = Frequency::new(crate::dynamics::frac(a))?;
        }
        if let Some(form) = self.form {
            p.form = form;
        }
        let phase = TorusPoint::new(self.x.unwrap_or(p.phase.x), self.y.unwrap_or(p.phase.y));
        ModelParams::new(p.f, p.alpha, self.h.unwrap_or(p.h), phase, p.form)
    }
}

/// Command output and the summary recorded in its sidecar.
struct Output {
    bytes: Vec<u8>,
    summary: Value,
    model: Option<ModelParams>,
}

fn grid_output(grid: &TorusGrid, format: Option<GridFormat>, out: Option<&Path>, column: &str, invert: bool) -> Vec<u8> {
    let by_extension = out
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    match format {
        Some(GridFormat::Pgm) => grid.to_pgm(),
        Some(GridFormat::Csv) => grid.to_csv(column, invert).into_bytes(),
        None if by_extension => grid.to_pgm(),
        None => grid.to_csv(column, invert).into_bytes(),
    }
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let out = cli.global.out.as_deref();
    match &cli.command {
        Command::Density(a) => {
            let p = a.model.resolve(Preset::AppendixA)?;
            let ns = if a.n.is_empty() { TABLE_NS.to_vec() } else { a.n.clone() };
            let opts = DensityOptions {
                tol: a.tol,
                naive: a.naive,
                count: a.count_threshold as usize,
            };
            let rows = density_table(&ns, &p, &opts)?;
            Ok(Output {
                bytes: density_csv(&rows).into_bytes(),
                summary: json!({ "rows": rows }),
                model: Some(p),
            })
        }
        Command::Edges(a) => {
            let mut p = a.model.resolve(Preset::Cos2)?;
            p.form = PotentialForm::Skew;
            let r = edge_bounds(&p, a.n, a.slack)?;
            Ok(Output {
                bytes: edge_csv(std::slice::from_ref(&r)).into_bytes(),
                summary: json!({
                    "report": r,
                    "top_holds": r.top_holds(),
                    "bottom_holds": r.bottom_holds(),
                    "rayleigh_holds_1e-12": r.rayleigh_holds(1e-12),
                }),
                model: Some(p),
            })
        }
        Command::ResonanceGrid(a) => {
            let p = a.model.resolve(Preset::Cos)?;
            let g = resonance_grid(&p, a.e, a.window, a.tol, a.nx, a.ny)?;
            Ok(Output {
                bytes: grid_output(&g, a.format, out, "resonant", false),
                summary: json!({
                    "marked_fraction": g.measure(),
                    "columns_near_y_0.25": g.column_fraction_near(0.25, 0.02),
                    "columns_near_y_0.75": g.column_fraction_near(0.75, 0.02),
                }),
                model: Some(p),
            })
        }
        Command::SuitabilityGrid(a) => {
            let p = a.model.resolve(Preset::Cos2)?;
            let sp = SuitabilityParams::new(a.gamma, a.big_gamma, a.p)?;
            let predicate = match a.predicate {
                PredicateArg::Definition => Predicate::Definition,
                PredicateArg::Hs => Predicate::HilbertSchmidt,
            };
            let u = unsuitability_grid_with(&p, a.e, a.n, &sp, a.nx, a.ny, predicate)?;
            let sections = crate::fastvar::TorusSet::max_section_intervals(&u);
            Ok(Output {
                bytes: grid_output(&u.grid, a.format, out, "suitable", true),
                summary: json!({
                    "unsuitable_measure": u.measure_estimate,
                    "max_section_intervals": sections,
                }),
                model: Some(p),
            })
        }
        Command::TraceCurve(a) => {
            let p = a.model.resolve(Preset::Cos2)?;
            let xs: Vec<f64> = (0..a.nx).map(|i| i as f64 / a.nx as f64).collect();
            let opts = TraceOptions {
                y0: a.y0,
                anchor_radius: a.anchor_radius,
                ..Default::default()
            };
            let c = trace_curve(&p, -a.window, a.window, a.e, &xs, a.delta, a.eps, &opts)?;
            Ok(Output {
                bytes: c.to_csv().into_bytes(),
                summary: json!({
                    "accepted_fraction": c.accepted_fraction(),
                    "anchor": c.anchor,
                    "max_accepted_slope": c.max_accepted_slope(),
                }),
                model: Some(p),
            })
        }
        Command::FastvarCheck(a) => {
            let cases = suite::fastvar_suite(cli.global.seed, a.cases, a.max_r, a.nx, a.max_ell)?;
            let reports: Vec<_> = cases.iter().map(|c| c.report.clone()).collect();
            let mismatches: usize = cases.iter().map(|c| c.branch_mismatches.len()).sum();
            Ok(Output {
                bytes: resonant_csv(&reports).into_bytes(),
                summary: json!({
                    "all_pass": reports.iter().all(|r| r.pass),
                    "branch_count_mismatches": mismatches,
                    "cases": cases,
                }),
                model: None,
            })
        }
        Command::PerturbSuite(a) => perturb_suite(cli.global.seed, a),
        Command::GoodX(a) => {
            let p = a.model.resolve(Preset::Cos2)?;
            let e0 = a.e.unwrap_or_else(|| p.f.eval(p.phase.y));
            let g = good_x_set(&p, e0, a.m, a.nx)?;
            let mut csv = String::from("start,len\n");
            for arc in &g.arcs {
                let _ = writeln!(csv, "{},{}", sig12(arc.start), sig12(arc.len));
            }
            Ok(Output {
                bytes: csv.into_bytes(),
                summary: json!({ "E0": e0, "measure": g.measure, "guard": g.guard, "half_measure": g.half_measure_holds() }),
                model: Some(p),
            })
        }
    }
}

fn perturb_suite(seed: u64, a: &SuiteArgs) -> Result<Output> {
    let mut csv = String::from("suite,case,value,bound,pass\n");
    let mut row = |name: &str, case: usize, value: f64, bound: f64, pass: bool| {
        let _ = writeln!(csv, "{name},{case},{},{},{pass}", sig12(value), sig12(bound));
    };
    let perturbation = suite::perturbation_suite(seed, a.cases)?;
    for (i, r) in perturbation.iter().enumerate() {
        row("perturbation", i, r.vector_deviation, 8.0 * r.t, r.all_hold());
    }
    let derivative = suite::derivative_suite(seed.wrapping_add(1), a.cases)?;
    for (i, c) in derivative.iter().enumerate() {
        row("hellmann_feynman", i, c.rel_err(), 1e-6, c.rel_err() <= 1e-6);
    }
    let stability = suite::stability_suite(seed.wrapping_add(2), a.cases)?;
    for (i, c) in stability.iter().enumerate() {
        row("suitability_stability", i, c.margin_after, 0.0, c.suitable_after);
    }
    let glue = suite::glue_suite(seed.wrapping_add(3), a.cases)?;
    for (i, s) in glue.iter().enumerate() {
        row("gluing", i, s.max_slope, s.slope_bound, s.bounds_hold() && s.measure_ratio() >= 1.0 / 3.0);
    }
    let toy = toy_induction_step(&ModelParams::cosine_skew(2.0, a.toy_h)?, ToyStepConfig::default())?;
    for (i, c) in toy.checks.iter().enumerate() {
        let name = format!("toy:{}:{}", c.stage, c.name);
        row(&name, i, c.value, c.bound, c.holds || !c.required);
    }
    let failures = |v: Vec<bool>| v.into_iter().filter(|&ok| !ok).count();
    let summary = json!({
        "perturbation_failures": failures(perturbation.iter().map(|r| r.all_hold()).collect()),
        "hellmann_feynman_failures": failures(derivative.iter().map(|c| c.rel_err() <= 1e-6).collect()),
        "stability_failures": failures(stability.iter().map(|c| c.suitable_after).collect()),
        "gluing_failures": failures(glue.iter().map(|s| s.bounds_hold() && s.measure_ratio() >= 1.0 / 3.0).collect()),
        "toy_step_passed": toy.passed(),
        "toy_step": toy,
    });
    Ok(Output {
        bytes: csv.into_bytes(),
        summary,
        model: None,
    })
}

fn thread_count(cli: &Cli) -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got '{v}'")),
        },
        Err(_) => Ok(cli.global.threads),
    }
}

fn write_outputs(cli: &Cli, threads: usize, output: &Output) -> Result<()> {
    match &cli.global.out {
        Some(path) => std::fs::write(path, &output.bytes)?,
        None => std::io::stdout().write_all(&output.bytes)?,
    }
    let sidecar = cli.global.sidecar.clone().or_else(|| {
        cli.global.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".json");
            PathBuf::from(s)
        })
    });
    if let Some(path) = sidecar {
        let doc = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": &cli.command,
            "seed": cli.global.seed,
            "threads": threads,
            "model": &output.model,
            "summary": &output.summary,
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) => EXIT_VALIDATION,
        _ => EXIT_NUMERIC,
    }
}

/// Parse `args` (program name first); negative numbers are values everywhere.
pub fn parse_cli<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cmd = Cli::command().mut_subcommands(|s| s.allow_negative_numbers(true));
    Cli::from_arg_matches(&cmd.try_get_matches_from(args)?)
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match parse_cli(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let threads = match thread_count(&cli) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_VALIDATION;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_NUMERIC;
        }
    };
    let result = pool
        .install(|| dispatch(&cli))
        .and_then(|o| write_outputs(&cli, pool.current_num_threads(), &o));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
