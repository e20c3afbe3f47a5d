//! Command-line front-end.
//!
//! Every subcommand reads a [`RunConfig`] (from `--config` or, for
//! `reproduce`, from the configs bundled with the crate), applies flag
//! overrides, computes all outputs in memory and then writes them one file
//! at a time through a temporary file and rename.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::flow::{error_bound, euler_flow, exact_flow, gaussian_map, gmm_map, TransportMap1D, DEFAULT_CACHE, DEFAULT_DELTA};
use crate::io::{csv_table, write_atomic};
use crate::lipschitz::{
    lambda_of_schedule, lambda_optimal_closed, lambda_trivial_closed, lipschitz_curve, report, Spectrum,
};
use crate::mixture::GaussianMixture;
use crate::schedule::{optimal_schedule, optimal_schedule_or_trivial, random_warp_modes, trivial_schedule};
use crate::spectral::{bounds_from_field, bounds_from_potential, field_from_map1d, SpectralBounds, SpectralField};
use crate::variational::{l2_distance, lp_objective, solve_lp, sup_distance, DEFAULT_N_TAU};

const DEFAULT_GRID: usize = 1001;
const DEFAULT_P: [u32; 7] = [1, 2, 4, 8, 16, 32, 64];
const DEFAULT_STEPS: [usize; 3] = [32, 64, 128];
const DEFAULT_STARTS: usize = 50;
const DEFAULT_TIMES: usize = 101;
const DEFAULT_N_FIELD: usize = 2049;
const DEFAULT_OMEGA: [f64; 2] = [-3.0, 3.0];
const PERTURBATIONS: usize = 100;

#[derive(Parser, Debug)]
#[command(name = "lipsched", version, about = "Optimal Lipschitz schedules for interpolation flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimal schedule: JSON description and sampled `t,tau,tau_dot,tau_ddot`.
    Schedule(CommonArgs),
    /// `L^{2p}` schedules for each `p` and their distance to the optimal one.
    Lp(CommonArgs),
    /// Lipschitz report and time curves for the trivial and optimal schedules.
    Lipschitz(CommonArgs),
    /// Exact trajectories and the Euler error table.
    Flow(CommonArgs),
    /// Regenerate the data behind a figure from the bundled configs.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Format of tabular outputs.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Number of sample points for curves.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Seed for the random perturbation check of `lipschitz`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Spectral bound `f*`; replaces the config problem together with `--g-star`.
    #[arg(long, allow_hyphen_values = true)]
    pub f_star: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub g_star: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    GaussianTable,
}

/// Where the spectral data comes from. Exactly one source per config.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Problem {
    Bounds {
        f_star: f64,
        g_star: f64,
    },
    Potential {
        alpha: f64,
        beta: f64,
    },
    Gaussian {
        mu1: f64,
        theta1: f64,
        mu2: f64,
        theta2: f64,
        #[serde(default)]
        omega: Option<[f64; 2]>,
        #[serde(default)]
        n_field: Option<usize>,
    },
    Mixture {
        source: GaussianMixture,
        target: GaussianMixture,
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default)]
        n_cache: Option<usize>,
        #[serde(default)]
        n_field: Option<usize>,
    },
    FieldCsv(PathBuf),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<Problem>,
    /// Exponents for `lp`.
    pub p: Option<Vec<u32>>,
    pub grid: Option<usize>,
    pub n_tau: Option<usize>,
    /// Euler step counts for `flow`.
    pub steps: Option<Vec<usize>>,
    pub starts: Option<usize>,
    /// Time samples per exact trajectory.
    pub times: Option<usize>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    /// Scale ratios `theta2/theta1` for the Gaussian table.
    pub ratios: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Flags win over config values.
    pub fn with_overrides(mut self, args: &CommonArgs) -> Result<Self> {
        match (args.f_star, args.g_star) {
            (Some(f_star), Some(g_star)) => self.problem = Some(Problem::Bounds { f_star, g_star }),
            (None, None) => {}
            _ => return Err(Error::Config("--f-star and --g-star must be given together".into())),
        }
        if args.grid.is_some() {
            self.grid = args.grid;
        }
        if args.seed.is_some() {
            self.seed = args.seed;
        }
        if args.format.is_some() {
            self.format = args.format;
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.grid.is_some_and(|g| g < 2) {
            return bad("grid must be at least 2");
        }
        if self.n_tau.is_some_and(|n| n < 16) {
            return bad("n_tau must be at least 16");
        }
        if self.p.as_ref().is_some_and(|p| p.is_empty() || p.contains(&0)) {
            return bad("p must be a non-empty list of positive integers");
        }
        if self.steps.as_ref().is_some_and(|s| s.is_empty() || s.contains(&0)) {
            return bad("steps must be a non-empty list of positive integers");
        }
        if self.starts == Some(0) {
            return bad("starts must be positive");
        }
        if self.times.is_some_and(|t| t < 2) {
            return bad("times must be at least 2");
        }
        if self.ratios.as_ref().is_some_and(|r| r.iter().any(|&v| !(v > 0.0) || v == 1.0 || !v.is_finite())) {
            return bad("ratios must be positive, finite and different from 1");
        }
        Ok(())
    }

    fn grid(&self) -> usize {
        self.grid.unwrap_or(DEFAULT_GRID)
    }

    fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    fn problem(&self) -> Result<&Problem> {
        self.problem
            .as_ref()
            .ok_or_else(|| Error::Config("no problem given: use --config or --f-star/--g-star".into()))
    }
}

/// Spectral data and, for 1D problems, the transport map behind it.
struct Resolved {
    bounds: std::result::Result<SpectralBounds, (f64, f64)>,
    field: Option<SpectralField>,
    map: Option<(TransportMap1D, (f64, f64))>,
}

fn resolve(problem: &Problem) -> Result<Resolved> {
    let raw = |f: f64, g: f64| SpectralBounds::new(f, g).map_err(|_| (f, g));
    match problem {
        Problem::Bounds { f_star, g_star } => {
            let bounds = match SpectralBounds::new(*f_star, *g_star) {
                Err(Error::TrivialTransport) => Err((*f_star, *g_star)),
                other => Ok(other?),
            };
            Ok(Resolved { bounds, field: None, map: None })
        }
        Problem::Potential { alpha, beta } => {
            let bounds = match bounds_from_potential(*alpha, *beta) {
                Err(Error::TrivialTransport) => Err((beta - 1.0, alpha - 1.0)),
                other => Ok(other?),
            };
            Ok(Resolved { bounds, field: None, map: None })
        }
        Problem::Gaussian { mu1, theta1, mu2, theta2, omega, n_field } => {
            let map = gaussian_map(*mu1, *theta1, *mu2, *theta2)?;
            let [a, b] = omega.unwrap_or(DEFAULT_OMEGA);
            let field = field_from_map1d(&map, (a, b), n_field.unwrap_or(DEFAULT_N_FIELD))?;
            let r = theta2 / theta1;
            Ok(Resolved { bounds: raw(r - 1.0, r - 1.0), field: Some(field), map: Some((map, (a, b))) })
        }
        Problem::Mixture { source, target, delta, n_cache, n_field } => {
            let map = gmm_map(
                source.clone(),
                target.clone(),
                delta.unwrap_or(DEFAULT_DELTA),
                n_cache.unwrap_or(DEFAULT_CACHE),
            )?;
            let omega = map.domain();
            let field = field_from_map1d(&map, omega, n_field.unwrap_or(DEFAULT_N_FIELD))?;
            let bounds = bounds_from_field(&field)?;
            Ok(Resolved { bounds: Ok(bounds), field: Some(field), map: Some((map, omega)) })
        }
        Problem::FieldCsv(path) => {
            let field = SpectralField::load_csv(path)?;
            let bounds = bounds_from_field(&field)?;
            Ok(Resolved { bounds: Ok(bounds), field: Some(field), map: None })
        }
    }
}

impl Resolved {
    fn bounds(&self) -> Result<SpectralBounds> {
        self.bounds.map_err(|_| Error::TrivialTransport)
    }

    /// The sampled field, or a constant field on `[0, 1]` built from the bounds.
    fn field(&self) -> Result<SpectralField> {
        match &self.field {
            Some(f) => Ok(f.clone()),
            None => {
                let b = self.bounds()?;
                SpectralField::constant(0.0, 1.0, 2, b.f_star(), b.g_star())
            }
        }
    }
}

/// A named output file held in memory until every computation succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub contents: String,
}

fn table(stem: &str, header: &[&str], rows: Vec<Vec<f64>>, format: Format) -> Result<Output> {
    Ok(match format {
        Format::Csv => Output { name: format!("{stem}.csv"), contents: csv_table(header, rows) },
        Format::Json => {
            let records: Vec<Value> = rows
                .into_iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        header.iter().zip(row).map(|(h, v)| (h.to_string(), Value::from(v))).collect();
                    Value::Object(obj)
                })
                .collect();
            Output { name: format!("{stem}.json"), contents: serde_json::to_string_pretty(&records)? + "\n" }
        }
    })
}

fn json_output<T: Serialize>(name: String, value: &T) -> Result<Output> {
    Ok(Output { name, contents: serde_json::to_string_pretty(value)? + "\n" })
}

fn uniform_times(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 }).collect()
}

pub fn cmd_schedule(cfg: &RunConfig, prefix: &str) -> Result<Vec<Output>> {
    let resolved = resolve(cfg.problem()?)?;
    let (f, g) = match resolved.bounds {
        Ok(b) => (b.f_star(), b.g_star()),
        Err(raw) => raw,
    };
    let outcome = optimal_schedule_or_trivial(f, g)?;
    if outcome.trivial_fallback {
        eprintln!("warning kind=trivial_transport message=\"isometric map, writing the trivial schedule\"");
    }
    let s = &outcome.schedule;
    let rows = s.sample(cfg.grid()).into_iter().map(|r| r.to_vec()).collect();
    Ok(vec![
        Output { name: format!("{prefix}schedule.json"), contents: s.to_json()? + "\n" },
        table(&format!("{prefix}schedule"), &["t", "tau", "tau_dot", "tau_ddot"], rows, cfg.format())?,
    ])
}

pub fn cmd_lp(cfg: &RunConfig, prefix: &str) -> Result<Vec<Output>> {
    let resolved = resolve(cfg.problem()?)?;
    let field = resolved.field()?;
    let target = optimal_schedule(&bounds_from_field(&field)?);
    let n_tau = cfg.n_tau.unwrap_or(DEFAULT_N_TAU);
    let grid = cfg.grid();
    let mut outputs = Vec::new();
    let mut rows = Vec::new();
    for &p in cfg.p.as_deref().unwrap_or(&DEFAULT_P) {
        let sol = solve_lp(&field, p, n_tau)?;
        rows.push(vec![
            p as f64,
            l2_distance(&sol.schedule, &target, grid),
            sup_distance(&sol.schedule, &target, grid),
            sol.z_p,
            sol.residual_sup,
            lp_objective(&field, &sol.schedule, p, 1024)?,
        ]);
        outputs.push(Output { name: format!("{prefix}lp_p{p}.json"), contents: sol.to_json()? + "\n" });
    }
    outputs.push(table(
        &format!("{prefix}lp_convergence"),
        &["p", "l2_distance", "sup_distance", "z_p", "residual_sup", "lp_objective"],
        rows,
        cfg.format(),
    )?);
    Ok(outputs)
}

#[derive(Serialize)]
struct PerturbationCheck {
    seed: u64,
    count: usize,
    min_lambda: f64,
    margin: f64,
}

#[derive(Serialize)]
struct LipschitzDoc {
    f_star: f64,
    g_star: f64,
    lambda_trivial: f64,
    lambda_optimal: f64,
    ratio: f64,
    lambda_trivial_grid: f64,
    lambda_optimal_grid: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturbation: Option<PerturbationCheck>,
}

pub fn cmd_lipschitz(cfg: &RunConfig, prefix: &str) -> Result<Vec<Output>> {
    let resolved = resolve(cfg.problem()?)?;
    let bounds = resolved.bounds()?;
    let spectrum = match &resolved.field {
        Some(f) => Spectrum::Field(f),
        None => Spectrum::Bounds(&bounds),
    };
    let grid = cfg.grid();
    let (triv, opt) = (trivial_schedule(), optimal_schedule(&bounds));
    let rep_triv = report(spectrum, Some(&triv), grid.max(crate::lipschitz::DEFAULT_TIME_GRID))?;
    let rep_opt = report(spectrum, Some(&opt), grid.max(crate::lipschitz::DEFAULT_TIME_GRID))?;
    let perturbation = cfg.seed.map(|seed| -> Result<PerturbationCheck> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut min_lambda = f64::INFINITY;
        for _ in 0..PERTURBATIONS {
            let warped = opt.warped(&random_warp_modes(&mut rng), 1025)?;
            min_lambda = min_lambda.min(lambda_of_schedule(&bounds, &warped, 4096));
        }
        Ok(PerturbationCheck { seed, count: PERTURBATIONS, min_lambda, margin: min_lambda - rep_opt.lambda_optimal })
    });
    let doc = LipschitzDoc {
        f_star: bounds.f_star(),
        g_star: bounds.g_star(),
        lambda_trivial: rep_opt.lambda_trivial,
        lambda_optimal: rep_opt.lambda_optimal,
        ratio: rep_opt.ratio,
        lambda_trivial_grid: rep_triv.lambda_of_input.unwrap_or(f64::NAN),
        lambda_optimal_grid: rep_opt.lambda_of_input.unwrap_or(f64::NAN),
        perturbation: perturbation.transpose()?,
    };
    let curve = |s| lipschitz_curve(spectrum, s, grid).into_iter().map(|(t, v)| vec![t, v]).collect();
    Ok(vec![
        json_output(format!("{prefix}lipschitz_report.json"), &doc)?,
        table(&format!("{prefix}lipschitz_trivial"), &["t", "lipschitz"], curve(&triv), cfg.format())?,
        table(&format!("{prefix}lipschitz_optimal"), &["t", "lipschitz"], curve(&opt), cfg.format())?,
    ])
}

pub fn cmd_flow(cfg: &RunConfig, prefix: &str) -> Result<Vec<Output>> {
    let resolved = resolve(cfg.problem()?)?;
    let (map, omega) = resolved
        .map
        .as_ref()
        .ok_or_else(|| Error::Config("flow needs a gaussian or mixture problem".into()))?;
    let bounds = resolved.bounds()?;
    let n_starts = cfg.starts.unwrap_or(DEFAULT_STARTS);
    let starts: Vec<f64> =
        (0..n_starts).map(|i| omega.0 + (omega.1 - omega.0) * (i as f64 + 0.5) / n_starts as f64).collect();
    let times = uniform_times(cfg.times.unwrap_or(DEFAULT_TIMES));
    let (triv, opt) = (trivial_schedule(), optimal_schedule(&bounds));
    let mut outputs = Vec::new();
    for (name, s) in [("trivial", &triv), ("optimal", &opt)] {
        let mut rows = Vec::new();
        for &x0 in &starts {
            let tr = exact_flow(map, s, x0, &times)?;
            rows.extend(tr.times.iter().zip(&tr.positions).map(|(&t, &x)| vec![x0, t, x]));
        }
        outputs.push(table(&format!("{prefix}trajectories_{name}"), &["x0", "t", "x"], rows, cfg.format())?);
    }
    let mut rows = Vec::new();
    for &n in cfg.steps.as_deref().unwrap_or(&DEFAULT_STEPS) {
        let mut err = 0.0f64;
        for &x0 in &starts {
            let end = euler_flow(map, &opt, x0, n)?.endpoint();
            err = err.max((end - map.eval(x0)?).abs());
        }
        let h = 1.0 / n as f64;
        let b = error_bound(&bounds, map, &opt, h, *omega)?;
        rows.push(vec![n as f64, h, err, b.bound, b.m, b.lambda]);
    }
    outputs.push(table(
        &format!("{prefix}euler_errors"),
        &["n_steps", "h", "sup_error", "bound", "m", "lambda"],
        rows,
        cfg.format(),
    )?);
    Ok(outputs)
}

/// Closed-form and grid Lipschitz values of the 1D Gaussian family.
pub fn cmd_gaussian_table(cfg: &RunConfig, prefix: &str) -> Result<Vec<Output>> {
    let ratios = cfg.ratios.as_deref().ok_or_else(|| Error::Config("gaussian table needs ratios".into()))?;
    let mut rows = Vec::new();
    for &r in ratios {
        let b = SpectralBounds::new(r - 1.0, r - 1.0)?;
        let (lt, lo) = (lambda_trivial_closed(&b), lambda_optimal_closed(&b));
        rows.push(vec![
            r,
            lt,
            lo,
            lt / lo,
            lambda_of_schedule(&b, &trivial_schedule(), 4096),
            lambda_of_schedule(&b, &optimal_schedule(&b), 4096),
        ]);
    }
    Ok(vec![table(
        &format!("{prefix}gaussian_table"),
        &["r", "lambda_trivial", "lambda_optimal", "ratio", "lambda_trivial_grid", "lambda_optimal_grid"],
        rows,
        cfg.format(),
    )?])
}

/// Config text bundled for `reproduce`.
pub fn bundled_config(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => include_str!("../configs/fig1.json"),
        "fig2_gaussian" => include_str!("../configs/fig2_gaussian.json"),
        "fig2_gmm" => include_str!("../configs/fig2_gmm.json"),
        "fig3" => include_str!("../configs/fig3.json"),
        "fig4" => include_str!("../configs/fig4.json"),
        "gaussian_table" => include_str!("../configs/gaussian_table.json"),
        _ => return None,
    })
}

pub fn cmd_reproduce(figure: Figure, args: &CommonArgs) -> Result<Vec<Output>> {
    let load = |name: &str| -> Result<RunConfig> {
        let base = match &args.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::from_json(bundled_config(name).expect("bundled config"))?,
        };
        base.with_overrides(args)
    };
    match figure {
        Figure::Fig1 => cmd_flow(&load("fig1")?, "fig1_"),
        Figure::Fig2 => {
            let mut out = cmd_schedule(&load("fig2_gaussian")?, "fig2_gaussian_")?;
            out.extend(cmd_schedule(&load("fig2_gmm")?, "fig2_gmm_")?);
            Ok(out)
        }
        Figure::Fig3 => cmd_flow(&load("fig3")?, "fig3_"),
        Figure::Fig4 => cmd_lipschitz(&load("fig4")?, "fig4_"),
        Figure::GaussianTable => cmd_gaussian_table(&load("gaussian_table")?, ""),
    }
}

/// Computes the outputs of a parsed command line without touching the disk.
pub fn outputs(command: &Command) -> Result<(PathBuf, Vec<Output>)> {
    let config = |args: &CommonArgs| -> Result<RunConfig> {
        let base = match &args.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        base.with_overrides(args)
    };
    Ok(match command {
        Command::Schedule(a) => (a.out.clone(), cmd_schedule(&config(a)?, "")?),
        Command::Lp(a) => (a.out.clone(), cmd_lp(&config(a)?, "")?),
        Command::Lipschitz(a) => (a.out.clone(), cmd_lipschitz(&config(a)?, "")?),
        Command::Flow(a) => (a.out.clone(), cmd_flow(&config(a)?, "")?),
        Command::Reproduce { figure, common } => (common.out.clone(), cmd_reproduce(*figure, common)?),
    })
}

pub fn write_outputs(dir: &Path, outputs: &[Output]) -> Result<()> {
    for o in outputs {
        write_atomic(&dir.join(&o.name), o.contents.as_bytes())?;
    }
    Ok(())
}

/// 2 for bad configuration or input, 3 for numerical or domain failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidInput(_) | Error::InvalidSpectrum(_) | Error::Json(_) | Error::Csv(_) | Error::Io(_) => 2,
        Error::TrivialTransport | Error::MapNotAdmissible(_) | Error::Domain(_) | Error::Quantile(_) | Error::Numeric(_) => 3,
    }
}

fn error_line(kind: &str, message: &str) -> String {
    let quoted = serde_json::to_string(message).unwrap_or_else(|_| "\"\"".into());
    format!("error kind={kind} message={quoted}")
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return 2;
        }
    };
    match outputs(&cli.command).and_then(|(dir, outs)| write_outputs(&dir, &outs)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> RunConfig {
        RunConfig::from_json(json).unwrap()
    }

    #[test]
    fn config_needs_exactly_one_problem() {
        assert!(RunConfig::from_json(r#"{"problem":{"bounds":{"f_star":1,"g_star":-0.5},"potential":{"alpha":1,"beta":2}}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"problem":{"bounds":{"f_star":1}}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"grid":10,"unknown":1}"#).is_err());
        let c = cfg(r#"{"grid":11}"#);
        assert!(matches!(cmd_schedule(&c, ""), Err(Error::Config(_))));
    }

    #[test]
    fn flags_override_config() {
        let args = CommonArgs { f_star: Some(2.0), g_star: Some(2.0), grid: Some(5), ..Default::default() };
        let c = cfg(r#"{"problem":{"potential":{"alpha":0.5,"beta":2}},"grid":100}"#).with_overrides(&args).unwrap();
        assert_eq!(c.grid, Some(5));
        assert!(matches!(c.problem, Some(Problem::Bounds { f_star, .. }) if f_star == 2.0));
        let half = CommonArgs { f_star: Some(2.0), ..Default::default() };
        assert!(RunConfig::default().with_overrides(&half).is_err());
        let tiny = CommonArgs { grid: Some(1), ..Default::default() };
        assert!(RunConfig::default().with_overrides(&tiny).is_err());
    }

    #[test]
    fn schedule_outputs() {
        let c = cfg(r#"{"problem":{"bounds":{"f_star":1,"g_star":1}},"grid":5}"#);
        let out = cmd_schedule(&c, "x_").unwrap();
        assert_eq!(out[0].name, "x_schedule.json");
        assert!(out[0].contents.contains("\"simple_f\""));
        assert_eq!(out[1].name, "x_schedule.csv");
        assert_eq!(out[1].contents.lines().count(), 6);
        let json = cfg(r#"{"problem":{"bounds":{"f_star":1,"g_star":1}},"grid":5,"format":"json"}"#);
        let out = cmd_schedule(&json, "").unwrap();
        let rows: Vec<Value> = serde_json::from_str(&out[1].contents).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[4]["tau"], 1.0);
    }

    #[test]
    fn isometry_writes_trivial_schedule() {
        let c = cfg(r#"{"problem":{"bounds":{"f_star":0,"g_star":0}},"grid":3}"#);
        let out = cmd_schedule(&c, "").unwrap();
        assert!(out[0].contents.contains("\"trivial\""));
        let lip = cmd_lipschitz(&c, "");
        assert!(matches!(lip, Err(Error::TrivialTransport)));
        assert_eq!(exit_code(&lip.unwrap_err()), 3);
    }

    #[test]
    fn flow_needs_a_map() {
        let c = cfg(r#"{"problem":{"bounds":{"f_star":1,"g_star":-0.5}}}"#);
        assert!(matches!(cmd_flow(&c, ""), Err(Error::Config(_))));
    }

    #[test]
    fn bundled_configs_parse() {
        for name in ["fig1", "fig2_gaussian", "fig2_gmm", "fig3", "fig4", "gaussian_table"] {
            let c = RunConfig::from_json(bundled_config(name).unwrap()).unwrap();
            c.validate().unwrap();
        }
    }

    #[test]
    fn error_line_is_single_line() {
        let line = error_line("config", "bad\nvalue \"x\"");
        assert_eq!(line.lines().count(), 1);
        assert!(line.starts_with("error kind=config message=\""));
    }
}
