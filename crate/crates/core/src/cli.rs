//! `saddlekit profile|solve|stability [--config path] [--key value ...]`

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{read_config_file, Command, RunConfig};
use crate::diagnostics::{check_symmetry, diagnose};
use crate::error::{Error, Result};
use crate::field::extend_odd;
use crate::grid::TriGrid;
use crate::nonlinearity::{builtin, validate};
use crate::profile::{build_profile, Profile1D};
use crate::solver::{iterate_maximal, iterate_minimal, solve_full_square, SolveOptions};
use crate::stability::{cone_vanishing_stability, disjoint_instability_family, instability_scan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_UNCONVERGED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "saddlekit", version, about = "Saddle solutions of -Δu = f(u) in R^2m: profiles, solves, stability scans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Build the 1D profile and write profile.csv with a JSON summary
    Profile(Overrides),
    /// Maximal and minimal solutions on T_R plus diagnostics
    Solve(Overrides),
    /// Instability scan, cone-vanishing test and Hardy margin
    Stability(Overrides),
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// flat key = value file; command-line keys take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub nonlinearity: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long = "R")]
    pub r: Option<String>,
    /// lattice spacing, e.g. 0.0625 or 1/16
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long = "k_max")]
    pub k_max: Option<String>,
    #[arg(long)]
    pub commands: Option<String>,
    #[arg(long = "output_dir")]
    pub output_dir: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long = "tau_max")]
    pub tau_max: Option<String>,
    #[arg(long)]
    pub nodes: Option<String>,
    /// comma separated, e.g. 4,8,16
    #[arg(long = "a_list")]
    pub a_list: Option<String>,
    #[arg(long)]
    pub rho1: Option<String>,
    #[arg(long)]
    pub rho2: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub count: Option<String>,
    #[arg(long)]
    pub a0: Option<String>,
    /// also solve on the full square without imposed symmetry
    #[arg(long = "full_square")]
    pub full_square: Option<String>,
}

impl Overrides {
    fn merged(&self) -> Result<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let pairs = [
            ("nonlinearity", &self.nonlinearity),
            ("m", &self.m),
            ("R", &self.r),
            ("h", &self.h),
            ("tol", &self.tol),
            ("k_max", &self.k_max),
            ("commands", &self.commands),
            ("output_dir", &self.output_dir),
            ("seed", &self.seed),
            ("tau_max", &self.tau_max),
            ("nodes", &self.nodes),
            ("a_list", &self.a_list),
            ("rho1", &self.rho1),
            ("rho2", &self.rho2),
            ("alpha", &self.alpha),
            ("trials", &self.trials),
            ("count", &self.count),
            ("a0", &self.a0),
            ("full_square", &self.full_square),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    ChecksFailed,
    Unconverged,
}

impl Outcome {
    fn worst(self, other: Outcome) -> Outcome {
        let rank = |o: Outcome| match o {
            Outcome::Passed => 0,
            Outcome::ChecksFailed => 1,
            Outcome::Unconverged => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Passed => EXIT_OK,
            Outcome::ChecksFailed => EXIT_OTHER,
            Outcome::Unconverged => EXIT_UNCONVERGED,
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::Grid(_)
        | Error::Geometry(_)
        | Error::Domain(_)
        | Error::UnknownNonlinearity(_)
        | Error::NotDiagonallyDominant { .. }
        | Error::SupportTooLarge { .. } => EXIT_CONFIG,
        _ => EXIT_OTHER,
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let f = BufWriter::new(File::create(dir.join(name))?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

fn setup(cfg: &RunConfig) -> Result<Profile1D> {
    let spec = builtin(&cfg.nonlinearity)?;
    let rep = validate(&spec, 1000)?;
    if let Some(bad) = rep.first_violation() {
        return Err(Error::Config(format!("nonlinearity fails `{}` at {:?}", bad.name, bad.location)));
    }
    fs::create_dir_all(&cfg.output_dir)?;
    build_profile(&spec, cfg.tau_max, cfg.nodes)
}

fn options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions { tol: cfg.tol, k_max: cfg.k_max, ..SolveOptions::default() }
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<Outcome> {
    let profile = setup(cfg)?;
    profile.write_csv(BufWriter::new(File::create(cfg.output_dir.join("profile.csv"))?))?;
    write_json(&cfg.output_dir, "profile_summary.json", &profile.summary())?;
    Ok(Outcome::Passed)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let profile = setup(cfg)?;
    let spec = profile.spec().clone();
    let grid = TriGrid::new(cfg.m, cfg.r, cfg.h)?;
    let opts = options(cfg);
    let dir = &cfg.output_dir;

    let maximal = iterate_maximal(&grid, &spec, &profile, &opts)?;
    maximal.write_csv(BufWriter::new(File::create(dir.join("field_maximal.csv"))?))?;
    write_json(dir, "field_maximal.json", &maximal.metadata())?;
    eprintln!("maximal: {} iterations, converged = {}", maximal.history.len(), maximal.converged);

    let minimal = iterate_minimal(&grid, &spec, &opts)?;
    minimal.field.write_csv(BufWriter::new(File::create(dir.join("field_minimal.csv"))?))?;
    write_json(dir, "field_minimal.json", &minimal.field.metadata())?;
    eprintln!(
        "minimal: {} iterations, up/down gap {:.3e}{}",
        minimal.field.history.len(),
        minimal.gap,
        if minimal.gap_ok { "" } else { " (exceeds 10 h^2)" }
    );

    let mut report = diagnose(&maximal, Some(&minimal.field), &spec, &profile)?;
    if cfg.full_square {
        let (full, _) = solve_full_square(cfg.m, cfg.r, cfg.h, &spec, &profile, &opts)?;
        report.symmetry_defect = check_symmetry(&full);
    } else {
        report.symmetry_defect = check_symmetry(&extend_odd(&maximal));
    }
    write_json(dir, "diagnostics.json", &report)?;

    if !(maximal.converged && minimal.field.converged && minimal.upward.converged) {
        return Ok(Outcome::Unconverged);
    }
    Ok(if report.passes(cfg.h) { Outcome::Passed } else { Outcome::ChecksFailed })
}

#[derive(Debug, Serialize)]
struct StabilityDetails {
    direct_q_values: Vec<[f64; 2]>,
    trend_toward_limit: Option<bool>,
    cone_vanishing_min_q: f64,
    cone_vanishing_trials: usize,
    morse_witness_requested: Option<usize>,
    morse_witness_found: Option<usize>,
    morse_witness_error: Option<String>,
}

pub fn cmd_stability(cfg: &RunConfig) -> Result<Outcome> {
    let profile = setup(cfg)?;
    let spec = profile.spec().clone();
    let grid = TriGrid::new(cfg.m, cfg.r, cfg.h)?;
    let max_a = cfg.a_list.iter().copied().fold(0.0, f64::max);
    let reach = (max_a * cfg.eta.rho2 + crate::stability::default_z_cut(&profile)) * std::f64::consts::FRAC_1_SQRT_2;
    if reach > cfg.r - 2.0 * cfg.h {
        return Err(Error::SupportTooLarge { needed: reach, available: cfg.r - cfg.h, required_r: reach + 2.0 * cfg.h });
    }
    let maximal = iterate_maximal(&grid, &spec, &profile, &options(cfg))?;
    let ext = extend_odd(&maximal);
    let report = instability_scan(&ext, &spec, &profile, &cfg.a_list, &cfg.eta)?;
    let cone = cone_vanishing_stability(&ext, &spec, cfg.trials, cfg.seed)?;
    let mut details = StabilityDetails {
        direct_q_values: report.direct_q_values.clone(),
        trend_toward_limit: report.trend_toward_limit,
        cone_vanishing_min_q: cone.min_q,
        cone_vanishing_trials: cfg.trials,
        morse_witness_requested: None,
        morse_witness_found: None,
        morse_witness_error: None,
    };
    if cfg.m == 3 {
        details.morse_witness_requested = Some(cfg.count);
        match disjoint_instability_family(&ext, &spec, &profile, cfg.count, cfg.a0, &cfg.eta) {
            Ok(f) => details.morse_witness_found = Some(f.len()),
            Err(e) => {
                eprintln!("disjoint family of {}: {e}", cfg.count);
                details.morse_witness_error = Some(e.to_string());
            }
        }
    }
    write_json(&cfg.output_dir, "stability.json", &report)?;
    write_json(&cfg.output_dir, "stability_details.json", &details)?;
    eprintln!("verdict: {:?}", report.verdict);
    Ok(if maximal.converged { Outcome::Passed } else { Outcome::Unconverged })
}

fn dispatch(command: Command, overrides: &Overrides) -> Result<Outcome> {
    let cfg = RunConfig::from_map(command, &overrides.merged()?)?;
    let mut outcome = Outcome::Passed;
    for &c in &cfg.commands {
        let o = match c {
            Command::Profile => cmd_profile(&cfg)?,
            Command::Solve => cmd_solve(&cfg)?,
            Command::Stability => cmd_stability(&cfg)?,
        };
        outcome = outcome.worst(o);
    }
    Ok(outcome)
}

fn configure_threads() {
    if let Some(n) = std::env::var("SADDLEKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    configure_threads();
    let (command, overrides) = match &cli.command {
        Sub::Profile(o) => (Command::Profile, o),
        Sub::Solve(o) => (Command::Solve, o),
        Sub::Stability(o) => (Command::Stability, o),
    };
    match dispatch(command, overrides) {
        Ok(o) => o.exit_code(),
        Err(e) => {
            eprintln!("saddlekit {}: {e}", command.name());
            exit_code(&e)
        }
    }
}
