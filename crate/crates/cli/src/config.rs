//! Command-line surface and the optional TOML config file.
//!
//! A config file holds the same keys as the long flags. Top-level keys feed
//! the global flags, a table named after the subcommand feeds its flags.
//! Anything given on the command line wins.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use lnt_core::ode::Tolerances;
use lnt_core::params::ProblemParams;
use lnt_core::spectral::GridKind;

#[derive(Debug)]
pub enum ConfigError {
    Clap(clap::Error),
    File { path: PathBuf, msg: String },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Clap(e) => write!(f, "{e}"),
            ConfigError::File { path, msg } => write!(f, "config file {}: {msg}", path.display()),
            ConfigError::Invalid(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<clap::Error> for ConfigError {
    fn from(e: clap::Error) -> Self {
        ConfigError::Clap(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "lnt",
    version,
    about = "Radial solutions and Morse counts for -Δu + u = u^p on a ball"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Absolute integrator tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_abs: f64,
    /// Relative integrator tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_rel: f64,
    /// Worker threads (default: available cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, default_value = "runs")]
    pub out_dir: PathBuf,
    /// Format of emitted data files
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// TOML file with flag values; explicit flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write trajectories without thinning
    #[arg(long, global = true)]
    pub full: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Singular solution from its origin asymptotics
    Singular(SingularArgs),
    /// Regular solution with u(0) = gamma
    Shoot(ShootArgs),
    /// Exponents p(gamma) with r^i_{p,gamma} = R along a list of gammas
    Branch(BranchArgs),
    /// Exponent p^i with R_{p^i}^i = R
    FindExponent(FindExponentArgs),
    /// Refinement modulus of p -> R_p^i
    Continuity(ContinuityArgs),
    /// Negative eigenvalue counts of the radial linearization
    Morse(MorseArgs),
    /// Oscillating test functions and the quadratic form
    Hardy(HardyArgs),
    /// Every check at one (N, p, R)
    VerifyAll(VerifyAllArgs),
    /// Critical radii over a grid of (N, p, i[, gamma]) with trend checks
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Singular(_) => "singular",
            Command::Shoot(_) => "shoot",
            Command::Branch(_) => "branch",
            Command::FindExponent(_) => "find-exponent",
            Command::Continuity(_) => "continuity",
            Command::Morse(_) => "morse",
            Command::Hardy(_) => "hardy",
            Command::VerifyAll(_) => "verify-all",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SingularArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 4.0)]
    pub r_end: f64,
    /// Shorthand setting both tolerances
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub emit: Option<Format>,
    /// Also verify the origin sandwich and derivative bounds
    #[arg(long)]
    pub check_bounds: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ShootArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 4.0)]
    pub r_end: f64,
    #[arg(long, value_enum)]
    pub emit: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BranchArgs {
    #[arg(long)]
    pub i: usize,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    /// Comma list or lo:hi:count
    #[arg(long)]
    pub gamma_list: String,
    /// lo,hi
    #[arg(long)]
    pub p_bracket: String,
    #[arg(long, value_enum)]
    pub emit: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FindExponentArgs {
    #[arg(long)]
    pub i: usize,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: f64,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p_lo: f64,
    #[arg(long, default_value_t = lnt_core::params::DEFAULT_P_CAP)]
    pub p_cap: f64,
    #[arg(long, value_enum)]
    pub emit: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ContinuityArgs {
    #[arg(long)]
    pub i: usize,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    /// Coarse grid: comma list or lo:hi:count
    #[arg(long)]
    pub p_grid: String,
    /// Fine grid; defaults to the midpoint refinement of the coarse one
    #[arg(long)]
    pub p_grid_fine: Option<String>,
    #[arg(long, value_enum)]
    pub emit: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MorseArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: f64,
    /// Ball radius; defaults to the first critical radius
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    #[arg(long, default_value = "1e-2,1e-3,1e-4")]
    pub deltas: String,
    #[arg(long, default_value = "256,512,1024")]
    pub grids: String,
    #[arg(long, default_value = "geometric")]
    pub grid_kind: String,
    /// Smallest eigenvalues to report per run
    #[arg(long, default_value_t = 3)]
    pub eigs: usize,
    #[arg(long, value_enum)]
    pub emit: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HardyArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = lnt_core::spectral::hardy::DEFAULT_EPS)]
    pub eps0: f64,
    #[arg(long, default_value_t = 5)]
    pub j_max: u32,
    #[arg(long, default_value_t = lnt_core::spectral::hardy::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, value_enum)]
    pub emit: Option<Format>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyAllArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    #[serde(rename = "R")]
    pub radius: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Dimensions: comma list
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: String,
    /// Exponents: comma list or lo:hi:count
    #[arg(long)]
    pub p: String,
    /// Critical point indices: comma list
    #[arg(long, default_value = "1")]
    pub i: String,
    /// Shoot from these gammas instead of using the singular solution
    #[arg(long)]
    pub gamma: Option<String>,
    /// Ignore completed points from an earlier run with the same config
    #[arg(long)]
    #[serde(skip)]
    pub fresh: bool,
}

/// Comma list `a,b,c` or `lo:hi:count` (inclusive linspace).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError::Invalid(format!("cannot parse grid {spec:?}"));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        lnt_core::exponent::linspace(lo, hi, count)
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::Invalid(format!(
            "grid {spec:?} is empty or not finite"
        )));
    }
    Ok(values)
}

fn parse_indices(spec: &str) -> Result<Vec<usize>, ConfigError> {
    let v: Vec<usize> = spec
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| ConfigError::Invalid(format!("cannot parse index list {spec:?}")))
        })
        .collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(ConfigError::Invalid(format!("empty index list {spec:?}")));
    }
    Ok(v)
}

/// A parsed and validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub tol: Tolerances,
    pub jobs: Option<usize>,
    pub out_dir: PathBuf,
    pub format: Format,
    pub full: bool,
}

#[derive(Serialize)]
struct HashedConfig<'a> {
    #[serde(flatten)]
    command: &'a Command,
    tol_abs: f64,
    tol_rel: f64,
    format: Format,
    full: bool,
}

impl RunConfig {
    /// Everything that influences the numbers and files, as canonical JSON.
    /// Thread count and output location are excluded.
    pub fn canonical(&self) -> serde_json::Value {
        serde_json::to_value(HashedConfig {
            command: &self.command,
            tol_abs: self.tol.abs,
            tol_rel: self.tol.rel,
            format: self.format,
            full: self.full,
        })
        .expect("config serializes")
    }

    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(&self.canonical()).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: lnt_core::Error| ConfigError::Invalid(e.to_string());
        self.tol.validate().map_err(invalid)?;
        if self.jobs == Some(0) {
            return Err(ConfigError::Invalid("--jobs must be at least 1".into()));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        let index = |i: usize| {
            if i >= 1 {
                Ok(())
            } else {
                Err(ConfigError::Invalid(
                    "critical point index starts at 1".into(),
                ))
            }
        };
        match &self.command {
            Command::Singular(a) => {
                ProblemParams::new(a.n, a.p).map_err(invalid)?;
                positive("--r-end", a.r_end)?;
                if let Some(t) = a.tol {
                    positive("--tol", t)?;
                }
            }
            Command::Shoot(a) => {
                ProblemParams::new(a.n, a.p).map_err(invalid)?;
                positive("--r-end", a.r_end)?;
                positive("--gamma", a.gamma)?;
            }
            Command::Branch(a) => {
                index(a.i)?;
                positive("--R", a.radius)?;
                let gammas = parse_grid(&a.gamma_list)?;
                if gammas.iter().any(|&g| g <= 0.0) {
                    return Err(ConfigError::Invalid("gammas must be positive".into()));
                }
                let bracket = parse_grid(&a.p_bracket)?;
                if bracket.len() != 2 || bracket[1] <= bracket[0] {
                    return Err(ConfigError::Invalid(
                        "--p-bracket takes lo,hi with lo < hi".into(),
                    ));
                }
                ProblemParams::new(a.n, bracket[0]).map_err(invalid)?;
            }
            Command::FindExponent(a) => {
                index(a.i)?;
                positive("--R", a.radius)?;
                ProblemParams::new(a.n, a.p_lo).map_err(invalid)?;
                if !(a.p_cap > a.p_lo) {
                    return Err(ConfigError::Invalid("--p-cap must exceed --p-lo".into()));
                }
            }
            Command::Continuity(a) => {
                index(a.i)?;
                for spec in std::iter::once(&a.p_grid).chain(a.p_grid_fine.as_ref()) {
                    for p in parse_grid(spec)? {
                        ProblemParams::new(a.n, p).map_err(invalid)?;
                    }
                }
            }
            Command::Morse(a) => {
                ProblemParams::new(a.n, a.p).map_err(invalid)?;
                if let Some(r) = a.radius {
                    positive("--R", r)?;
                }
                for d in parse_grid(&a.deltas)? {
                    positive("--deltas", d)?;
                }
                for g in parse_grid(&a.grids)? {
                    if g < 2.0 || g.fract() != 0.0 {
                        return Err(ConfigError::Invalid(format!(
                            "grid size {g} must be an integer >= 2"
                        )));
                    }
                }
                a.grid_kind.parse::<GridKind>().map_err(invalid)?;
            }
            Command::Hardy(a) => {
                ProblemParams::new(a.n, a.p).map_err(invalid)?;
                positive("--eps0", a.eps0)?;
                if a.j_max == 0 || a.samples < 8 {
                    return Err(ConfigError::Invalid(
                        "--j-max >= 1 and --samples >= 8".into(),
                    ));
                }
            }
            Command::VerifyAll(a) => {
                ProblemParams::new(a.n, a.p).map_err(invalid)?;
                positive("--R", a.radius)?;
            }
            Command::Sweep(a) => {
                let ns = parse_indices(&a.n)?;
                let ps = parse_grid(&a.p)?;
                for &n in &ns {
                    for &p in &ps {
                        ProblemParams::new(n as u32, p).map_err(invalid)?;
                    }
                }
                for i in parse_indices(&a.i)? {
                    index(i)?;
                }
                if let Some(g) = &a.gamma {
                    parse_grid(g)?;
                }
            }
        }
        Ok(())
    }
}

/// Parse `argv`, merge the config file and validate.
pub fn load(argv: Vec<OsString>) -> Result<RunConfig, ConfigError> {
    let argv = match config_path(&argv) {
        Some(path) => merge_file(argv, &path)?,
        None => argv,
    };
    let cli = Cli::try_parse_from(&argv)?;
    let config = RunConfig {
        command: cli.command,
        tol: Tolerances {
            abs: cli.global.tol_abs,
            rel: cli.global.tol_rel,
        },
        jobs: cli.global.jobs,
        out_dir: cli.global.out_dir,
        format: cli.global.format,
        full: cli.global.full,
    };
    config.validate()?;
    Ok(config)
}

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

/// Append flags for config-file keys the command line left unset.
fn merge_file(mut argv: Vec<OsString>, path: &PathBuf) -> Result<Vec<OsString>, ConfigError> {
    let file_err = |msg: String| ConfigError::File {
        path: path.clone(),
        msg,
    };
    let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| file_err(e.to_string()))?;

    // required flags may still be missing here, so parse leniently
    let cmd = Cli::command().ignore_errors(true);
    let matches = cmd.clone().try_get_matches_from(&argv)?;
    let Some((sub_name, sub_matches)) = matches.subcommand() else {
        return Ok(argv);
    };
    let sub_cmd = cmd
        .find_subcommand(sub_name)
        .expect("matched subcommand exists")
        .clone();

    let mut extra = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(inner) if key == sub_name => {
                for (k, v) in inner {
                    push_flag(&sub_cmd, sub_matches, k, v, &mut extra).map_err(file_err)?;
                }
            }
            // tables for other subcommands are ignored
            toml::Value::Table(_) => {}
            v => push_flag(&cmd, &matches, key, v, &mut extra).map_err(file_err)?,
        }
    }
    argv.extend(extra);
    Ok(argv)
}

fn push_flag(
    cmd: &clap::Command,
    matches: &ArgMatches,
    key: &str,
    value: &toml::Value,
    out: &mut Vec<OsString>,
) -> Result<(), String> {
    if key == "config" {
        return Err("a config file cannot name another config file".into());
    }
    let normalized = key.replace('_', "-");
    let arg = cmd
        .get_arguments()
        .find(|a| a.get_long() == Some(key) || a.get_long() == Some(normalized.as_str()))
        .ok_or_else(|| format!("unknown key {key:?}"))?;
    let id = arg.get_id().as_str();
    if matches!(matches.value_source(id), Some(ValueSource::CommandLine)) {
        return Ok(());
    }
    let flag = format!("--{}", arg.get_long().unwrap());
    let text = match value {
        toml::Value::Boolean(true) => {
            out.push(flag.into());
            return Ok(());
        }
        toml::Value::Boolean(false) => return Ok(()),
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Array(items) => items
            .iter()
            .map(|v| match v {
                toml::Value::Integer(i) => Ok(i.to_string()),
                toml::Value::Float(f) => Ok(f.to_string()),
                toml::Value::String(s) => Ok(s.clone()),
                _ => Err(format!("unsupported array item for {key:?}")),
            })
            .collect::<Result<Vec<_>, _>>()?
            .join(","),
        _ => return Err(format!("unsupported value for {key:?}")),
    };
    out.push(format!("{flag}={text}").into());
    Ok(())
}

pub fn grid_kind(spec: &str) -> GridKind {
    spec.parse().unwrap_or_default()
}

pub struct SweepAxes {
    pub ns: Vec<u32>,
    pub ps: Vec<f64>,
    pub is: Vec<usize>,
    pub gammas: Option<Vec<f64>>,
}

pub fn sweep_axes(a: &SweepArgs) -> Result<SweepAxes, ConfigError> {
    Ok(SweepAxes {
        ns: parse_indices(&a.n)?.into_iter().map(|n| n as u32).collect(),
        ps: parse_grid(&a.p)?,
        is: parse_indices(&a.i)?,
        gammas: a.gamma.as_deref().map(parse_grid).transpose()?,
    })
}
