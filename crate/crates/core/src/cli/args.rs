//! Flag definitions, JSON config merging and resolution into typed settings.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use super::CliError;
use crate::asymptotics::{QuantileKind, TransformPreset};
use crate::estimators::DispersionKind;

#[derive(Debug, Parser)]
#[command(
    name = "qdcorr",
    version,
    about = "Asymptotic and simulated correlation between quantile and dispersion estimators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form limit covariance and correlation, one row per pairing.
    Theory(TheoryArgs),
    /// Correlation curves over a probability grid.
    Curve(CurveArgs),
    /// Monte Carlo estimate of the correlation with empirical and Fisher intervals.
    Simulate(SimulateArgs),
    /// Correlation under unequal sample sizes.
    Scaling(ScalingArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Theory(_) => "theory",
            Command::Curve(_) => "curve",
            Command::Simulate(_) => "simulate",
            Command::Scaling(_) => "scaling",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct DistFlags {
    /// gaussian, student or custom.
    #[arg(long)]
    pub dist: Option<String>,
    /// Degrees of freedom of the Student family (> 2).
    #[arg(long)]
    pub nu: Option<f64>,
    /// Location.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Scale.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// JSON descriptor with tabulated x, cdf and pdf, for --dist custom.
    #[arg(long)]
    pub custom: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PairFlags {
    /// Probability levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// variance, mad, medianad or absmoment<r>; comma separated.
    #[arg(long, value_delimiter = ',')]
    pub dispersion: Vec<String>,
    /// sample, locscale or locscale-known; comma separated.
    #[arg(long, value_delimiter = ',')]
    pub quantile: Vec<String>,
    /// Transform of the quantile estimator: identity, negate, log or square.
    #[arg(long)]
    pub h1: Option<String>,
    /// Transform of the dispersion estimator: identity, negate, log or square.
    #[arg(long)]
    pub h2: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimFlags {
    /// Window sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Windows per correlation estimate.
    #[arg(long)]
    pub l: Option<usize>,
    /// Replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SizeFlags {
    /// Quantile sample-size multipliers, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub v: Vec<u32>,
    /// Dispersion sample-size multipliers, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub w: Vec<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IoFlags {
    /// JSON file whose keys mirror the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub dist: DistFlags,
    #[command(flatten)]
    pub pair: PairFlags,
    #[command(flatten)]
    pub io: IoFlags,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub dist: DistFlags,
    #[command(flatten)]
    pub pair: PairFlags,
    /// Grid p = i/m, i = 1..m-1, used when --p is absent.
    #[arg(long)]
    pub grid: Option<u32>,
    #[command(flatten)]
    pub io: IoFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub dist: DistFlags,
    #[command(flatten)]
    pub pair: PairFlags,
    #[command(flatten)]
    pub sim: SimFlags,
    #[command(flatten)]
    pub sizes: SizeFlags,
    #[command(flatten)]
    pub io: IoFlags,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub dist: DistFlags,
    #[command(flatten)]
    pub pair: PairFlags,
    #[command(flatten)]
    pub sim: SimFlags,
    #[command(flatten)]
    pub sizes: SizeFlags,
    /// Append Monte Carlo estimates.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub io: IoFlags,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    dist: Option<String>,
    nu: Option<f64>,
    mu: Option<f64>,
    sigma: Option<f64>,
    custom: Option<PathBuf>,
    p: Option<OneOrMany<f64>>,
    dispersion: Option<OneOrMany<String>>,
    quantile: Option<OneOrMany<String>>,
    h1: Option<String>,
    h2: Option<String>,
    grid: Option<u32>,
    n: Option<OneOrMany<usize>>,
    l: Option<usize>,
    reps: Option<usize>,
    seed: Option<u64>,
    v: Option<OneOrMany<u32>>,
    w: Option<OneOrMany<u32>>,
    verify: Option<bool>,
    output: Option<PathBuf>,
}

const DIST_KEYS: &[&str] = &["dist", "nu", "mu", "sigma", "custom"];
const PAIR_KEYS: &[&str] = &["p", "dispersion", "quantile", "h1", "h2"];
const SIM_KEYS: &[&str] = &["n", "l", "reps", "seed"];
const SIZE_KEYS: &[&str] = &["v", "w"];

fn load_config(path: &Path, command: &str, extra: &[&[&str]]) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let map = value
        .as_object()
        .ok_or_else(|| CliError::Usage(format!("config {} must be a JSON object", path.display())))?;
    for key in map.keys() {
        let known = key == "output"
            || [DIST_KEYS, PAIR_KEYS].iter().chain(extra).any(|ks| ks.contains(&key.as_str()));
        if !known {
            return Err(CliError::Usage(format!("config key '{key}' does not apply to {command}")));
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

fn or_vec<T>(flag: Vec<T>, file: Option<OneOrMany<T>>) -> Vec<T> {
    if flag.is_empty() {
        file.map(OneOrMany::into_vec).unwrap_or_default()
    } else {
        flag
    }
}

impl DistFlags {
    fn merge(&mut self, c: &mut ConfigFile) {
        self.dist = self.dist.take().or(c.dist.take());
        self.nu = self.nu.or(c.nu);
        self.mu = self.mu.or(c.mu);
        self.sigma = self.sigma.or(c.sigma);
        self.custom = self.custom.take().or(c.custom.take());
    }
}

impl PairFlags {
    fn merge(&mut self, c: &mut ConfigFile) {
        self.p = or_vec(std::mem::take(&mut self.p), c.p.take());
        self.dispersion = or_vec(std::mem::take(&mut self.dispersion), c.dispersion.take());
        self.quantile = or_vec(std::mem::take(&mut self.quantile), c.quantile.take());
        self.h1 = self.h1.take().or(c.h1.take());
        self.h2 = self.h2.take().or(c.h2.take());
    }
}

impl SimFlags {
    fn merge(&mut self, c: &mut ConfigFile) {
        self.n = or_vec(std::mem::take(&mut self.n), c.n.take());
        self.l = self.l.or(c.l);
        self.reps = self.reps.or(c.reps);
        self.seed = self.seed.or(c.seed);
    }
}

impl SizeFlags {
    fn merge(&mut self, c: &mut ConfigFile) {
        self.v = or_vec(std::mem::take(&mut self.v), c.v.take());
        self.w = or_vec(std::mem::take(&mut self.w), c.w.take());
    }
}

impl IoFlags {
    fn merge(&mut self, c: &mut ConfigFile) {
        self.output = self.output.take().or(c.output.take());
    }
}

/// Folds the `--config` file (if any) into the flags.
pub fn apply_config(command: &mut Command) -> Result<(), CliError> {
    let name = command.name();
    match command {
        Command::Theory(a) => {
            if let Some(path) = a.io.config.clone() {
                let mut c = load_config(&path, name, &[])?;
                a.dist.merge(&mut c);
                a.pair.merge(&mut c);
                a.io.merge(&mut c);
            }
        }
        Command::Curve(a) => {
            if let Some(path) = a.io.config.clone() {
                let mut c = load_config(&path, name, &[&["grid"]])?;
                a.dist.merge(&mut c);
                a.pair.merge(&mut c);
                a.grid = a.grid.or(c.grid);
                a.io.merge(&mut c);
            }
        }
        Command::Simulate(a) => {
            if let Some(path) = a.io.config.clone() {
                let mut c = load_config(&path, name, &[SIM_KEYS, SIZE_KEYS])?;
                a.dist.merge(&mut c);
                a.pair.merge(&mut c);
                a.sim.merge(&mut c);
                a.sizes.merge(&mut c);
                a.io.merge(&mut c);
            }
        }
        Command::Scaling(a) => {
            if let Some(path) = a.io.config.clone() {
                let mut c = load_config(&path, name, &[SIM_KEYS, SIZE_KEYS, &["verify"]])?;
                a.dist.merge(&mut c);
                a.pair.merge(&mut c);
                a.sim.merge(&mut c);
                a.sizes.merge(&mut c);
                a.verify = a.verify || c.verify.unwrap_or(false);
                a.io.merge(&mut c);
            }
        }
    }
    Ok(())
}

/// Base variate selected on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum DistChoice {
    Gaussian,
    Student(f64),
    Custom(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistSettings {
    pub choice: DistChoice,
    pub mu: f64,
    pub sigma: f64,
}

impl DistFlags {
    /// `None` when no distribution was named and `allow_default` is false.
    pub fn resolve(&self, allow_default: bool) -> Result<Option<DistSettings>, CliError> {
        let mu = self.mu.unwrap_or(0.0);
        let sigma = self.sigma.unwrap_or(1.0);
        let name = match self.dist.as_deref() {
            Some(d) => d.trim().to_ascii_lowercase(),
            None if allow_default => "gaussian".to_string(),
            None => {
                if self.nu.is_some() || self.custom.is_some() {
                    return Err(CliError::Usage("--nu/--custom need --dist".into()));
                }
                return Ok(None);
            }
        };
        let choice = match name.as_str() {
            "gaussian" | "normal" => DistChoice::Gaussian,
            "student" | "t" => {
                let nu = self
                    .nu
                    .ok_or_else(|| CliError::Usage("--dist student needs --nu".into()))?;
                DistChoice::Student(nu)
            }
            "custom" => {
                let path = self
                    .custom
                    .clone()
                    .ok_or_else(|| CliError::Usage("--dist custom needs --custom <file>".into()))?;
                DistChoice::Custom(path)
            }
            other => return Err(CliError::Usage(format!("unknown distribution '{other}'"))),
        };
        if self.nu.is_some() && !matches!(choice, DistChoice::Student(_)) {
            return Err(CliError::Usage("--nu only applies to --dist student".into()));
        }
        if self.custom.is_some() && !matches!(choice, DistChoice::Custom(_)) {
            return Err(CliError::Usage("--custom only applies to --dist custom".into()));
        }
        Ok(Some(DistSettings { choice, mu, sigma }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSettings {
    pub ps: Vec<f64>,
    pub dispersions: Vec<DispersionKind>,
    pub quantiles: Vec<QuantileKind>,
    pub h1: TransformPreset,
    pub h2: TransformPreset,
}

pub fn parse_preset(s: &str) -> Result<TransformPreset, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "identity" => Ok(TransformPreset::Identity),
        "negate" => Ok(TransformPreset::Negate),
        "log" => Ok(TransformPreset::Log),
        "square" => Ok(TransformPreset::Square),
        other => Err(CliError::Usage(format!(
            "unknown transform '{other}' (identity, negate, log, square)"
        ))),
    }
}

pub fn preset_label(p: TransformPreset) -> &'static str {
    match p {
        TransformPreset::Identity => "identity",
        TransformPreset::Negate => "negate",
        TransformPreset::Log => "log",
        TransformPreset::Square => "square",
        TransformPreset::Custom => "custom",
    }
}

impl PairFlags {
    pub fn resolve(
        &self,
        default_ps: Vec<f64>,
        default_dispersions: &[DispersionKind],
        default_quantiles: &[QuantileKind],
    ) -> Result<PairSettings, CliError> {
        let ps = if self.p.is_empty() { default_ps } else { self.p.clone() };
        if let Some(bad) = ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(CliError::Usage(format!("--p values must lie in (0, 1), got {bad}")));
        }
        let dispersions = if self.dispersion.is_empty() {
            default_dispersions.to_vec()
        } else {
            self.dispersion
                .iter()
                .map(|s| DispersionKind::parse(s).map_err(|e| CliError::Usage(e.to_string())))
                .collect::<Result<_, _>>()?
        };
        let quantiles = if self.quantile.is_empty() {
            default_quantiles.to_vec()
        } else {
            self.quantile
                .iter()
                .map(|s| QuantileKind::parse(s).map_err(|e| CliError::Usage(e.to_string())))
                .collect::<Result<_, _>>()?
        };
        let h1 = self.h1.as_deref().map(parse_preset).transpose()?.unwrap_or(TransformPreset::Identity);
        let h2 = self.h2.as_deref().map(parse_preset).transpose()?.unwrap_or(TransformPreset::Identity);
        Ok(PairSettings { ps, dispersions, quantiles, h1, h2 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub ns: Vec<usize>,
    pub l: usize,
    pub reps: usize,
    pub seed: u64,
}

impl SimFlags {
    pub fn resolve(&self, default_ns: &[usize], default_reps: usize) -> Result<SimSettings, CliError> {
        let ns = if self.n.is_empty() { default_ns.to_vec() } else { self.n.clone() };
        let s = SimSettings {
            ns,
            l: self.l.unwrap_or(50),
            reps: self.reps.unwrap_or(default_reps),
            seed: self.seed.unwrap_or(1),
        };
        if s.ns.iter().any(|&n| n < 2) {
            return Err(CliError::Usage("--n values must be >= 2".into()));
        }
        if s.l < 4 {
            return Err(CliError::Usage(format!("--l must be >= 4, got {}", s.l)));
        }
        if s.reps < 1 {
            return Err(CliError::Usage("--reps must be >= 1".into()));
        }
        Ok(s)
    }
}

impl SizeFlags {
    pub fn resolve(&self, default_vs: &[u32], default_ws: &[u32]) -> Result<(Vec<u32>, Vec<u32>), CliError> {
        let v = if self.v.is_empty() { default_vs.to_vec() } else { self.v.clone() };
        let w = if self.w.is_empty() { default_ws.to_vec() } else { self.w.clone() };
        if v.iter().chain(&w).any(|&x| x == 0) {
            return Err(CliError::Usage("--v and --w must be positive".into()));
        }
        Ok((v, w))
    }
}
