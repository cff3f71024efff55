//! Experiment configuration files.
//!
//! A config is a JSON object with `chain`, `bijection`, `analysis` and
//! `output` keys. Keys starting with `_` are ignored anywhere in the
//! document; any other unknown key is an error. Relative paths are resolved
//! against the directory holding the config.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use jumpmix::chain::{hypercube_walk, lazy_cycle_walk};
use jumpmix::io::{load_matrix, load_permutation};
use jumpmix::{Permutation, PermutationKind, TransitionMatrix};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::locate::{self, Step};

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChainSpec {
    LazyCycle { n: usize },
    Hypercube { d: u32 },
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BijectionSpec {
    Identity,
    Doubling,
    Affine { a: u64 },
    Cubing,
    Inversion,
    Random { seed: u64 },
    Explicit { forward: Vec<usize> },
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheegerMode {
    Skip,
    #[default]
    Exhaustive,
    Sampled(Sampling),
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum KernelRef {
    Path(PathBuf),
    Chain(ChainSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Additive,
    CubePlusRest,
}

/// A higher-order chain description: `builtin` or `table`, not both.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HofSpec {
    pub base_n: usize,
    pub order: usize,
    #[serde(default)]
    pub builtin: Option<Builtin>,
    #[serde(default)]
    pub table: Option<Vec<usize>>,
    pub base_kernel: KernelRef,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum HofSource {
    Path(PathBuf),
    Inline(HofSpec),
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    Mixing {
        kmax: usize,
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default)]
        single_start: Option<usize>,
    },
    Spectral {
        #[serde(default)]
        cheeger: CheegerMode,
        #[serde(default)]
        epsilon: Option<f64>,
    },
    Expansion {
        #[serde(default)]
        sampled: Option<Sampling>,
        #[serde(default)]
        include: Vec<Vec<usize>>,
        #[serde(default)]
        epsilon: Option<f64>,
    },
    Scan {
        epsilon: f64,
        trials: usize,
        seed: u64,
    },
    Fibonacci {
        n: usize,
        kmax: usize,
        #[serde(default)]
        c: Option<f64>,
    },
    Hof {
        spec: HofSource,
    },
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Mixing { .. } => "mixing",
            Analysis::Spectral { .. } => "spectral",
            Analysis::Expansion { .. } => "expansion",
            Analysis::Scan { .. } => "scan",
            Analysis::Fibonacci { .. } => "fibonacci",
            Analysis::Hof { .. } => "hof",
        }
    }

    fn needs_chain(&self) -> bool {
        matches!(
            self,
            Analysis::Mixing { .. }
                | Analysis::Spectral { .. }
                | Analysis::Expansion { .. }
                | Analysis::Scan { .. }
        )
    }

    fn needs_bijection(&self) -> bool {
        matches!(
            self,
            Analysis::Mixing { .. } | Analysis::Spectral { .. } | Analysis::Expansion { .. }
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub chain: Option<ChainSpec>,
    #[serde(default)]
    pub bijection: Option<BijectionSpec>,
    #[serde(default)]
    pub analysis: Vec<Analysis>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A parsed config together with its source, for line-referenced errors.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub path: PathBuf,
    pub source: String,
}

fn strip_comment_keys(value: &mut Value) {
    match value {
        Value::Object(map) => {
            map.retain(|k, _| !k.starts_with('_'));
            map.values_mut().for_each(strip_comment_keys);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_comment_keys),
        _ => {}
    }
}

/// Reads a JSON file into `T`, ignoring `_` keys and reporting errors as
/// `path:line`.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<(T, String)> {
    let source = fs::read_to_string(path).map_err(|source| CliError::MissingInput {
        path: path.to_path_buf(),
        source,
    })?;
    let mut value: Value = serde_json::from_str(&source).map_err(|e| {
        CliError::config(
            format!("{}:{}", path.display(), e.line()),
            format!("invalid JSON: {e}"),
        )
    })?;
    strip_comment_keys(&mut value);
    let parsed = serde_path_to_error::deserialize(value).map_err(|e| {
        let steps = locate::from_serde_path(e.path());
        let line = locate::line_of(&source, &steps);
        let at = locate::render(&steps);
        let message = if at.is_empty() {
            e.inner().to_string()
        } else {
            format!("{at}: {}", e.inner())
        };
        CliError::config(format!("{}:{line}", path.display()), message)
    })?;
    Ok((parsed, source))
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let (config, source) = read_json(path)?;
        Ok(Self {
            config,
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn base_dir(&self) -> PathBuf {
        self.path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    }

    /// `path:line` of the node at `steps`.
    pub fn location(&self, steps: &[Step]) -> String {
        format!(
            "{}:{}",
            self.path.display(),
            locate::line_of(&self.source, steps)
        )
    }

    pub fn analysis_location(&self, index: usize) -> String {
        self.location(&[Step::Key("analysis".into()), Step::Index(index)])
    }

    fn error_at(&self, steps: &[Step], err: jumpmix::Error) -> CliError {
        let location = self.location(steps);
        match err {
            jumpmix::Error::Capacity { .. } => CliError::Analysis {
                context: location,
                source: err,
            },
            other => CliError::config(location, other.to_string()),
        }
    }

    /// Builds the chain and bijection and checks every analysis against
    /// them, before any analysis runs.
    pub fn resolve(&self) -> CliResult<Plan> {
        let base = self.base_dir();
        let cfg = &self.config;
        let chain_step = [Step::Key("chain".into())];
        let bij_step = [Step::Key("bijection".into())];

        let chain = match &cfg.chain {
            Some(spec) => Some(
                build_chain(&spec.resolved(&base))
                    .map_err(|e| e.relocate(|err| self.error_at(&chain_step, err)))?,
            ),
            None => None,
        };
        let bijection = match (&cfg.bijection, &chain) {
            (Some(spec), Some(p)) => Some(
                build_bijection(&spec.resolved(&base), p.n())
                    .map_err(|e| e.relocate(|err| self.error_at(&bij_step, err)))?,
            ),
            (Some(_), None) => {
                return Err(CliError::config(
                    self.location(&bij_step),
                    "a bijection needs a chain to fix the state count",
                ))
            }
            _ => None,
        };

        let mut analyses = Vec::with_capacity(cfg.analysis.len());
        for (i, analysis) in cfg.analysis.iter().enumerate() {
            let at = || self.analysis_location(i);
            if analysis.needs_chain() && chain.is_none() {
                return Err(CliError::config(
                    at(),
                    format!("{} analysis needs a chain", analysis.name()),
                ));
            }
            if analysis.needs_bijection() && bijection.is_none() {
                return Err(CliError::config(
                    at(),
                    format!("{} analysis needs a bijection", analysis.name()),
                ));
            }
            let n = chain.as_ref().map(TransitionMatrix::n).unwrap_or(0);
            check_analysis(analysis, n).map_err(|m| CliError::config(at(), m))?;
            analyses.push(analysis.resolved(&base));
        }
        Ok(Plan {
            chain,
            bijection,
            analyses,
            format: cfg.output.format,
        })
    }

    /// Output directory from the config, resolved against its directory.
    pub fn output_dir(&self) -> Option<PathBuf> {
        self.config
            .output
            .path
            .as_ref()
            .map(|p| resolve_path(&self.base_dir(), p))
    }
}

/// Everything a run needs, already built and checked.
#[derive(Clone, Debug)]
pub struct Plan {
    pub chain: Option<TransitionMatrix>,
    pub bijection: Option<Permutation>,
    pub analyses: Vec<Analysis>,
    pub format: Format,
}

fn check_epsilon(epsilon: Option<f64>, positive: bool) -> Result<(), String> {
    match epsilon {
        Some(e) if positive && !(e > 0.0 && e.is_finite()) => {
            Err(format!("epsilon must be positive, got {e}"))
        }
        Some(e) if !(e.is_finite() && e >= 0.0) => {
            Err(format!("epsilon must be a nonnegative number, got {e}"))
        }
        _ => Ok(()),
    }
}

fn check_analysis(analysis: &Analysis, n: usize) -> Result<(), String> {
    match analysis {
        Analysis::Mixing {
            epsilon,
            single_start,
            ..
        } => {
            check_epsilon(*epsilon, true)?;
            match single_start {
                Some(s) if *s >= n => Err(format!("single_start {s} outside 0..{n}")),
                _ => Ok(()),
            }
        }
        Analysis::Spectral { cheeger, epsilon } => {
            check_epsilon(*epsilon, false)?;
            match cheeger {
                CheegerMode::Sampled(s) if s.samples == 0 => Err("samples must be positive".into()),
                _ => Ok(()),
            }
        }
        Analysis::Expansion {
            sampled,
            include,
            epsilon,
        } => {
            check_epsilon(*epsilon, false)?;
            if matches!(sampled, Some(s) if s.samples == 0) && include.is_empty() {
                return Err("sampled mode needs samples > 0 or an include list".into());
            }
            if !include.is_empty() && sampled.is_none() {
                return Err("include lists apply to sampled mode only".into());
            }
            match include.iter().flatten().find(|&&i| i >= n) {
                Some(i) => Err(format!("included state {i} outside 0..{n}")),
                None => Ok(()),
            }
        }
        Analysis::Scan { epsilon, .. } => check_epsilon(Some(*epsilon), false),
        Analysis::Fibonacci { n, c, .. } => {
            if *n < 2 {
                return Err(format!("modulus must be >= 2, got {n}"));
            }
            match c {
                Some(c) if !(c.is_finite() && *c >= 0.0) => Err(format!("c must be >= 0, got {c}")),
                _ => Ok(()),
            }
        }
        Analysis::Hof { .. } => Ok(()),
    }
}

pub fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ChainSpec {
    pub fn resolved(&self, base: &Path) -> Self {
        match self {
            ChainSpec::File { path } => ChainSpec::File {
                path: resolve_path(base, path),
            },
            other => other.clone(),
        }
    }
}

impl BijectionSpec {
    pub fn resolved(&self, base: &Path) -> Self {
        match self {
            BijectionSpec::File { path } => BijectionSpec::File {
                path: resolve_path(base, path),
            },
            other => other.clone(),
        }
    }
}

impl HofSpec {
    pub fn resolved(&self, base: &Path) -> Self {
        let mut out = self.clone();
        out.base_kernel = match &self.base_kernel {
            KernelRef::Path(p) => KernelRef::Path(resolve_path(base, p)),
            KernelRef::Chain(c) => KernelRef::Chain(c.resolved(base)),
        };
        out
    }
}

impl Analysis {
    fn resolved(&self, base: &Path) -> Self {
        match self {
            Analysis::Hof { spec } => Analysis::Hof {
                spec: match spec {
                    HofSource::Path(p) => HofSource::Path(resolve_path(base, p)),
                    HofSource::Inline(s) => HofSource::Inline(s.resolved(base)),
                },
            },
            other => other.clone(),
        }
    }
}

/// Errors from building inputs: unreadable files keep their path, core
/// errors are placed by the caller.
#[derive(Debug)]
pub enum BuildError {
    Input(CliError),
    Core(jumpmix::Error),
}

impl BuildError {
    pub fn relocate(self, place: impl FnOnce(jumpmix::Error) -> CliError) -> CliError {
        match self {
            BuildError::Input(e) => e,
            BuildError::Core(e) => place(e),
        }
    }

    /// Placement for command-line arguments.
    pub fn for_flag(self, flag: &str) -> CliError {
        self.relocate(|err| match err {
            jumpmix::Error::Capacity { .. } => CliError::Analysis {
                context: flag.to_string(),
                source: err,
            },
            other => CliError::config(flag, other.to_string()),
        })
    }
}

impl From<jumpmix::Error> for BuildError {
    fn from(e: jumpmix::Error) -> Self {
        BuildError::Core(e)
    }
}

fn read_failure(path: &Path, err: jumpmix::Error) -> BuildError {
    match err {
        jumpmix::Error::Io(source) => BuildError::Input(CliError::MissingInput {
            path: path.to_path_buf(),
            source,
        }),
        other => BuildError::Input(CliError::config(path.display().to_string(), other.to_string())),
    }
}

/// Builds a chain and insists on all four standing assumptions.
pub fn build_chain(spec: &ChainSpec) -> Result<TransitionMatrix, BuildError> {
    match spec {
        ChainSpec::LazyCycle { n } => Ok(lazy_cycle_walk(*n)?),
        ChainSpec::Hypercube { d } => Ok(hypercube_walk(*d)?),
        ChainSpec::File { path } => {
            let (p, report) = load_matrix(path).map_err(|e| read_failure(path, e))?;
            if !report.all_passed() {
                return Err(BuildError::Input(CliError::config(
                    path.display().to_string(),
                    format!("kernel fails: {}", report.failures().join("; ")),
                )));
            }
            Ok(p)
        }
    }
}

/// Builds a chain without checking assumptions, for `validate`.
pub fn build_chain_unchecked(spec: &ChainSpec) -> Result<TransitionMatrix, BuildError> {
    match spec {
        ChainSpec::File { path } => Ok(load_matrix(path).map_err(|e| read_failure(path, e))?.0),
        other => build_chain(other),
    }
}

pub fn build_bijection(spec: &BijectionSpec, n: usize) -> Result<Permutation, BuildError> {
    let kind = match spec {
        BijectionSpec::Identity => PermutationKind::Identity,
        BijectionSpec::Doubling => PermutationKind::Doubling,
        BijectionSpec::Affine { a } => PermutationKind::Affine(*a),
        BijectionSpec::Cubing => PermutationKind::Cubing,
        BijectionSpec::Inversion => PermutationKind::Inversion,
        BijectionSpec::Random { seed } => PermutationKind::Random(*seed),
        BijectionSpec::Explicit { forward } => PermutationKind::Explicit(forward.clone()),
        BijectionSpec::File { path } => {
            let f = load_permutation(path).map_err(|e| read_failure(path, e))?;
            if f.len() != n {
                return Err(BuildError::Core(jumpmix::Error::DimensionMismatch {
                    expected: n,
                    found: f.len(),
                }));
            }
            return Ok(f);
        }
    };
    Ok(Permutation::build(&kind, n)?)
}

/// Shorthand `family:arg` accepted on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShorthandError(String);

impl fmt::Display for ShorthandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ShorthandError {}

fn split_arg(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((head, tail)) => (head, Some(tail)),
        None => (s, None),
    }
}

fn number<T: FromStr>(arg: Option<&str>, what: &str) -> Result<T, ShorthandError> {
    arg.and_then(|a| a.parse().ok())
        .ok_or_else(|| ShorthandError(format!("{what} needs a numeric argument, e.g. {what}:5")))
}

/// `lazy-cycle:N`, `hypercube:D` or `file:PATH`.
impl FromStr for ChainSpec {
    type Err = ShorthandError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match split_arg(s) {
            ("lazy-cycle" | "lazy_cycle", arg) => Ok(ChainSpec::LazyCycle {
                n: number(arg, "lazy-cycle")?,
            }),
            ("hypercube", arg) => Ok(ChainSpec::Hypercube {
                d: number(arg, "hypercube")?,
            }),
            ("file", Some(path)) => Ok(ChainSpec::File { path: path.into() }),
            _ => Err(ShorthandError(format!(
                "unknown chain {s:?}; expected lazy-cycle:N, hypercube:D or file:PATH"
            ))),
        }
    }
}

/// `identity`, `doubling`, `affine:A`, `cubing`, `inversion`, `random:SEED`
/// or `file:PATH`.
impl FromStr for BijectionSpec {
    type Err = ShorthandError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match split_arg(s) {
            ("identity", None) => Ok(BijectionSpec::Identity),
            ("doubling", None) => Ok(BijectionSpec::Doubling),
            ("cubing", None) => Ok(BijectionSpec::Cubing),
            ("inversion", None) => Ok(BijectionSpec::Inversion),
            ("affine", arg) => Ok(BijectionSpec::Affine {
                a: number(arg, "affine")?,
            }),
            ("random", arg) => Ok(BijectionSpec::Random {
                seed: number(arg, "random")?,
            }),
            ("file", Some(path)) => Ok(BijectionSpec::File { path: path.into() }),
            _ => Err(ShorthandError(format!(
                "unknown bijection {s:?}; expected identity, doubling, affine:A, cubing, \
                 inversion, random:SEED or file:PATH"
            ))),
        }
    }
}
