use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jumpmix_cli::analysis::{self, Outcome};
use jumpmix_cli::config::{
    build_bijection, build_chain, build_chain_unchecked, BijectionSpec, ChainSpec, CheegerMode,
    Format, LoadedConfig, Sampling,
};
use jumpmix_cli::error::{CliError, CliResult};
use jumpmix_cli::output::write_atomic;
use jumpmix::{Permutation, TransitionMatrix};

/// Mixing experiments for Markov chains interleaved with deterministic
/// bijections.
#[derive(Parser, Debug)]
#[command(name = "jumpmix", version, about)]
struct Cli {
    /// Experiment config (JSON). Without a subcommand the whole config runs;
    /// with one it supplies the chain and bijection defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file for a single subcommand, or output directory for a run.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for the parallel loops.
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the four standing assumptions of a kernel.
    Validate {
        #[arg(long)]
        chain: Option<ChainSpec>,
    },
    /// Worst-start TV profile of the composed chain, with bounds.
    Mix {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        kmax: usize,
        /// Expansion constant for the closed-form bound column.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Use one start state instead of the maximum over all starts.
        #[arg(long, value_name = "STATE")]
        single_start: Option<usize>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// λ₂ of the symmetrized kernel, Cheeger constant and derived bounds.
    Spectral {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = CheegerArg::Exhaustive)]
        cheeger: CheegerArg,
        /// Sample count for `--cheeger sampled`.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Worst expansion ratio over small sets.
    Expansion {
        #[command(flatten)]
        pair: PairArgs,
        /// Check this many random sets instead of all of them.
        #[arg(long, value_name = "N", requires = "seed")]
        sampled: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Expansion check over many seeded random bijections.
    Scan {
        #[arg(long)]
        chain: Option<ChainSpec>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Exact TV of the second-order walk against its Fourier bound.
    Fibonacci {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Build and verify a higher-order shift-register chain.
    Hof {
        /// Spec file (JSON).
        spec: PathBuf,
    },
    /// Mixing profiles of two configs side by side.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Run every analysis of `--config`.
    Run,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// lazy-cycle:N, hypercube:D or file:PATH
    #[arg(long)]
    chain: Option<ChainSpec>,
    /// identity, doubling, affine:A, cubing, inversion, random:SEED or file:PATH
    #[arg(long)]
    bijection: Option<BijectionSpec>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheegerArg {
    Skip,
    Exhaustive,
    Sampled,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::config("--threads", e.to_string()))?;
    }
    let config = cli.config.as_deref().map(LoadedConfig::load).transpose()?;
    let out = cli.out.as_deref();

    let Some(command) = cli.command else {
        return match &config {
            Some(cfg) => run_config(cfg, out),
            None => Err(CliError::config(
                "arguments",
                "nothing to do: give a subcommand or --config",
            )),
        };
    };

    match command {
        Command::Run => match &config {
            Some(cfg) => run_config(cfg, out),
            None => Err(CliError::config("run", "--config is required")),
        },
        Command::Validate { chain } => {
            let spec = chain_spec(chain, config.as_ref())?;
            let p = build_chain_unchecked(&spec).map_err(|e| e.for_flag("--chain"))?;
            emit(analysis::validation(&p), out)
        }
        Command::Mix {
            pair,
            kmax,
            epsilon,
            single_start,
            format,
        } => {
            let (p, f) = chain_and_bijection(pair, config.as_ref())?;
            if let Some(e) = epsilon {
                if !(e > 0.0 && e.is_finite()) {
                    return Err(CliError::config("--epsilon", format!("must be positive, got {e}")));
                }
            }
            emit(analysis::mixing(&p, &f, kmax, epsilon, single_start, format.into())?, out)
        }
        Command::Spectral {
            pair,
            cheeger,
            samples,
            seed,
            epsilon,
        } => {
            let (p, f) = chain_and_bijection(pair, config.as_ref())?;
            let mode = match cheeger {
                CheegerArg::Skip => CheegerMode::Skip,
                CheegerArg::Exhaustive => CheegerMode::Exhaustive,
                CheegerArg::Sampled => match (samples, seed) {
                    (Some(samples), Some(seed)) => CheegerMode::Sampled(Sampling { samples, seed }),
                    _ => {
                        return Err(CliError::config(
                            "--cheeger sampled",
                            "needs --samples and --seed",
                        ))
                    }
                },
            };
            emit(analysis::spectral(&p, &f, mode, epsilon)?, out)
        }
        Command::Expansion {
            pair,
            sampled,
            seed,
            epsilon,
        } => {
            let (p, f) = chain_and_bijection(pair, config.as_ref())?;
            let sampling = sampled.map(|samples| Sampling {
                samples,
                seed: seed.unwrap_or_default(),
            });
            let strategy = analysis::expansion_strategy(p.n(), sampling, &[]);
            emit(analysis::expansion(&p, &f, &strategy, epsilon)?, out)
        }
        Command::Scan {
            chain,
            epsilon,
            trials,
            seed,
            format,
        } => {
            let spec = chain_spec(chain, config.as_ref())?;
            let p = build_chain(&spec).map_err(|e| e.for_flag("--chain"))?;
            emit(analysis::scan(&p, epsilon, trials, seed, format.into())?, out)
        }
        Command::Fibonacci { n, kmax, c, format } => {
            emit(analysis::fibonacci(n, kmax, c, format.into())?, out)
        }
        Command::Hof { spec } => emit(analysis::hof(&analysis::load_hof_file(&spec)?)?, out),
        Command::Compare { a, b, format } => {
            let a = LoadedConfig::load(&a)?;
            let b = LoadedConfig::load(&b)?;
            emit(jumpmix_cli::compare(&a, &b, format.into())?, out)
        }
    }
}

fn run_config(cfg: &LoadedConfig, out: Option<&Path>) -> CliResult<()> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir())
        .ok_or_else(|| {
            CliError::config(
                cfg.location(&[]),
                "no output directory: set output.path or pass --out",
            )
        })?;
    let summary = jumpmix_cli::run(cfg, &dir)?;
    for path in &summary.written {
        eprintln!("wrote {}", path.display());
    }
    for note in &summary.notes {
        eprintln!("{note}");
    }
    Ok(())
}

fn chain_spec(flag: Option<ChainSpec>, config: Option<&LoadedConfig>) -> CliResult<ChainSpec> {
    match (flag, config) {
        (Some(spec), _) => Ok(spec),
        (None, Some(cfg)) => cfg
            .config
            .chain
            .as_ref()
            .map(|c| c.resolved(&cfg.base_dir()))
            .ok_or_else(|| CliError::config(cfg.location(&[]), "config has no chain")),
        (None, None) => Err(CliError::config("--chain", "required (or give --config)")),
    }
}

fn chain_and_bijection(
    pair: PairArgs,
    config: Option<&LoadedConfig>,
) -> CliResult<(TransitionMatrix, Permutation)> {
    let spec = chain_spec(pair.chain, config)?;
    let p = build_chain(&spec).map_err(|e| e.for_flag("--chain"))?;
    let bij = match (pair.bijection, config) {
        (Some(b), _) => b,
        (None, Some(cfg)) => cfg
            .config
            .bijection
            .as_ref()
            .map(|b| b.resolved(&cfg.base_dir()))
            .ok_or_else(|| CliError::config(cfg.location(&[]), "config has no bijection"))?,
        (None, None) => return Err(CliError::config("--bijection", "required (or give --config)")),
    };
    let f = build_bijection(&bij, p.n()).map_err(|e| e.for_flag("--bijection"))?;
    Ok((p, f))
}

/// Writes the artifact to `out` or stdout, then reports notes and any
/// violation.
fn emit(outcome: Outcome, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => write_atomic(path, &outcome.artifact.bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&outcome.artifact.bytes)
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    if let Some(note) = outcome.note {
        eprintln!("{note}");
    }
    match outcome.violation {
        Some(v) => Err(CliError::AssumptionFailed(v)),
        None => Ok(()),
    }
}

