//! Experiment driver behind the `jumpmix` binary: config loading, analysis
//! orchestration and deterministic artifact output.

pub mod analysis;
pub mod config;
pub mod error;
pub mod locate;
pub mod output;

use std::path::{Path, PathBuf};

use analysis::{run_one, Artifact, Outcome};
use config::{Analysis, Format, LoadedConfig};
use error::{CliError, CliResult};

/// File name of the `index`-th artifact (0-based) of a run.
pub fn artifact_name(index: usize, artifact: &Artifact) -> String {
    format!("{:02}_{}.{}", index + 1, artifact.stem, artifact.ext)
}

/// What a run wrote, in order.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
    pub notes: Vec<String>,
}

/// Resolves `config`, runs its analyses in order and writes each artifact
/// into `out_dir`. Stops at the first violation after writing its artifact.
pub fn run(config: &LoadedConfig, out_dir: &Path) -> CliResult<RunSummary> {
    let plan = config.resolve()?;
    let mut summary = RunSummary::default();
    for (i, analysis) in plan.analyses.iter().enumerate() {
        let outcome = run_one(&plan, analysis).map_err(|e| locate_failure(config, i, e))?;
        let path = out_dir.join(artifact_name(i, &outcome.artifact));
        output::write_atomic(&path, &outcome.artifact.bytes)?;
        summary.written.push(path);
        summary.notes.extend(outcome.note);
        if let Some(v) = outcome.violation {
            return Err(CliError::AssumptionFailed(format!(
                "{}: {v}",
                config.analysis_location(i)
            )));
        }
    }
    Ok(summary)
}

/// Prefixes analysis failures with the config line of the analysis.
fn locate_failure(config: &LoadedConfig, index: usize, err: CliError) -> CliError {
    match err {
        CliError::Analysis { context, source } => CliError::Analysis {
            context: format!("{}: {context}", config.analysis_location(index)),
            source,
        },
        CliError::Config { location, message } if location == "config" || location == "hof" => {
            CliError::config(config.analysis_location(index), message)
        }
        other => other,
    }
}

/// First mixing analysis of a config with its index.
fn first_mixing(config: &LoadedConfig) -> CliResult<(usize, &Analysis)> {
    config
        .config
        .analysis
        .iter()
        .enumerate()
        .find(|(_, a)| matches!(a, Analysis::Mixing { .. }))
        .ok_or_else(|| {
            CliError::config(
                config.path.display().to_string(),
                "compare needs a mixing analysis in each config",
            )
        })
}

/// Worst-start TV of two configs side by side.
pub fn compare(a: &LoadedConfig, b: &LoadedConfig, format: Format) -> CliResult<Outcome> {
    let (ia, ma) = first_mixing(a)?;
    let (ib, mb) = first_mixing(b)?;
    let (
        Analysis::Mixing {
            kmax: ka,
            single_start: sa,
            ..
        },
        Analysis::Mixing {
            kmax: kb,
            single_start: sb,
            ..
        },
    ) = (ma, mb)
    else {
        unreachable!("first_mixing returns mixing analyses")
    };
    if ka != kb {
        return Err(CliError::config(
            b.analysis_location(ib),
            format!(
                "kmax {kb} differs from kmax {ka} at {}",
                a.analysis_location(ia)
            ),
        ));
    }
    let rows = |cfg: &LoadedConfig, index: usize, start: Option<usize>| -> CliResult<_> {
        let plan = cfg.resolve()?;
        let (Some(p), Some(f)) = (&plan.chain, &plan.bijection) else {
            return Err(CliError::config(
                cfg.analysis_location(index),
                "mixing needs a chain and a bijection",
            ));
        };
        analysis::mixing_rows(p, f, *ka, start).map_err(|e| locate_failure(cfg, index, e))
    };
    let ra = rows(a, ia, *sa)?;
    let rb = rows(b, ib, *sb)?;
    Ok(analysis::compare(&ra, &rb, format))
}
