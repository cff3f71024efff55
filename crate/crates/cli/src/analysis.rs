//! Runs one analysis and renders its artifact.

use std::path::Path;

use jumpmix::chain::validate;
use jumpmix::expansion::{check_expansion, scan_random_bijections, ScanResult};
use jumpmix::fibonacci::{
    build_higher_order_chain, theorem_fibo_parameters, verify_he_proposition, FibonacciWalk,
    HigherOrderChainSpec, UpdateRule,
};
use jumpmix::mixing::{mixing_profile, tv_to_uniform, MixingRow, Starts};
use jumpmix::spectral::{
    build_r, lambda2, spectral_report, spectral_tv_bound, theorem1_bound, CheegerRequest,
};
use jumpmix::{ExpansionStrategy, Permutation, StateSet, TransitionMatrix};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{
    build_chain, read_json, Analysis, Builtin, CheegerMode, Format, HofSource, HofSpec, KernelRef,
    Plan,
};
use crate::error::{CliError, CliResult, Context};

/// One emitted file: `stem.ext` holding `bytes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub stem: &'static str,
    pub ext: &'static str,
    pub bytes: Vec<u8>,
}

/// An artifact plus a violation found while producing it. The artifact is
/// still written; the violation decides the exit status.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub artifact: Artifact,
    pub violation: Option<String>,
    /// Free-form line for stderr, e.g. a scan's good fraction.
    pub note: Option<String>,
}

impl Outcome {
    fn clean(artifact: Artifact) -> Self {
        Self {
            artifact,
            violation: None,
            note: None,
        }
    }
}

fn json_artifact(stem: &'static str, value: &impl Serialize) -> Artifact {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    bytes.push(b'\n');
    Artifact {
        stem,
        ext: "json",
        bytes,
    }
}

/// A table of optional numbers; `None` cells are empty in CSV and `null` in
/// JSON.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    trailer: Vec<String>,
}

#[derive(Clone)]
enum Cell {
    Int(u64),
    Num(Option<f64>),
    Bool(bool),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(Some(v)) => format!("{v:?}"),
            Cell::Num(None) => String::new(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) => json!(v),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl Table {
    fn render(self, stem: &'static str, format: Format, extra: Map<String, Value>) -> Artifact {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).expect("in-memory write");
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::text)).expect("in-memory write");
                }
                let mut bytes = w.into_inner().expect("in-memory flush");
                for line in &self.trailer {
                    bytes.extend_from_slice(format!("# {line}\n").as_bytes());
                }
                Artifact {
                    stem,
                    ext: "csv",
                    bytes,
                }
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .header
                            .iter()
                            .zip(row)
                            .map(|(h, c)| (h.to_string(), c.json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut doc = extra;
                doc.insert("rows".into(), Value::Array(rows));
                json_artifact(stem, &Value::Object(doc))
            }
        }
    }
}

pub fn mixing_rows(
    p: &TransitionMatrix,
    f: &Permutation,
    kmax: usize,
    single_start: Option<usize>,
) -> CliResult<Vec<MixingRow>> {
    let q = jumpmix::compose(f, p).context("mixing")?;
    let starts = single_start.map_or(Starts::All, Starts::Single);
    mixing_profile(&q, kmax, starts).context("mixing")
}

pub fn mixing(
    p: &TransitionMatrix,
    f: &Permutation,
    kmax: usize,
    epsilon: Option<f64>,
    single_start: Option<usize>,
    format: Format,
) -> CliResult<Outcome> {
    let rows = mixing_rows(p, f, kmax, single_start)?;
    let n = p.n();
    let l2 = lambda2(&build_r(p, f).context("mixing")?).context("mixing")?;
    let delta = p.min_positive_entry();

    let mut header = vec!["k", "worst_tv"];
    if epsilon.is_some() {
        header.push("bound_theorem1");
    }
    header.push("bound_spectral");
    let mut table_rows = Vec::with_capacity(rows.len());
    for row in &rows {
        let k = row.k as u64;
        let mut cells = vec![Cell::Int(k), Cell::Num(Some(row.worst_tv))];
        if let Some(eps) = epsilon {
            let b = if k >= 1 {
                Some(theorem1_bound(n, eps, delta, k).context("mixing")?)
            } else {
                None
            };
            cells.push(Cell::Num(b));
        }
        let s = if k >= 2 {
            Some(spectral_tv_bound(l2.value, n, k).context("mixing")?)
        } else {
            None
        };
        cells.push(Cell::Num(s));
        table_rows.push(cells);
    }
    let mut extra = Map::new();
    extra.insert("n".into(), json!(n));
    extra.insert("lambda2".into(), json!(l2.value));
    extra.insert("epsilon".into(), json!(epsilon));
    let table = Table {
        header,
        rows: table_rows,
        trailer: Vec::new(),
    };
    Ok(Outcome::clean(table.render("mixing", format, extra)))
}

pub fn spectral(
    p: &TransitionMatrix,
    f: &Permutation,
    cheeger: CheegerMode,
    epsilon: Option<f64>,
) -> CliResult<Outcome> {
    let request = match cheeger {
        CheegerMode::Skip => CheegerRequest::Skip,
        CheegerMode::Exhaustive => CheegerRequest::Exhaustive,
        CheegerMode::Sampled(s) => CheegerRequest::Sampled {
            samples: s.samples,
            seed: s.seed,
        },
    };
    let report = spectral_report(p, f, request, epsilon).context("spectral")?;
    Ok(Outcome::clean(json_artifact("spectral", &report)))
}

pub fn expansion(
    p: &TransitionMatrix,
    f: &Permutation,
    strategy: &ExpansionStrategy,
    epsilon: Option<f64>,
) -> CliResult<Outcome> {
    let report = check_expansion(p, f, strategy).context("expansion")?;
    let mut value = serde_json::to_value(&report).expect("reports serialize");
    if let (Some(eps), Value::Object(obj)) = (epsilon, &mut value) {
        obj.insert("epsilon".into(), json!(eps));
        obj.insert("holds".into(), json!(report.holds(eps)));
    }
    Ok(Outcome::clean(json_artifact("expansion", &value)))
}

pub fn expansion_strategy(
    n: usize,
    sampled: Option<crate::config::Sampling>,
    include: &[Vec<usize>],
) -> ExpansionStrategy {
    match sampled {
        None => ExpansionStrategy::Exhaustive,
        Some(s) => ExpansionStrategy::Sampled {
            samples: s.samples,
            seed: s.seed,
            include: include
                .iter()
                .map(|set| StateSet::from_indices(n, set.iter().copied()))
                .collect(),
        },
    }
}

pub fn scan(
    p: &TransitionMatrix,
    epsilon: f64,
    trials: usize,
    seed: u64,
    format: Format,
) -> CliResult<Outcome> {
    let result = scan_random_bijections(p, epsilon, trials, seed).context("scan")?;
    Ok(scan_outcome(&result, format))
}

fn scan_outcome(result: &ScanResult, format: Format) -> Outcome {
    let rows = result
        .trials
        .iter()
        .map(|t| {
            vec![
                Cell::Int(t.seed),
                Cell::Num(Some(t.epsilon_star)),
                Cell::Bool(t.good),
            ]
        })
        .collect();
    let fraction = result.fraction_good();
    let mut extra = Map::new();
    extra.insert("epsilon".into(), json!(result.epsilon));
    extra.insert("trials".into(), json!(result.trials.len()));
    extra.insert("fraction_good".into(), json!(fraction));
    extra.insert("failures".into(), json!(result.failures()));
    let table = Table {
        header: vec!["seed", "epsilon_star", "good"],
        rows,
        trailer: Vec::new(),
    };
    let note = match fraction {
        Some(x) => format!(
            "fraction_good={x} ({} of {} trials)",
            result.trials.len() - result.failures().len(),
            result.trials.len()
        ),
        None => "fraction_good=undefined (no trials)".to_string(),
    };
    Outcome {
        artifact: table.render("scan", format, extra),
        violation: None,
        note: Some(note),
    }
}

pub fn fibonacci(n: usize, kmax: usize, c: Option<f64>, format: Format) -> CliResult<Outcome> {
    let params = match c {
        Some(c) => Some(theorem_fibo_parameters(n, c).context("fibonacci")?),
        None if n >= 22 => Some(theorem_fibo_parameters(n, 0.0).context("fibonacci")?),
        None => None,
    };
    let mut walk = FibonacciWalk::new(n).context("fibonacci")?;
    let horizon = kmax.max(params.map_or(0, |p| p.k));
    let mut rows = Vec::with_capacity(kmax);
    let mut tv_at_theorem_k = None;
    for k in 1..=horizon {
        let tv = tv_to_uniform(walk.marginal().probs());
        if k <= kmax {
            rows.push(vec![
                Cell::Int(k as u64),
                Cell::Num(Some(tv)),
                Cell::Num(Some(jumpmix::fibonacci::fourier_tv_bound(n, k))),
            ]);
        }
        if params.is_some_and(|p| p.k == k) {
            tv_at_theorem_k = Some(tv);
        }
        if k < horizon {
            walk.advance();
        }
    }

    let mut extra = Map::new();
    extra.insert("n".into(), json!(n));
    let mut trailer = Vec::new();
    let mut violation = None;
    match (params, tv_at_theorem_k) {
        (Some(p), Some(tv)) => {
            trailer.push(format!(
                "summary: c={:?} k={} bound={:?} tv_at_k={tv:?}",
                p.c, p.k, p.bound
            ));
            extra.insert(
                "summary".into(),
                json!({"c": p.c, "k": p.k, "bound": p.bound, "tv_at_k": tv}),
            );
            if tv > p.bound {
                violation = Some(format!(
                    "fibonacci n={n}: TV {tv} at k={} exceeds {}",
                    p.k, p.bound
                ));
            }
        }
        _ => {
            trailer.push("summary: theorem parameters need n >= 22 and k >= 1".to_string());
            extra.insert("summary".into(), Value::Null);
        }
    }
    let table = Table {
        header: vec!["k", "tv_exact", "tv_fourier_bound"],
        rows,
        trailer,
    };
    Ok(Outcome {
        artifact: table.render("fibonacci", format, extra),
        violation,
        note: None,
    })
}

pub fn load_hof_source(source: &HofSource) -> CliResult<HofSpec> {
    match source {
        HofSource::Inline(spec) => Ok(spec.clone()),
        HofSource::Path(path) => load_hof_file(path),
    }
}

pub fn load_hof_file(path: &Path) -> CliResult<HofSpec> {
    let (spec, _): (HofSpec, String) = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    Ok(spec.resolved(base))
}

pub fn hof(spec: &HofSpec) -> CliResult<Outcome> {
    let kernel_spec = match &spec.base_kernel {
        KernelRef::Path(p) => crate::config::ChainSpec::File { path: p.clone() },
        KernelRef::Chain(c) => c.clone(),
    };
    let kernel = build_chain(&kernel_spec).map_err(|e| e.for_flag("hof base_kernel"))?;
    let (update, label) = match (&spec.builtin, &spec.table) {
        (Some(Builtin::Additive), None) => (UpdateRule::Additive, "additive"),
        (Some(Builtin::CubePlusRest), None) => (UpdateRule::CubePlusRest, "cube_plus_rest"),
        (None, Some(t)) => (UpdateRule::Table(t.clone()), "table"),
        _ => {
            return Err(CliError::config(
                "hof",
                "exactly one of `builtin` and `table` is required",
            ))
        }
    };
    let hspec = HigherOrderChainSpec::new(spec.base_n, spec.order, update, kernel).context("hof")?;
    let pf = build_higher_order_chain(&hspec).context("hof")?;
    let report = validate(&pf);
    let he = verify_he_proposition(&hspec).context("hof")?;
    let violation = (!(he.ergodic && he.uniform_stationary))
        .then(|| format!("higher-order chain is not ergodic with uniform law: {he:?}"));
    let value = json!({
        "base_n": spec.base_n,
        "order": spec.order,
        "update": label,
        "states": pf.n(),
        "validation": report,
        "verification": he,
    });
    Ok(Outcome {
        artifact: json_artifact("hof", &value),
        violation,
        note: None,
    })
}

/// `validate` report; failing assumptions become a violation.
pub fn validation(p: &TransitionMatrix) -> Outcome {
    let report = validate(p);
    let violation = (!report.all_passed()).then(|| {
        format!("assumptions fail: {}", report.failures().join("; "))
    });
    let value = json!({
        "n": p.n(),
        "all_passed": report.all_passed(),
        "delta": p.min_positive_entry(),
        "report": report,
    });
    Outcome {
        artifact: json_artifact("validate", &value),
        violation,
        note: None,
    }
}

/// Side-by-side worst-start TV for two profiles of equal length.
pub fn compare(a: &[MixingRow], b: &[MixingRow], format: Format) -> Outcome {
    let rows = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            vec![
                Cell::Int(x.k as u64),
                Cell::Num(Some(x.worst_tv)),
                Cell::Num(Some(y.worst_tv)),
            ]
        })
        .collect();
    let table = Table {
        header: vec!["k", "worst_tv_A", "worst_tv_B"],
        rows,
        trailer: Vec::new(),
    };
    Outcome::clean(table.render("compare", format, Map::new()))
}

/// Runs analysis `i` of a resolved plan.
pub fn run_one(plan: &Plan, analysis: &Analysis) -> CliResult<Outcome> {
    let need = |what: &str| CliError::config("config", format!("missing {what}"));
    let chain = || plan.chain.as_ref().ok_or_else(|| need("chain"));
    let bij = || plan.bijection.as_ref().ok_or_else(|| need("bijection"));
    match analysis {
        Analysis::Mixing {
            kmax,
            epsilon,
            single_start,
        } => mixing(chain()?, bij()?, *kmax, *epsilon, *single_start, plan.format),
        Analysis::Spectral { cheeger, epsilon } => spectral(chain()?, bij()?, *cheeger, *epsilon),
        Analysis::Expansion {
            sampled,
            include,
            epsilon,
        } => {
            let p = chain()?;
            let strategy = expansion_strategy(p.n(), *sampled, include);
            expansion(p, bij()?, &strategy, *epsilon)
        }
        Analysis::Scan {
            epsilon,
            trials,
            seed,
        } => scan(chain()?, *epsilon, *trials, *seed, plan.format),
        Analysis::Fibonacci { n, kmax, c } => fibonacci(*n, *kmax, *c, plan.format),
        Analysis::Hof { spec } => hof(&load_hof_source(spec)?),
    }
}
