//! One-step expansion and the `|E∘f∘E(A)| ≥ (1+ε)|A|` condition.
//!
//! `E(A)` is the set of states reachable in one `P` step from `A`. With a
//! positive diagonal it contains `A`. The exhaustive checks enumerate every
//! subset of a small state space as a `u64` mask and evaluate `E` and `f`
//! through per-byte lookup tables, so each subset costs a handful of table
//! reads regardless of the kernel.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{compose, lazy_cycle_walk, Permutation, TransitionMatrix};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::stateset::StateSet;

/// Largest state space checked exhaustively (every subset of size `<= n/2`).
pub const EXHAUSTIVE_MAX_STATES: usize = 24;

/// Largest state space for which all `2^n` sets are enumerated when counting
/// sets with a given boundary.
pub const BOUNDARY_COUNT_MAX_STATES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Exhaustive,
    Sampled,
}

/// Support graph of a kernel: `out[i] = {j : p_ij > 0}`.
#[derive(Clone, Debug)]
pub struct SupportGraph {
    out: Vec<StateSet>,
    inc: Vec<StateSet>,
}

impl SupportGraph {
    pub fn new(p: &TransitionMatrix) -> Self {
        let n = p.n();
        let mut out = vec![StateSet::empty(n); n];
        let mut inc = vec![StateSet::empty(n); n];
        for i in 0..n {
            for j in 0..n {
                if p.get(i, j) > 0.0 {
                    out[i].insert(j);
                    inc[j].insert(i);
                }
            }
        }
        Self { out, inc }
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    /// `E(A) = {j : p_ij > 0 for some i ∈ A}`.
    pub fn expand(&self, a: &StateSet) -> StateSet {
        union_of(self.n(), a.iter().map(|i| &self.out[i]))
    }

    /// `{j : p_ji > 0 for some i ∈ A}`; equals [`SupportGraph::expand`] when
    /// the support is symmetric.
    pub fn expand_by_columns(&self, a: &StateSet) -> StateSet {
        union_of(self.n(), a.iter().map(|i| &self.inc[i]))
    }

    /// `E(f(E(A)))`.
    pub fn expand_map_expand(&self, f: &Permutation, a: &StateSet) -> StateSet {
        self.expand(&self.expand(a).map(f))
    }

    fn out_mask(&self, i: usize) -> u64 {
        self.out[i].to_mask().expect("mask tables need n <= 64")
    }
}

fn union_of<'a>(n: usize, sets: impl Iterator<Item = &'a StateSet>) -> StateSet {
    sets.fold(StateSet::empty(n), |acc, s| acc.union(s))
}

fn check_universe(p: &TransitionMatrix, a: &StateSet) -> Result<()> {
    if a.universe() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            found: a.universe(),
        });
    }
    Ok(())
}

pub fn expand(p: &TransitionMatrix, a: &StateSet) -> Result<StateSet> {
    check_universe(p, a)?;
    Ok(SupportGraph::new(p).expand(a))
}

/// `∂A = E(A) ∖ A`.
pub fn external_boundary(p: &TransitionMatrix, a: &StateSet) -> Result<StateSet> {
    Ok(expand(p, a)?.difference(a))
}

/// Maximum number of neighbours `j != i` with `p_ij > 0`.
///
/// Every positive entry is at least δ and a row sums to one, so a row has at
/// most `1/δ` positive entries; a violation is reported as an invariant error.
pub fn max_degree(p: &TransitionMatrix) -> Result<usize> {
    let delta = p.min_positive_entry().value();
    let mut worst = 0;
    for (i, row) in p.rows().enumerate() {
        let positive = row.iter().filter(|&&x| x > 0.0).count();
        if positive as f64 > 1.0 / delta + 1e-9 {
            return Err(Error::Invariant(format!(
                "row {i} has {positive} positive entries, more than 1/delta = {}",
                1.0 / delta
            )));
        }
        let degree = positive - usize::from(row[i] > 0.0);
        worst = worst.max(degree);
    }
    Ok(worst)
}

/// Lookup tables evaluating a union-of-images map `mask ↦ ⋃_{i ∈ mask} g(i)`
/// one byte at a time.
struct MaskTables {
    tables: Vec<[u64; 256]>,
}

impl MaskTables {
    fn new(n: usize, image: impl Fn(usize) -> u64) -> Self {
        let tables = (0..n.div_ceil(8))
            .map(|b| {
                let mut t = [0u64; 256];
                for v in 1..256usize {
                    let i = 8 * b + v.trailing_zeros() as usize;
                    t[v] = t[v & (v - 1)] | if i < n { image(i) } else { 0 };
                }
                t
            })
            .collect();
        Self { tables }
    }

    #[inline]
    fn apply(&self, mask: u64) -> u64 {
        self.tables
            .iter()
            .enumerate()
            .fold(0, |acc, (b, t)| acc | t[(mask >> (8 * b)) as usize & 0xff])
    }
}

/// Worst set found so far: the ratio `image / size` is compared exactly by
/// cross-multiplication, ties go to the smaller mask.
#[derive(Clone, Copy, Debug)]
struct MaskCandidate {
    image: u64,
    size: u64,
    mask: u64,
}

impl MaskCandidate {
    fn beats(&self, other: &Self) -> bool {
        let lhs = self.image * other.size;
        let rhs = other.image * self.size;
        lhs < rhs || (lhs == rhs && self.mask < other.mask)
    }
}

fn min_candidate(a: Option<MaskCandidate>, b: Option<MaskCandidate>) -> Option<MaskCandidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.beats(&x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Enumerates every nonempty mask with `2·|A| <= n` in parallel chunks and
/// min-reduces `score`. Returns the winner and the number of masks scored.
fn enumerate_small_sets(
    n: usize,
    score: impl Fn(u64) -> u64 + Sync,
) -> (Option<MaskCandidate>, u64) {
    let chunk_bits = n.min(14);
    let chunks = 1u64 << (n - chunk_bits);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut best = None;
            let mut count = 0u64;
            for low in 0..1u64 << chunk_bits {
                let mask = c << chunk_bits | low;
                let size = u64::from(mask.count_ones());
                if size == 0 || 2 * size > n as u64 {
                    continue;
                }
                count += 1;
                let cand = MaskCandidate {
                    image: score(mask),
                    size,
                    mask,
                };
                best = min_candidate(best, Some(cand));
            }
            (best, count)
        })
        .reduce(
            || (None, 0),
            |(a, ca), (b, cb)| (min_candidate(a, b), ca + cb),
        )
}

/// Result of checking the expansion condition over a family of sets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    /// `min |E∘f∘E(A)| / |A| - 1` over the checked sets; the condition holds
    /// for exactly those `ε <= epsilon_star`.
    pub epsilon_star: f64,
    pub witness: StateSet,
    pub witness_size: usize,
    pub witness_image_size: usize,
    pub mode: CheckMode,
    pub sets_checked: u64,
}

impl ExpansionReport {
    /// Whether `|E∘f∘E(A)| ≥ (1+ε)|A|` holds on every checked set.
    pub fn holds(&self, epsilon: f64) -> bool {
        self.witness_image_size as f64 >= (1.0 + epsilon) * self.witness_size as f64
    }
}

#[derive(Clone, Debug)]
pub enum ExpansionStrategy {
    /// Every `A` with `1 <= |A| <= n/2`; requires `n <= 24`.
    Exhaustive,
    /// `samples` random sets drawn uniformly within each size stratum
    /// `1..=n/2` (round robin over sizes), plus every set in `include`.
    /// Only finds upper bounds on the true `epsilon_star`.
    Sampled {
        samples: usize,
        seed: u64,
        include: Vec<StateSet>,
    },
}

pub fn check_expansion(
    p: &TransitionMatrix,
    f: &Permutation,
    strategy: &ExpansionStrategy,
) -> Result<ExpansionReport> {
    let n = p.n();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.len(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidSize(
            "expansion needs n >= 2 so that some set has |A| <= n/2".into(),
        ));
    }
    let graph = SupportGraph::new(p);
    match strategy {
        ExpansionStrategy::Exhaustive => {
            if n > EXHAUSTIVE_MAX_STATES {
                return Err(Error::Capacity {
                    what: "exhaustive expansion check states",
                    size: n,
                    cap: EXHAUSTIVE_MAX_STATES,
                });
            }
            Ok(exhaustive_expansion(&graph, f))
        }
        ExpansionStrategy::Sampled {
            samples,
            seed,
            include,
        } => sampled_expansion(&graph, f, *samples, *seed, include),
    }
}

fn exhaustive_expansion(graph: &SupportGraph, f: &Permutation) -> ExpansionReport {
    let n = graph.n();
    let e = MaskTables::new(n, |i| graph.out_mask(i));
    let fm = MaskTables::new(n, |i| 1u64 << f.apply(i));
    let (best, count) = enumerate_small_sets(n, |mask| {
        u64::from(e.apply(fm.apply(e.apply(mask))).count_ones())
    });
    let best = best.expect("n >= 2 leaves at least one singleton");
    ExpansionReport {
        epsilon_star: best.image as f64 / best.size as f64 - 1.0,
        witness: StateSet::from_mask(n, best.mask),
        witness_size: best.size as usize,
        witness_image_size: best.image as usize,
        mode: CheckMode::Exhaustive,
        sets_checked: count,
    }
}

fn sampled_expansion(
    graph: &SupportGraph,
    f: &Permutation,
    samples: usize,
    seed: u64,
    include: &[StateSet],
) -> Result<ExpansionReport> {
    let n = graph.n();
    for a in include {
        if a.universe() != n || a.is_empty() || 2 * a.len() > n {
            return Err(Error::InvalidParameter(format!(
                "included set {a:?} must be a nonempty subset of 0..{n} with |A| <= n/2"
            )));
        }
    }
    if samples == 0 && include.is_empty() {
        return Err(Error::InvalidParameter(
            "sampled mode needs at least one sample or included set".into(),
        ));
    }

    let mut best: Option<(usize, usize, StateSet)> = None;
    let mut consider = |a: StateSet| {
        let image = graph.expand_map_expand(f, &a).len();
        let size = a.len();
        let better = match &best {
            None => true,
            Some((bi, bs, bset)) => {
                let (lhs, rhs) = (image * bs, bi * size);
                lhs < rhs || (lhs == rhs && a < *bset)
            }
        };
        if better {
            best = Some((image, size, a));
        }
    };

    for a in include {
        consider(a.clone());
    }
    let strata = n / 2;
    let mut rng = SeededRng::new(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for s in 0..samples {
        let size = 1 + s % strata;
        // partial Fisher–Yates: the first `size` slots become a uniform subset
        for t in 0..size {
            let j = t + rng.below((n - t) as u64) as usize;
            pool.swap(t, j);
        }
        consider(StateSet::from_indices(n, pool[..size].iter().copied()));
    }

    let (image, size, witness) = best.expect("at least one set was checked");
    Ok(ExpansionReport {
        epsilon_star: image as f64 / size as f64 - 1.0,
        witness,
        witness_size: size,
        witness_image_size: image,
        mode: CheckMode::Sampled,
        sets_checked: (include.len() + samples) as u64,
    })
}

/// Number of sets `B ⊆ S` whose external boundary is exactly `A`.
pub fn count_sets_with_boundary(p: &TransitionMatrix, a: &StateSet) -> Result<u64> {
    check_universe(p, a)?;
    let n = p.n();
    if n > BOUNDARY_COUNT_MAX_STATES {
        return Err(Error::Capacity {
            what: "boundary counting states",
            size: n,
            cap: BOUNDARY_COUNT_MAX_STATES,
        });
    }
    let graph = SupportGraph::new(p);
    let e = MaskTables::new(n, |i| graph.out_mask(i));
    let target = a.to_mask().expect("n <= 16");
    Ok((0..1u64 << n)
        .into_par_iter()
        .filter(|&b| e.apply(b) & !b == target)
        .count() as u64)
}

/// The explicit set showing that the doubling map is not an expander for the
/// lazy cycle walk on `Z_n` with `n = 4m - 1`.
#[derive(Clone, Debug, Serialize)]
pub struct DoublingCounterexample {
    pub m: usize,
    pub n: usize,
    /// `{1, .., m-1} ∪ {2m+1, .., 3m-1}`
    pub a: StateSet,
    pub expanded: StateSet,
    pub mapped: StateSet,
    pub image: StateSet,
    pub size_a: usize,
    pub size_image: usize,
    /// `6 / (2m - 2)`: no `ε` above this can satisfy the condition.
    pub epsilon_cap: f64,
}

pub fn doubling_counterexample(m: usize) -> Result<DoublingCounterexample> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("m must be >= 2, got {m}")));
    }
    let n = 4 * m - 1;
    let p = lazy_cycle_walk(n)?;
    let f = Permutation::doubling(n)?;
    let graph = SupportGraph::new(&p);

    let a = StateSet::from_indices(n, (1..m).chain(2 * m + 1..3 * m));
    let expanded = graph.expand(&a);
    let mapped = expanded.map(&f);
    let image = graph.expand(&mapped);

    // E_Q(B) = E(f(B)) for Q = ΠP, so E∘f∘E(A) is also one Q-step from E(A)
    let q = compose(&f, &p)?;
    let via_q = SupportGraph::new(&q).expand(&expanded);
    if via_q != image {
        return Err(Error::Invariant(format!(
            "E(f(E(A))) = {image:?} disagrees with the Q-step image {via_q:?}"
        )));
    }

    Ok(DoublingCounterexample {
        m,
        n,
        size_a: a.len(),
        size_image: image.len(),
        epsilon_cap: 6.0 / (2 * m - 2) as f64,
        a,
        expanded,
        mapped,
        image,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanTrial {
    pub seed: u64,
    pub epsilon_star: f64,
    pub good: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub epsilon: f64,
    pub trials: Vec<ScanTrial>,
}

impl ScanResult {
    /// Fraction of trials satisfying the condition; `None` when there were
    /// no trials.
    pub fn fraction_good(&self) -> Option<f64> {
        if self.trials.is_empty() {
            return None;
        }
        let good = self.trials.iter().filter(|t| t.good).count();
        Some(good as f64 / self.trials.len() as f64)
    }

    /// Seeds of the bijections that failed, for replay.
    pub fn failures(&self) -> Vec<u64> {
        self.trials
            .iter()
            .filter(|t| !t.good)
            .map(|t| t.seed)
            .collect()
    }
}

/// Checks `trials` random bijections exhaustively. Trial `t` uses
/// `Permutation::random(n, seed + t)`.
pub fn scan_random_bijections(
    p: &TransitionMatrix,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<ScanResult> {
    let n = p.n();
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be a nonnegative number, got {epsilon}"
        )));
    }
    if n > EXHAUSTIVE_MAX_STATES {
        return Err(Error::Capacity {
            what: "exhaustive expansion check states",
            size: n,
            cap: EXHAUSTIVE_MAX_STATES,
        });
    }
    let trials = (0..trials as u64)
        .map(|t| {
            let trial_seed = seed.wrapping_add(t);
            let f = Permutation::random(n, trial_seed);
            let report = check_expansion(p, &f, &ExpansionStrategy::Exhaustive)?;
            Ok(ScanTrial {
                seed: trial_seed,
                epsilon_star: report.epsilon_star,
                good: report.holds(epsilon),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult { epsilon, trials })
}
