//! Transition matrices, bijections and distributions on `{0, .., n-1}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph;
use crate::rng::SeededRng;

/// Largest state count accepted for dense matrix operations.
pub const MAX_STATES: usize = 4096;

/// Tolerance on row and column sums.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Tolerance on the total mass of a [`Distribution`].
pub const DISTRIBUTION_TOL: f64 = 1e-12;

pub(crate) fn check_capacity(what: &'static str, n: usize) -> Result<()> {
    if n > MAX_STATES {
        return Err(Error::Capacity {
            what,
            size: n,
            cap: MAX_STATES,
        });
    }
    Ok(())
}

/// Dense row-stochastic matrix, stored row-major.
///
/// Construction only guarantees that the matrix is square with rows summing
/// to one. The standing assumptions (irreducibility, symmetric support,
/// positive diagonal, uniform stationarity) are checked by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Structural(format!(
                "matrix is not square: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        Self::from_flat(n, rows.into_iter().flatten().collect())
    }

    pub fn from_flat(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structural("empty state space".into()));
        }
        check_capacity("dense matrix states", n)?;
        if entries.len() != n * n {
            return Err(Error::Structural(format!(
                "expected {} entries for a {n}x{n} matrix, found {}",
                n * n,
                entries.len()
            )));
        }
        for (idx, &p) in entries.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0 + STOCHASTIC_TOL).contains(&p) {
                return Err(Error::Structural(format!(
                    "entry ({}, {}) = {p} is not a probability",
                    idx / n,
                    idx % n
                )));
            }
        }
        for i in 0..n {
            let s: f64 = entries[i * n..(i + 1) * n].iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::Structural(format!("row {i} sums to {s}, not 1")));
            }
        }
        Ok(Self { n, entries })
    }

    /// Skips the stochasticity checks; callers guarantee them by construction.
    pub(crate) fn from_flat_trusted(n: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.n)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for row in self.rows() {
            for (s, &p) in sums.iter_mut().zip(row) {
                *s += p;
            }
        }
        sums
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.column_sums()
            .iter()
            .all(|s| (s - 1.0).abs() <= STOCHASTIC_TOL)
    }

    /// Largest `|m_ij - m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn transpose(&self) -> Vec<f64> {
        let n = self.n;
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[j * n + i] = self.get(i, j);
            }
        }
        t
    }

    /// Minimum strictly positive entry.
    pub fn min_positive_entry(&self) -> Delta {
        let value = self
            .entries
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min);
        Delta(value.min(1.0))
    }

    /// Per-row lists of `(column, probability)` for nonzero entries.
    pub fn sparse_rows(&self) -> Vec<Vec<(usize, f64)>> {
        self.rows()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(j, &p)| (j, p))
                    .collect()
            })
            .collect()
    }

    pub(crate) fn support(&self) -> Vec<Vec<usize>> {
        graph::support_lists(self.n, &self.entries)
    }
}

/// Row-major dense product of two `n x n` matrices.
pub(crate) fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let out_row = &mut out[i * n..(i + 1) * n];
        for (l, &a_il) in a[i * n..(i + 1) * n].iter().enumerate() {
            if a_il == 0.0 {
                continue;
            }
            for (o, &b_lj) in out_row.iter_mut().zip(&b[l * n..(l + 1) * n]) {
                *o += a_il * b_lj;
            }
        }
    }
    out
}

/// Smallest positive transition probability of a kernel.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Delta(pub f64);

impl Delta {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Equivalent to [`TransitionMatrix::min_positive_entry`].
pub fn min_positive_entry(p: &TransitionMatrix) -> Delta {
    p.min_positive_entry()
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    State(usize),
    Pair(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub passed: bool,
    /// First violating state or index pair.
    pub witness: Option<Witness>,
}

impl AssumptionCheck {
    fn pass() -> Self {
        Self {
            passed: true,
            witness: None,
        }
    }

    fn fail(witness: Witness) -> Self {
        Self {
            passed: false,
            witness: Some(witness),
        }
    }
}

/// Outcome of checking the four standing assumptions on a kernel.
///
/// Irreducibility is checked as strong connectivity of the support graph;
/// together with a positive diagonal it gives aperiodicity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub irreducible: AssumptionCheck,
    pub symmetric_support: AssumptionCheck,
    pub positive_diagonal: AssumptionCheck,
    pub doubly_stochastic: AssumptionCheck,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.passed)
    }

    pub fn checks(&self) -> [(&'static str, &AssumptionCheck); 4] {
        [
            ("irreducible", &self.irreducible),
            ("symmetric_support", &self.symmetric_support),
            ("positive_diagonal", &self.positive_diagonal),
            ("doubly_stochastic", &self.doubly_stochastic),
        ]
    }

    /// Human-readable list of failed assumptions, empty when all pass.
    pub fn failures(&self) -> Vec<String> {
        self.checks()
            .iter()
            .filter(|(_, c)| !c.passed)
            .map(|(name, c)| match c.witness {
                Some(Witness::State(i)) => format!("{name} fails at {i}"),
                Some(Witness::Pair(i, j)) => format!("{name} fails at ({i}, {j})"),
                None => format!("{name} fails"),
            })
            .collect()
    }
}

pub fn validate(p: &TransitionMatrix) -> ValidationReport {
    let n = p.n();

    let support = p.support();
    let irreducible = match graph::first_unreached(&support) {
        Some(j) => AssumptionCheck::fail(Witness::Pair(0, j)),
        None => match graph::first_unreached(&graph::reverse(&support)) {
            Some(i) => AssumptionCheck::fail(Witness::Pair(i, 0)),
            None => AssumptionCheck::pass(),
        },
    };

    let symmetric_support = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| (p.get(i, j) > 0.0) != (p.get(j, i) > 0.0))
        .map_or_else(AssumptionCheck::pass, |(i, j)| {
            AssumptionCheck::fail(Witness::Pair(i, j))
        });

    let positive_diagonal = (0..n)
        .find(|&i| p.get(i, i) <= 0.0)
        .map_or_else(AssumptionCheck::pass, |i| {
            AssumptionCheck::fail(Witness::State(i))
        });

    let doubly_stochastic = p
        .column_sums()
        .iter()
        .position(|s| (s - 1.0).abs() > STOCHASTIC_TOL)
        .map_or_else(AssumptionCheck::pass, |j| {
            AssumptionCheck::fail(Witness::State(j))
        });

    ValidationReport {
        n,
        irreducible,
        symmetric_support,
        positive_diagonal,
        doubly_stochastic,
    }
}

// ---------------------------------------------------------------------------
// Builders

/// Lazy simple walk on `Z_n`: stay, step left or step right, each with
/// probability 1/3.
pub fn lazy_cycle_walk(n: usize) -> Result<TransitionMatrix> {
    if n < 3 {
        return Err(Error::InvalidSize(format!(
            "lazy cycle walk needs n >= 3, got {n}"
        )));
    }
    check_capacity("dense matrix states", n)?;
    let third = 1.0 / 3.0;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = third;
        entries[i * n + (i + 1) % n] = third;
        entries[i * n + (i + n - 1) % n] = third;
    }
    Ok(TransitionMatrix::from_flat_trusted(n, entries))
}

/// Lazy walk on the hypercube `Z_2^d`: stay, or flip one of the `d`
/// coordinates, each with probability `1/(d+1)`.
///
/// State `x` is the integer whose bit `i` is coordinate `i`.
pub fn hypercube_walk(d: u32) -> Result<TransitionMatrix> {
    if d == 0 {
        return Err(Error::InvalidSize("hypercube dimension must be >= 1".into()));
    }
    let n = 1usize
        .checked_shl(d)
        .filter(|&n| n <= MAX_STATES)
        .ok_or(Error::Capacity {
            what: "hypercube states",
            size: if d < usize::BITS { 1usize << d } else { usize::MAX },
            cap: MAX_STATES,
        })?;
    let w = 1.0 / (d as f64 + 1.0);
    let mut entries = vec![0.0; n * n];
    for x in 0..n {
        entries[x * n + x] = w;
        for bit in 0..d {
            entries[x * n + (x ^ (1 << bit))] = w;
        }
    }
    Ok(TransitionMatrix::from_flat_trusted(n, entries))
}

/// `Q = ΠP`: apply `f`, then take one `P` step, so `Q[i][j] = P[f(i)][j]`.
pub fn compose(f: &Permutation, p: &TransitionMatrix) -> Result<TransitionMatrix> {
    let n = p.n();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.len(),
        });
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        entries.extend_from_slice(p.row(f.apply(i)));
    }
    Ok(TransitionMatrix::from_flat_trusted(n, entries))
}

// ---------------------------------------------------------------------------
// Permutations

/// A bijection of `{0, .., n-1}` together with its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

/// Named bijection families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PermutationKind {
    Identity,
    /// `i ↦ 2i mod n`
    Doubling,
    /// `i ↦ a·i mod n`
    Affine(u64),
    /// `i ↦ i³ mod p`
    Cubing,
    /// `0 ↦ 0`, `i ↦ i⁻¹ mod p`
    Inversion,
    /// Uniform over all `n!` bijections, Fisher–Yates from the given seed.
    Random(u64),
    Explicit(Vec<usize>),
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (i, &fi) in forward.iter().enumerate() {
            if fi >= n {
                return Err(Error::NotABijection(format!(
                    "image {fi} of {i} is outside 0..{n}"
                )));
            }
            if inverse[fi] != usize::MAX {
                return Err(Error::NotABijection(format!(
                    "{} and {i} both map to {fi}",
                    inverse[fi]
                )));
            }
            inverse[fi] = i;
        }
        Ok(Self { forward, inverse })
    }

    pub fn identity(n: usize) -> Self {
        let forward: Vec<usize> = (0..n).collect();
        Self {
            inverse: forward.clone(),
            forward,
        }
    }

    pub fn build(kind: &PermutationKind, n: usize) -> Result<Self> {
        match kind {
            PermutationKind::Identity => Ok(Self::identity(n)),
            PermutationKind::Doubling => Self::affine(2, n),
            PermutationKind::Affine(a) => Self::affine(*a, n),
            PermutationKind::Cubing => Self::cubing(n),
            PermutationKind::Inversion => Self::inversion(n),
            PermutationKind::Random(seed) => Ok(Self::random(n, *seed)),
            PermutationKind::Explicit(forward) => {
                if forward.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: forward.len(),
                    });
                }
                Self::new(forward.clone())
            }
        }
    }

    pub fn doubling(n: usize) -> Result<Self> {
        Self::affine(2, n)
    }

    pub fn affine(a: u64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("empty state space".into()));
        }
        let m = n as u64;
        if graph::gcd((a % m) as usize, n) != 1 {
            return Err(Error::NotABijection(format!(
                "i -> {a}i mod {n} requires gcd({a}, {n}) = 1"
            )));
        }
        Self::new((0..m).map(|i| ((a % m) * i % m) as usize).collect())
    }

    pub fn cubing(n: usize) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::NotABijection(format!(
                "cubing requires a prime modulus, {n} is not prime"
            )));
        }
        if graph::gcd(3, n - 1) != 1 {
            return Err(Error::NotABijection(format!(
                "cubing mod {n} requires gcd(3, {}) = 1",
                n - 1
            )));
        }
        let m = n as u64;
        Self::new((0..m).map(|i| (i * i % m * i % m) as usize).collect())
    }

    pub fn inversion(n: usize) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::NotABijection(format!(
                "inversion requires a prime modulus, {n} is not prime"
            )));
        }
        let m = n as u64;
        // Fermat: i^(p-2) is the inverse of i mod p
        Self::new(
            (0..m)
                .map(|i| if i == 0 { 0 } else { pow_mod(i, m - 2, m) as usize })
                .collect(),
        )
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut forward: Vec<usize> = (0..n).collect();
        SeededRng::new(seed).shuffle(&mut forward);
        Self::new(forward).expect("a shuffle of 0..n is a bijection")
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.forward[i]
    }

    #[inline]
    pub fn apply_inverse(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn inverted(&self) -> Self {
        Self {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Distributions

/// Probability vector over the state space.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty distribution".into()));
        }
        if let Some(i) = probs.iter().position(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParameter(format!(
                "probability {} at index {i} is outside [0, 1]",
                probs[i]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_vec_trusted(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}
