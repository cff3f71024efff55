//! The symmetrized kernel `R = L²(Lᵀ)²`, `L = PΠ`, and the bounds it yields.
//!
//! For a row vector `x` with zero sum, `‖x Qᵏ‖₂ ≤ λ₂^{(k-2)/4} ‖x‖₂` where `λ₂`
//! is the second largest eigenvalue of `R`. Starting from a point mass this
//! gives `TV ≤ (√n/2) λ₂^{(k-2)/4}`. The Cheeger constant `Φ` of `R` satisfies
//! `λ₂ ≤ 1 - Φ²/2`, and the expansion condition with constant `ε` forces
//! `Φ ≥ εδ⁴`, which chains into the closed-form bound of [`theorem1_bound`].

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{matmul, Delta, Permutation, TransitionMatrix};
use crate::error::{Error, Result};
use crate::expansion::CheckMode;
use crate::rng::SeededRng;
use crate::stateset::StateSet;

/// Largest state space for the exhaustive Cheeger enumeration.
pub const CHEEGER_MAX_STATES: usize = 24;

/// Symmetry tolerance accepted by [`lambda2`].
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Residual tolerance `‖Rv - λv‖₂` on the two leading eigenpairs.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// `L = PΠ`, i.e. `L[i][j] = P[i][f⁻¹(j)]`: take a `P` step, then apply `f`.
pub fn build_l(p: &TransitionMatrix, f: &Permutation) -> Result<TransitionMatrix> {
    let n = p.n();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.len(),
        });
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for (l, &pil) in p.row(i).iter().enumerate() {
            entries[i * n + f.apply(l)] = pil;
        }
    }
    Ok(TransitionMatrix::from_flat_trusted(n, entries))
}

/// `R = L²(Lᵀ)² = M Mᵀ` with `M = L²`. Symmetric by construction.
pub fn build_r(p: &TransitionMatrix, f: &Permutation) -> Result<TransitionMatrix> {
    let n = p.n();
    let l = build_l(p, f)?;
    let m = matmul(n, l.entries(), l.entries());
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = m[i * n..(i + 1) * n]
                .iter()
                .zip(&m[j * n..(j + 1) * n])
                .map(|(a, b)| a * b)
                .sum();
            r[i * n + j] = v;
            r[j * n + i] = v;
        }
    }
    TransitionMatrix::from_flat(n, r)
}

/// Spectrum summary of a symmetric stochastic matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lambda2 {
    /// Second largest eigenvalue.
    pub value: f64,
    /// Largest eigenvalue; 1 for a stochastic matrix.
    pub top: f64,
    pub min_eigenvalue: f64,
    /// The top eigenvalue is repeated (`λ₂ ≈ 1`), which no irreducible
    /// chain produces.
    pub degenerate: bool,
}

/// Eigenvalues of the symmetric part `(M + Mᵀ)/2`, in decreasing order,
/// with their eigenvectors as columns.
fn symmetric_eigen(r: &TransitionMatrix) -> Result<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let n = r.n();
    let asym = r.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Contract(format!(
            "matrix is not symmetric: max |r_ij - r_ji| = {asym:e}"
        )));
    }
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (r.get(i, j) + r.get(j, i)));
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok((values, vectors, m))
}

/// All eigenvalues of a symmetric matrix, largest first.
pub fn symmetric_eigenvalues(r: &TransitionMatrix) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(r)?.0)
}

pub fn lambda2(r: &TransitionMatrix) -> Result<Lambda2> {
    let n = r.n();
    if n < 2 {
        return Err(Error::InvalidSize("λ₂ needs at least two states".into()));
    }
    let (values, vectors, m) = symmetric_eigen(r)?;

    for k in 0..2 {
        let v = vectors.column(k);
        let residual = (&m * v - v * values[k]).norm();
        if residual > EIGEN_RESIDUAL_TOL {
            return Err(Error::Invariant(format!(
                "eigenpair {k} residual {residual:e} exceeds {EIGEN_RESIDUAL_TOL:e}"
            )));
        }
    }
    if (values[0] - 1.0).abs() > 1e-8 {
        return Err(Error::Invariant(format!(
            "largest eigenvalue {} of a stochastic matrix is not 1",
            values[0]
        )));
    }
    let degenerate = values[1] > 1.0 - 1e-8;
    if !degenerate && 1.0 - values[1] > 1e-6 {
        // a simple top eigenvalue must belong to the constant vector
        let v = vectors.column(0);
        let sign = v.sum().signum();
        let target = 1.0 / (n as f64).sqrt();
        let off = v.iter().map(|x| (sign * x - target).abs()).fold(0.0, f64::max);
        if off > 1e-6 {
            return Err(Error::Invariant(format!(
                "top eigenvector deviates from the constant vector by {off:e}"
            )));
        }
    }
    Ok(Lambda2 {
        value: values[1],
        top: values[0],
        min_eigenvalue: values[n - 1],
        degenerate,
    })
}

/// Cheeger constant `Φ = min_{1 <= |A| <= n/2} (1/|A|) Σ_{i∈A, j∉A} r_ij`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cheeger {
    pub phi: f64,
    pub witness: StateSet,
    pub mode: CheckMode,
    pub sets_checked: u64,
}

fn cut_weight(r: &TransitionMatrix, mask: u64) -> f64 {
    let n = r.n();
    let mut total = 0.0;
    for i in (0..n).filter(|i| mask >> i & 1 == 1) {
        for j in (0..n).filter(|j| mask >> j & 1 == 0) {
            total += r.get(i, j);
        }
    }
    total
}

/// Exact Cheeger constant by enumerating every set with `|A| <= n/2`.
///
/// Sets are visited in Gray-code order inside fixed chunks of the mask range,
/// updating the cut weight in `O(n)` per step; each chunk restarts from a
/// directly computed cut and the winner's value is recomputed directly.
pub fn cheeger_constant(r: &TransitionMatrix) -> Result<Cheeger> {
    let n = r.n();
    if n > CHEEGER_MAX_STATES {
        return Err(Error::Capacity {
            what: "exhaustive Cheeger enumeration states (use cheeger_sampled)",
            size: n,
            cap: CHEEGER_MAX_STATES,
        });
    }
    if n < 2 {
        return Err(Error::InvalidSize("Cheeger constant needs n >= 2".into()));
    }
    let row_sums: Vec<f64> = r.rows().map(|row| row.iter().sum()).collect();
    let chunk_bits = n.min(12);
    let chunks = 1u64 << (n - chunk_bits);

    let scan_chunk = |c: u64| -> (Option<(f64, u64)>, u64) {
        let high = c << chunk_bits;
        // into_a[v] = Σ_{i∈A} r_iv, from_a[v] = Σ_{j∈A} r_vj
        let mut into_a = vec![0.0; n];
        let mut from_a = vec![0.0; n];
        for i in (0..n).filter(|i| high >> i & 1 == 1) {
            for v in 0..n {
                into_a[v] += r.get(i, v);
                from_a[v] += r.get(v, i);
            }
        }
        let mut cut = cut_weight(r, high);
        let mut mask = high;
        let mut best: Option<(f64, u64)> = None;
        let mut count = 0u64;
        for t in 0..1u64 << chunk_bits {
            if t > 0 {
                let v = t.trailing_zeros() as usize;
                let rvv = r.get(v, v);
                if mask >> v & 1 == 0 {
                    cut += row_sums[v] - rvv - from_a[v] - into_a[v];
                    for u in 0..n {
                        into_a[u] += r.get(v, u);
                        from_a[u] += r.get(u, v);
                    }
                } else {
                    cut += into_a[v] - rvv - (row_sums[v] - from_a[v]);
                    for u in 0..n {
                        into_a[u] -= r.get(v, u);
                        from_a[u] -= r.get(u, v);
                    }
                }
                mask ^= 1 << v;
            }
            let size = mask.count_ones() as usize;
            if size == 0 || 2 * size > n {
                continue;
            }
            count += 1;
            let ratio = cut / size as f64;
            if best.is_none_or(|(b, bm)| ratio < b || (ratio == b && mask < bm)) {
                best = Some((ratio, mask));
            }
        }
        (best, count)
    };

    let (best, count) = (0..chunks)
        .into_par_iter()
        .map(scan_chunk)
        .reduce(
            || (None, 0),
            |(a, ca), (b, cb)| {
                let best = match (a, b) {
                    (Some(x), Some(y)) => Some(if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
                    (x, None) => x,
                    (None, y) => y,
                };
                (best, ca + cb)
            },
        );
    let (_, mask) = best.expect("n >= 2 leaves a singleton");
    Ok(Cheeger {
        phi: cut_weight(r, mask) / mask.count_ones() as f64,
        witness: StateSet::from_mask(n, mask),
        mode: CheckMode::Exhaustive,
        sets_checked: count,
    })
}

/// Minimum of the Cheeger ratio over `samples` random sets, drawn uniformly
/// within each size stratum `1..=n/2`.
///
/// The true `Φ` is a minimum over all sets, so this is an upper estimate of
/// `Φ`; it never substitutes for [`cheeger_constant`] in exact checks.
pub fn cheeger_sampled(r: &TransitionMatrix, samples: usize, seed: u64) -> Result<Cheeger> {
    let n = r.n();
    if n < 2 || samples == 0 {
        return Err(Error::InvalidParameter(
            "sampled Cheeger estimate needs n >= 2 and at least one sample".into(),
        ));
    }
    let mut rng = SeededRng::new(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, StateSet)> = None;
    for s in 0..samples {
        let size = 1 + s % (n / 2);
        for t in 0..size {
            let j = t + rng.below((n - t) as u64) as usize;
            pool.swap(t, j);
        }
        let a = StateSet::from_indices(n, pool[..size].iter().copied());
        let cut: f64 = a
            .iter()
            .map(|i| (0..n).filter(|&j| !a.contains(j)).map(|j| r.get(i, j)).sum::<f64>())
            .sum();
        let ratio = cut / size as f64;
        if best
            .as_ref()
            .is_none_or(|(b, bs)| ratio < *b || (ratio == *b && a < *bs))
        {
            best = Some((ratio, a));
        }
    }
    let (phi, witness) = best.expect("samples > 0");
    Ok(Cheeger {
        phi,
        witness,
        mode: CheckMode::Sampled,
        sets_checked: samples as u64,
    })
}

/// `(√n/2)(1 - ε²δ⁸/2)^{(k-2)/4}`.
///
/// Any `ε > 0` with `ε²δ⁸ < 2` is accepted, so an exact `epsilon_star` of 1
/// or more can be used as is.
pub fn theorem1_bound(n: usize, epsilon: f64, delta: Delta, k: u64) -> Result<f64> {
    let d = delta.value();
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {d}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite() && epsilon * epsilon * d.powi(8) < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive with epsilon² δ⁸ < 2, got {epsilon}"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let base = 1.0 - epsilon * epsilon * d.powi(8) / 2.0;
    Ok((n as f64).sqrt() / 2.0 * base.powf((k as f64 - 2.0) / 4.0))
}

/// `(√n/2) λ₂^{(k-2)/4}` for `k >= 2`.
///
/// `λ₂` values within `1e-9` below zero (round-off on a PSD matrix) are
/// treated as zero.
pub fn spectral_tv_bound(lambda2: f64, n: usize, k: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "the spectral TV bound needs k >= 2, got {k}"
        )));
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&lambda2) {
        return Err(Error::InvalidParameter(format!(
            "λ₂ must lie in [0, 1], got {lambda2}"
        )));
    }
    let l = lambda2.clamp(0.0, 1.0);
    Ok((n as f64).sqrt() / 2.0 * l.powf((k as f64 - 2.0) / 4.0))
}

/// How the Cheeger constant is obtained in a [`SpectralReport`].
#[derive(Clone, Copy, Debug)]
pub enum CheegerRequest {
    Skip,
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub delta: Delta,
    pub lambda2: f64,
    pub min_eigenvalue: f64,
    pub cheeger: Option<Cheeger>,
    /// Expansion constant used for the closed-form bound, when supplied.
    pub theorem1_epsilon: Option<f64>,
    /// `1 - Φ²/2`, an upper bound on `λ₂`.
    pub cheeger_lambda_bound: Option<f64>,
    /// `1 - ε²δ⁸/2`, an upper bound on `λ₂`.
    pub theorem1_lambda_bound: Option<f64>,
}

pub fn spectral_report(
    p: &TransitionMatrix,
    f: &Permutation,
    cheeger: CheegerRequest,
    theorem1_epsilon: Option<f64>,
) -> Result<SpectralReport> {
    let r = build_r(p, f)?;
    let l2 = lambda2(&r)?;
    let delta = p.min_positive_entry();
    let cheeger = match cheeger {
        CheegerRequest::Skip => None,
        CheegerRequest::Exhaustive => Some(cheeger_constant(&r)?),
        CheegerRequest::Sampled { samples, seed } => Some(cheeger_sampled(&r, samples, seed)?),
    };
    Ok(SpectralReport {
        n: p.n(),
        delta,
        lambda2: l2.value,
        min_eigenvalue: l2.min_eigenvalue,
        cheeger_lambda_bound: cheeger.as_ref().map(|c| 1.0 - c.phi * c.phi / 2.0),
        theorem1_lambda_bound: theorem1_epsilon
            .map(|e| 1.0 - e * e * delta.value().powi(8) / 2.0),
        cheeger,
        theorem1_epsilon,
    })
}
