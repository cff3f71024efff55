//! Exact evolution of distributions and worst-start total variation profiles.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{Distribution, TransitionMatrix};
use crate::error::{Error, Result};

/// Tolerance on the monotone decrease of worst-start TV.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Half the L1 distance.
pub fn tv_distance(mu: &Distribution, nu: &Distribution) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            found: nu.len(),
        });
    }
    Ok(tv_to(mu.probs(), nu.probs()))
}

fn tv_to(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// TV distance to the uniform distribution.
pub fn tv_to_uniform(probs: &[f64]) -> f64 {
    let u = 1.0 / probs.len() as f64;
    0.5 * probs.iter().map(|p| (p - u).abs()).sum::<f64>()
}

/// One step `μ ↦ μQ` over the nonzero entries of `Q`.
pub(crate) fn step(sparse: &[Vec<(usize, f64)>], mu: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (i, &m) in mu.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        for &(j, q) in &sparse[i] {
            out[j] += m * q;
        }
    }
}

/// `μ₀ Qᵏ` by `k` successive vector-matrix products.
pub fn evolve(q: &TransitionMatrix, mu0: &Distribution, k: usize) -> Result<Distribution> {
    if mu0.len() != q.n() {
        return Err(Error::DimensionMismatch {
            expected: q.n(),
            found: mu0.len(),
        });
    }
    let sparse = q.sparse_rows();
    let mut cur = mu0.probs().to_vec();
    let mut next = vec![0.0; cur.len()];
    for _ in 0..k {
        step(&sparse, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Distribution::from_vec_trusted(cur))
}

/// Which point-mass starts a profile maximizes over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Starts {
    All,
    /// One start only; exact for vertex-transitive chains, where every start
    /// gives the same TV curve.
    Single(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixingRow {
    pub k: usize,
    pub worst_tv: f64,
}

/// `worst_tv(k) = max_i TV(δ_i Qᵏ, uniform)` for `k = 0..=k_max`.
///
/// Worst-start TV to a stationary law never increases; a rise above
/// [`MONOTONE_TOL`] is reported as an invariant error.
pub fn mixing_profile(q: &TransitionMatrix, k_max: usize, starts: Starts) -> Result<Vec<MixingRow>> {
    let n = q.n();
    let start_list: Vec<usize> = match starts {
        Starts::All => (0..n).collect(),
        Starts::Single(i) if i < n => vec![i],
        Starts::Single(i) => {
            return Err(Error::InvalidParameter(format!("start {i} outside 0..{n}")))
        }
    };
    let sparse = q.sparse_rows();
    let curves: Vec<Vec<f64>> = start_list
        .par_iter()
        .map(|&i| {
            let mut cur = vec![0.0; n];
            cur[i] = 1.0;
            let mut next = vec![0.0; n];
            let mut tv = Vec::with_capacity(k_max + 1);
            tv.push(tv_to_uniform(&cur));
            for _ in 0..k_max {
                step(&sparse, &cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
                tv.push(tv_to_uniform(&cur));
            }
            tv
        })
        .collect();

    let rows: Vec<MixingRow> = (0..=k_max)
        .map(|k| MixingRow {
            k,
            worst_tv: curves.iter().map(|c| c[k]).fold(0.0, f64::max),
        })
        .collect();
    if let Some(w) = rows
        .windows(2)
        .find(|w| w[1].worst_tv > w[0].worst_tv + MONOTONE_TOL)
    {
        return Err(Error::Invariant(format!(
            "worst-start TV increased from {} at k={} to {} at k={}",
            w[0].worst_tv, w[0].k, w[1].worst_tv, w[1].k
        )));
    }
    Ok(rows)
}
