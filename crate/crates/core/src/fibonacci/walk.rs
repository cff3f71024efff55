use std::f64::consts::PI;

use serde::Serialize;

use super::residues::fibonacci_mod;
use crate::chain::Distribution;
use crate::error::{Error, Result};

/// Largest modulus for exact pair-chain evolution (`n²` states).
pub const PAIR_CHAIN_MAX_MODULUS: usize = 200;

/// `(X_{k-1}, X_k)`, the Markov state of the walk. Encoded as `prev·n + curr`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairChainState {
    pub prev: usize,
    pub curr: usize,
}

impl PairChainState {
    pub fn index(self, n: usize) -> usize {
        self.prev * n + self.curr
    }

    pub fn from_index(idx: usize, n: usize) -> Self {
        Self {
            prev: idx / n,
            curr: idx % n,
        }
    }
}

/// Exact law of the pair `(X_{k-1}, X_k)`, advanced one step at a time.
#[derive(Clone, Debug)]
pub struct FibonacciWalk {
    n: usize,
    time: usize,
    pair: Vec<f64>,
    scratch: Vec<f64>,
}

impl FibonacciWalk {
    /// The walk at time 1, i.e. the point mass at `(X_0, X_1) = (0, 1)`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("modulus must be >= 2, got {n}")));
        }
        if n > PAIR_CHAIN_MAX_MODULUS {
            return Err(Error::Capacity {
                what: "Fibonacci pair-chain modulus",
                size: n,
                cap: PAIR_CHAIN_MAX_MODULUS,
            });
        }
        let mut pair = vec![0.0; n * n];
        pair[PairChainState { prev: 0, curr: 1 % n }.index(n)] = 1.0;
        Ok(Self {
            n,
            time: 1,
            scratch: vec![0.0; n * n],
            pair,
        })
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    /// Current `k`, the index of the last coordinate.
    pub fn time(&self) -> usize {
        self.time
    }

    pub fn pair_law(&self) -> &[f64] {
        &self.pair
    }

    /// `(p, c) ↦ (c, p + c + ε)` with `ε ∈ {-1, 0, 1}` equally likely.
    pub fn advance(&mut self) {
        let n = self.n;
        let third = 1.0 / 3.0;
        self.scratch.fill(0.0);
        for prev in 0..n {
            for curr in 0..n {
                let mass = self.pair[prev * n + curr];
                if mass == 0.0 {
                    continue;
                }
                let sum = (prev + curr) % n;
                let base = curr * n;
                let w = mass * third;
                self.scratch[base + (sum + n - 1) % n] += w;
                self.scratch[base + sum] += w;
                self.scratch[base + (sum + 1) % n] += w;
            }
        }
        std::mem::swap(&mut self.pair, &mut self.scratch);
        self.time += 1;
    }

    /// Law of `X_k` at the current time.
    pub fn marginal(&self) -> Distribution {
        let n = self.n;
        let mut probs = vec![0.0; n];
        for (idx, &mass) in self.pair.iter().enumerate() {
            probs[idx % n] += mass;
        }
        Distribution::from_vec_trusted(probs)
    }
}

/// Exact law of `X_k`, by evolving the pair chain from `(0, 1)`.
pub fn fibonacci_walk_distribution(n: usize, k: usize) -> Result<Distribution> {
    let mut walk = FibonacciWalk::new(n)?;
    if k == 0 {
        return Ok(Distribution::point_mass(n, 0));
    }
    while walk.time() < k {
        walk.advance();
    }
    Ok(walk.marginal())
}

/// `Σ_{a=1}^{n-1} ∏_{b=1}^{k-1} (1/3 + (2/3) cos(2π a F_b / n))²`, the sum of
/// squared Fourier magnitudes of the law of `X_k` away from `a = 0`.
pub fn fourier_sq_sum(n: usize, k: usize) -> f64 {
    let fib = fibonacci_mod(n, k.max(1));
    (1..n)
        .map(|a| {
            fib.iter()
                .skip(1)
                .map(|&fb| {
                    let x = (a * fb) % n;
                    let factor = 1.0 / 3.0 + 2.0 / 3.0 * (2.0 * PI * x as f64 / n as f64).cos();
                    factor * factor
                })
                .product::<f64>()
        })
        .sum()
}

/// Total variation bound `(1/2) sqrt(fourier_sq_sum(n, k))` from
/// `4‖P_k - U‖² ≤ Σ_{a≠0} |P̂_k(a)|²`.
pub fn fourier_tv_bound(n: usize, k: usize) -> f64 {
    0.5 * fourier_sq_sum(n, k).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoremParameters {
    pub n: usize,
    pub c: f64,
    /// `floor(5((ln n)² + c ln n))`
    pub k: usize,
    /// `1.6 e^{-c/2}`
    pub bound: f64,
}

pub fn theorem_fibo_parameters(n: usize, c: f64) -> Result<TheoremParameters> {
    if n < 22 {
        return Err(Error::InvalidParameter(format!(
            "the (log n)² mixing bound is stated for n >= 22, got {n}"
        )));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::InvalidParameter(format!("c must be >= 0, got {c}")));
    }
    let ln = (n as f64).ln();
    Ok(TheoremParameters {
        n,
        c,
        k: (5.0 * (ln * ln + c * ln)).floor() as usize,
        bound: 1.6 * (-c / 2.0).exp(),
    })
}
