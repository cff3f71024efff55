//! Shift-register chains `P_f` on `X^order`.
//!
//! From `(x_1, .., x_order)` the chain moves to
//! `(x_2, .., x_order, f(x_1, .., x_order))` and then takes one step of the
//! base kernel in the last coordinate. When `x_1 ↦ f(x_1, tail)` is a
//! bijection for every tail, the shift is a bijection of `X^order` and `P_f`
//! keeps the uniform law stationary.

use serde::Serialize;

use crate::chain::{validate, TransitionMatrix, MAX_STATES, STOCHASTIC_TOL};
use crate::error::{Error, Result};
use crate::graph;

/// The update `f: X^order → X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UpdateRule {
    /// `x_1 + x_2 + .. + x_order`; for order 2 this is the Fibonacci walk.
    Additive,
    /// `x_1³ + x_2 + .. + x_order`.
    CubePlusRest,
    /// Explicit values indexed by the tuple encoding of
    /// [`HigherOrderChainSpec::encode`].
    Table(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct HigherOrderChainSpec {
    base_n: usize,
    order: usize,
    update: UpdateRule,
    base_kernel: TransitionMatrix,
}

impl HigherOrderChainSpec {
    /// Checks shapes and the state-count cap; the bijection property is
    /// checked by [`HigherOrderChainSpec::check_bijective_update`].
    pub fn new(
        base_n: usize,
        order: usize,
        update: UpdateRule,
        base_kernel: TransitionMatrix,
    ) -> Result<Self> {
        if base_n == 0 {
            return Err(Error::InvalidSize("empty base state space".into()));
        }
        if order < 2 {
            return Err(Error::InvalidParameter(format!("order must be >= 2, got {order}")));
        }
        if base_kernel.n() != base_n {
            return Err(Error::DimensionMismatch {
                expected: base_n,
                found: base_kernel.n(),
            });
        }
        let states = u32::try_from(order)
            .ok()
            .and_then(|o| base_n.checked_pow(o))
            .unwrap_or(usize::MAX);
        if states > MAX_STATES {
            return Err(Error::Capacity {
                what: "higher-order chain states",
                size: states,
                cap: MAX_STATES,
            });
        }
        if let UpdateRule::Table(t) = &update {
            if t.len() != states {
                return Err(Error::InvalidParameter(format!(
                    "update table has {} entries, expected {states}",
                    t.len()
                )));
            }
            if let Some(v) = t.iter().find(|&&v| v >= base_n) {
                return Err(Error::InvalidParameter(format!(
                    "update table value {v} outside 0..{base_n}"
                )));
            }
        }
        Ok(Self {
            base_n,
            order,
            update,
            base_kernel,
        })
    }

    pub fn base_n(&self) -> usize {
        self.base_n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base_kernel(&self) -> &TransitionMatrix {
        &self.base_kernel
    }

    pub fn state_count(&self) -> usize {
        self.base_n.pow(self.order as u32)
    }

    /// Tuple `(x_1, .., x_order)` to its index `Σ x_i · base_n^(order-i)`;
    /// `x_1` is the most significant digit and the last coordinate the least.
    pub fn encode(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &x| acc * self.base_n + x)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut tuple = vec![0; self.order];
        for slot in tuple.iter_mut().rev() {
            *slot = idx % self.base_n;
            idx /= self.base_n;
        }
        tuple
    }

    pub fn apply_update(&self, tuple: &[usize]) -> usize {
        let n = self.base_n;
        let rest = || tuple[1..].iter().fold(0, |acc, &x| (acc + x) % n);
        match &self.update {
            UpdateRule::Additive => (tuple[0] + rest()) % n,
            UpdateRule::CubePlusRest => {
                let x = tuple[0] % n;
                (x * x % n * x % n + rest()) % n
            }
            UpdateRule::Table(t) => t[self.encode(tuple)],
        }
    }

    /// Verifies by enumeration that `x_1 ↦ f(x_1, tail)` is injective for
    /// every tail, naming the tail and two colliding first coordinates on
    /// failure.
    pub fn check_bijective_update(&self) -> Result<()> {
        let n = self.base_n;
        let tails = n.pow(self.order as u32 - 1);
        let mut seen = vec![usize::MAX; n];
        for tail_idx in 0..tails {
            seen.fill(usize::MAX);
            let mut tuple = self.decode(tail_idx);
            for x1 in 0..n {
                tuple[0] = x1;
                let y = self.apply_update(&tuple);
                if seen[y] != usize::MAX {
                    return Err(Error::NotABijection(format!(
                        "update is not injective in the first coordinate for tail {:?}: \
                         x = {} and x = {x1} both give {y}",
                        &tuple[1..],
                        seen[y]
                    )));
                }
                seen[y] = x1;
            }
        }
        Ok(())
    }
}

/// Explicit transition matrix of `P_f` on the encoded states of `X^order`.
pub fn build_higher_order_chain(spec: &HigherOrderChainSpec) -> Result<TransitionMatrix> {
    spec.check_bijective_update()?;
    let states = spec.state_count();
    let n = spec.base_n;
    let mut entries = vec![0.0; states * states];
    for s in 0..states {
        let tuple = spec.decode(s);
        let y = spec.apply_update(&tuple);
        // shifted index with the new last coordinate set to 0
        let shifted = (s % (states / n)) * n;
        for (z, &p) in spec.base_kernel.row(y).iter().enumerate() {
            if p > 0.0 {
                entries[s * states + shifted + z] = p;
            }
        }
    }
    TransitionMatrix::from_flat(states, entries)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HeVerification {
    pub states: usize,
    pub irreducible: bool,
    pub period: usize,
    pub aperiodic: bool,
    pub ergodic: bool,
    pub uniform_stationary: bool,
}

/// Brute-force check that `P_f` is ergodic with uniform stationary law when
/// the base kernel is lazy, irreducible and doubly stochastic.
pub fn verify_he_proposition(spec: &HigherOrderChainSpec) -> Result<HeVerification> {
    let base = validate(&spec.base_kernel);
    if !base.positive_diagonal.passed {
        return Err(Error::Precondition(format!(
            "base kernel must be lazy (positive diagonal): {}",
            base.failures().join("; ")
        )));
    }
    if !base.irreducible.passed || !base.doubly_stochastic.passed {
        return Err(Error::Precondition(format!(
            "base kernel must be irreducible with uniform stationary law: {}",
            base.failures().join("; ")
        )));
    }

    let pf = build_higher_order_chain(spec)?;
    let support = pf.support();
    let irreducible = graph::first_unreached(&support).is_none()
        && graph::first_unreached(&graph::reverse(&support)).is_none();
    let period = if irreducible { graph::period(&support) } else { 0 };
    let uniform_stationary = pf
        .column_sums()
        .iter()
        .all(|s| (s - 1.0).abs() <= STOCHASTIC_TOL);
    Ok(HeVerification {
        states: pf.n(),
        irreducible,
        period,
        aperiodic: period == 1,
        ergodic: irreducible && period == 1,
        uniform_stationary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::lazy_cycle_walk;

    fn spec(n: usize, order: usize, update: UpdateRule) -> HigherOrderChainSpec {
        HigherOrderChainSpec::new(n, order, update, lazy_cycle_walk(n).unwrap()).unwrap()
    }

    #[test]
    fn encode_decode() {
        let s = spec(5, 3, UpdateRule::Additive);
        for idx in [0, 7, 124] {
            assert_eq!(s.encode(&s.decode(idx)), idx);
        }
        assert_eq!(s.decode(7), vec![0, 1, 2]);
    }

    #[test]
    fn fibonacci_transition() {
        let s = spec(5, 2, UpdateRule::Additive);
        let pf = build_higher_order_chain(&s).unwrap();
        // (2, 4) -> (4, 6 + ε) = (4, {0, 1, 2})
        let from = s.encode(&[2, 4]);
        let targets: Vec<Vec<usize>> = (0..25)
            .filter(|&t| pf.get(from, t) > 0.0)
            .map(|t| s.decode(t))
            .collect();
        assert_eq!(targets, vec![vec![4, 0], vec![4, 1], vec![4, 2]]);
        assert!(pf.is_doubly_stochastic());
    }

    #[test]
    fn cubing_is_valid_on_z5() {
        let pf = build_higher_order_chain(&spec(5, 2, UpdateRule::CubePlusRest)).unwrap();
        assert_eq!(pf.n(), 25);
        assert!(pf.is_doubly_stochastic());
    }

    #[test]
    fn squaring_is_rejected_with_witness() {
        let table: Vec<usize> = (0..25).map(|i| ((i / 5) * (i / 5) + i % 5) % 5).collect();
        let err = build_higher_order_chain(&spec(5, 2, UpdateRule::Table(table))).unwrap_err();
        let Error::NotABijection(msg) = err else {
            panic!("unexpected error")
        };
        // 2² = 3² = 4 (mod 5) is the first collision for tail 0
        assert!(msg.contains("tail [0]") && msg.contains("x = 2 and x = 3"), "{msg}");
    }

    #[test]
    fn he_proposition_on_small_specs() {
        let v = verify_he_proposition(&spec(3, 2, UpdateRule::Additive)).unwrap();
        assert!(v.ergodic && v.uniform_stationary);
        let c = verify_he_proposition(&spec(5, 2, UpdateRule::CubePlusRest)).unwrap();
        assert!(c.ergodic && c.uniform_stationary);
    }

    #[test]
    fn he_proposition_needs_lazy_kernel() {
        // the non-lazy walk ±1 on Z_4
        let p = TransitionMatrix::from_rows(vec![
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.5, 0.0, 0.5, 0.0],
        ])
        .unwrap();
        let s = HigherOrderChainSpec::new(4, 2, UpdateRule::Additive, p).unwrap();
        assert!(matches!(verify_he_proposition(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn rejects_oversized_and_bad_tables() {
        let p = lazy_cycle_walk(10).unwrap();
        assert!(matches!(
            HigherOrderChainSpec::new(10, 4, UpdateRule::Additive, p.clone()),
            Err(Error::Capacity { .. })
        ));
        assert!(HigherOrderChainSpec::new(10, 2, UpdateRule::Table(vec![0; 99]), p.clone()).is_err());
        assert!(HigherOrderChainSpec::new(10, 1, UpdateRule::Additive, p).is_err());
    }
}
