use serde::Serialize;

use crate::error::{Error, Result};

/// `F_0, .., F_{len-1}` reduced mod `n`, with `F_0 = 0`, `F_1 = 1`.
pub fn fibonacci_mod(n: usize, len: usize) -> Vec<usize> {
    FibResidueSequence::new(n, 0, 1 % n, len).terms
}

/// Residues `b_k` of an integer sequence obeying the Fibonacci recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibResidueSequence {
    pub n: usize,
    pub terms: Vec<usize>,
}

impl FibResidueSequence {
    pub fn new(n: usize, b0: usize, b1: usize, len: usize) -> Self {
        assert!(n >= 1);
        let mut terms = Vec::with_capacity(len);
        let (mut a, mut b) = (b0 % n, b1 % n);
        for _ in 0..len {
            terms.push(a);
            (a, b) = (b, (a + b) % n);
        }
        Self { n, terms }
    }

    /// Period of the pair `(b_k, b_{k+1})` starting from `(b0, b1)`.
    ///
    /// The pair map `(a, b) ↦ (b, a + b)` is invertible mod `n`, so every
    /// orbit is a cycle of length at most `n²`.
    pub fn pair_period(n: usize, b0: usize, b1: usize) -> usize {
        let start = (b0 % n, b1 % n);
        let (mut a, mut b) = start;
        let mut period = 0;
        loop {
            (a, b) = (b, (a + b) % n);
            period += 1;
            if (a, b) == start {
                return period;
            }
        }
    }
}

/// `floor(8 + 3 log_{3/2} n)`: the largest gap `k - j` the window property
/// allows.
pub fn window_length(n: usize) -> usize {
    (8.0 + 3.0 * (n as f64).ln() / 1.5f64.ln()).floor() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WindowCheck {
    pub holds: bool,
    /// `max_j min{k - j : k >= j, b_k ∈ [n/3, 2n/3]}`; for a failing `j` the
    /// search stops at the window edge.
    pub worst_gap: usize,
    pub horizon: usize,
}

/// Checks that every `j <= horizon` has some `k ∈ [j, j + window_length(n)]`
/// with `b_k = a·F_k mod n` in the closed interval `[n/3, 2n/3]`.
///
/// Membership uses the integer tests `3b >= n` and `3b <= 2n`. The default
/// horizon is one pair period plus the window length, which covers every `j`
/// because the sequence is periodic.
pub fn check_residue_window(n: usize, a: usize, horizon: Option<usize>) -> Result<WindowCheck> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if a == 0 || a >= n {
        return Err(Error::InvalidParameter(format!("a must lie in [1, {n}), got {a}")));
    }
    let window = window_length(n);
    let horizon =
        horizon.unwrap_or_else(|| FibResidueSequence::pair_period(n, 0, a) + window);
    let seq = FibResidueSequence::new(n, 0, a, horizon + window + 1);
    let in_middle = |b: usize| 3 * b >= n && 3 * b <= 2 * n;

    // next_hit[k] = smallest k' >= k with b_k' in the middle third
    let len = seq.terms.len();
    let mut next_hit = vec![usize::MAX; len + 1];
    for k in (0..len).rev() {
        next_hit[k] = if in_middle(seq.terms[k]) { k } else { next_hit[k + 1] };
    }

    let mut holds = true;
    let mut worst_gap = 0;
    for j in 0..=horizon {
        let gap = next_hit[j].saturating_sub(j);
        if gap > window {
            holds = false;
            worst_gap = worst_gap.max(window + 1);
        } else {
            worst_gap = worst_gap.max(gap);
        }
    }
    Ok(WindowCheck {
        holds,
        worst_gap,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_indexing() {
        let f = fibonacci_mod(1000, 8);
        assert_eq!(f, vec![0, 1, 1, 2, 3, 5, 8, 13]);
        assert_eq!(f[5], 5);
    }

    #[test]
    fn pisano_periods() {
        // classical Pisano periods
        for (n, pi) in [(2, 3), (3, 8), (4, 6), (5, 20), (10, 60)] {
            assert_eq!(FibResidueSequence::pair_period(n, 0, 1), pi, "n = {n}");
        }
    }

    #[test]
    fn window_mod_two() {
        let c = check_residue_window(2, 1, None).unwrap();
        assert!(c.holds);
        assert!(c.worst_gap <= 2);
    }

    #[test]
    fn window_mod_three() {
        // b = 0,1,1,2,0,2,2,1 repeating; [1,2] misses only the zeros
        let c = check_residue_window(3, 1, None).unwrap();
        assert!(c.holds);
        assert_eq!(c.worst_gap, 1);
    }

    #[test]
    fn window_rejects_bad_multiplier() {
        assert!(check_residue_window(5, 0, None).is_err());
        assert!(check_residue_window(5, 5, None).is_err());
    }

    #[test]
    fn window_constant_at_22() {
        let m = 8.0 + 3.0 * 22f64.ln() / 1.5f64.ln();
        assert!((30.0..=10.0 * 22f64.ln()).contains(&m));
        assert_eq!(window_length(22), 30);
    }
}
