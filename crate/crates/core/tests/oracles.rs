//! Library results against independent reference computations.

mod common;

use std::collections::{BTreeSet, HashSet};

use common::*;
use jumpmix::chain::lazy_cycle_walk;
use jumpmix::expansion::{check_expansion, count_sets_with_boundary, scan_random_bijections};
use jumpmix::mixing::{mixing_profile, Starts};
use jumpmix::spectral::{build_r, cheeger_constant, lambda2, spectral_tv_bound};
use jumpmix::{compose, ExpansionStrategy, Permutation, StateSet};

/// Number of eigenvalues of the symmetric matrix `a` strictly below `x`,
/// from the signs of the pivots of `a - xI` (Sylvester's law of inertia).
fn count_below(a: &[Vec<f64>], x: f64) -> usize {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= x;
    }
    let mut negative = 0;
    for k in 0..n {
        let mut pivot = m[k][k];
        if pivot == 0.0 {
            pivot = -1e-300;
        }
        if pivot < 0.0 {
            negative += 1;
        }
        for i in k + 1..n {
            let factor = m[i][k] / pivot;
            for j in k + 1..n {
                m[i][j] -= factor * m[k][j];
            }
        }
    }
    negative
}

/// Second largest eigenvalue by bisection on the inertia count.
fn lambda2_by_bisection(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let (mut lo, mut hi) = (-2.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // at least two eigenvalues are >= mid
        if n - count_below(a, mid) >= 2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn lambda2_matches_inertia_bisection() {
    // doubling needs an odd modulus; 13 is the closest to 12 that works
    for n in [11, 13] {
        let p = lazy_cycle_walk(n).unwrap();
        let f = Permutation::doubling(n).unwrap();
        let oracle = lambda2_by_bisection(&naive_r(&p, &f));
        let got = lambda2(&build_r(&p, &f).unwrap()).unwrap().value;
        assert!((got - oracle).abs() < 1e-8, "n={n}: {got} vs {oracle}");
    }
    for seed in 0..5 {
        let p = random_chain(10, seed);
        let f = Permutation::random(10, seed);
        let oracle = lambda2_by_bisection(&naive_r(&p, &f));
        let got = lambda2(&build_r(&p, &f).unwrap()).unwrap().value;
        assert!((got - oracle).abs() < 1e-8, "seed {seed}: {got} vs {oracle}");
    }
}

fn brute_cheeger(r: &[Vec<f64>]) -> f64 {
    let n = r.len();
    let mut best = f64::INFINITY;
    for mask in 1u64..(1 << n) {
        let a = bits(mask, n);
        if a.len() > n / 2 {
            continue;
        }
        let mut flow = 0.0;
        for &i in &a {
            for (j, &rij) in r[i].iter().enumerate() {
                if mask >> j & 1 == 0 {
                    flow += rij;
                }
            }
        }
        best = best.min(flow / a.len() as f64);
    }
    best
}

#[test]
fn cheeger_matches_full_enumeration() {
    let p = lazy_cycle_walk(8).unwrap();
    let id = Permutation::identity(8);
    let r = build_r(&p, &id).unwrap();
    let got = cheeger_constant(&r).unwrap();
    let oracle = brute_cheeger(&naive_r(&p, &id));
    assert!((got.phi - oracle).abs() < 1e-12, "{} vs {oracle}", got.phi);

    for seed in 0..4 {
        let p = random_chain(9, seed);
        let f = Permutation::random(9, seed + 100);
        let got = cheeger_constant(&build_r(&p, &f).unwrap()).unwrap();
        let oracle = brute_cheeger(&naive_r(&p, &f));
        assert!((got.phi - oracle).abs() < 1e-12, "seed {seed}");
    }
}

/// `min |E f E(A)| / |A| - 1` over nonempty `A` with `|A| <= n/2`, using
/// hash sets and the matrix entries directly.
fn brute_epsilon_star(p: &jumpmix::TransitionMatrix, f: &Permutation) -> f64 {
    let n = p.n();
    let expand = |set: &HashSet<usize>| -> HashSet<usize> {
        set.iter().flat_map(|&i| neighbors(p, i)).collect()
    };
    let mut best = f64::INFINITY;
    for mask in 1u64..(1 << n) {
        let a: HashSet<usize> = bits(mask, n).into_iter().collect();
        if a.len() > n / 2 {
            continue;
        }
        let mapped: HashSet<usize> = expand(&a).iter().map(|&i| f.apply(i)).collect();
        let image = expand(&mapped);
        best = best.min(image.len() as f64 / a.len() as f64 - 1.0);
    }
    best
}

#[test]
fn exhaustive_expansion_matches_hash_set_enumeration() {
    let p = lazy_cycle_walk(12).unwrap();
    let id = Permutation::identity(12);
    let report = check_expansion(&p, &id, &ExpansionStrategy::Exhaustive).unwrap();
    assert_eq!(report.epsilon_star, brute_epsilon_star(&p, &id));

    for seed in 0..3 {
        let p = random_chain(11, seed);
        let f = Permutation::random(11, seed);
        let report = check_expansion(&p, &f, &ExpansionStrategy::Exhaustive).unwrap();
        assert_eq!(report.epsilon_star, brute_epsilon_star(&p, &f), "seed {seed}");
    }
}

fn brute_boundary_count(p: &jumpmix::TransitionMatrix, target: &BTreeSet<usize>) -> u64 {
    let n = p.n();
    let mut count = 0;
    for mask in 0u64..(1 << n) {
        let b: BTreeSet<usize> = bits(mask, n).into_iter().collect();
        let boundary: BTreeSet<usize> = b
            .iter()
            .flat_map(|&i| neighbors(p, i))
            .filter(|j| !b.contains(j))
            .collect();
        if &boundary == target {
            count += 1;
        }
    }
    count
}

#[test]
fn boundary_count_matches_second_enumeration() {
    let p = lazy_cycle_walk(10).unwrap();
    for a in [vec![0, 5], vec![], vec![3], vec![0, 2, 4]] {
        let target: BTreeSet<usize> = a.iter().copied().collect();
        let got = count_sets_with_boundary(&p, &StateSet::from_indices(10, a.clone())).unwrap();
        assert_eq!(got, brute_boundary_count(&p, &target), "A = {a:?}");
    }
}

#[test]
fn spectral_bound_dominates_exact_tv() {
    let n = 13;
    let p = lazy_cycle_walk(n).unwrap();
    let f = Permutation::doubling(n).unwrap();
    let l2 = lambda2(&build_r(&p, &f).unwrap()).unwrap().value;
    let worst = naive_worst_tv(&naive_q(&p, &f), 20);
    for k in 2..=20 {
        let bound = spectral_tv_bound(l2, n, k as u64).unwrap();
        assert!(worst[k] <= bound + 1e-9, "k={k}: {} > {bound}", worst[k]);
    }
}

#[test]
fn mixing_profile_matches_dense_evolution() {
    let p = random_chain(9, 3);
    let f = Permutation::random(9, 3);
    let q = compose(&f, &p).unwrap();
    let rows = mixing_profile(&q, 25, Starts::All).unwrap();
    let oracle = naive_worst_tv(&naive_q(&p, &f), 25);
    for (row, want) in rows.iter().zip(&oracle) {
        assert!((row.worst_tv - want).abs() < 1e-12, "k={}", row.k);
    }
}

#[test]
fn plain_cycle_is_slow_and_jumps_are_fast() {
    let p = lazy_cycle_walk(101).unwrap();
    let plain = mixing_profile(&p, 100, Starts::All).unwrap();
    assert!(plain[100].worst_tv > 0.5, "{}", plain[100].worst_tv);

    let q = compose(&Permutation::random(101, 1), &p).unwrap();
    let jumped = mixing_profile(&q, 60, Starts::All).unwrap();
    assert!(jumped[60].worst_tv < 0.01, "{}", jumped[60].worst_tv);
}

#[test]
fn scan_trials_agree_with_hash_set_enumeration() {
    let p = lazy_cycle_walk(12).unwrap();
    let scan = scan_random_bijections(&p, 0.1, 5, 7).unwrap();
    for trial in &scan.trials {
        let oracle = brute_epsilon_star(&p, &Permutation::random(12, trial.seed));
        assert_eq!(trial.epsilon_star, oracle, "seed {}", trial.seed);
        assert_eq!(trial.good, oracle >= 0.1);
    }
}
