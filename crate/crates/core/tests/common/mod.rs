//! Chain generators and naive reference computations shared by the
//! integration tests. Nothing here calls into the library's algorithms
//! beyond constructors.

#![allow(dead_code)]

use jumpmix::rng::SeededRng;
use jumpmix::{Permutation, TransitionMatrix};

/// A random lazy, symmetric, irreducible, doubly stochastic chain on `n >= 3`
/// states: a positive mix of the identity, the symmetric cycle step and a
/// random perfect-ish matching.
pub fn random_chain(n: usize, seed: u64) -> TransitionMatrix {
    let mut rng = SeededRng::new(seed);
    let mut w = [0.0f64; 3];
    for x in &mut w {
        *x = 1.0 + rng.below(8) as f64;
    }
    let total: f64 = w.iter().sum();
    let (a, b, c) = (w[0] / total, w[1] / total, w[2] / total);

    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut partner: Vec<usize> = (0..n).collect();
    for pair in order.chunks(2) {
        if let [x, y] = *pair {
            partner[x] = y;
            partner[y] = x;
        }
    }

    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        rows[i][i] += a;
        rows[i][(i + 1) % n] += b / 2.0;
        rows[i][(i + n - 1) % n] += b / 2.0;
        rows[i][partner[i]] += c;
    }
    TransitionMatrix::from_rows(rows).unwrap()
}

pub fn dense(p: &TransitionMatrix) -> Vec<Vec<f64>> {
    p.rows().map(|r| r.to_vec()).collect()
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn permutation_matrix(f: &Permutation) -> Vec<Vec<f64>> {
    let n = f.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][f.apply(i)] = 1.0;
    }
    m
}

/// `R = L² (Lᵀ)²` with `L = P Π`, by plain dense products.
pub fn naive_r(p: &TransitionMatrix, f: &Permutation) -> Vec<Vec<f64>> {
    let l = mat_mul(&dense(p), &permutation_matrix(f));
    let l2 = mat_mul(&l, &l);
    let lt = transpose(&l);
    mat_mul(&l2, &mat_mul(&lt, &lt))
}

/// `ΠP` as a dense product.
pub fn naive_q(p: &TransitionMatrix, f: &Permutation) -> Vec<Vec<f64>> {
    mat_mul(&permutation_matrix(f), &dense(p))
}

pub fn row_times(v: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|j| (0..n).map(|i| v[i] * m[i][j]).sum()).collect()
}

/// Worst-start TV to uniform after `k` steps, for `k = 0..=k_max`.
pub fn naive_worst_tv(q: &[Vec<f64>], k_max: usize) -> Vec<f64> {
    let n = q.len();
    let mut worst = vec![0.0f64; k_max + 1];
    for start in 0..n {
        let mut mu = vec![0.0; n];
        mu[start] = 1.0;
        for slot in worst.iter_mut() {
            let tv: f64 = 0.5 * mu.iter().map(|x| (x - 1.0 / n as f64).abs()).sum::<f64>();
            *slot = slot.max(tv);
            mu = row_times(&mu, q);
        }
    }
    worst
}

/// Neighbors of `i` (including `i`) read from the matrix entries.
pub fn neighbors(p: &TransitionMatrix, i: usize) -> Vec<usize> {
    (0..p.n()).filter(|&j| p.get(i, j) > 0.0).collect()
}

pub fn bits(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}
