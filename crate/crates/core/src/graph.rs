//! Directed support graphs of dense kernels.

use std::collections::VecDeque;

/// Adjacency lists of `{(i, j) : weight(i, j) > 0}`.
pub(crate) fn support_lists(n: usize, entries: &[f64]) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            entries[i * n..(i + 1) * n]
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

pub(crate) fn reverse(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (i, out) in adj.iter().enumerate() {
        for &j in out {
            rev[j].push(i);
        }
    }
    rev
}

/// BFS distances from `source`; `None` for unreachable vertices.
pub(crate) fn bfs_levels(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    level[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = level[u].unwrap() + 1;
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    level
}

/// First vertex not reachable from 0 along `adj`, if any.
pub(crate) fn first_unreached(adj: &[Vec<usize>]) -> Option<usize> {
    if adj.is_empty() {
        return None;
    }
    bfs_levels(adj, 0).iter().position(Option::is_none)
}

/// Period of a strongly connected graph: gcd over edges `(u, v)` of
/// `level(u) + 1 - level(v)`, with levels taken from a BFS rooted anywhere.
pub(crate) fn period(adj: &[Vec<usize>]) -> usize {
    let level = bfs_levels(adj, 0);
    let mut g = 0usize;
    for (u, out) in adj.iter().enumerate() {
        let Some(lu) = level[u] else { continue };
        for &v in out {
            if let Some(lv) = level[v] {
                g = gcd(g, (lu + 1).abs_diff(lv));
            }
        }
    }
    g
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
