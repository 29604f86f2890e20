//! All-pairs hop distances.

use crate::graph::Graph;

const UNREACHABLE: u32 = u32::MAX;

/// Symmetric `n x n` hop-count matrix. Disconnected pairs read back as `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceMatrix {
    pub fn order(&self) -> usize {
        self.n
    }

    /// Hop distance, or `None` when `v` is unreachable from `u`.
    pub fn get(&self, u: usize, v: usize) -> Option<u32> {
        match self.dist[u * self.n + v] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    /// Reachable unordered pairs `{u, v}`, `u < v`, with their distance.
    pub fn reachable_pairs(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.n).flat_map(move |u| {
            ((u + 1)..self.n).filter_map(move |v| self.get(u, v).map(|d| (u, v, d)))
        })
    }
}

/// Floyd-Warshall on unit edge weights.
pub fn floyd_warshall(g: &Graph) -> DistanceMatrix {
    let n = g.order();
    let mut dist = vec![UNREACHABLE; n * n];
    for v in 0..n {
        dist[v * n + v] = 0;
    }
    for &(u, v) in g.edges() {
        dist[u * n + v] = 1;
        dist[v * n + u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik == UNREACHABLE {
                continue;
            }
            for j in 0..n {
                let dkj = dist[k * n + j];
                if dkj != UNREACHABLE && dik + dkj < dist[i * n + j] {
                    dist[i * n + j] = dik + dkj;
                }
            }
        }
    }
    DistanceMatrix { n, dist }
}
