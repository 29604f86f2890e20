//! Brute-force canonical codes for small graphs.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest order accepted by [`canonical_code`] (8! permutations).
pub const MAX_CANONICAL_ORDER: usize = 8;

/// Lexicographically minimal upper-triangular adjacency bit-string over all
/// vertex orderings. Bits are packed most-significant-first in the pair order
/// `(0,1), (0,2), ..., (n-2,n-1)`, so the minimal string is the minimal integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode {
    order: u8,
    bits: u32,
}

impl CanonicalCode {
    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Number of edges in the encoded graph.
    pub fn edge_count(&self) -> u32 {
        self.bits.count_ones()
    }
}

pub fn canonical_code(g: &Graph) -> Result<CanonicalCode> {
    let n = g.order();
    if n > MAX_CANONICAL_ORDER {
        return Err(Error::SizeLimit {
            n,
            max: MAX_CANONICAL_ORDER,
        });
    }
    let mut rows = [0u8; MAX_CANONICAL_ORDER];
    for &(u, v) in g.edges() {
        rows[u] |= 1 << v;
        rows[v] |= 1 << u;
    }
    Ok(code_from_rows(&rows[..n]))
}

/// Canonical code of the graph whose vertex `v` has neighbor bitmask `rows[v]`.
pub(crate) fn code_from_rows(rows: &[u8]) -> CanonicalCode {
    let n = rows.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = encode(rows, &perm);
    // Heap's algorithm, iterative form
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(encode(rows, &perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    CanonicalCode {
        order: n as u8,
        bits: best,
    }
}

// position i of the relabeled graph holds original vertex perm[i]
fn encode(rows: &[u8], perm: &[usize]) -> u32 {
    let n = perm.len();
    let mut bits = 0u32;
    for i in 0..n {
        let row = rows[perm[i]];
        for &pj in &perm[(i + 1)..n] {
            bits = (bits << 1) | u32::from((row >> pj) & 1);
        }
    }
    bits
}
