//! Graphlet kernel: counts of induced k-vertex subgraphs by isomorphism class.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::canon::{code_from_rows, CanonicalCode};
use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::graph::Graph;
use crate::seed::graph_rng;

use super::FeatureExtractor;

/// Every isomorphism class of simple graphs on `k` vertices, indexed by the
/// order in which edge-subset enumeration first reaches it.
#[derive(Debug, Clone)]
pub struct GraphletTable {
    k: usize,
    classes: Vec<CanonicalCode>,
    // edge subset bitmask -> class index
    mask_class: Vec<u16>,
}

impl GraphletTable {
    pub fn new(k: usize) -> Result<Self> {
        if !(3..=5).contains(&k) {
            return Err(Error::spec(
                "k",
                format!("graphlet size must be 3, 4 or 5, got {k}"),
            ));
        }
        let pairs = pair_list(k);
        let mut classes: Vec<CanonicalCode> = Vec::new();
        let mut mask_class = Vec::with_capacity(1 << pairs.len());
        for mask in 0u32..(1 << pairs.len()) {
            let mut rows = [0u8; 5];
            for (p, &(i, j)) in pairs.iter().enumerate() {
                if mask & (1 << p) != 0 {
                    rows[i] |= 1 << j;
                    rows[j] |= 1 << i;
                }
            }
            let code = code_from_rows(&rows[..k]);
            let class = match classes.iter().position(|&c| c == code) {
                Some(c) => c,
                None => {
                    classes.push(code);
                    classes.len() - 1
                }
            };
            mask_class.push(class as u16);
        }
        Ok(GraphletTable {
            k,
            classes,
            mask_class,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn classes(&self) -> &[CanonicalCode] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of_code(&self, code: &CanonicalCode) -> Option<usize> {
        self.classes.iter().position(|c| c == code)
    }

    /// Class of the subgraph induced by `subset` (exactly `k` vertices).
    fn class_of(&self, adj: &DenseAdjacency, subset: &[usize]) -> usize {
        let mut mask = 0usize;
        let mut p = 0;
        for i in 0..subset.len() {
            for j in (i + 1)..subset.len() {
                if adj.has(subset[i], subset[j]) {
                    mask |= 1 << p;
                }
                p += 1;
            }
        }
        self.mask_class[mask] as usize
    }
}

pub fn build_graphlet_table(k: usize) -> Result<GraphletTable> {
    GraphletTable::new(k)
}

fn pair_list(k: usize) -> Vec<(usize, usize)> {
    (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .collect()
}

struct DenseAdjacency {
    n: usize,
    bits: Vec<bool>,
}

impl DenseAdjacency {
    fn new(g: &Graph) -> Self {
        let n = g.order();
        let mut bits = vec![false; n * n];
        for &(u, v) in g.edges() {
            bits[u * n + v] = true;
            bits[v * n + u] = true;
        }
        DenseAdjacency { n, bits }
    }

    fn has(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.n + v]
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphletMode {
    /// Enumerate when `C(n, k) <= 2 * samples`, sample otherwise.
    Auto,
    Exhaustive,
    Sampled,
}

/// Class-count feature map of `g`. Sampled counts are scaled by
/// `C(n, k) / samples` so both modes estimate the same quantity.
pub fn graphlet_features<R: Rng>(
    g: &Graph,
    table: &GraphletTable,
    samples: usize,
    mode: GraphletMode,
    rng: &mut R,
) -> Result<FeatureMap> {
    let (n, k) = (g.order(), table.k());
    if n < k {
        return Ok(FeatureMap::new());
    }
    let total = binomial(n, k);
    let exhaustive = match mode {
        GraphletMode::Exhaustive => true,
        GraphletMode::Sampled => false,
        GraphletMode::Auto => total <= 2 * samples as u64,
    };
    let adj = DenseAdjacency::new(g);
    if exhaustive {
        let mut counts = vec![0.0; table.len()];
        for_each_combination(n, k, |subset| counts[table.class_of(&adj, subset)] += 1.0);
        return Ok(FeatureMap::from_pairs(counts.into_iter().enumerate()));
    }
    if samples == 0 {
        return Err(Error::spec(
            "n_samples",
            "sampled mode needs at least one sample",
        ));
    }
    let mut counts = vec![0.0; table.len()];
    let mut subset = Vec::with_capacity(k);
    for _ in 0..samples {
        subset.clear();
        subset.extend(sample(rng, n, k).iter());
        subset.sort_unstable();
        counts[table.class_of(&adj, &subset)] += 1.0;
    }
    Ok(
        FeatureMap::from_pairs(counts.into_iter().enumerate())
            .scaled(total as f64 / samples as f64),
    )
}

fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // rightmost position that can still advance
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Debug, Clone)]
pub struct GraphletKernel {
    pub table: Arc<GraphletTable>,
    pub samples: usize,
    pub mode: GraphletMode,
    pub seed: u64,
}

impl GraphletKernel {
    pub fn new(k: usize, samples: usize, mode: GraphletMode, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::spec("n_samples", "must be positive"));
        }
        Ok(GraphletKernel {
            table: Arc::new(GraphletTable::new(k)?),
            samples,
            mode,
            seed,
        })
    }

    fn maps(&self, graphs: &[Graph]) -> Result<Vec<FeatureMap>> {
        graphs
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                let mut rng = graph_rng(self.seed, i);
                graphlet_features(g, &self.table, self.samples, self.mode, &mut rng)
            })
            .collect()
    }
}

impl FeatureExtractor for GraphletKernel {
    type State = ();

    fn name(&self) -> &'static str {
        "graphlet_sampling"
    }

    fn check(&self, _index: usize, _g: &Graph) -> Result<()> {
        Ok(())
    }

    fn fit_features(&self, graphs: &[Graph]) -> Result<((), Vec<FeatureMap>)> {
        Ok(((), self.maps(graphs)?))
    }

    fn transform_features(&self, _state: &(), graphs: &[Graph]) -> Result<Vec<FeatureMap>> {
        self.maps(graphs)
    }
}
