#![allow(dead_code)]

use std::path::PathBuf;

use gkl_core::graph::{Graph, Label};
use gkl_core::{KernelName, KernelSpec};
use proptest::prelude::*;
use rand::Rng;

/// Graph from an upper-triangle bit vector, with vertex and edge labels.
pub fn graph_from(
    n: usize,
    bits: &[bool],
    vertex_labels: &[Label],
    edge_labels: &[Label],
) -> Graph {
    let mut edges = Vec::new();
    let mut t = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            if bits[t] {
                edges.push((u, v));
            }
            t += 1;
        }
    }
    let m = edges.len();
    Graph::new(n, edges)
        .unwrap()
        .with_vertex_labels(vertex_labels[..n].to_vec())
        .unwrap()
        .with_aligned_edge_labels(edge_labels[..m].to_vec())
        .unwrap()
}

pub fn arb_graph(min_n: usize, max_n: usize, labels: Label) -> impl Strategy<Value = Graph> {
    (min_n..=max_n).prop_flat_map(move |n| {
        let pairs = n * n.saturating_sub(1) / 2;
        (
            Just(n),
            prop::collection::vec(any::<bool>(), pairs),
            prop::collection::vec(0..labels, n),
            prop::collection::vec(0..2 as Label, pairs),
        )
            .prop_map(|(n, bits, vl, el)| graph_from(n, &bits, &vl, &el))
    })
}

pub fn arb_collection(max_n: usize, max_len: usize) -> impl Strategy<Value = Vec<Graph>> {
    prop::collection::vec(arb_graph(1, max_n, 3), 1..=max_len)
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, labels: Label) -> Graph {
    let pairs = n * n.saturating_sub(1) / 2;
    let bits: Vec<bool> = (0..pairs).map(|_| rng.random_bool(p)).collect();
    let vl: Vec<Label> = (0..n).map(|_| rng.random_range(0..labels)).collect();
    let el: Vec<Label> = (0..pairs).map(|_| rng.random_range(0..2)).collect();
    graph_from(n, &bits, &vl, &el)
}

pub fn permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// One spec per kernel, with parameters that keep every random collection
/// used by the tests valid (random-walk lambda below 1/144).
pub fn all_specs() -> Vec<KernelSpec> {
    vec![
        KernelSpec::new(KernelName::VertexHistogram),
        KernelSpec::new(KernelName::EdgeHistogram),
        KernelSpec::new(KernelName::ShortestPath),
        KernelSpec::new(KernelName::GraphletSampling)
            .with("k", 4usize)
            .with("n_samples", 40usize)
            .seeded(7),
        KernelSpec::new(KernelName::RandomWalk).with("lambda", 0.005),
        KernelSpec::new(KernelName::WeisfeilerLehman).with("h", 3usize),
    ]
}

pub fn mutag_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG")
}
