//! Shortest-path kernel: counts of (endpoint label pair, hop distance).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{Dictionary, FeatureMap, KeyIndex};
use crate::graph::{Graph, Label};
use crate::paths::{floyd_warshall, DistanceMatrix};

use super::FeatureExtractor;

/// `(smaller label id, larger label id, distance)`; distance is at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpTriple {
    pub low: usize,
    pub high: usize,
    pub distance: u32,
}

impl SpTriple {
    pub fn new(a: usize, b: usize, distance: u32) -> Self {
        SpTriple {
            low: a.min(b),
            high: a.max(b),
            distance,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SpDictionaries {
    pub labels: Dictionary<Label>,
    pub triples: Dictionary<SpTriple>,
}

/// Feature map of `g` over [`SpTriple`] ids. Without labels every vertex
/// carries the same implicit label.
pub fn shortest_path_features(
    g: &Graph,
    labels: &mut impl KeyIndex<Label>,
    triples: &mut impl KeyIndex<SpTriple>,
    with_labels: bool,
) -> Result<FeatureMap> {
    features_from_distances(g, &floyd_warshall(g), labels, triples, with_labels)
}

fn features_from_distances(
    g: &Graph,
    dist: &DistanceMatrix,
    labels: &mut impl KeyIndex<Label>,
    triples: &mut impl KeyIndex<SpTriple>,
    with_labels: bool,
) -> Result<FeatureMap> {
    let ids: Vec<usize> = if with_labels {
        let raw = g.vertex_labels().ok_or_else(|| {
            Error::incompatible(0, "shortest_path with labels requires vertex labels")
        })?;
        raw.iter().map(|l| labels.index(l)).collect()
    } else {
        vec![0; g.order()]
    };
    let dims: Vec<usize> = dist
        .reachable_pairs()
        .map(|(u, v, d)| triples.index(&SpTriple::new(ids[u], ids[v], d)))
        .collect();
    Ok(FeatureMap::from_counts(dims))
}

#[derive(Debug, Clone)]
pub struct ShortestPath {
    pub with_labels: bool,
}

impl Default for ShortestPath {
    fn default() -> Self {
        ShortestPath { with_labels: true }
    }
}

impl ShortestPath {
    fn maps(
        &self,
        graphs: &[Graph],
        labels: &mut impl KeyIndex<Label>,
        triples: &mut impl KeyIndex<SpTriple>,
    ) -> Result<Vec<FeatureMap>> {
        let distances: Vec<DistanceMatrix> = graphs.par_iter().map(floyd_warshall).collect();
        graphs
            .iter()
            .zip(&distances)
            .map(|(g, d)| features_from_distances(g, d, labels, triples, self.with_labels))
            .collect()
    }
}

impl FeatureExtractor for ShortestPath {
    type State = SpDictionaries;

    fn name(&self) -> &'static str {
        "shortest_path"
    }

    fn check(&self, index: usize, g: &Graph) -> Result<()> {
        if self.with_labels && g.vertex_labels().is_none() {
            return Err(Error::incompatible(
                index,
                "shortest_path with with_labels=true requires vertex labels",
            ));
        }
        Ok(())
    }

    fn fit_features(&self, graphs: &[Graph]) -> Result<(Self::State, Vec<FeatureMap>)> {
        let mut dicts = SpDictionaries::default();
        if self.with_labels {
            for g in graphs {
                for l in g.vertex_labels().unwrap_or_default() {
                    dicts.labels.index(l);
                }
            }
        }
        let SpDictionaries { labels, triples } = &mut dicts;
        let maps = self.maps(graphs, labels, triples)?;
        Ok((dicts, maps))
    }

    fn transform_features(&self, state: &Self::State, graphs: &[Graph]) -> Result<Vec<FeatureMap>> {
        let mut labels = state.labels.frozen();
        let mut triples = state.triples.frozen();
        self.maps(graphs, &mut labels, &mut triples)
    }
}
