//! Vertex- and edge-label histogram kernels.

use crate::error::{Error, Result};
use crate::features::{Dictionary, FeatureMap, KeyIndex};
use crate::graph::{Graph, Label};

use super::{require_vertex_labels, FeatureExtractor};

/// Label id -> number of vertices carrying it.
pub fn vertex_histogram_features(g: &Graph, dict: &mut impl KeyIndex<Label>) -> Result<FeatureMap> {
    let labels = g
        .vertex_labels()
        .ok_or_else(|| Error::incompatible(0, "vertex_histogram requires vertex labels"))?;
    Ok(FeatureMap::from_counts(
        labels.iter().map(|l| dict.index(l)),
    ))
}

/// Edge-label id -> number of (undirected) edges carrying it.
pub fn edge_histogram_features(g: &Graph, dict: &mut impl KeyIndex<Label>) -> Result<FeatureMap> {
    let labels = g
        .edge_labels()
        .ok_or_else(|| Error::incompatible(0, "edge_histogram requires edge labels"))?;
    Ok(FeatureMap::from_counts(
        labels.iter().map(|l| dict.index(l)),
    ))
}

#[derive(Debug, Clone, Default)]
pub struct VertexHistogram;

impl FeatureExtractor for VertexHistogram {
    type State = Dictionary<Label>;

    fn name(&self) -> &'static str {
        "vertex_histogram"
    }

    fn check(&self, index: usize, g: &Graph) -> Result<()> {
        require_vertex_labels(self.name(), index, g)
    }

    fn fit_features(&self, graphs: &[Graph]) -> Result<(Self::State, Vec<FeatureMap>)> {
        let mut dict = Dictionary::new();
        let maps = graphs
            .iter()
            .map(|g| vertex_histogram_features(g, &mut dict))
            .collect::<Result<_>>()?;
        Ok((dict, maps))
    }

    fn transform_features(&self, state: &Self::State, graphs: &[Graph]) -> Result<Vec<FeatureMap>> {
        let mut frozen = state.frozen();
        graphs
            .iter()
            .map(|g| vertex_histogram_features(g, &mut frozen))
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct EdgeHistogram;

impl FeatureExtractor for EdgeHistogram {
    type State = Dictionary<Label>;

    fn name(&self) -> &'static str {
        "edge_histogram"
    }

    fn check(&self, index: usize, g: &Graph) -> Result<()> {
        if g.edge_labels().is_none() {
            return Err(Error::incompatible(
                index,
                "edge_histogram requires edge labels",
            ));
        }
        Ok(())
    }

    fn fit_features(&self, graphs: &[Graph]) -> Result<(Self::State, Vec<FeatureMap>)> {
        let mut dict = Dictionary::new();
        let maps = graphs
            .iter()
            .map(|g| edge_histogram_features(g, &mut dict))
            .collect::<Result<_>>()?;
        Ok((dict, maps))
    }

    fn transform_features(&self, state: &Self::State, graphs: &[Graph]) -> Result<Vec<FeatureMap>> {
        let mut frozen = state.frozen();
        graphs
            .iter()
            .map(|g| edge_histogram_features(g, &mut frozen))
            .collect()
    }
}
