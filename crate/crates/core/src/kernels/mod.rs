//! Base graph kernels and the traits every kernel implements.
//!
//! A [`Kernel`] turns a fit collection into a [`FittedState`], which can then
//! produce the fit Gram matrix, the self-kernels, and cross matrices against
//! new graphs. Kernels with an explicit feature map implement the simpler
//! [`FeatureExtractor`] and are lifted to [`Kernel`] by [`Explicit`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::graph::Graph;
use crate::matrix::{KernelMatrix, MatrixRole};

pub mod graphlet;
pub mod histogram;
pub mod random_walk;
pub mod shortest_path;

pub use graphlet::{GraphletKernel, GraphletMode, GraphletTable};
pub use histogram::{EdgeHistogram, VertexHistogram};
pub use random_walk::{RandomWalk, WalkParams};
pub use shortest_path::ShortestPath;

/// Cross matrix of a transform call with the query self-kernels.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub matrix: KernelMatrix,
    pub self_kernels: Vec<f64>,
}

pub trait Kernel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Fails with `IncompatibleInput` naming `index` when `g` does not meet
    /// this kernel's requirements.
    fn check(&self, index: usize, g: &Graph) -> Result<()>;

    /// Extracts features from (or retains) the fit collection.
    fn fit(&self, graphs: &[Graph]) -> Result<Box<dyn FittedState>>;
}

/// Immutable post-fit state of a kernel.
pub trait FittedState: Send + Sync {
    /// Size of the fit collection.
    fn len(&self) -> usize;

    /// `n x n` kernel matrix over the fit collection.
    fn matrix(&self) -> Result<KernelMatrix>;

    /// `k(g_i, g_i)` for the fit collection.
    fn self_kernels(&self) -> &[f64];

    /// `m x n` matrix of `graphs` against the fit collection.
    fn transform(&self, graphs: &[Graph]) -> Result<Transformed>;

    /// Per-graph feature maps, for explicit-feature kernels.
    fn feature_maps(&self) -> Option<&[FeatureMap]> {
        None
    }
}

pub(crate) fn check_all(kernel: &dyn Kernel, graphs: &[Graph]) -> Result<()> {
    graphs
        .iter()
        .enumerate()
        .try_for_each(|(i, g)| kernel.check(i, g))
}

/// A kernel defined as the dot product of explicit feature maps.
pub trait FeatureExtractor: Send + Sync + 'static {
    /// Dictionaries fixed at fit time.
    type State: Send + Sync + 'static;

    fn name(&self) -> &'static str;

    fn check(&self, index: usize, g: &Graph) -> Result<()>;

    /// Builds the dictionaries and the fit-side feature maps. Ids must be
    /// assigned in input order so the result is independent of scheduling.
    fn fit_features(&self, graphs: &[Graph]) -> Result<(Self::State, Vec<FeatureMap>)>;

    /// Feature maps of query graphs against frozen dictionaries.
    fn transform_features(&self, state: &Self::State, graphs: &[Graph]) -> Result<Vec<FeatureMap>>;
}

/// Lifts a [`FeatureExtractor`] to a [`Kernel`].
#[derive(Debug, Clone)]
pub struct Explicit<E>(pub E);

impl<E: FeatureExtractor + Clone> Kernel for Explicit<E> {
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn check(&self, index: usize, g: &Graph) -> Result<()> {
        self.0.check(index, g)
    }

    fn fit(&self, graphs: &[Graph]) -> Result<Box<dyn FittedState>> {
        if graphs.is_empty() {
            return Err(Error::EmptyCollection);
        }
        check_all(self, graphs)?;
        let (state, maps) = self.0.fit_features(graphs)?;
        let diag = maps.iter().map(FeatureMap::squared_norm).collect();
        Ok(Box::new(ExplicitFit {
            extractor: self.0.clone(),
            state,
            maps,
            diag,
        }))
    }
}

struct ExplicitFit<E: FeatureExtractor> {
    extractor: E,
    state: E::State,
    maps: Vec<FeatureMap>,
    diag: Vec<f64>,
}

impl<E: FeatureExtractor> FittedState for ExplicitFit<E> {
    fn len(&self) -> usize {
        self.maps.len()
    }

    fn matrix(&self) -> Result<KernelMatrix> {
        Ok(gram(&self.maps))
    }

    fn self_kernels(&self) -> &[f64] {
        &self.diag
    }

    fn transform(&self, graphs: &[Graph]) -> Result<Transformed> {
        graphs
            .iter()
            .enumerate()
            .try_for_each(|(i, g)| self.extractor.check(i, g))?;
        let queries = self.extractor.transform_features(&self.state, graphs)?;
        Ok(Transformed {
            matrix: cross(&queries, &self.maps),
            self_kernels: queries.iter().map(FeatureMap::squared_norm).collect(),
        })
    }

    fn feature_maps(&self) -> Option<&[FeatureMap]> {
        Some(&self.maps)
    }
}

/// Gram matrix of feature maps; rows are computed in parallel and mirrored.
pub fn gram(maps: &[FeatureMap]) -> KernelMatrix {
    let n = maps.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| maps[i].dot(&maps[j])).collect())
        .collect();
    KernelMatrix::symmetric_from_fn(n, |i, j| upper[i][j - i])
}

/// Cross matrix `queries x fit` of feature maps.
pub fn cross(queries: &[FeatureMap], fit: &[FeatureMap]) -> KernelMatrix {
    let values: Vec<f64> = queries
        .par_iter()
        .flat_map_iter(|q| fit.iter().map(move |f| q.dot(f)))
        .collect();
    KernelMatrix::from_vec(queries.len(), fit.len(), values, MatrixRole::Cross)
        .expect("cross matrix shape")
}

pub(crate) fn require_vertex_labels(kernel: &str, index: usize, g: &Graph) -> Result<()> {
    if g.vertex_labels().is_none() {
        return Err(Error::incompatible(
            index,
            format!("{kernel} requires vertex labels"),
        ));
    }
    Ok(())
}
