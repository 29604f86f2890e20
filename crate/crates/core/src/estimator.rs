//! The fit/transform estimator: base kernel, optional cosine normalization,
//! optional Nystrom approximation, in that order.

use std::sync::Mutex;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::features::FeatureMap;
use crate::graph::Graph;
use crate::kernels::{FittedState, Kernel};
use crate::matrix::{normalize_matrix, KernelMatrix, MatrixRole};
use crate::nystrom::{embedding_gram, nystrom_embed, nystrom_fit, NystromState};
use crate::spec::{make_kernel, KernelSpec};

pub struct GraphKernel {
    spec: KernelSpec,
    kernel: Box<dyn Kernel>,
}

impl GraphKernel {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        let kernel = make_kernel(&spec)?;
        Ok(GraphKernel { spec, kernel })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn fit(&self, graphs: &[Graph]) -> Result<FittedKernel> {
        Ok(self.fit_inner(graphs, false)?.0)
    }

    pub fn fit_transform(&self, graphs: &[Graph]) -> Result<(FittedKernel, KernelMatrix)> {
        let (fitted, k) = self.fit_inner(graphs, true)?;
        Ok((fitted, k.expect("matrix requested")))
    }

    fn fit_inner(
        &self,
        graphs: &[Graph],
        want_matrix: bool,
    ) -> Result<(FittedKernel, Option<KernelMatrix>)> {
        let state = self.kernel.fit(graphs)?;
        let fit_diag = state.self_kernels().to_vec();
        let mut fitted = FittedKernel {
            spec: self.spec.clone(),
            state,
            fit_diag,
            nystrom: None,
            last_query: Mutex::new(None),
        };
        if !want_matrix && self.spec.nystrom_components.is_none() {
            return Ok((fitted, None));
        }
        let mut k = fitted.state.matrix()?;
        if self.spec.normalize {
            k = normalize_matrix(&k, &fitted.fit_diag, &fitted.fit_diag)?;
        }
        if let Some(q) = self.spec.nystrom_components {
            let ny = nystrom_fit(&k, q, self.spec.seed)?;
            let phi = nystrom_embed(&ny, &ny.landmark_columns(&k))?;
            k = embedding_gram(&phi, &phi, MatrixRole::FitSquare)?;
            fitted.nystrom = Some(FittedNystrom {
                state: ny,
                fit_embedding: phi,
            });
        }
        Ok((fitted, want_matrix.then_some(k)))
    }
}

struct FittedNystrom {
    state: NystromState,
    fit_embedding: DMatrix<f64>,
}

pub struct FittedKernel {
    spec: KernelSpec,
    state: Box<dyn FittedState>,
    fit_diag: Vec<f64>,
    nystrom: Option<FittedNystrom>,
    last_query: Mutex<Option<Vec<f64>>>,
}

impl FittedKernel {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Number of fitted graphs.
    pub fn len(&self) -> usize {
        self.fit_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fit_diag.is_empty()
    }

    /// Kernel of `graphs` (rows) against the fitted collection (columns).
    pub fn transform(&self, graphs: &[Graph]) -> Result<KernelMatrix> {
        let t = self.state.transform(graphs)?;
        let mut k = t.matrix;
        if self.spec.normalize {
            k = normalize_matrix(&k, &self.fit_diag, &t.self_kernels)?;
        }
        if let Some(ny) = &self.nystrom {
            let phi = nystrom_embed(&ny.state, &ny.state.landmark_columns(&k))?;
            k = embedding_gram(&phi, &ny.fit_embedding, MatrixRole::Cross)?;
        }
        *self.last_query.lock().expect("query diagonal lock") = Some(t.self_kernels);
        Ok(k)
    }

    /// Raw self-kernels of the fitted graphs, and of the most recent
    /// `transform` input if there was one.
    pub fn diagonal(&self) -> (Vec<f64>, Option<Vec<f64>>) {
        let query = self.last_query.lock().expect("query diagonal lock").clone();
        (self.fit_diag.clone(), query)
    }

    /// Fit indices whose self-kernel is zero; their normalized entries are 0.
    pub fn zero_self_kernels(&self) -> Vec<usize> {
        self.fit_diag
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Explicit feature maps, for kernels that have them.
    pub fn feature_maps(&self) -> Option<&[FeatureMap]> {
        self.state.feature_maps()
    }

    pub fn nystrom_landmarks(&self) -> Option<&[usize]> {
        self.nystrom.as_ref().map(|n| n.state.landmarks())
    }

    pub fn nystrom_rank(&self) -> Option<usize> {
        self.nystrom.as_ref().map(|n| n.state.rank())
    }
}
