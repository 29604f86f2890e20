//! Nystrom low-rank approximation of a fitted kernel matrix.
//!
//! With landmark block `W = U S U'`, the embedding of a graph whose kernel
//! values against the landmarks are `c` is `S_kept^{-1/2} U_kept' c`, and the
//! approximate kernel is the Gram matrix of embeddings, `C W^+ C'`.

use nalgebra::DMatrix;
use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::matrix::{KernelMatrix, MatrixRole};
use crate::seed::stream_rng;

/// Eigenvalues at or below this fraction of the largest are discarded.
pub const EIGEN_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct NystromState {
    landmarks: Vec<usize>,
    // rank x q
    coefficients: DMatrix<f64>,
}

impl NystromState {
    pub fn landmarks(&self) -> &[usize] {
        &self.landmarks
    }

    /// Embedding dimension (number of eigenpairs kept).
    pub fn rank(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    /// Landmark columns of a kernel matrix.
    pub fn landmark_columns(&self, k: &KernelMatrix) -> DMatrix<f64> {
        DMatrix::from_fn(k.rows(), self.landmarks.len(), |i, j| {
            k.get(i, self.landmarks[j])
        })
    }
}

/// Draws `q` landmarks uniformly without replacement and decomposes their block.
pub fn nystrom_fit(k_fit: &KernelMatrix, q: usize, seed: u64) -> Result<NystromState> {
    let n = k_fit.rows();
    if k_fit.cols() != n {
        return Err(Error::shape(
            "square fit matrix",
            format!("{}x{}", n, k_fit.cols()),
        ));
    }
    if q == 0 || q > n {
        return Err(Error::spec(
            "nystrom_components",
            format!("need 1 <= q <= {n}, got {q}"),
        ));
    }
    let mut landmarks = sample(&mut stream_rng(seed, "nystrom"), n, q).into_vec();
    landmarks.sort_unstable();
    nystrom_fit_landmarks(k_fit, landmarks)
}

/// Decomposition for a fixed landmark set.
pub fn nystrom_fit_landmarks(k_fit: &KernelMatrix, landmarks: Vec<usize>) -> Result<NystromState> {
    let q = landmarks.len();
    if let Some(&bad) = landmarks.iter().find(|&&l| l >= k_fit.rows()) {
        return Err(Error::spec(
            "landmarks",
            format!("index {bad} out of range"),
        ));
    }
    let w = DMatrix::from_fn(q, q, |i, j| {
        0.5 * (k_fit.get(landmarks[i], landmarks[j]) + k_fit.get(landmarks[j], landmarks[i]))
    });
    let eig = w.symmetric_eigen();
    let top = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(Error::DegenerateKernel(
            "landmark kernel block has no positive eigenvalue".into(),
        ));
    }
    let mut kept: Vec<usize> = (0..q)
        .filter(|&i| eig.eigenvalues[i] > EIGEN_CUTOFF * top)
        .collect();
    kept.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut coefficients = DMatrix::zeros(kept.len(), q);
    for (r, &i) in kept.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt().recip();
        for j in 0..q {
            coefficients[(r, j)] = eig.eigenvectors[(j, i)] * scale;
        }
    }
    Ok(NystromState {
        landmarks,
        coefficients,
    })
}

/// Rows of `k_to_landmarks` (m x q) mapped to the m x rank embedding.
pub fn nystrom_embed(state: &NystromState, k_to_landmarks: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if k_to_landmarks.ncols() != state.landmarks.len() {
        return Err(Error::shape(
            format!("{} columns", state.landmarks.len()),
            format!("{} columns", k_to_landmarks.ncols()),
        ));
    }
    Ok(k_to_landmarks * state.coefficients.transpose())
}

/// `left * right'` as a kernel matrix.
pub fn embedding_gram(
    left: &DMatrix<f64>,
    right: &DMatrix<f64>,
    role: MatrixRole,
) -> Result<KernelMatrix> {
    KernelMatrix::from_dmatrix(&(left * right.transpose()), role)
}
