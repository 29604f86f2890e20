//! Geometric random-walk kernel, `k(g, h) = 1' (I - lambda A_x)^-1 1` on the
//! direct product graph.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{direct_product, Graph};
use crate::matrix::{KernelMatrix, MatrixRole};

use super::{check_all, require_vertex_labels, FittedState, Kernel, Transformed};

const POWER_ITERATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    /// Geometric decay; must be positive.
    pub lambda: f64,
    pub match_labels: bool,
    /// `lambda * rho` must stay below this.
    pub spectral_margin: f64,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            lambda: 0.1,
            match_labels: false,
            spectral_margin: 0.99,
        }
    }
}

/// Power-iteration estimate of the adjacency spectral radius.
pub fn spectral_radius_estimate(g: &Graph) -> f64 {
    let n = g.order();
    if n == 0 || g.edge_count() == 0 {
        return 0.0;
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut norm = 0.0;
    for _ in 0..POWER_ITERATIONS {
        for (v, out) in y.iter_mut().enumerate() {
            *out = g.neighbors(v).iter().map(|&u| x[u]).sum();
        }
        norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for (a, b) in x.iter_mut().zip(&y) {
            *a = b / norm;
        }
    }
    norm
}

fn divergence_check(params: &WalkParams, rho: f64) -> Result<()> {
    if params.lambda * rho >= params.spectral_margin {
        return Err(Error::Divergent {
            lambda: params.lambda,
            rho,
            margin: params.spectral_margin,
            limit: params.spectral_margin / rho,
        });
    }
    Ok(())
}

pub fn random_walk_kernel_pair(g: &Graph, h: &Graph, params: &WalkParams) -> Result<f64> {
    pair_value(
        g,
        h,
        spectral_radius_estimate(g),
        spectral_radius_estimate(h),
        params,
    )
}

fn pair_value(g: &Graph, h: &Graph, rho_g: f64, rho_h: f64, params: &WalkParams) -> Result<f64> {
    // rho(A (x) A') = rho(A) rho(A'); the labeled product is a subgraph
    divergence_check(params, rho_g * rho_h)?;
    let product = direct_product(g, h, params.match_labels)?.graph;
    solve_walks(&product, params.lambda)
}

/// `1' (I - lambda A)^-1 1` for the adjacency `A` of `g`. The system is block
/// diagonal over connected components, and isolated vertices contribute 1.
fn solve_walks(g: &Graph, lambda: f64) -> Result<f64> {
    let n = g.order();
    let mut component = vec![usize::MAX; n];
    let mut total = 0.0;
    let mut stack = Vec::new();
    let mut members = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        if g.degree(start) == 0 {
            component[start] = start;
            total += 1.0;
            continue;
        }
        members.clear();
        component[start] = start;
        stack.push(start);
        while let Some(v) = stack.pop() {
            members.push(v);
            for &u in g.neighbors(v) {
                if component[u] == usize::MAX {
                    component[u] = start;
                    stack.push(u);
                }
            }
        }
        members.sort_unstable();
        total += solve_block(g, &members, lambda)?;
    }
    Ok(total)
}

fn solve_block(g: &Graph, members: &[usize], lambda: f64) -> Result<f64> {
    let s = members.len();
    let mut local = vec![usize::MAX; g.order()];
    for (i, &v) in members.iter().enumerate() {
        local[v] = i;
    }
    let mut m = DMatrix::<f64>::identity(s, s);
    for (i, &v) in members.iter().enumerate() {
        for &u in g.neighbors(v) {
            m[(i, local[u])] -= lambda;
        }
    }
    let x = m
        .lu()
        .solve(&DVector::from_element(s, 1.0))
        .ok_or_else(|| Error::Numerical("random walk system (I - lambda A) is singular".into()))?;
    Ok(x.sum())
}

#[derive(Debug, Clone, Default)]
pub struct RandomWalk {
    pub params: WalkParams,
}

impl RandomWalk {
    pub fn new(params: WalkParams) -> Result<Self> {
        if !(params.lambda > 0.0 && params.lambda.is_finite()) {
            return Err(Error::spec("lambda", "must be a positive real"));
        }
        if !(params.spectral_margin > 0.0 && params.spectral_margin <= 1.0) {
            return Err(Error::spec("spectral_margin", "must lie in (0, 1]"));
        }
        Ok(RandomWalk { params })
    }
}

impl Kernel for RandomWalk {
    fn name(&self) -> &'static str {
        "random_walk"
    }

    fn check(&self, index: usize, g: &Graph) -> Result<()> {
        if self.params.match_labels {
            require_vertex_labels("random_walk with match_labels=true", index, g)?;
        }
        Ok(())
    }

    fn fit(&self, graphs: &[Graph]) -> Result<Box<dyn FittedState>> {
        if graphs.is_empty() {
            return Err(Error::EmptyCollection);
        }
        check_all(self, graphs)?;
        let rho: Vec<f64> = graphs.par_iter().map(spectral_radius_estimate).collect();
        let worst = rho.iter().copied().fold(0.0, f64::max);
        divergence_check(&self.params, worst * worst)?;
        let diag = graphs
            .par_iter()
            .zip(&rho)
            .map(|(g, &r)| pair_value(g, g, r, r, &self.params))
            .collect::<Result<Vec<_>>>()?;
        Ok(Box::new(RandomWalkFit {
            graphs: graphs.to_vec(),
            rho,
            diag,
            params: self.params,
        }))
    }
}

struct RandomWalkFit {
    graphs: Vec<Graph>,
    rho: Vec<f64>,
    diag: Vec<f64>,
    params: WalkParams,
}

impl FittedState for RandomWalkFit {
    fn len(&self) -> usize {
        self.graphs.len()
    }

    fn matrix(&self) -> Result<KernelMatrix> {
        let n = self.graphs.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let values = pairs
            .par_iter()
            .map(|&(i, j)| {
                pair_value(
                    &self.graphs[i],
                    &self.graphs[j],
                    self.rho[i],
                    self.rho[j],
                    &self.params,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let mut k = KernelMatrix::zeros(n, n, MatrixRole::FitSquare);
        for (&(i, j), &x) in pairs.iter().zip(&values) {
            k.set(i, j, x);
            k.set(j, i, x);
        }
        for (i, &d) in self.diag.iter().enumerate() {
            k.set(i, i, d);
        }
        Ok(k)
    }

    fn self_kernels(&self) -> &[f64] {
        &self.diag
    }

    fn transform(&self, graphs: &[Graph]) -> Result<Transformed> {
        let kernel = RandomWalk {
            params: self.params,
        };
        check_all(&kernel, graphs)?;
        let rho: Vec<f64> = graphs.par_iter().map(spectral_radius_estimate).collect();
        let n = self.graphs.len();
        let values = (0..graphs.len() * n)
            .into_par_iter()
            .map(|idx| {
                let (q, f) = (idx / n, idx % n);
                pair_value(
                    &graphs[q],
                    &self.graphs[f],
                    rho[q],
                    self.rho[f],
                    &self.params,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let self_kernels = graphs
            .par_iter()
            .zip(&rho)
            .map(|(g, &r)| pair_value(g, g, r, r, &self.params))
            .collect::<Result<Vec<_>>>()?;
        Ok(Transformed {
            matrix: KernelMatrix::from_vec(graphs.len(), n, values, MatrixRole::Cross)?,
            self_kernels,
        })
    }
}
