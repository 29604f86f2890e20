//! Soft-margin SVM on a precomputed kernel, trained by SMO.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::KernelMatrix;

pub const DEFAULT_C: f64 = 1.0;
pub const TOLERANCE: f64 = 1e-3;
pub const MAX_ITERATIONS: usize = 100_000;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    alpha: Vec<f64>,
    y: Vec<f64>,
    bias: f64,
    c: f64,
    iterations: usize,
}

fn check_labels(y: &[f64]) -> Result<()> {
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::spec(
            "labels",
            format!("binary labels must be +1 or -1, got {bad}"),
        ));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::spec("labels", "both classes must be present"));
    }
    Ok(())
}

/// Trains on an n x n kernel with labels in {-1, +1}.
pub fn svm_train(k: &KernelMatrix, y: &[f64], c: f64) -> Result<SvmModel> {
    let n = y.len();
    if k.shape() != (n, n) {
        return Err(Error::shape(
            format!("{n}x{n} training kernel"),
            format!("{}x{}", k.rows(), k.cols()),
        ));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::spec("C", "must be a positive real"));
    }
    check_labels(y)?;
    k.check_psd()?;
    let q = |i: usize, j: usize| y[i] * y[j] * k.get(i, j);

    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a'Qa - e'a
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    loop {
        let up = |t: usize| {
            if y[t] > 0.0 {
                alpha[t] < c
            } else {
                alpha[t] > 0.0
            }
        };
        let low = |t: usize| {
            if y[t] > 0.0 {
                alpha[t] > 0.0
            } else {
                alpha[t] < c
            }
        };
        let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut i = usize::MAX;
        for t in 0..n {
            if up(t) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        // partner of the maximal violator: largest second-order gain
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..n {
                if !low(t) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let quad = (k.get(i, i) + k.get(t, t) - 2.0 * k.get(i, t)).max(TAU);
                    let gain = -b * b / quad;
                    if gain < best {
                        best = gain;
                        j = t;
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < TOLERANCE {
            break;
        }
        if iterations == MAX_ITERATIONS {
            return Err(Error::Numerical(format!(
                "SMO did not reach KKT tolerance {TOLERANCE} within {MAX_ITERATIONS} iterations"
            )));
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (qii, qjj, qij) = (q(i, i), q(j, j), q(i, j));
        if y[i] != y[j] {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }

    // bias: average over free vectors, else midpoint of the feasible interval
    let (mut upper, mut lower) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                upper = upper.min(yg)
            } else {
                lower = lower.max(yg)
            }
        } else if at_lower {
            if y[t] > 0.0 {
                upper = upper.min(yg)
            } else {
                lower = lower.max(yg)
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        0.5 * (upper + lower)
    };
    Ok(SvmModel {
        alpha,
        y: y.to_vec(),
        bias: -rho,
        c,
        iterations,
    })
}

impl SvmModel {
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.alpha.len())
            .filter(|&i| self.alpha[i] > 0.0)
            .collect()
    }

    /// `f(q) = sum_j alpha_j y_j K(q, t_j) + b` for each query row.
    pub fn decision_values(&self, k_query: &KernelMatrix) -> Result<Vec<f64>> {
        if k_query.cols() != self.alpha.len() {
            return Err(Error::shape(
                format!("{} columns", self.alpha.len()),
                format!("{} columns", k_query.cols()),
            ));
        }
        let support = self.support();
        Ok((0..k_query.rows())
            .map(|r| {
                let row = k_query.row(r);
                support
                    .iter()
                    .map(|&j| self.alpha[j] * self.y[j] * row[j])
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }

    /// Labels in {-1, +1}; a zero decision value maps to +1.
    pub fn predict(&self, k_query: &KernelMatrix) -> Result<Vec<f64>> {
        Ok(self
            .decision_values(k_query)?
            .into_iter()
            .map(|f| if f >= 0.0 { 1.0 } else { -1.0 })
            .collect())
    }

    /// `sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`.
    pub fn dual_objective(&self, k_train: &KernelMatrix) -> f64 {
        dual_objective(k_train, &self.y, &self.alpha)
    }

    /// Largest violation of the KKT conditions on the training kernel.
    pub fn kkt_violation(&self, k_train: &KernelMatrix) -> Result<f64> {
        let f = self.decision_values(k_train)?;
        let mut worst: f64 = 0.0;
        for (t, &ft) in f.iter().enumerate() {
            let m = self.y[t] * ft;
            let v = if self.alpha[t] <= 0.0 {
                (1.0 - m).max(0.0)
            } else if self.alpha[t] >= self.c {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            };
            worst = worst.max(v);
        }
        Ok(worst)
    }
}

pub fn dual_objective(k: &KernelMatrix, y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k.get(i, j);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Pairwise ensemble for any number of classes.
#[derive(Debug, Clone)]
pub struct OneVsOne {
    classes: Vec<i64>,
    // (lower class index, upper class index, training rows, model)
    models: Vec<(usize, usize, Vec<usize>, SvmModel)>,
}

impl OneVsOne {
    /// In each pair the smaller class id is the -1 side.
    pub fn fit(k: &KernelMatrix, labels: &[i64], c: f64) -> Result<Self> {
        let n = labels.len();
        if k.shape() != (n, n) {
            return Err(Error::shape(
                format!("{n}x{n} training kernel"),
                format!("{}x{}", k.rows(), k.cols()),
            ));
        }
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::spec("labels", "both classes must be present"));
        }
        let pairs: Vec<(usize, usize)> = (0..classes.len())
            .flat_map(|a| ((a + 1)..classes.len()).map(move |b| (a, b)))
            .collect();
        let models = pairs
            .par_iter()
            .map(|&(a, b)| {
                let rows: Vec<usize> = (0..n)
                    .filter(|&i| labels[i] == classes[a] || labels[i] == classes[b])
                    .collect();
                let sub = k.submatrix(&rows, &rows, crate::matrix::MatrixRole::FitSquare)?;
                let y: Vec<f64> = rows
                    .iter()
                    .map(|&i| if labels[i] == classes[a] { -1.0 } else { 1.0 })
                    .collect();
                Ok((a, b, rows.clone(), svm_train(&sub, &y, c)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OneVsOne { classes, models })
    }

    pub fn classes(&self) -> &[i64] {
        &self.classes
    }

    pub fn models(&self) -> impl Iterator<Item = &SvmModel> {
        self.models.iter().map(|(_, _, _, m)| m)
    }

    /// Majority vote; ties go to the smallest class id.
    pub fn predict(&self, k_query: &KernelMatrix) -> Result<Vec<i64>> {
        let n_train = self
            .models
            .iter()
            .flat_map(|(_, _, rows, _)| rows.iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        if k_query.cols() < n_train {
            return Err(Error::shape(
                format!("at least {n_train} columns"),
                format!("{} columns", k_query.cols()),
            ));
        }
        let all: Vec<usize> = (0..k_query.rows()).collect();
        let mut votes = vec![vec![0usize; self.classes.len()]; k_query.rows()];
        for (a, b, rows, model) in &self.models {
            let sub = k_query.submatrix(&all, rows, crate::matrix::MatrixRole::Cross)?;
            for (v, p) in votes.iter_mut().zip(model.predict(&sub)?) {
                v[if p > 0.0 { *b } else { *a }] += 1;
            }
        }
        Ok(votes
            .iter()
            .map(|v| {
                let best = v.iter().copied().max().unwrap_or(0);
                self.classes[v.iter().position(|&x| x == best).unwrap_or(0)]
            })
            .collect())
    }
}
