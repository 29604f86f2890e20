//! Train/test split, kernel SVM classification and accuracy.

use std::time::Instant;

use rand::seq::SliceRandom;

use crate::dataset::DatasetBundle;
use crate::error::{Error, Result};
use crate::estimator::GraphKernel;
use crate::graph::Graph;
use crate::seed::stream_rng;
use crate::spec::KernelSpec;
use crate::svm::OneVsOne;

/// Seeded shuffle; the test part has `round(n * fraction)` items clamped to `[1, n-1]`.
/// Both index lists are returned ascending.
pub fn train_test_split(
    n: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::spec(
            "n",
            format!("need at least 2 items to split, got {n}"),
        ));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::spec(
            "test_fraction",
            "must lie strictly between 0 and 1",
        ));
    }
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, "split"));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

pub fn accuracy<T: PartialEq>(truth: &[T], predicted: &[T]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::shape(
            format!("{} predictions", truth.len()),
            predicted.len().to_string(),
        ));
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub predicted: Vec<i64>,
    pub accuracy: f64,
    /// Wall-clock seconds per phase.
    pub timings: Vec<(&'static str, f64)>,
    /// Training graphs whose self-kernel is zero.
    pub zero_self_kernels: Vec<usize>,
    pub train_shape: (usize, usize),
    pub test_shape: (usize, usize),
}

/// Split, fit the kernel on the training graphs, transform the test graphs,
/// train one-vs-one SVMs and score the test predictions.
pub fn classify(
    data: &DatasetBundle,
    spec: &KernelSpec,
    test_fraction: f64,
    c: f64,
) -> Result<Classification> {
    let (train, test) = train_test_split(data.len(), test_fraction, spec.seed)?;
    let pick =
        |idx: &[usize]| -> Vec<Graph> { idx.iter().map(|&i| data.graphs[i].clone()).collect() };
    let (train_graphs, test_graphs) = (pick(&train), pick(&test));
    let mut timings = Vec::new();

    let clock = Instant::now();
    let kernel = GraphKernel::new(spec.clone())?;
    let (fitted, k_train) = kernel.fit_transform(&train_graphs)?;
    timings.push(("fit_transform", clock.elapsed().as_secs_f64()));

    let clock = Instant::now();
    let k_test = fitted.transform(&test_graphs)?;
    timings.push(("transform", clock.elapsed().as_secs_f64()));

    let clock = Instant::now();
    let y_train: Vec<i64> = train.iter().map(|&i| data.targets[i]).collect();
    let model = OneVsOne::fit(&k_train, &y_train, c)?;
    let predicted = model.predict(&k_test)?;
    timings.push(("svm", clock.elapsed().as_secs_f64()));

    let truth: Vec<i64> = test.iter().map(|&i| data.targets[i]).collect();
    let accuracy = accuracy(&truth, &predicted)?;
    Ok(Classification {
        zero_self_kernels: fitted
            .zero_self_kernels()
            .into_iter()
            .map(|i| train[i])
            .collect(),
        train_shape: k_train.shape(),
        test_shape: k_test.shape(),
        train,
        test,
        predicted,
        accuracy,
        timings,
    })
}

/// `accuracy: XX.XX %`
pub fn format_accuracy(accuracy: f64) -> String {
    format!("accuracy: {:.2} %", accuracy * 100.0)
}
