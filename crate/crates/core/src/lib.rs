//! Graph kernels with a fit/transform interface.

pub mod canon;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod features;
pub mod graph;
pub mod kernels;
pub mod matrix;
pub mod nystrom;
pub mod paths;
pub mod pipeline;
pub mod seed;
pub mod spec;
pub mod svm;
pub mod wl;

pub use error::{Error, ErrorClass, Result};
pub use estimator::{FittedKernel, GraphKernel};
pub use graph::{Graph, Label};
pub use matrix::{KernelMatrix, MatrixRole};
pub use spec::{KernelName, KernelSpec, ParamValue};
