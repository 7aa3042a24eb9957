//! Randomized sketching for least squares: leverage score sparsified (LESS)
//! embeddings alongside Gaussian, SRHT and row-sampling sketches, sketched
//! estimators with their reference error laws, and Monte Carlo diagnostics.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod leverage;
pub mod linalg;
pub mod rng;
pub mod sketch;

pub use data::{Dataset, SweepResult};
pub use diagnostics::TailReport;
pub use error::{Error, Result};
pub use estimators::{ConstrainedProblem, RegressionProblem};
pub use harness::{ExperimentConfig, Mode};
pub use leverage::LeverageProfile;
pub use linalg::{DenseMatrix, DenseVector, ThinQR};
pub use sketch::{SketchFamily, SketchSpec, SketchedPair};
