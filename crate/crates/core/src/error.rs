use std::io;

use thiserror::Error;

/// Errors produced by the sketching, estimation and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is rank deficient (column {column}, |r_jj| = {pivot:e})")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("rank-one update is singular (1 + v^T A^-1 u = {denominator:e})")]
    SingularUpdate { denominator: f64 },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid sampling distribution: {0}")]
    InvalidDistribution(String),

    #[error("sketch size {n} exceeds padded input size {padded}")]
    SketchTooLarge { n: usize, padded: usize },

    #[error("sketch size {n} too small for dimension {d} (need n >= d + 2)")]
    SketchTooSmall { n: usize, d: usize },

    #[error("sketched matrix stayed rank deficient after {attempts} draws")]
    RankDeficientSketch { attempts: usize },

    #[error("sketch row {row} has leverage {leverage} >= 1")]
    LeverageAtOne { row: usize, leverage: f64 },

    #[error("solver did not converge in {iterations} iterations (mapping norm {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension {d} exceeds brute-force limit {limit}")]
    DimensionTooLarge { d: usize, limit: usize },

    #[error("target {target} outside the admissible range (0, {upper}))")]
    OutOfRange { target: f64, upper: f64 },

    #[error("point {0} has zero norm")]
    ZeroVector(usize),

    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("index error on line {line}: {message}")]
    Index { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dataset is degenerate: optimal loss is zero")]
    DegenerateDataset,

    #[error("no results to plot")]
    EmptyResults,

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
