use thiserror::Error;

use crate::ri::GeriSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty vector")]
    EmptyVector,

    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entries sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state count mismatch: expected {expected}, found {found}")]
    StateCountMismatch { expected: usize, found: usize },

    #[error("invalid valuation at index {index}: {value}")]
    InvalidValuation { index: usize, value: f64 },

    #[error("every valuation is -inf")]
    AllMinusInfinity,

    #[error("nest {nest}: zeta = {zeta} outside [1e-6, 1]")]
    InvalidZeta { nest: usize, zeta: f64 },

    #[error("nests must partition 0..{n_options}: {reason}")]
    InvalidNests { n_options: usize, reason: String },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid solver config: {0}")]
    InvalidConfig(String),

    #[error("no option has positive unconditional probability and finite payoff")]
    AllOptionsExcluded,

    #[error("invalid choice set: {0}")]
    InvalidChoiceSet(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        partial: Box<GeriSolution>,
    },
}
