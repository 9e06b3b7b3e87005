//! Generalized entropy rational inattention (GERI).
//!
//! A decision maker facing a finite prior over payoff vectors chooses
//! state-dependent choice probabilities, paying an information cost built
//! from a generalized entropy. Each generator `S` of an additive random
//! utility model defines such an entropy, and the optimal behaviour coincides
//! with that random utility model evaluated at `v + log S(p0)`.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod generator;
pub mod primitives;
pub mod ri;

pub use error::{Error, Result};
pub use generator::Generator;
pub use primitives::{
    validate_simplex, FiniteChoiceProblem, NestStructure, ProbabilityVector, ValuationVector,
};
pub use ri::{solve_fixed_point, GeriSolution, SolverConfig};
