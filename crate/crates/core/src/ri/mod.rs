//! Generalized-entropy rational inattention.
//!
//! A decision maker facing payoff states `v` with prior `μ` picks conditional
//! choice probabilities `p(v)` to maximise `E[p(V)·V] - κ_S(p)`, where the
//! information cost is
//!
//! ```text
//! κ_S(p) = Ω_S(E p(V)) - E Ω_S(p(V)),    Ω_S(q) = -q · log S(q).
//! ```
//!
//! The optimum is characterised by the unconditional probabilities `p0`:
//! conditionals are the random-utility choice probabilities at the shifted
//! payoffs `v + log S(p0)`, and `p0` is a fixed point of
//! `p0 = E q(V + log S(p0))`. The unit cost of information is fixed at one.

mod dominance;
mod equivalence;
mod solver;

pub use dominance::{
    check_dominance_exclusion, DominanceKind, DominanceReport, DominanceViolation,
};
pub use equivalence::{from_rum, to_equivalent_rum};
pub use solver::{solve_fixed_point, solve_fixed_point_symmetric, SolverConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::primitives::{FiniteChoiceProblem, ProbabilityVector, ValuationVector};

/// Solved GERI model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeriSolution {
    pub p0: ProbabilityVector,
    pub conditionals: Vec<ProbabilityVector>,
    pub info_cost: f64,
    /// `E W(V + log S(p0))`.
    pub objective: f64,
    pub consideration_set: Vec<usize>,
    pub iterations: usize,
    /// Sup-norm distance between `p0` and one application of the fixed-point map.
    pub residual: f64,
}

impl GeriSolution {
    /// Lists every solution invariant that fails on `problem`; `tolerance`
    /// bounds the admissible gap between `p0` and the mixture of conditionals.
    pub fn invariant_violations(
        &self,
        problem: &FiniteChoiceProblem,
        tolerance: f64,
    ) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.p0.len();
        if self.conditionals.len() != problem.n_states() {
            out.push(format!(
                "{} conditionals for {} states",
                self.conditionals.len(),
                problem.n_states()
            ));
            return out;
        }
        if n != problem.n_options() || self.conditionals.iter().any(|c| c.len() != n) {
            out.push("dimension mismatch".to_string());
            return out;
        }
        let mixed = mixture(problem.prior(), &self.conditionals);
        let gap = sup_distance(&mixed, self.p0.as_slice());
        if gap > tolerance {
            out.push(format!(
                "p0 differs from the mixture of conditionals by {gap:e}"
            ));
        }
        if self.consideration_set != self.p0.support_indices() {
            out.push("consideration set is not the support of p0".to_string());
        }
        for (m, c) in self.conditionals.iter().enumerate() {
            for i in 0..n {
                if self.p0[i] == 0.0 && c[i] != 0.0 {
                    out.push(format!(
                        "state {m}: option {i} has p0 = 0 but positive conditional"
                    ));
                }
            }
        }
        if self.residual.is_nan() || self.residual > tolerance {
            out.push(format!(
                "residual {:e} above tolerance {tolerance:e}",
                self.residual
            ));
        }
        if self.info_cost < -1e-12 {
            out.push(format!("negative information cost {}", self.info_cost));
        }
        out
    }
}

pub(crate) fn mixture(prior: &ProbabilityVector, conditionals: &[ProbabilityVector]) -> Vec<f64> {
    let n = conditionals.first().map_or(0, ProbabilityVector::len);
    let mut out = vec![0.0; n];
    for (&w, c) in prior.as_slice().iter().zip(conditionals) {
        for (o, &x) in out.iter_mut().zip(c.as_slice()) {
            *o += w * x;
        }
    }
    out
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_conditionals(
    gen: &Generator,
    problem: &FiniteChoiceProblem,
    conditionals: &[ProbabilityVector],
) -> Result<()> {
    if conditionals.len() != problem.n_states() {
        return Err(Error::StateCountMismatch {
            expected: problem.n_states(),
            found: conditionals.len(),
        });
    }
    gen.check_dimension(problem.n_options())?;
    for c in conditionals {
        if c.len() != problem.n_options() {
            return Err(Error::DimensionMismatch {
                expected: problem.n_options(),
                found: c.len(),
            });
        }
    }
    Ok(())
}

/// Information cost `κ_S = Ω_S(E p(V)) - E Ω_S(p(V))`.
pub fn information_cost(
    gen: &Generator,
    problem: &FiniteChoiceProblem,
    conditionals: &[ProbabilityVector],
) -> Result<f64> {
    check_conditionals(gen, problem, conditionals)?;
    let p0 = mixture(problem.prior(), conditionals);
    let expected: f64 = problem
        .prior()
        .as_slice()
        .iter()
        .zip(conditionals)
        .map(|(&w, c)| w * gen.conjugate_raw(c.as_slice()))
        .sum();
    Ok(-gen.conjugate_raw(&p0) - (-expected))
}

/// Expected payoff `E[p(V)·V]` of a set of conditionals; `-inf` payoffs carry
/// no weight where the conditional probability is zero.
pub fn expected_payoff(problem: &FiniteChoiceProblem, conditionals: &[ProbabilityVector]) -> f64 {
    problem
        .prior()
        .as_slice()
        .iter()
        .zip(problem.states().iter().zip(conditionals))
        .map(|(&w, (v, c))| w * dot_extended(c.as_slice(), v.as_slice()))
        .sum()
}

/// `p · x` with the convention `0 · (-inf) = 0`.
pub(crate) fn dot_extended(p: &[f64], x: &[f64]) -> f64 {
    p.iter()
        .zip(x)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(pi, xi)| pi * xi)
        .sum()
}

/// Shifted payoffs `v + log S(p0)`.
pub(crate) fn shifted(v: &[f64], log_s: &[f64]) -> Vec<f64> {
    v.iter().zip(log_s).map(|(a, b)| a + b).collect()
}

/// Conditional choice probabilities `p(v) = q(v + log S(p0))`.
pub fn conditional_probabilities(
    gen: &Generator,
    p0: &ProbabilityVector,
    v: &ValuationVector,
) -> Result<ProbabilityVector> {
    if p0.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: p0.len(),
            found: v.len(),
        });
    }
    gen.check_dimension(v.len())?;
    conditional_with_log_s(gen, &gen.log_s(p0.as_slice()), v.as_slice())
}

pub(crate) fn conditional_with_log_s(
    gen: &Generator,
    log_s: &[f64],
    v: &[f64],
) -> Result<ProbabilityVector> {
    let x = shifted(v, log_s);
    let mut out = vec![0.0; x.len()];
    if gen.choice_into(&x, &mut out) == f64::NEG_INFINITY {
        return Err(Error::AllOptionsExcluded);
    }
    Ok(ProbabilityVector::from_normalized(out))
}

/// Optimised value `E W(V + log S(p0))`.
pub fn optimized_value(
    gen: &Generator,
    problem: &FiniteChoiceProblem,
    p0: &ProbabilityVector,
) -> Result<f64> {
    if p0.len() != problem.n_options() {
        return Err(Error::DimensionMismatch {
            expected: problem.n_options(),
            found: p0.len(),
        });
    }
    gen.check_dimension(p0.len())?;
    let log_s = gen.log_s(p0.as_slice());
    let mut total = 0.0;
    for (&w, v) in problem.prior().as_slice().iter().zip(problem.states()) {
        if w == 0.0 {
            continue;
        }
        let surplus = gen.surplus_raw(&shifted(v.as_slice(), &log_s));
        if surplus == f64::NEG_INFINITY {
            return Err(Error::AllOptionsExcluded);
        }
        total += w * surplus;
    }
    Ok(total)
}
