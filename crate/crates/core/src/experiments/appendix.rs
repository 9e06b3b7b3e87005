//! Four options, three equiprobable states; shows an empty-in-the-middle
//! consideration set and a violation of regularity when option 4 is added.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::primitives::{FiniteChoiceProblem, ValuationVector};
use crate::ri::{solve_fixed_point, GeriSolution, SolverConfig};

/// Payoffs of options 1..4 in states v¹, v², v³.
pub const APPENDIX_STATES: [[f64; 4]; 3] = [
    [2.0, 1.0, 3.0, 2.0],
    [3.0, 2.0, 1.0, 4.0],
    [3.0, 2.0, 3.0, 2.0],
];

pub fn appendix_problem() -> FiniteChoiceProblem {
    let states = APPENDIX_STATES
        .iter()
        .map(|s| ValuationVector::new(s.to_vec()).expect("finite payoffs"))
        .collect();
    FiniteChoiceProblem::uniform(states).expect("three equiprobable states")
}

/// Nests {1,2} with ζ = 0.7 and {3,4} with ζ = 0.8 (zero-based {0,1}, {2,3}).
pub fn appendix_nested_generator() -> Generator {
    Generator::nested_logit(vec![vec![0, 1], vec![2, 3]], vec![0.7, 0.8]).expect("valid nests")
}

/// Solves the appendix problem restricted to `choice_set` (zero-based option
/// indices, increasing).
pub fn run_appendix_example(
    gen: &Generator,
    choice_set: &[usize],
    solver: &SolverConfig,
) -> Result<GeriSolution> {
    if choice_set.is_empty() {
        return Err(Error::InvalidChoiceSet("choice set is empty".into()));
    }
    if choice_set.iter().any(|&i| i >= 4) {
        return Err(Error::InvalidChoiceSet(format!(
            "{choice_set:?} is not a subset of options 0..4"
        )));
    }
    if choice_set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidChoiceSet(format!(
            "{choice_set:?} must be strictly increasing"
        )));
    }
    gen.check_dimension(4).map_err(|e| {
        Error::InvalidChoiceSet(format!("generator does not cover the four options: {e}"))
    })?;
    let problem = appendix_problem().restrict(choice_set)?;
    let gen = gen.restrict(choice_set)?;
    solve_fixed_point(&gen, &problem, solver)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityIncrease {
    pub option: usize,
    pub before: f64,
    pub after: f64,
    pub increase: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RegularityReport {
    pub increases: Vec<RegularityIncrease>,
}

/// Threshold below which a change in `p0` is not reported.
pub const REGULARITY_SLACK: f64 = 1e-6;

/// Options whose unconditional probability rose after enlarging the choice
/// set. The options of `small` must be the leading options of `full`.
pub fn regularity_check(small: &GeriSolution, full: &GeriSolution) -> Result<RegularityReport> {
    let (k, n) = (small.p0.len(), full.p0.len());
    if k > n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k,
        });
    }
    let increases = (0..k)
        .filter_map(|i| {
            let (before, after) = (small.p0[i], full.p0[i]);
            (after - before > REGULARITY_SLACK).then_some(RegularityIncrease {
                option: i,
                before,
                after,
                increase: after - before,
            })
        })
        .collect();
    Ok(RegularityReport { increases })
}
