//! Consideration-set exclusion checks.
//!
//! An option that is weakly worst in every state (strictly in some state of
//! positive prior mass) is never considered. Under Shannon entropy any option
//! weakly dominated by a single other option is excluded as well.

use serde::Serialize;

use super::GeriSolution;
use crate::generator::Generator;
use crate::primitives::FiniteChoiceProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DominanceKind {
    /// Weakly below every other option in every state.
    WorstEverywhere,
    /// Weakly below option `by` in every state (Shannon only).
    DominatedBy { by: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceViolation {
    pub option: usize,
    pub p0: f64,
    pub kind: DominanceKind,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DominanceReport {
    /// Options the exclusion results would exclude.
    pub excluded: Vec<usize>,
    /// Excluded options that are nevertheless in the consideration set.
    pub violations: Vec<DominanceViolation>,
}

impl DominanceReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `a` is weakly below `b` in every state and strictly below in one that has
/// positive prior mass.
fn dominated(problem: &FiniteChoiceProblem, a: usize, b: usize) -> (bool, bool) {
    let mut weak = true;
    let mut strict = false;
    for (&w, v) in problem.prior().as_slice().iter().zip(problem.states()) {
        if w == 0.0 {
            continue;
        }
        if v[a] > v[b] {
            weak = false;
            break;
        }
        if v[a] < v[b] {
            strict = true;
        }
    }
    (weak, strict)
}

pub fn check_dominance_exclusion(
    solution: &GeriSolution,
    problem: &FiniteChoiceProblem,
    gen: &Generator,
) -> DominanceReport {
    let n = problem.n_options();
    let considered = |a: usize| solution.consideration_set.contains(&a);
    let mut report = DominanceReport::default();
    for a in 0..n {
        let others: Vec<(bool, bool)> = (0..n)
            .filter(|&b| b != a)
            .map(|b| dominated(problem, a, b))
            .collect();
        let worst = n > 1
            && others.iter().all(|&(weak, _)| weak)
            && others.iter().any(|&(_, strict)| strict);
        let mut kind = worst.then_some(DominanceKind::WorstEverywhere);
        if kind.is_none() && matches!(gen, Generator::Shannon) {
            kind = (0..n)
                .filter(|&b| b != a)
                .find(|&b| dominated(problem, a, b) == (true, true))
                .map(|by| DominanceKind::DominatedBy { by });
        }
        if let Some(kind) = kind {
            report.excluded.push(a);
            if considered(a) {
                report.violations.push(DominanceViolation {
                    option: a,
                    p0: solution.p0[a],
                    kind,
                });
            }
        }
    }
    report
}
