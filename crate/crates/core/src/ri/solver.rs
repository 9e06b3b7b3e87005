//! Successive substitution on `p0 ← (1-d) p0 + d E q(V + log S(p0))`.
//!
//! Iteration starts from the multinomial-logit unconditional distribution
//! `E softmax(V)`. Coordinates that fall below the prune threshold are set to
//! exactly zero; the map cannot move an exact zero, so the support only
//! shrinks. Once the residual is within tolerance, coordinates that the map
//! still shrinks by a fixed factor are on their way to zero at a geometric
//! rate; they are zeroed and the iteration resumes on the smaller support.
//! Such coordinates are below `tolerance / VANISHING_RATE` when detected.
//! The expectation over states is evaluated in fixed-size chunks
//! summed in order, which keeps results bit-identical across thread counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{conditional_with_log_s, optimized_value, sup_distance, GeriSolution};
use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::primitives::{FiniteChoiceProblem, ProbabilityVector};

const CHUNK: usize = 256;

/// Per-iteration relative decrease that marks a coordinate as vanishing.
const VANISHING_RATE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Sup-norm bound on the fixed-point residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight on the new iterate, in `(0, 1]`.
    pub damping: f64,
    pub prune_threshold: f64,
    /// Total number of starts; extra starts are Dirichlet(1, ..., 1) draws.
    pub n_restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
            damping: 1.0,
            prune_threshold: 1e-12,
            n_restarts: 1,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.prune_threshold >= 0.0 && self.prune_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "prune_threshold must lie in [0, 1), got {}",
                self.prune_threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        if self.n_restarts == 0 {
            return Err(Error::InvalidConfig("n_restarts must be at least 1".into()));
        }
        Ok(())
    }
}

struct Run {
    p0: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

/// Solves the GERI fixed point for `problem`.
pub fn solve_fixed_point(
    gen: &Generator,
    problem: &FiniteChoiceProblem,
    config: &SolverConfig,
) -> Result<GeriSolution> {
    solve(gen, problem, None, config)
}

/// Solves the fixed point of the problem whose prior is closed under
/// permutations of the options inside each block of `blocks`.
///
/// For a symmetric `p0` the expectation over the permuted copies of a state
/// equals the block average of the expectation over the state itself, so the
/// enlarged problem never has to be materialised. The returned `p0` and
/// `info_cost` belong to the enlarged problem; `conditionals` holds one
/// representative per original state.
pub fn solve_fixed_point_symmetric(
    gen: &Generator,
    problem: &FiniteChoiceProblem,
    blocks: &[Vec<usize>],
    config: &SolverConfig,
) -> Result<GeriSolution> {
    let n = problem.n_options();
    let mut seen = vec![false; n];
    for &i in blocks.iter().flatten() {
        if i >= n || seen[i] {
            return Err(Error::InvalidProblem(
                "symmetry blocks must be disjoint option indices".into(),
            ));
        }
        seen[i] = true;
    }
    solve(gen, problem, Some(blocks), config)
}

fn solve(
    gen: &Generator,
    problem: &FiniteChoiceProblem,
    blocks: Option<&[Vec<usize>]>,
    config: &SolverConfig,
) -> Result<GeriSolution> {
    config.validate()?;
    gen.check_dimension(problem.n_options())
        .map_err(|e| Error::InvalidProblem(e.to_string()))?;
    let n = problem.n_options();

    let mut starts = vec![logit_start(problem)];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 1..config.n_restarts {
        let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = raw.iter().sum();
        starts.push(raw.into_iter().map(|x| x / total).collect());
    }

    let mut best: Option<GeriSolution> = None;
    let mut first_failure: Option<Error> = None;
    for mut start in starts {
        if let Some(b) = blocks {
            symmetrize(&mut start, b);
        }
        let run = iterate(gen, problem, start, blocks, config)?;
        let solution = finish(gen, problem, &run, blocks.is_some(), config)?;
        if !run.converged {
            if first_failure.is_none() {
                first_failure = Some(Error::NoConvergence {
                    iterations: run.iterations,
                    residual: run.residual,
                    partial: Box::new(solution),
                });
            }
            continue;
        }
        if best
            .as_ref()
            .is_none_or(|b| solution.objective > b.objective)
        {
            best = Some(solution);
        }
    }
    match (best, first_failure) {
        (Some(solution), _) => Ok(solution),
        (None, Some(err)) => Err(err),
        (None, None) => unreachable!("at least one start is always run"),
    }
}

fn logit_start(problem: &FiniteChoiceProblem) -> Vec<f64> {
    let n = problem.n_options();
    let mut out = vec![0.0; n];
    let mut q = vec![0.0; n];
    for (&w, v) in problem.prior().as_slice().iter().zip(problem.states()) {
        Generator::Shannon.choice_into(v.as_slice(), &mut q);
        for (o, &x) in out.iter_mut().zip(&q) {
            *o += w * x;
        }
    }
    out
}

/// Replaces each block by its average.
fn symmetrize(p: &mut [f64], blocks: &[Vec<usize>]) {
    for block in blocks {
        if block.is_empty() {
            continue;
        }
        let avg = block.iter().map(|&i| p[i]).sum::<f64>() / block.len() as f64;
        for &i in block {
            p[i] = avg;
        }
    }
}

/// One application of the map: `E q(V + log S(p0))`.
fn expected_choice(gen: &Generator, problem: &FiniteChoiceProblem, p0: &[f64]) -> Result<Vec<f64>> {
    let n = p0.len();
    let log_s = gen.log_s(p0);
    let prior = problem.prior().as_slice();
    let states = problem.states();

    let chunk_sum = |range: std::ops::Range<usize>| -> Result<Vec<f64>> {
        let mut acc = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut q = vec![0.0; n];
        for m in range {
            let w = prior[m];
            if w == 0.0 {
                continue;
            }
            for ((xi, &vi), &si) in x.iter_mut().zip(states[m].as_slice()).zip(&log_s) {
                *xi = vi + si;
            }
            if gen.choice_into(&x, &mut q) == f64::NEG_INFINITY {
                return Err(Error::AllOptionsExcluded);
            }
            for (a, &qi) in acc.iter_mut().zip(&q) {
                *a += w * qi;
            }
        }
        Ok(acc)
    };

    let m = states.len();
    if m <= CHUNK {
        return chunk_sum(0..m);
    }
    let partials: Vec<Vec<f64>> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| chunk_sum(c * CHUNK..((c + 1) * CHUNK).min(m)))
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; n];
    for part in partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    Ok(out)
}

fn iterate(
    gen: &Generator,
    problem: &FiniteChoiceProblem,
    start: Vec<f64>,
    blocks: Option<&[Vec<usize>]>,
    config: &SolverConfig,
) -> Result<Run> {
    let mut p0 = start;
    prune(&mut p0, config.prune_threshold);
    let mut residual = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        let mut image = expected_choice(gen, problem, &p0)?;
        if let Some(b) = blocks {
            symmetrize(&mut image, b);
        }
        residual = sup_distance(&image, &p0);
        if residual <= config.tolerance {
            let mut vanished = false;
            for (p, &t) in p0.iter_mut().zip(&image) {
                if *p > 0.0 && t < (1.0 - VANISHING_RATE) * *p {
                    *p = 0.0;
                    vanished = true;
                }
            }
            if vanished && p0.iter().any(|&p| p > 0.0) {
                prune(&mut p0, config.prune_threshold);
                residual = f64::INFINITY;
                continue;
            }
            return Ok(Run {
                p0,
                iterations: iteration,
                residual,
                converged: true,
            });
        }
        let d = config.damping;
        for (p, t) in p0.iter_mut().zip(&image) {
            *p = (1.0 - d) * *p + d * t;
        }
        prune(&mut p0, config.prune_threshold);
    }
    Ok(Run {
        p0,
        iterations: config.max_iterations,
        residual,
        converged: false,
    })
}

fn prune(p: &mut [f64], threshold: f64) {
    for x in p.iter_mut() {
        if *x < threshold {
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= total;
    }
}

fn finish(
    gen: &Generator,
    problem: &FiniteChoiceProblem,
    run: &Run,
    symmetric: bool,
    config: &SolverConfig,
) -> Result<GeriSolution> {
    let p0 = ProbabilityVector::from_normalized(run.p0.clone());
    let log_s = gen.log_s(p0.as_slice());
    let conditionals = problem
        .states()
        .iter()
        .map(|v| conditional_with_log_s(gen, &log_s, v.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let expected_conjugate: f64 = problem
        .prior()
        .as_slice()
        .iter()
        .zip(&conditionals)
        .map(|(&w, c)| w * gen.conjugate_raw(c.as_slice()))
        .sum();
    // Ω_S is invariant under the block permutations, so E Ω_S(p(V)) over the
    // enlarged problem equals the average over the representatives.
    let info_cost = if symmetric {
        -gen.conjugate_raw(p0.as_slice()) + expected_conjugate
    } else {
        super::information_cost(gen, problem, &conditionals)?
    };
    let objective = optimized_value(gen, problem, &p0)?;
    let consideration_set = (0..p0.len())
        .filter(|&i| p0[i] > config.prune_threshold)
        .collect();
    Ok(GeriSolution {
        p0,
        conditionals,
        info_cost,
        objective,
        consideration_set,
        iterations: run.iterations,
        residual: run.residual,
    })
}
