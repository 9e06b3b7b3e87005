//! Monte Carlo comparison of multinomial-logit and nested-logit information
//! costs: five options, payoffs i.i.d. Uniform(0, 1), options {1,2,3} and
//! {4,5} nested.
//!
//! The continuous prior is represented by `n_states` equiprobable draws. The
//! prior is exchangeable within each nest (across all options for Shannon),
//! so by default the draws are closed under those permutations through
//! [`solve_fixed_point_symmetric`]. Without that, sampling noise in the
//! finite prior moves the unconditional probabilities of a nearly flat
//! objective far from their symmetric value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::primitives::{FiniteChoiceProblem, ProbabilityVector, ValuationVector};
use crate::ri::{solve_fixed_point, solve_fixed_point_symmetric, SolverConfig};

#[derive(Clone, Debug)]
pub struct MonteCarloConfig {
    pub n_options: usize,
    pub n_states: usize,
    pub n_replications: usize,
    pub seed: u64,
    pub generator: Generator,
    pub solver: SolverConfig,
    /// Close the sampled prior under the generator's option symmetries.
    pub symmetrize: bool,
}

impl MonteCarloConfig {
    /// Five uniform options, 10 000 states, 10 replications; Shannon when `zeta == 1`.
    pub fn table1(zeta: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            n_options: 5,
            n_states: 10_000,
            n_replications: 10,
            seed,
            generator: table1_generator(zeta)?,
            solver: SolverConfig::default(),
            symmetrize: true,
        })
    }
}

/// Nests {0,1,2} and {3,4} sharing `zeta`; plain Shannon for `zeta == 1`.
pub fn table1_generator(zeta: f64) -> Result<Generator> {
    if zeta == 1.0 {
        Ok(Generator::Shannon)
    } else {
        Generator::nested_logit(vec![vec![0, 1, 2], vec![3, 4]], vec![zeta, zeta])
    }
}

/// Per-option statistics of the conditional choice probabilities across
/// states, and the probability of picking the best option.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryStats {
    pub avg: Vec<f64>,
    pub median: Vec<f64>,
    pub std: Vec<f64>,
    pub efficiency: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Report {
    /// Mean over replications of each statistic.
    pub summary: SummaryStats,
    /// Standard error of that mean across replications (zero for one replication).
    pub standard_errors: SummaryStats,
    pub replications: Vec<SummaryStats>,
    pub unconditional: Vec<ProbabilityVector>,
    pub iterations: Vec<usize>,
    pub n_states: usize,
    pub seed: u64,
}

/// Weighted median; with equal weights and an even count this is the mean
/// of the two middle values.
fn weighted_median(mut pairs: Vec<(f64, f64)>) -> f64 {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let half = 0.5 * total;
    let mut cum = 0.0;
    for (k, &(x, w)) in pairs.iter().enumerate() {
        cum += w;
        if cum >= half - 1e-12 * total {
            if (cum - half).abs() <= 1e-12 * total && k + 1 < pairs.len() {
                return 0.5 * (x + pairs[k + 1].0);
            }
            return x;
        }
    }
    pairs.last().map_or(f64::NAN, |p| p.0)
}

/// Statistics of `conditionals` over the states of `problem`.
///
/// With `pool`, every option's statistics are taken over all options of its
/// block, which equals the per-option statistics of the prior closed under
/// permutations inside the blocks.
pub fn summarize(
    problem: &FiniteChoiceProblem,
    conditionals: &[ProbabilityVector],
    pool: Option<&[Vec<usize>]>,
) -> Result<SummaryStats> {
    if conditionals.len() != problem.n_states() {
        return Err(Error::StateCountMismatch {
            expected: problem.n_states(),
            found: conditionals.len(),
        });
    }
    let n = problem.n_options();
    let weights = problem.prior().as_slice();
    let singletons: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let blocks = pool.unwrap_or(&singletons);

    let mut avg = vec![f64::NAN; n];
    let mut median = vec![f64::NAN; n];
    let mut std = vec![f64::NAN; n];
    for block in blocks {
        let share = 1.0 / block.len() as f64;
        let pairs: Vec<(f64, f64)> = conditionals
            .iter()
            .zip(weights)
            .flat_map(|(c, &w)| block.iter().map(move |&j| (c[j], w * share)))
            .collect();
        let mean: f64 = pairs.iter().map(|(x, w)| x * w).sum();
        let var: f64 = pairs.iter().map(|(x, w)| w * (x - mean).powi(2)).sum();
        let med = weighted_median(pairs);
        for &i in block {
            avg[i] = mean;
            median[i] = med;
            std[i] = var.sqrt();
        }
    }

    let efficiency = problem
        .states()
        .iter()
        .zip(conditionals)
        .zip(weights)
        .map(|((v, c), &w)| w * c[best_option(v)])
        .sum();
    Ok(SummaryStats {
        avg,
        median,
        std,
        efficiency,
    })
}

/// Index of the highest payoff; ties go to the lowest index.
fn best_option(v: &ValuationVector) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Equiprobable states with i.i.d. Uniform(0, 1) payoffs from stream
/// `replication` of the seeded ChaCha8 generator.
pub fn uniform_problem(
    n_options: usize,
    n_states: usize,
    seed: u64,
    replication: u64,
) -> Result<FiniteChoiceProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    let states = (0..n_states)
        .map(|_| ValuationVector::new((0..n_options).map(|_| rng.random::<f64>()).collect()))
        .collect::<Result<Vec<_>>>()?;
    FiniteChoiceProblem::uniform(states)
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let r = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / r;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

pub fn run_table1(config: &MonteCarloConfig) -> Result<Table1Report> {
    if config.n_states == 0 {
        return Err(Error::InvalidConfig("n_states must be positive".into()));
    }
    if config.n_replications == 0 {
        return Err(Error::InvalidConfig(
            "n_replications must be positive".into(),
        ));
    }
    config.generator.check_dimension(config.n_options)?;
    let blocks = config.generator.exchangeable_blocks(config.n_options);

    let runs: Vec<(SummaryStats, ProbabilityVector, usize)> = (0..config.n_replications)
        .into_par_iter()
        .map(|r| {
            let problem =
                uniform_problem(config.n_options, config.n_states, config.seed, r as u64)?;
            let solution = if config.symmetrize {
                solve_fixed_point_symmetric(&config.generator, &problem, &blocks, &config.solver)?
            } else {
                solve_fixed_point(&config.generator, &problem, &config.solver)?
            };
            let pool = config.symmetrize.then_some(blocks.as_slice());
            let stats = summarize(&problem, &solution.conditionals, pool)?;
            Ok((stats, solution.p0, solution.iterations))
        })
        .collect::<Result<_>>()?;

    let n = config.n_options;
    let per_option = |f: &dyn Fn(&SummaryStats) -> &Vec<f64>| -> (Vec<f64>, Vec<f64>) {
        (0..n)
            .map(|i| mean_and_se(&runs.iter().map(|r| f(&r.0)[i]).collect::<Vec<_>>()))
            .unzip()
    };
    let (avg, avg_se) = per_option(&|s| &s.avg);
    let (median, median_se) = per_option(&|s| &s.median);
    let (std, std_se) = per_option(&|s| &s.std);
    let (efficiency, efficiency_se) =
        mean_and_se(&runs.iter().map(|r| r.0.efficiency).collect::<Vec<_>>());

    Ok(Table1Report {
        summary: SummaryStats {
            avg,
            median,
            std,
            efficiency,
        },
        standard_errors: SummaryStats {
            avg: avg_se,
            median: median_se,
            std: std_se,
            efficiency: efficiency_se,
        },
        replications: runs.iter().map(|r| r.0.clone()).collect(),
        unconditional: runs.iter().map(|r| r.1.clone()).collect(),
        iterations: runs.iter().map(|r| r.2).collect(),
        n_states: config.n_states,
        seed: config.seed,
    })
}

/// CSV rows `option,avg,median,std` (options numbered from 1) and a footer
/// `efficiency,<value>,<n_states>,<seed>`.
pub fn write_table1_csv<W: std::io::Write>(report: &Table1Report, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidConfig(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["option", "avg", "median", "std"])
        .map_err(io)?;
    let s = &report.summary;
    for i in 0..s.avg.len() {
        w.write_record([
            (i + 1).to_string(),
            format!("{:.6}", s.avg[i]),
            format!("{:.6}", s.median[i]),
            format!("{:.6}", s.std[i]),
        ])
        .map_err(io)?;
    }
    w.write_record([
        "efficiency".to_string(),
        format!("{:.6}", s.efficiency),
        report.n_states.to_string(),
        report.seed.to_string(),
    ])
    .map_err(io)?;
    w.flush()
        .map_err(|e| Error::InvalidConfig(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(generator: Generator, symmetrize: bool) -> MonteCarloConfig {
        MonteCarloConfig {
            n_options: 5,
            n_states: 400,
            n_replications: 2,
            seed: 7,
            generator,
            solver: SolverConfig::default(),
            symmetrize,
        }
    }

    #[test]
    fn weighted_median_cases() {
        assert_eq!(
            weighted_median(vec![(3.0, 1.0), (1.0, 1.0), (2.0, 1.0)]),
            2.0
        );
        assert_eq!(
            weighted_median(vec![(4.0, 1.0), (1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]),
            2.5
        );
        assert_eq!(weighted_median(vec![(1.0, 0.1), (5.0, 0.9)]), 5.0);
    }

    #[test]
    fn single_state_statistics() {
        let mut config = small(table1_generator(0.5).unwrap(), false);
        config.n_states = 1;
        config.n_replications = 1;
        let report = run_table1(&config).unwrap();
        let problem = uniform_problem(5, 1, 7, 0).unwrap();
        let p0 = &report.unconditional[0];
        let c = crate::ri::conditional_probabilities(&config.generator, p0, &problem.states()[0])
            .unwrap();
        for i in 0..5 {
            assert!((report.summary.avg[i] - c[i]).abs() < 1e-15);
            assert!((report.summary.median[i] - c[i]).abs() < 1e-15);
            assert_eq!(report.summary.std[i], 0.0);
        }
    }

    #[test]
    fn shannon_symmetric_run_is_exactly_uniform() {
        let report = run_table1(&small(Generator::Shannon, true)).unwrap();
        for &x in &report.summary.avg {
            assert!((x - 0.2).abs() < 1e-12);
        }
        let eff = report.summary.efficiency;
        assert!((0.0..=1.0).contains(&eff));
    }

    #[test]
    fn nested_run_is_within_nest_symmetric() {
        let report = run_table1(&small(table1_generator(0.5).unwrap(), true)).unwrap();
        let a = &report.summary.avg;
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((a[0] - a[2]).abs() < 1e-12 && (a[3] - a[4]).abs() < 1e-12);
        assert!(a[0] > a[3]);
    }

    #[test]
    fn bit_reproducible() {
        let config = small(table1_generator(0.5).unwrap(), true);
        let a = run_table1(&config).unwrap();
        let b = run_table1(&config).unwrap();
        assert_eq!(a.summary, b.summary);
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_table1_csv(&a, &mut x).unwrap();
        write_table1_csv(&b, &mut y).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with("option,avg,median,std\n1,"));
        assert!(text.lines().last().unwrap().starts_with("efficiency,"));
    }

    #[test]
    fn rejects_wrong_dimension() {
        let mut config = small(table1_generator(0.5).unwrap(), true);
        config.n_options = 4;
        assert!(run_table1(&config).is_err());
    }
}
