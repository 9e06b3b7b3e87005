//! Monte Carlo choice frequencies from explicit utility shocks, used as an
//! oracle for the closed-form choice probabilities.
//!
//! Shannon draws `argmax_i v_i + ε_i` with i.i.d. standard Gumbel shocks.
//! Nested logit samples in two stages: a nest by Gumbel-perturbed inclusive
//! values `ζ_g log Σ_{j∈g} exp(v_j/ζ_g)`, then an option inside it by
//! Gumbel-perturbed `v_j/ζ_g`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel};
use rayon::prelude::*;

use super::Generator;
use crate::error::{Error, Result};
use crate::primitives::{lse, ValuationVector};

/// Draws per RNG stream. Stream `b` covers draws `b*BLOCK..(b+1)*BLOCK`, so
/// results do not depend on the number of worker threads.
const BLOCK: usize = 1 << 16;

#[derive(Clone, Debug)]
pub struct SimulatedFrequencies {
    pub counts: Vec<u64>,
    pub draws: usize,
}

impl SimulatedFrequencies {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.draws as f64)
            .collect()
    }

    /// Binomial standard error of each frequency under probabilities `p`.
    pub fn standard_errors(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .map(|&pi| (pi * (1.0 - pi) / self.draws as f64).sqrt())
            .collect()
    }
}

pub fn simulate_choice_frequencies(
    gen: &Generator,
    v: &ValuationVector,
    draws: usize,
    seed: u64,
) -> Result<SimulatedFrequencies> {
    gen.check_dimension(v.len())?;
    if draws == 0 {
        return Err(Error::InvalidConfig("draws must be positive".into()));
    }
    let n = v.len();
    let n_blocks = draws.div_ceil(BLOCK);
    let per_block: Vec<Vec<u64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = BLOCK.min(draws - b * BLOCK);
            let mut counts = vec![0u64; n];
            for _ in 0..len {
                counts[draw_one(gen, v.as_slice(), &mut rng)] += 1;
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; n];
    for block in per_block {
        for (c, b) in counts.iter_mut().zip(block) {
            *c += b;
        }
    }
    Ok(SimulatedFrequencies { counts, draws })
}

fn gumbel() -> Gumbel<f64> {
    Gumbel::new(0.0, 1.0).expect("standard Gumbel")
}

fn argmax_perturbed<I>(items: I, rng: &mut ChaCha8Rng) -> usize
where
    I: Iterator<Item = (usize, f64)>,
{
    let dist = gumbel();
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (i, x) in items {
        if x == f64::NEG_INFINITY {
            continue;
        }
        let u = x + dist.sample(rng);
        if u > best.1 {
            best = (i, u);
        }
    }
    best.0
}

fn draw_one(gen: &Generator, v: &[f64], rng: &mut ChaCha8Rng) -> usize {
    match gen {
        Generator::Shannon => argmax_perturbed(v.iter().copied().enumerate(), rng),
        Generator::NestedLogit(nests) => {
            let inclusive = nests.nests().iter().enumerate().map(|(g, members)| {
                let zeta = nests.zeta(g);
                (g, zeta * lse(members.iter().map(|&j| v[j] / zeta)))
            });
            let g = argmax_perturbed(inclusive, rng);
            let zeta = nests.zeta(g);
            argmax_perturbed(nests.members(g).iter().map(|&j| (j, v[j] / zeta)), rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_complete() {
        let v = ValuationVector::new(vec![0.1, f64::NEG_INFINITY, 0.4]).unwrap();
        let a = simulate_choice_frequencies(&Generator::Shannon, &v, 100_000, 5).unwrap();
        let b = simulate_choice_frequencies(&Generator::Shannon, &v, 100_000, 5).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.counts.iter().sum::<u64>(), 100_000);
        assert_eq!(a.counts[1], 0);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let v = ValuationVector::new(vec![0.3, 0.0, -0.2, 0.5]).unwrap();
        let gen = Generator::nested_logit(vec![vec![0, 1], vec![2, 3]], vec![0.4, 0.7]).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let a = single.install(|| simulate_choice_frequencies(&gen, &v, 200_000, 11).unwrap());
        let b = simulate_choice_frequencies(&gen, &v, 200_000, 11).unwrap();
        assert_eq!(a.counts, b.counts);
    }
}
