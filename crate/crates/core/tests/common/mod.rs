//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls the library's log-space generator code; formulas are
//! written out directly in plain floating point.

#![allow(dead_code)]

use geri::generator::simulate_choice_frequencies;
use geri::{Generator, ValuationVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `log S(q)` for nested logit, straight from `S_i = q_i^ζ (Σ_nest q)^(1-ζ)`.
pub fn nested_log_s(nests: &[Vec<usize>], zeta: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; q.len()];
    for (g, members) in nests.iter().enumerate() {
        let total: f64 = members.iter().map(|&j| q[j]).sum();
        for &i in members {
            out[i] = zeta[g] * q[i].ln() + (1.0 - zeta[g]) * total.ln();
        }
    }
    out
}

/// `W*(q) = Σ q_i log S_i(q)` with `0 log 0 = 0`.
pub fn conjugate(nests: &[Vec<usize>], zeta: &[f64], q: &[f64]) -> f64 {
    let log_s = nested_log_s(nests, zeta, q);
    q.iter()
        .zip(&log_s)
        .filter(|(&qi, _)| qi > 0.0)
        .map(|(qi, l)| qi * l)
        .sum()
}

/// Maximum of `q·v − W*(q)` over the simplex mesh `{k·step}` in three
/// options, and the maximising point.
pub fn fenchel_grid(nests: &[Vec<usize>], zeta: &[f64], v: [f64; 3], step: f64) -> (f64, [f64; 3]) {
    let k = (1.0 / step).round() as usize;
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for a in 0..=k {
        for b in 0..=(k - a) {
            let q = [a as f64 * step, b as f64 * step, (k - a - b) as f64 * step];
            let value = q[0] * v[0] + q[1] * v[1] + q[2] * v[2] - conjugate(nests, zeta, &q);
            if value > best.0 {
                best = (value, q);
            }
        }
    }
    best
}

/// Solves `S(q) = x` for nested logit by bisection on each nest total:
/// `q_i = (x_i Q^(ζ-1))^(1/ζ)` must add up to `Q`.
pub fn invert_s(nests: &[Vec<usize>], zeta: &[f64], x: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; x.len()];
    for (g, members) in nests.iter().enumerate() {
        let z = zeta[g];
        let members_at = |log_total: f64| -> Vec<f64> {
            members
                .iter()
                .map(|&i| ((x[i].ln() + (z - 1.0) * log_total) / z).exp())
                .collect()
        };
        // Σ q_i(Q) − Q is decreasing in log Q
        let gap = |log_total: f64| members_at(log_total).iter().sum::<f64>().ln() - log_total;
        let (mut lo, mut hi) = (-50.0, 50.0);
        assert!(gap(lo) > 0.0 && gap(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for (&i, qi) in members.iter().zip(members_at(0.5 * (lo + hi))) {
            q[i] = qi;
        }
    }
    q
}

/// Random nests over `n` options as contiguous blocks with ζ in [lo, 1).
pub fn random_nests(rng: &mut ChaCha8Rng, n: usize, lo: f64) -> (Vec<Vec<usize>>, Vec<f64>) {
    let mut nests = Vec::new();
    let mut start = 0;
    while start < n {
        let len = rng.random_range(1..=(n - start).min(3));
        nests.push((start..start + len).collect());
        start += len;
    }
    let zeta = nests.iter().map(|_| rng.random_range(lo..1.0)).collect();
    (nests, zeta)
}

pub struct SimulationCheck {
    /// Largest |frequency − probability| in units of its standard error.
    pub worst_z: f64,
    pub comparisons: usize,
    pub failures: usize,
}

/// Compares closed-form choice probabilities with Gumbel simulation on
/// `vectors` random payoff vectors, `draws` draws each.
pub fn simulation_check(nested: bool, vectors: usize, draws: usize, seed: u64) -> SimulationCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SimulationCheck {
        worst_z: 0.0,
        comparisons: 0,
        failures: 0,
    };
    for k in 0..vectors {
        let n = rng.random_range(3..=6);
        let gen = if nested {
            let (nests, zeta) = random_nests(&mut rng, n, 0.3);
            Generator::nested_logit(nests, zeta).unwrap()
        } else {
            Generator::Shannon
        };
        let v =
            ValuationVector::new((0..n).map(|_| rng.random_range(-1.0..2.0)).collect()).unwrap();
        let p = gen.choice_probabilities(&v).unwrap();
        let sim =
            simulate_choice_frequencies(&gen, &v, draws, seed.wrapping_add(1 + k as u64)).unwrap();
        let freq = sim.frequencies();
        for ((&f, &pi), se) in freq
            .iter()
            .zip(p.as_slice())
            .zip(sim.standard_errors(p.as_slice()))
        {
            let z = (f - pi).abs() / se;
            out.worst_z = out.worst_z.max(z);
            out.comparisons += 1;
            if z > 3.0 {
                out.failures += 1;
            }
        }
    }
    out
}
