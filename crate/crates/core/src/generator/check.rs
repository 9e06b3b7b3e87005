//! Randomised self-validation of a generator against the identities every
//! generalized-entropy generator must satisfy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use super::Generator;

/// Central finite-difference step shared by the derivative checks.
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub max_violation: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorReport {
    pub trials: usize,
    pub checks: Vec<CheckOutcome>,
}

impl GeneratorReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    worst: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            worst: 0.0,
        }
    }

    fn record(&mut self, violation: f64) {
        // NaN must register as a failure
        if violation.is_nan() {
            self.worst = f64::INFINITY;
        } else {
            self.worst = self.worst.max(violation);
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name,
            max_violation: self.worst,
            tolerance: self.tolerance,
        }
    }
}

/// Interior simplex point with every coordinate at least `0.2 / n`.
fn interior_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter()
        .map(|x| 0.8 * x / total + 0.2 / n as f64)
        .collect()
}

/// Runs the generator identities on `trials` random interior points:
///
/// * `homogeneity`: `S(λq) = λ S(q)`
/// * `round_trip`: `H(S(q)) = q`
/// * `weighted_jacobian`: `Σ_i q_i ∂log S_i/∂q_k = 1` for every `k`
/// * `williams_daly_zachary`: `∇W(v)` equals the choice probabilities
/// * `entropy_midpoint_concavity`: `Ω_S` is concave along random chords
///
/// Shannon has no fixed dimension, so each trial draws one in `2..=6`.
pub fn check_generator(gen: &Generator, trials: usize, seed: u64) -> GeneratorReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut homogeneity = Tracker::new("homogeneity", 1e-10);
    let mut round_trip = Tracker::new("round_trip", 1e-10);
    let mut jacobian = Tracker::new("weighted_jacobian", 1e-6);
    let mut wdz = Tracker::new("williams_daly_zachary", 1e-6);
    let mut concavity = Tracker::new("entropy_midpoint_concavity", 1e-12);

    for _ in 0..trials.max(1) {
        let n = gen.n_options().unwrap_or_else(|| rng.random_range(2..=6));
        let q = interior_point(&mut rng, n);

        let lambda = rng.random_range(0.1..10.0);
        let s = gen.log_s(&q);
        let scaled: Vec<f64> = q.iter().map(|x| lambda * x).collect();
        let s_scaled = gen.log_s(&scaled);
        for (a, b) in s.iter().zip(&s_scaled) {
            homogeneity.record((b.exp() - lambda * a.exp()).abs());
        }

        let back: Vec<f64> = gen.log_h(&s).into_iter().map(f64::exp).collect();
        for (a, b) in back.iter().zip(&q) {
            round_trip.record((a - b).abs());
        }

        for k in 0..n {
            let mut up = q.clone();
            let mut down = q.clone();
            up[k] += FD_STEP;
            down[k] -= FD_STEP;
            let (s_up, s_down) = (gen.log_s(&up), gen.log_s(&down));
            let weighted: f64 = (0..n)
                .map(|i| q[i] * (s_up[i] - s_down[i]) / (2.0 * FD_STEP))
                .sum();
            jacobian.record((weighted - 1.0).abs());
        }

        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut probs = vec![0.0; n];
        gen.choice_into(&v, &mut probs);
        for k in 0..n {
            let mut up = v.clone();
            let mut down = v.clone();
            up[k] += FD_STEP;
            down[k] -= FD_STEP;
            let grad = (gen.surplus_raw(&up) - gen.surplus_raw(&down)) / (2.0 * FD_STEP);
            wdz.record((grad - probs[k]).abs());
        }

        let other = interior_point(&mut rng, n);
        let mid: Vec<f64> = q.iter().zip(&other).map(|(a, b)| 0.5 * (a + b)).collect();
        let chord = -0.5 * (gen.conjugate_raw(&q) + gen.conjugate_raw(&other));
        concavity.record((chord - (-gen.conjugate_raw(&mid))).max(0.0));
    }

    GeneratorReport {
        trials: trials.max(1),
        checks: vec![
            homogeneity.finish(),
            round_trip.finish(),
            jacobian.finish(),
            wdz.finish(),
            concavity.finish(),
        ],
    }
}
