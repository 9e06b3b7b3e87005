//! Entropy generators and the random-utility quantities derived from them.
//!
//! A generator `S` is the inverse of `H`, the gradient of the exponentiated
//! surplus `exp W`. For the two families implemented here:
//!
//! ```text
//! Shannon (multinomial logit):  S(q) = q,  H(x) = x,  W(v) = log Σ exp(v)
//!
//! Nested logit, option i in nest g with parameter ζ:
//!   S_i(q) = q_i^ζ · (Σ_{j∈g} q_j)^(1-ζ)
//!   H_i(x) = x_i^(1/ζ) · (Σ_{j∈g} x_j^(1/ζ))^(ζ-1)
//!   W(v)   = log Σ_g (Σ_{j∈g} exp(v_j/ζ_g))^ζ_g
//! ```
//!
//! Everything is evaluated in log space with a max-shift per nest, so payoffs
//! divided by small `ζ` do not overflow. `-inf` payoffs and zero probabilities
//! are exact: `log 0 = -inf`, `exp(-inf) = 0`, and `0 · log 0 = 0` inside
//! entropies.

mod check;
mod simulate;

pub use check::{check_generator, CheckOutcome, GeneratorReport};
pub use simulate::{simulate_choice_frequencies, SimulatedFrequencies};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::{lse, NestStructure, ProbabilityVector, ValuationVector};

/// Generator of a generalized entropy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGenerator", into = "RawGenerator")]
pub enum Generator {
    /// Identity generator; Shannon entropy and multinomial logit. Works in
    /// any dimension.
    Shannon,
    NestedLogit(NestStructure),
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawGenerator {
    Shannon,
    NestedLogit {
        nests: Vec<Vec<usize>>,
        zeta: Vec<f64>,
    },
}

impl TryFrom<RawGenerator> for Generator {
    type Error = Error;

    fn try_from(raw: RawGenerator) -> Result<Self> {
        match raw {
            RawGenerator::Shannon => Ok(Generator::Shannon),
            RawGenerator::NestedLogit { nests, zeta } => Generator::nested_logit(nests, zeta),
        }
    }
}

impl From<Generator> for RawGenerator {
    fn from(g: Generator) -> Self {
        match g {
            Generator::Shannon => RawGenerator::Shannon,
            Generator::NestedLogit(n) => RawGenerator::NestedLogit {
                nests: n.nests().to_vec(),
                zeta: n.zetas().to_vec(),
            },
        }
    }
}

impl Generator {
    pub fn nested_logit(nests: Vec<Vec<usize>>, zeta: Vec<f64>) -> Result<Self> {
        Ok(Generator::NestedLogit(NestStructure::new(nests, zeta)?))
    }

    /// Number of options the generator is defined on; `None` for Shannon.
    pub fn n_options(&self) -> Option<usize> {
        match self {
            Generator::Shannon => None,
            Generator::NestedLogit(n) => Some(n.n_options()),
        }
    }

    pub fn check_dimension(&self, n: usize) -> Result<()> {
        match self.n_options() {
            Some(expected) if expected != n => Err(Error::DimensionMismatch { expected, found: n }),
            _ if n == 0 => Err(Error::EmptyVector),
            _ => Ok(()),
        }
    }

    /// The generator on the sub-choice-set `keep`, renumbered in that order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        match self {
            Generator::Shannon => Ok(Generator::Shannon),
            Generator::NestedLogit(n) => Ok(Generator::NestedLogit(n.restrict(keep)?)),
        }
    }

    /// `log S(x)` for a nonnegative vector `x`; zero coordinates give `-inf`.
    pub fn log_s(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Generator::Shannon => x.iter().map(|&xi| xi.ln()).collect(),
            Generator::NestedLogit(nests) => {
                let mut out = vec![f64::NEG_INFINITY; x.len()];
                for (g, members) in nests.nests().iter().enumerate() {
                    let zeta = nests.zeta(g);
                    let log_total = members.iter().map(|&j| x[j]).sum::<f64>().ln();
                    for &i in members {
                        if x[i] > 0.0 {
                            out[i] = zeta * x[i].ln() + (1.0 - zeta) * log_total;
                        }
                    }
                }
                out
            }
        }
    }

    /// `S(q)` on the simplex.
    pub fn s_value(&self, q: &ProbabilityVector) -> Result<Vec<f64>> {
        self.s_unnormalized(q.as_slice())
    }

    /// `S(x)` for any nonnegative `x` (S is homogeneous of degree one).
    pub fn s_unnormalized(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dimension(x.len())?;
        check_nonnegative(x)?;
        Ok(self.log_s(x).into_iter().map(f64::exp).collect())
    }

    /// `log H(exp(log_x))`, taking and returning logarithms.
    pub fn log_h(&self, log_x: &[f64]) -> Vec<f64> {
        match self {
            Generator::Shannon => log_x.to_vec(),
            Generator::NestedLogit(nests) => {
                let mut out = vec![f64::NEG_INFINITY; log_x.len()];
                for (g, members) in nests.nests().iter().enumerate() {
                    let zeta = nests.zeta(g);
                    let inner = lse(members.iter().map(|&j| log_x[j] / zeta));
                    if inner == f64::NEG_INFINITY {
                        continue;
                    }
                    for &i in members {
                        out[i] = log_x[i] / zeta + (zeta - 1.0) * inner;
                    }
                }
                out
            }
        }
    }

    /// `H(x)` for a nonnegative `x`; zero coordinates map to zero.
    pub fn h_value(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dimension(x.len())?;
        check_nonnegative(x)?;
        let logs: Vec<f64> = x.iter().map(|&xi| xi.ln()).collect();
        Ok(self.log_h(&logs).into_iter().map(f64::exp).collect())
    }

    /// Surplus `W(v)` on raw payoffs; `-inf` when every payoff is `-inf`.
    pub(crate) fn surplus_raw(&self, v: &[f64]) -> f64 {
        match self {
            Generator::Shannon => lse(v.iter().copied()),
            Generator::NestedLogit(nests) => {
                let mut acc = StreamingLse::default();
                for (g, members) in nests.nests().iter().enumerate() {
                    let zeta = nests.zeta(g);
                    acc.push(zeta * lse(members.iter().map(|&j| v[j] / zeta)));
                }
                acc.value()
            }
        }
    }

    /// Surplus function `W(v) = log Σ_i H_i(exp v)`.
    pub fn surplus(&self, v: &ValuationVector) -> Result<f64> {
        self.check_dimension(v.len())?;
        Ok(self.surplus_raw(v.as_slice()))
    }

    /// Writes the choice probabilities at payoffs `v` into `out` and returns
    /// the surplus. Options with `v_i = -inf` get exactly zero. Returns
    /// `-inf` (leaving `out` zeroed) if every payoff is `-inf`.
    pub(crate) fn choice_into(&self, v: &[f64], out: &mut [f64]) -> f64 {
        debug_assert_eq!(v.len(), out.len());
        let surplus = match self {
            Generator::Shannon => {
                let w = lse(v.iter().copied());
                if w == f64::NEG_INFINITY {
                    out.fill(0.0);
                    return w;
                }
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = (x - w).exp();
                }
                w
            }
            Generator::NestedLogit(nests) => {
                // out[j] first holds log of the unnormalised probability.
                let mut acc = StreamingLse::default();
                for (g, members) in nests.nests().iter().enumerate() {
                    let zeta = nests.zeta(g);
                    let inner = lse(members.iter().map(|&j| v[j] / zeta));
                    if inner == f64::NEG_INFINITY {
                        for &j in members {
                            out[j] = f64::NEG_INFINITY;
                        }
                        continue;
                    }
                    let inclusive = zeta * inner;
                    acc.push(inclusive);
                    for &j in members {
                        out[j] = v[j] / zeta - inner + inclusive;
                    }
                }
                let w = acc.value();
                if w == f64::NEG_INFINITY {
                    out.fill(0.0);
                    return w;
                }
                for o in out.iter_mut() {
                    *o = (*o - w).exp();
                }
                w
            }
        };
        let total: f64 = out.iter().sum();
        for o in out.iter_mut() {
            *o /= total;
        }
        surplus
    }

    /// Choice probabilities `q_i(v) = H_i(e^v) / Σ_j H_j(e^v)`.
    pub fn choice_probabilities(&self, v: &ValuationVector) -> Result<ProbabilityVector> {
        self.check_dimension(v.len())?;
        let mut out = vec![0.0; v.len()];
        if self.choice_into(v.as_slice(), &mut out) == f64::NEG_INFINITY {
            return Err(Error::AllMinusInfinity);
        }
        Ok(ProbabilityVector::from_normalized(out))
    }

    /// `q · log S(q)` on raw slices, with `0 · log 0 = 0`.
    pub(crate) fn conjugate_raw(&self, q: &[f64]) -> f64 {
        self.log_s(q)
            .iter()
            .zip(q)
            .filter(|(_, &qi)| qi > 0.0)
            .map(|(ls, qi)| qi * ls)
            .sum()
    }

    /// Generalized entropy `Ω_S(q) = -q · log S(q)`.
    pub fn generalized_entropy(&self, q: &ProbabilityVector) -> Result<f64> {
        self.check_dimension(q.len())?;
        Ok(-self.conjugate_raw(q.as_slice()))
    }

    /// Convex conjugate of the surplus on the simplex, `W*(q) = q · log S(q)`.
    pub fn conjugate(&self, q: &ProbabilityVector) -> Result<f64> {
        self.check_dimension(q.len())?;
        Ok(self.conjugate_raw(q.as_slice()))
    }

    /// Groups of options that are interchangeable under this generator:
    /// all options for Shannon, the nests for nested logit.
    pub fn exchangeable_blocks(&self, n: usize) -> Vec<Vec<usize>> {
        match self {
            Generator::Shannon => vec![(0..n).collect()],
            Generator::NestedLogit(nests) => nests.nests().to_vec(),
        }
    }
}

fn check_nonnegative(x: &[f64]) -> Result<()> {
    match x.iter().position(|&xi| !xi.is_finite() || xi < 0.0) {
        Some(index) => Err(Error::NegativeEntry {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

/// One-pass log-sum-exp accumulator.
#[derive(Clone, Copy)]
struct StreamingLse {
    max: f64,
    sum: f64,
}

impl Default for StreamingLse {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl StreamingLse {
    fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::validate_simplex;
    use proptest::prelude::*;

    fn nested_2_1() -> Generator {
        Generator::nested_logit(vec![vec![0, 1], vec![2]], vec![0.5, 0.9]).unwrap()
    }

    fn nested_3_2(zeta: f64) -> Generator {
        Generator::nested_logit(vec![vec![0, 1, 2], vec![3, 4]], vec![zeta, zeta]).unwrap()
    }

    fn pv(x: &[f64]) -> ProbabilityVector {
        validate_simplex(x).unwrap()
    }

    fn vv(x: &[f64]) -> ValuationVector {
        ValuationVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn shannon_s_is_identity() {
        let s = Generator::Shannon.s_value(&pv(&[0.3, 0.7])).unwrap();
        assert!((s[0] - 0.3).abs() < 1e-15 && (s[1] - 0.7).abs() < 1e-15);
        let h = Generator::Shannon.h_value(&[2.0, 5.0]).unwrap();
        assert!((h[0] - 2.0).abs() < 1e-14 && (h[1] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn nested_s_matches_scalar_evaluation() {
        let s = nested_2_1().s_value(&pv(&[0.2, 0.3, 0.5])).unwrap();
        // q_i^ζ (Σ_nest q)^(1-ζ), evaluated independently
        let expected = [
            0.2f64.powf(0.5) * 0.5f64.powf(0.5),
            0.3f64.powf(0.5) * 0.5f64.powf(0.5),
            0.5f64.powf(0.9) * 0.5f64.powf(0.1),
        ];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((s[0] - 0.10f64.sqrt()).abs() < 1e-14);
        assert!((s[1] - 0.15f64.sqrt()).abs() < 1e-14);
        assert!((s[2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn s_vanishes_exactly_off_support() {
        let s = nested_2_1().s_value(&pv(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(s[1], 0.0);
        assert_eq!(s[2], 0.0);
        assert!(s[0] > 0.0);
    }

    #[test]
    fn nested_h_single_nest() {
        let g = Generator::nested_logit(vec![vec![0, 1]], vec![0.5]).unwrap();
        let h = g.h_value(&[1.0, 1.0]).unwrap();
        for x in h {
            assert!((x - 0.5f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn h_inverts_s_on_example() {
        let g = nested_2_1();
        let q = [0.2, 0.3, 0.5];
        let back = g.h_value(&g.s_value(&pv(&q)).unwrap()).unwrap();
        for (a, b) in back.iter().zip(q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn h_maps_zero_to_zero() {
        let h = nested_2_1().h_value(&[0.0, 0.4, 0.0]).unwrap();
        assert_eq!(h[0], 0.0);
        assert_eq!(h[2], 0.0);
        assert!(nested_2_1().h_value(&[1.0, -0.5, 1.0]).is_err());
    }

    #[test]
    fn dimension_checks() {
        assert!(matches!(
            nested_2_1().s_value(&pv(&[0.5, 0.5])),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
        assert!(nested_2_1().surplus(&vv(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn surplus_examples() {
        let w = Generator::Shannon.surplus(&vv(&[0.0, 0.0])).unwrap();
        assert!((w - 2f64.ln()).abs() < 1e-15);
        let v = vv(&[2.0 + 0.71f64.ln(), f64::NEG_INFINITY, 3.0 + 0.29f64.ln()]);
        let w = Generator::Shannon.surplus(&v).unwrap();
        let hand = (0.71 * 2f64.exp() + 0.29 * 3f64.exp()).ln();
        assert!((w - hand).abs() < 1e-14);
        assert!((w - 2.40433).abs() < 1e-5);
    }

    #[test]
    fn choice_probability_examples() {
        let q = Generator::Shannon
            .choice_probabilities(&vv(&[0.0; 3]))
            .unwrap();
        for &x in q.as_slice() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }

        // Two stages by hand: nest share ∝ (Σ e^{0})^{0.5}, then uniform within nest.
        let q = nested_3_2(0.5)
            .choice_probabilities(&vv(&[0.0; 5]))
            .unwrap();
        let (a, b) = (3f64.sqrt(), 2f64.sqrt());
        let share1 = a / (a + b);
        for i in 0..3 {
            assert!((q[i] - share1 / 3.0).abs() < 1e-14);
        }
        for i in 3..5 {
            assert!((q[i] - (1.0 - share1) / 2.0).abs() < 1e-14);
        }
        assert!((q[0] - 0.18350).abs() < 1e-5);
        assert!((q[3] - 0.22474).abs() < 1e-5);
    }

    #[test]
    fn minus_infinity_payoffs_get_zero_probability() {
        let v = vv(&[1.0, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.5, 0.2]);
        let q = nested_3_2(0.5).choice_probabilities(&v).unwrap();
        assert_eq!(q[1], 0.0);
        assert_eq!(q[2], 0.0);
        let v = vv(&[
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
            0.5,
            0.2,
        ]);
        let q = nested_3_2(0.5).choice_probabilities(&v).unwrap();
        assert_eq!(&q.as_slice()[..3], &[0.0, 0.0, 0.0]);
        assert!((q[3] + q[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_payoffs_do_not_overflow() {
        let v = vv(&[800.0, 790.0, 805.0, 700.0, 810.0]);
        let g = Generator::nested_logit(vec![vec![0, 1, 2], vec![3, 4]], vec![0.01, 0.3]).unwrap();
        let q = g.choice_probabilities(&v).unwrap();
        assert!(q.as_slice().iter().all(|x| x.is_finite()));
        assert!(g.surplus(&v).unwrap().is_finite());
    }

    #[test]
    fn entropy_examples() {
        let h = Generator::Shannon
            .generalized_entropy(&pv(&[0.5, 0.5]))
            .unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-15);
        assert_eq!(
            nested_2_1()
                .generalized_entropy(&pv(&[1.0, 0.0, 0.0]))
                .unwrap(),
            0.0
        );
        assert_eq!(
            Generator::Shannon
                .generalized_entropy(&pv(&[1.0, 0.0]))
                .unwrap(),
            0.0
        );
        let c = Generator::Shannon.conjugate(&pv(&[0.5, 0.5])).unwrap();
        assert!((c + 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn nested_entropy_matches_within_between_decomposition() {
        let q = [0.2, 0.3, 0.5];
        let direct = nested_2_1().generalized_entropy(&pv(&q)).unwrap();
        // within-nest Shannon part plus between-nest part, with nest totals 0.5, 0.5
        let zeta = [0.5, 0.5, 0.9];
        let totals: [f64; 3] = [0.5, 0.5, 0.5];
        let within: f64 = (0..3).map(|i| -zeta[i] * q[i] * q[i].ln()).sum();
        let between: f64 = (0..3)
            .map(|i| -(1.0 - zeta[i]) * q[i] * totals[i].ln())
            .sum();
        assert!((direct - (within + between)).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let g = nested_3_2(0.5);
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(
            text,
            r#"{"kind":"nested_logit","nests":[[0,1,2],[3,4]],"zeta":[0.5,0.5]}"#
        );
        assert_eq!(serde_json::from_str::<Generator>(&text).unwrap(), g);
        assert_eq!(
            serde_json::from_str::<Generator>(r#"{"kind":"shannon"}"#).unwrap(),
            Generator::Shannon
        );
        let bad = serde_json::from_str::<Generator>(
            r#"{"kind":"nested_logit","nests":[[0,1],[1,2]],"zeta":[0.5,0.5]}"#,
        );
        assert!(bad
            .unwrap_err()
            .to_string()
            .contains("nests must partition"));
        let bad = serde_json::from_str::<Generator>(
            r#"{"kind":"nested_logit","nests":[[0,1]],"zeta":[1.3]}"#,
        );
        assert!(bad.unwrap_err().to_string().contains("zeta"));
    }

    fn simplex_point(raw: &[f64]) -> Vec<f64> {
        let t: f64 = raw.iter().sum();
        raw.iter().map(|x| x / t).collect()
    }

    proptest! {
        #[test]
        fn unit_zeta_collapses_to_shannon(v in prop::collection::vec(-5.0f64..5.0, 5)) {
            let v = vv(&v);
            let nested = nested_3_2(1.0).choice_probabilities(&v).unwrap();
            let mnl = Generator::Shannon.choice_probabilities(&v).unwrap();
            for (a, b) in nested.as_slice().iter().zip(mnl.as_slice()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let dw = nested_3_2(1.0).surplus(&v).unwrap() - Generator::Shannon.surplus(&v).unwrap();
            prop_assert!(dw.abs() < 1e-12);
        }

        #[test]
        fn h_inverts_s(raw in prop::collection::vec(0.01f64..1.0, 5), zeta in 0.05f64..1.0) {
            let q = simplex_point(&raw);
            let g = nested_3_2(zeta);
            let back = g.h_value(&g.s_value(&pv(&q)).unwrap()).unwrap();
            for (a, b) in back.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn choice_probabilities_translation_invariant(
            v in prop::collection::vec(-5.0f64..5.0, 5),
            k in -50.0f64..50.0,
            zeta in 0.1f64..1.0,
        ) {
            let g = nested_3_2(zeta);
            let base = g.choice_probabilities(&vv(&v)).unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + k).collect();
            let moved = g.choice_probabilities(&vv(&shifted)).unwrap();
            let total: f64 = base.as_slice().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-15);
            for (a, b) in base.as_slice().iter().zip(moved.as_slice()) {
                prop_assert!((0.0..=1.0).contains(a));
                prop_assert!((a - b).abs() < 1e-12);
            }
            let dw = g.surplus(&vv(&shifted)).unwrap() - g.surplus(&vv(&v)).unwrap();
            prop_assert!((dw - k).abs() < 1e-11);
        }

        #[test]
        fn exp_surplus_is_sum_of_h(v in prop::collection::vec(-5.0f64..5.0, 5), zeta in 0.1f64..1.0) {
            let g = nested_3_2(zeta);
            let ev: Vec<f64> = v.iter().map(|x| x.exp()).collect();
            let total: f64 = g.h_value(&ev).unwrap().iter().sum();
            let w = g.surplus(&vv(&v)).unwrap();
            prop_assert!((w.exp() - total).abs() <= 1e-10 * total);
        }

        #[test]
        fn entropy_midpoint_concave(
            a in prop::collection::vec(0.0f64..1.0, 5),
            b in prop::collection::vec(0.0f64..1.0, 5),
            zeta in 0.05f64..1.0,
        ) {
            prop_assume!(a.iter().sum::<f64>() > 1e-3 && b.iter().sum::<f64>() > 1e-3);
            let (p1, p2) = (simplex_point(&a), simplex_point(&b));
            let mid: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| 0.5 * (x + y)).collect();
            let g = nested_3_2(zeta);
            let h = |p: &[f64]| g.generalized_entropy(&pv(p)).unwrap();
            prop_assert!(h(&mid) >= 0.5 * (h(&p1) + h(&p2)) - 1e-12);
        }
    }
}
