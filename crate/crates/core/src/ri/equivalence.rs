//! Translation between GERI models and additive random utility models.
//!
//! A GERI model with unconditional probabilities `p0` produces, in each state
//! `v`, the same choices as a random utility model with deterministic
//! utilities `ṽ = v + log S(p0)`. Options outside the consideration set map to
//! `ṽ_i = -inf`.

use super::shifted;
use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::primitives::{FiniteChoiceProblem, ProbabilityVector, ValuationVector};

/// Random-utility payoffs `ṽ = v + log S(p0)` equivalent to state `v`.
pub fn to_equivalent_rum(
    gen: &Generator,
    p0: &ProbabilityVector,
    v: &ValuationVector,
) -> Result<ValuationVector> {
    if p0.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: p0.len(),
            found: v.len(),
        });
    }
    gen.check_dimension(v.len())?;
    ValuationVector::new(shifted(v.as_slice(), &gen.log_s(p0.as_slice())))
}

/// GERI model reproducing a random utility model state by state.
///
/// `p0 = E q(Ṽ)` has full support, and the returned problem shifts every
/// state by `-log S(p0)` under the same prior. `p0` is optimal for that
/// problem but need not be the only optimum; under Shannon it is unique when
/// the vectors `exp(v)` over states span the option space.
pub fn from_rum(
    gen: &Generator,
    rum_problem: &FiniteChoiceProblem,
) -> Result<(FiniteChoiceProblem, ProbabilityVector)> {
    gen.check_dimension(rum_problem.n_options())
        .map_err(|e| Error::InvalidProblem(e.to_string()))?;
    if let Some(m) = rum_problem.states().iter().position(|s| !s.is_finite()) {
        return Err(Error::InvalidProblem(format!(
            "state {m} has a non-finite utility"
        )));
    }
    let n = rum_problem.n_options();
    let mut p0 = vec![0.0; n];
    let mut q = vec![0.0; n];
    for (&w, v) in rum_problem
        .prior()
        .as_slice()
        .iter()
        .zip(rum_problem.states())
    {
        gen.choice_into(v.as_slice(), &mut q);
        for (p, &qi) in p0.iter_mut().zip(&q) {
            *p += w * qi;
        }
    }
    if let Some(i) = p0.iter().position(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::InvalidProblem(format!(
            "option {i} has zero probability under the prior; utilities too extreme"
        )));
    }
    let p0 = ProbabilityVector::from_weights(p0);
    let log_s = gen.log_s(p0.as_slice());
    let states = rum_problem
        .states()
        .iter()
        .map(|v| {
            ValuationVector::new(
                v.as_slice()
                    .iter()
                    .zip(&log_s)
                    .map(|(a, b)| a - b)
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let problem = FiniteChoiceProblem::new(states, rum_problem.prior().as_slice())?;
    Ok((problem, p0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::validate_simplex;
    use crate::ri::conditional_probabilities;

    fn vv(x: &[f64]) -> ValuationVector {
        ValuationVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn shannon_shift_by_log_p0() {
        let p0 = validate_simplex(&[0.5, 0.5]).unwrap();
        let t = to_equivalent_rum(&Generator::Shannon, &p0, &vv(&[1.0, 2.0])).unwrap();
        assert!((t[0] - (1.0 + 0.5f64.ln())).abs() < 1e-15);
        assert!((t[1] - (2.0 + 0.5f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn excluded_option_maps_to_minus_infinity() {
        let p0 = validate_simplex(&[1.0, 0.0]).unwrap();
        let t = to_equivalent_rum(&Generator::Shannon, &p0, &vv(&[0.0, 0.0])).unwrap();
        assert_eq!(t.as_slice(), &[0.0, f64::NEG_INFINITY]);
    }

    #[test]
    fn nested_inverse_shift() {
        let gen = Generator::nested_logit(vec![vec![0, 1], vec![2]], vec![0.5, 0.9]).unwrap();
        let p0 = validate_simplex(&[0.2, 0.3, 0.5]).unwrap();
        let v_tilde = [0.4, -1.2, 2.0];
        // v_i = ṽ_i - ζ log p0_i - (1-ζ) log Σ_nest p0, written out per option
        let v = [
            v_tilde[0] - 0.5 * 0.2f64.ln() - 0.5 * 0.5f64.ln(),
            v_tilde[1] - 0.5 * 0.3f64.ln() - 0.5 * 0.5f64.ln(),
            v_tilde[2] - 0.9 * 0.5f64.ln() - 0.1 * 0.5f64.ln(),
        ];
        let back = to_equivalent_rum(&gen, &p0, &vv(&v)).unwrap();
        for i in 0..3 {
            assert!((back[i] - v_tilde[i]).abs() < 1e-12);
        }
        let direct = conditional_probabilities(&gen, &p0, &vv(&v)).unwrap();
        let rum = gen.choice_probabilities(&back).unwrap();
        for i in 0..3 {
            assert!((direct[i] - rum[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_state_logit() {
        let rum = FiniteChoiceProblem::uniform(vec![vv(&[0.0, 0.0])]).unwrap();
        let (geri, p0) = from_rum(&Generator::Shannon, &rum).unwrap();
        assert!((p0[0] - 0.5).abs() < 1e-15 && (p0[1] - 0.5).abs() < 1e-15);
        for &x in geri.states()[0].as_slice() {
            assert!((x - 2f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_infinite_utilities() {
        let rum = FiniteChoiceProblem::uniform(vec![vv(&[0.0, f64::NEG_INFINITY])]).unwrap();
        assert!(matches!(
            from_rum(&Generator::Shannon, &rum),
            Err(Error::InvalidProblem(_))
        ));
    }
}
