//! Simplex points, extended-real valuations, finite state spaces and nest
//! structures, plus the log-space kernels the rest of the crate is built on.
//!
//! Zero probabilities are stored exactly. Their logarithm is `-inf`, and a
//! `-inf` payoff exponentiates to an exact zero.

use std::fmt;
use std::ops::Index;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries below `-NEGATIVE_SLACK` are rejected; smaller negatives are read as zero.
pub const NEGATIVE_SLACK: f64 = 1e-12;
/// Accepted distance of an input sum from one before renormalisation.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Smallest admissible nest parameter.
pub const MIN_ZETA: f64 = 1e-6;

/// A point of the unit simplex with its support recorded explicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    values: Vec<f64>,
    support: Vec<bool>,
}

/// Checks that `values` lies on the simplex (up to [`SUM_TOLERANCE`]) and
/// renormalises it.
pub fn validate_simplex(values: &[f64]) -> Result<ProbabilityVector> {
    if values.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut clean = Vec::with_capacity(values.len());
    for (index, &value) in values.iter().enumerate() {
        if value.is_nan() || value < -NEGATIVE_SLACK {
            return Err(Error::NegativeEntry { index, value });
        }
        if value.is_infinite() {
            return Err(Error::NotNormalized { sum: value });
        }
        clean.push(value.max(0.0));
    }
    let sum: f64 = clean.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::NotNormalized { sum });
    }
    for x in clean.iter_mut() {
        *x /= sum;
    }
    Ok(ProbabilityVector::from_normalized(clean))
}

impl ProbabilityVector {
    /// Wraps a vector already known to be nonnegative with unit sum.
    pub(crate) fn from_normalized(values: Vec<f64>) -> Self {
        let support = values.iter().map(|&x| x > 0.0).collect();
        Self { values, support }
    }

    /// Normalises a nonnegative weight vector with a positive total.
    pub(crate) fn from_weights(mut values: Vec<f64>) -> Self {
        let sum: f64 = values.iter().sum();
        debug_assert!(sum > 0.0 && sum.is_finite());
        for x in values.iter_mut() {
            *x /= sum;
        }
        Self::from_normalized(values)
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over zero options");
        Self::from_normalized(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> &[bool] {
        &self.support
    }

    /// Indices with strictly positive mass.
    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.support[i]).collect()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl Serialize for ProbabilityVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProbabilityVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        validate_simplex(&values).map_err(de::Error::custom)
    }
}

/// `log Σ exp(values)`, shifted by the finite maximum. Returns `-inf` iff
/// every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(lse(values.iter().copied()))
}

/// Infallible kernel behind [`log_sum_exp`]; an empty iterator yields `-inf`.
pub(crate) fn lse<I>(values: I) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Payoff vector over options; `-inf` marks an eliminated option.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuationVector {
    values: Vec<f64>,
}

impl ValuationVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (index, &value) in values.iter().enumerate() {
            if value.is_nan() || value == f64::INFINITY {
                return Err(Error::InvalidValuation { index, value });
            }
        }
        if values.iter().all(|&x| x == f64::NEG_INFINITY) {
            return Err(Error::AllMinusInfinity);
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl Index<usize> for ValuationVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Finite entries serialize as numbers, `-inf` as the string `"-inf"`.
impl Serialize for ValuationVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.values.len()))?;
        for &x in &self.values {
            if x == f64::NEG_INFINITY {
                seq.serialize_element("-inf")?;
            } else {
                seq.serialize_element(&x)?;
            }
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ValuationVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct Entries;

        impl<'de> Visitor<'de> for Entries {
            type Value = Vec<f64>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of numbers or \"-inf\"")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Vec<f64>, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = seq.next_element::<Entry>()? {
                    out.push(entry.0);
                }
                Ok(out)
            }
        }

        let values = d.deserialize_seq(Entries)?;
        ValuationVector::new(values).map_err(de::Error::custom)
    }
}

struct Entry(f64);

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct EntryVisitor;

        impl Visitor<'_> for EntryVisitor {
            type Value = Entry;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or the string \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Entry, E> {
                Ok(Entry(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Entry, E> {
                Ok(Entry(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Entry, E> {
                Ok(Entry(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Entry, E> {
                match v {
                    "-inf" => Ok(Entry(f64::NEG_INFINITY)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(EntryVisitor)
    }
}

/// Finite payoff state space with a prior over states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteChoiceProblem {
    n_options: usize,
    states: Vec<ValuationVector>,
    prior: ProbabilityVector,
}

impl FiniteChoiceProblem {
    pub fn new(states: Vec<ValuationVector>, prior: &[f64]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidProblem("at least one state is required".into()))?;
        let n_options = first.len();
        for state in &states {
            if state.len() != n_options {
                return Err(Error::DimensionMismatch {
                    expected: n_options,
                    found: state.len(),
                });
            }
        }
        if prior.len() != states.len() {
            return Err(Error::StateCountMismatch {
                expected: states.len(),
                found: prior.len(),
            });
        }
        let prior = validate_simplex(prior)?;
        Ok(Self {
            n_options,
            states,
            prior,
        })
    }

    /// Equiprobable states.
    pub fn uniform(states: Vec<ValuationVector>) -> Result<Self> {
        let m = states.len().max(1);
        Self::new(states, &vec![1.0 / m as f64; m])
    }

    pub fn n_options(&self) -> usize {
        self.n_options
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[ValuationVector] {
        &self.states
    }

    pub fn prior(&self) -> &ProbabilityVector {
        &self.prior
    }

    /// Keeps only the listed options (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidProblem("restriction keeps no options".into()));
        }
        if let Some(&bad) = keep.iter().find(|&&i| i >= self.n_options) {
            return Err(Error::InvalidProblem(format!(
                "option {bad} out of range for {} options",
                self.n_options
            )));
        }
        let states = self
            .states
            .iter()
            .map(|s| ValuationVector::new(keep.iter().map(|&i| s[i]).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(states, self.prior.as_slice())
    }
}

/// Partition of the options into nests, each with its own `zeta`.
#[derive(Clone, Debug, PartialEq)]
pub struct NestStructure {
    nest_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    zeta: Vec<f64>,
}

impl NestStructure {
    pub fn new(nests: Vec<Vec<usize>>, zeta: Vec<f64>) -> Result<Self> {
        let n_options: usize = nests.iter().map(Vec::len).sum();
        let invalid = |reason: String| Error::InvalidNests { n_options, reason };
        if nests.is_empty() {
            return Err(invalid("no nests given".into()));
        }
        if zeta.len() != nests.len() {
            return Err(invalid(format!(
                "{} nests but {} zeta values",
                nests.len(),
                zeta.len()
            )));
        }
        for (nest, &z) in zeta.iter().enumerate() {
            if !(MIN_ZETA..=1.0).contains(&z) {
                return Err(Error::InvalidZeta { nest, zeta: z });
            }
        }
        let mut nest_of = vec![usize::MAX; n_options];
        for (g, members) in nests.iter().enumerate() {
            if members.is_empty() {
                return Err(invalid(format!("nest {g} is empty")));
            }
            for &i in members {
                if i >= n_options {
                    return Err(invalid(format!("option {i} out of range")));
                }
                if nest_of[i] != usize::MAX {
                    return Err(invalid(format!("option {i} appears in more than one nest")));
                }
                nest_of[i] = g;
            }
        }
        Ok(Self {
            nest_of,
            members: nests,
            zeta,
        })
    }

    pub fn n_options(&self) -> usize {
        self.nest_of.len()
    }

    pub fn n_nests(&self) -> usize {
        self.members.len()
    }

    pub fn nest_of(&self, option: usize) -> usize {
        self.nest_of[option]
    }

    pub fn members(&self, nest: usize) -> &[usize] {
        &self.members[nest]
    }

    pub fn nests(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn zeta(&self, nest: usize) -> f64 {
        self.zeta[nest]
    }

    pub fn zetas(&self) -> &[f64] {
        &self.zeta
    }

    /// Zeta of the nest containing `option`.
    pub fn zeta_of(&self, option: usize) -> f64 {
        self.zeta[self.nest_of[option]]
    }

    /// Drops every option not in `keep` and renumbers the remaining ones in
    /// the order of `keep`. Emptied nests disappear; the others keep their zeta.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let mut nests = Vec::new();
        let mut zeta = Vec::new();
        for (g, members) in self.members.iter().enumerate() {
            let kept: Vec<usize> = keep
                .iter()
                .enumerate()
                .filter(|(_, &orig)| members.contains(&orig))
                .map(|(new, _)| new)
                .collect();
            if !kept.is_empty() {
                nests.push(kept);
                zeta.push(self.zeta[g]);
            }
        }
        let restricted = Self::new(nests, zeta)?;
        if restricted.n_options() != keep.len() {
            return Err(Error::InvalidNests {
                n_options: self.n_options(),
                reason: "restriction lists unknown or repeated options".into(),
            });
        }
        Ok(restricted)
    }
}
