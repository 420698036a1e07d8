//! Per-degree invariants of a test configuration read off the weight-graded
//! standard-monomial basis of the central fiber.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exact::{parse_polynomial, AlgebraError, Monomial, Polynomial, TermOrder, WeightVector};
use crate::groebner::{initial_ideal, krull_dimension, standard_monomials_for, GroebnerError, Ideal, InitialIdeal};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("weight vector has {found} entries but there are {expected} variables")]
    WeightLength { expected: usize, found: usize },
    #[error("generator {index} ({text}) is not homogeneous: term degrees {degrees:?}")]
    Inhomogeneous { index: usize, text: String, degrees: Vec<u32> },
    #[error("generator {index}: {source}")]
    Parse { index: usize, source: AlgebraError },
    #[error("the ideal is the unit ideal, so the scheme is empty")]
    UnitIdeal,
    #[error("the quotient ring has Krull dimension 0, so the projective scheme is empty")]
    Irrelevant,
    #[error("variable names must be distinct and non-empty")]
    BadVariables,
}

/// A homogeneous ideal together with a one-parameter diagonal action.
///
/// The initial ideal is computed once at construction; everything degree-wise
/// is read from its leading monomials.
#[derive(Clone, Debug)]
pub struct TestConfiguration {
    name: String,
    variables: Vec<String>,
    eta: WeightVector,
    ideal: Ideal<Rational>,
    initial: InitialIdeal<Rational>,
    krull_dim: usize,
}

impl TestConfiguration {
    pub fn new(
        name: impl Into<String>,
        variables: Vec<String>,
        eta: WeightVector,
        generators: Vec<Polynomial<Rational>>,
    ) -> Result<Self, ConfigError> {
        let nvars = variables.len();
        let mut seen = std::collections::BTreeSet::new();
        if nvars == 0 || variables.iter().any(|v| v.is_empty() || !seen.insert(v.clone())) {
            return Err(ConfigError::BadVariables);
        }
        if eta.len() != nvars {
            return Err(ConfigError::WeightLength { expected: nvars, found: eta.len() });
        }
        let ideal = Ideal::new(nvars, generators.clone()).map_err(|e| match e {
            GroebnerError::Inhomogeneous { index, degrees } => ConfigError::Inhomogeneous {
                index,
                text: generators[index].to_text(&variables, &TermOrder::grevlex(nvars)),
                degrees,
            },
            GroebnerError::AmbientMismatch { expected, found, .. } => {
                ConfigError::WeightLength { expected, found }
            }
        })?;
        let initial = initial_ideal(&ideal, &eta);
        if initial.is_unit() {
            return Err(ConfigError::UnitIdeal);
        }
        let krull_dim = krull_dimension(initial.leading_monomials(), nvars);
        if krull_dim == 0 {
            return Err(ConfigError::Irrelevant);
        }
        Ok(TestConfiguration { name: name.into(), variables, eta, ideal, initial, krull_dim })
    }

    /// Builds a configuration from generator strings in the polynomial grammar.
    pub fn from_text(
        name: impl Into<String>,
        variables: &[&str],
        eta: &[i64],
        generators: &[&str],
    ) -> Result<Self, ConfigError> {
        let vars: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
        let polys = generators
            .iter()
            .enumerate()
            .map(|(index, g)| parse_polynomial(g, &vars).map_err(|source| ConfigError::Parse { index, source }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(name, vars, WeightVector::new(eta.to_vec()), polys)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn eta(&self) -> &WeightVector {
        &self.eta
    }

    pub fn ideal(&self) -> &Ideal<Rational> {
        &self.ideal
    }

    pub fn initial_ideal(&self) -> &InitialIdeal<Rational> {
        &self.initial
    }

    pub fn ambient_dim(&self) -> usize {
        self.variables.len()
    }

    /// Dimension of the projective scheme.
    pub fn dimension(&self) -> usize {
        self.krull_dim - 1
    }

    /// The same ideal with the weight vector shifted by `c` in every slot.
    pub fn shifted(&self, c: i64) -> Self {
        let eta = self.eta.shifted(c);
        let initial = initial_ideal(&self.ideal, &eta);
        TestConfiguration { eta, initial, name: self.name.clone(), ..self.clone() }
    }

    /// Degree-`k` standard monomials of the central fiber.
    pub fn basis(&self, k: u32) -> Vec<Monomial> {
        standard_monomials_for(self.initial.leading_monomials(), self.ambient_dim(), k).monomials
    }

    /// `(d_k, w_k)` without building the full slice.
    pub fn weight_data(&self, k: u32) -> (usize, BigInt) {
        let basis = self.basis(k);
        let w: i64 = basis.iter().map(|m| crate::exact::weight_unchecked(m, &self.eta)).sum();
        (basis.len(), BigInt::from(w))
    }
}

/// Exact data of the action on the degree-`k` piece of the central fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSlice {
    pub k: u32,
    pub d_k: usize,
    pub w_k: BigInt,
    /// Weights `p·η` of the standard monomials, ascending.
    pub b_spectrum: Vec<i64>,
    /// Traceless weights `η_α − w_k/d_k`, ascending.
    pub a_spectrum: Vec<Rational>,
    pub sum_eta_sq: BigInt,
    pub tr_a_sq: Rational,
    pub lambda_min: Rational,
    pub lambda_next: Option<Rational>,
}

impl GradedSlice {
    pub fn b_min(&self) -> i64 {
        self.b_spectrum[0]
    }

    /// Smallest weight strictly above the minimum.
    pub fn b_next(&self) -> Option<i64> {
        let lo = self.b_min();
        self.b_spectrum.iter().copied().find(|b| *b > lo)
    }

    pub fn max_abs_lambda(&self) -> Rational {
        let lo = self.a_spectrum.first().cloned().unwrap_or_else(Rational::zero);
        let hi = self.a_spectrum.last().cloned().unwrap_or_else(Rational::zero);
        if lo.abs() > hi.abs() {
            lo.abs()
        } else {
            hi.abs()
        }
    }
}

pub fn graded_slice(t: &TestConfiguration, k: u32) -> GradedSlice {
    let basis = t.basis(k);
    let mut b: Vec<i64> = basis.iter().map(|m| crate::exact::weight_unchecked(m, t.eta())).collect();
    b.sort_unstable();
    slice_from_spectrum(k, b)
}

pub(crate) fn slice_from_spectrum(k: u32, b: Vec<i64>) -> GradedSlice {
    let d = b.len();
    let w: BigInt = b.iter().map(|x| BigInt::from(*x)).sum();
    let sum_sq: BigInt = b.iter().map(|x| BigInt::from(*x) * BigInt::from(*x)).sum();
    let mean = Rational::new(w.clone(), BigInt::from(d.max(1)));
    let a: Vec<Rational> = b.iter().map(|x| Rational::from_integer(BigInt::from(*x)) - &mean).collect();
    let tr_a_sq = Rational::from_integer(sum_sq.clone()) - Rational::new(&w * &w, BigInt::from(d.max(1)));
    let lambda_min = a.first().cloned().unwrap_or_else(Rational::zero);
    let lambda_next = a.iter().find(|x| **x > lambda_min).cloned();
    GradedSlice { k, d_k: d, w_k: w, b_spectrum: b, a_spectrum: a, sum_eta_sq: sum_sq, tr_a_sq, lambda_min, lambda_next }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorNormCheck {
    pub c_star: Rational,
    pub budget: Rational,
    pub pass: bool,
}

/// Compares `max_α |λ_α| / k` over `1 ≤ k ≤ k_max` with `max|η| + |F_0| + 1`.
pub fn operator_norm_check(t: &TestConfiguration, f0: &Rational, k_max: u32) -> OperatorNormCheck {
    let mut c_star = Rational::zero();
    for k in 1..=k_max {
        let s = graded_slice(t, k);
        let ratio = s.max_abs_lambda() / Rational::from_integer(BigInt::from(k));
        if ratio > c_star {
            c_star = ratio;
        }
    }
    let budget = Rational::from_integer(BigInt::from(t.eta().max_abs() + 1)) + f0.abs();
    let pass = c_star <= budget;
    OperatorNormCheck { c_star, budget, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn double_line() -> TestConfiguration {
        TestConfiguration::from_text("double", &["x", "y", "z"], &[0, 0, 1], &["x*z - y^2"]).unwrap()
    }

    /// Weights of all degree-k monomials in x,y,z avoiding y^2, by direct enumeration.
    fn double_line_weights(k: u32) -> Vec<i64> {
        let mut out = Vec::new();
        for a in 0..=k {
            for b in 0..=(k - a).min(1) {
                out.push((k - a - b) as i64);
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn double_line_first_slice() {
        let s = graded_slice(&double_line(), 1);
        assert_eq!(s.d_k, 3);
        assert_eq!(s.b_spectrum, vec![0, 0, 1]);
        assert_eq!(s.w_k, BigInt::from(1));
        assert_eq!(s.a_spectrum, vec![q(-1, 3), q(-1, 3), q(2, 3)]);
        assert_eq!(s.lambda_next, Some(q(2, 3)));
    }

    #[test]
    fn double_line_closed_forms() {
        let t = double_line();
        for k in 1..=12u32 {
            let s = graded_slice(&t, k);
            assert_eq!(s.b_spectrum, double_line_weights(k));
            let k = k as i64;
            assert_eq!(s.d_k as i64, 2 * k + 1);
            assert_eq!(s.w_k, BigInt::from(k * k));
            assert_eq!(s.tr_a_sq, q(2 * k * k * k + k, 3) - q(k.pow(4), 2 * k + 1));
            assert!(s.a_spectrum.iter().fold(Rational::zero(), |acc, x| acc + x).is_zero());
        }
    }

    #[test]
    fn uniform_weights_are_traceless_zero() {
        let t = TestConfiguration::from_text("trivial", &["x", "y", "z"], &[2, 2, 2], &["x*z - y^2"]).unwrap();
        for k in 1..=6 {
            let s = graded_slice(&t, k);
            assert!(s.a_spectrum.iter().all(Zero::is_zero));
            assert!(s.tr_a_sq.is_zero());
            assert_eq!(s.lambda_next, None);
        }
    }

    #[test]
    fn operator_norm_examples() {
        let c = operator_norm_check(&double_line(), &q(1, 2), 30);
        assert!(c.pass);
        assert!(c.c_star <= q(5, 2));
        let p1 = TestConfiguration::from_text("p1", &["x", "y"], &[1, 0], &[]).unwrap();
        let c = operator_norm_check(&p1, &q(1, 2), 30);
        assert_eq!(c.c_star, q(1, 2));
        assert!(c.pass);
        let triv = TestConfiguration::from_text("t", &["x", "y"], &[0, 0], &[]).unwrap();
        assert!(operator_norm_check(&triv, &q(0, 1), 5).c_star.is_zero());
    }

    #[test]
    fn validation() {
        let e = TestConfiguration::from_text("bad", &["x", "y", "z"], &[0, 0, 1], &["x*z - y"]).unwrap_err();
        assert!(matches!(e, ConfigError::Inhomogeneous { index: 0, ref degrees, .. } if degrees == &vec![2, 1]));
        let e = TestConfiguration::from_text("bad", &["x", "y"], &[0, 0, 1], &[]).unwrap_err();
        assert_eq!(e, ConfigError::WeightLength { expected: 2, found: 3 });
        let e = TestConfiguration::from_text("bad", &["x", "y"], &[0, 0], &["x", "y"]).unwrap_err();
        assert_eq!(e, ConfigError::Irrelevant);
        let e = TestConfiguration::from_text("bad", &["x", "y"], &[0, 0], &["1"]).unwrap_err();
        assert_eq!(e, ConfigError::UnitIdeal);
        assert_eq!(double_line().dimension(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn shift_leaves_traceless_data(c in -5i64..6, k in 1u32..8, flip in any::<bool>()) {
            let eta = if flip { [0, 0, -1] } else { [0, 1, 3] };
            let t = TestConfiguration::from_text("c", &["x", "y", "z"], &eta, &["x*z - y^2"]).unwrap();
            let (a, b) = (graded_slice(&t, k), graded_slice(&t.shifted(c), k));
            prop_assert_eq!(&a.a_spectrum, &b.a_spectrum);
            prop_assert_eq!(&a.tr_a_sq, &b.tr_a_sq);
            prop_assert_eq!(&a.lambda_min, &b.lambda_min);
            prop_assert_eq!(&a.lambda_next, &b.lambda_next);
            prop_assert_eq!(b.w_k, a.w_k + BigInt::from(c * k as i64 * a.d_k as i64));
        }
    }
}
