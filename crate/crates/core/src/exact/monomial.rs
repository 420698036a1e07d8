use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Exponent vector `p = (p_0, ..., p_m)` of a monomial `X^p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, if `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        Some(Monomial(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect()))
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Indices of variables with a positive exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, _)| i)
    }

    /// All monomials of total degree `k` in `nvars` variables, in
    /// lexicographically decreasing exponent order.
    pub fn all_of_degree(nvars: usize, k: u32) -> Vec<Monomial> {
        fn rec(nvars: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if prefix.len() + 1 == nvars {
                prefix.push(k);
                out.push(Monomial(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=k).rev() {
                prefix.push(e);
                rec(nvars, k - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if nvars == 0 {
            if k == 0 {
                out.push(Monomial(Vec::new()));
            }
            return out;
        }
        rec(nvars, k, &mut Vec::with_capacity(nvars), &mut out);
        out
    }

    pub fn fmt_with(&self, vars: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .zip(vars)
            .filter(|(e, _)| **e > 0)
            .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Integer weights `η = (η_0, ..., η_m)` of the diagonal C^× action.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightVector(Vec<i64>);

impl WeightVector {
    pub fn new(eta: Vec<i64>) -> Self {
        WeightVector(eta)
    }

    pub fn zeros(n: usize) -> Self {
        WeightVector(vec![0; n])
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        WeightVector(self.0.iter().map(|e| -e).collect())
    }

    pub fn shifted(&self, c: i64) -> Self {
        WeightVector(self.0.iter().map(|e| e + c).collect())
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|e| e.abs()).max().unwrap_or(0)
    }

    pub fn is_uniform(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

/// The dot product `p·η`.
pub fn monomial_weight(p: &Monomial, eta: &WeightVector) -> Result<i64, AlgebraError> {
    if p.nvars() != eta.len() {
        return Err(AlgebraError::LengthMismatch { expected: eta.len(), found: p.nvars() });
    }
    Ok(p.0.iter().zip(&eta.0).map(|(e, w)| *e as i64 * w).sum())
}

pub(crate) fn weight_unchecked(p: &Monomial, eta: &WeightVector) -> i64 {
    p.0.iter().zip(&eta.0).map(|(e, w)| *e as i64 * w).sum()
}

/// Degree first, then the weight `p·η`, then graded reverse lexicographic.
///
/// Under [`TermOrder::cmp`] a monomial of smaller weight compares `Less`.
/// Gröbner leading terms are the `Greater` end of this order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermOrder {
    weight: WeightVector,
}

impl TermOrder {
    pub fn new(weight: WeightVector) -> Self {
        TermOrder { weight }
    }

    pub fn grevlex(nvars: usize) -> Self {
        TermOrder { weight: WeightVector::zeros(nvars) }
    }

    pub fn weight(&self) -> &WeightVector {
        &self.weight
    }

    pub fn nvars(&self) -> usize {
        self.weight.len()
    }

    pub fn cmp(&self, p: &Monomial, q: &Monomial) -> Ordering {
        p.degree()
            .cmp(&q.degree())
            .then_with(|| weight_unchecked(p, &self.weight).cmp(&weight_unchecked(q, &self.weight)))
            .then_with(|| grevlex_tiebreak(p, q))
    }
}

/// Among equal degrees, the monomial with the smaller last differing exponent is larger.
fn grevlex_tiebreak(p: &Monomial, q: &Monomial) -> Ordering {
    for (a, b) in p.0.iter().zip(&q.0).rev() {
        if a != b {
            return b.cmp(a);
        }
    }
    Ordering::Equal
}

pub fn compare_monomials(order: &TermOrder, p: &Monomial, q: &Monomial) -> Result<Ordering, AlgebraError> {
    for m in [p, q] {
        if m.nvars() != order.nvars() {
            return Err(AlgebraError::LengthMismatch { expected: order.nvars(), found: m.nvars() });
        }
    }
    Ok(order.cmp(p, q))
}
