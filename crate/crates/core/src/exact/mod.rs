//! Exact multivariate polynomial arithmetic over a coefficient field,
//! monomials, weight vectors and weight-refined term orders.

mod monomial;
mod parse;
mod polynomial;

pub use monomial::{compare_monomials, monomial_weight, Monomial, TermOrder, WeightVector};
pub use parse::parse_polynomial;
pub use polynomial::Polynomial;

#[allow(unused_imports)]
pub(crate) use monomial::weight_unchecked;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown variable '{name}' at position {position}")]
    UnknownVariable { name: String, position: usize },
    #[error("negative exponent at position {position}")]
    NegativeExponent { position: usize },
    #[error("length mismatch: expected {expected} coordinates, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}
