//! Exact and numerical invariants of test configurations of polarized
//! projective varieties.
//!
//! The exact layer (`exact`, `groebner`, `spectra`, `asymptotics`) works
//! over [`Rational`]. The numeric layer (`numeric`, `ray`) is generic over
//! [`scalar::Real`]; the aliases below fix it to `f64`.

pub mod asymptotics;
pub mod config;
pub mod exact;
pub mod groebner;
pub mod numeric;
pub mod ray;
pub mod scalar;
pub mod spectra;

pub type Rational = num_rational::BigRational;

pub type RationalPolynomial = exact::Polynomial<Rational>;
pub type Level = numeric::BergmanLevel<f64>;
pub type Grid = ray::RayGrid<f64>;
pub type Matrix = numeric::ComplexMatrix<f64>;
pub type Hermitian = numeric::HermitianMatrix<f64>;

pub use asymptotics::{chow_weight_algebraic, fit_asymptotics, futaki_f, AsymptoticReport, SlopeLimit};
pub use config::LoadedConfiguration;
pub use spectra::{graded_slice, TestConfiguration};
