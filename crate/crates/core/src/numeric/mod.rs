//! Floating-point geometry of parametrized projective varieties:
//! Fubini-Study volumes, Monte Carlo quadrature, Gram and moment matrices,
//! energy derivatives and Bergman data.

mod bergman;
mod chart;
mod matrix;
mod montecarlo;

pub use bergman::{
    bergman_density, build_level, energy_derivative, energy_derivative_at_t, equivariant_gram_schmidt,
    fs_volume_density, gram_matrix, moment_matrix, n2_integral, BergmanLevel, GSResult, MatrixEstimate, N2Estimate,
};
pub use chart::{chart_variables, CompiledChart, Jet, Parametrization};
pub use matrix::{ComplexMatrix, HermitianMatrix};
pub use montecarlo::{mc_integrate, Estimate, McOptions, SamplingLaw};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive definite: pivot {index} is {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("basis is linearly dependent on the cycle (pivot {index} collapsed)")]
    DependentBasis { index: usize },
    #[error("all homogeneous coordinates vanish at this point")]
    Indeterminate,
    #[error("non-finite sample: component {component}, batch {batch}, sample {sample}, chart point {point:?}")]
    NonFinite { component: usize, batch: usize, sample: usize, point: Vec<(f64, f64)> },
    #[error("invalid chart: {0}")]
    BadChart(String),
    #[error("invalid Monte Carlo options: {0}")]
    BadOptions(String),
}
