use num_bigint::BigInt;
use num_complex::Complex;

use super::chart::{CompiledChart, Jet};
use super::montecarlo::{mc_integrate, Estimate, McOptions, SamplingLaw};
use super::{ComplexMatrix, HermitianMatrix, NumericError, Parametrization};
use crate::exact::{weight_unchecked, Monomial};
use crate::scalar::Real;
use crate::spectra::TestConfiguration;
use crate::Rational;

/// Fubini-Study volume density of a chart at `u`, normalized so a line has mass 1.
pub fn fs_volume_density<R: Real>(p: &Parametrization, u: &[Complex<R>]) -> Result<R, NumericError> {
    p.compile::<R>().jet(u).fs_density()
}

/// Monte Carlo estimate of a Hermitian matrix with per-entry standard errors.
#[derive(Clone, Debug)]
pub struct MatrixEstimate<R> {
    pub matrix: HermitianMatrix<R>,
    /// Standard error of `|entry|`, row-major.
    pub stderr: Vec<R>,
    pub consistent: bool,
}

impl<R: Real> MatrixEstimate<R> {
    pub fn stderr_at(&self, i: usize, j: usize) -> R {
        self.stderr[i * self.matrix.size() + j]
    }
}

/// `∫ v v* w` where `sample(c, u)` returns the vector `v` and scalar weight `w`.
fn outer_product_integral<R, F>(
    cycle: &[Parametrization],
    size: usize,
    opts: &McOptions,
    sample: F,
) -> Result<MatrixEstimate<R>, NumericError>
where
    R: Real,
    F: Fn(usize, &[Complex<R>]) -> Result<(Vec<Complex<R>>, R), NumericError> + Sync,
{
    let pairs: Vec<(usize, usize)> = (0..size).flat_map(|i| (i..size).map(move |j| (i, j))).collect();
    let est = mc_integrate(cycle, 2 * pairs.len(), opts, |c, u, out| {
        let (v, w) = sample(c, u)?;
        for (slot, (i, j)) in pairs.iter().enumerate() {
            let z = v[*i] * v[*j].conj();
            out[2 * slot] = z.re * w;
            out[2 * slot + 1] = z.im * w;
        }
        Ok(())
    })?;
    let mut m = ComplexMatrix::zeros(size, size);
    let mut se = vec![R::zero(); size * size];
    for (slot, (i, j)) in pairs.iter().enumerate() {
        let z = Complex::new(est.values[2 * slot], est.values[2 * slot + 1]);
        let e = (est.stderr[2 * slot].powi(2) + est.stderr[2 * slot + 1].powi(2)).sqrt();
        m[(*i, *j)] = z;
        m[(*j, *i)] = z.conj();
        se[i * size + j] = e;
        se[j * size + i] = e;
    }
    Ok(MatrixEstimate { matrix: HermitianMatrix::symmetrize(m), stderr: se, consistent: est.consistent() })
}

fn unit_jet<R: Real>(chart: &CompiledChart<R>, u: &[Complex<R>]) -> Result<(Jet<R>, R), NumericError> {
    let jet = chart.jet(u);
    let norm = jet.norm_sqr().sqrt();
    if !(norm > R::zero()) {
        return Err(NumericError::Indeterminate);
    }
    let density = jet.fs_density()?;
    let mut unit = jet;
    unit.values.iter_mut().for_each(|z| *z = z.unscale(norm));
    Ok((unit, density))
}

/// `H[α, β] = ∫ s_α s̄_β / ‖z‖^{2k} ω_FS^n` over the cycle.
pub fn gram_matrix<R: Real>(
    cycle: &[Parametrization],
    k: u32,
    basis: &[Monomial],
    opts: &McOptions,
) -> Result<MatrixEstimate<R>, NumericError> {
    if let Some(b) = basis.iter().find(|b| b.degree() != k) {
        return Err(NumericError::Shape { expected: k as usize, found: b.degree() as usize });
    }
    let charts: Vec<CompiledChart<R>> = cycle.iter().map(Parametrization::compile).collect();
    outer_product_integral(cycle, basis.len(), opts, |c, u| {
        let (unit, density) = unit_jet(&charts[c], u)?;
        let v = basis.iter().map(|m| monomial_at(m.exponents(), &unit.values)).collect();
        Ok((v, density))
    })
}

fn monomial_at<R: Real>(e: &[u32], z: &[Complex<R>]) -> Complex<R> {
    e.iter().zip(z).fold(Complex::new(R::one(), R::zero()), |acc, (p, x)| acc * x.powu(*p))
}

/// Change of basis produced by weight-ordered Gram-Schmidt.
#[derive(Clone, Debug)]
pub struct GSResult<R> {
    /// Distinct weights ascending, with multiplicities.
    pub blocks: Vec<(i64, usize)>,
    /// Row `i` expresses the new vector `i` in the old basis; `M·G·M* = I`.
    pub m: ComplexMatrix<R>,
    pub weights: Vec<i64>,
}

impl<R: Real> GSResult<R> {
    /// True when `M[i][j] = 0` whenever vector `j` has larger weight than `i`.
    pub fn is_block_lower_triangular(&self) -> bool {
        let n = self.weights.len();
        (0..n).all(|i| (0..n).all(|j| self.weights[j] <= self.weights[i] || self.m[(i, j)] == Complex::new(R::zero(), R::zero())))
    }
}

/// Orthonormalizes in order of increasing weight (stable within a weight),
/// so each new vector only mixes in old vectors of weight at most its own.
pub fn equivariant_gram_schmidt<R: Real>(weights: &[i64], g: &HermitianMatrix<R>) -> Result<GSResult<R>, NumericError> {
    let n = g.size();
    if weights.len() != n {
        return Err(NumericError::Shape { expected: n, found: weights.len() });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| weights[i]);
    let sorted = ComplexMatrix::from_fn(n, n, |a, b| g.matrix()[(order[a], order[b])]);
    let l = HermitianMatrix::symmetrize(sorted).cholesky(R::pivot_floor()).map_err(|e| match e {
        NumericError::NotPositiveDefinite { index, pivot } => NumericError::NotPositiveDefinite { index: order[index], pivot },
        other => other,
    })?;
    let inv = super::matrix::lower_triangular_inverse(&l);
    let mut m = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..=a {
            m[(order[a], order[b])] = inv[(a, b)];
        }
    }
    let mut blocks: Vec<(i64, usize)> = Vec::new();
    for &i in &order {
        match blocks.last_mut() {
            Some((w, c)) if *w == weights[i] => *c += 1,
            _ => blocks.push((weights[i], 1)),
        }
    }
    Ok(GSResult { blocks, m, weights: weights.to_vec() })
}

/// Orthonormal sections of `O(k)` on the generic fiber, adapted to the action.
#[derive(Clone, Debug)]
pub struct BergmanLevel<R> {
    pub k: u32,
    /// Dimension of the variety.
    pub n: usize,
    pub basis: Vec<Monomial>,
    /// `p·η` for each basis monomial.
    pub weights: Vec<i64>,
    /// Traceless weights `p·η − w_k/d_k`, exact.
    pub lambdas_exact: Vec<Rational>,
    pub lambdas: Vec<R>,
    pub gram: MatrixEstimate<R>,
    pub gs: GSResult<R>,
}

/// Gram matrix of the standard monomials over `fiber`, then equivariant
/// Gram-Schmidt with their weights.
pub fn build_level<R: Real>(
    t: &TestConfiguration,
    fiber: &[Parametrization],
    k: u32,
    opts: &McOptions,
) -> Result<BergmanLevel<R>, NumericError> {
    if let Some(p) = fiber.iter().find(|p| p.ambient_dim() != t.ambient_dim()) {
        return Err(NumericError::Shape { expected: t.ambient_dim(), found: p.ambient_dim() });
    }
    let basis = t.basis(k);
    let weights: Vec<i64> = basis.iter().map(|m| weight_unchecked(m, t.eta())).collect();
    let total: i64 = weights.iter().sum();
    let mean = Rational::new(BigInt::from(total), BigInt::from(basis.len().max(1)));
    let lambdas_exact: Vec<Rational> = weights.iter().map(|w| Rational::from_integer(BigInt::from(*w)) - &mean).collect();
    let lambdas = lambdas_exact.iter().map(R::rational).collect();
    let gram = gram_matrix(fiber, k, &basis, opts)?;
    let gs = equivariant_gram_schmidt(&weights, &gram.matrix).map_err(|e| match e {
        NumericError::NotPositiveDefinite { index, .. } => NumericError::DependentBasis { index },
        other => other,
    })?;
    Ok(BergmanLevel { k, n: t.dimension(), basis, weights, lambdas_exact, lambdas, gram, gs })
}

impl<R: Real> BergmanLevel<R> {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// Orthonormal sections at homogeneous coordinates `z`, divided by `‖z‖^k`.
    pub fn unit_sections(&self, z: &[Complex<R>]) -> Result<Vec<Complex<R>>, NumericError> {
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<R>().sqrt();
        if !(norm > R::zero()) {
            return Err(NumericError::Indeterminate);
        }
        let unit: Vec<Complex<R>> = z.iter().map(|c| c.unscale(norm)).collect();
        let mono: Vec<Complex<R>> = self.basis.iter().map(|m| monomial_at(m.exponents(), &unit)).collect();
        Ok(self.gs.m.mul_vec(&mono))
    }

    /// Jet of the orthonormal-section map composed with a chart.
    pub fn section_jet(&self, chart_jet: &Jet<R>) -> Jet<R> {
        chart_jet.monomials(&self.basis).transform(&self.gs.m)
    }
}

/// `ρ_k(z) = Σ_α |s_α(z)|² / ‖z‖^{2k}` for orthonormal `s_α`.
pub fn bergman_density<R: Real>(level: &BergmanLevel<R>, z: &[Complex<R>]) -> Result<R, NumericError> {
    Ok(level.unit_sections(z)?.iter().map(|s| s.norm_sqr()).sum())
}

/// `M[α, β] = ∫_{Z_k} z_α z̄_β / ‖z‖² ω_FS^n` for the image of the cycle
/// under the orthonormal sections of `level`.
pub fn moment_matrix<R: Real>(
    cycle: &[Parametrization],
    level: &BergmanLevel<R>,
    opts: &McOptions,
) -> Result<MatrixEstimate<R>, NumericError> {
    let charts: Vec<CompiledChart<R>> = cycle.iter().map(Parametrization::compile).collect();
    outer_product_integral(cycle, level.size(), opts, |c, u| {
        let jet = level.section_jet(&charts[c].jet(u));
        let norm = jet.norm_sqr().sqrt();
        if !(norm > R::zero()) {
            return Err(NumericError::Indeterminate);
        }
        let density = jet.fs_density()?;
        Ok((jet.values.iter().map(|z| z.unscale(norm)).collect(), density))
    })
}

/// `(n+1)·Tr((B + B*)·M)`.
pub fn energy_derivative<R: Real>(n: usize, m: &HermitianMatrix<R>, b: &ComplexMatrix<R>) -> Result<R, NumericError> {
    if b.rows() != m.size() || b.cols() != m.size() {
        return Err(NumericError::Shape { expected: m.size(), found: b.rows() });
    }
    let sym = ComplexMatrix::from_fn(b.rows(), b.cols(), |i, j| b[(i, j)] + b[(j, i)].conj());
    Ok(R::of((n + 1) as f64) * sym.mul(m.matrix())?.trace().re)
}

/// `(n+1)∫_{e^{tB}Z} z*(B+B*)z / z*z ω_FS^n` for diagonal `B = diag(b)`,
/// where `Z` is the image of the cycle under the sections of `level`.
///
/// For `t ≠ 0` the chart law is widened to log-scales spanning
/// `|t|·(max b − min b)`, where the flowed volume lives.
pub fn energy_derivative_at_t<R: Real>(
    cycle: &[Parametrization],
    level: &BergmanLevel<R>,
    b: &[R],
    t: R,
    opts: &McOptions,
) -> Result<Estimate<R>, NumericError> {
    if b.len() != level.size() {
        return Err(NumericError::Shape { expected: level.size(), found: b.len() });
    }
    let (lo, hi) = b.iter().fold((R::infinity(), R::neg_infinity()), |(l, h), x| (l.min(*x), h.max(*x)));
    let reference = if t < R::zero() { lo } else { hi };
    // projectively immaterial rescaling so every factor is at most 1
    let factors: Vec<R> = b.iter().map(|x| (t * (*x - reference)).exp()).collect();
    let mut opts = opts.clone();
    if t != R::zero() {
        let span = (t * (hi - lo)).abs().to_f64().unwrap_or(0.0);
        opts.law = SamplingLaw::spread(span);
    }
    let charts: Vec<CompiledChart<R>> = cycle.iter().map(Parametrization::compile).collect();
    let two_n1 = R::of(2.0 * (level.n + 1) as f64);
    mc_integrate(cycle, 1, &opts, |c, u, out| {
        let mut jet = level.section_jet(&charts[c].jet(u));
        jet.scale_rows(&factors);
        let s = jet.norm_sqr();
        if !(s > R::zero()) {
            return Err(NumericError::Indeterminate);
        }
        let h: R = jet.values.iter().zip(b).map(|(z, x)| z.norm_sqr() * *x).sum::<R>() / s;
        out[0] = two_n1 * h * jet.fs_density()?;
        Ok(())
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct N2Estimate<R> {
    pub value: R,
    pub stderr: R,
    /// Mean of the Hamiltonian over the cycle.
    pub h_hat: R,
    pub volume: R,
}

/// `∫_{X_0} (h − ĥ)² ω_FS^n` with `h(z) = Σ λ_j|z_j|² / Σ|z_j|²`, multiplicity-weighted.
pub fn n2_integral<R: Real>(
    cycle: &[Parametrization],
    lambdas: &[R],
    opts: &McOptions,
) -> Result<N2Estimate<R>, NumericError> {
    if let Some(p) = cycle.iter().find(|p| p.ambient_dim() != lambdas.len()) {
        return Err(NumericError::Shape { expected: lambdas.len(), found: p.ambient_dim() });
    }
    let charts: Vec<CompiledChart<R>> = cycle.iter().map(Parametrization::compile).collect();
    let hamiltonian = |c: usize, u: &[Complex<R>]| -> Result<(R, R), NumericError> {
        let (unit, density) = unit_jet(&charts[c], u)?;
        let h = unit.values.iter().zip(lambdas).map(|(z, l)| z.norm_sqr() * *l).sum();
        Ok((h, density))
    };
    let first = mc_integrate(cycle, 2, opts, |c, u, out| {
        let (h, d) = hamiltonian(c, u)?;
        out[0] = d;
        out[1] = h * d;
        Ok(())
    })?;
    let volume = first.values[0];
    let h_hat = first.values[1] / volume;
    // centring error enters only at second order, so a second pass suffices
    let second = mc_integrate(cycle, 1, opts, |c, u, out| {
        let (h, d) = hamiltonian(c, u)?;
        out[0] = (h - h_hat).powi(2) * d;
        Ok(())
    })?;
    Ok(N2Estimate { value: second.value(), stderr: second.error(), h_hat, volume })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn p1() -> Vec<Parametrization> {
        vec![Parametrization::from_text(1, &["1", "u1"], 1).unwrap()]
    }

    /// `∫_0^∞ f(ρ) dρ` by the midpoint rule after `ρ = s/(1−s)`.
    fn radial(f: impl Fn(f64) -> f64) -> f64 {
        let n = 400_000;
        (0..n)
            .map(|i| {
                let s = (i as f64 + 0.5) / n as f64;
                f(s / (1.0 - s)) / ((1.0 - s) * (1.0 - s)) / n as f64
            })
            .sum()
    }

    fn random_pd(rng: &mut impl Rng, n: usize) -> HermitianMatrix<f64> {
        let a = ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let mut g = a.mul(&a.adjoint()).unwrap();
        for i in 0..n {
            g[(i, i)] = g[(i, i)] + c(0.5, 0.0);
        }
        HermitianMatrix::new(g, 1e-12).unwrap()
    }

    #[test]
    fn gram_schmidt_basics() {
        let id = HermitianMatrix::<f64>::identity(4);
        let r = equivariant_gram_schmidt(&[3, 1, 3, 0], &id).unwrap();
        assert!(r.m.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        assert_eq!(r.blocks, vec![(0, 1), (1, 1), (3, 2)]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let g = random_pd(&mut rng, 5);
        let r = equivariant_gram_schmidt(&[2, 0, 1, 0, 2], &g).unwrap();
        let check = r.m.mul(g.matrix()).unwrap().mul(&r.m.adjoint()).unwrap();
        assert!(check.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-10);
        assert!(r.is_block_lower_triangular());
        assert!(equivariant_gram_schmidt(&[0, 0], &HermitianMatrix::new(ComplexMatrix::from_fn(2, 2, |_, _| c(1.0, 0.0)), 1e-12).unwrap()).is_err());
    }

    #[test]
    fn p1_gram_against_beta_integrals() {
        let basis = vec![Monomial::new(vec![2, 0]), Monomial::new(vec![1, 1]), Monomial::new(vec![0, 2])];
        let g = gram_matrix::<f64>(&p1(), 2, &basis, &McOptions::new(100_000, 4)).unwrap();
        for b in 0..3 {
            let oracle = radial(|r| r.powi(b as i32) / (1.0 + r).powi(4));
            let got = g.matrix.matrix()[(2 - b, 2 - b)].re;
            assert!((got - oracle).abs() < 3.0 * g.stderr_at(2 - b, 2 - b), "{b}: {got} vs {oracle}");
        }
        assert!((radial(|r| 1.0 / (1.0 + r).powi(4)) - 1.0 / 3.0).abs() < 1e-6);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(g.matrix.matrix()[(i, j)].norm() < 3.0 * g.stderr_at(i, j) + 1e-15);
        }
    }

    #[test]
    fn dependent_basis_is_flagged() {
        let t = TestConfiguration::from_text("conic", &["x", "y", "z"], &[0, 0, 1], &["x*z - y^2"]).unwrap();
        let fiber = vec![Parametrization::from_text(1, &["1", "u1", "u1^2"], 1).unwrap()];
        let basis = vec![Monomial::new(vec![1, 0, 1]), Monomial::new(vec![0, 2, 0])];
        let g = gram_matrix::<f64>(&fiber, 2, &basis, &McOptions::new(4096, 1)).unwrap();
        assert!(equivariant_gram_schmidt(&[1, 0], &g.matrix).is_err());
        assert!(build_level::<f64>(&t, &fiber, 2, &McOptions::new(20_000, 1)).is_ok());
    }

    #[test]
    fn conic_moment_matrix_and_energy() {
        let t = TestConfiguration::from_text("conic", &["x", "y", "z"], &[0, 0, 1], &["x*z - y^2"]).unwrap();
        let fiber = vec![Parametrization::from_text(1, &["1", "u1", "u1^2"], 1).unwrap()];
        let opts = McOptions::new(100_000, 11);
        let level = build_level::<f64>(&t, &fiber, 1, &opts).unwrap();
        let m = moment_matrix(&fiber, &level, &opts).unwrap();
        let tr = m.matrix.matrix().trace().re;
        let se: f64 = (0..3).map(|i| m.stderr_at(i, i).powi(2)).sum::<f64>().sqrt();
        assert!((tr - 2.0).abs() < 3.0 * se + 1e-3, "{tr}");
        let b = ComplexMatrix::from_diagonal(&level.lambdas);
        let e0 = energy_derivative(1, &m.matrix, &b).unwrap();
        let direct = energy_derivative_at_t(&fiber, &level, &level.lambdas, 0.0, &McOptions::new(100_000, 12)).unwrap();
        let se_m: f64 = (0..3).map(|i| (4.0 * level.lambdas[i] * m.stderr_at(i, i)).powi(2)).sum::<f64>().sqrt();
        assert!((e0 - direct.value()).abs() < 3.0 * (direct.error().powi(2) + se_m.powi(2)).sqrt(), "{e0} vs {direct:?}");
        assert_eq!(energy_derivative(1, &m.matrix, &ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        let id = energy_derivative(1, &m.matrix, &ComplexMatrix::identity(3)).unwrap();
        assert!((id - 4.0 * tr).abs() < 1e-12);
    }

    #[test]
    fn energy_derivative_is_linear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let m = random_pd(&mut rng, 4);
        let b1 = ComplexMatrix::from_fn(4, 4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let b2 = ComplexMatrix::from_fn(4, 4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let sum = ComplexMatrix::from_fn(4, 4, |i, j| b1[(i, j)] + b2[(i, j)]);
        let lhs = energy_derivative(2, &m, &sum).unwrap();
        let rhs = energy_derivative(2, &m, &b1).unwrap() + energy_derivative(2, &m, &b2).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(energy_derivative(2, &m, &ComplexMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn double_line_n2() {
        let cycle = vec![Parametrization::from_text(1, &["1", "0", "u1"], 2).unwrap()];
        let lam = [-1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0];
        let e = n2_integral::<f64>(&cycle, &lam, &McOptions::new(100_000, 3)).unwrap();
        assert!((e.value - 1.0 / 6.0).abs() < 3.0 * e.stderr, "{e:?}");
        assert!((e.h_hat - 1.0 / 6.0).abs() < 1e-2);
        let shifted: Vec<f64> = lam.iter().map(|l| l + 5.0).collect();
        let s = n2_integral::<f64>(&cycle, &shifted, &McOptions::new(100_000, 3)).unwrap();
        assert!((s.value - e.value).abs() < 1e-9);
        let flat = n2_integral::<f64>(&cycle, &[0.25; 3], &McOptions::new(10_000, 3)).unwrap();
        assert!(flat.value.abs() < 1e-20);
    }

    #[test]
    fn round_p1_density_is_flat() {
        let t = TestConfiguration::from_text("p1", &["x", "y"], &[1, 0], &[]).unwrap();
        let level = build_level::<f64>(&t, &p1(), 3, &McOptions::new(200_000, 21)).unwrap();
        for z in [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.3, 0.1), c(1.0, -2.0)], [c(0.0, 0.0), c(1.0, 0.0)]] {
            let rho = bergman_density(&level, &z).unwrap();
            assert!((rho - 4.0).abs() < 0.04 * 4.0, "{rho}");
        }
        let t0 = TestConfiguration::from_text("p1", &["x", "y"], &[0, 0], &[]).unwrap();
        let level0 = build_level::<f64>(&t0, &p1(), 0, &McOptions::new(1000, 1)).unwrap();
        assert!((bergman_density(&level0, &[c(0.2, 0.0), c(1.0, 1.0)]).unwrap() - 1.0).abs() < 1e-12);
    }
}
