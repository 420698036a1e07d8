use num_complex::Complex;
use num_traits::Zero;

use super::NumericError;
use crate::exact::{Monomial, Polynomial};
use crate::scalar::Real;
use crate::Rational;

/// Polynomial chart `C^d → C^{m+1}` of one component of a cycle.
#[derive(Clone, Debug)]
pub struct Parametrization {
    chart_dim: usize,
    components: Vec<Polynomial<Rational>>,
    multiplicity: u32,
}

impl Parametrization {
    pub fn new(chart_dim: usize, components: Vec<Polynomial<Rational>>, multiplicity: u32) -> Result<Self, NumericError> {
        if components.is_empty() || multiplicity == 0 {
            return Err(NumericError::BadChart("a chart needs components and positive multiplicity".into()));
        }
        if let Some(c) = components.iter().find(|c| c.nvars() != chart_dim) {
            return Err(NumericError::Shape { expected: chart_dim, found: c.nvars() });
        }
        if components.iter().all(Polynomial::is_zero) {
            return Err(NumericError::BadChart("all components vanish identically".into()));
        }
        Ok(Parametrization { chart_dim, components, multiplicity })
    }

    /// Parses components written in the chart variables `u1..ud`.
    pub fn from_text(chart_dim: usize, components: &[&str], multiplicity: u32) -> Result<Self, NumericError> {
        let vars = chart_variables(chart_dim);
        let comps = components
            .iter()
            .map(|c| crate::exact::parse_polynomial(c, &vars).map_err(|e| NumericError::BadChart(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(chart_dim, comps, multiplicity)
    }

    pub fn chart_dim(&self) -> usize {
        self.chart_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    pub fn components(&self) -> &[Polynomial<Rational>] {
        &self.components
    }

    pub fn compile<R: Real>(&self) -> CompiledChart<R> {
        let terms = self
            .components
            .iter()
            .map(|p| p.terms().map(|(m, c)| (m.exponents().to_vec(), R::rational(c))).collect())
            .collect();
        CompiledChart { dim: self.chart_dim, terms }
    }

    /// Homogeneous coordinates of the limit point along `u = s·direction`,
    /// `s → ∞`: the top-degree parts evaluated at `direction`.
    pub fn at_infinity<R: Real>(&self, direction: &[Complex<R>]) -> Vec<Complex<R>> {
        let top = self.components.iter().filter_map(Polynomial::degree).max().unwrap_or(0);
        self.components
            .iter()
            .map(|p| {
                p.terms()
                    .filter(|(m, _)| m.degree() == top)
                    .fold(Complex::zero(), |acc, (m, c)| acc + monomial_value(m.exponents(), direction).scale(R::rational(c)))
            })
            .collect()
    }
}

pub fn chart_variables(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("u{i}")).collect()
}

fn monomial_value<R: Real>(e: &[u32], u: &[Complex<R>]) -> Complex<R> {
    e.iter().zip(u).fold(Complex::new(R::one(), R::zero()), |acc, (p, z)| acc * z.powu(*p))
}

/// Chart components ready for repeated floating-point evaluation.
#[derive(Clone, Debug)]
pub struct CompiledChart<R> {
    dim: usize,
    terms: Vec<Vec<(Vec<u32>, R)>>,
}

/// Values and holomorphic first derivatives of a map `C^d → C^{N}`.
#[derive(Clone, Debug)]
pub struct Jet<R> {
    pub values: Vec<Complex<R>>,
    /// `jac[j][i] = ∂σ_j/∂u_i`.
    pub jac: Vec<Vec<Complex<R>>>,
}

impl<R: Real> CompiledChart<R> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet(&self, u: &[Complex<R>]) -> Jet<R> {
        let d = self.dim;
        let mut values = Vec::with_capacity(self.terms.len());
        let mut jac = Vec::with_capacity(self.terms.len());
        for comp in &self.terms {
            let mut v = Complex::zero();
            let mut dv = vec![Complex::zero(); d];
            for (e, c) in comp {
                v = v + monomial_value(e, u).scale(*c);
                for i in 0..d {
                    if e[i] == 0 {
                        continue;
                    }
                    let mut de = e.clone();
                    de[i] -= 1;
                    dv[i] = dv[i] + monomial_value(&de, u).scale(*c * R::of(e[i] as f64));
                }
            }
            values.push(v);
            jac.push(dv);
        }
        Jet { values, jac }
    }
}

impl<R: Real> Jet<R> {
    /// Jet of `u ↦ (σ(u)^p)_p` for the given exponent vectors.
    pub fn monomials(&self, basis: &[Monomial]) -> Jet<R> {
        let d = self.jac.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(basis.len());
        let mut jac = Vec::with_capacity(basis.len());
        for m in basis {
            let e = m.exponents();
            values.push(monomial_value(e, &self.values));
            let mut dv = vec![Complex::zero(); d];
            for (j, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                // ∂(σ_j^p) · Π_{l≠j} σ_l^{e_l}
                let mut rest = Complex::new(R::one(), R::zero());
                for (l, &q) in e.iter().enumerate() {
                    let q = if l == j { q - 1 } else { q };
                    rest = rest * self.values[l].powu(q);
                }
                let f = rest.scale(R::of(p as f64));
                for i in 0..d {
                    dv[i] = dv[i] + f * self.jac[j][i];
                }
            }
            jac.push(dv);
        }
        Jet { values, jac }
    }

    /// Applies a linear map to the coordinates.
    pub fn transform(&self, m: &super::ComplexMatrix<R>) -> Jet<R> {
        let d = self.jac.first().map_or(0, Vec::len);
        let values = m.mul_vec(&self.values);
        let jac = (0..m.rows())
            .map(|r| {
                (0..d)
                    .map(|i| m.row(r).iter().zip(&self.jac).fold(Complex::zero(), |acc, (a, col)| acc + *a * col[i]))
                    .collect()
            })
            .collect();
        Jet { values, jac }
    }

    /// Multiplies coordinate `α` by the real factor `s[α]`.
    pub fn scale_rows(&mut self, s: &[R]) {
        for (a, f) in s.iter().enumerate() {
            self.values[a] = self.values[a].scale(*f);
            for z in &mut self.jac[a] {
                *z = z.scale(*f);
            }
        }
    }

    /// Density of the pulled-back Fubini-Study volume `ω_FS^d` against
    /// Lebesgue measure on the chart, normalized so a line has mass 1.
    ///
    /// Uses `g_ij̄ = Σ_{k<l} D^{kl}_i · conj(D^{kl}_j) / S²` with
    /// `D^{kl}_i = σ_k ∂_iσ_l − σ_l ∂_iσ_k`, which has no cancellation.
    pub fn fs_density(&self) -> Result<R, NumericError> {
        let d = self.jac.first().map_or(0, Vec::len);
        let scale = self.values.iter().fold(R::zero(), |m, z| m.max(z.norm()));
        if !(scale > R::zero()) {
            return Err(NumericError::Indeterminate);
        }
        let inv = R::one() / scale;
        let a: Vec<Complex<R>> = self.values.iter().map(|z| z.scale(inv)).collect();
        let da: Vec<Vec<Complex<R>>> = self.jac.iter().map(|r| r.iter().map(|z| z.scale(inv)).collect()).collect();
        let s: R = a.iter().map(|z| z.norm_sqr()).sum();
        let mut g = super::ComplexMatrix::<R>::zeros(d, d);
        let mut dkl = vec![Complex::zero(); d];
        for k in 0..a.len() {
            for l in k + 1..a.len() {
                for i in 0..d {
                    dkl[i] = a[k] * da[l][i] - a[l] * da[k][i];
                }
                for i in 0..d {
                    for j in 0..d {
                        g[(i, j)] = g[(i, j)] + dkl[i] * dkl[j].conj();
                    }
                }
            }
        }
        let det = g.determinant().re / s.powi(2 * d as i32);
        let fact: f64 = (1..=d).map(|i| i as f64).product();
        Ok((det * R::of(fact) / R::PI().powi(d as i32)).max(R::zero()))
    }

    pub fn norm_sqr(&self) -> R {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub(crate) fn to_c64<R: Real>(u: &[Complex<R>]) -> Vec<(f64, f64)> {
    u.iter().map(|z| (z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))).collect()
}
