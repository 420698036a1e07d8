use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use super::monomial::{weight_unchecked, Monomial, TermOrder, WeightVector};
use crate::scalar::Field;

/// Sparse multivariate polynomial; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial<F> {
    nvars: usize,
    terms: BTreeMap<Monomial, F>,
}

impl<F: Field> Polynomial<F> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: F) -> Self {
        Self::monomial(Monomial::one(nvars), c)
    }

    pub fn monomial(m: Monomial, c: F) -> Self {
        let nvars = m.nvars();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { nvars, terms }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, F)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&F> {
        self.terms.get(m)
    }

    pub fn add_term(&mut self, m: Monomial, c: F) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn leading(&self, order: &TermOrder) -> Option<(&Monomial, &F)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    pub fn leading_monomial(&self, order: &TermOrder) -> Option<&Monomial> {
        self.leading(order).map(|(m, _)| m)
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a.clone() * c.clone())).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(n, a)| (n.mul(m), a.clone() * c.clone())).collect(),
        }
    }

    pub fn monic(&self, order: &TermOrder) -> Self {
        match self.leading(order) {
            Some((_, c)) => {
                let inv = F::one() / c.clone();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    /// Terms of extremal weight `p·η`; `minimal = true` keeps the lightest ones.
    pub fn weight_part(&self, eta: &WeightVector, minimal: bool) -> Self {
        let ws = self.terms.keys().map(|m| weight_unchecked(m, eta));
        let target = if minimal { ws.min() } else { ws.max() };
        let Some(target) = target else {
            return self.clone();
        };
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| weight_unchecked(m, eta) == target)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Terms listed leading-first under `order`.
    pub fn sorted_terms(&self, order: &TermOrder) -> Vec<(&Monomial, &F)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| order.cmp(b.0, a.0));
        v
    }

    /// Canonical text: terms leading-first, coefficients as `p/q`.
    pub fn to_text(&self, vars: &[String], order: &TermOrder) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.sorted_terms(order).into_iter().enumerate() {
            let neg = c.is_negative_coeff();
            let abs = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = m.fmt_with(vars);
            if abs.is_one() {
                out.push_str(&mono);
            } else if m.degree() == 0 {
                out.push_str(&abs.to_text());
            } else {
                out.push_str(&format!("{}*{}", abs.to_text(), mono));
            }
        }
        out
    }

    /// Evaluate by substituting polynomials for the variables.
    pub fn substitute(&self, images: &[Polynomial<F>]) -> Polynomial<F> {
        assert_eq!(images.len(), self.nvars);
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, e) in m.exponents().iter().enumerate() {
                for _ in 0..*e {
                    t = &t * &images[i];
                }
            }
            out = out + t;
        }
        out
    }
}

impl<F: Field> Add for Polynomial<F> {
    type Output = Polynomial<F>;
    fn add(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<F: Field> Sub for Polynomial<F> {
    type Output = Polynomial<F>;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<F: Field> Neg for Polynomial<F> {
    type Output = Polynomial<F>;
    fn neg(self) -> Self {
        Polynomial { nvars: self.nvars, terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl<F: Field> Mul for &Polynomial<F> {
    type Output = Polynomial<F>;
    fn mul(self, rhs: Self) -> Polynomial<F> {
        let mut out = Polynomial::zero(self.nvars);
        for (m, a) in &self.terms {
            for (n, b) in &rhs.terms {
                out.add_term(m.mul(n), a.clone() * b.clone());
            }
        }
        out
    }
}

impl<F: Field> Mul for Polynomial<F> {
    type Output = Polynomial<F>;
    fn mul(self, rhs: Self) -> Polynomial<F> {
        &self * &rhs
    }
}
