//! Buchberger's algorithm, normal forms, weight initial ideals and
//! standard-monomial bases of graded quotients.

use thiserror::Error;

use crate::exact::{Monomial, Polynomial, TermOrder, WeightVector};
use crate::scalar::Field;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroebnerError {
    #[error("generator {index} is not homogeneous (term degrees {degrees:?})")]
    Inhomogeneous { index: usize, degrees: Vec<u32> },
    #[error("generator {index} has {found} variables, expected {expected}")]
    AmbientMismatch { index: usize, expected: usize, found: usize },
}

/// Homogeneous ideal of `F[X_0..X_m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ideal<F> {
    generators: Vec<Polynomial<F>>,
    ambient_dim: usize,
}

impl<F: Field> Ideal<F> {
    /// Zero generators are dropped; all others must be homogeneous.
    pub fn new(ambient_dim: usize, generators: Vec<Polynomial<F>>) -> Result<Self, GroebnerError> {
        let mut kept = Vec::new();
        for (index, g) in generators.into_iter().enumerate() {
            if g.nvars() != ambient_dim {
                return Err(GroebnerError::AmbientMismatch { index, expected: ambient_dim, found: g.nvars() });
            }
            if g.is_zero() {
                continue;
            }
            if !g.is_homogeneous() {
                let mut degrees: Vec<u32> = g.terms().map(|(m, _)| m.degree()).collect();
                degrees.sort_unstable_by(|a, b| b.cmp(a));
                degrees.dedup();
                return Err(GroebnerError::Inhomogeneous { index, degrees });
            }
            kept.push(g);
        }
        Ok(Ideal { generators: kept, ambient_dim })
    }

    pub fn generators(&self) -> &[Polynomial<F>] {
        &self.generators
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
}

/// Reduced, monic Gröbner basis.
#[derive(Clone, Debug)]
pub struct GroebnerBasis<F> {
    elements: Vec<Polynomial<F>>,
    order: TermOrder,
}

impl<F: Field> GroebnerBasis<F> {
    pub fn elements(&self) -> &[Polynomial<F>] {
        &self.elements
    }

    pub fn order(&self) -> &TermOrder {
        &self.order
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.elements.iter().filter_map(|g| g.leading_monomial(&self.order).cloned()).collect()
    }

    pub fn is_unit(&self) -> bool {
        self.elements.iter().any(|g| g.is_constant() && !g.is_zero())
    }
}

/// Full reduction of `f` by `basis` under `order`.
fn reduce<F: Field>(f: &Polynomial<F>, basis: &[Polynomial<F>], order: &TermOrder) -> Polynomial<F> {
    let leads: Vec<(Monomial, F)> = basis
        .iter()
        .filter_map(|g| g.leading(order).map(|(m, c)| (m.clone(), c.clone())))
        .collect();
    let mut rest = f.clone();
    let mut remainder = Polynomial::zero(f.nvars());
    while let Some((m, c)) = rest.leading(order).map(|(m, c)| (m.clone(), c.clone())) {
        // reducer choice: first basis element whose leading monomial divides
        let hit = leads.iter().enumerate().find_map(|(i, (lm, lc))| lm.quotient_of(&m).map(|q| (i, q, lc)));
        match hit {
            Some((i, q, lc)) => {
                let factor = c / lc.clone();
                rest = rest - basis[i].mul_term(&q, &factor);
            }
            None => {
                remainder.add_term(m.clone(), c.clone());
                rest = rest - Polynomial::monomial(m, c);
            }
        }
    }
    remainder
}

fn s_polynomial<F: Field>(f: &Polynomial<F>, g: &Polynomial<F>, order: &TermOrder) -> Polynomial<F> {
    let (mf, cf) = f.leading(order).expect("nonzero");
    let (mg, cg) = g.leading(order).expect("nonzero");
    let l = mf.lcm(mg);
    let a = mf.quotient_of(&l).expect("lcm");
    let b = mg.quotient_of(&l).expect("lcm");
    f.mul_term(&a, &(F::one() / cf.clone())) - g.mul_term(&b, &(F::one() / cg.clone()))
}

/// Buchberger's algorithm with the normal selection strategy.
///
/// Pairs are processed by smallest lcm (degree, then `order`), ties broken by
/// pair indices, so the output only depends on the input order of generators.
pub fn buchberger<F: Field>(ideal: &Ideal<F>, order: &TermOrder) -> GroebnerBasis<F> {
    let mut basis: Vec<Polynomial<F>> = Vec::new();
    for g in ideal.generators() {
        let r = reduce(g, &basis, order);
        if !r.is_zero() {
            basis.push(r.monic(order));
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    let lcm_of = |b: &[Polynomial<F>], (i, j): (usize, usize)| {
        b[i].leading_monomial(order).unwrap().lcm(b[j].leading_monomial(order).unwrap())
    };
    while !pairs.is_empty() {
        let best = (0..pairs.len())
            .min_by(|&x, &y| {
                let (lx, ly) = (lcm_of(&basis, pairs[x]), lcm_of(&basis, pairs[y]));
                order.cmp(&lx, &ly).then_with(|| pairs[x].cmp(&pairs[y]))
            })
            .unwrap();
        let (i, j) = pairs.swap_remove(best);
        let (li, lj) = (basis[i].leading_monomial(order).unwrap(), basis[j].leading_monomial(order).unwrap());
        if li.is_coprime(lj) {
            continue;
        }
        let s = s_polynomial(&basis[i], &basis[j], order);
        let r = reduce(&s, &basis, order);
        if r.is_zero() {
            continue;
        }
        basis.push(r.monic(order));
        let n = basis.len() - 1;
        for i in 0..n {
            pairs.push((i, n));
        }
    }
    GroebnerBasis { elements: interreduce(basis, order), order: order.clone() }
}

fn interreduce<F: Field>(basis: Vec<Polynomial<F>>, order: &TermOrder) -> Vec<Polynomial<F>> {
    // drop elements whose leading monomial is divisible by another's
    let leads: Vec<Monomial> = basis.iter().map(|g| g.leading_monomial(order).unwrap().clone()).collect();
    let mut minimal: Vec<Polynomial<F>> = Vec::new();
    let mut minimal_leads: Vec<Monomial> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = leads.iter().enumerate().any(|(j, lj)| {
            j != i && lj.divides(&leads[i]) && (lj != &leads[i] || j < i)
        });
        if !redundant {
            minimal.push(g.clone());
            minimal_leads.push(leads[i].clone());
        }
    }
    let mut reduced: Vec<Polynomial<F>> = (0..minimal.len())
        .map(|i| {
            let others: Vec<Polynomial<F>> =
                minimal.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
            let lead = Polynomial::monomial(minimal_leads[i].clone(), F::one());
            let tail = minimal[i].monic(order) - lead.clone();
            lead + reduce(&tail, &others, order)
        })
        .collect();
    reduced.sort_by(|a, b| order.cmp(b.leading_monomial(order).unwrap(), a.leading_monomial(order).unwrap()));
    reduced
}

/// Remainder of `f` modulo the basis: no term is divisible by a leading monomial.
pub fn normal_form<F: Field>(f: &Polynomial<F>, basis: &GroebnerBasis<F>) -> Polynomial<F> {
    reduce(f, &basis.elements, &basis.order)
}

/// Flat limit of a weighted degeneration.
///
/// `generators` are the minimal-weight parts of a Gröbner basis computed under
/// the order whose leading terms have minimal `p·η`; they form a Gröbner basis
/// of the initial ideal with the same leading monomials.
#[derive(Clone, Debug)]
pub struct InitialIdeal<F> {
    generators: Vec<Polynomial<F>>,
    leading: Vec<Monomial>,
    weight: WeightVector,
    basis: GroebnerBasis<F>,
}

impl<F: Field> InitialIdeal<F> {
    pub fn generators(&self) -> &[Polynomial<F>] {
        &self.generators
    }

    pub fn leading_monomials(&self) -> &[Monomial] {
        &self.leading
    }

    pub fn weight(&self) -> &WeightVector {
        &self.weight
    }

    /// The Gröbner basis of the original ideal the initial forms came from.
    pub fn source_basis(&self) -> &GroebnerBasis<F> {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.weight.len()
    }

    pub fn is_unit(&self) -> bool {
        self.leading.iter().any(|m| m.degree() == 0)
    }
}

pub fn initial_ideal<F: Field>(ideal: &Ideal<F>, eta: &WeightVector) -> InitialIdeal<F> {
    let order = TermOrder::new(eta.negated());
    let basis = buchberger(ideal, &order);
    let generators: Vec<Polynomial<F>> = basis.elements().iter().map(|g| g.weight_part(eta, true)).collect();
    let leading = basis.leading_monomials();
    InitialIdeal { generators, leading, weight: eta.clone(), basis }
}

/// Degree-`k` monomials outside the leading-term ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardMonomialBasis {
    pub degree: u32,
    pub monomials: Vec<Monomial>,
}

impl StandardMonomialBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

pub fn standard_monomials<F: Field>(init: &InitialIdeal<F>, k: u32) -> StandardMonomialBasis {
    standard_monomials_for(&init.leading, init.ambient_dim(), k)
}

pub(crate) fn standard_monomials_for(leading: &[Monomial], nvars: usize, k: u32) -> StandardMonomialBasis {
    let monomials = Monomial::all_of_degree(nvars, k)
        .into_iter()
        .filter(|m| !leading.iter().any(|l| l.divides(m)))
        .collect();
    StandardMonomialBasis { degree: k, monomials }
}

/// Krull dimension of `S/J` for the monomial ideal generated by `leading`:
/// the largest set of variables containing the support of no generator.
pub fn krull_dimension(leading: &[Monomial], nvars: usize) -> usize {
    let supports: Vec<u64> = leading.iter().map(|m| m.support().fold(0u64, |acc, i| acc | (1 << i))).collect();
    let mut best = 0;
    for set in 0u64..(1u64 << nvars) {
        let ok = supports.iter().all(|s| s & !set != 0);
        if ok {
            best = best.max(set.count_ones() as usize);
        }
    }
    best
}
