//! Sparse multivariate polynomials over the rationals.
//!
//! Indeterminates are [`Atom`]s: jet variables, or applications of an
//! elementary function to a normalized argument, which the kernel treats as
//! independent transcendental symbols. Terms are kept sorted in graded
//! lexicographic order with no zero coefficients, so two polynomials are equal
//! exactly when their term lists are.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::expr::{Expr, Func, Var};
use crate::rational::RationalForm;

/// An indeterminate of the polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Var),
    Apply(Func, Arc<RationalForm>),
}

impl Atom {
    pub fn to_expr(&self) -> Expr {
        match self {
            Atom::Var(v) => Expr::var(*v),
            Atom::Apply(f, arg) => Expr::apply(*f, arg.to_expr()),
        }
    }

    /// Does the atom depend on `v`?
    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Atom::Var(w) => *w == v,
            Atom::Apply(_, arg) => arg.depends_on(v),
        }
    }
}

/// A power product of atoms, sorted by atom with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    degree: u32,
    powers: Vec<(Atom, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn atom(a: Atom, e: u32) -> Self {
        if e == 0 {
            return Monomial::one();
        }
        Monomial {
            degree: e,
            powers: vec![(a, e)],
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn powers(&self) -> &[(Atom, u32)] {
        &self.powers
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn exponent(&self, a: &Atom) -> u32 {
        self.powers
            .binary_search_by(|(b, _)| b.cmp(a))
            .map(|i| self.powers[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if other.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return other.clone();
        }
        let mut powers = Vec::with_capacity(self.powers.len() + other.powers.len());
        let (mut i, mut j) = (0, 0);
        while i < self.powers.len() && j < other.powers.len() {
            let (a, ea) = &self.powers[i];
            let (b, eb) = &other.powers[j];
            match a.cmp(b) {
                Ordering::Less => {
                    powers.push((a.clone(), *ea));
                    i += 1;
                }
                Ordering::Greater => {
                    powers.push((b.clone(), *eb));
                    j += 1;
                }
                Ordering::Equal => {
                    powers.push((a.clone(), ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        powers.extend_from_slice(&self.powers[i..]);
        powers.extend_from_slice(&other.powers[j..]);
        Monomial {
            degree: self.degree + other.degree,
            powers,
        }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if other.degree > self.degree {
            return None;
        }
        let mut powers = Vec::with_capacity(self.powers.len());
        let mut j = 0;
        for (a, ea) in &self.powers {
            if j < other.powers.len() {
                let (b, eb) = &other.powers[j];
                match a.cmp(b) {
                    Ordering::Greater => return None,
                    Ordering::Equal => {
                        j += 1;
                        match ea.cmp(eb) {
                            Ordering::Less => return None,
                            Ordering::Equal => continue,
                            Ordering::Greater => {
                                powers.push((a.clone(), ea - eb));
                                continue;
                            }
                        }
                    }
                    Ordering::Less => {}
                }
            }
            powers.push((a.clone(), *ea));
        }
        if j < other.powers.len() {
            return None;
        }
        Some(Monomial {
            degree: self.degree - other.degree,
            powers,
        })
    }

    /// Componentwise minimum, the monomial gcd.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut powers = Vec::new();
        for (a, ea) in &self.powers {
            let eb = other.exponent(a);
            if eb > 0 {
                powers.push((a.clone(), (*ea).min(eb)));
            }
        }
        let degree = powers.iter().map(|(_, e)| e).sum();
        Monomial { degree, powers }
    }

    pub fn to_expr(&self) -> Expr {
        Expr::product(
            self.powers
                .iter()
                .map(|(a, e)| Expr::pow(&a.to_expr(), i32::try_from(*e).expect("exponent overflow"))),
        )
    }
}

impl Ord for Monomial {
    /// Graded lexicographic; among equal degrees the monomial with the larger
    /// exponent on the earliest atom is greater.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            for ((a, ea), (b, eb)) in self.powers.iter().zip(&other.powers) {
                match a.cmp(b) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {}
                        ord => return ord,
                    },
                }
            }
            self.powers.len().cmp(&other.powers.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial with rational coefficients, terms ascending in monomial order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, BigRational)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn atom(a: Atom) -> Self {
        Poly {
            terms: vec![(Monomial::atom(a, 1), BigRational::one())],
        }
    }

    pub fn var(v: Var) -> Self {
        Poly::atom(Atom::Var(v))
    }

    pub fn from_term(m: Monomial, c: BigRational) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from unsorted, possibly repeated terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut acc: HashMap<Monomial, BigRational> = HashMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_insert_with(BigRational::zero) += c;
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Monomial, BigRational)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.last().map_or(0, |(m, _)| m.degree())
    }

    /// Leading term in the monomial order.
    pub fn leading(&self) -> Option<&(Monomial, BigRational)> {
        self.terms.last()
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms
            .iter()
            .flat_map(|(m, _)| m.powers.iter().map(|(a, _)| a.clone()))
            .collect()
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.terms
            .iter()
            .any(|(m, _)| m.powers.iter().any(|(a, _)| a.depends_on(v)))
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    /// `self + s * mono * other`, merging sorted term lists.
    fn add_scaled(&self, other: &Poly, mono: &Monomial, s: &BigRational) -> Poly {
        if s.is_zero() || other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = other.terms.iter().map(|(m, c)| (m.mul(mono), c * s)).peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(a.next().unwrap().clone()),
                (None, Some(_)) => out.push(b.next().unwrap()),
                (Some((ma, _)), Some((mb, _))) => match ma.cmp(mb) {
                    Ordering::Less => out.push(a.next().unwrap().clone()),
                    Ordering::Greater => out.push(b.next().unwrap()),
                    Ordering::Equal => {
                        let (m, ca) = a.next().unwrap();
                        let (_, cb) = b.next().unwrap();
                        let c = ca + cb;
                        if !c.is_zero() {
                            out.push((m.clone(), c));
                        }
                    }
                },
            }
        }
        Poly { terms: out }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.add_scaled(other, &Monomial::one(), &BigRational::one())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add_scaled(other, &Monomial::one(), &-BigRational::one())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        if small.len() == 1 {
            let (m, c) = &small.terms[0];
            return Poly::zero().add_scaled(large, m, c);
        }
        let mut acc: HashMap<Monomial, BigRational> = HashMap::with_capacity(small.len() * large.len());
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                let prod = ca * cb;
                acc.entry(ma.mul(mb)).and_modify(|c| *c += &prod).or_insert(prod);
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        Poly { terms }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a
    /// remainder. If `d` divides `n` then `lt(d)` divides `lt(r)` for every
    /// intermediate remainder `r`, so the first failure is conclusive.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lm, lc) = divisor.leading().unwrap();
        if divisor.len() == 1 {
            let mut terms = Vec::with_capacity(self.len());
            for (m, c) in &self.terms {
                terms.push((m.div(lm)?, c / lc));
            }
            return Some(Poly { terms });
        }
        if divisor.total_degree() > self.total_degree() {
            return None;
        }
        let mut rem = self.clone();
        let mut quotient = Vec::new();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.div(lm)?;
            let qc = rc / lc;
            rem = rem.add_scaled(divisor, &qm, &-&qc);
            quotient.push((qm, qc));
        }
        quotient.reverse();
        Some(Poly { terms: quotient })
    }

    /// Gcd of all monomials.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Partial derivative with respect to an atom, treating others as constants.
    pub fn diff_atom(&self, atom: &Atom) -> Poly {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exponent(atom);
            if e == 0 {
                continue;
            }
            let powers = m
                .powers
                .iter()
                .filter_map(|(a, k)| {
                    if a == atom {
                        (e > 1).then(|| (a.clone(), e - 1))
                    } else {
                        Some((a.clone(), *k))
                    }
                })
                .collect();
            let mono = Monomial {
                degree: m.degree - 1,
                powers,
            };
            terms.push((mono, c * BigRational::from_integer(BigInt::from(e))));
        }
        Poly::from_terms(terms)
    }

    pub fn to_expr(&self) -> Expr {
        Expr::sum(
            self.terms
                .iter()
                .map(|(m, c)| Expr::product([Expr::constant(c.clone()), m.to_expr()])),
        )
    }
}
