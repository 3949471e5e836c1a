//! Canonical rational normal form and exact zero testing.
//!
//! A [`RationalForm`] is a numerator polynomial over a product of denominator
//! factors. Each factor is made monic (leading coefficient one) with its
//! monomial content split off into single-atom factors, and after every
//! operation numerator and denominator are reduced by exact trial division.
//! There is no full multivariate gcd: two forms describing the same function
//! may differ in their factor lists, but their difference always has a zero
//! numerator, which is what [`is_zero`] tests.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{EvalError, KernelError};
use crate::expr::{Expr, ExprKind, Func, Var, SINGULAR_EPS};
use crate::poly::{Atom, Poly};
use crate::scalar::Scalar;
use crate::system::JetPoint;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalForm {
    num: Poly,
    den: BTreeMap<Poly, u32>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RationalForm {
    pub fn zero() -> Self {
        RationalForm {
            num: Poly::zero(),
            den: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        RationalForm::from_poly(Poly::one())
    }

    pub fn from_poly(num: Poly) -> Self {
        RationalForm {
            num,
            den: BTreeMap::new(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        RationalForm::from_poly(Poly::constant(c))
    }

    pub fn integer(n: i64) -> Self {
        RationalForm::constant(rat(n))
    }

    pub fn from_var(v: Var) -> Self {
        RationalForm::from_poly(Poly::var(v))
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    /// Denominator factors with multiplicities.
    pub fn denominator_factors(&self) -> &BTreeMap<Poly, u32> {
        &self.den
    }

    /// Expanded denominator polynomial.
    pub fn denominator(&self) -> Poly {
        self.den.iter().fold(Poly::one(), |acc, (f, e)| acc.mul(&f.pow(*e)))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.num.depends_on(v) || self.den.keys().any(|f| f.depends_on(v))
    }

    pub fn has_transcendental(&self) -> bool {
        let apply = |p: &Poly| p.atoms().iter().any(|a| matches!(a, Atom::Apply(..)));
        apply(&self.num) || self.den.keys().any(apply)
    }

    /// Assembles a form from a numerator and raw (unnormalized) factors.
    fn assemble(num: Poly, factors: impl IntoIterator<Item = (Poly, u32)>) -> Result<Self, KernelError> {
        let mut num = num;
        let mut den: BTreeMap<Poly, u32> = BTreeMap::new();
        for (f, e) in factors {
            if e == 0 {
                continue;
            }
            if f.is_zero() {
                return Err(KernelError::DivisionByZeroExpr);
            }
            let lc = f.leading().unwrap().1.clone();
            num = num.scale(&num_traits::Pow::pow(lc.clone(), -(e as i32)));
            let monic = f.scale(&lc.recip());
            let content = monic.monomial_content();
            for (atom, k) in content.powers() {
                *den.entry(Poly::atom(atom.clone())).or_insert(0) += k * e;
            }
            let rest = if content.is_one() {
                monic
            } else {
                monic.div_exact(&Poly::from_term(content, BigRational::one())).unwrap()
            };
            if rest.as_constant().is_none() {
                *den.entry(rest).or_insert(0) += e;
            }
        }
        Ok(RationalForm { num, den }.reduced())
    }

    /// Cancels denominator factors that divide the numerator.
    fn reduced(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        for (f, e) in self.den.iter_mut() {
            while *e > 0 {
                match self.num.div_exact(f) {
                    Some(q) => {
                        self.num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|_, e| *e > 0);
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            return RationalForm {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            }
            .reduced();
        }
        let mut lcm = self.den.clone();
        for (f, e) in &other.den {
            let slot = lcm.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(*e);
        }
        let lift = |form: &RationalForm| {
            let mut n = form.num.clone();
            for (f, e) in &lcm {
                let have = form.den.get(f).copied().unwrap_or(0);
                if *e > have {
                    n = n.mul(&f.pow(e - have));
                }
            }
            n
        };
        RationalForm {
            num: lift(self).add(&lift(other)),
            den: lcm.clone(),
        }
        .reduced()
    }

    pub fn neg(&self) -> Self {
        RationalForm {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return RationalForm::zero();
        }
        RationalForm {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RationalForm::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        // Each side is already reduced, so only cross cancellation can occur.
        let mut a_num = self.num.clone();
        let mut b_num = other.num.clone();
        let mut a_den = self.den.clone();
        let mut b_den = other.den.clone();
        cancel(&mut a_num, &mut b_den);
        cancel(&mut b_num, &mut a_den);
        for (f, e) in b_den {
            *a_den.entry(f).or_insert(0) += e;
        }
        a_den.retain(|_, e| *e > 0);
        RationalForm {
            num: a_num.mul(&b_num),
            den: a_den,
        }
    }

    pub fn inv(&self) -> Result<Self, KernelError> {
        if self.is_zero() {
            return Err(KernelError::DivisionByZeroExpr);
        }
        RationalForm::assemble(self.denominator(), [(self.num.clone(), 1)])
    }

    pub fn div(&self, other: &Self) -> Result<Self, KernelError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, k: i32) -> Result<Self, KernelError> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let k = k as u32;
        if k == 0 {
            return Ok(RationalForm::one());
        }
        Ok(RationalForm {
            num: self.num.pow(k),
            den: self.den.iter().map(|(f, e)| (f.clone(), e * k)).collect(),
        })
    }

    /// `func(arg)` as an atom, folding the exact values at 0 and 1.
    pub fn apply(func: Func, arg: RationalForm) -> Self {
        if let Some(c) = arg.as_constant() {
            match func {
                Func::Sin if c.is_zero() => return RationalForm::zero(),
                Func::Cos | Func::Exp if c.is_zero() => return RationalForm::one(),
                Func::Ln if c.is_one() => return RationalForm::zero(),
                _ => {}
            }
        }
        RationalForm::from_poly(Poly::atom(Atom::Apply(func, Arc::new(arg))))
    }

    /// Exact partial derivative.
    pub fn diff(&self, v: Var) -> Self {
        if !self.depends_on(v) {
            return RationalForm::zero();
        }
        let base = RationalForm {
            num: Poly::one(),
            den: self.den.clone(),
        };
        let mut acc = poly_diff(&self.num, v).mul(&base);
        for (f, e) in &self.den {
            let df = poly_diff(f, v);
            if df.is_zero() {
                continue;
            }
            let mut den = self.den.clone();
            *den.get_mut(f).unwrap() += 1;
            let term = RationalForm {
                num: self.num.scale(&-rat(i64::from(*e))),
                den,
            };
            acc = acc.add(&term.mul(&df));
        }
        acc
    }

    /// Floating evaluation.
    pub fn eval_at<T: Scalar>(&self, pt: &JetPoint<T>) -> Result<T, EvalError> {
        let mut den = T::one();
        for (f, e) in &self.den {
            let v = eval_poly(f, pt)?;
            if v.abs().to_f64() <= SINGULAR_EPS {
                return Err(EvalError::EvalSingular("denominator factor vanishes".into()));
            }
            den = den * v.powi(*e as i32);
        }
        Ok(eval_poly(&self.num, pt)? / den)
    }

    /// Expression tree of the normal form.
    pub fn to_expr(&self) -> Expr {
        let mut factors = vec![self.num.to_expr()];
        for (f, e) in &self.den {
            factors.push(Expr::pow(&f.to_expr(), -(*e as i32)));
        }
        Expr::product(factors)
    }
}

/// Divides `num` by factors of `den` as far as possible, in place.
fn cancel(num: &mut Poly, den: &mut BTreeMap<Poly, u32>) {
    for (f, e) in den.iter_mut() {
        while *e > 0 {
            match num.div_exact(f) {
                Some(q) => {
                    *num = q;
                    *e -= 1;
                }
                None => break,
            }
        }
    }
}

fn atom_derivative(atom: &Atom, v: Var) -> RationalForm {
    match atom {
        Atom::Var(w) => {
            if *w == v {
                RationalForm::one()
            } else {
                RationalForm::zero()
            }
        }
        Atom::Apply(func, arg) => {
            let darg = arg.diff(v);
            if darg.is_zero() {
                return RationalForm::zero();
            }
            let arg = (**arg).clone();
            let outer = match func {
                Func::Sin => RationalForm::apply(Func::Cos, arg),
                Func::Cos => RationalForm::apply(Func::Sin, arg).neg(),
                Func::Exp => RationalForm::apply(Func::Exp, arg),
                Func::Ln => arg.inv().expect("logarithm argument normalized to zero"),
            };
            outer.mul(&darg)
        }
    }
}

fn poly_diff(p: &Poly, v: Var) -> RationalForm {
    let mut acc = RationalForm::from_poly(p.diff_atom(&Atom::Var(v)));
    for atom in p.atoms() {
        if matches!(atom, Atom::Apply(..)) && atom.depends_on(v) {
            let inner = atom_derivative(&atom, v);
            acc = acc.add(&RationalForm::from_poly(p.diff_atom(&atom)).mul(&inner));
        }
    }
    acc
}

fn eval_atom<T: Scalar>(atom: &Atom, pt: &JetPoint<T>) -> Result<T, EvalError> {
    match atom {
        Atom::Var(v) => pt.coordinate(*v),
        Atom::Apply(func, arg) => {
            let u = arg.eval_at(pt)?;
            Ok(match func {
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Exp => u.exp(),
                Func::Ln => {
                    if u.to_f64() <= SINGULAR_EPS {
                        return Err(EvalError::EvalSingular("logarithm of a non-positive value".into()));
                    }
                    u.ln()
                }
            })
        }
    }
}

fn eval_poly<T: Scalar>(p: &Poly, pt: &JetPoint<T>) -> Result<T, EvalError> {
    let mut acc = T::zero();
    for (m, c) in p.terms() {
        let mut term = T::from_rational(c);
        for (a, e) in m.powers() {
            term = term * eval_atom(a, pt)?.powi(*e as i32);
        }
        acc = acc + term;
    }
    Ok(acc)
}

/// Canonical rational normal form of an expression.
pub fn normalize(e: &Expr) -> Result<RationalForm, KernelError> {
    Ok(match e.kind() {
        ExprKind::Const(c) => RationalForm::constant(c.clone()),
        ExprKind::Var(v) => RationalForm::from_var(*v),
        ExprKind::Sum(ts) => {
            let mut acc = RationalForm::zero();
            for t in ts {
                acc = acc.add(&normalize(t)?);
            }
            acc
        }
        ExprKind::Product(fs) => {
            let mut acc = RationalForm::one();
            for f in fs {
                acc = acc.mul(&normalize(f)?);
            }
            acc
        }
        ExprKind::Pow(b, k) => normalize(b)?.pow(*k)?,
        ExprKind::Apply(func, a) => RationalForm::apply(*func, normalize(a)?),
    })
}

/// Exact zero test. Function applications are independent indeterminates,
/// so `true` is always correct while identities such as `sin^2 + cos^2 = 1`
/// are not recognized.
pub fn is_zero(e: &Expr) -> Result<bool, KernelError> {
    Ok(normalize(e)?.is_zero())
}

/// Equality of two expressions on the rational fragment.
pub fn equivalent(a: &Expr, b: &Expr) -> Result<bool, KernelError> {
    Ok(normalize(a)?.sub(&normalize(b)?).is_zero())
}

/// Outcome of a zero test with the numeric diagnostic attached.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTest {
    /// The exact answer.
    pub exact: bool,
    /// For expressions with function atoms that are not exactly zero: whether
    /// the value was below tolerance at every sampled point. Never changes
    /// `exact`.
    pub numerically_vanishing: Option<bool>,
}

/// Number of random points used by the diagnostic sampling.
pub const SAMPLE_POINTS: usize = 20;

/// Exact zero test plus the randomized numeric diagnostic for transcendental
/// inputs.
pub fn zero_test(e: &Expr, m: usize) -> Result<ZeroTest, KernelError> {
    let rf = normalize(e)?;
    if rf.is_zero() || !rf.has_transcendental() {
        return Ok(ZeroTest {
            exact: rf.is_zero(),
            numerically_vanishing: None,
        });
    }
    Ok(ZeroTest {
        exact: false,
        numerically_vanishing: Some(samples_vanish(&rf, m)),
    })
}

pub(crate) fn samples_vanish(rf: &RationalForm, m: usize) -> bool {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut tested = 0;
    for _ in 0..SAMPLE_POINTS * 5 {
        if tested == SAMPLE_POINTS {
            break;
        }
        let flat: Vec<f64> = (0..1 + 3 * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pt = JetPoint::from_flat(m, &flat).expect("layout");
        match rf.eval_at(&pt) {
            Ok(v) => {
                if v.abs() > 1e-9 {
                    return false;
                }
                tested += 1;
            }
            Err(_) => continue,
        }
    }
    tested > 0
}
