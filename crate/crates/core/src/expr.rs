//! Immutable symbolic expressions over jet coordinates.
//!
//! Every `Expr` is built through the smart constructors in this module, which
//! keep the tree in a light canonical shape: sums and products are flattened
//! and sorted, constants are folded, like terms and like factors are merged,
//! and integer powers of products are distributed. Structural equality is then
//! a cheap (but incomplete) equality test; the complete test on the rational
//! fragment is [`crate::rational::is_zero`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::EvalError;
use crate::scalar::Scalar;
use crate::system::JetPoint;

/// Denominators with absolute value at or below this are treated as zero.
pub const SINGULAR_EPS: f64 = 1e-12;

/// A jet coordinate: `x`, `y_i`, `p_i = y_i'` or `q_i = y_i''` (1-based `i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Y(usize),
    P(usize),
    Q(usize),
}

impl Var {
    /// Index of the coordinate, `None` for `x`.
    pub fn index(self) -> Option<usize> {
        match self {
            Var::X => None,
            Var::Y(i) | Var::P(i) | Var::Q(i) => Some(i),
        }
    }

    /// All jet coordinates of a system of dimension `m`, in canonical order.
    pub fn all(m: usize) -> Vec<Var> {
        let mut out = Vec::with_capacity(1 + 3 * m);
        out.push(Var::X);
        out.extend((1..=m).map(Var::Y));
        out.extend((1..=m).map(Var::P));
        out.extend((1..=m).map(Var::Q));
        out
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => write!(f, "x"),
            Var::Y(i) => write!(f, "y{i}"),
            Var::P(i) => write!(f, "p{i}"),
            Var::Q(i) => write!(f, "q{i}"),
        }
    }
}

/// Elementary functions understood by the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExprKind {
    Const(BigRational),
    Var(Var),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// `base ^ exponent`, exponent a nonzero integer other than 1.
    Pow(Expr, i32),
    Apply(Func, Expr),
}

/// Shared, immutable expression node.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<ExprKind>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Expr {
    fn from_kind(kind: ExprKind) -> Expr {
        Expr(Arc::new(kind))
    }

    pub fn kind(&self) -> &ExprKind {
        &self.0
    }

    pub fn constant(c: BigRational) -> Expr {
        Expr::from_kind(ExprKind::Const(c))
    }

    pub fn integer(n: i64) -> Expr {
        Expr::constant(rat(n))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::constant(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::integer(0)
    }

    pub fn one() -> Expr {
        Expr::integer(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_kind(ExprKind::Var(v))
    }

    pub fn x() -> Expr {
        Expr::var(Var::X)
    }

    pub fn y(i: usize) -> Expr {
        Expr::var(Var::Y(i))
    }

    pub fn p(i: usize) -> Expr {
        Expr::var(Var::P(i))
    }

    pub fn q(i: usize) -> Expr {
        Expr::var(Var::Q(i))
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.kind() {
            ExprKind::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    /// Canonical sum of `terms`.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = BigRational::zero();
        let mut acc: BTreeMap<Expr, BigRational> = BTreeMap::new();
        let mut push = |t: &Expr, constant: &mut BigRational| match t.kind() {
            ExprKind::Const(c) => *constant += c,
            _ => {
                let (c, rest) = t.split_coefficient();
                *acc.entry(rest).or_insert_with(BigRational::zero) += c;
            }
        };
        for t in terms {
            match t.kind() {
                ExprKind::Sum(inner) => {
                    for u in inner {
                        push(u, &mut constant);
                    }
                }
                _ => push(&t, &mut constant),
            }
        }
        let mut items = Vec::with_capacity(acc.len() + 1);
        if !constant.is_zero() {
            items.push(Expr::constant(constant));
        }
        for (rest, c) in acc {
            if !c.is_zero() {
                items.push(rest.scaled(c));
            }
        }
        match items.len() {
            0 => Expr::zero(),
            1 => items.pop().unwrap(),
            _ => {
                items.sort();
                Expr::from_kind(ExprKind::Sum(items))
            }
        }
    }

    /// Canonical product of `factors`.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut coeff = BigRational::one();
        let mut acc: BTreeMap<Expr, i64> = BTreeMap::new();
        fn push(f: &Expr, coeff: &mut BigRational, acc: &mut BTreeMap<Expr, i64>) {
            match f.kind() {
                ExprKind::Const(c) => *coeff *= c,
                ExprKind::Product(inner) => {
                    for g in inner {
                        push(g, coeff, acc);
                    }
                }
                ExprKind::Pow(b, k) => *acc.entry(b.clone()).or_insert(0) += i64::from(*k),
                _ => *acc.entry(f.clone()).or_insert(0) += 1,
            }
        }
        for f in factors {
            push(&f, &mut coeff, &mut acc);
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut items: Vec<Expr> = Vec::with_capacity(acc.len() + 1);
        for (base, k) in acc {
            if k != 0 {
                let k = i32::try_from(k).expect("exponent overflow");
                let term = Expr::pow(&base, k);
                match term.kind() {
                    ExprKind::Const(c) => coeff *= c,
                    _ => items.push(term),
                }
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        if items.is_empty() {
            return Expr::constant(coeff);
        }
        if items.len() == 1 && coeff.is_one() {
            return items.pop().unwrap();
        }
        if !coeff.is_one() {
            items.push(Expr::constant(coeff));
        }
        items.sort();
        Expr::from_kind(ExprKind::Product(items))
    }

    /// `base ^ k` for an integer `k`.
    pub fn pow(base: &Expr, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return base.clone();
        }
        match base.kind() {
            ExprKind::Const(c) => {
                if c.is_zero() {
                    if k > 0 {
                        Expr::zero()
                    } else {
                        Expr::from_kind(ExprKind::Pow(base.clone(), k))
                    }
                } else {
                    Expr::constant(Pow::pow(c, k))
                }
            }
            ExprKind::Pow(b, j) => {
                let e = j.checked_mul(k).expect("exponent overflow");
                Expr::pow(b, e)
            }
            ExprKind::Product(fs) => Expr::product(fs.iter().map(|f| Expr::pow(f, k))),
            _ => Expr::from_kind(ExprKind::Pow(base.clone(), k)),
        }
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            match func {
                Func::Sin if c.is_zero() => return Expr::zero(),
                Func::Cos | Func::Exp if c.is_zero() => return Expr::one(),
                Func::Ln if c.is_one() => return Expr::zero(),
                _ => {}
            }
        }
        Expr::from_kind(ExprKind::Apply(func, arg))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::apply(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::apply(Func::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::apply(Func::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::apply(Func::Ln, arg)
    }

    pub fn powi(&self, k: i32) -> Expr {
        Expr::pow(self, k)
    }

    pub fn recip(&self) -> Expr {
        Expr::pow(self, -1)
    }

    pub fn scaled(&self, c: BigRational) -> Expr {
        Expr::product([Expr::constant(c), self.clone()])
    }

    /// Splits a rational coefficient off a term: `3*x*y` gives `(3, x*y)`.
    fn split_coefficient(&self) -> (BigRational, Expr) {
        if let ExprKind::Product(fs) = self.kind() {
            if let Some(c) = fs[0].as_const() {
                let rest = &fs[1..];
                let rest = if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    Expr::from_kind(ExprKind::Product(rest.to_vec()))
                };
                return (c.clone(), rest);
            }
        }
        (BigRational::one(), self.clone())
    }

    /// Collects every jet variable occurring in the expression.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self.kind() {
            ExprKind::Const(_) => {}
            ExprKind::Var(v) => {
                out.insert(*v);
            }
            ExprKind::Sum(ts) | ExprKind::Product(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            ExprKind::Pow(b, _) => b.collect_vars(out),
            ExprKind::Apply(_, a) => a.collect_vars(out),
        }
    }

    pub fn contains(&self, v: Var) -> bool {
        match self.kind() {
            ExprKind::Const(_) => false,
            ExprKind::Var(w) => *w == v,
            ExprKind::Sum(ts) | ExprKind::Product(ts) => ts.iter().any(|t| t.contains(v)),
            ExprKind::Pow(b, _) => b.contains(v),
            ExprKind::Apply(_, a) => a.contains(v),
        }
    }

    /// True if an `Apply` node occurs anywhere in the tree.
    pub fn has_transcendental(&self) -> bool {
        match self.kind() {
            ExprKind::Const(_) | ExprKind::Var(_) => false,
            ExprKind::Sum(ts) | ExprKind::Product(ts) => ts.iter().any(Expr::has_transcendental),
            ExprKind::Pow(b, _) => b.has_transcendental(),
            ExprKind::Apply(..) => true,
        }
    }

    /// Exact partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> Expr {
        if !self.contains(v) {
            return Expr::zero();
        }
        match self.kind() {
            ExprKind::Const(_) => Expr::zero(),
            ExprKind::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            ExprKind::Sum(ts) => Expr::sum(ts.iter().map(|t| t.diff(v))),
            ExprKind::Product(fs) => {
                let mut terms = Vec::new();
                for (k, f) in fs.iter().enumerate() {
                    let df = f.diff(v);
                    if df.is_structurally_zero() {
                        continue;
                    }
                    let mut factors = fs.clone();
                    factors[k] = df;
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            ExprKind::Pow(b, k) => Expr::product([Expr::integer(i64::from(*k)), Expr::pow(b, k - 1), b.diff(v)]),
            ExprKind::Apply(func, u) => {
                let du = u.diff(v);
                let outer = match func {
                    Func::Sin => Expr::cos(u.clone()),
                    Func::Cos => -Expr::sin(u.clone()),
                    Func::Exp => self.clone(),
                    Func::Ln => u.recip(),
                };
                outer * du
            }
        }
    }

    /// Simultaneous substitution of variables.
    pub fn substitute(&self, bindings: &HashMap<Var, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        match self.kind() {
            ExprKind::Const(_) => self.clone(),
            ExprKind::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| self.clone()),
            ExprKind::Sum(ts) => Expr::sum(ts.iter().map(|t| t.substitute(bindings))),
            ExprKind::Product(fs) => Expr::product(fs.iter().map(|t| t.substitute(bindings))),
            ExprKind::Pow(b, k) => Expr::pow(&b.substitute(bindings), *k),
            ExprKind::Apply(func, a) => Expr::apply(*func, a.substitute(bindings)),
        }
    }

    /// Floating evaluation at a jet point.
    pub fn eval_at<T: Scalar>(&self, pt: &JetPoint<T>) -> Result<T, EvalError> {
        match self.kind() {
            ExprKind::Const(c) => Ok(T::from_rational(c)),
            ExprKind::Var(v) => pt.coordinate(*v),
            ExprKind::Sum(ts) => {
                let mut acc = T::zero();
                for t in ts {
                    acc = acc + t.eval_at(pt)?;
                }
                Ok(acc)
            }
            ExprKind::Product(fs) => {
                let mut acc = T::one();
                for f in fs {
                    acc = acc * f.eval_at(pt)?;
                }
                Ok(acc)
            }
            ExprKind::Pow(b, k) => {
                let base = b.eval_at(pt)?;
                if *k < 0 && base.abs().to_f64() <= SINGULAR_EPS {
                    return Err(EvalError::EvalSingular(format!("denominator `{b}` vanishes")));
                }
                Ok(base.powi(*k))
            }
            ExprKind::Apply(func, a) => {
                let u = a.eval_at(pt)?;
                Ok(match func {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Ln => {
                        if u.to_f64() <= SINGULAR_EPS {
                            return Err(EvalError::EvalSingular(format!("logarithm of non-positive `{a}`")));
                        }
                        u.ln()
                    }
                })
            }
        }
    }

    /// Convenience `f64` evaluation.
    pub fn eval(&self, pt: &JetPoint<f64>) -> Result<f64, EvalError> {
        self.eval_at(pt)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.kind() {
            ExprKind::Const(_) | ExprKind::Var(_) => 1,
            ExprKind::Sum(ts) | ExprKind::Product(ts) => 1 + ts.iter().map(Expr::size).sum::<usize>(),
            ExprKind::Pow(b, _) => 1 + b.size(),
            ExprKind::Apply(_, a) => 1 + a.size(),
        }
    }

    fn is_negative_term(&self) -> bool {
        match self.kind() {
            ExprKind::Const(c) => c.is_negative(),
            ExprKind::Product(fs) => fs[0].as_const().is_some_and(Signed::is_negative),
            _ => false,
        }
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::var(v)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::integer(n)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a, b]));
binop!(Sub, sub, |a, b| Expr::sum([a, -b]));
binop!(Mul, mul, |a, b| Expr::product([a, b]));
binop!(Div, div, |a, b| Expr::product([a, b.recip()]));

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::integer(-1), self])
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

// ---------------------------------------------------------------------------
// Rendering. The output is accepted by the DSL parser and re-parses to a
// structurally equal tree.

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Renders a factor that will be followed by `^k` or sits next to `*`/`/`.
fn fmt_atomic(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.kind() {
        ExprKind::Var(_) | ExprKind::Apply(..) => write!(f, "{e}"),
        ExprKind::Const(c) if c.is_integer() && !c.is_negative() => write!(f, "{e}"),
        _ => write!(f, "({e})"),
    }
}

fn fmt_factor(e: &Expr, k: i32, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    fmt_atomic(e, f)?;
    if k != 1 {
        write!(f, "^{k}")?;
    }
    Ok(())
}

/// Writes a product (or a lone power) with its sign stripped.
fn fmt_product_abs(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let factors: Vec<Expr> = match e.kind() {
        ExprKind::Product(fs) => fs.clone(),
        _ => vec![e.clone()],
    };
    let mut coeff = BigRational::one();
    let mut num: Vec<(Expr, i32)> = Vec::new();
    let mut den: Vec<(Expr, i32)> = Vec::new();
    for g in &factors {
        match g.kind() {
            ExprKind::Const(c) => coeff = c.abs(),
            ExprKind::Pow(b, k) if *k < 0 => den.push((b.clone(), -k)),
            ExprKind::Pow(b, k) => num.push((b.clone(), *k)),
            _ => num.push((g.clone(), 1)),
        }
    }
    let mut wrote = false;
    if !coeff.numer().is_one() || num.is_empty() {
        write!(f, "{}", coeff.numer())?;
        wrote = true;
    }
    for (b, k) in &num {
        if wrote {
            write!(f, "*")?;
        }
        fmt_factor(b, *k, f)?;
        wrote = true;
    }
    let den_const = coeff.denom().clone();
    let den_count = den.len() + usize::from(!den_const.is_one());
    if den_count == 0 {
        return Ok(());
    }
    write!(f, "/")?;
    if den_count > 1 {
        write!(f, "(")?;
    }
    let mut first = true;
    if !den_const.is_one() {
        write!(f, "{den_const}")?;
        first = false;
    }
    for (b, k) in &den {
        if !first {
            write!(f, "*")?;
        }
        fmt_factor(b, *k, f)?;
        first = false;
    }
    if den_count > 1 {
        write!(f, ")")?;
    }
    Ok(())
}

fn fmt_term_abs(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.kind() {
        ExprKind::Const(c) => write!(f, "{}", fmt_rational(&c.abs())),
        ExprKind::Product(_) | ExprKind::Pow(..) => fmt_product_abs(e, f),
        _ => write!(f, "{e}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            ExprKind::Const(c) => write!(f, "{}", fmt_rational(c)),
            ExprKind::Var(v) => write!(f, "{v}"),
            ExprKind::Apply(func, a) => write!(f, "{}({a})", func.name()),
            ExprKind::Sum(ts) => {
                for (n, t) in ts.iter().enumerate() {
                    let neg = t.is_negative_term();
                    match (n, neg) {
                        (0, true) => write!(f, "-")?,
                        (0, false) => {}
                        (_, true) => write!(f, " - ")?,
                        (_, false) => write!(f, " + ")?,
                    }
                    fmt_term_abs(t, f)?;
                }
                Ok(())
            }
            ExprKind::Product(_) | ExprKind::Pow(..) => {
                if self.is_negative_term() {
                    write!(f, "-")?;
                }
                fmt_product_abs(self, f)
            }
        }
    }
}
