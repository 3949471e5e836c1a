//! Floating-point scalars usable for expression evaluation.
//!
//! `f64` is the everyday evaluation type. [`DoubleDouble`] (about 106
//! significant bits) backs the finite-difference oracle, whose nested
//! stencils divide by up to four powers of the step.

use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use twofloat::TwoFloat;

pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }

    fn cos(self) -> Self {
        f64::cos(self)
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn ln(self) -> Self {
        f64::ln(self)
    }
}

fn bigint_to_twofloat(n: &BigInt) -> TwoFloat {
    let hi = n.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() {
        return TwoFloat::from(hi);
    }
    let rest = match BigInt::from_f64(hi) {
        Some(h) => n - h,
        None => BigInt::zero(),
    };
    let lo = rest.to_f64().unwrap_or(0.0);
    TwoFloat::new_add(hi, lo)
}

/// Double-double arithmetic on top of [`TwoFloat`].
///
/// Addition, multiplication and the elementary functions come from
/// `twofloat`. Division is done here by two correction steps of long
/// division, because `twofloat`'s own quotient of two double-doubles forms
/// its reciprocal residual in plain `f64` and ends up with only double
/// precision.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DoubleDouble(TwoFloat);

impl DoubleDouble {
    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }

    fn recip(self) -> Self {
        DoubleDouble::from_f64(1.0) / self
    }
}

impl Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi(), self.lo())
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl From<TwoFloat> for DoubleDouble {
    fn from(t: TwoFloat) -> Self {
        DoubleDouble(t)
    }
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        DoubleDouble(TwoFloat::from(v))
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        DoubleDouble(self.0 + rhs.0)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        DoubleDouble(self.0 - rhs.0)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        DoubleDouble(self.0 * rhs.0)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let b = rhs.0;
        let q1 = self.0.hi() / b.hi();
        let r = self.0 - b * q1;
        let q2 = r.hi() / b.hi();
        let r = r - b * q2;
        let q3 = r.hi() / b.hi();
        DoubleDouble(TwoFloat::new_add(q1, q2) + q3)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble(-self.0)
    }
}

impl Scalar for DoubleDouble {
    fn from_f64(v: f64) -> Self {
        DoubleDouble::from(v)
    }

    fn from_rational(r: &BigRational) -> Self {
        DoubleDouble(bigint_to_twofloat(r.numer())) / DoubleDouble(bigint_to_twofloat(r.denom()))
    }

    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }

    fn abs(self) -> Self {
        DoubleDouble(self.0.abs())
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = DoubleDouble::from_f64(1.0);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    fn sin(self) -> Self {
        DoubleDouble(self.0.sin())
    }

    fn cos(self) -> Self {
        DoubleDouble(self.0.cos())
    }

    fn exp(self) -> Self {
        DoubleDouble(self.0.exp())
    }

    fn ln(self) -> Self {
        DoubleDouble(self.0.ln())
    }

    fn is_finite(self) -> bool {
        self.hi().is_finite() && self.lo().is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn double_double_keeps_rationals_beyond_f64() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let t = DoubleDouble::from_rational(&third);
        let back = t * DoubleDouble::from_f64(3.0) - DoubleDouble::from_f64(1.0);
        assert!(back.abs().to_f64() < 1e-30);
    }

    #[test]
    fn large_integers_convert_with_low_word() {
        let n = BigInt::from(2u64).pow(60) + BigInt::from(1);
        let t = bigint_to_twofloat(&n);
        assert_eq!(t.lo(), 1.0);
    }

    #[test]
    fn division_is_double_double_accurate() {
        let a = DoubleDouble::from_f64(2.0);
        let b = DoubleDouble::from_f64(7.0) / DoubleDouble::from_f64(3.0);
        let back = (a / b) * b - a;
        assert!(back.abs().to_f64() < 1e-30, "{back:?}");
    }

    #[test]
    fn negative_powers() {
        let x = DoubleDouble::from_f64(3.0);
        let r = x.powi(-2) * DoubleDouble::from_f64(9.0) - DoubleDouble::from_f64(1.0);
        assert!(r.abs().to_f64() < 1e-30);
        assert_eq!(x.powi(0).to_f64(), 1.0);
        assert_eq!(2.0f64.powi(-1), 0.5);
    }
}
