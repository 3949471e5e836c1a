//! Systems `y_i''' = f_i(x, y, p, q)` and their jet coordinates.

use std::fmt;

use crate::error::{EvalError, SystemError};
use crate::expr::{Expr, Var};
use crate::rational::{normalize, RationalForm};
use crate::scalar::Scalar;

/// Numeric coordinates `(x, y, p, q)` on the equation surface.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint<T = f64> {
    pub x: T,
    pub y: Vec<T>,
    pub p: Vec<T>,
    pub q: Vec<T>,
}

impl<T: Scalar> JetPoint<T> {
    pub fn new(x: T, y: Vec<T>, p: Vec<T>, q: Vec<T>) -> Self {
        JetPoint { x, y, p, q }
    }

    /// Builds a point from the flat layout `x, y1..ym, p1..pm, q1..qm`.
    pub fn from_flat(m: usize, values: &[T]) -> Result<Self, EvalError> {
        if values.len() != 1 + 3 * m {
            return Err(EvalError::DimensionMismatch {
                expected: 1 + 3 * m,
                found: values.len(),
            });
        }
        Ok(JetPoint {
            x: values[0],
            y: values[1..=m].to_vec(),
            p: values[m + 1..=2 * m].to_vec(),
            q: values[2 * m + 1..].to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn coordinate(&self, v: Var) -> Result<T, EvalError> {
        let pick = |xs: &[T], i: usize| {
            xs.get(i.wrapping_sub(1)).copied().ok_or(EvalError::DimensionMismatch {
                expected: i,
                found: xs.len(),
            })
        };
        match v {
            Var::X => Ok(self.x),
            Var::Y(i) => pick(&self.y, i),
            Var::P(i) => pick(&self.p, i),
            Var::Q(i) => pick(&self.q, i),
        }
    }

    pub fn coordinate_mut(&mut self, v: Var) -> Option<&mut T> {
        match v {
            Var::X => Some(&mut self.x),
            Var::Y(i) => self.y.get_mut(i.wrapping_sub(1)),
            Var::P(i) => self.p.get_mut(i.wrapping_sub(1)),
            Var::Q(i) => self.q.get_mut(i.wrapping_sub(1)),
        }
    }

    /// Same point with `v` shifted by `delta`.
    pub fn shifted(&self, v: Var, delta: T) -> Self {
        let mut out = self.clone();
        if let Some(c) = out.coordinate_mut(v) {
            *c = *c + delta;
        }
        out
    }

    pub fn convert<U: Scalar>(&self) -> JetPoint<U> {
        let conv = |xs: &[T]| xs.iter().map(|v| U::from_f64(v.to_f64())).collect();
        JetPoint {
            x: U::from_f64(self.x.to_f64()),
            y: conv(&self.y),
            p: conv(&self.p),
            q: conv(&self.q),
        }
    }
}

/// A system of `m >= 2` third-order equations.
///
/// The normal forms of the right-hand sides are computed once at
/// construction, so every later symbolic operation on the system is total.
#[derive(Clone, Debug)]
pub struct OdeSystem {
    m: usize,
    f: Vec<Expr>,
    normal: Vec<RationalForm>,
}

impl PartialEq for OdeSystem {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.f == other.f
    }
}

impl Eq for OdeSystem {}

impl OdeSystem {
    pub fn new(f: Vec<Expr>) -> Result<Self, SystemError> {
        let m = f.len();
        if m < 2 {
            return Err(SystemError::DimensionTooSmall { m });
        }
        for e in &f {
            if let Some(v) = e
                .variables()
                .into_iter()
                .find(|v| v.index().is_some_and(|i| i == 0 || i > m))
            {
                return Err(SystemError::IndexOutOfRange { var: v.to_string(), m });
            }
        }
        let normal = f
            .iter()
            .enumerate()
            .map(|(i, e)| normalize(e).map_err(|source| SystemError::Singular { index: i + 1, source }))
            .collect::<Result<_, _>>()?;
        Ok(OdeSystem { m, f, normal })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn rhs(&self) -> &[Expr] {
        &self.f
    }

    /// Right-hand side of `y_i'''`, `i` 1-based.
    pub fn f(&self, i: usize) -> &Expr {
        &self.f[i - 1]
    }

    /// Rational normal forms of `f_1..f_m`.
    pub fn normal_forms(&self) -> &[RationalForm] {
        &self.normal
    }

    pub fn variables(&self) -> Vec<Var> {
        Var::all(self.m)
    }

    /// The equation-induced total derivative
    /// `D = d/dx + p_i d/dy_i + q_i d/dp_i + f_i d/dq_i`, on trees.
    pub fn total_derivative(&self, e: &Expr) -> Expr {
        let mut terms = vec![e.diff(Var::X)];
        for i in 1..=self.m {
            terms.push(Expr::p(i) * e.diff(Var::Y(i)));
            terms.push(Expr::q(i) * e.diff(Var::P(i)));
            let dq = e.diff(Var::Q(i));
            if !dq.is_structurally_zero() {
                terms.push(self.f(i) * dq);
            }
        }
        Expr::sum(terms)
    }

    /// The system in the input DSL.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m = {}", self.m)?;
        for (i, e) in self.f.iter().enumerate() {
            writeln!(f, "f{} = {}", i + 1, e)?;
        }
        Ok(())
    }
}

/// Total derivative on normalized rational forms.
pub(crate) fn total_derivative_rf(rhs: &[RationalForm], e: &RationalForm) -> RationalForm {
    let m = rhs.len();
    let mut acc = e.diff(Var::X);
    for i in 1..=m {
        acc = acc
            .add(&RationalForm::from_var(Var::P(i)).mul(&e.diff(Var::Y(i))))
            .add(&RationalForm::from_var(Var::Q(i)).mul(&e.diff(Var::P(i))));
        let dq = e.diff(Var::Q(i));
        if !dq.is_zero() {
            acc = acc.add(&rhs[i - 1].mul(&dq));
        }
    }
    acc
}

/// `y_i''' = 3 q_i (sum_j p_j q_j) / (1 + sum_j p_j^2)`, the equation of circles
/// in `(m+1)`-dimensional Euclidean space parametrized by the first coordinate.
pub fn circles_system(m: usize) -> Result<OdeSystem, SystemError> {
    if m < 2 {
        return Err(SystemError::DimensionTooSmall { m });
    }
    let pq = Expr::sum((1..=m).map(|j| Expr::p(j) * Expr::q(j)));
    let norm = Expr::sum(std::iter::once(Expr::one()).chain((1..=m).map(|j| Expr::p(j).powi(2))));
    let f = (1..=m).map(|i| Expr::integer(3) * Expr::q(i) * &pq / &norm).collect();
    OdeSystem::new(f)
}

/// `y_i''' = 0`.
pub fn trivial_system(m: usize) -> Result<OdeSystem, SystemError> {
    if m < 2 {
        return Err(SystemError::DimensionTooSmall { m });
    }
    OdeSystem::new(vec![Expr::zero(); m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::is_zero;

    #[test]
    fn total_derivative_on_coordinates() {
        let sys = circles_system(2).unwrap();
        assert_eq!(sys.total_derivative(&Expr::y(1)), Expr::p(1));
        assert_eq!(sys.total_derivative(&Expr::p(1)), Expr::q(1));
        assert_eq!(sys.total_derivative(&Expr::q(1)), sys.f(1).clone());
        let triv = trivial_system(2).unwrap();
        assert_eq!(triv.total_derivative(&Expr::q(1)), Expr::zero());
    }

    #[test]
    fn generators_reject_small_dimension() {
        assert_eq!(circles_system(1), Err(SystemError::DimensionTooSmall { m: 1 }));
        assert_eq!(trivial_system(0), Err(SystemError::DimensionTooSmall { m: 0 }));
        assert!(OdeSystem::new(vec![Expr::zero()]).is_err());
    }

    #[test]
    fn trivial_system_is_all_zero() {
        let sys = trivial_system(3).unwrap();
        assert_eq!(sys.dim(), 3);
        assert!(sys.rhs().iter().all(Expr::is_structurally_zero));
    }

    #[test]
    fn circles_m2_matches_closed_form() {
        let sys = circles_system(2).unwrap();
        let s = Expr::one() + Expr::p(1).powi(2) + Expr::p(2).powi(2);
        let pq = Expr::p(1) * Expr::q(1) + Expr::p(2) * Expr::q(2);
        let f2 = Expr::integer(3) * Expr::q(2) * pq / s;
        assert!(is_zero(&(sys.f(2) - &f2)).unwrap());
        let pt = JetPoint::new(0.0, vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]);
        assert!((sys.f(1).eval(&pt).unwrap() - 1.5).abs() < 1e-15);
        let zero = JetPoint::new(0.0, vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(sys.f(1).eval(&zero).unwrap(), 0.0);
    }

    #[test]
    fn rejects_out_of_range_variables() {
        let err = OdeSystem::new(vec![Expr::q(3), Expr::zero()]).unwrap_err();
        assert!(matches!(err, SystemError::IndexOutOfRange { .. }));
    }

    #[test]
    fn singular_rhs_rejected() {
        let bad = Expr::one() / (Expr::p(1) - Expr::p(1));
        let err = OdeSystem::new(vec![Expr::zero(), bad]).unwrap_err();
        assert!(matches!(err, SystemError::Singular { index: 2, .. }));
    }

    #[test]
    fn flat_point_layout() {
        let pt = JetPoint::from_flat(2, &[0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(pt.coordinate(Var::P(2)).unwrap(), 4.0);
        assert_eq!(pt.coordinate(Var::Q(1)).unwrap(), 5.0);
        assert!(JetPoint::<f64>::from_flat(2, &[0.0; 5]).is_err());
    }
}
