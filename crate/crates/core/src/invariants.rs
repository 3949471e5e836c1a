//! The fundamental differential invariants `W2, I2, W3, I4` together with the
//! auxiliary functions `Hx` and `H^{-1}`, and the trivializability test.
//!
//! A system is point-equivalent to `y''' = 0` exactly when all four
//! invariants vanish identically.

use crate::error::EvalError;
use crate::expr::{Expr, Var};
use crate::jets::{frac, Jets, Rf};
use crate::rational::samples_vanish;
use crate::scalar::Scalar;
use crate::system::{JetPoint, OdeSystem};
use crate::tensor::{Slot, Tensor2, Tensor3};

/// Invariants as exact normal forms.
#[derive(Clone, Debug)]
pub(crate) struct InvariantForms {
    pub w2: Tensor2<Rf>,
    pub i2: Tensor3<Rf>,
    pub w3: Tensor2<Rf>,
    pub i4: Tensor2<Rf>,
    pub hx: Rf,
    pub hm1: Vec<Rf>,
}

/// The invariants of one system, as canonical expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSet {
    pub m: usize,
    pub w2: Tensor2<Expr>,
    pub i2: Tensor3<Expr>,
    pub w3: Tensor2<Expr>,
    /// Two lower indices `(j, k)`.
    pub i4: Tensor2<Expr>,
    pub hx: Expr,
    pub hm1: Vec<Expr>,
    /// Whether `I4_{jk} = I4_{kj}` holds identically for this system. The
    /// general formula carries no symmetry, so it is checked per system.
    pub i4_symmetric: bool,
}

/// Numeric values of the invariants at one jet point.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericInvariants<T = f64> {
    pub w2: Tensor2<T>,
    pub i2: Tensor3<T>,
    pub w3: Tensor2<T>,
    pub i4: Tensor2<T>,
    pub hx: T,
    pub hm1: Vec<T>,
}

impl<T: Scalar> NumericInvariants<T> {
    /// Pairs of (label, value) for every component, in a fixed order.
    pub fn components(&self) -> Vec<(String, T)> {
        let mut out = Vec::new();
        labelled(&mut out, "W2", &self.w2);
        labelled3(&mut out, "I2", &self.i2);
        labelled(&mut out, "W3", &self.w3);
        labelled(&mut out, "I4", &self.i4);
        out.push(("Hx".to_string(), self.hx));
        for (j, v) in self.hm1.iter().enumerate() {
            out.push((format!("Hm1[{}]", j + 1), *v));
        }
        out
    }

    pub fn convert<U: Scalar>(&self) -> NumericInvariants<U> {
        let c = |v: &T| U::from_f64(v.to_f64());
        NumericInvariants {
            w2: self.w2.map(c),
            i2: self.i2.map(c),
            w3: self.w3.map(c),
            i4: self.i4.map(c),
            hx: c(&self.hx),
            hm1: self.hm1.iter().map(c).collect(),
        }
    }
}

fn labelled<T: Copy>(out: &mut Vec<(String, T)>, name: &str, t: &Tensor2<T>) {
    for i in 0..t.dim() {
        for j in 0..t.dim() {
            out.push((format!("{name}[{}][{}]", i + 1, j + 1), *t.get(i, j)));
        }
    }
}

fn labelled3<T: Copy>(out: &mut Vec<(String, T)>, name: &str, t: &Tensor3<T>) {
    for i in 0..t.dim() {
        for j in 0..t.dim() {
            for k in 0..t.dim() {
                out.push((format!("{name}[{}][{}][{}]", i + 1, j + 1, k + 1), *t.get(i, j, k)));
            }
        }
    }
}

impl InvariantSet {
    /// Evaluates every component at `pt`.
    pub fn eval_at<T: Scalar>(&self, pt: &JetPoint<T>) -> Result<NumericInvariants<T>, EvalError> {
        let ev = |e: &Expr| e.eval_at(pt);
        Ok(NumericInvariants {
            w2: self.w2.try_map(ev)?,
            i2: self.i2.try_map(ev)?,
            w3: self.w3.try_map(ev)?,
            i4: self.i4.try_map(ev)?,
            hx: ev(&self.hx)?,
            hm1: self.hm1.iter().map(ev).collect::<Result<_, _>>()?,
        })
    }
}

fn w2_rf(jets: &Jets) -> Tensor2<Rf> {
    jets.linear_part().traceless()
}

fn i2_rf(jets: &Jets) -> Tensor3<Rf> {
    let s = jets.hess_q();
    crate::tensor::traceless3_rf(s).expect("second q-derivatives commute exactly")
}

/// `f_y + 1/3 f_q f_p - 1/2 D f_p + 1/6 D^2 f_q + 2/27 f_q^3
///  - 5/18 f_q (D f_q) - 1/18 (D f_q) f_q`.
fn w3_rf(jets: &Jets) -> Tensor2<Rf> {
    let (fq, dfq) = (jets.fq(), jets.dfq());
    let fq2 = fq.matmul(fq);
    jets.fy()
        .add(&fq.matmul(jets.fp()).scale(&frac(1, 3)))
        .sub(&jets.dfp().scale(&frac(1, 2)))
        .add(&jets.d2fq().scale(&frac(1, 6)))
        .add(&fq2.matmul(fq).scale(&frac(2, 27)))
        .sub(&fq.matmul(dfq).scale(&frac(5, 18)))
        .sub(&dfq.matmul(fq).scale(&frac(1, 18)))
}

/// `I4_{jk} = -dH_k/dp_j + d^2 Hx/dq_j dq_k - d(D H_j)/dq_k
///  - d(H_l df^l/dq_j)/dq_k + 2 H_j H_k` with `H = H^{-1}`.
fn i4_rf(jets: &Jets) -> Tensor2<Rf> {
    let m = jets.m();
    let hm1 = jets.hm1();
    let hx = jets.hx();
    let fq = jets.fq();
    let d_hm1: Vec<Rf> = hm1.iter().map(|h| jets.d(h)).collect();
    let contracted: Vec<Rf> = (0..m)
        .map(|j| (0..m).fold(Rf::zero(), |acc, l| acc.add(&hm1[l].mul(fq.get(l, j)))))
        .collect();
    let hx_q: Vec<Rf> = (0..m).map(|j| hx.diff(Var::Q(j + 1))).collect();
    Tensor2::par_from_fn(m, [Slot::Lower, Slot::Lower], |j, k| {
        let qk = Var::Q(k + 1);
        hm1[k]
            .diff(Var::P(j + 1))
            .neg()
            .add(&hx_q[j].diff(qk))
            .sub(&d_hm1[j].diff(qk))
            .sub(&contracted[j].diff(qk))
            .add(&hm1[j].mul(&hm1[k]).scale(&frac(2, 1)))
    })
}

pub(crate) fn compute_forms(sys: &OdeSystem) -> InvariantForms {
    let jets = Jets::new(sys);
    let ((w2, i2), (w3, i4)) = rayon::join(|| (w2_rf(&jets), i2_rf(&jets)), || (w3_rf(&jets), i4_rf(&jets)));
    InvariantForms {
        w2,
        i2,
        w3,
        i4,
        hx: jets.hx().clone(),
        hm1: jets.hm1().clone(),
    }
}

fn expr2(t: &Tensor2<Rf>) -> Tensor2<Expr> {
    t.map(Rf::to_expr)
}

/// `H^{-1}_j = 1/(6(m+1)) sum_i d^2 f^i / dq_i dq_j`.
pub fn compute_hm1(sys: &OdeSystem) -> Vec<Expr> {
    Jets::new(sys).hm1().iter().map(Rf::to_expr).collect()
}

/// `Hx = -1/(4m) sum_i (df^i/dp_i - D df^i/dq_i + 1/3 df^i/dq_k df^k/dq_i)`.
pub fn compute_hx(sys: &OdeSystem) -> Expr {
    Jets::new(sys).hx().to_expr()
}

/// Trace-free part of `df/dp - D df/dq + 1/3 (df/dq)^2`.
pub fn compute_w2(sys: &OdeSystem) -> Tensor2<Expr> {
    expr2(&w2_rf(&Jets::new(sys)))
}

/// Trace-free part of the q-Hessian `d^2 f^i / dq_j dq_k`.
pub fn compute_i2(sys: &OdeSystem) -> Tensor3<Expr> {
    i2_rf(&Jets::new(sys)).map(Rf::to_expr)
}

pub fn compute_w3(sys: &OdeSystem) -> Tensor2<Expr> {
    expr2(&w3_rf(&Jets::new(sys)))
}

pub fn compute_i4(sys: &OdeSystem) -> Tensor2<Expr> {
    expr2(&i4_rf(&Jets::new(sys)))
}

fn symmetric(t: &Tensor2<Rf>) -> bool {
    let m = t.dim();
    (0..m).all(|j| (j + 1..m).all(|k| t.get(j, k).sub(t.get(k, j)).is_zero()))
}

impl InvariantForms {
    pub(crate) fn to_set(&self, m: usize) -> InvariantSet {
        InvariantSet {
            m,
            w2: expr2(&self.w2),
            i2: self.i2.map(Rf::to_expr),
            w3: expr2(&self.w3),
            i4: expr2(&self.i4),
            hx: self.hx.to_expr(),
            hm1: self.hm1.iter().map(Rf::to_expr).collect(),
            i4_symmetric: symmetric(&self.i4),
        }
    }

    /// Labels and forms of the four invariant tensors' entries.
    fn invariant_entries(&self) -> Vec<(String, &Rf)> {
        let mut out = Vec::new();
        labelled_ref(&mut out, "W2", &self.w2);
        let m = self.i2.dim();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    out.push((format!("I2[{}][{}][{}]", i + 1, j + 1, k + 1), self.i2.get(i, j, k)));
                }
            }
        }
        labelled_ref(&mut out, "W3", &self.w3);
        labelled_ref(&mut out, "I4", &self.i4);
        out
    }
}

fn labelled_ref<'t>(out: &mut Vec<(String, &'t Rf)>, name: &str, t: &'t Tensor2<Rf>) {
    for i in 0..t.dim() {
        for j in 0..t.dim() {
            out.push((format!("{name}[{}][{}]", i + 1, j + 1), t.get(i, j)));
        }
    }
}

/// All invariants of `sys`.
pub fn compute_all(sys: &OdeSystem) -> InvariantSet {
    compute_forms(sys).to_set(sys.dim())
}

/// Outcome of the trivializability test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    /// Exact answer: every entry of `W2, I2, W3, I4` is identically zero.
    pub trivializable: bool,
    /// Labels of the entries that are not identically zero.
    pub nonvanishing: Vec<String>,
    /// Set only when the answer is negative and every nonvanishing entry
    /// involves function atoms: whether those entries were numerically zero
    /// at all sample points, in which case a transcendental identity may be
    /// hiding a positive answer. Advisory only.
    pub numerically_vanishing: Option<bool>,
}

/// Exact trivializability verdict with the numeric diagnostic.
pub fn trivializability(sys: &OdeSystem) -> Verdict {
    let forms = compute_forms(sys);
    let nonzero: Vec<(String, &Rf)> = forms
        .invariant_entries()
        .into_iter()
        .filter(|(_, rf)| !rf.is_zero())
        .collect();
    let numerically_vanishing = if !nonzero.is_empty() && nonzero.iter().all(|(_, rf)| rf.has_transcendental()) {
        Some(nonzero.iter().all(|(_, rf)| samples_vanish(rf, sys.dim())))
    } else {
        None
    };
    Verdict {
        trivializable: nonzero.is_empty(),
        nonvanishing: nonzero.into_iter().map(|(label, _)| label).collect(),
        numerically_vanishing,
    }
}

/// Whether `sys` is point-equivalent to `y''' = 0`, decided exactly. On
/// inputs with function atoms a `false` may be conservative; see
/// [`trivializability`].
pub fn is_trivializable(sys: &OdeSystem) -> bool {
    trivializability(sys).trivializable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_system;
    use crate::rational::{is_zero, normalize};
    use crate::system::{circles_system, trivial_system};

    fn sys(text: &str) -> OdeSystem {
        parse_system(text).unwrap()
    }

    fn all_zero(es: &[Expr]) -> bool {
        es.iter().all(|e| is_zero(e).unwrap())
    }

    fn zero_set(s: &InvariantSet) -> bool {
        all_zero(s.w2.entries())
            && all_zero(s.i2.entries())
            && all_zero(s.w3.entries())
            && all_zero(s.i4.entries())
            && is_zero(&s.hx).unwrap()
            && all_zero(&s.hm1)
    }

    fn circles_i4(m: usize) -> Tensor2<Expr> {
        let s = Expr::sum(std::iter::once(Expr::one()).chain((1..=m).map(|l| Expr::p(l).powi(2))));
        Tensor2::from_fn(m, [Slot::Lower, Slot::Lower], |j, k| {
            let delta = if j == k { Expr::one() } else { Expr::zero() };
            delta / (Expr::integer(2) * &s) - Expr::p(j + 1) * Expr::p(k + 1) / (Expr::integer(2) * s.powi(2))
        })
    }

    #[test]
    fn trivial_systems_have_zero_invariants() {
        for m in 2..=3 {
            assert!(zero_set(&compute_all(&trivial_system(m).unwrap())));
        }
    }

    #[test]
    fn circles_golden() {
        for m in 2..=3 {
            let inv = compute_all(&circles_system(m).unwrap());
            assert!(all_zero(inv.w2.entries()), "W2, m = {m}");
            assert!(all_zero(inv.i2.entries()), "I2, m = {m}");
            assert!(all_zero(inv.w3.entries()), "W3, m = {m}");
            let expected = circles_i4(m);
            for (a, b) in inv.i4.entries().iter().zip(expected.entries()) {
                assert!(is_zero(&(a - b)).unwrap(), "I4, m = {m}: {a} vs {b}");
            }
            assert!(inv.i4_symmetric);
        }
    }

    #[test]
    fn circles_i4_at_unit_slope() {
        let inv = compute_all(&circles_system(2).unwrap());
        let pt = JetPoint::new(0.0, vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]);
        let v = inv.eval_at(&pt).unwrap();
        let want = [[0.125, 0.0], [0.0, 0.25]];
        for j in 0..2 {
            for k in 0..2 {
                assert!((v.i4.get(j, k) - want[j][k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn circles_auxiliary_functions() {
        let sys = circles_system(2).unwrap();
        let s = Expr::one() + Expr::p(1).powi(2) + Expr::p(2).powi(2);
        let hx = Expr::integer(3) * (Expr::q(1).powi(2) + Expr::q(2).powi(2)) / (Expr::integer(4) * &s);
        assert!(is_zero(&(compute_hx(&sys) - hx)).unwrap());
        let hm1 = compute_hm1(&sys);
        for (j, h) in hm1.iter().enumerate() {
            let want = Expr::p(j + 1) / (Expr::integer(2) * &s);
            assert!(is_zero(&(h - want)).unwrap());
        }
        let origin = JetPoint::new(0.3, vec![0.1, 0.2], vec![0.0, 0.0], vec![1.0, -1.0]);
        assert_eq!(hm1[0].eval(&origin).unwrap(), 0.0);
    }

    #[test]
    fn linear_in_p_off_diagonal() {
        let s = sys("m = 2\nf1 = p2\nf2 = 0");
        let w2 = compute_w2(&s);
        assert_eq!(w2.get(0, 1), &Expr::one());
        assert!(is_zero(w2.get(0, 0)).unwrap() && is_zero(w2.get(1, 0)).unwrap() && is_zero(w2.get(1, 1)).unwrap());
        assert!(is_zero(&compute_hx(&s)).unwrap());
    }

    #[test]
    fn affine_in_q_has_no_i2_or_hm1() {
        let s = sys("m = 2\nf1 = x*q1 + y2*q2 + p1\nf2 = q1 - 3");
        assert!(all_zero(compute_i2(&s).entries()));
        assert!(all_zero(&compute_hm1(&s)));
    }

    #[test]
    fn i2_of_single_square() {
        let s = sys("m = 2\nf1 = q2^2\nf2 = 0");
        let i2 = compute_i2(&s);
        // S^1_{22} = 2 and the contraction T_j = S^l_{lj} is zero, so nothing
        // is subtracted.
        assert!(is_zero(&(i2.get(0, 1, 1) - Expr::integer(2))).unwrap());
        let rf = i2.try_map(normalize).unwrap();
        for c in rf.contraction_first().iter().chain(rf.contraction_second().iter()) {
            assert!(c.is_zero());
        }
    }

    #[test]
    fn i2_contractions_vanish_for_cubic_mix() {
        let s = sys("m = 2\nf1 = q1^2*q2\nf2 = 0");
        let rf = compute_i2(&s).try_map(normalize).unwrap();
        assert!(rf.contraction_first().iter().all(Rf::is_zero));
        assert!(rf.contraction_second().iter().all(Rf::is_zero));
        assert!(!rf.entries().iter().all(Rf::is_zero));
    }

    #[test]
    fn functions_of_x_only_are_trivializable() {
        let s = sys("m = 2\nf1 = x\nf2 = x");
        assert!(zero_set(&compute_all(&s)));
        assert!(is_trivializable(&s));
        assert!(is_trivializable(&trivial_system(3).unwrap()));
        assert!(is_trivializable(&sys(
            "m = 3\nf1 = sin(x)\nf2 = x^5 - 1/x\nf3 = exp(x)"
        )));
    }

    #[test]
    fn circles_not_trivializable() {
        let v = trivializability(&circles_system(2).unwrap());
        assert!(!v.trivializable);
        assert!(v.nonvanishing.iter().all(|l| l.starts_with("I4")));
        assert_eq!(v.numerically_vanishing, None);
    }

    #[test]
    fn transformed_trivial_system_is_trivializable() {
        // Image of y''' = 0 under Y1 = u1 + u2^2, Y2 = u2 + x u1^2.
        let s = sys(concat!(
            "m = 2\n",
            "f1 = 6*(-2*p1^2*y2 - 2*p1*q1*x*y2 + p2*q2 - 2*q1*y1*y2)/(4*x*y1*y2 - 1)\n",
            "f2 = 6*(p1^2 + p1*q1*x - 2*p2*q2*x*y1 + q1*y1)/(4*x*y1*y2 - 1)\n",
        ));
        assert!(is_trivializable(&s));
    }

    #[test]
    fn transcendental_diagnostic() {
        // W2 = tr0 of diag(sin^2 p1 + cos^2 p1, 1) is not recognized as zero.
        let s = sys("m = 2\nf1 = p1*(sin(x)^2 + cos(x)^2)\nf2 = p2");
        let v = trivializability(&s);
        assert!(!v.trivializable);
        assert_eq!(v.numerically_vanishing, Some(true));
    }

    #[test]
    fn w3_linear_y_coupling() {
        // Only f_y survives: W3 = [[0, 1], [0, 0]].
        let s = sys("m = 2\nf1 = y2\nf2 = 0");
        let w3 = compute_w3(&s);
        assert_eq!(w3.get(0, 1), &Expr::one());
        assert!(is_zero(w3.get(0, 0)).unwrap());
        assert!(!is_trivializable(&s));
    }
}
