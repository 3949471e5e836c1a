//! Finite-difference oracle for the invariants.
//!
//! The right-hand side is treated as a black box. Every partial derivative
//! and every total derivative in the invariant formulas is replaced by a
//! second-order central stencil, and nested derivatives are obtained by
//! composing stencils. Nothing here touches the symbolic kernel, so agreement
//! with [`InvariantSet::eval_at`](crate::InvariantSet::eval_at) is an
//! independent check.
//!
//! Evaluation runs in [`DoubleDouble`]: the deepest terms nest four stencils
//! and divide by `h^4`, which would swamp `f64` round-off at `h = 1e-4`.

use std::sync::Arc;

use crate::error::{EvalError, OracleError};
use crate::expr::Var;
use crate::invariants::NumericInvariants;
use crate::scalar::{DoubleDouble, Scalar};
use crate::system::{JetPoint, OdeSystem};
use crate::tensor::{Slot, Tensor2, Tensor3};

type Dd = DoubleDouble;

/// A right-hand side known only through its values.
pub trait NumericRhs: Sync {
    fn dim(&self) -> usize;

    /// `f^i` at `pt`, `i` 0-based.
    fn eval(&self, pt: &JetPoint<DoubleDouble>, i: usize) -> Result<DoubleDouble, EvalError>;
}

/// Evaluates the parsed expressions of a system directly.
#[derive(Clone, Copy, Debug)]
pub struct ExprRhs<'a>(pub &'a OdeSystem);

impl NumericRhs for ExprRhs<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, pt: &JetPoint<Dd>, i: usize) -> Result<Dd, EvalError> {
        self.0.rhs()[i].eval_at(pt)
    }
}

/// Adapts an `f64` closure. Nested stencils then only see `f64` round-off,
/// so deep derivatives lose accuracy quickly; prefer [`ExprRhs`] when the
/// formula is available.
pub struct FnRhs<F> {
    m: usize,
    f: F,
}

impl<F> FnRhs<F>
where
    F: Fn(&JetPoint<f64>, usize) -> Result<f64, EvalError> + Sync,
{
    pub fn new(m: usize, f: F) -> Self {
        FnRhs { m, f }
    }
}

impl<F> NumericRhs for FnRhs<F>
where
    F: Fn(&JetPoint<f64>, usize) -> Result<f64, EvalError> + Sync,
{
    fn dim(&self) -> usize {
        self.m
    }

    fn eval(&self, pt: &JetPoint<Dd>, i: usize) -> Result<Dd, EvalError> {
        (self.f)(&pt.convert(), i).map(Dd::from_f64)
    }
}

/// Step and tolerances of the oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    /// Bound for `W2`, `I2`, `Hx` and `H^{-1}`.
    pub tolerance: f64,
    /// Bound for `W3` and `I4`, which contain second total derivatives.
    pub relaxed_tolerance: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: 1e-4,
            tolerance: 1e-6,
            relaxed_tolerance: 1e-4,
        }
    }
}

impl FdConfig {
    pub fn new(step: f64, tolerance: f64) -> Result<Self, OracleError> {
        FdConfig {
            step,
            tolerance,
            relaxed_tolerance: tolerance.max(1e-4),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self, OracleError> {
        for (name, v) in [
            ("step", self.step),
            ("tolerance", self.tolerance),
            ("relaxed tolerance", self.relaxed_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(OracleError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(self)
    }

    pub fn with_step(self, step: f64) -> Self {
        FdConfig { step, ..self }
    }
}

/// A numeric function on jet space.
pub type JetFn<'a> = Arc<dyn Fn(&JetPoint<Dd>) -> Result<Dd, OracleError> + Send + Sync + 'a>;

fn out_of_domain(e: OracleError) -> OracleError {
    match e {
        OracleError::EvalSingular(msg) => OracleError::StencilOutOfDomain(msg),
        other => other,
    }
}

/// Builds stencils for one right-hand side and step.
struct Stencils<'a, R: NumericRhs> {
    rhs: &'a R,
    h: Dd,
}

impl<'a, R: NumericRhs> Stencils<'a, R> {
    fn component(&self, i: usize) -> JetFn<'a> {
        let rhs = self.rhs;
        Arc::new(move |pt| Ok(rhs.eval(pt, i)?))
    }

    fn partial(&self, g: &JetFn<'a>, v: Var) -> JetFn<'a> {
        let (g, h) = (g.clone(), self.h);
        Arc::new(move |pt| {
            let plus = g(&pt.shifted(v, h)).map_err(out_of_domain)?;
            let minus = g(&pt.shifted(v, -h)).map_err(out_of_domain)?;
            Ok((plus - minus) / (h + h))
        })
    }

    fn total(&self, g: &JetFn<'a>) -> JetFn<'a> {
        let m = self.rhs.dim();
        let gx = self.partial(g, Var::X);
        let parts: Vec<(JetFn<'a>, JetFn<'a>, JetFn<'a>)> = (1..=m)
            .map(|i| {
                (
                    self.partial(g, Var::Y(i)),
                    self.partial(g, Var::P(i)),
                    self.partial(g, Var::Q(i)),
                )
            })
            .collect();
        let rhs = self.rhs;
        Arc::new(move |pt| {
            let mut acc = gx(pt)?;
            for (i, (gy, gp, gq)) in parts.iter().enumerate() {
                acc = acc + pt.p[i] * gy(pt)? + pt.q[i] * gp(pt)? + rhs.eval(pt, i)? * gq(pt)?;
            }
            Ok(acc)
        })
    }

    fn sum(terms: Vec<(Dd, JetFn<'a>)>) -> JetFn<'a> {
        Arc::new(move |pt| {
            let mut acc = Dd::zero();
            for (c, t) in &terms {
                acc = acc + *c * t(pt)?;
            }
            Ok(acc)
        })
    }
}

fn to_dd(pt: &JetPoint<f64>) -> JetPoint<Dd> {
    pt.convert()
}

fn check_dims<R: NumericRhs>(rhs: &R, pt: &JetPoint<f64>) -> Result<(), OracleError> {
    let m = rhs.dim();
    if pt.y.len() != m || pt.p.len() != m || pt.q.len() != m {
        return Err(EvalError::DimensionMismatch {
            expected: m,
            found: pt.dim(),
        }
        .into());
    }
    Ok(())
}

/// Evaluates every `f^i` at the point itself, so a singular base point is
/// reported as such rather than as a stencil problem.
fn check_base<R: NumericRhs>(rhs: &R, pt: &JetPoint<Dd>) -> Result<(), OracleError> {
    for i in 0..rhs.dim() {
        rhs.eval(pt, i)?;
    }
    Ok(())
}

/// Central-difference estimate of `df^i/dv`, `i` 0-based.
pub fn fd_partial<R: NumericRhs>(
    rhs: &R,
    i: usize,
    v: Var,
    pt: &JetPoint<f64>,
    cfg: &FdConfig,
) -> Result<f64, OracleError> {
    let cfg = cfg.validated()?;
    check_dims(rhs, pt)?;
    let pt = to_dd(pt);
    check_base(rhs, &pt)?;
    let s = Stencils {
        rhs,
        h: Dd::from_f64(cfg.step),
    };
    Ok(s.partial(&s.component(i), v)(&pt)?.to_f64())
}

/// Numeric total derivative `g_x + p_i g_{y_i} + q_i g_{p_i} + f^i g_{q_i}`.
pub fn fd_total_derivative<R: NumericRhs>(
    rhs: &R,
    g: &JetFn<'_>,
    pt: &JetPoint<f64>,
    cfg: &FdConfig,
) -> Result<f64, OracleError> {
    let cfg = cfg.validated()?;
    check_dims(rhs, pt)?;
    let pt = to_dd(pt);
    check_base(rhs, &pt)?;
    // The stencil only needs the rhs for the f^i weights; g may capture
    // anything with a shorter lifetime, so it is composed by hand here.
    let h = Dd::from_f64(cfg.step);
    let d = |v: Var| -> Result<Dd, OracleError> {
        let plus = g(&pt.shifted(v, h)).map_err(out_of_domain)?;
        let minus = g(&pt.shifted(v, -h)).map_err(out_of_domain)?;
        Ok((plus - minus) / (h + h))
    };
    let mut acc = d(Var::X)?;
    for i in 0..rhs.dim() {
        let k = i + 1;
        acc = acc + pt.p[i] * d(Var::Y(k))? + pt.q[i] * d(Var::P(k))? + rhs.eval(&pt, i)? * d(Var::Q(k))?;
    }
    Ok(acc.to_f64())
}

/// All invariants recomputed with stencils in place of derivatives.
pub fn fd_invariants<R: NumericRhs>(
    rhs: &R,
    pt: &JetPoint<f64>,
    cfg: &FdConfig,
) -> Result<NumericInvariants<f64>, OracleError> {
    let cfg = cfg.validated()?;
    check_dims(rhs, pt)?;
    let pt = to_dd(pt);
    check_base(rhs, &pt)?;
    Ok(fd_invariants_dd(rhs, &pt, cfg.step)?.convert())
}

fn c(n: f64, d: f64) -> Dd {
    Dd::from_f64(n) / Dd::from_f64(d)
}

fn fd_invariants_dd<R: NumericRhs>(
    rhs: &R,
    pt: &JetPoint<Dd>,
    step: f64,
) -> Result<NumericInvariants<Dd>, OracleError> {
    let s = Stencils {
        rhs,
        h: Dd::from_f64(step),
    };
    let m = rhs.dim();
    let f: Vec<JetFn> = (0..m).map(|i| s.component(i)).collect();
    let jac = |var: fn(usize) -> Var| -> Vec<Vec<JetFn>> {
        (0..m)
            .map(|i| (0..m).map(|j| s.partial(&f[i], var(j + 1))).collect())
            .collect()
    };
    let fq_fn = jac(Var::Q);
    let fp_fn = jac(Var::P);
    let fy_fn = jac(Var::Y);
    let dfq_fn: Vec<Vec<JetFn>> = fq_fn
        .iter()
        .map(|row| row.iter().map(|g| s.total(g)).collect())
        .collect();

    let at = |fns: &Vec<Vec<JetFn>>| -> Result<Tensor2<Dd>, OracleError> {
        let rows = fns
            .iter()
            .map(|row| row.iter().map(|g| g(pt)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Tensor2::from_rows(rows))
    };
    let fq = at(&fq_fn)?;
    let fp = at(&fp_fn)?;
    let fy = at(&fy_fn)?;
    let dfq = at(&dfq_fn)?;
    let dfp = at(&fp_fn
        .iter()
        .map(|row| row.iter().map(|g| s.total(g)).collect())
        .collect())?;
    let d2fq = at(&dfq_fn
        .iter()
        .map(|row| row.iter().map(|g| s.total(g)).collect())
        .collect())?;

    let matmul = |a: &Tensor2<Dd>, b: &Tensor2<Dd>| {
        Tensor2::mixed(m, |i, j| {
            (0..m).fold(Dd::zero(), |acc, k| acc + *a.get(i, k) * *b.get(k, j))
        })
    };
    let lin = |a: &[(Dd, &Tensor2<Dd>)]| {
        Tensor2::mixed(m, |i, j| {
            a.iter().fold(Dd::zero(), |acc, (c, t)| acc + *c * *t.get(i, j))
        })
    };

    // W2 and Hx from f_p - D f_q + 1/3 f_q f_q.
    let fq2 = matmul(&fq, &fq);
    let one = Dd::one();
    let mlin = lin(&[(one, &fp), (-one, &dfq), (c(1.0, 3.0), &fq2)]);
    let tr = (0..m).fold(Dd::zero(), |acc, i| acc + *mlin.get(i, i));
    let md = Dd::from_f64(m as f64);
    let w2 = Tensor2::mixed(m, |i, j| {
        if i == j {
            *mlin.get(i, j) - tr / md
        } else {
            *mlin.get(i, j)
        }
    });
    let hx = -tr / (Dd::from_f64(4.0) * md);

    // I2 and H^{-1} from the q-Hessian.
    let hess = Tensor3::from_fn(m, |i, j, k| s.partial(&fq_fn[i][j], Var::Q(k + 1))(pt));
    let hess: Tensor3<Dd> = hess.try_map(|r| r.clone())?;
    let trace_q: Vec<Dd> = (0..m)
        .map(|j| (0..m).fold(Dd::zero(), |acc, l| acc + *hess.get(l, l, j)))
        .collect();
    let mp1 = Dd::from_f64(m as f64 + 1.0);
    let i2 = Tensor3::from_fn(m, |i, j, k| {
        let mut v = *hess.get(i, j, k);
        if i == j {
            v = v - trace_q[k] / mp1;
        }
        if i == k {
            v = v - trace_q[j] / mp1;
        }
        v
    });
    let hm1_c = one / (Dd::from_f64(6.0) * mp1);
    let hm1: Vec<Dd> = trace_q.iter().map(|t| *t * hm1_c).collect();

    // W3.
    let fq3 = matmul(&fq2, &fq);
    let w3 = lin(&[
        (one, &fy),
        (c(1.0, 3.0), &matmul(&fq, &fp)),
        (c(-1.0, 2.0), &dfp),
        (c(1.0, 6.0), &d2fq),
        (c(2.0, 27.0), &fq3),
        (c(-5.0, 18.0), &matmul(&fq, &dfq)),
        (c(-1.0, 18.0), &matmul(&dfq, &fq)),
    ]);

    // I4 needs H^{-1} and Hx as functions on jet space.
    let hm1_fn: Vec<JetFn> = (0..m)
        .map(|j| {
            let terms = (0..m)
                .map(|l| (hm1_c, s.partial(&fq_fn[l][l], Var::Q(j + 1))))
                .collect();
            Stencils::<R>::sum(terms)
        })
        .collect();
    let hx_fn: JetFn = {
        let (fp_fn, fq_fn, dfq_fn) = (fp_fn.clone(), fq_fn.clone(), dfq_fn.clone());
        let scale = -one / (Dd::from_f64(4.0) * md);
        Arc::new(move |p| {
            let mut acc = Dd::zero();
            for i in 0..m {
                acc = acc + fp_fn[i][i](p)? - dfq_fn[i][i](p)?;
                for k in 0..m {
                    acc = acc + c(1.0, 3.0) * fq_fn[i][k](p)? * fq_fn[k][i](p)?;
                }
            }
            Ok(scale * acc)
        })
    };
    let contracted_fn: Vec<JetFn> = (0..m)
        .map(|j| {
            let hm1_fn = hm1_fn.clone();
            let col: Vec<JetFn> = (0..m).map(|l| fq_fn[l][j].clone()).collect();
            let g: JetFn = Arc::new(move |p| {
                let mut acc = Dd::zero();
                for l in 0..m {
                    acc = acc + hm1_fn[l](p)? * col[l](p)?;
                }
                Ok(acc)
            });
            g
        })
        .collect();
    let d_hm1_fn: Vec<JetFn> = hm1_fn.iter().map(|g| s.total(g)).collect();
    let hx_q: Vec<JetFn> = (0..m).map(|j| s.partial(&hx_fn, Var::Q(j + 1))).collect();
    let mut i4_rows = Vec::with_capacity(m);
    for j in 0..m {
        let mut row = Vec::with_capacity(m);
        for k in 0..m {
            let qk = Var::Q(k + 1);
            let v = -s.partial(&hm1_fn[k], Var::P(j + 1))(pt)? + s.partial(&hx_q[j], qk)(pt)?
                - s.partial(&d_hm1_fn[j], qk)(pt)?
                - s.partial(&contracted_fn[j], qk)(pt)?
                + Dd::from_f64(2.0) * hm1[j] * hm1[k];
            row.push(v);
        }
        i4_rows.push(row);
    }
    let i4 = Tensor2::from_rows(i4_rows).with_slots([Slot::Lower, Slot::Lower]);

    Ok(NumericInvariants {
        w2,
        i2,
        w3,
        i4,
        hx,
        hm1,
    })
}

/// `|a - b| / (1 + |b|)`: relative for large values, absolute near zero,
/// where most invariants of interest live.
pub fn deviation(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Largest deviations between a numeric and a symbolic evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    /// Over `W2`, `I2`, `Hx` and `H^{-1}`.
    pub strict_deviation: f64,
    /// Over `W3` and `I4`.
    pub relaxed_deviation: f64,
    /// Label of the component with the largest deviation relative to its
    /// bound.
    pub worst: String,
    pub passed: bool,
}

fn is_relaxed(label: &str) -> bool {
    label.starts_with("W3") || label.starts_with("I4")
}

/// Compares oracle values against symbolic ones under `cfg`'s bounds.
pub fn compare(numeric: &NumericInvariants<f64>, symbolic: &NumericInvariants<f64>, cfg: &FdConfig) -> Comparison {
    let mut strict: f64 = 0.0;
    let mut relaxed: f64 = 0.0;
    let mut worst = (0.0, String::new());
    for ((label, a), (_, b)) in numeric.components().into_iter().zip(symbolic.components()) {
        let dev = deviation(a, b);
        let bound = if is_relaxed(&label) {
            relaxed = relaxed.max(dev);
            cfg.relaxed_tolerance
        } else {
            strict = strict.max(dev);
            cfg.tolerance
        };
        if dev / bound >= worst.0 || dev.is_nan() {
            worst = (dev / bound, label);
        }
    }
    Comparison {
        strict_deviation: strict,
        relaxed_deviation: relaxed,
        worst: worst.1,
        passed: strict <= cfg.tolerance && relaxed <= cfg.relaxed_tolerance,
    }
}

/// Aggregate errors at step `h` and `h/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Richardson {
    pub error_at_h: f64,
    pub error_at_half_h: f64,
    /// `error_at_h / error_at_half_h`, or `None` when the error at `h` is
    /// already at round-off level and no ratio is meaningful.
    pub ratio: Option<f64>,
    pub passed: bool,
}

/// Errors below this are treated as exact: stencils of low-degree
/// polynomials have no truncation error, only round-off.
pub const RICHARDSON_FLOOR: f64 = 1e-13;

/// Minimum error reduction expected when the step is halved.
pub const RICHARDSON_FACTOR: f64 = 3.0;

fn max_deviation(numeric: &NumericInvariants<f64>, symbolic: &NumericInvariants<f64>) -> f64 {
    numeric
        .components()
        .into_iter()
        .zip(symbolic.components())
        .map(|((_, a), (_, b))| deviation(a, b))
        .fold(0.0, f64::max)
}

/// Halves the step and checks that the largest deviation from the symbolic
/// values shrinks by at least [`RICHARDSON_FACTOR`].
pub fn richardson<R: NumericRhs>(
    rhs: &R,
    symbolic: &NumericInvariants<f64>,
    pt: &JetPoint<f64>,
    cfg: &FdConfig,
) -> Result<Richardson, OracleError> {
    let coarse = fd_invariants(rhs, pt, cfg)?;
    let fine = fd_invariants(rhs, pt, &cfg.with_step(cfg.step / 2.0))?;
    Ok(richardson_from(&coarse, &fine, symbolic))
}

/// Same as [`richardson`] with both oracle evaluations supplied.
pub fn richardson_from(
    coarse: &NumericInvariants<f64>,
    fine: &NumericInvariants<f64>,
    symbolic: &NumericInvariants<f64>,
) -> Richardson {
    let error_at_h = max_deviation(coarse, symbolic);
    let error_at_half_h = max_deviation(fine, symbolic);
    if error_at_h <= RICHARDSON_FLOOR {
        return Richardson {
            error_at_h,
            error_at_half_h,
            ratio: None,
            passed: error_at_half_h <= RICHARDSON_FLOOR,
        };
    }
    let ratio = error_at_h / error_at_half_h;
    Richardson {
        error_at_h,
        error_at_half_h,
        ratio: Some(ratio),
        passed: ratio >= RICHARDSON_FACTOR,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::compute_all;
    use crate::parse::parse_system;
    use crate::system::{circles_system, trivial_system};

    fn pt2(p: [f64; 2], q: [f64; 2]) -> JetPoint<f64> {
        JetPoint::new(0.3, vec![0.2, -0.4], p.to_vec(), q.to_vec())
    }

    #[test]
    fn partial_of_square() {
        let sys = parse_system("m = 2\nf1 = q1^2\nf2 = 0").unwrap();
        let d = fd_partial(
            &ExprRhs(&sys),
            0,
            Var::Q(1),
            &pt2([0.0, 0.0], [3.0, 0.0]),
            &FdConfig::default(),
        )
        .unwrap();
        assert!((d - 6.0).abs() < 1e-7);
    }

    #[test]
    fn partial_of_constant() {
        let sys = parse_system("m = 2\nf1 = 7/3\nf2 = 0").unwrap();
        for v in Var::all(2) {
            let d = fd_partial(&ExprRhs(&sys), 0, v, &pt2([0.5, 0.1], [1.0, 2.0]), &FdConfig::default()).unwrap();
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn circles_partial_at_unit_slope() {
        let sys = circles_system(2).unwrap();
        let d = fd_partial(
            &ExprRhs(&sys),
            0,
            Var::Q(1),
            &pt2([1.0, 0.0], [1.0, 1.0]),
            &FdConfig::default(),
        )
        .unwrap();
        assert!((d - 3.0).abs() < 1e-7);
    }

    #[test]
    fn total_derivative_of_coordinates() {
        let sys = trivial_system(2).unwrap();
        let rhs = ExprRhs(&sys);
        let pt = pt2([0.7, -0.2], [1.5, 0.25]);
        let y1: JetFn = Arc::new(|p| Ok(p.y[0]));
        let q1: JetFn = Arc::new(|p| Ok(p.q[0]));
        let cfg = FdConfig::default();
        assert!((fd_total_derivative(&rhs, &y1, &pt, &cfg).unwrap() - 0.7).abs() < 1e-7);
        assert!(fd_total_derivative(&rhs, &q1, &pt, &cfg).unwrap().abs() < 1e-12);
    }

    #[test]
    fn trivial_invariants_vanish_numerically() {
        let sys = trivial_system(2).unwrap();
        let num = fd_invariants(&ExprRhs(&sys), &pt2([0.1, 0.2], [0.3, 0.4]), &FdConfig::default()).unwrap();
        assert!(num.components().iter().all(|(_, v)| v.abs() < 1e-8));
    }

    #[test]
    fn circles_i4_numerically() {
        let sys = circles_system(2).unwrap();
        let num = fd_invariants(&ExprRhs(&sys), &pt2([1.0, 0.0], [0.0, 0.0]), &FdConfig::default()).unwrap();
        let want = [[0.125, 0.0], [0.0, 0.25]];
        for j in 0..2 {
            for k in 0..2 {
                assert!(
                    (num.i4.get(j, k) - want[j][k]).abs() < 1e-6,
                    "{j}{k}: {}",
                    num.i4.get(j, k)
                );
            }
        }
    }

    #[test]
    fn oracle_matches_symbolic_on_circles() {
        let sys = circles_system(2).unwrap();
        let inv = compute_all(&sys);
        let pt = pt2([0.4, -0.7], [1.1, 0.6]);
        let cfg = FdConfig::default();
        let num = fd_invariants(&ExprRhs(&sys), &pt, &cfg).unwrap();
        let sym = inv.eval_at(&pt).unwrap();
        let cmp = compare(&num, &sym, &cfg);
        assert!(cmp.passed, "{cmp:?}");
        let r = richardson(&ExprRhs(&sys), &sym, &pt, &cfg).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.ratio.unwrap() > 3.5);
    }

    #[test]
    fn closure_rhs() {
        let rhs = FnRhs::new(2, |p: &JetPoint<f64>, i| Ok(if i == 0 { p.q[1] * p.q[1] } else { 0.0 }));
        let d = fd_partial(&rhs, 0, Var::Q(2), &pt2([0.0, 0.0], [0.0, 1.5]), &FdConfig::default()).unwrap();
        assert!((d - 3.0).abs() < 1e-7);
    }

    #[test]
    fn singular_points() {
        let sys = parse_system("m = 2\nf1 = 1/p1\nf2 = 0").unwrap();
        let rhs = ExprRhs(&sys);
        let cfg = FdConfig::default();
        let at_pole = fd_partial(&rhs, 0, Var::P(1), &pt2([0.0, 0.0], [0.0, 0.0]), &cfg);
        assert!(matches!(at_pole, Err(OracleError::EvalSingular(_))));
        let near_pole = fd_partial(&rhs, 0, Var::P(1), &pt2([1e-4, 0.0], [0.0, 0.0]), &cfg);
        assert!(matches!(near_pole, Err(OracleError::StencilOutOfDomain(_))));
    }

    #[test]
    fn config_validation() {
        assert!(FdConfig::new(0.0, 1e-6).is_err());
        assert!(FdConfig::new(1e-4, -1.0).is_err());
        assert!(FdConfig::new(f64::NAN, 1e-6).is_err());
        assert!(FdConfig::new(1e-3, 1e-5).is_ok());
    }

    #[test]
    fn deviation_is_relative_for_large_values() {
        assert_eq!(deviation(1.0, 0.0), 1.0);
        assert!((deviation(1001.0, 1000.0) - 1.0 / 1001.0).abs() < 1e-15);
    }
}
