//! Lazily computed derivatives of the right-hand side, shared by the
//! invariant and connection computations.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::expr::Var;
use crate::rational::RationalForm;
use crate::system::{total_derivative_rf, OdeSystem};
use crate::tensor::{Slot, Tensor2, Tensor3};

pub(crate) type Rf = RationalForm;

pub(crate) fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

const MIXED: [Slot; 2] = [Slot::Upper, Slot::Lower];

pub(crate) struct Jets<'a> {
    sys: &'a OdeSystem,
    fq: OnceLock<Tensor2<Rf>>,
    fp: OnceLock<Tensor2<Rf>>,
    fy: OnceLock<Tensor2<Rf>>,
    dfq: OnceLock<Tensor2<Rf>>,
    d2fq: OnceLock<Tensor2<Rf>>,
    dfp: OnceLock<Tensor2<Rf>>,
    hess_q: OnceLock<Tensor3<Rf>>,
    hm1: OnceLock<Vec<Rf>>,
    hx: OnceLock<Rf>,
}

impl<'a> Jets<'a> {
    pub fn new(sys: &'a OdeSystem) -> Self {
        Jets {
            sys,
            fq: OnceLock::new(),
            fp: OnceLock::new(),
            fy: OnceLock::new(),
            dfq: OnceLock::new(),
            d2fq: OnceLock::new(),
            dfp: OnceLock::new(),
            hess_q: OnceLock::new(),
            hm1: OnceLock::new(),
            hx: OnceLock::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.sys.dim()
    }

    pub fn rhs(&self) -> &[Rf] {
        self.sys.normal_forms()
    }

    /// Total derivative along the equation.
    pub fn d(&self, e: &Rf) -> Rf {
        total_derivative_rf(self.rhs(), e)
    }

    fn jacobian(&self, var: fn(usize) -> Var) -> Tensor2<Rf> {
        let f = self.rhs();
        Tensor2::par_from_fn(self.m(), MIXED, |i, j| f[i].diff(var(j + 1)))
    }

    /// `(f_q)^i_j = df^i/dq_j`.
    pub fn fq(&self) -> &Tensor2<Rf> {
        self.fq.get_or_init(|| self.jacobian(Var::Q))
    }

    pub fn fp(&self) -> &Tensor2<Rf> {
        self.fp.get_or_init(|| self.jacobian(Var::P))
    }

    pub fn fy(&self) -> &Tensor2<Rf> {
        self.fy.get_or_init(|| self.jacobian(Var::Y))
    }

    fn total(&self, t: &Tensor2<Rf>) -> Tensor2<Rf> {
        Tensor2::par_from_fn(self.m(), MIXED, |i, j| self.d(t.get(i, j)))
    }

    pub fn dfq(&self) -> &Tensor2<Rf> {
        self.dfq.get_or_init(|| self.total(self.fq()))
    }

    pub fn d2fq(&self) -> &Tensor2<Rf> {
        self.d2fq.get_or_init(|| self.total(self.dfq()))
    }

    pub fn dfp(&self) -> &Tensor2<Rf> {
        self.dfp.get_or_init(|| self.total(self.fp()))
    }

    /// `S^i_{jk} = d^2 f^i / dq_j dq_k`.
    pub fn hess_q(&self) -> &Tensor3<Rf> {
        self.hess_q.get_or_init(|| {
            let fq = self.fq();
            Tensor3::par_from_fn(self.m(), |i, j, k| fq.get(i, j).diff(Var::Q(k + 1)))
        })
    }

    /// `f_p - D f_q + 1/3 f_q f_q`, whose trace-free part is `W2` and whose
    /// trace gives `Hx`.
    pub fn linear_part(&self) -> Tensor2<Rf> {
        let fq = self.fq();
        self.fp().sub(self.dfq()).add(&fq.matmul(fq).scale(&frac(1, 3)))
    }

    /// `H^{-1}_j = 1/(6(m+1)) sum_i d^2 f^i / dq_i dq_j`.
    pub fn hm1(&self) -> &Vec<Rf> {
        self.hm1.get_or_init(|| {
            let c = frac(1, 6 * (self.m() as i64 + 1));
            self.hess_q().contraction_first().iter().map(|t| t.scale(&c)).collect()
        })
    }

    /// `H^x = -tr(f_p - D f_q + 1/3 f_q f_q) / (4m)`.
    pub fn hx(&self) -> &Rf {
        self.hx
            .get_or_init(|| self.linear_part().trace().scale(&frac(-1, 4 * self.m() as i64)))
    }
}
