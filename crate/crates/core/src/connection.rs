//! Coefficients of the characteristic Cartan connection in the standard
//! section, and the identities that the normalization guarantees.
//!
//! Coefficients are produced degree by degree. `A` comes first, then `Hx`
//! and `C`, then `H^{-1} = F^{-2}` and `G^{-2}`, then `H^{-2}`, `F^{-3}`,
//! `G^{-3}` and `H^{-3}`. The structural entries `alpha = beta = identity`
//! and `D = F^{-1} = G^{-1} = 0` are recorded as flags, not computed.

use crate::expr::{Expr, Var};
use crate::invariants::compute_forms;
use crate::jets::{frac, Jets, Rf};
use crate::system::OdeSystem;
use crate::tensor::{Tensor2, Tensor3};

/// Constant parts of the connection that carry no information about `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructuralFlags {
    pub alpha_is_identity: bool,
    pub beta_is_identity: bool,
    pub d_vanishes: bool,
    pub fm1_vanishes: bool,
    pub gm1_vanishes: bool,
}

impl Default for StructuralFlags {
    fn default() -> Self {
        StructuralFlags {
            alpha_is_identity: true,
            beta_is_identity: true,
            d_vanishes: true,
            fm1_vanishes: true,
            gm1_vanishes: true,
        }
    }
}

/// Every nonconstant coefficient of the characteristic connection.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionCoefficients {
    pub m: usize,
    pub a: Tensor2<Expr>,
    pub b: Tensor2<Expr>,
    pub c: Tensor2<Expr>,
    pub gx: Tensor2<Expr>,
    pub gm2: Tensor3<Expr>,
    pub gm3: Tensor3<Expr>,
    pub e: Vec<Expr>,
    pub fm2: Vec<Expr>,
    pub fm3: Vec<Expr>,
    pub hx: Expr,
    pub hm1: Vec<Expr>,
    pub hm2: Vec<Expr>,
    pub hm3: Vec<Expr>,
    pub structural: StructuralFlags,
}

pub(crate) struct ConnectionForms {
    pub a: Tensor2<Rf>,
    pub b: Tensor2<Rf>,
    pub c: Tensor2<Rf>,
    pub gx: Tensor2<Rf>,
    pub gm2: Tensor3<Rf>,
    pub gm3: Tensor3<Rf>,
    pub e: Vec<Rf>,
    pub fm2: Vec<Rf>,
    pub fm3: Vec<Rf>,
    pub hx: Rf,
    pub hm1: Vec<Rf>,
    pub hm2: Vec<Rf>,
    pub hm3: Vec<Rf>,
}

fn delta_scaled(m: usize, s: &Rf) -> Tensor2<Rf> {
    Tensor2::mixed(m, |i, j| if i == j { s.clone() } else { Rf::zero() })
}

/// `sum_l h_l (f_q)^l_j`.
fn contract_with_fq(h: &[Rf], fq: &Tensor2<Rf>) -> Vec<Rf> {
    let m = h.len();
    (0..m)
        .map(|j| (0..m).fold(Rf::zero(), |acc, l| acc.add(&h[l].mul(fq.get(l, j)))))
        .collect()
}

fn connection_forms(jets: &Jets) -> ConnectionForms {
    let m = jets.m();
    let mi = m as i64;
    let fq = jets.fq();
    let fp = jets.fp();

    // A = G^x = B/2 = -1/3 df/dq.
    let a = fq.scale(&frac(-1, 3));
    let b = fq.scale(&frac(-2, 3));
    let gx = fq.scale(&frac(-1, 3));
    let da = a.map(|e| jets.d(e));
    let aa = a.matmul(&a);

    // Hx = -(1/4m)(tr f_p + 3 D tr A + 3 tr(A A)).
    let hx = fp
        .trace()
        .add(&jets.d(&a.trace()).scale(&frac(3, 1)))
        .add(&aa.trace().scale(&frac(3, 1)))
        .scale(&frac(-1, 4 * mi));

    // C = -(f_p + 2 D A + 2 Hx delta + 2 A A).
    let c = fp
        .add(&da.scale(&frac(2, 1)))
        .add(&delta_scaled(m, &hx.scale(&frac(2, 1))))
        .add(&aa.scale(&frac(2, 1)))
        .scale(&frac(-1, 1));

    // F^{-2}_k = H^{-1}_k = -1/(2(m+1)) d(tr A)/dq_k, E_k = 1/(m+1) d(tr A)/dq_k.
    let tr_a = a.trace();
    let tr_a_q: Vec<Rf> = (1..=m).map(|k| tr_a.diff(Var::Q(k))).collect();
    let fm2: Vec<Rf> = tr_a_q.iter().map(|t| t.scale(&frac(-1, 2 * (mi + 1)))).collect();
    let hm1 = fm2.clone();
    let e: Vec<Rf> = tr_a_q.iter().map(|t| t.scale(&frac(1, mi + 1))).collect();

    let gm2 = Tensor3::par_from_fn(m, |i, j, k| a.get(i, j).diff(Var::Q(k + 1)));

    // H^{-2}_j = dHx/dq_j - D H^{-1}_j - H^{-1}_k df^k/dq_j.
    let hm1_fq = contract_with_fq(&hm1, fq);
    let hm2: Vec<Rf> = (0..m)
        .map(|j| hx.diff(Var::Q(j + 1)).sub(&jets.d(&hm1[j])).sub(&hm1_fq[j]))
        .collect();

    // F^{-3} = H^{-2} - D F^{-2}.
    let fm3: Vec<Rf> = (0..m).map(|j| hm2[j].sub(&jets.d(&fm2[j]))).collect();

    // G^{-3}_{ijk} = dA_ij/dp_k - D G^{-2}_{ijk} - G^x_il G^{-2}_{ljk} + G^{-2}_{ilk} G^x_lj.
    let gm3 = Tensor3::par_from_fn(m, |i, j, k| {
        let mut acc = a.get(i, j).diff(Var::P(k + 1)).sub(&jets.d(gm2.get(i, j, k)));
        for l in 0..m {
            acc = acc
                .sub(&gx.get(i, l).mul(gm2.get(l, j, k)))
                .add(&gm2.get(i, l, k).mul(gx.get(l, j)));
        }
        acc
    });

    // H^{-3}_j = -dHx/dp_j + D H^{-2}_j + H^{-1}_k df^k/dq_j.
    let hm3: Vec<Rf> = (0..m)
        .map(|j| hx.diff(Var::P(j + 1)).neg().add(&jets.d(&hm2[j])).add(&hm1_fq[j]))
        .collect();

    ConnectionForms {
        a,
        b,
        c,
        gx,
        gm2,
        gm3,
        e,
        fm2,
        fm3,
        hx,
        hm1,
        hm2,
        hm3,
    }
}

fn exprs(v: &[Rf]) -> Vec<Expr> {
    v.iter().map(Rf::to_expr).collect()
}

/// All connection coefficients of `sys`.
pub fn compute_connection(sys: &OdeSystem) -> ConnectionCoefficients {
    let f = connection_forms(&Jets::new(sys));
    ConnectionCoefficients {
        m: sys.dim(),
        a: f.a.map(Rf::to_expr),
        b: f.b.map(Rf::to_expr),
        c: f.c.map(Rf::to_expr),
        gx: f.gx.map(Rf::to_expr),
        gm2: f.gm2.map(Rf::to_expr),
        gm3: f.gm3.map(Rf::to_expr),
        e: exprs(&f.e),
        fm2: exprs(&f.fm2),
        fm3: exprs(&f.fm3),
        hx: f.hx.to_expr(),
        hm1: exprs(&f.hm1),
        hm2: exprs(&f.hm2),
        hm3: exprs(&f.hm3),
        structural: StructuralFlags::default(),
    }
}

/// One identity checked by [`verify_residuals`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Entries (1-based indices) whose residual is not identically zero.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualReport {
    pub checks: Vec<ResidualCheck>,
}

impl ResidualReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, residuals: Vec<(String, Rf)>) -> ResidualCheck {
    let failures: Vec<String> = residuals
        .into_iter()
        .filter(|(_, r)| !r.is_zero())
        .map(|(label, _)| label)
        .collect();
    ResidualCheck {
        name,
        passed: failures.is_empty(),
        failures,
    }
}

fn pairwise2(a: &Tensor2<Rf>, b: &Tensor2<Rf>, coeff: i64) -> Vec<(String, Rf)> {
    let m = a.dim();
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            out.push((
                format!("[{}][{}]", i + 1, j + 1),
                a.get(i, j).sub(&b.get(i, j).scale(&frac(coeff, 1))),
            ));
        }
    }
    out
}

fn pairwise1(a: &[Rf], b: &[Rf], coeff: i64) -> Vec<(String, Rf)> {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(j, (x, y))| (format!("[{}]", j + 1), x.sub(&y.scale(&frac(coeff, 1)))))
        .collect()
}

/// Checks the identities the normalization implies. Each holds identically, so
/// a failing entry points at an implementation error.
pub fn verify_residuals(sys: &OdeSystem) -> ResidualReport {
    let jets = Jets::new(sys);
    let m = jets.m();
    let conn = connection_forms(&jets);
    let inv = compute_forms(sys);

    let mut antisym = Vec::new();
    for j in 0..m {
        for k in j + 1..m {
            let r = conn.hm1[j].diff(Var::Q(k + 1)).sub(&conn.hm1[k].diff(Var::Q(j + 1)));
            antisym.push((format!("[{}][{}]", j + 1, k + 1), r));
        }
    }

    // I4_{jk} = -dH^{-1}_k/dp_j + dH^{-2}_j/dq_k + 2 H^{-1}_j H^{-1}_k.
    let i4_alt = Tensor2::from_fn(m, inv.i4.slots(), |j, k| {
        conn.hm1[k]
            .diff(Var::P(j + 1))
            .neg()
            .add(&conn.hm2[j].diff(Var::Q(k + 1)))
            .add(&conn.hm1[j].mul(&conn.hm1[k]).scale(&frac(2, 1)))
    });

    ResidualReport {
        checks: vec![
            check("antisymmetry of dH^{-1}/dq", antisym),
            check("Hx forms agree", vec![("".into(), conn.hx.sub(&inv.hx))]),
            check("H^{-1} forms agree", pairwise1(&conn.hm1, &inv.hm1, 1)),
            check("I4 forms agree", pairwise2(&i4_alt, &inv.i4, 1)),
            check("B = 2A", pairwise2(&conn.b, &conn.a, 2)),
            check("G^x = A", pairwise2(&conn.gx, &conn.a, 1)),
            check("E = -2F^{-2}", pairwise1(&conn.e, &conn.fm2, -2)),
            check("F^{-2} = H^{-1}", pairwise1(&conn.fm2, &inv.hm1, 1)),
        ],
    }
}
