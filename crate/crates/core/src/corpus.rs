//! Seeded generators for test systems.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::expr::{Expr, Func, Var};
use crate::parse::parse_system;
use crate::system::{circles_system, trivial_system, OdeSystem};

/// Monomials of total degree at most two in `p_1..p_m, q_1..q_m`.
fn pq_monomials(m: usize) -> Vec<Expr> {
    let vars: Vec<Expr> = (1..=m).map(Expr::p).chain((1..=m).map(Expr::q)).collect();
    let mut out = vec![Expr::one()];
    out.extend(vars.iter().cloned());
    for (a, u) in vars.iter().enumerate() {
        for v in &vars[a..] {
            out.push(u * v);
        }
    }
    out
}

fn small_rational(rng: &mut StdRng) -> Expr {
    let n = rng.gen_range(-4i64..=4);
    let d = rng.gen_range(1i64..=3);
    Expr::rational(n, d)
}

/// A coefficient affine in `x` and `y_1..y_m`.
fn affine_coefficient(rng: &mut StdRng, m: usize) -> Expr {
    let mut terms = vec![small_rational(rng)];
    if rng.gen_bool(0.3) {
        terms.push(small_rational(rng) * Expr::x());
    }
    if rng.gen_bool(0.3) {
        terms.push(small_rational(rng) * Expr::y(rng.gen_range(1..=m)));
    }
    Expr::sum(terms)
}

/// A polynomial of degree at most two in `p, q` whose coefficients are
/// affine in `x, y`.
pub fn random_polynomial(rng: &mut StdRng, m: usize) -> Expr {
    let mut terms = Vec::new();
    for mono in pq_monomials(m) {
        if rng.gen_bool(0.35) {
            terms.push(affine_coefficient(rng, m) * mono);
        }
    }
    Expr::sum(terms)
}

/// Random system with polynomial right-hand sides, degree at most two in
/// `p, q`. The same seed always gives the same system.
pub fn random_polynomial_system(seed: u64, m: usize) -> OdeSystem {
    let mut rng = StdRng::seed_from_u64(seed);
    let f = (0..m).map(|_| random_polynomial(&mut rng, m)).collect();
    OdeSystem::new(f).expect("generated variables are in range")
}

/// Random scalar right-hand side `g(x, y_1, p_1, q_1)`, polynomial of degree
/// at most two in `p_1, q_1` with coefficients affine in `x, y_1`.
pub fn random_scalar_polynomial(seed: u64) -> Expr {
    let mut rng = StdRng::seed_from_u64(seed);
    random_polynomial(&mut rng, 1)
}

/// Decoupled system `y_i''' = g(x, y_i, p_i, q_i)` for `i = 1..m`, where
/// `g` is written in `x, y1, p1, q1`.
pub fn decoupled_system(g: &Expr, m: usize) -> OdeSystem {
    let f = (1..=m)
        .map(|i| {
            let bind: HashMap<Var, Expr> = [
                (Var::Y(1), Expr::y(i)),
                (Var::P(1), Expr::p(i)),
                (Var::Q(1), Expr::q(i)),
            ]
            .into_iter()
            .collect();
            g.substitute(&bind)
        })
        .collect();
    OdeSystem::new(f).expect("g uses index 1 only")
}

/// Image of `y''' = 0` under `Y1 = u1 + u2^2, Y2 = u2 + x u1^2`, a coupled
/// rational system that is trivializable by construction.
pub fn transformed_trivial_system() -> OdeSystem {
    parse_system(concat!(
        "m = 2\n",
        "f1 = 6*(-2*p1^2*y2 - 2*p1*q1*x*y2 + p2*q2 - 2*q1*y1*y2)/(4*x*y1*y2 - 1)\n",
        "f2 = 6*(p1^2 + p1*q1*x - 2*p2*q2*x*y1 + q1*y1)/(4*x*y1*y2 - 1)\n",
    ))
    .expect("well-formed literal")
}

/// Random expression over jet variables of dimension `m` built from
/// rationals, `+`, `*`, integer powers and, when `transcendental` is set,
/// `sin`, `cos`, `exp` applied to polynomial arguments. Denominators are kept
/// positive-definite (`1 + u^2`) so the result is defined everywhere.
pub fn random_expr(rng: &mut StdRng, m: usize, depth: u32, transcendental: bool) -> Expr {
    let leaf = |rng: &mut StdRng| -> Expr {
        let vars = Var::all(m);
        if rng.gen_bool(0.25) {
            small_rational(rng)
        } else {
            Expr::var(vars[rng.gen_range(0..vars.len())])
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    let choices = if transcendental { 6 } else { 5 };
    match rng.gen_range(0..choices) {
        0 => leaf(rng),
        1 => random_expr(rng, m, depth - 1, transcendental) + random_expr(rng, m, depth - 1, transcendental),
        2 => random_expr(rng, m, depth - 1, transcendental) * random_expr(rng, m, depth - 1, transcendental),
        3 => random_expr(rng, m, depth - 1, transcendental).powi(rng.gen_range(2..=3)),
        4 => {
            let d = random_expr(rng, m, depth - 1, transcendental);
            random_expr(rng, m, depth - 1, transcendental) / (Expr::one() + d.powi(2))
        }
        _ => {
            let f = [Func::Sin, Func::Cos, Func::Exp][rng.gen_range(0..3)];
            Expr::apply(f, random_expr(rng, m, depth - 1, false))
        }
    }
}

/// Number of random polynomial systems in [`reference_corpus`].
pub const RANDOM_SYSTEMS: usize = 25;

/// Seeds of the random polynomial systems in the corpus.
pub fn corpus_seeds() -> impl Iterator<Item = u64> {
    (0..RANDOM_SYSTEMS as u64).map(|k| 1000 + k)
}

/// Named systems used by the self-checks: the reference systems, a few
/// trivializable families and the random polynomial systems.
pub fn reference_corpus() -> Vec<(String, OdeSystem)> {
    let mut out = vec![
        ("trivial m=2".to_string(), trivial_system(2).expect("m >= 2")),
        ("trivial m=3".to_string(), trivial_system(3).expect("m >= 2")),
        ("circles m=2".to_string(), circles_system(2).expect("m >= 2")),
        ("circles m=3".to_string(), circles_system(3).expect("m >= 2")),
        (
            "functions of x".to_string(),
            parse_system("m = 2\nf1 = x\nf2 = x").expect("well-formed literal"),
        ),
        ("transformed trivial".to_string(), transformed_trivial_system()),
    ];
    for seed in 0..3 {
        let g = random_scalar_polynomial(500 + seed);
        out.push((format!("decoupled seed={}", 500 + seed), decoupled_system(&g, 2)));
    }
    for seed in corpus_seeds() {
        out.push((format!("random seed={seed}"), random_polynomial_system(seed, 2)));
    }
    out
}
