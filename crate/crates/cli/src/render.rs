//! Text output and the JSON shapes that only the command line needs.

use std::fmt::Write;

use serde::Serialize;
use thirdorder_core::{
    Comparison, ConnectionCoefficients, InvariantSet, NumericInvariants, ResidualCheck, Richardson, Tensor2, Tensor3,
    Verdict,
};

fn tensor2<T: std::fmt::Display>(out: &mut String, name: &str, t: &Tensor2<T>) {
    for i in 0..t.dim() {
        for j in 0..t.dim() {
            let _ = writeln!(out, "{name}[{}][{}] = {}", i + 1, j + 1, t.get(i, j));
        }
    }
}

fn tensor3<T: std::fmt::Display>(out: &mut String, name: &str, t: &Tensor3<T>) {
    let m = t.dim();
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let _ = writeln!(out, "{name}[{}][{}][{}] = {}", i + 1, j + 1, k + 1, t.get(i, j, k));
            }
        }
    }
}

fn vector<T: std::fmt::Display>(out: &mut String, name: &str, v: &[T]) {
    for (j, e) in v.iter().enumerate() {
        let _ = writeln!(out, "{name}[{}] = {e}", j + 1);
    }
}

pub fn invariants(inv: &InvariantSet, trivializable: bool) -> String {
    let mut out = format!("m = {}\n", inv.m);
    tensor2(&mut out, "W2", &inv.w2);
    tensor3(&mut out, "I2", &inv.i2);
    tensor2(&mut out, "W3", &inv.w3);
    tensor2(&mut out, "I4", &inv.i4);
    let _ = writeln!(out, "Hx = {}", inv.hx);
    vector(&mut out, "Hm1", &inv.hm1);
    let _ = writeln!(out, "I4 symmetric: {}", inv.i4_symmetric);
    let _ = writeln!(out, "trivializable: {trivializable}");
    out
}

pub fn connection(c: &ConnectionCoefficients) -> String {
    let mut out = format!("m = {}\n", c.m);
    tensor2(&mut out, "A", &c.a);
    tensor2(&mut out, "B", &c.b);
    tensor2(&mut out, "C", &c.c);
    tensor2(&mut out, "Gx", &c.gx);
    tensor3(&mut out, "Gm2", &c.gm2);
    tensor3(&mut out, "Gm3", &c.gm3);
    vector(&mut out, "E", &c.e);
    vector(&mut out, "Fm2", &c.fm2);
    vector(&mut out, "Fm3", &c.fm3);
    let _ = writeln!(out, "Hx = {}", c.hx);
    vector(&mut out, "Hm1", &c.hm1);
    vector(&mut out, "Hm2", &c.hm2);
    vector(&mut out, "Hm3", &c.hm3);
    out.push_str("alpha = beta = identity; D = Fm1 = Gm1 = 0\n");
    out
}

/// Drops the sign of negative zero, which round-off produces routinely.
pub fn unsigned_zero(v: &NumericInvariants<f64>) -> NumericInvariants<f64> {
    let z = |x: &f64| if *x == 0.0 { 0.0 } else { *x };
    NumericInvariants {
        w2: v.w2.map(z),
        i2: v.i2.map(z),
        w3: v.w3.map(z),
        i4: v.i4.map(z),
        hx: z(&v.hx),
        hm1: v.hm1.iter().map(z).collect(),
    }
}

pub fn numeric(v: &NumericInvariants<f64>) -> String {
    let mut out = String::new();
    tensor2(&mut out, "W2", &v.w2);
    tensor3(&mut out, "I2", &v.i2);
    tensor2(&mut out, "W3", &v.w3);
    tensor2(&mut out, "I4", &v.i4);
    let _ = writeln!(out, "Hx = {}", v.hx);
    vector(&mut out, "Hm1", &v.hm1);
    out
}

#[derive(Serialize)]
pub struct VerdictReport {
    pub trivializable: bool,
    pub nonvanishing: Vec<String>,
    pub numerically_vanishing: Option<bool>,
}

impl From<&Verdict> for VerdictReport {
    fn from(v: &Verdict) -> Self {
        VerdictReport {
            trivializable: v.trivializable,
            nonvanishing: v.nonvanishing.clone(),
            numerically_vanishing: v.numerically_vanishing,
        }
    }
}

pub fn verdict(v: &Verdict) -> String {
    if v.trivializable {
        return "trivializable\n".to_string();
    }
    let mut out = String::from("not trivializable\n");
    let _ = writeln!(out, "nonvanishing: {}", v.nonvanishing.join(", "));
    if v.numerically_vanishing == Some(true) {
        out.push_str(
            "warning: every nonvanishing entry involves sin/cos/exp/ln and is numerically zero at all sample \
             points; a transcendental identity may make the system trivializable\n",
        );
    }
    out
}

#[derive(Serialize)]
pub struct ResidualLine {
    pub name: String,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl From<ResidualCheck> for ResidualLine {
    fn from(c: ResidualCheck) -> Self {
        ResidualLine {
            name: c.name.to_string(),
            passed: c.passed,
            failures: c.failures,
        }
    }
}

#[derive(Serialize)]
pub struct OracleLine {
    pub at: Vec<f64>,
    pub strict_deviation: f64,
    pub relaxed_deviation: f64,
    pub worst: String,
    pub richardson_ratio: Option<f64>,
    pub passed: bool,
}

impl OracleLine {
    pub fn new(at: Vec<f64>, cmp: Comparison, r: Richardson) -> Self {
        OracleLine {
            at,
            strict_deviation: cmp.strict_deviation,
            relaxed_deviation: cmp.relaxed_deviation,
            worst: cmp.worst,
            richardson_ratio: r.ratio,
            passed: cmp.passed && r.passed,
        }
    }
}

#[derive(Serialize)]
pub struct CheckReport {
    pub residuals: Vec<ResidualLine>,
    pub oracle: Vec<OracleLine>,
}

fn mark(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.passed) && self.oracle.iter().all(|o| o.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.residuals {
            let _ = write!(out, "{} residual {}", mark(r.passed), r.name);
            if !r.failures.is_empty() {
                let _ = write!(out, " (entries {})", r.failures.join(", "));
            }
            out.push('\n');
        }
        for o in &self.oracle {
            let ratio = o.richardson_ratio.map_or("exact".to_string(), |r| format!("{r:.2}"));
            let at: Vec<String> = o.at.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(
                out,
                "{} oracle at ({}): deviation {:.2e} (W2, I2, Hx, Hm1), {:.2e} (W3, I4), Richardson {ratio}",
                mark(o.passed),
                at.join(", "),
                o.strict_deviation,
                o.relaxed_deviation,
            );
        }
        let _ = writeln!(
            out,
            "{}",
            if self.passed() {
                "all checks passed"
            } else {
                "some checks failed"
            }
        );
        out
    }
}
