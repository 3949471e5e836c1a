//! Serializable views of the results, with expressions rendered as
//! canonical strings.

use serde::{Deserialize, Serialize};

use crate::connection::ConnectionCoefficients;
use crate::expr::Expr;
use crate::invariants::{InvariantSet, NumericInvariants};
use crate::tensor::{Tensor2, Tensor3};

fn strings2(t: &Tensor2<Expr>) -> Vec<Vec<String>> {
    t.rows().map(|r| r.iter().map(Expr::to_string).collect()).collect()
}

fn strings3(t: &Tensor3<Expr>) -> Vec<Vec<Vec<String>>> {
    t.map(Expr::to_string).to_nested()
}

fn strings1(v: &[Expr]) -> Vec<String> {
    v.iter().map(Expr::to_string).collect()
}

fn floats2(t: &Tensor2<f64>) -> Vec<Vec<f64>> {
    t.rows().map(<[f64]>::to_vec).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub m: usize,
    #[serde(rename = "W2")]
    pub w2: Vec<Vec<String>>,
    #[serde(rename = "I2")]
    pub i2: Vec<Vec<Vec<String>>>,
    #[serde(rename = "W3")]
    pub w3: Vec<Vec<String>>,
    #[serde(rename = "I4")]
    pub i4: Vec<Vec<String>>,
    #[serde(rename = "Hx")]
    pub hx: String,
    #[serde(rename = "Hm1")]
    pub hm1: Vec<String>,
    pub trivializable: bool,
    #[serde(rename = "I4_symmetric")]
    pub i4_symmetric: bool,
}

impl InvariantReport {
    pub fn new(inv: &InvariantSet, trivializable: bool) -> Self {
        InvariantReport {
            m: inv.m,
            w2: strings2(&inv.w2),
            i2: strings3(&inv.i2),
            w3: strings2(&inv.w3),
            i4: strings2(&inv.i4),
            hx: inv.hx.to_string(),
            hm1: strings1(&inv.hm1),
            trivializable,
            i4_symmetric: inv.i4_symmetric,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionReport {
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<String>>,
    #[serde(rename = "Gx")]
    pub gx: Vec<Vec<String>>,
    #[serde(rename = "Gm2")]
    pub gm2: Vec<Vec<Vec<String>>>,
    #[serde(rename = "Gm3")]
    pub gm3: Vec<Vec<Vec<String>>>,
    #[serde(rename = "E")]
    pub e: Vec<String>,
    #[serde(rename = "Fm2")]
    pub fm2: Vec<String>,
    #[serde(rename = "Fm3")]
    pub fm3: Vec<String>,
    #[serde(rename = "Hx")]
    pub hx: String,
    #[serde(rename = "Hm1")]
    pub hm1: Vec<String>,
    #[serde(rename = "Hm2")]
    pub hm2: Vec<String>,
    #[serde(rename = "Hm3")]
    pub hm3: Vec<String>,
}

impl From<&ConnectionCoefficients> for ConnectionReport {
    fn from(c: &ConnectionCoefficients) -> Self {
        ConnectionReport {
            a: strings2(&c.a),
            b: strings2(&c.b),
            c: strings2(&c.c),
            gx: strings2(&c.gx),
            gm2: strings3(&c.gm2),
            gm3: strings3(&c.gm3),
            e: strings1(&c.e),
            fm2: strings1(&c.fm2),
            fm3: strings1(&c.fm3),
            hx: c.hx.to_string(),
            hm1: strings1(&c.hm1),
            hm2: strings1(&c.hm2),
            hm3: strings1(&c.hm3),
        }
    }
}

/// Numeric invariants at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericReport {
    pub m: usize,
    pub at: Vec<f64>,
    #[serde(rename = "W2")]
    pub w2: Vec<Vec<f64>>,
    #[serde(rename = "I2")]
    pub i2: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "W3")]
    pub w3: Vec<Vec<f64>>,
    #[serde(rename = "I4")]
    pub i4: Vec<Vec<f64>>,
    #[serde(rename = "Hx")]
    pub hx: f64,
    #[serde(rename = "Hm1")]
    pub hm1: Vec<f64>,
}

impl NumericReport {
    pub fn new(at: Vec<f64>, v: &NumericInvariants<f64>) -> Self {
        NumericReport {
            m: v.w2.dim(),
            at,
            w2: floats2(&v.w2),
            i2: v.i2.to_nested(),
            w3: floats2(&v.w3),
            i4: floats2(&v.i4),
            hx: v.hx,
            hm1: v.hm1.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::compute_connection;
    use crate::invariants::compute_all;
    use crate::system::{circles_system, trivial_system};

    #[test]
    fn invariant_keys() {
        let inv = compute_all(&trivial_system(2).unwrap());
        let v = serde_json::to_value(InvariantReport::new(&inv, true)).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "Hm1",
                "Hx",
                "I2",
                "I4",
                "I4_symmetric",
                "W2",
                "W3",
                "m",
                "trivializable"
            ]
        );
        assert_eq!(v["W2"][0][1], "0");
        assert_eq!(v["I2"][1][1][1], "0");
    }

    #[test]
    fn connection_keys_and_stability() {
        let sys = circles_system(2).unwrap();
        let a = serde_json::to_string(&ConnectionReport::from(&compute_connection(&sys))).unwrap();
        let b = serde_json::to_string(&ConnectionReport::from(&compute_connection(&sys))).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 13);
        assert_eq!(v["Gm3"].as_array().unwrap().len(), 2);
    }
}
