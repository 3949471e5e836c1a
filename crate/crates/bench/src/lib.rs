//! Workloads shared by the benchmarks.

use thirdorder_core::corpus::{random_polynomial_system, transformed_trivial_system};
use thirdorder_core::{circles_system, JetPoint, OdeSystem};

/// Named systems of increasing symbolic weight.
pub fn systems() -> Vec<(&'static str, OdeSystem)> {
    vec![
        ("circles m=2", circles_system(2).expect("m >= 2")),
        ("circles m=3", circles_system(3).expect("m >= 2")),
        ("random m=2", random_polynomial_system(1000, 2)),
        ("transformed trivial", transformed_trivial_system()),
    ]
}

/// A fixed generic jet point of dimension `m`.
pub fn point(m: usize) -> JetPoint<f64> {
    let flat: Vec<f64> = (0..1 + 3 * m).map(|k| 0.1 + 0.07 * k as f64).collect();
    JetPoint::from_flat(m, &flat).expect("1 + 3m coordinates")
}
