#![allow(dead_code)]

use lk_core::{Complex64, DriverFamily, DriverPath};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn beta_driver(beta: f64, m: usize) -> DriverFamily {
    DriverFamily::new(
        DriverPath::zero(1.0).unwrap(),
        vec![DriverPath::linear(1.0, c(beta, 0.0)).unwrap()],
        None,
    )
    .unwrap()
    .with_truncation(m)
    .unwrap()
}

pub fn x0_only(a: f64, m: usize) -> DriverFamily {
    DriverFamily::new(
        DriverPath::real(&[0.0, 1.0], &[0.0, a]).unwrap(),
        vec![],
        None,
    )
    .unwrap()
    .with_truncation(m)
    .unwrap()
}

/// Drift with a kink, a complex first mode with its own breakpoints and a
/// linear second mode.
pub fn mixed_two_mode(m: usize) -> DriverFamily {
    let x0 = DriverPath::real(&[0.0, 0.5, 1.0], &[0.0, 0.1, -0.05]).unwrap();
    let x1 = lk_core::make_piecewise_linear(
        &[0.0, 0.3, 0.7, 1.0],
        &[c(0.0, 0.0), c(0.03, 0.02), c(0.05, -0.01), c(0.08, 0.0)],
    )
    .unwrap();
    let x2 = DriverPath::linear(1.0, c(0.004, 0.003)).unwrap();
    DriverFamily::new(x0, vec![x1, x2], None)
        .unwrap()
        .with_truncation(m)
        .unwrap()
}

pub fn suite(m: usize) -> Vec<(&'static str, DriverFamily)> {
    vec![
        ("zero", DriverFamily::zero(1.0, m).unwrap()),
        ("x0-only", x0_only(0.2, m)),
        ("beta", beta_driver(0.2, m)),
        ("mixed two-mode", mixed_two_mode(m)),
    ]
}
