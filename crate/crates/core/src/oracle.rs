//! Independent checks of the coefficient pipeline.
//!
//! [`lk_residual`] plugs a coefficient table back into the integral equation
//! and measures `|f_t(z) − z − ∫₀ᵗ z f_s′(z){dx₀(s) + dξ(x, z)_s}|`.
//! [`explicit_stepper`] integrates the coefficient system as an ODE with the
//! classical fourth-order Runge–Kutta scheme, sharing no code with the
//! quadrature routes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::drivers::{DriverFamily, TimeGrid};
use crate::solver::{CoefficientTable, Method};
use crate::{Error, Result};

/// Largest `|z|` accepted by the residual check.
pub const MAX_RESIDUAL_RADIUS: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualSample {
    pub z: [f64; 2],
    pub t: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualReport {
    pub samples: Vec<ResidualSample>,
    pub max_residual: f64,
    /// Number of quadrature intervals (table grid ∪ driver breakpoints).
    pub intervals: usize,
}

/// Residual of the integral equation for the table's truncated solution at
/// every grid time and sample point. The right side is integrated by the
/// trapezoid rule on the table grid, split at driver breakpoints, with `f′`
/// interpolated linearly in time at inserted knots.
pub fn lk_residual(
    family: &DriverFamily,
    table: &CoefficientTable,
    z_samples: &[Complex64],
) -> Result<ResidualReport> {
    if let Some(z) = z_samples.iter().find(|z| z.norm() > MAX_RESIDUAL_RADIUS) {
        return Err(Error::Domain(format!(
            "residual samples must satisfy |z| <= {MAX_RESIDUAL_RADIUS}, got {}",
            z.norm()
        )));
    }
    let grid = table.grid();
    let knots = grid.union(&family.breakpoints())?;
    let kp = knots.points();
    let gp = grid.points();

    let mut samples = Vec::with_capacity(z_samples.len() * gp.len());
    let mut max_residual: f64 = 0.0;
    for &z in z_samples {
        // f and f′ at the table nodes
        let series_at = |j: usize| {
            let coeffs = table.coeffs_at(j);
            crate::series::TruncatedSeries::new(
                table.prefactor()[j],
                coeffs,
                crate::series::TailModel::Unknown,
            )
        };
        let f: Vec<Complex64> = (0..gp.len()).map(|j| series_at(j).eval(z)).collect();
        let df: Vec<Complex64> = (0..gp.len())
            .map(|j| series_at(j).derivative_eval(z))
            .collect();
        let df_at = |t: f64| -> Complex64 {
            match grid.node_index(t) {
                Some(j) => df[j],
                None => {
                    let j = grid.interval_index(t);
                    let w = (t - gp[j]) / (gp[j + 1] - gp[j]);
                    df[j] * (1.0 - w) + df[j + 1] * w
                }
            }
        };
        let mut acc = Complex64::new(0.0, 0.0);
        let mut next_node = 0usize;
        let mut record = |t: f64, acc: Complex64, next_node: &mut usize| {
            if *next_node < gp.len() && grid.node_index(t) == Some(*next_node) {
                let left = f[*next_node] - z;
                let residual = (left - acc).norm();
                max_residual = max_residual.max(residual);
                samples.push(ResidualSample {
                    z: [z.re, z.im],
                    t,
                    residual,
                });
                *next_node += 1;
            }
        };
        record(kp[0], acc, &mut next_node);
        for i in 0..kp.len() - 1 {
            let (a, b) = (kp[i], kp[i + 1]);
            let mid = 0.5 * (a + b);
            // dx₀ + dξ density on this piece
            let mut density = family.x0().slope_at(mid);
            let mut zn = Complex64::new(1.0, 0.0);
            for path in family.xs() {
                zn *= z;
                density += path.slope_at(mid) * zn;
            }
            let ga = z * df_at(a) * density;
            let gb = z * df_at(b) * density;
            acc += (ga + gb) * (0.5 * (b - a));
            record(b, acc, &mut next_node);
        }
    }
    Ok(ResidualReport {
        samples,
        max_residual,
        intervals: kp.len() - 1,
    })
}

/// Right-hand side of `y′ = F(y)` for `y = (C, c₁, …, c_N)` with constant
/// densities `a = x₀′`, `d[m−1] = x_m′`.
fn vector_field(y: &[Complex64], a: f64, d: &[Complex64], out: &mut [Complex64]) {
    out[0] = y[0] * a;
    for n in 1..y.len() {
        let mut v = y[n] * (n as f64 * a);
        for k in 0..n {
            let ck = if k == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                y[k]
            };
            if let Some(dm) = d.get(n - k - 1) {
                v += ck * *dm * (k as f64 + 1.0);
            }
        }
        out[n] = v;
    }
}

/// Classical RK4 for the coefficient system on `grid ∪ breakpoints`, with
/// `substeps` steps per interval; results are reported on `grid`.
///
/// `log C` is carried alongside `C` and takes over if `|C|` drops below
/// `1e-12`.
pub fn explicit_stepper_on(
    family: &DriverFamily,
    order: usize,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<CoefficientTable> {
    if order > family.truncation_level() {
        return Err(Error::InvalidArgument(format!(
            "order N = {order} exceeds the truncation level M = {}",
            family.truncation_level()
        )));
    }
    if substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be at least 1".into()));
    }
    let knots = grid.union(&family.breakpoints())?;
    let kp = knots.points();
    let dim = order + 1;
    let mut y = vec![Complex64::new(0.0, 0.0); dim];
    y[0] = Complex64::new(1.0, 0.0);
    let mut log_c = 0.0;

    let mut prefactor = Vec::with_capacity(grid.len());
    let mut coeffs = vec![Vec::with_capacity(grid.len()); order];
    let mut emit = |t: f64, y: &[Complex64], log_c: f64| {
        if grid.node_index(t).is_some() {
            let c = if y[0].norm() < 1e-12 {
                Complex64::new(log_c.exp(), 0.0)
            } else {
                y[0]
            };
            prefactor.push(c);
            for n in 1..=order {
                coeffs[n - 1].push(y[n]);
            }
        }
    };
    emit(kp[0], &y, log_c);

    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
    );
    let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
    for i in 0..kp.len() - 1 {
        let mid = 0.5 * (kp[i] + kp[i + 1]);
        let a = family.x0().slope_at(mid).re;
        let d: Vec<Complex64> = family.xs()[..order.min(family.truncation_level())]
            .iter()
            .map(|p| p.slope_at(mid))
            .collect();
        let h = (kp[i + 1] - kp[i]) / substeps as f64;
        for _ in 0..substeps {
            vector_field(&y, a, &d, &mut k1);
            for m in 0..dim {
                tmp[m] = y[m] + k1[m] * (0.5 * h);
            }
            vector_field(&tmp, a, &d, &mut k2);
            for m in 0..dim {
                tmp[m] = y[m] + k2[m] * (0.5 * h);
            }
            vector_field(&tmp, a, &d, &mut k3);
            for m in 0..dim {
                tmp[m] = y[m] + k3[m] * h;
            }
            vector_field(&tmp, a, &d, &mut k4);
            for m in 0..dim {
                y[m] += (k1[m] + (k2[m] + k3[m]) * 2.0 + k4[m]) * (h / 6.0);
            }
            log_c += a * h;
        }
        emit(kp[i + 1], &y, log_c);
    }
    CoefficientTable::new(grid.clone(), prefactor, coeffs, Method::Stepper)
}

/// RK4 with `steps` uniform intervals (plus breakpoints), one step each.
pub fn explicit_stepper(
    family: &DriverFamily,
    order: usize,
    steps: usize,
) -> Result<CoefficientTable> {
    let grid = TimeGrid::uniform(family.t_final(), steps)?.union(&family.breakpoints())?;
    explicit_stepper_on(family, order, &grid, 1)
}
