//! Quantitative consequences of ω-control: the coefficient bound
//! `|cₙ| ≤ n(n+1)(2ω(0,T))ⁿ / 4`, the closed-form majorant of the Alexander
//! sum, the threshold `α` and sampled checks of univalence and starlikeness.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::Verdict;
use crate::series::{TailModel, TruncatedSeries};
use crate::{Error, Result};

/// `2x⁴ − 8x³ + 11x² − 10x + 2`.
pub fn quartic(x: f64) -> f64 {
    (((2.0 * x - 8.0) * x + 11.0) * x - 10.0) * x + 2.0
}

fn quartic_derivative(x: f64) -> f64 {
    ((8.0 * x - 24.0) * x + 22.0) * x - 10.0
}

/// Smallest real root `α` of the quartic.
///
/// The quartic is positive for `x ≤ 0` and strictly decreasing on
/// `[0, 1/2]` with `q(0) = 2 > 0 > q(1/2) = −9/8`, so the bracket holds the
/// smallest root. Bisection narrows it, Newton polishes to `|q| ≤ 1e-14`.
pub fn compute_alpha() -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    debug_assert!(quartic(lo) > 0.0 && quartic(hi) < 0.0);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if quartic(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let q = quartic(x);
        if q.abs() <= 1e-14 {
            break;
        }
        let next = x - q / quartic_derivative(x);
        if !(lo..=hi).contains(&next) {
            break;
        }
        x = next;
    }
    x
}

/// `n(n+1)(2ω(0,T))ⁿ / 4`.
pub fn coefficient_bound(n: usize, omega0t: f64) -> f64 {
    let n_f = n as f64;
    n_f * (n_f + 1.0) * (2.0 * omega0t).powi(n as i32) / 4.0
}

/// `Σ_{n≥2} n²(n−1)(2ω)ⁿ⁻¹ / 4 = x(x+2) / (2(1−x)⁴)` with `x = 2ω`.
pub fn alexander_bound_closed_form(omega0t: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&omega0t) {
        return Err(Error::Domain(alloc::format!(
            "the majorant diverges unless 0 <= w(0,T) < 1/2, got {omega0t}"
        )));
    }
    let x = 2.0 * omega0t;
    let q = 1.0 - x;
    Ok(x * (x + 2.0) / (2.0 * q * q * q * q))
}

/// Rounding allowance on `partial + tail ≤ 1`; the criterion is tight at
/// `ω(0,T) = α/2`.
pub const ALEXANDER_ROUNDING: f64 = 1e-12;

/// Circles on which `Re(z f′/f)` is sampled.
pub const STARLIKE_RADII: [f64; 3] = [0.3, 0.6, 0.9];
pub const STARLIKE_ANGLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnivalenceVerdict {
    pub alexander_partial: f64,
    pub alexander_tail: Option<f64>,
    /// Certified when `partial + tail ≤ 1`; otherwise inconclusive, never a
    /// proof of non-univalence.
    pub verdict: Verdict,
    /// `α/2`, the control threshold under which the majorant alone certifies.
    pub threshold_used: f64,
    /// `min Re(z f′(z)/f(z))` over the sampled circles.
    pub sampled_starlikeness_min: f64,
    pub starlikeness_witness: [f64; 2],
    /// Certificate from the control bound alone (`ω(0,T) ≤ α/2`), present
    /// when the series carries the coefficient majorant.
    pub control_certificate: Option<Verdict>,
}

impl UnivalenceVerdict {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn alexander_total(&self) -> Option<f64> {
        self.alexander_tail.map(|t| t + self.alexander_partial)
    }
}

/// Minimum of `Re(z f′/f)` on the fixed sample circles, with its location.
pub fn starlikeness_min(series: &TruncatedSeries) -> (f64, Complex64) {
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for &r in STARLIKE_RADII.iter() {
        for k in 0..STARLIKE_ANGLES {
            let theta = 2.0 * PI * k as f64 / STARLIKE_ANGLES as f64;
            let z = Complex64::from_polar(r, theta);
            let f = series.eval(z);
            let value = if f.norm() == 0.0 {
                f64::NEG_INFINITY
            } else {
                (z * series.derivative_eval(z) / f).re
            };
            if value < best.0 {
                best = (value, z);
            }
        }
    }
    best
}

/// Univalence certificate implied by the control bound alone: certified
/// when the majorant of the Alexander sum is at most one, i.e.
/// `ω(0,T) ≤ α/2`; inconclusive otherwise.
pub fn control_certificate(omega0t: f64) -> Verdict {
    match alexander_bound_closed_form(omega0t) {
        Ok(bound) if bound <= 1.0 + ALEXANDER_ROUNDING => Verdict::Certified,
        _ => Verdict::Inconclusive,
    }
}

/// Alexander's criterion `Σ_{n≥2} n|aₙ| ≤ 1` on the normalized series, plus
/// sampled starlikeness as a necessary-condition check.
pub fn check_univalence(series: &TruncatedSeries) -> UnivalenceVerdict {
    let normalized = series.normalized();
    let (partial, tail) = normalized.alexander_sum();
    let verdict = match tail {
        Some(tail) if partial + tail <= 1.0 + ALEXANDER_ROUNDING => Verdict::Certified,
        _ => Verdict::Inconclusive,
    };
    let (min, at) = starlikeness_min(&normalized);
    UnivalenceVerdict {
        alexander_partial: partial,
        alexander_tail: tail,
        verdict,
        threshold_used: compute_alpha() / 2.0,
        sampled_starlikeness_min: min,
        starlikeness_witness: [at.re, at.im],
        control_certificate: match series.tail {
            TailModel::Majorant { omega0t } => Some(control_certificate(omega0t)),
            _ => None,
        },
    }
}

/// Radius of the disk sampled by [`injectivity_spot_check`].
pub const SPOT_CHECK_RADIUS: f64 = 0.95;

/// Relative floor under which two images count as a collision.
pub const COLLISION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InjectivityReport {
    pub pairs: usize,
    pub seed: u64,
    pub collisions: usize,
    /// `min |f(z₁) − f(z₂)| / |z₁ − z₂|` over the sampled pairs.
    pub min_ratio: f64,
    pub witness: [[f64; 2]; 2],
}

fn sample_disk(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = SPOT_CHECK_RADIUS * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
}

/// Samples seeded pairs `z₁ ≠ z₂` in `|z| ≤ 0.95` and records the smallest
/// separation ratio. A necessary-condition test only.
pub fn injectivity_spot_check(
    series: &TruncatedSeries,
    pairs: usize,
    seed: u64,
) -> InjectivityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = InjectivityReport {
        pairs: 0,
        seed,
        collisions: 0,
        min_ratio: f64::INFINITY,
        witness: [[0.0; 2]; 2],
    };
    while report.pairs < pairs {
        let z1 = sample_disk(&mut rng);
        let z2 = sample_disk(&mut rng);
        let dz = (z1 - z2).norm();
        if dz == 0.0 {
            continue;
        }
        report.pairs += 1;
        let (f1, f2) = (series.eval(z1), series.eval(z2));
        let df = (f1 - f2).norm();
        if df <= COLLISION_FLOOR * f1.norm().max(f2.norm()).max(f64::MIN_POSITIVE) {
            report.collisions += 1;
        }
        let ratio = df / dz;
        if ratio < report.min_ratio {
            report.min_ratio = ratio;
            report.witness = [[z1.re, z1.im], [z2.re, z2.im]];
        }
    }
    report
}
