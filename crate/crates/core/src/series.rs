//! Truncated values `f(z) = C (z + Σ_{n=1}^{N} cₙ zⁿ⁺¹)` of the solution and
//! the closed-form tails of the coefficient majorant
//! `|cₙ| ≤ n(n+1)(2ω(0,T))ⁿ / 4`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

/// What is known about the omitted coefficients `c_{N+1}, c_{N+2}, …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// The series is an exact polynomial; the tail vanishes.
    Exact,
    /// The coefficients obey the majorant with `ω(0,T) = omega0t`.
    Majorant { omega0t: f64 },
    /// Nothing is known beyond the stored coefficients.
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    pub prefactor: Complex64,
    /// `c₁, …, c_N`.
    pub coeffs: Vec<Complex64>,
    pub tail: TailModel,
}

/// Lower bound on the radius of convergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusBound {
    /// No nonzero coefficient and no growth: entire.
    Unbounded,
    /// `1/(2ω(0,T))` from the coefficient majorant.
    Majorant(f64),
    /// Root-test estimate from the stored coefficients (not a proof).
    Empirical(f64),
}

impl RadiusBound {
    pub fn value(self) -> f64 {
        match self {
            RadiusBound::Unbounded => f64::INFINITY,
            RadiusBound::Majorant(r) | RadiusBound::Empirical(r) => r,
        }
    }

    /// True when the bound is proven and exceeds one, so the map extends
    /// holomorphically across the unit circle.
    pub fn certifies_extension(self) -> bool {
        match self {
            RadiusBound::Unbounded => true,
            RadiusBound::Majorant(r) => r > 1.0,
            RadiusBound::Empirical(_) => false,
        }
    }
}

/// `Σ_{j≥1} jᵏ x^{j−1}` for `k = 0..=3`, valid for `|x| < 1`.
fn power_moments(x: f64) -> [f64; 4] {
    let q = 1.0 - x;
    [
        1.0 / q,
        1.0 / (q * q),
        (1.0 + x) / (q * q * q),
        (1.0 + 4.0 * x + x * x) / (q * q * q * q),
    ]
}

/// `Σ_{n>m} n²(n−1) x^{n−1}` in closed form, `0 ≤ x < 1`.
///
/// With `n = m + j`, `n²(n−1) = j³ + (3m−1)j² + (3m²−2m)j + m³ − m²`.
pub fn tail_n2_nm1(x: f64, m: usize) -> f64 {
    let [s0, s1, s2, s3] = power_moments(x);
    let m = m as f64;
    x.powi(m as i32)
        * (s3 + (3.0 * m - 1.0) * s2 + (3.0 * m * m - 2.0 * m) * s1 + (m * m * m - m * m) * s0)
}

/// `Σ_{n>m} n(n+1) yⁿ` in closed form, `0 ≤ y < 1`.
///
/// With `n = m + j`, `n(n+1) = j² + (2m+1)j + m(m+1)`.
pub fn tail_n_np1(y: f64, m: usize) -> f64 {
    let [s0, s1, s2, _] = power_moments(y);
    let m = m as f64;
    y.powi(m as i32 + 1) * (s2 + (2.0 * m + 1.0) * s1 + m * (m + 1.0) * s0)
}

impl TruncatedSeries {
    pub fn new(prefactor: Complex64, coeffs: Vec<Complex64>, tail: TailModel) -> Self {
        TruncatedSeries {
            prefactor,
            coeffs,
            tail,
        }
    }

    /// `f(z) = z`.
    pub fn identity() -> Self {
        TruncatedSeries::new(Complex64::new(1.0, 0.0), Vec::new(), TailModel::Exact)
    }

    /// The normalized series `z + Σ cₙ zⁿ⁺¹` (prefactor set to one).
    pub fn normalized(&self) -> Self {
        TruncatedSeries {
            prefactor: Complex64::new(1.0, 0.0),
            ..self.clone()
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `2ω(0,T)` when a usable majorant is attached (`2ω(0,T) < 1`).
    fn majorant_ratio(&self) -> Option<f64> {
        match self.tail {
            TailModel::Majorant { omega0t } if 2.0 * omega0t < 1.0 => Some(2.0 * omega0t),
            _ => None,
        }
    }

    /// Horner evaluation of `C(z + Σ cₙ zⁿ⁺¹)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let inner = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| (acc + c) * z);
        self.prefactor * z * (inner + 1.0)
    }

    /// `C(1 + Σ (n+1) cₙ zⁿ)`.
    pub fn derivative_eval(&self, z: Complex64) -> Complex64 {
        let inner = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (i, &c)| {
                (acc + c * (i as f64 + 2.0)) * z
            });
        self.prefactor * (inner + 1.0)
    }

    /// Bound on `Σ_{n>N} |cₙ| rⁿ⁺¹` from the majorant, when `2ω(0,T) r < 1`.
    pub fn tail_bound(&self, r: f64) -> Option<f64> {
        match self.tail {
            TailModel::Exact => Some(0.0),
            TailModel::Unknown => None,
            TailModel::Majorant { omega0t } => {
                let y = 2.0 * omega0t * r;
                (y < 1.0).then(|| r * tail_n_np1(y, self.order()) / 4.0)
            }
        }
    }

    /// Lower bound on the radius of convergence: `1/(2ω(0,T))` from the
    /// majorant, otherwise a root test on the upper quartile of the stored
    /// coefficients.
    pub fn radius_lower_bound(&self) -> RadiusBound {
        match self.tail {
            TailModel::Majorant { omega0t } if omega0t > 0.0 => {
                return RadiusBound::Majorant(1.0 / (2.0 * omega0t));
            }
            TailModel::Majorant { .. } => return RadiusBound::Unbounded,
            TailModel::Exact => return RadiusBound::Unbounded,
            TailModel::Unknown => {}
        }
        let n = self.coeffs.len();
        if n == 0 {
            return RadiusBound::Empirical(f64::INFINITY);
        }
        let start = n - (n / 4).max(1);
        let limsup = self.coeffs[start..]
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm().powf(1.0 / (start + k + 1) as f64))
            .fold(0.0, f64::max);
        RadiusBound::Empirical(if limsup > 0.0 {
            1.0 / limsup
        } else {
            f64::INFINITY
        })
    }

    /// `Σ_{n=2}^{N+1} n|c_{n−1}|` and the majorant bound on the rest,
    /// `Σ_{n>N+1} n²(n−1)(2ω(0,T))ⁿ⁻¹ / 4` (`None` when not available).
    pub fn alexander_sum(&self) -> (f64, Option<f64>) {
        let partial = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (i as f64 + 2.0) * c.norm())
            .sum();
        let tail = match self.tail {
            TailModel::Exact => Some(0.0),
            TailModel::Unknown => None,
            TailModel::Majorant { .. } => self
                .majorant_ratio()
                .map(|x| tail_n2_nm1(x, self.order() + 1) / 4.0),
        };
        (partial, tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        let z = Complex64::new(0.3, -0.2);
        assert_eq!(TruncatedSeries::identity().eval(z), z);
        let s = TruncatedSeries::new(c(1.0), vec![c(1.0)], TailModel::Exact);
        assert!((s.eval(c(0.5)) - c(0.75)).norm() < 1e-15);
        let s = TruncatedSeries::new(c(2.0), vec![c(0.0); 3], TailModel::Exact);
        assert!((s.eval(c(0.3)) - c(0.6)).norm() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(
            TruncatedSeries::identity().derivative_eval(Complex64::new(0.4, 0.1)),
            c(1.0)
        );
        let s = TruncatedSeries::new(c(1.0), vec![c(1.0)], TailModel::Exact);
        assert!((s.derivative_eval(c(0.5)) - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference_of_geometric_series() {
        let a = Complex64::new(0.4, 0.3);
        let coeffs: Vec<Complex64> = (1..=40).map(|n| a.powi(n)).collect();
        let s = TruncatedSeries::new(c(1.0), coeffs, TailModel::Unknown);
        let z = Complex64::new(0.2, -0.3);
        let h = 1e-6;
        let fd = (s.eval(z + h) - s.eval(z - h)) / (2.0 * h);
        assert!((fd - s.derivative_eval(z)).norm() < 1e-8);
        // truncation of z/(1 − az) is negligible at this order
        let closed = 1.0 / ((1.0 - a * z) * (1.0 - a * z));
        assert!((closed - s.derivative_eval(z)).norm() < 1e-12);
    }

    #[test]
    fn radius_bounds() {
        let s = TruncatedSeries::new(c(1.0), vec![], TailModel::Majorant { omega0t: 0.25 });
        assert_eq!(s.radius_lower_bound(), RadiusBound::Majorant(2.0));
        let s = TruncatedSeries::new(c(1.0), vec![], TailModel::Majorant { omega0t: 0.13105 });
        assert!((s.radius_lower_bound().value() - 3.815337657).abs() < 1e-6);
        let coeffs: Vec<Complex64> = (1..=24).map(|n| c(0.5f64.powi(n))).collect();
        let s = TruncatedSeries::new(c(1.0), coeffs, TailModel::Unknown);
        match s.radius_lower_bound() {
            RadiusBound::Empirical(r) => assert!((r - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn alexander_examples() {
        assert_eq!(
            TruncatedSeries::identity().alexander_sum(),
            (0.0, Some(0.0))
        );
        let coeffs: Vec<Complex64> = (1..=200).map(|n| c(0.1f64.powi(n))).collect();
        let s = TruncatedSeries::new(c(1.0), coeffs, TailModel::Unknown);
        let (partial, tail) = s.alexander_sum();
        // Σ_{n≥2} n 0.1^{n−1} = 1/0.9² − 1
        assert!((partial - (1.0 / 0.81 - 1.0)).abs() < 1e-14);
        assert!(tail.is_none());
    }

    #[test]
    fn tail_closed_forms_match_brute_force() {
        for &x in &[0.0, 0.1, 0.26, 0.5, 0.9] {
            for m in [0usize, 1, 2, 5, 13] {
                let brute: f64 = (m + 1..20_000)
                    .map(|n| {
                        let n = n as f64;
                        n * n * (n - 1.0) * x.powi(n as i32 - 1)
                    })
                    .sum();
                let closed = tail_n2_nm1(x, m);
                assert!(
                    (closed - brute).abs() <= 1e-10 * brute.max(1.0),
                    "x = {x}, m = {m}: {closed} vs {brute}"
                );
                let brute: f64 = (m + 1..20_000)
                    .map(|n| {
                        let n = n as f64;
                        n * (n + 1.0) * x.powi(n as i32)
                    })
                    .sum();
                let closed = tail_n_np1(x, m);
                assert!((closed - brute).abs() <= 1e-10 * brute.max(1.0));
            }
        }
    }

    #[test]
    fn majorant_tail_degenerates_at_half() {
        let s = TruncatedSeries::new(
            c(1.0),
            vec![c(0.0); 4],
            TailModel::Majorant { omega0t: 0.5 },
        );
        assert_eq!(s.alexander_sum().1, None);
        assert_eq!(s.tail_bound(1.0), None);
        assert_eq!(s.radius_lower_bound(), RadiusBound::Majorant(1.0));
    }
}
