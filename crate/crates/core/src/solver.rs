//! Coefficients `C(t)` and `cₙ(t)` of `f_t(z) = C(t)(z + c₁(t)z² + …)`.
//!
//! Substituting the expansion into the equation gives
//! `C(t) − 1 = ∫₀ᵗ C dx₀`, so `C(t) = e^{x₀(t) − x₀(0)}`, and, with `c₀ ≡ 1`,
//!
//! ```text
//! cₙ(t) = ∫₀ᵗ { Σ_{k=0}^{n−1} (k+1) c_k(s) dx_{n−k}(s) + n cₙ(s) dx₀(s) }.
//! ```
//!
//! Three routes compute the `cₙ`:
//!
//! * [`solve_coefficients_recurrence`]: the integrating factor `e^{−n x₀}`
//!   removes the self-coupling, leaving one trapezoid sweep per `n`.
//! * [`solve_coefficients_compositions`]: a weighted sum of iterated
//!   integrals over all compositions of `n`.
//! * [`solve_coefficients_picard`]: fixed-point iteration on the
//!   self-coupled equation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::control::{IteratedEngine, Level, COMPOSITION_CAP};
use crate::drivers::{DriverFamily, DriverPath, TimeGrid, DEFAULT_REFINEMENT};
use crate::mesh::Mesh;
use crate::series::{TailModel, TruncatedSeries};
use crate::{Error, Result};

/// Default truncation `N` of the solution.
pub const DEFAULT_ORDER: usize = 12;

/// Default number of uniform intervals of the coefficient grid.
pub const DEFAULT_GRID_INTERVALS: usize = 512;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Recurrence,
    Compositions,
    Picard,
    Stepper,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Recurrence => "recurrence",
            Method::Compositions => "compositions",
            Method::Picard => "picard",
            Method::Stepper => "stepper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Sub-steps per interval of the knot grid (output nodes ∪ breakpoints).
    pub refinement: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            refinement: DEFAULT_REFINEMENT,
        }
    }
}

/// `C` and `c₁..c_N` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    grid: TimeGrid,
    prefactor: Vec<Complex64>,
    /// `coeffs[n − 1][j] = cₙ(t_j)`.
    coeffs: Vec<Vec<Complex64>>,
    method: Method,
}

impl CoefficientTable {
    pub fn new(
        grid: TimeGrid,
        prefactor: Vec<Complex64>,
        coeffs: Vec<Vec<Complex64>>,
        method: Method,
    ) -> Result<Self> {
        let len = grid.len();
        if prefactor.len() != len || coeffs.iter().any(|row| row.len() != len) {
            return Err(Error::InvalidArgument(
                "coefficient rows must match the grid length".into(),
            ));
        }
        if prefactor.iter().any(|c| c.norm() == 0.0) {
            return Err(Error::InvalidArgument("C(t) must not vanish".into()));
        }
        Ok(CoefficientTable {
            grid,
            prefactor,
            coeffs,
            method,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Number of coefficients `N`.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn prefactor(&self) -> &[Complex64] {
        &self.prefactor
    }

    /// Row of `cₙ` over the grid, `1 ≤ n ≤ N`.
    pub fn coeff_row(&self, n: usize) -> &[Complex64] {
        &self.coeffs[n - 1]
    }

    pub fn coeff(&self, n: usize, j: usize) -> Complex64 {
        self.coeffs[n - 1][j]
    }

    /// `c₁..c_N` at grid node `j`.
    pub fn coeffs_at(&self, j: usize) -> Vec<Complex64> {
        self.coeffs.iter().map(|row| row[j]).collect()
    }

    /// Largest relative gap `|a − b| / max(|a|, |b|, floor)` over `n ≤ n_max`
    /// and all grid nodes; the grids must coincide.
    pub fn relative_gap(&self, other: &CoefficientTable, n_max: usize, floor: f64) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument(
                "tables live on different grids".into(),
            ));
        }
        let n_max = n_max.min(self.order()).min(other.order());
        let mut gap: f64 = 0.0;
        for n in 1..=n_max {
            for (a, b) in self.coeff_row(n).iter().zip(other.coeff_row(n)) {
                gap = gap.max((a - b).norm() / a.norm().max(b.norm()).max(floor));
            }
        }
        Ok(gap)
    }

    /// Largest absolute gap over `n ≤ n_max` and all grid nodes.
    pub fn sup_gap(&self, other: &CoefficientTable, n_max: usize) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument(
                "tables live on different grids".into(),
            ));
        }
        let n_max = n_max.min(self.order()).min(other.order());
        let mut gap: f64 = 0.0;
        for n in 1..=n_max {
            for (a, b) in self.coeff_row(n).iter().zip(other.coeff_row(n)) {
                gap = gap.max((a - b).norm());
            }
        }
        Ok(gap)
    }
}

/// `C(t_j) = e^{x₀(t_j) − x₀(0)}` on the grid nodes.
pub fn solve_c(x0: &DriverPath, grid: &TimeGrid) -> Vec<Complex64> {
    let base = x0.values()[0].re;
    grid.points()
        .iter()
        .map(|&t| Complex64::new((x0.value_at(t).re - base).exp(), 0.0))
        .collect()
}

fn check_order(family: &DriverFamily, order: usize) -> Result<()> {
    if order > family.truncation_level() {
        return Err(Error::InvalidArgument(format!(
            "order N = {order} exceeds the truncation level M = {}",
            family.truncation_level()
        )));
    }
    Ok(())
}

/// A coefficient on the mesh with its one-sided time derivatives at both
/// ends of every sub-interval.
struct MeshCoefficient {
    value: Vec<Complex64>,
    d_left: Vec<Complex64>,
    d_right: Vec<Complex64>,
}

impl MeshCoefficient {
    fn one(len: usize) -> Self {
        MeshCoefficient {
            value: vec![Complex64::new(1.0, 0.0); len],
            d_left: vec![ZERO; len - 1],
            d_right: vec![ZERO; len - 1],
        }
    }

    fn zeros(len: usize) -> Self {
        MeshCoefficient {
            value: vec![ZERO; len],
            d_left: vec![ZERO; len - 1],
            d_right: vec![ZERO; len - 1],
        }
    }
}

/// `F = Σ_{k=0}^{n−1} (k+1) c_k x′_{n−k}` and `F′` at both ends of interval `j`.
fn forcing(mesh: &Mesh, c: &[MeshCoefficient], n: usize, j: usize) -> [Complex64; 4] {
    let mut out = [ZERO; 4];
    for (k, ck) in c.iter().enumerate().take(n) {
        let d = mesh.slope(n - k, j);
        if d.re == 0.0 && d.im == 0.0 {
            continue;
        }
        let w = d * (k as f64 + 1.0);
        out[0] += ck.value[j] * w;
        out[1] += ck.value[j + 1] * w;
        out[2] += ck.d_left[j] * w;
        out[3] += ck.d_right[j] * w;
    }
    out
}

/// End-corrected trapezoid `h/2 (f_a + f_b) + h²/12 (f′_a − f′_b)`.
fn hermite(h: f64, fa: Complex64, fb: Complex64, dfa: Complex64, dfb: Complex64) -> Complex64 {
    (fa + fb) * (0.5 * h) + (dfa - dfb) * (h * h / 12.0)
}

fn sample(mesh: &Mesh, rows: &[MeshCoefficient]) -> Vec<Vec<Complex64>> {
    rows.iter()
        .map(|row| mesh.output.iter().map(|&k| row.value[k]).collect())
        .collect()
}

/// Variation of constants on the refined mesh:
/// `cₙ(t) = e^{n X(t)} ∫₀ᵗ e^{−n X(s)} Σ_{k<n} (k+1) c_k(s) dx_{n−k}(s)` with
/// `X = x₀ − x₀(0)`, in increasing `n`.
///
/// The integrals use the end-corrected trapezoid rule. The one-sided time
/// derivatives it needs follow from the equation itself,
/// `c_k′ = Σ_{l<k} (l+1) c_l x′_{k−l} + k c_k x₀′`, so every `c_k` is stored
/// with its derivatives and the scheme is fourth order between knots.
pub fn solve_coefficients_recurrence(
    family: &DriverFamily,
    order: usize,
    grid: &TimeGrid,
    options: &SolverOptions,
) -> Result<CoefficientTable> {
    check_order(family, order)?;
    let mesh = Mesh::build(family, grid, options.refinement)?;
    let len = mesh.len();
    let mut c: Vec<MeshCoefficient> = vec![MeshCoefficient::one(len)];
    for n in 1..=order {
        let nf = n as f64;
        let mut row = MeshCoefficient::zeros(len);
        let mut acc = ZERO;
        for j in 0..len - 1 {
            let a = mesh.x0_slope[j] * nf;
            let [fa, fb, dfa, dfb] = forcing(&mesh, &c, n, j);
            let (ea, eb) = ((-nf * mesh.x0[j]).exp(), (-nf * mesh.x0[j + 1]).exp());
            // h = e^{−nX} F, h′ = e^{−nX} (F′ − n x₀′ F)
            acc += hermite(
                mesh.step(j),
                fa * ea,
                fb * eb,
                (dfa - fa * a) * ea,
                (dfb - fb * a) * eb,
            );
            let value = acc * (nf * mesh.x0[j + 1]).exp();
            row.value[j + 1] = value;
            row.d_left[j] = fa + row.value[j] * a;
            row.d_right[j] = fb + value * a;
        }
        c.push(row);
    }
    let coeffs = sample(&mesh, &c[1..]);
    CoefficientTable::new(
        grid.clone(),
        solve_c(family.x0(), grid),
        coeffs,
        Method::Recurrence,
    )
}

/// Outcome of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub table: CoefficientTable,
    /// `sup_t |cₙ^{(m)} − cₙ^{(m−1)}|` between the last two iterates, per `n`.
    pub gaps: Vec<f64>,
}

impl PicardOutcome {
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }
}

/// Fixed-point iteration `cₙ^{(m+1)} = ∫ {Σ (k+1) c_k dx_{n−k} + n cₙ^{(m)} dx₀}`
/// from `cₙ^{(0)} ≡ 0`, one `n` at a time with the lower coefficients
/// already iterated. Quadrature as in the recurrence; the derivative of an
/// iterate is the previous integrand.
pub fn solve_coefficients_picard(
    family: &DriverFamily,
    order: usize,
    grid: &TimeGrid,
    iterations: usize,
    options: &SolverOptions,
) -> Result<PicardOutcome> {
    check_order(family, order)?;
    if iterations == 0 {
        return Err(Error::InvalidArgument(
            "at least one iteration is required".into(),
        ));
    }
    let mesh = Mesh::build(family, grid, options.refinement)?;
    let len = mesh.len();
    let mut c: Vec<MeshCoefficient> = vec![MeshCoefficient::one(len)];
    let mut gaps = Vec::with_capacity(order);
    for n in 1..=order {
        let nf = n as f64;
        let base: Vec<[Complex64; 4]> = (0..len - 1).map(|j| forcing(&mesh, &c, n, j)).collect();
        let mut current = MeshCoefficient::zeros(len);
        let mut gap = 0.0;
        for _ in 0..iterations {
            let mut next = MeshCoefficient::zeros(len);
            let mut acc = ZERO;
            for j in 0..len - 1 {
                let a = mesh.x0_slope[j] * nf;
                let [ba, bb, dba, dbb] = base[j];
                let fa = ba + current.value[j] * a;
                let fb = bb + current.value[j + 1] * a;
                let dfa = dba + current.d_left[j] * a;
                let dfb = dbb + current.d_right[j] * a;
                acc += hermite(mesh.step(j), fa, fb, dfa, dfb);
                next.value[j + 1] = acc;
                next.d_left[j] = fa;
                next.d_right[j] = fb;
            }
            gap = next
                .value
                .iter()
                .zip(&current.value)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            current = next;
        }
        gaps.push(gap);
        c.push(current);
    }
    let coeffs = sample(&mesh, &c[1..]);
    let table = CoefficientTable::new(
        grid.clone(),
        solve_c(family.x0(), grid),
        coeffs,
        Method::Picard,
    )?;
    Ok(PicardOutcome { table, gaps })
}

/// How the integer weights attach to the parts of a composition whose
/// earliest integration variable carries `i₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightPairing {
    /// `∏_{j<p} ((i₁ + ⋯ + i_j) + 1)`: each later variable `u_{j+1}` is
    /// weighted by one plus the degree already accumulated before it. This is
    /// the pairing produced by unrolling the recurrence.
    #[default]
    PrefixSums,
    /// `∏_{j<p} ((n − (i₁ + ⋯ + i_j)) + 1)`, partial sums read from the left
    /// and subtracted from `n`. Equals `PrefixSums` on the reversed
    /// composition.
    SuffixSums,
}

impl WeightPairing {
    pub fn weight(self, parts: &[usize]) -> f64 {
        let n: usize = parts.iter().sum();
        let mut prefix = 0usize;
        let mut w = 1.0;
        for &i in &parts[..parts.len().saturating_sub(1)] {
            prefix += i;
            w *= match self {
                WeightPairing::PrefixSums => (prefix + 1) as f64,
                WeightPairing::SuffixSums => (n - prefix + 1) as f64,
            };
        }
        w
    }
}

/// Composition-sum table: `cₙ(t) = Σ_{compositions of n} w · e^{n X(t)} J(t)`
/// on every grid node, with the iterated integrals evaluated on the refined
/// mesh.
pub fn solve_coefficients_compositions_table(
    family: &DriverFamily,
    order: usize,
    grid: &TimeGrid,
    pairing: WeightPairing,
    options: &SolverOptions,
) -> Result<CoefficientTable> {
    check_order(family, order)?;
    if order > COMPOSITION_CAP {
        return Err(Error::ResourceLimit(format!(
            "composition sums are capped at n <= {COMPOSITION_CAP}, requested {order}"
        )));
    }
    let mesh = Mesh::build(family, grid, options.refinement)?;
    let out = mesh.output.clone();
    let mut coeffs = vec![vec![ZERO; out.len()]; order];
    {
        let mut engine = IteratedEngine::new(&mesh);
        let mut visit = |parts: &[usize], level: &Level| {
            if level.zero {
                return;
            }
            let n: usize = parts.iter().sum();
            let w = pairing.weight(parts);
            for (slot, &k) in coeffs[n - 1].iter_mut().zip(&out) {
                *slot += level.value[k] * (w * (n as f64 * mesh.x0[k]).exp());
            }
        };
        engine.for_each(order, &mut visit);
    }
    CoefficientTable::new(
        grid.clone(),
        solve_c(family.x0(), grid),
        coeffs,
        Method::Compositions,
    )
}

/// `c₁(t), …, c_N(t)` at a single time by the composition sum.
pub fn solve_coefficients_compositions(
    family: &DriverFamily,
    order: usize,
    t: f64,
    pairing: WeightPairing,
    options: &SolverOptions,
) -> Result<Vec<Complex64>> {
    let t_final = family.t_final();
    if !(0.0..=t_final).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} outside [0, {t_final}]"
        )));
    }
    if t == 0.0 {
        check_order(family, order)?;
        return Ok(vec![ZERO; order]);
    }
    let grid = TimeGrid::new(vec![0.0, t_final])?.with_knots(&[t]);
    let table = solve_coefficients_compositions_table(family, order, &grid, pairing, options)?;
    let j = grid.node_index(t).expect("t is a knot");
    Ok(table.coeffs_at(j))
}

/// A series snapshot of the table at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub series: TruncatedSeries,
    /// `t` was not a grid node and the coefficients were interpolated
    /// linearly between neighbours.
    pub interpolated: bool,
}

pub fn assemble_solution(table: &CoefficientTable, t: f64, tail: TailModel) -> Result<Snapshot> {
    let grid = table.grid();
    if !(0.0..=grid.t_final()).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} outside [0, {}]",
            grid.t_final()
        )));
    }
    if let Some(j) = grid.node_index(t) {
        return Ok(Snapshot {
            t,
            series: TruncatedSeries::new(table.prefactor[j], table.coeffs_at(j), tail),
            interpolated: false,
        });
    }
    let j = grid.interval_index(t);
    let pts = grid.points();
    let w = (t - pts[j]) / (pts[j + 1] - pts[j]);
    let lerp = |a: Complex64, b: Complex64| a * (1.0 - w) + b * w;
    let coeffs = table
        .coeffs
        .iter()
        .map(|row| lerp(row[j], row[j + 1]))
        .collect();
    Ok(Snapshot {
        t,
        series: TruncatedSeries::new(
            lerp(table.prefactor[j], table.prefactor[j + 1]),
            coeffs,
            tail,
        ),
        interpolated: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn beta_family(beta: f64, m: usize) -> DriverFamily {
        DriverFamily::new(
            DriverPath::zero(1.0).unwrap(),
            vec![DriverPath::linear(1.0, c(beta)).unwrap()],
            None,
        )
        .unwrap()
        .with_truncation(m)
        .unwrap()
    }

    #[test]
    fn prefactor_is_exponential() {
        let x0 = DriverPath::real(&[0.0, 1.0], &[0.0, 0.2]).unwrap();
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let cs = solve_c(&x0, &grid);
        assert!((cs[4].re - 1.221_402_758_160_17).abs() < 1e-12);
        let zero = solve_c(&DriverPath::zero(1.0).unwrap(), &grid);
        assert!(zero.iter().all(|&v| v == c(1.0)));
    }

    #[test]
    fn prefactor_solves_its_integral_equation() {
        // C(t) − 1 = ∫ C dx₀, residual shrinks with the quadrature refinement
        let x0 = DriverPath::real(&[0.0, 0.5, 1.0], &[0.0, 0.4, -0.1]).unwrap();
        let cfun = |t: f64| Complex64::new(x0.value_at(t).re.exp(), 0.0);
        let exact = cfun(1.0) - 1.0;
        let r1 =
            (crate::drivers::stieltjes_integral(cfun, &x0, 0.0, 1.0, 16).unwrap() - exact).norm();
        let r2 =
            (crate::drivers::stieltjes_integral(cfun, &x0, 0.0, 1.0, 32).unwrap() - exact).norm();
        assert!(r2 < r1 / 3.9 && r2 < 1e-4);
    }

    #[test]
    fn x0_only_driver_has_vanishing_coefficients() {
        let fam = DriverFamily::new(
            DriverPath::real(&[0.0, 1.0], &[0.0, 0.2]).unwrap(),
            vec![],
            None,
        )
        .unwrap()
        .with_truncation(6)
        .unwrap();
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let table =
            solve_coefficients_recurrence(&fam, 6, &grid, &SolverOptions::default()).unwrap();
        for n in 1..=6 {
            assert!(table.coeff_row(n).iter().all(|v| v.norm() == 0.0));
        }
        let snap = assemble_solution(&table, 1.0, TailModel::Exact).unwrap();
        assert!((snap.series.prefactor.re - 0.2f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn beta_driver_recovers_geometric_coefficients() {
        let fam = beta_family(0.2, 8);
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        let opts = SolverOptions { refinement: 64 };
        let table = solve_coefficients_recurrence(&fam, 8, &grid, &opts).unwrap();
        let last = grid.len() - 1;
        for n in 1..=8 {
            assert!((table.coeff(n, last).re - 0.2f64.powi(n as i32)).abs() < 1e-8);
        }
        let snap = assemble_solution(&table, 0.0, TailModel::Exact).unwrap();
        assert!(snap.series.coeffs.iter().all(|v| v.norm() == 0.0));
        assert_eq!(snap.series.prefactor, c(1.0));
    }

    #[test]
    fn drift_and_single_mode_closed_form() {
        // c₁(t) = e^{at} (b/a)(1 − e^{−at})
        let (a, b) = (0.3, 0.25);
        let fam = DriverFamily::new(
            DriverPath::real(&[0.0, 1.0], &[0.0, a]).unwrap(),
            vec![DriverPath::linear(1.0, c(b)).unwrap()],
            None,
        )
        .unwrap();
        let grid = TimeGrid::uniform(1.0, 32).unwrap();
        let table =
            solve_coefficients_recurrence(&fam, 1, &grid, &SolverOptions::default()).unwrap();
        for (j, &t) in grid.points().iter().enumerate() {
            let exact = (a * t).exp() * (b / a) * (1.0 - (-a * t).exp());
            assert!((table.coeff(1, j).re - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn order_beyond_truncation_is_rejected() {
        let fam = beta_family(0.2, 3);
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        assert!(matches!(
            solve_coefficients_recurrence(&fam, 4, &grid, &SolverOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn weights() {
        assert_eq!(WeightPairing::PrefixSums.weight(&[3]), 1.0);
        assert_eq!(WeightPairing::SuffixSums.weight(&[3]), 1.0);
        // (1,2): prefix 1 → 2; suffix n − 1 + 1 = 3
        assert_eq!(WeightPairing::PrefixSums.weight(&[1, 2]), 2.0);
        assert_eq!(WeightPairing::SuffixSums.weight(&[1, 2]), 3.0);
        assert_eq!(WeightPairing::PrefixSums.weight(&[2, 1]), 3.0);
        assert_eq!(WeightPairing::PrefixSums.weight(&[1, 1, 1]), 6.0);
        assert_eq!(WeightPairing::SuffixSums.weight(&[1, 1, 1]), 6.0);
    }

    #[test]
    fn composition_route_on_beta_driver() {
        let fam = beta_family(0.2, 4);
        let v = solve_coefficients_compositions(
            &fam,
            4,
            1.0,
            WeightPairing::PrefixSums,
            &SolverOptions::default(),
        )
        .unwrap();
        for (i, val) in v.iter().enumerate() {
            assert!((val.re - 0.2f64.powi(i as i32 + 1)).abs() < 1e-12);
        }
        let zero = DriverFamily::zero(1.0, 4).unwrap();
        let v = solve_coefficients_compositions(
            &zero,
            4,
            0.5,
            WeightPairing::PrefixSums,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(v.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn picard_without_drift_is_exact_after_one_sweep() {
        let fam = beta_family(0.2, 5);
        let grid = TimeGrid::uniform(1.0, 16).unwrap();
        let opts = SolverOptions::default();
        let one = solve_coefficients_picard(&fam, 5, &grid, 1, &opts).unwrap();
        let two = solve_coefficients_picard(&fam, 5, &grid, 2, &opts).unwrap();
        let rec = solve_coefficients_recurrence(&fam, 5, &grid, &opts).unwrap();
        assert_eq!(two.max_gap(), 0.0);
        assert!(one.table.sup_gap(&rec, 5).unwrap() < 1e-15);
    }

    #[test]
    fn picard_gap_contracts_with_drift() {
        let a = 0.5;
        let fam = DriverFamily::new(
            DriverPath::real(&[0.0, 1.0], &[0.0, a]).unwrap(),
            vec![DriverPath::linear(1.0, c(0.3)).unwrap()],
            None,
        )
        .unwrap()
        .with_truncation(3)
        .unwrap();
        let grid = TimeGrid::uniform(1.0, 16).unwrap();
        let opts = SolverOptions { refinement: 8 };
        let mut last = f64::INFINITY;
        for m in [2, 4, 6, 8] {
            let g = solve_coefficients_picard(&fam, 3, &grid, m, &opts)
                .unwrap()
                .max_gap();
            assert!(g < last);
            last = g;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn interpolated_snapshot_is_flagged() {
        let fam = beta_family(0.2, 2);
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let table =
            solve_coefficients_recurrence(&fam, 2, &grid, &SolverOptions::default()).unwrap();
        let snap = assemble_solution(&table, 0.3, TailModel::Unknown).unwrap();
        assert!(snap.interpolated);
        assert!((snap.series.coeffs[0].re - 0.06).abs() < 1e-12);
        assert!(
            !assemble_solution(&table, 0.5, TailModel::Unknown)
                .unwrap()
                .interpolated
        );
    }
}
