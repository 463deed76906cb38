//! Driving paths `x₀, x₁, …, x_M` as continuous piecewise-linear functions
//! on `[0, T]`, and Stieltjes integration against them.
//!
//! Piecewise-linear paths are continuous and of bounded variation by
//! construction; `dx` has a piecewise-constant density, so every Stieltjes
//! integral reduces to ordinary quadrature on each linear segment.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::report::{CheckRow, Verdict, VerificationReport, Witness};
use crate::{Error, Result};

/// Default truncation level `M` of the driver family.
pub const DEFAULT_TRUNCATION: usize = 16;

/// Default number of trapezoid sub-steps per linear segment.
pub const DEFAULT_REFINEMENT: usize = 64;

/// Relative tolerance used to merge nearly coincident knots.
const KNOT_MERGE_RTOL: f64 = 1e-12;

/// Strictly increasing times `0 = t₀ < t₁ < ⋯ < t_K = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least two points, got {}",
                points.len()
            )));
        }
        if points[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "grid must start at 0, starts at {}",
                points[0]
            )));
        }
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite time {bad}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "times not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(TimeGrid { points })
    }

    /// `intervals + 1` equally spaced nodes on `[0, T]`.
    pub fn uniform(t_final: f64, intervals: usize) -> Result<Self> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        if intervals == 0 {
            return Err(Error::InvalidGrid("need at least one interval".into()));
        }
        let h = t_final / intervals as f64;
        let mut points: Vec<f64> = (0..intervals).map(|i| i as f64 * h).collect();
        points.push(t_final);
        TimeGrid::new(points)
    }

    /// Union of two grids on the same `[0, T]`, merging knots closer than a
    /// relative `1e-12`.
    pub fn union(&self, other: &TimeGrid) -> Result<Self> {
        let t_final = self.t_final();
        if (other.t_final() - t_final).abs() > KNOT_MERGE_RTOL * t_final {
            return Err(Error::InvalidGrid(format!(
                "final times differ: {} vs {}",
                t_final,
                other.t_final()
            )));
        }
        Ok(Self::merged(
            self.points.iter().chain(other.points.iter()).copied(),
            t_final,
        ))
    }

    /// Adds interior knots to the grid (values outside `(0, T)` are ignored).
    pub fn with_knots(&self, knots: &[f64]) -> Self {
        let t_final = self.t_final();
        Self::merged(
            self.points
                .iter()
                .copied()
                .chain(knots.iter().copied().filter(|&k| k > 0.0 && k < t_final)),
            t_final,
        )
    }

    fn merged(points: impl Iterator<Item = f64>, t_final: f64) -> Self {
        let mut all: Vec<f64> = points.collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
        let tol = KNOT_MERGE_RTOL * t_final;
        let mut out: Vec<f64> = Vec::with_capacity(all.len());
        for p in all {
            match out.last() {
                Some(&last) if p - last <= tol => {}
                _ => out.push(p),
            }
        }
        // snap the end to T exactly
        if let Some(last) = out.last_mut() {
            *last = t_final;
        }
        TimeGrid { points: out }
    }

    /// Each interval subdivided into `refinement` equal pieces.
    pub fn refined(&self, refinement: usize) -> Self {
        let refinement = refinement.max(1);
        let mut points = Vec::with_capacity((self.points.len() - 1) * refinement + 1);
        for w in self.points.windows(2) {
            let h = (w[1] - w[0]) / refinement as f64;
            for k in 0..refinement {
                points.push(w[0] + k as f64 * h);
            }
        }
        points.push(self.t_final());
        TimeGrid { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_final(&self) -> f64 {
        *self.points.last().expect("grid has at least two points")
    }

    /// Index of the node within `1e-12·T` of `t`, if any.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let tol = KNOT_MERGE_RTOL * self.t_final();
        let i = self.points.partition_point(|&p| p < t - tol);
        (i < self.points.len() && (self.points[i] - t).abs() <= tol).then_some(i)
    }

    /// Index `j` of the interval `[t_j, t_{j+1}]` containing `t` (clamped).
    pub fn interval_index(&self, t: f64) -> usize {
        let last = self.points.len() - 2;
        let j = self.points.partition_point(|&p| p <= t);
        j.saturating_sub(1).min(last)
    }
}

/// A continuous piecewise-linear path with complex values.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverPath {
    times: TimeGrid,
    values: Vec<Complex64>,
}

/// Builds a piecewise-linear path through `(times[i], values[i])`.
pub fn make_piecewise_linear(times: &[f64], values: &[Complex64]) -> Result<DriverPath> {
    if times.len() != values.len() {
        return Err(Error::InvalidPath(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if let Some(v) = values
        .iter()
        .find(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::InvalidPath(format!("non-finite value {v}")));
    }
    let times = TimeGrid::new(times.to_vec()).map_err(|e| Error::InvalidPath(format!("{e}")))?;
    Ok(DriverPath {
        times,
        values: values.to_vec(),
    })
}

impl DriverPath {
    pub fn real(times: &[f64], values: &[f64]) -> Result<Self> {
        let values: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        make_piecewise_linear(times, &values)
    }

    pub fn zero(t_final: f64) -> Result<Self> {
        make_piecewise_linear(&[0.0, t_final], &[Complex64::new(0.0, 0.0); 2])
    }

    /// `x(t) = slope · t` on `[0, T]`.
    pub fn linear(t_final: f64, slope: Complex64) -> Result<Self> {
        make_piecewise_linear(
            &[0.0, t_final],
            &[Complex64::new(0.0, 0.0), slope * t_final],
        )
    }

    pub fn breakpoints(&self) -> &TimeGrid {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn t_final(&self) -> f64 {
        self.times.t_final()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Value at `t`, clamped to `[0, T]`.
    pub fn value_at(&self, t: f64) -> Complex64 {
        let pts = self.times.points();
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= self.t_final() {
            return *self.values.last().expect("nonempty");
        }
        let j = self.times.interval_index(t);
        let (a, b) = (pts[j], pts[j + 1]);
        let w = (t - a) / (b - a);
        self.values[j] * (1.0 - w) + self.values[j + 1] * w
    }

    /// Density `x′` on segment `j`.
    pub fn segment_slope(&self, j: usize) -> Complex64 {
        let pts = self.times.points();
        (self.values[j + 1] - self.values[j]) / (pts[j + 1] - pts[j])
    }

    /// Density `x′` on the segment containing `t` (right-continuous).
    pub fn slope_at(&self, t: f64) -> Complex64 {
        self.segment_slope(self.times.interval_index(t))
    }

    /// `|dx|((s, t])`: arc length of the increments restricted to `(s, t]`.
    pub fn total_variation(&self, s: f64, t: f64) -> Result<f64> {
        if s > t {
            return Err(Error::InvalidArgument(format!(
                "total variation needs s <= t, got s = {s}, t = {t}"
            )));
        }
        let pts = self.times.points();
        let mut tv = 0.0;
        for j in 0..pts.len() - 1 {
            let lo = pts[j].max(s);
            let hi = pts[j + 1].min(t);
            if hi > lo {
                tv += self.segment_slope(j).norm() * (hi - lo);
            }
        }
        Ok(tv)
    }

    /// `dx((s, t]) = x(t) − x(s)`.
    pub fn increment(&self, s: f64, t: f64) -> Complex64 {
        self.value_at(t) - self.value_at(s)
    }
}

/// Total variation of a path over `(s, t]`.
pub fn total_variation(path: &DriverPath, s: f64, t: f64) -> Result<f64> {
    path.total_variation(s, t)
}

/// The driving data `(x₀, x₁, …, x_M)`.
///
/// Paths beyond the truncation level are treated as identically zero. An
/// optional `decay_ratio ρ` declares `|dxₙ|([0,T]) ≤ K ρⁿ` for every `n`,
/// with `K` fitted on the stored paths; it is used only to quantify tails.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverFamily {
    x0: DriverPath,
    xs: Vec<DriverPath>,
    decay_ratio: Option<f64>,
}

impl DriverFamily {
    pub fn new(x0: DriverPath, xs: Vec<DriverPath>, decay_ratio: Option<f64>) -> Result<Self> {
        if !x0.is_real() {
            return Err(Error::InvalidPath("x0 must be real-valued".into()));
        }
        let t_final = x0.t_final();
        for (i, p) in xs.iter().enumerate() {
            if (p.t_final() - t_final).abs() > KNOT_MERGE_RTOL * t_final {
                return Err(Error::InvalidPath(format!(
                    "x{} ends at {} but x0 ends at {}",
                    i + 1,
                    p.t_final(),
                    t_final
                )));
            }
        }
        if let Some(rho) = decay_ratio {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "decay ratio must lie in (0, 1), got {rho}"
                )));
            }
        }
        Ok(DriverFamily {
            x0,
            xs,
            decay_ratio,
        })
    }

    /// Family with all paths identically zero up to level `m`.
    pub fn zero(t_final: f64, m: usize) -> Result<Self> {
        let zero = DriverPath::zero(t_final)?;
        DriverFamily::new(zero.clone(), vec![zero; m], None)
    }

    /// Pads the family with zero paths up to truncation level `m`.
    pub fn with_truncation(mut self, m: usize) -> Result<Self> {
        let zero = DriverPath::zero(self.t_final())?;
        while self.xs.len() < m {
            self.xs.push(zero.clone());
        }
        Ok(self)
    }

    pub fn x0(&self) -> &DriverPath {
        &self.x0
    }

    pub fn xs(&self) -> &[DriverPath] {
        &self.xs
    }

    /// `xₙ` for `1 ≤ n ≤ M`.
    pub fn path(&self, n: usize) -> Option<&DriverPath> {
        n.checked_sub(1).and_then(|i| self.xs.get(i))
    }

    pub fn truncation_level(&self) -> usize {
        self.xs.len()
    }

    pub fn decay_ratio(&self) -> Option<f64> {
        self.decay_ratio
    }

    pub fn t_final(&self) -> f64 {
        self.x0.t_final()
    }

    /// Union of the breakpoints of every path.
    pub fn breakpoints(&self) -> TimeGrid {
        let mut knots: Vec<f64> = Vec::new();
        for p in core::iter::once(&self.x0).chain(self.xs.iter()) {
            knots.extend_from_slice(p.breakpoints().points());
        }
        TimeGrid::merged(knots.into_iter(), self.t_final())
    }

    /// `x₀(t) − x₀(0)` as a real number.
    pub fn x0_shifted(&self, t: f64) -> f64 {
        self.x0.value_at(t).re - self.x0.values()[0].re
    }

    /// Geometric tail constant `K = max_n |dxₙ|([0,T]) / ρⁿ` over the stored
    /// paths, when a decay ratio is declared.
    pub fn decay_constant(&self) -> Option<f64> {
        let rho = self.decay_ratio?;
        let t_final = self.t_final();
        let k = self
            .xs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let tv = p.total_variation(0.0, t_final).unwrap_or(f64::INFINITY);
                tv / rho.powi(i as i32 + 1)
            })
            .fold(0.0, f64::max);
        Some(k)
    }

    /// Declared bound on `Σ_{n>M} |dxₙ|([0,T]) rⁿ`, i.e. `K (ρr)^{M+1} / (1 − ρr)`.
    pub fn declared_tail(&self, r: f64) -> Option<f64> {
        let rho = self.decay_ratio?;
        let k = self.decay_constant()?;
        let q = rho * r;
        Some(k * q.powi(self.truncation_level() as i32 + 1) / (1.0 - q))
    }
}

/// Partial sum `ξ(x, z)_t = Σ_{n ≤ M} xₙ(t) zⁿ` with an optional tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiValue {
    pub value: Complex64,
    /// Bound on the omitted terms `n > M`, assuming `xₙ(0) = 0` there; `None`
    /// when the family declares no decay.
    pub tail_bound: Option<f64>,
}

pub fn eval_xi(family: &DriverFamily, z: Complex64, t: f64) -> Result<XiValue> {
    let r = z.norm();
    if r >= 1.0 {
        return Err(Error::OutsideDisk(r));
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut zn = Complex64::new(1.0, 0.0);
    for path in family.xs() {
        zn *= z;
        value += path.value_at(t) * zn;
    }
    Ok(XiValue {
        value,
        tail_bound: family.declared_tail(r),
    })
}

/// `∫ₛᵗ g(u) dx(u)` by the composite trapezoid rule, with `refinement`
/// sub-steps on each linear segment overlapping `(s, t]`.
pub fn stieltjes_integral<G>(
    g: G,
    path: &DriverPath,
    s: f64,
    t: f64,
    refinement: usize,
) -> Result<Complex64>
where
    G: Fn(f64) -> Complex64,
{
    if s > t {
        return Err(Error::InvalidArgument(format!(
            "integration bounds reversed: s = {s}, t = {t}"
        )));
    }
    if refinement == 0 {
        return Err(Error::InvalidArgument(
            "refinement must be at least 1".into(),
        ));
    }
    let pts = path.breakpoints().points();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..pts.len() - 1 {
        let lo = pts[j].max(s);
        let hi = pts[j + 1].min(t);
        if hi <= lo {
            continue;
        }
        let slope = path.segment_slope(j);
        let h = (hi - lo) / refinement as f64;
        let mut seg = (g(lo) + g(hi)) * 0.5;
        for k in 1..refinement {
            seg += g(lo + k as f64 * h);
        }
        acc += seg * slope * h;
    }
    Ok(acc)
}

/// Radii at which `Σ_{n ≤ M} |dxₙ|([0,T]) rⁿ` is evaluated.
pub const SAMPLE_RADII: [f64; 4] = [0.25, 0.5, 0.9, 0.99];

/// Checks the standing assumptions on the driving paths: `x₀(0) = 0`, and
/// finiteness of `Σ |dxₙ|([0,T]) rⁿ` on sampled radii. For the stored
/// truncation the sums are always finite; the infinite tail is only
/// quantified when a decay ratio is declared, and is then labelled as
/// declared, not proven.
pub fn check_driver_conditions(family: &DriverFamily) -> VerificationReport {
    let mut report = VerificationReport::new("driver conditions");
    let x00 = family.x0().values()[0].re;
    report.push(
        CheckRow::inequality("x0(0) = 0", x00.abs(), 0.0, 1.0).with_witness(Witness {
            t: Some(0.0),
            ..Witness::default()
        }),
    );

    let t_final = family.t_final();
    let variations: Vec<f64> = family
        .xs()
        .iter()
        .map(|p| p.total_variation(0.0, t_final).unwrap_or(f64::INFINITY))
        .collect();
    for &r in SAMPLE_RADII.iter() {
        let partial: f64 = variations
            .iter()
            .enumerate()
            .map(|(i, tv)| tv * r.powi(i as i32 + 1))
            .sum();
        let finite = partial.is_finite();
        let row = CheckRow::inequality(
            "truncated variation series finite",
            partial,
            if finite { partial } else { 0.0 },
            1.0,
        )
        .with_witness(Witness {
            n: Some(family.truncation_level()),
            r: Some(r),
            ..Witness::default()
        });
        report.push(if finite {
            row.with_verdict(Verdict::Certified)
        } else {
            row.with_verdict(Verdict::Violated)
        });

        let tail_row = match family.declared_tail(r) {
            Some(tail) => {
                let note: String = format!(
                    "declared, not proven: K = {:e}, decay ratio = {}",
                    family.decay_constant().unwrap_or(f64::NAN),
                    family.decay_ratio().unwrap_or(f64::NAN)
                );
                CheckRow::inequality("variation series tail", tail, tail, 1.0)
                    .with_note(note)
                    .with_verdict(Verdict::Inconclusive)
            }
            None => CheckRow::inequality("variation series tail", f64::NAN, f64::NAN, 1.0)
                .with_note("no decay declared; tail beyond the truncation is not quantified")
                .with_verdict(Verdict::Inconclusive),
        };
        report.push(tail_row.with_witness(Witness {
            n: Some(family.truncation_level() + 1),
            r: Some(r),
            ..Witness::default()
        }));
    }
    report
}
