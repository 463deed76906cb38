//! Control functions `ω(s, t)` and the ω-controlled inequalities.
//!
//! A family is controlled by `ω` when, for every composition
//! `(i₁, …, i_p)` of `n`, the weighted iterated integral
//!
//! ```text
//! I(t) = e^{n x₀(t)} ∫_{0 ≤ u₁ < ⋯ < u_p ≤ t} e^{−i₁x₀(u₁)} dx_{i₁}(u₁) ⋯ e^{−i_p x₀(u_p)} dx_{i_p}(u_p)
//! ```
//!
//! satisfies `|I(t)| ≤ ω(0,t)ⁿ/n!` and
//! `|I(t) − I(s)| ≤ ω(s,t) ω(0,T)ⁿ⁻¹/(n−1)!`.
//!
//! Iterated integrals are evaluated inner to outer on one shared mesh. Each
//! level stores its values and one-sided derivatives at the mesh nodes, which
//! makes the end-corrected trapezoid rule available: fourth order, enough to
//! certify the equality cases at a `1e-7` relative slack.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::drivers::{DriverFamily, TimeGrid, DEFAULT_REFINEMENT};
use crate::mesh::Mesh;
use crate::report::{CheckRow, VerificationReport, Witness};
use crate::{Error, Result};

/// Largest `n` for which compositions are enumerated (`2ⁿ⁻¹` of them).
pub const COMPOSITION_CAP: usize = 16;

/// Default relative slack of the controlled inequalities.
pub const DEFAULT_SLACK: f64 = 1e-7;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `ω(s, t)`, either `c (t − s)` or bilinear interpolation of a table.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlFunction {
    Linear { rate: f64 },
    Table(ControlTable),
}

/// Values of `ω` on the tensor grid `s × t`, row-major in `s`. Entries with
/// `s > t` are never read.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTable {
    s: Vec<f64>,
    t: Vec<f64>,
    values: Vec<f64>,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "{name} axis needs two points"
        )));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

/// Index `j` with `axis[j] ≤ x ≤ axis[j+1]` and the weight of `axis[j+1]`.
fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    let last = axis.len() - 2;
    let j = axis
        .partition_point(|&p| p <= x)
        .saturating_sub(1)
        .min(last);
    let w = ((x - axis[j]) / (axis[j + 1] - axis[j])).clamp(0.0, 1.0);
    (j, w)
}

impl ControlTable {
    pub fn new(s: Vec<f64>, t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_axis("s", &s)?;
        check_axis("t", &t)?;
        if values.len() != s.len() * t.len() {
            return Err(Error::InvalidArgument(format!(
                "table has {} values, expected {} x {}",
                values.len(),
                s.len(),
                t.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("table values must be finite".into()));
        }
        Ok(ControlTable { s, t, values })
    }

    pub fn s_axis(&self) -> &[f64] {
        &self.s
    }

    pub fn t_axis(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.t.len() + j]
    }

    /// Bilinear inside cells; on the diagonal cells of a square table, linear
    /// on the triangle `s ≤ t`, so `ω(t,t)` only reads diagonal entries.
    fn eval(&self, s: f64, t: f64) -> f64 {
        let (i, ws) = locate(&self.s, s);
        let (j, wt) = locate(&self.t, t);
        if i == j && ws <= wt && self.s == self.t {
            let a = self.at(i, i);
            let b = self.at(i, i + 1);
            let d = self.at(i + 1, i + 1);
            return a + wt * (b - a) + ws * (d - b);
        }
        let lo = self.at(i, j) * (1.0 - wt) + self.at(i, j + 1) * wt;
        let hi = self.at(i + 1, j) * (1.0 - wt) + self.at(i + 1, j + 1) * wt;
        lo * (1.0 - ws) + hi * ws
    }
}

impl ControlFunction {
    pub fn linear(rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "linear control rate must be a nonnegative number, got {rate}"
            )));
        }
        Ok(ControlFunction::Linear { rate })
    }

    /// Tabulates `f` on `axis × axis` (entries below the diagonal set to 0).
    pub fn tabulate<F: Fn(f64, f64) -> f64>(axis: &TimeGrid, f: F) -> Result<Self> {
        let pts = axis.points();
        let mut values = Vec::with_capacity(pts.len() * pts.len());
        for &s in pts {
            for &t in pts {
                values.push(if s <= t { f(s, t) } else { 0.0 });
            }
        }
        Ok(ControlFunction::Table(ControlTable::new(
            pts.to_vec(),
            pts.to_vec(),
            values,
        )?))
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match self {
            ControlFunction::Linear { rate } => rate * (t - s),
            ControlFunction::Table(table) => table.eval(s, t),
        }
    }
}

/// An ordered tuple of positive integers; `n` is their sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    parts: Vec<usize>,
}

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidArgument(
                "composition parts must be nonempty and positive".into(),
            ));
        }
        Ok(Composition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// All compositions of `n` in lexicographic order.
pub fn enumerate_compositions(n: usize) -> Result<Vec<Composition>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if n > COMPOSITION_CAP {
        return Err(Error::ResourceLimit(format!(
            "n = {n} has 2^{} compositions; the cap is n <= {COMPOSITION_CAP}",
            n - 1
        )));
    }
    fn rec(rest: usize, prefix: &mut Vec<usize>, out: &mut Vec<Composition>) {
        if rest == 0 {
            out.push(Composition {
                parts: prefix.clone(),
            });
            return;
        }
        for first in 1..=rest {
            prefix.push(first);
            rec(rest - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(1 << (n - 1));
    rec(n, &mut Vec::new(), &mut out);
    Ok(out)
}

/// One level `J_m` of the nested integral on the mesh.
pub(crate) struct Level {
    pub value: Vec<Complex64>,
    /// `J′` at the left and right end of every sub-interval.
    d_left: Vec<Complex64>,
    d_right: Vec<Complex64>,
    pub zero: bool,
}

impl Level {
    fn one(len: usize) -> Self {
        Level {
            value: vec![Complex64::new(1.0, 0.0); len],
            d_left: vec![ZERO; len - 1],
            d_right: vec![ZERO; len - 1],
            zero: false,
        }
    }

    fn zeros(len: usize) -> Self {
        Level {
            value: vec![ZERO; len],
            d_left: vec![ZERO; len - 1],
            d_right: vec![ZERO; len - 1],
            zero: true,
        }
    }
}

/// Evaluates nested integrals on a mesh, caching `e^{−i (x₀ − x₀(0))}`.
pub(crate) struct IteratedEngine<'a> {
    mesh: &'a Mesh,
    damping: Vec<Option<Vec<f64>>>,
}

impl<'a> IteratedEngine<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        IteratedEngine {
            mesh,
            damping: Vec::new(),
        }
    }

    fn damping(&mut self, part: usize) -> &[f64] {
        if self.damping.len() <= part {
            self.damping.resize(part + 1, None);
        }
        let mesh = self.mesh;
        self.damping[part].get_or_insert_with(|| {
            mesh.x0
                .iter()
                .map(|&x| (-(part as f64) * x).exp())
                .collect()
        })
    }

    /// `J_m(u) = ∫₀ᵘ J_{m−1}(v) e^{−i x₀(v)} dxᵢ(v)` by the end-corrected
    /// trapezoid rule `h/2 (f_a + f_b) + h²/12 (f′_a − f′_b)`.
    fn extend(&mut self, prev: &Level, part: usize) -> Level {
        let len = self.mesh.len();
        if prev.zero || self.mesh.is_zero_path(part) {
            return Level::zeros(len);
        }
        let i = part as f64;
        let damp: Vec<f64> = self.damping(part).to_vec();
        let mesh = self.mesh;
        let mut next = Level::zeros(len);
        next.zero = false;
        let mut acc = ZERO;
        for j in 0..len - 1 {
            let h = mesh.step(j);
            let density = mesh.slope(part, j);
            let a = mesh.x0_slope[j];
            let ga = density * damp[j];
            let gb = density * damp[j + 1];
            let fa = prev.value[j] * ga;
            let fb = prev.value[j + 1] * gb;
            let dfa = prev.d_left[j] * ga - prev.value[j] * ga * (i * a);
            let dfb = prev.d_right[j] * gb - prev.value[j + 1] * gb * (i * a);
            acc += (fa + fb) * (0.5 * h) + (dfa - dfb) * (h * h / 12.0);
            next.value[j + 1] = acc;
            next.d_left[j] = fa;
            next.d_right[j] = fb;
        }
        next
    }

    pub fn chain(&mut self, parts: &[usize]) -> Level {
        let mut level = Level::one(self.mesh.len());
        for &p in parts {
            level = self.extend(&level, p);
        }
        level
    }

    /// Visits every composition with sum `≤ max_sum` in lexicographic order,
    /// sharing the work of common prefixes.
    pub fn for_each<V: FnMut(&[usize], &Level)>(&mut self, max_sum: usize, visit: &mut V) {
        let root = Level::one(self.mesh.len());
        let mut prefix = Vec::new();
        self.descend(&root, max_sum, &mut prefix, visit);
    }

    fn descend<V: FnMut(&[usize], &Level)>(
        &mut self,
        prev: &Level,
        rest: usize,
        prefix: &mut Vec<usize>,
        visit: &mut V,
    ) {
        for part in 1..=rest {
            let level = self.extend(prev, part);
            prefix.push(part);
            visit(prefix, &level);
            if rest > part {
                self.descend(&level, rest - part, prefix, visit);
            }
            prefix.pop();
        }
    }
}

/// Quadrature settings for the controlled-inequality checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOptions {
    /// Sub-steps per knot interval of the shared mesh.
    pub refinement: usize,
    /// Relative slack on each inequality, scaled by its right-hand side at
    /// `(0, T)`.
    pub slack: f64,
}

impl Default for ControlOptions {
    fn default() -> Self {
        ControlOptions {
            refinement: DEFAULT_REFINEMENT,
            slack: DEFAULT_SLACK,
        }
    }
}

fn check_parts(family: &DriverFamily, parts: &[usize]) -> Result<()> {
    let m = family.truncation_level();
    if let Some(&p) = parts.iter().find(|&&p| p > m) {
        return Err(Error::InvalidArgument(format!(
            "composition part {p} exceeds the truncation level {m}"
        )));
    }
    Ok(())
}

/// `e^{n x₀(t)} J_p(t)` for one composition, with `x₀` shifted so that
/// `x₀(0) = 0` (the expression is invariant under constant shifts).
pub fn iterated_integral(
    family: &DriverFamily,
    comp: &Composition,
    t: f64,
    refinement: usize,
) -> Result<Complex64> {
    check_parts(family, comp.parts())?;
    let t_final = family.t_final();
    if !(0.0..=t_final).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} outside [0, {t_final}]"
        )));
    }
    if t == 0.0 {
        return Ok(ZERO);
    }
    let grid = TimeGrid::new(vec![0.0, t_final])?.with_knots(&[t]);
    let mesh = Mesh::build(family, &grid, refinement)?;
    let at = grid.node_index(t).expect("t is a knot");
    let mut engine = IteratedEngine::new(&mesh);
    let level = engine.chain(comp.parts());
    let n = comp.n() as f64;
    let k = mesh.output[at];
    Ok(level.value[k] * (n * mesh.x0[k]).exp())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Controlled values `I(t_k)` of one composition on the output nodes.
fn controlled_values(mesh: &Mesh, n: usize, level: &Level) -> Vec<Complex64> {
    mesh.output
        .iter()
        .map(|&k| {
            if level.zero {
                ZERO
            } else {
                level.value[k] * (n as f64 * mesh.x0[k]).exp()
            }
        })
        .collect()
}

/// Checks both controlled inequalities for every composition of every
/// `n ≤ n_max` and every pair `s ≤ t` of grid nodes. One report row per
/// composition and inequality, bound at its worst `(s, t)`.
pub fn verify_controlled(
    family: &DriverFamily,
    omega: &ControlFunction,
    n_max: usize,
    grid: &TimeGrid,
    options: &ControlOptions,
) -> Result<VerificationReport> {
    if n_max == 0 || n_max > COMPOSITION_CAP {
        return Err(Error::ResourceLimit(format!(
            "n_max = {n_max} outside 1..={COMPOSITION_CAP}"
        )));
    }
    if n_max > family.truncation_level() {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} exceeds the truncation level {}",
            family.truncation_level()
        )));
    }
    let mesh = Mesh::build(family, grid, options.refinement)?;
    let times = grid.points();
    let t_final = family.t_final();
    let om_total = omega.eval(0.0, t_final);
    let om: Vec<Vec<f64>> = times
        .iter()
        .map(|&s| times.iter().map(|&t| omega.eval(s, t)).collect())
        .collect();

    let mut report = VerificationReport::new("omega-controlled driver inequalities");
    let mut engine = IteratedEngine::new(&mesh);
    let mut visit = |parts: &[usize], level: &Level| {
        let n: usize = parts.iter().sum();
        if n > n_max {
            return;
        }
        let values = controlled_values(&mesh, n, level);
        let comp = Some(parts.to_vec());

        // |I(t)| <= ω(0,t)^n / n!
        let scale = om_total.powi(n as i32) / factorial(n);
        let slack = options.slack * scale;
        let mut worst: Option<(f64, f64, f64, usize)> = None;
        for (k, v) in values.iter().enumerate() {
            let lhs = v.norm();
            let rhs = om[0][k].max(0.0).powi(n as i32) / factorial(n) + slack;
            let margin = rhs - lhs;
            if worst.is_none_or(|w| margin < w.0) {
                worst = Some((margin, lhs, rhs, k));
            }
        }
        let (_, lhs, rhs, k) = worst.expect("grid nonempty");
        report.push(
            CheckRow::inequality("|I(t)| <= w(0,t)^n/n!", lhs, rhs, scale).with_witness(Witness {
                n: Some(n),
                composition: comp.clone(),
                s: Some(0.0),
                t: Some(times[k]),
                ..Witness::default()
            }),
        );

        // |I(t) − I(s)| <= ω(s,t) ω(0,T)^{n−1}/(n−1)!
        let tail = om_total.powi(n as i32 - 1) / factorial(n - 1);
        let scale = om_total * tail;
        let slack = options.slack * scale;
        let mut worst: Option<(f64, f64, f64, usize, usize)> = None;
        for a in 0..values.len() {
            for b in a..values.len() {
                let lhs = (values[b] - values[a]).norm();
                let rhs = om[a][b] * tail + slack;
                let margin = rhs - lhs;
                if worst.is_none_or(|w| margin < w.0) {
                    worst = Some((margin, lhs, rhs, a, b));
                }
            }
        }
        let (_, lhs, rhs, a, b) = worst.expect("grid nonempty");
        report.push(
            CheckRow::inequality("|I(t)-I(s)| <= w(s,t) w(0,T)^(n-1)/(n-1)!", lhs, rhs, scale)
                .with_witness(Witness {
                    n: Some(n),
                    composition: comp,
                    s: Some(times[a]),
                    t: Some(times[b]),
                    ..Witness::default()
                }),
        );
    };
    engine.for_each(n_max, &mut visit);
    // lexicographic DFS order interleaves degrees; sort rows by (n, composition)
    report.rows.sort_by(|x, y| {
        (x.witness.n, &x.witness.composition).cmp(&(y.witness.n, &y.witness.composition))
    });
    report.first_violation = report
        .rows
        .iter()
        .find(|r| r.verdict == crate::report::Verdict::Violated)
        .cloned();
    report.note(format!(
        "n_max = {n_max}, grid nodes = {}, mesh nodes = {}, relative slack = {:e}",
        times.len(),
        mesh.len(),
        options.slack
    ));
    Ok(report)
}

/// Smallest rate `c` for which `ω(s,t) = c (t − s)` satisfies both
/// controlled inequalities on the grid (without slack).
pub fn tighten_linear_rate(
    family: &DriverFamily,
    n_max: usize,
    grid: &TimeGrid,
    refinement: usize,
) -> Result<f64> {
    if n_max == 0 || n_max > COMPOSITION_CAP.min(family.truncation_level()) {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} outside 1..={}",
            COMPOSITION_CAP.min(family.truncation_level())
        )));
    }
    let mesh = Mesh::build(family, grid, refinement)?;
    let times = grid.points();
    let t_final = family.t_final();
    let mut rate: f64 = 0.0;
    let mut engine = IteratedEngine::new(&mesh);
    let mut visit = |parts: &[usize], level: &Level| {
        let n: usize = parts.iter().sum();
        if n > n_max || level.zero {
            return;
        }
        let nf = n as f64;
        let values = controlled_values(&mesh, n, level);
        for (k, v) in values.iter().enumerate().skip(1) {
            // (c t)^n / n! >= |I(t)|
            rate = rate.max((factorial(n) * v.norm()).powf(1.0 / nf) / times[k]);
        }
        for a in 0..values.len() {
            for b in a + 1..values.len() {
                // c^n (t−s) T^{n−1} / (n−1)! >= |ΔI|
                let d = (values[b] - values[a]).norm();
                let need =
                    d * factorial(n - 1) / ((times[b] - times[a]) * t_final.powi(n as i32 - 1));
                rate = rate.max(need.powf(1.0 / nf));
            }
        }
    };
    engine.for_each(n_max, &mut visit);
    Ok(rate)
}

/// Checks `ω(t,t) = 0`, `ω ≥ 0` and `ω(s,t) + ω(t,u) ≤ ω(s,u)` on all grid
/// triples `s ≤ t ≤ u`.
pub fn check_superadditive(omega: &ControlFunction, grid: &TimeGrid) -> VerificationReport {
    let pts = grid.points();
    let g = pts.len();
    let om: Vec<Vec<f64>> = pts
        .iter()
        .map(|&s| pts.iter().map(|&t| omega.eval(s, t)).collect())
        .collect();
    let scale = om[0][g - 1].abs().max(f64::MIN_POSITIVE);
    // rounding allowance for exactly additive forms
    let rounding = 1e-12 * scale;
    let mut report = VerificationReport::new("control function axioms");

    let mut diag: Option<(f64, usize)> = None;
    for k in 0..g {
        let v = om[k][k].abs();
        if diag.is_none_or(|d| v > d.0) {
            diag = Some((v, k));
        }
    }
    let (v, k) = diag.expect("grid nonempty");
    report.push(
        CheckRow::inequality("w(t,t) = 0", v, rounding, scale).with_witness(Witness {
            s: Some(pts[k]),
            t: Some(pts[k]),
            ..Witness::default()
        }),
    );

    let mut neg: Option<(f64, usize, usize)> = None;
    for a in 0..g {
        for b in a..g {
            let v = -om[a][b];
            if neg.is_none_or(|d| v > d.0) {
                neg = Some((v, a, b));
            }
        }
    }
    let (v, a, b) = neg.expect("grid nonempty");
    report.push(
        CheckRow::inequality("w(s,t) >= 0", v, rounding, scale).with_witness(Witness {
            s: Some(pts[a]),
            t: Some(pts[b]),
            ..Witness::default()
        }),
    );

    let mut worst: Option<(f64, f64, f64, [usize; 3])> = None;
    let mut violations = 0usize;
    for a in 0..g {
        for b in a..g {
            for c in b..g {
                let lhs = om[a][b] + om[b][c];
                let rhs = om[a][c] + rounding;
                let margin = rhs - lhs;
                if margin < 0.0 {
                    violations += 1;
                }
                if worst.is_none_or(|w| margin < w.0) {
                    worst = Some((margin, lhs, rhs, [a, b, c]));
                }
            }
        }
    }
    let (_, lhs, rhs, [a, b, c]) = worst.expect("grid nonempty");
    report.push(
        CheckRow::inequality("w(s,t) + w(t,u) <= w(s,u)", lhs, rhs, scale)
            .with_witness(Witness {
                s: Some(pts[a]),
                t: Some(pts[b]),
                u: Some(pts[c]),
                ..Witness::default()
            })
            .with_note(format!("{violations} violating triples")),
    );
    report
}
