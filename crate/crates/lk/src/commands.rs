//! The five subcommands. Each writes its files under the output directory,
//! prints a short summary and returns whether its checks passed.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use lk_core::analysis::UnivalenceVerdict;
use lk_core::report::VerificationReport;
use lk_core::{
    assemble_solution, check_driver_conditions, check_superadditive, check_univalence,
    compute_alpha, control_certificate, explicit_stepper_on, injectivity_spot_check, lk_residual,
    solve_coefficients_compositions_table, solve_coefficients_picard,
    solve_coefficients_recurrence, verify_controlled, CoefficientTable, Complex64, ControlOptions,
    InjectivityReport, RadiusBound, SolverOptions, TailModel, TimeGrid, Verdict, WeightPairing,
};
use serde::Serialize;

use crate::config::{output_grid, MethodName, Run};
use crate::error::CliError;
use crate::output::{self, SCHEMA_VERSION};

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    Failed,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Passed => 0,
            Status::Failed => 1,
        }
    }
}

pub const BOUNDARY_ANGLES: usize = 512;
pub const EXTENSION_CAP: f64 = 1.05;

fn solver_options(run: &Run) -> SolverOptions {
    SolverOptions {
        refinement: run.config.refinement,
    }
}

fn solve_with(
    run: &Run,
    method: MethodName,
    grid: &TimeGrid,
) -> Result<(CoefficientTable, Option<f64>), CliError> {
    let n = run.config.truncation;
    let opts = solver_options(run);
    let family = &run.family;
    Ok(match method {
        MethodName::Recurrence => (solve_coefficients_recurrence(family, n, grid, &opts)?, None),
        MethodName::Compositions => (
            solve_coefficients_compositions_table(
                family,
                n,
                grid,
                WeightPairing::PrefixSums,
                &opts,
            )?,
            None,
        ),
        MethodName::Picard => {
            let out =
                solve_coefficients_picard(family, n, grid, run.config.picard_iterations, &opts)?;
            let gap = out.max_gap();
            (out.table, Some(gap))
        }
        MethodName::Stepper => (
            explicit_stepper_on(family, n, grid, run.config.refinement)?,
            None,
        ),
    })
}

fn tail_at(run: &Run, t: f64) -> TailModel {
    TailModel::Majorant {
        omega0t: run.omega.eval(0.0, t),
    }
}

#[derive(Debug, Serialize)]
struct RadiusSummary {
    kind: &'static str,
    value: f64,
    certifies_extension: bool,
}

impl From<RadiusBound> for RadiusSummary {
    fn from(b: RadiusBound) -> Self {
        let kind = match b {
            RadiusBound::Unbounded => "unbounded",
            RadiusBound::Majorant(_) => "majorant",
            RadiusBound::Empirical(_) => "empirical",
        };
        RadiusSummary {
            kind,
            value: b.value(),
            certifies_extension: b.certifies_extension(),
        }
    }
}

#[derive(Debug, Serialize)]
struct MethodSummary {
    method: &'static str,
    file: String,
    relative_gap_to_primary: Option<f64>,
    picard_last_update: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TimeVerdict {
    t: f64,
    omega_0t: f64,
    #[serde(flatten)]
    univalence: UnivalenceVerdict,
}

#[derive(Debug, Serialize)]
struct Extension {
    radius: f64,
    tail_bound: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    schema_version: u32,
    command: &'static str,
    t_final: f64,
    truncation: usize,
    truncation_level: usize,
    grid_intervals: usize,
    refinement: usize,
    seed: u64,
    omega_0t: f64,
    alpha_half: f64,
    certification: &'static str,
    certification_note: &'static str,
    control_certificate: Verdict,
    radius_bound: RadiusSummary,
    extension: Option<Extension>,
    methods: Vec<MethodSummary>,
    driver_conditions: VerificationReport,
    final_injectivity: InjectivityReport,
    univalence: Vec<TimeVerdict>,
}

fn method_file(i: usize, method: MethodName) -> String {
    if i == 0 {
        "coefficients.csv".to_string()
    } else {
        format!("coefficients.{}.csv", method.method().as_str())
    }
}

/// Solves with every requested method and writes the coefficient tables and
/// `summary.json`. The first method is the primary one.
pub fn solve(run: &Run, out: &Path) -> Result<Status, CliError> {
    let cfg = &run.config;
    let n = cfg.truncation;
    let mut tables = Vec::new();
    let mut methods = Vec::new();
    for (i, &method) in cfg.methods.iter().enumerate() {
        let (table, picard) = solve_with(run, method, &run.grid)?;
        let file = method_file(i, method);
        output::write(out, &file, &output::coefficients_csv(&table)?)?;
        let gap = match tables.first() {
            Some(primary) => Some(table.relative_gap(primary, n, 1e-10)?),
            None => None,
        };
        methods.push(MethodSummary {
            method: table.method().as_str(),
            file,
            relative_gap_to_primary: gap,
            picard_last_update: picard,
        });
        tables.push(table);
    }
    let primary = &tables[0];

    let omega_0t = run.omega_0t();
    let alpha_half = compute_alpha() / 2.0;
    let mut univalence = Vec::with_capacity(run.grid.len());
    for &t in run.grid.points() {
        let snap = assemble_solution(primary, t, tail_at(run, t))?;
        univalence.push(TimeVerdict {
            t,
            omega_0t: run.omega.eval(0.0, t),
            univalence: check_univalence(&snap.series),
        });
    }
    let t_final = cfg.t_final;
    let last = assemble_solution(primary, t_final, tail_at(run, t_final))?;
    output::write(
        out,
        "series_final.csv",
        &output::series_csv(&last.series, t_final)?,
    )?;
    let radius = last.series.radius_lower_bound();
    let extension = (omega_0t < 0.5).then(|| {
        let r = if omega_0t > 0.0 {
            (1.0 + 1.0 / (2.0 * omega_0t)) / 2.0
        } else {
            EXTENSION_CAP
        };
        Extension {
            radius: r,
            tail_bound: last.series.tail_bound(r),
        }
    });
    let final_injectivity =
        injectivity_spot_check(&last.series.normalized(), cfg.injectivity_pairs, cfg.seed);

    let all_certified = univalence.iter().all(|u| u.univalence.certified());
    let (certification, certification_note) = if omega_0t >= 0.5 {
        (
            "not certified",
            "omega(0,T) >= 1/2: the coefficient majorant does not converge on the disk",
        )
    } else if all_certified {
        ("certified", "every grid time passes the coefficient criterion; the tail bound assumes the driver is controlled by omega (see verify-control)")
    } else {
        ("inconclusive", "a sufficient condition failed at some grid time; this is not evidence against univalence")
    };

    let summary = SolveSummary {
        schema_version: SCHEMA_VERSION,
        command: "solve",
        t_final,
        truncation: n,
        truncation_level: run.family.truncation_level(),
        grid_intervals: cfg.grid,
        refinement: cfg.refinement,
        seed: cfg.seed,
        omega_0t,
        alpha_half,
        certification,
        certification_note,
        control_certificate: control_certificate(omega_0t),
        radius_bound: radius.into(),
        extension,
        methods,
        driver_conditions: check_driver_conditions(&run.family),
        final_injectivity,
        univalence,
    };
    output::write(out, "summary.json", &output::to_json(&summary)?)?;

    println!("omega(0,T)          {}", omega_0t);
    println!("alpha/2             {}", alpha_half);
    println!("certification       {certification}");
    println!(
        "control certificate {}",
        summary.control_certificate.as_str()
    );
    println!(
        "radius bound        {} ({})",
        summary.radius_bound.value, summary.radius_bound.kind
    );
    for m in &summary.methods {
        match m.relative_gap_to_primary {
            Some(g) => println!("method {:<12} {} (gap {g:e})", m.method, m.file),
            None => println!("method {:<12} {}", m.method, m.file),
        }
    }
    println!("wrote {}", out.display());
    Ok(Status::Passed)
}

#[derive(Debug, Serialize)]
struct ControlReportFile {
    schema_version: u32,
    command: &'static str,
    omega_0t: f64,
    n_max: usize,
    grid_intervals: usize,
    refinement: usize,
    slack: f64,
    verdict: Verdict,
    superadditivity: VerificationReport,
    controlled: VerificationReport,
}

fn describe_violation(report: &VerificationReport) {
    if let Some(row) = &report.first_violation {
        let w = &row.witness;
        let mut at = Vec::new();
        if let Some(n) = w.n {
            at.push(format!("n={n}"));
        }
        if let Some(c) = &w.composition {
            at.push(format!("composition={c:?}"));
        }
        for (name, v) in [("s", w.s), ("t", w.t), ("u", w.u)] {
            if let Some(v) = v {
                at.push(format!("{name}={v}"));
            }
        }
        println!(
            "  first violation: {}: lhs {:e} > rhs {:e} at {}",
            row.check,
            row.lhs,
            row.rhs,
            at.join(" ")
        );
    }
}

/// Super-additivity of ω and both controlled inequalities up to the
/// composition cap. Fails on any violation.
pub fn verify_control(run: &Run, out: &Path) -> Result<Status, CliError> {
    let cfg = &run.config;
    let superadditivity = check_superadditive(&run.omega, &run.grid);
    let options = ControlOptions {
        refinement: cfg.refinement,
        slack: cfg.slack,
    };
    let controlled = verify_controlled(
        &run.family,
        &run.omega,
        run.composition_cap,
        &run.grid,
        &options,
    )?;
    let verdict = superadditivity.verdict.and(controlled.verdict);
    let file = ControlReportFile {
        schema_version: SCHEMA_VERSION,
        command: "verify-control",
        omega_0t: run.omega_0t(),
        n_max: run.composition_cap,
        grid_intervals: cfg.grid,
        refinement: cfg.refinement,
        slack: cfg.slack,
        verdict,
        superadditivity,
        controlled,
    };
    output::write(out, "control_report.json", &output::to_json(&file)?)?;
    println!("superadditivity  {}", file.superadditivity.verdict.as_str());
    describe_violation(&file.superadditivity);
    println!(
        "controlled n<={}  {}",
        file.n_max,
        file.controlled.verdict.as_str()
    );
    describe_violation(&file.controlled);
    println!("verdict          {}", verdict.as_str());
    Ok(if verdict == Verdict::Violated {
        Status::Failed
    } else {
        Status::Passed
    })
}

pub const ALPHA_RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Prints α, α/2, the quartic residual and the bracket check.
pub fn alpha() -> Status {
    let a = compute_alpha();
    let residual = lk_core::analysis::quartic(a).abs();
    let half = a / 2.0;
    let bracket = 1.0 / 8.0 < half && half < 1.0 / 7.0;
    println!("alpha            {a:.15}");
    println!("alpha/2          {half:.15}");
    println!("quartic residual {residual:e}");
    println!("1/8 < alpha/2 < 1/7  {bracket}");
    if residual <= ALPHA_RESIDUAL_TOLERANCE && bracket {
        Status::Passed
    } else {
        Status::Failed
    }
}

/// Largest radius `boundary` samples without `--force`.
pub fn permitted_radius(bound: RadiusBound) -> f64 {
    match bound {
        RadiusBound::Unbounded => EXTENSION_CAP,
        RadiusBound::Majorant(r) if r > 1.0 => r.min(EXTENSION_CAP),
        _ => 1.0,
    }
}

#[derive(Debug, Serialize)]
struct BoundaryTime {
    t: f64,
    radius_bound: RadiusSummary,
    permitted_radius: f64,
    svg: String,
}

#[derive(Debug, Serialize)]
struct BoundaryFile {
    schema_version: u32,
    command: &'static str,
    angles: usize,
    radii: Vec<f64>,
    forced: bool,
    times: Vec<BoundaryTime>,
}

/// Images of the circles `|z| = r` under `f_t`, as `boundary.csv` and one
/// SVG per time. Radii at or beyond the permitted radius need `force`.
pub fn boundary(
    run: &Run,
    out: &Path,
    times: &[f64],
    radii: &[f64],
    force: bool,
) -> Result<Status, CliError> {
    if times.is_empty() || radii.is_empty() {
        return Err(CliError::Usage(
            "boundary needs at least one time and one radius".into(),
        ));
    }
    let t_final = run.config.t_final;
    if let Some(t) = times.iter().find(|t| !(0.0..=t_final).contains(*t)) {
        return Err(CliError::Usage(format!("time {t} outside [0, {t_final}]")));
    }
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(CliError::Usage(format!("radius {r} must be positive")));
    }
    let (table, _) = solve_with(run, run.config.methods[0], &run.grid)?;
    let mut snaps = Vec::with_capacity(times.len());
    for &t in times {
        let snap = assemble_solution(&table, t, tail_at(run, t))?;
        let bound = snap.series.radius_lower_bound();
        let limit = permitted_radius(bound);
        if !force {
            if let Some(r) = radii.iter().find(|&&r| r >= limit) {
                return Err(CliError::Refused(format!(
                    "radius {r} at t = {t} is not below the permitted radius {limit} (radius bound {}); pass --force to sample anyway",
                    bound.value()
                )));
            }
        }
        snaps.push((t, snap, bound, limit));
    }

    let mut rows: Vec<[String; 6]> = Vec::new();
    let mut entries = Vec::new();
    for (i, (t, snap, bound, limit)) in snaps.into_iter().enumerate() {
        let mut curves = Vec::new();
        for &r in radii {
            let mut pts = Vec::with_capacity(BOUNDARY_ANGLES);
            for k in 0..BOUNDARY_ANGLES {
                let theta = TAU * k as f64 / BOUNDARY_ANGLES as f64;
                let w = snap.series.eval(Complex64::from_polar(r, theta));
                rows.push([
                    output::num(t),
                    output::num(r),
                    k.to_string(),
                    output::num(theta),
                    output::num(w.re),
                    output::num(w.im),
                ]);
                pts.push([w.re, w.im]);
            }
            curves.push((format!("r = {r}"), pts));
        }
        let svg = format!("boundary_{i}.svg");
        output::write(
            out,
            &svg,
            &output::polyline_svg(&format!("f_t(|z| = r), t = {t}"), &curves),
        )?;
        entries.push(BoundaryTime {
            t,
            radius_bound: bound.into(),
            permitted_radius: limit,
            svg,
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(["t", "r", "k", "theta", "Re f", "Im f"])
        .map_err(csv_err)?;
    for row in &rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Serialize(e.to_string()))?;
    output::write(out, "boundary.csv", &String::from_utf8_lossy(&bytes))?;
    let file = BoundaryFile {
        schema_version: SCHEMA_VERSION,
        command: "boundary",
        angles: BOUNDARY_ANGLES,
        radii: radii.to_vec(),
        forced: force,
        times: entries,
    };
    output::write(out, "boundary.json", &output::to_json(&file)?)?;
    println!(
        "wrote {} curves to {}",
        times.len() * radii.len(),
        out.display()
    );
    Ok(Status::Passed)
}

/// Sample points on the rings `|z| = 0.25` and `|z| = 0.5` plus the origin.
pub fn residual_samples() -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0)];
    for r in [0.25, 0.5] {
        for k in 0..8 {
            z.push(Complex64::from_polar(r, PI * k as f64 / 4.0 + PI / 8.0));
        }
    }
    z
}

#[derive(Debug, Serialize)]
struct ResidualFile {
    schema_version: u32,
    command: &'static str,
    method: &'static str,
    grid_intervals: usize,
    max_residual: f64,
    max_residual_doubled: f64,
    reduction_ratio: Option<f64>,
    stepper_gap: f64,
    residual_tolerance: f64,
    stepper_tolerance: f64,
    verdict: Verdict,
}

/// Residual of the integral equation at the configured grid and at twice
/// its resolution, and the sup gap to the RK4 stepper. Fails if the doubled
/// residual or the stepper gap exceeds its tolerance.
pub fn residual(run: &Run, out: &Path) -> Result<Status, CliError> {
    let cfg = &run.config;
    let method = cfg.methods[0];
    let z = residual_samples();
    let (coarse, _) = solve_with(run, method, &run.grid)?;
    let doubled_grid = output_grid(&run.family, 2 * cfg.grid)?;
    let (fine, _) = solve_with(run, method, &doubled_grid)?;
    let r1 = lk_residual(&run.family, &coarse, &z)?;
    let r2 = lk_residual(&run.family, &fine, &z)?;
    let stepper = explicit_stepper_on(&run.family, cfg.truncation, &run.grid, cfg.refinement)?;
    let stepper_gap = coarse.sup_gap(&stepper, cfg.truncation)?;
    let ratio = (r2.max_residual > 0.0).then(|| r1.max_residual / r2.max_residual);
    let ok = r2.max_residual <= cfg.residual_tolerance && stepper_gap <= cfg.stepper_tolerance;
    let file = ResidualFile {
        schema_version: SCHEMA_VERSION,
        command: "residual",
        method: coarse.method().as_str(),
        grid_intervals: cfg.grid,
        max_residual: r1.max_residual,
        max_residual_doubled: r2.max_residual,
        reduction_ratio: ratio,
        stepper_gap,
        residual_tolerance: cfg.residual_tolerance,
        stepper_tolerance: cfg.stepper_tolerance,
        verdict: if ok {
            Verdict::Certified
        } else {
            Verdict::Violated
        },
    };
    output::write(out, "residual.csv", &output::residual_csv(&r2)?)?;
    output::write(out, "residual.json", &output::to_json(&file)?)?;
    println!("max residual          {:e}", file.max_residual);
    println!("max residual (2x grid) {:e}", file.max_residual_doubled);
    match ratio {
        Some(q) => println!("reduction ratio       {q:.3}"),
        None => println!("reduction ratio       n/a (zero residual)"),
    }
    println!("stepper gap           {stepper_gap:e}");
    println!("verdict               {}", file.verdict.as_str());
    Ok(if ok { Status::Passed } else { Status::Failed })
}
