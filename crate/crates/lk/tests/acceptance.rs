//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lk::commands::residual_samples;
use lk::config::output_grid;
use lk_core::analysis::quartic;
use lk_core::{
    alexander_bound_closed_form, assemble_solution, check_univalence, coefficient_bound,
    compute_alpha, control_certificate, injectivity_spot_check, lk_residual, make_piecewise_linear,
    solve_coefficients_compositions_table, solve_coefficients_picard,
    solve_coefficients_recurrence, tighten_linear_rate, verify_controlled, Complex64,
    ControlFunction, ControlOptions, DriverFamily, DriverPath, SolverOptions, TailModel, TimeGrid,
    Verdict, WeightPairing,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn beta_driver(beta: f64, m: usize) -> DriverFamily {
    DriverFamily::new(
        DriverPath::zero(1.0).unwrap(),
        vec![DriverPath::linear(1.0, c(beta, 0.0)).unwrap()],
        None,
    )
    .unwrap()
    .with_truncation(m)
    .unwrap()
}

fn x0_only(a: f64, m: usize) -> DriverFamily {
    DriverFamily::new(
        DriverPath::real(&[0.0, 1.0], &[0.0, a]).unwrap(),
        vec![],
        None,
    )
    .unwrap()
    .with_truncation(m)
    .unwrap()
}

fn mixed_two_mode(m: usize) -> DriverFamily {
    let x0 = DriverPath::real(&[0.0, 0.5, 1.0], &[0.0, 0.1, -0.05]).unwrap();
    let x1 = make_piecewise_linear(
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

fn suite(m: usize) -> Vec<(&'static str, DriverFamily)> {
    vec![
        ("zero", DriverFamily::zero(1.0, m).unwrap()),
        ("x0-only", x0_only(0.2, m)),
        ("beta", beta_driver(0.2, m)),
        ("mixed two-mode", mixed_two_mode(m)),
    ]
}

fn within_budget(elapsed: Duration, budget_secs: f64) -> bool {
    elapsed.as_secs_f64() < budget_secs
}

fn quartic_threshold() -> Outcome {
    let alpha = compute_alpha();
    let residual = quartic(alpha).abs();
    let half = alpha / 2.0;
    let pass =
        residual <= 1e-12 && 1.0 / 8.0 < half && half < 1.0 / 7.0 && (half - 0.13105).abs() <= 5e-5;
    outcome(pass, format!("alpha/2 = {half:.8}, residual {residual:e}"))
}

fn closed_form_identity() -> Outcome {
    let mut worst = 0.0f64;
    for omega in [0.05f64, 0.1, 0.13105, 0.2, 0.24] {
        let x = 2.0 * omega;
        let brute: f64 = (2..=10_000u32)
            .map(|n| {
                let n = n as f64;
                n * n * (n - 1.0) * x.powf(n - 1.0) / 4.0
            })
            .sum();
        let closed = alexander_bound_closed_form(omega).unwrap();
        worst = worst.max((closed - brute).abs());
    }
    let at_alpha = (alexander_bound_closed_form(compute_alpha() / 2.0).unwrap() - 1.0).abs();
    outcome(
        worst <= 1e-10 && at_alpha <= 1e-10,
        format!("max |closed - series| {worst:e}, |bound(alpha/2) - 1| {at_alpha:e}"),
    )
}

fn closed_form_recovery() -> Outcome {
    let grid = TimeGrid::uniform(1.0, 512).unwrap();
    let opts = SolverOptions { refinement: 256 };
    let table = solve_coefficients_recurrence(&beta_driver(0.2, 12), 12, &grid, &opts).unwrap();
    let last = grid.len() - 1;
    let beta_err = (1..=12)
        .map(|n| (table.coeff(n, last) - c(0.2f64.powi(n as i32), 0.0)).norm())
        .fold(0.0, f64::max);

    let table = solve_coefficients_recurrence(&x0_only(0.2, 12), 12, &grid, &opts).unwrap();
    let c_err = (table.prefactor()[last] - c(0.2f64.exp(), 0.0)).norm();
    let mut zero_err = 0.0f64;
    for n in 1..=12 {
        for &v in table.coeff_row(n) {
            zero_err = zero_err.max(v.norm());
        }
    }
    outcome(
        beta_err <= 1e-8 && c_err <= 1e-10 && zero_err <= 1e-10,
        format!("beta max |c_n(1) - 0.2^n| {beta_err:e}; x0-only |C(1) - e^0.2| {c_err:e}, max |c_n| {zero_err:e}"),
    )
}

fn triple_method_agreement() -> Outcome {
    const N: usize = 8;
    let grid = TimeGrid::uniform(1.0, 64).unwrap();
    let opts = SolverOptions { refinement: 64 };
    let mut worst = 0.0f64;
    let mut worst_family = "";
    for (name, fam) in suite(N) {
        let rec = solve_coefficients_recurrence(&fam, N, &grid, &opts).unwrap();
        let comp =
            solve_coefficients_compositions_table(&fam, N, &grid, WeightPairing::PrefixSums, &opts)
                .unwrap();
        let picard = solve_coefficients_picard(&fam, N, &grid, 40, &opts)
            .unwrap()
            .table;
        for gap in [
            rec.relative_gap(&comp, N, 1e-10).unwrap(),
            rec.relative_gap(&picard, N, 1e-10).unwrap(),
            comp.relative_gap(&picard, N, 1e-10).unwrap(),
        ] {
            if gap > worst {
                worst = gap;
                worst_family = name;
            }
        }
    }
    outcome(
        worst <= 1e-6,
        format!("4 families, max pairwise relative gap {worst:e} ({worst_family})"),
    )
}

fn coefficient_bound_holds() -> Outcome {
    const N: usize = 12;
    let grid = TimeGrid::uniform(1.0, 32).unwrap();
    let opts = ControlOptions::default();
    let mut checked = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for (name, fam) in suite(N) {
        let omega = match name {
            "beta" => ControlFunction::linear(0.2).unwrap(),
            _ => {
                let rate = tighten_linear_rate(&fam, N, &grid, opts.refinement).unwrap();
                ControlFunction::linear(rate).unwrap()
            }
        };
        let report = verify_controlled(&fam, &omega, N, &grid, &opts).unwrap();
        if !report.passed() {
            continue;
        }
        let omega_0t = omega.eval(0.0, 1.0);
        let table = solve_coefficients_recurrence(
            &fam,
            N,
            &grid,
            &SolverOptions {
                refinement: opts.refinement,
            },
        )
        .unwrap();
        for n in 1..=N {
            let bound = coefficient_bound(n, omega_0t) + 1e-9;
            for &v in table.coeff_row(n) {
                worst_margin = worst_margin.min(bound - v.norm());
            }
        }
        checked.push(format!("{name} (w(0,T) = {omega_0t:.4})"));
    }
    outcome(
        checked.len() == 4 && worst_margin >= 0.0,
        format!(
            "certified: {}; min margin {worst_margin:e}",
            checked.join(", ")
        ),
    )
}

fn control_certification() -> Outcome {
    let grid = TimeGrid::uniform(1.0, 64).unwrap();
    let opts = ControlOptions::default();
    let fam = beta_driver(0.2, 10);
    let exact = verify_controlled(
        &fam,
        &ControlFunction::linear(0.2).unwrap(),
        10,
        &grid,
        &opts,
    )
    .unwrap();
    let rows = exact.rows.len();
    let half = verify_controlled(
        &fam,
        &ControlFunction::linear(0.1).unwrap(),
        10,
        &grid,
        &opts,
    )
    .unwrap();
    let witness_n = half.first_violation.as_ref().and_then(|r| r.witness.n);
    outcome(
        exact.verdict == Verdict::Certified
            && rows == 2 * ((1 << 10) - 1)
            && half.verdict == Verdict::Violated
            && witness_n == Some(1),
        format!(
            "rate beta: {} over {rows} rows; rate beta/2: {} with witness n = {}",
            exact.verdict.as_str(),
            half.verdict.as_str(),
            witness_n.map_or("none".to_string(), |n| n.to_string())
        ),
    )
}

fn univalence_pipeline() -> Outcome {
    const N: usize = 12;
    let grid = TimeGrid::uniform(1.0, 512).unwrap();
    let control_grid = TimeGrid::uniform(1.0, 16).unwrap();
    let opts = SolverOptions { refinement: 64 };

    let fam = beta_driver(0.12, N);
    let omega = ControlFunction::linear(0.12).unwrap();
    let controlled = verify_controlled(&fam, &omega, 10, &control_grid, &ControlOptions::default())
        .unwrap()
        .passed();
    let table = solve_coefficients_recurrence(&fam, N, &grid, &opts).unwrap();
    let mut all_certified = true;
    let mut star_min = f64::INFINITY;
    for &t in grid.points() {
        let snap = assemble_solution(
            &table,
            t,
            TailModel::Majorant {
                omega0t: omega.eval(0.0, t),
            },
        )
        .unwrap();
        let v = check_univalence(&snap.series);
        all_certified &= v.certified();
        star_min = star_min.min(v.sampled_starlikeness_min);
    }
    let mut collisions = 0;
    for t in [0.5, 1.0] {
        let snap = assemble_solution(
            &table,
            t,
            TailModel::Majorant {
                omega0t: omega.eval(0.0, t),
            },
        )
        .unwrap();
        collisions += injectivity_spot_check(&snap.series.normalized(), 100_000, 7).collisions;
    }

    let fam = beta_driver(0.2, N);
    let omega = ControlFunction::linear(0.2).unwrap();
    let table = solve_coefficients_recurrence(&fam, N, &grid, &opts).unwrap();
    let mut never_violated = true;
    for &t in grid.points() {
        let snap = assemble_solution(
            &table,
            t,
            TailModel::Majorant {
                omega0t: omega.eval(0.0, t),
            },
        )
        .unwrap();
        let v = check_univalence(&snap.series);
        never_violated &=
            v.verdict != Verdict::Violated && v.control_certificate != Some(Verdict::Violated);
    }
    let at_02 = control_certificate(0.2);

    outcome(
        controlled
            && all_certified
            && star_min >= -1e-9
            && collisions == 0
            && at_02 == Verdict::Inconclusive
            && never_violated,
        format!(
            "w(0,T)=0.12: controlled {controlled}, certified at all {} times {all_certified}, min Re(zf'/f) {star_min:.4}, collisions {collisions}; w(0,T)=0.2: {}",
            grid.len(),
            at_02.as_str()
        ),
    )
}

fn residual_and_extension() -> Outcome {
    let z = residual_samples();
    let opts = SolverOptions { refinement: 64 };
    let mut worst_ratio = f64::INFINITY;
    for fam in [beta_driver(0.2, 12), mixed_two_mode(12)] {
        let mut last = None;
        for g in [64, 128, 256] {
            let grid = output_grid(&fam, g).unwrap();
            let table = solve_coefficients_recurrence(&fam, 12, &grid, &opts).unwrap();
            let r = lk_residual(&fam, &table, &z).unwrap().max_residual;
            if let Some(prev) = last {
                worst_ratio = worst_ratio.min(prev / r);
            }
            last = Some(r);
        }
    }
    let mut extension_ok = true;
    let mut worst_tail = 0.0f64;
    for omega in [0.05, 0.1, 0.12, 0.2, 0.3, 0.45, 0.49] {
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        let table =
            solve_coefficients_recurrence(&beta_driver(omega, 12), 12, &grid, &opts).unwrap();
        let snap = assemble_solution(&table, 1.0, TailModel::Majorant { omega0t: omega }).unwrap();
        let r = (1.0 + 1.0 / (2.0 * omega)) / 2.0;
        match snap.series.tail_bound(r) {
            Some(tail) if tail.is_finite() && r > 1.0 => worst_tail = worst_tail.max(tail),
            _ => extension_ok = false,
        }
        extension_ok &= snap.series.radius_lower_bound().certifies_extension();
    }
    outcome(
        worst_ratio >= 3.5 && extension_ok,
        format!("min residual reduction {worst_ratio:.3}; majorant tail finite for all w in (0, 1/2): {extension_ok} (max {worst_tail:e})"),
    )
}

fn deterministic_csv() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{
  "T": 1.0,
  "x0": {"times": [0, 0.5, 1], "values": [0, 0.1, -0.05]},
  "xs": [
    {"times": [0, 0.3, 0.7, 1], "re": [0, 0.03, 0.05, 0.08], "im": [0, 0.02, -0.01, 0]},
    {"times": [0, 1], "re": [0, 0.004], "im": [0, 0.003]}
  ],
  "omega": {"form": "linear", "rate": 0.12},
  "truncation": 10,
  "grid": 64,
  "methods": ["recurrence", "compositions", "picard", "stepper"],
  "injectivity_pairs": 2000
}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_lk"))
            .args(["solve", "--seed", "11", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
            .status;
        if !status.success() {
            return outcome(false, format!("lk solve exited with {status}"));
        }
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(&p).unwrap(),
                )
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    let count = outputs[0].len();
    outcome(
        count >= 4 && outputs[0] == outputs[1],
        format!(
            "{count} CSV files byte-identical across two runs: {}",
            outputs[0] == outputs[1]
        ),
    )
}

type Criterion = (&'static str, f64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("quartic threshold", 1.0, quartic_threshold),
        ("closed-form/series identity", 1.0, closed_form_identity),
        ("closed-form solution recovery", 5.0, closed_form_recovery),
        ("triple-method agreement", 30.0, triple_method_agreement),
        ("coefficient bound", f64::INFINITY, coefficient_bound_holds),
        ("control certification", 60.0, control_certification),
        ("univalence pipeline", f64::INFINITY, univalence_pipeline),
        (
            "residual and extension",
            f64::INFINITY,
            residual_and_extension,
        ),
        ("determinism", f64::INFINITY, deterministic_csv),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => {
                let in_time = within_budget(elapsed, budget);
                let detail = if in_time {
                    o.detail
                } else {
                    format!("{} [over the {budget} s budget]", o.detail)
                };
                (o.pass && in_time, detail)
            }
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {detail} ({:.2} s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
