//! Numerical core for the ω-controlled Loewner–Kufarev equation
//!
//! ```text
//! f_t(z) − z = ∫₀ᵗ z f_s′(z) { dx₀(s) + dξ(x, z)_s },   ξ(x, z)_t = Σ xₙ(t) zⁿ
//! ```
//!
//! The solution is carried as a truncated Taylor expansion
//! `f_t(z) = C(t)(z + c₁(t)z² + c₂(t)z³ + …)`. This crate computes `C` and
//! the `cₙ` by several independent routes, certifies that the driving paths
//! are controlled by a control function `ω`, and evaluates the resulting
//! coefficient bound, extension radius and univalence criterion.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the
//! configuration schema and the command-line front end live in the `lk`
//! companion crate.
//!
//! Module map:
//!
//! * [`drivers`]: piecewise-linear driving paths and Stieltjes quadrature.
//! * [`control`]: control functions, compositions and iterated integrals.
//! * [`series`]: truncated series values and tail majorants.
//! * [`solver`]: coefficient tables (recurrence, composition sum, Picard).
//! * [`analysis`]: the quartic threshold, coefficient bound, univalence.
//! * [`oracle`]: integral-equation residuals and an RK4 cross-check.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod analysis;
pub mod control;
pub mod drivers;
mod error;
mod mesh;
pub mod oracle;
pub mod report;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use analysis::{
    alexander_bound_closed_form, check_univalence, coefficient_bound, compute_alpha,
    control_certificate, injectivity_spot_check, InjectivityReport, UnivalenceVerdict,
};
pub use control::{
    check_superadditive, enumerate_compositions, iterated_integral, tighten_linear_rate,
    verify_controlled, Composition, ControlFunction, ControlOptions,
};
pub use drivers::{
    check_driver_conditions, eval_xi, make_piecewise_linear, stieltjes_integral, total_variation,
    DriverFamily, DriverPath, TimeGrid,
};
pub use oracle::{explicit_stepper, explicit_stepper_on, lk_residual, ResidualReport};
pub use report::{CheckRow, Verdict, VerificationReport, Witness};
pub use series::{RadiusBound, TailModel, TruncatedSeries};
pub use solver::{
    assemble_solution, solve_c, solve_coefficients_compositions,
    solve_coefficients_compositions_table, solve_coefficients_picard,
    solve_coefficients_recurrence, CoefficientTable, Method, PicardOutcome, Snapshot,
    SolverOptions, WeightPairing,
};
