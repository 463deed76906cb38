//! JSON run configuration.
//!
//! The driver family sits at the top level (`T`, `x0`, `xs`, `decay_ratio`)
//! next to the control function `omega` and the run parameters:
//!
//! ```json
//! {
//!   "T": 1.0,
//!   "x0": {"times": [0, 1], "values": [0, 0]},
//!   "xs": [{"times": [0, 1], "re": [0, 0.1], "im": [0, 0]}],
//!   "omega": {"form": "linear", "rate": 0.1},
//!   "truncation": 12,
//!   "grid": 512
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use lk_core::control::{ControlTable, COMPOSITION_CAP};
use lk_core::drivers::DEFAULT_TRUNCATION;
use lk_core::{
    make_piecewise_linear, Complex64, ControlFunction, DriverFamily, DriverPath, Method, TimeGrid,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealPathSpec {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexPathSpec {
    pub times: Vec<f64>,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase", deny_unknown_fields)]
pub enum OmegaSpec {
    Linear {
        rate: f64,
    },
    Table {
        s: Vec<f64>,
        t: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Recurrence,
    Compositions,
    Picard,
    Stepper,
}

impl MethodName {
    pub fn method(self) -> Method {
        match self {
            MethodName::Recurrence => Method::Recurrence,
            MethodName::Compositions => Method::Compositions,
            MethodName::Picard => Method::Picard,
            MethodName::Stepper => Method::Stepper,
        }
    }
}

fn default_truncation() -> usize {
    12
}
fn default_grid() -> usize {
    512
}
fn default_refinement() -> usize {
    64
}
fn default_methods() -> Vec<MethodName> {
    vec![MethodName::Recurrence]
}
fn default_picard_iterations() -> usize {
    40
}
fn default_injectivity_pairs() -> usize {
    10_000
}
fn default_residual_tolerance() -> f64 {
    1e-6
}
fn default_stepper_tolerance() -> f64 {
    1e-6
}
fn default_slack() -> f64 {
    lk_core::control::DEFAULT_SLACK
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "T")]
    pub t_final: f64,
    pub x0: RealPathSpec,
    #[serde(default)]
    pub xs: Vec<ComplexPathSpec>,
    #[serde(default)]
    pub decay_ratio: Option<f64>,
    /// Family truncation level `M`; missing modes are zero paths.
    #[serde(default)]
    pub truncation_level: Option<usize>,
    pub omega: OmegaSpec,
    /// Series order `N`.
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Number of uniform grid intervals on `[0, T]`; driver breakpoints are
    /// added as extra nodes.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_refinement")]
    pub refinement: usize,
    /// Largest `n` checked by verify-control; defaults to `min(10, M)`.
    #[serde(default)]
    pub composition_cap: Option<usize>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodName>,
    #[serde(default = "default_picard_iterations")]
    pub picard_iterations: usize,
    #[serde(default = "default_injectivity_pairs")]
    pub injectivity_pairs: usize,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_residual_tolerance")]
    pub residual_tolerance: f64,
    #[serde(default = "default_stepper_tolerance")]
    pub stepper_tolerance: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

/// Validated configuration with the core objects built.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub family: DriverFamily,
    pub omega: ControlFunction,
    pub grid: TimeGrid,
    pub composition_cap: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn family(&self) -> Result<DriverFamily, CliError> {
        let x0 = DriverPath::real(&self.x0.times, &self.x0.values).map_err(config)?;
        let xs = self
            .xs
            .iter()
            .enumerate()
            .map(|(i, p)| complex_path(p).map_err(|e| CliError::Config(format!("xs[{i}]: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let m = self
            .truncation_level
            .unwrap_or(DEFAULT_TRUNCATION)
            .max(xs.len());
        DriverFamily::new(x0, xs, self.decay_ratio)
            .and_then(|f| f.with_truncation(m))
            .map_err(config)
    }

    pub fn omega(&self) -> Result<ControlFunction, CliError> {
        match &self.omega {
            OmegaSpec::Linear { rate } => ControlFunction::linear(*rate),
            OmegaSpec::Table { s, t, values } => {
                ControlTable::new(s.clone(), t.clone(), values.clone()).map(ControlFunction::Table)
            }
        }
        .map_err(config)
    }

    /// Builds the family, ω and grid and checks the run parameters.
    pub fn validate(self) -> Result<Run, CliError> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(CliError::Config(format!(
                "T must be positive, got {}",
                self.t_final
            )));
        }
        for (name, v) in [
            ("truncation", self.truncation),
            ("grid", self.grid),
            ("refinement", self.refinement),
            ("composition_cap", self.composition_cap.unwrap_or(1)),
            ("picard_iterations", self.picard_iterations),
            ("injectivity_pairs", self.injectivity_pairs),
        ] {
            if v == 0 {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        for (name, v) in [
            ("slack", self.slack),
            ("residual_tolerance", self.residual_tolerance),
            ("stepper_tolerance", self.stepper_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("methods must not be empty".into()));
        }
        let family = self.family()?;
        let m = family.truncation_level();
        if self.truncation > m {
            return Err(CliError::Config(format!(
                "truncation N = {} exceeds the family truncation level M = {m}",
                self.truncation
            )));
        }
        let cap = COMPOSITION_CAP.min(m);
        let composition_cap = self.composition_cap.unwrap_or(10.min(m));
        if composition_cap > cap {
            return Err(CliError::Config(format!(
                "composition_cap = {composition_cap} exceeds {cap}"
            )));
        }
        if self.methods.contains(&MethodName::Compositions) && self.truncation > COMPOSITION_CAP {
            return Err(CliError::Config(format!(
                "the compositions method is limited to N <= {COMPOSITION_CAP}"
            )));
        }
        let omega = self.omega()?;
        let grid = output_grid(&family, self.grid)?;
        Ok(Run {
            config: self,
            family,
            omega,
            grid,
            composition_cap,
        })
    }
}

impl Run {
    pub fn omega_0t(&self) -> f64 {
        self.omega.eval(0.0, self.config.t_final)
    }

    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        cli.map(Path::to_path_buf)
            .or_else(|| self.config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("lk-out"))
    }
}

/// Uniform grid with `intervals` steps plus every driver breakpoint, so the
/// stored coefficients are smooth between consecutive nodes.
pub fn output_grid(family: &DriverFamily, intervals: usize) -> Result<TimeGrid, CliError> {
    TimeGrid::uniform(family.t_final(), intervals)
        .and_then(|g| g.union(&family.breakpoints()))
        .map_err(config)
}

fn complex_path(p: &ComplexPathSpec) -> lk_core::Result<DriverPath> {
    let im = p.im.clone().unwrap_or_else(|| vec![0.0; p.re.len()]);
    if im.len() != p.re.len() {
        return Err(lk_core::Error::InvalidPath(format!(
            "re has {} values, im has {}",
            p.re.len(),
            im.len()
        )));
    }
    let values: Vec<Complex64> =
        p.re.iter()
            .zip(&im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
    make_piecewise_linear(&p.times, &values)
}

fn config(e: lk_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BETA: &str = r#"{
        "T": 1.0,
        "x0": {"times": [0, 1], "values": [0, 0]},
        "xs": [{"times": [0, 1], "re": [0, 0.1]}],
        "omega": {"form": "linear", "rate": 0.1}
    }"#;

    #[test]
    fn defaults_fill_the_run_fields() {
        let run = RunConfig::from_json(BETA).unwrap().validate().unwrap();
        assert_eq!(run.config.truncation, 12);
        assert_eq!(run.grid.len(), 513);
        assert_eq!(run.family.truncation_level(), DEFAULT_TRUNCATION);
        assert!((run.omega_0t() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn truncation_above_the_family_level_is_rejected() {
        let mut cfg = RunConfig::from_json(BETA).unwrap();
        cfg.truncation_level = Some(4);
        cfg.truncation = 6;
        let err = cfg.validate().unwrap_err();
        assert!(err
            .to_string()
            .contains("exceeds the family truncation level"));
    }

    #[test]
    fn unknown_fields_and_bad_paths_are_config_errors() {
        assert!(RunConfig::from_json(r#"{"T": 1, "bogus": 3}"#).is_err());
        let bad = BETA.replace(r#""values": [0, 0]"#, r#""values": [0]"#);
        let err = RunConfig::from_json(&bad).unwrap().validate().unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn table_omega_parses() {
        let text = BETA.replace(
            r#"{"form": "linear", "rate": 0.1}"#,
            r#"{"form": "table", "s": [0, 1], "t": [0, 1], "values": [0, 0.1, 0, 0]}"#,
        );
        let run = RunConfig::from_json(&text).unwrap().validate().unwrap();
        assert!((run.omega_0t() - 0.1).abs() < 1e-15);
    }
}
