//! Run configuration: JSON schema, parsing and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use crossing_core::normalform::Solver;
use crossing_core::schrodinger::CrossingPoint;
use crossing_core::sweep::SweepTolerances;
use crossing_core::Bump;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Predict,
    SolveModel,
    SolveSchrodinger,
    Sweep,
    Verify,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Predict => "predict",
            Mode::SolveModel => "solve-model",
            Mode::SolveSchrodinger => "solve-schrodinger",
            Mode::Sweep => "sweep",
            Mode::Verify => "verify",
        };
        f.write_str(s)
    }
}

fn default_bump() -> Bump {
    Bump::new(1.0, 0.2, 0.6)
}

fn default_model_interval() -> (f64, f64) {
    (-1.0, 1.0)
}

fn default_samples() -> f64 {
    32.0
}

fn default_unit() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_max_m() -> u32 {
    8
}

/// Reduced model `hD - f(x)` coupled by bumps. Give either `f` (coefficients
/// in increasing degree) or `m` for `f = x^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub f: Option<Vec<f64>>,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default = "default_bump")]
    pub r1: Bump,
    #[serde(default = "default_bump")]
    pub r2: Bump,
    #[serde(default = "default_model_interval")]
    pub interval: (f64, f64),
    #[serde(default)]
    pub solver: Solver,
    #[serde(default = "default_samples")]
    pub samples_per_period: f64,
}

/// Two-level Schrodinger system. Potentials are polynomial coefficients in
/// `x`; the crossing sits at `x0` and `interval` is given in the same
/// coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodingerConfig {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    #[serde(default = "default_bump")]
    pub w: Bump,
    pub e0: f64,
    pub interval: (f64, f64),
    #[serde(default)]
    pub x0: f64,
    /// `plus` or `minus` for E0 > 0, `origin` for E0 = 0. Defaults to the
    /// natural choice for the energy.
    #[serde(default)]
    pub point: Option<CrossingPoint>,
    #[serde(default = "default_samples")]
    pub samples_per_period: f64,
}

/// General symbols given as `[i, j, c]` terms of `c x^i xi^j`, crossing at
/// the origin. Only usable with `predict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolsConfig {
    pub p1: Vec<(u32, u32, f64)>,
    pub p2: Vec<(u32, u32, f64)>,
    /// Principal couplings at the crossing as `[re, im]`.
    #[serde(default = "default_unit")]
    pub q1: [f64; 2],
    #[serde(default = "default_unit")]
    pub q2: [f64; 2],
    #[serde(default = "default_max_m")]
    pub max_m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemConfig {
    Model(ModelConfig),
    Schrodinger(SchrodingerConfig),
    Symbols(SymbolsConfig),
}

/// Either explicit `values` or a geometric grid `hi`, `lo`, `points`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HGrid {
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// CSV rows; `--out` takes precedence.
    #[serde(default)]
    pub csv: Option<PathBuf>,
    /// Copy of the JSON summary printed on stdout.
    #[serde(default)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must agree with the subcommand when present.
    #[serde(default)]
    pub mode: Option<Mode>,
    pub problem: ProblemConfig,
    /// Single h for `predict` and the `solve-*` modes.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub h_grid: Option<HGrid>,
    #[serde(default)]
    pub tolerances: SweepTolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn finite_all(name: &str, vs: &[f64]) -> Result<(), CliError> {
    if vs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite")))
    }
}

impl HGrid {
    pub fn resolve(&self) -> Result<Vec<f64>, CliError> {
        match (&self.values, self.hi, self.lo, self.points) {
            (Some(v), None, None, None) => {
                for h in v {
                    positive("h", *h)?;
                }
                Ok(v.clone())
            }
            (None, Some(hi), Some(lo), Some(n)) => {
                positive("h_grid.hi", hi)?;
                positive("h_grid.lo", lo)?;
                crossing_core::sweep::geometric_h_grid(hi, lo, n).map_err(|e| CliError::Config(format!("h_grid: {e}")))
            }
            _ => Err(CliError::Config(
                "h_grid needs either `values` or all of `hi`, `lo`, `points`".into(),
            )),
        }
    }
}

impl RunConfig {
    /// Checks everything that can be checked without building the problem.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(h) = self.h {
            positive("h", h)?;
        }
        if let Some(g) = &self.h_grid {
            g.resolve()?;
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.exponent", t.exponent),
            ("tolerances.prefactor", t.prefactor),
            ("tolerances.phase", t.phase),
            ("tolerances.diagonal_below", t.diagonal_below),
            ("tolerances.diagonal_above", t.diagonal_above),
            ("tolerances.zero_signal", t.zero_signal),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!(
                    "{name} must be a finite non-negative number, got {v}"
                )));
            }
        }
        match &self.problem {
            ProblemConfig::Model(m) => {
                match (&m.f, m.m) {
                    (Some(f), None) => finite_all("problem.f", f)?,
                    (None, Some(k)) if k >= 1 => {}
                    (None, Some(_)) => return Err(CliError::Config("problem.m must be at least 1".into())),
                    _ => {
                        return Err(CliError::Config(
                            "model problem needs exactly one of `f` and `m`".into(),
                        ))
                    }
                }
                finite_all("problem.interval", &[m.interval.0, m.interval.1])?;
            }
            ProblemConfig::Schrodinger(s) => {
                finite_all("problem.v1", &s.v1)?;
                finite_all("problem.v2", &s.v2)?;
                finite_all("problem.e0", &[s.e0, s.x0, s.interval.0, s.interval.1])?;
                if s.e0 < 0.0 {
                    return Err(CliError::Config(format!(
                        "problem.e0 must be non-negative, got {}",
                        s.e0
                    )));
                }
            }
            ProblemConfig::Symbols(s) => {
                finite_all("problem.q1", &s.q1)?;
                finite_all("problem.q2", &s.q2)?;
            }
        }
        Ok(())
    }
}

/// Reads, deserializes and validates a config file. Errors name the
/// offending key path.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Config(e.inner().to_string())
        } else {
            CliError::Config(format!("{path}: {}", e.inner()))
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_model_config_gets_defaults() {
        let cfg = parse_config_str(r#"{"problem": {"kind": "model", "m": 1}}"#).unwrap();
        let ProblemConfig::Model(m) = &cfg.problem else {
            panic!()
        };
        assert_eq!(m.interval, (-1.0, 1.0));
        assert_eq!(m.r1, default_bump());
        assert_eq!(m.solver, Solver::Ode);
        assert_eq!(cfg.tolerances, SweepTolerances::default());
        assert!(cfg.h.is_none() && cfg.mode.is_none());
    }

    #[test]
    fn negative_h_is_rejected() {
        let e = parse_config_str(r#"{"problem": {"kind": "model", "m": 1}, "h": -0.01}"#).unwrap_err();
        assert!(e.to_string().contains("h must be positive"), "{e}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = parse_config_str(r#"{"problem": {"kind": "model", "m": 1}, "hh": 0.01}"#).unwrap_err();
        assert!(e.to_string().contains("hh"), "{e}");
        let e = parse_config_str(r#"{"problem": {"kind": "model", "m": 1}, "tolerances": {"phse": 1}}"#).unwrap_err();
        assert!(
            e.to_string().contains("tolerances") && e.to_string().contains("phse"),
            "{e}"
        );
    }

    #[test]
    fn type_errors_carry_the_path() {
        let e = parse_config_str(r#"{"problem": {"kind": "model", "m": 1}, "h_grid": {"hi": "big"}}"#).unwrap_err();
        assert!(e.to_string().contains("h_grid.hi"), "{e}");
    }

    #[test]
    fn model_needs_one_of_f_and_m() {
        assert!(parse_config_str(r#"{"problem": {"kind": "model"}}"#).is_err());
        assert!(parse_config_str(r#"{"problem": {"kind": "model", "m": 1, "f": [0, 1]}}"#).is_err());
    }

    #[test]
    fn grids_resolve() {
        let g = HGrid {
            hi: Some(1e-1),
            lo: Some(1e-4),
            points: Some(12),
            ..HGrid::default()
        };
        assert_eq!(g.resolve().unwrap().len(), 12);
        let g = HGrid {
            values: Some(vec![1e-2, -1e-3]),
            ..HGrid::default()
        };
        assert!(g.resolve().is_err());
    }
}
