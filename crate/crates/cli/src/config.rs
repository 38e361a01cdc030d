//! Experiment configuration: parsing with key paths in every error, and
//! validation of everything a run will touch before it starts.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use modlab_core::duality::SolverSettings;
use modlab_core::geometry::{DomainSpec, GeometrySpec, Predicate};
use modlab_core::mesh::CantorApprox;
use modlab_core::solver::{DEFAULT_MAX_ITERS, DEFAULT_TOL};
use modlab_core::FamilyKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverBlock>,
    pub output: OutputBlock,
    /// Seed of every sampled check in the run.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// One family on one mesh.
    Modulus {
        family: FamilyKind,
        /// Random admissible densities for the variational certificate.
        #[serde(default = "default_trials")]
        trials: usize,
    },
    Duality {},
    TruncationSweep { j_list: Vec<u32> },
    RefinementStudy {
        h_list: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_cells: Option<usize>,
    },
    Counterexample {
        epsilon: f64,
        levels: Vec<u32>,
        #[serde(default = "default_side_cells")]
        side_cells: usize,
    },
    Selftest {},
}

fn default_trials() -> usize {
    20
}

fn default_side_cells() -> usize {
    4
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Modulus { .. } => "modulus",
            Experiment::Duality {} => "duality",
            Experiment::TruncationSweep { .. } => "truncation-sweep",
            Experiment::RefinementStudy { .. } => "refinement-study",
            Experiment::Counterexample { .. } => "counterexample",
            Experiment::Selftest {} => "selftest",
        }
    }

    fn needs_geometry(&self) -> bool {
        !matches!(self, Experiment::Counterexample { .. } | Experiment::Selftest {})
    }

    /// Whether the experiment takes its spacing from `geometry.h`.
    fn needs_h(&self) -> bool {
        matches!(self, Experiment::Modulus { .. } | Experiment::Duality {} | Experiment::TruncationSweep { .. })
    }
}

/// A geometry description plus the spacing to mesh it at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Predicate>,
    pub e: Predicate,
    pub f: Predicate,
}

impl GeometryBlock {
    pub fn spec(&self) -> GeometrySpec {
        GeometrySpec { domain: self.domain.clone(), g: self.g.clone(), e: self.e.clone(), f: self.f.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub p: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_j: Option<u32>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

impl SolverBlock {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings { tol: self.tol, max_iters: self.max_iters }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl OutputBlock {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// A configuration problem and the key it concerns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.key.is_empty() || self.key == "." {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config key `{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(key: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { key: key.to_string(), message: message.into() })
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| ConfigError {
            key: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let exp = &self.experiment;
        match (&self.geometry, exp.needs_geometry()) {
            (None, true) => return err("geometry", format!("required by the {} experiment", exp.name())),
            (Some(_), false) => return err("geometry", format!("not used by the {} experiment", exp.name())),
            (Some(g), true) => validate_geometry(g, exp.needs_h())?,
            (None, false) => {}
        }
        match (&self.solver, exp) {
            (None, Experiment::Selftest {}) => {}
            (Some(_), Experiment::Selftest {}) => return err("solver", "not used by the selftest experiment"),
            (None, _) => return err("solver", format!("required by the {} experiment", exp.name())),
            (Some(s), _) => validate_solver(s)?,
        }
        if self.output.formats.is_empty() {
            return err("output.formats", "at least one format is needed");
        }
        if self.output.dir.as_os_str().is_empty() {
            return err("output.dir", "must not be empty");
        }
        let solver = self.solver.as_ref();
        match exp {
            Experiment::Modulus { family, trials } => {
                if *family == FamilyKind::Connecting && solver.is_some_and(|s| s.truncation_j.is_some()) {
                    return err("solver.truncation_j", "only applies to the separating family");
                }
                if *trials > 10_000 {
                    return err("experiment.trials", format!("{trials} trials is more than 10000"));
                }
            }
            Experiment::Duality {} | Experiment::Selftest {} => {}
            Experiment::TruncationSweep { j_list } => {
                if j_list.is_empty() || j_list.windows(2).any(|w| w[0] >= w[1]) {
                    return err("experiment.j_list", "must be nonempty and strictly increasing");
                }
                if j_list[0] == 0 {
                    return err("experiment.j_list", "entries must be at least 1");
                }
                if solver.is_some_and(|s| s.truncation_j.is_some()) {
                    return err("solver.truncation_j", "a truncation sweep takes its j values from experiment.j_list");
                }
            }
            Experiment::RefinementStudy { h_list, max_cells } => {
                if h_list.is_empty() || h_list.windows(2).any(|w| w[0] <= w[1]) {
                    return err("experiment.h_list", "must be nonempty and strictly decreasing");
                }
                if let Some(h) = h_list.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
                    return err("experiment.h_list", format!("spacing {h} must be positive"));
                }
                if *max_cells == Some(0) {
                    return err("experiment.max_cells", "must be positive");
                }
                if solver.is_some_and(|s| s.truncation_j.is_some()) {
                    return err("solver.truncation_j", "not used by the refinement-study experiment");
                }
            }
            Experiment::Counterexample { epsilon, levels, side_cells } => {
                if let Err(e) = CantorApprox::new(*epsilon, 0) {
                    return err("experiment.epsilon", e.to_string());
                }
                if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
                    return err("experiment.levels", "must be nonempty and strictly increasing");
                }
                if *side_cells < 4 || side_cells % 4 != 0 {
                    return err("experiment.side_cells", format!("{side_cells} is not a positive multiple of 4"));
                }
                if solver.is_some_and(|s| s.truncation_j.is_some()) {
                    return err("solver.truncation_j", "not used by the counterexample experiment");
                }
            }
        }
        Ok(())
    }
}

fn validate_geometry(g: &GeometryBlock, needs_h: bool) -> Result<(), ConfigError> {
    match (g.h, needs_h) {
        (None, true) => return err("geometry.h", "required by this experiment"),
        (Some(_), false) => return err("geometry.h", "the refinement study takes its spacings from experiment.h_list"),
        (Some(h), true) if !(h > 0.0 && h.is_finite()) => return err("geometry.h", format!("spacing {h} must be positive")),
        _ => {}
    }
    g.spec().validate().map_err(|e| {
        // Geometry messages start with the key they concern.
        let text = e.to_string();
        let body = text.strip_prefix("invalid problem: ").unwrap_or(&text);
        match body.split_once(": ") {
            Some((key, msg)) if key.starts_with("geometry") => ConfigError { key: key.to_string(), message: msg.to_string() },
            _ => ConfigError { key: "geometry".into(), message: body.to_string() },
        }
    })
}

fn validate_solver(s: &SolverBlock) -> Result<(), ConfigError> {
    if !(s.p > 1.0 && s.p.is_finite()) {
        return err("solver.p", format!("p = {} must lie in (1, inf)", s.p));
    }
    if !(s.tol > 0.0 && s.tol < 1.0) {
        return err("solver.tol", format!("tol = {} must lie in (0, 1)", s.tol));
    }
    if s.max_iters == 0 {
        return err("solver.max_iters", "must be at least 1");
    }
    if s.truncation_j == Some(0) {
        return err("solver.truncation_j", "must be at least 1");
    }
    Ok(())
}
