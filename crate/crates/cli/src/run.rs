//! Executes a configuration and writes its artifacts and manifest.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use modlab_core::duality::{
    counterexample_study, duality_product, refinement_study, run_oracle_suite, truncation_sweep,
    write_counterexample_csv, write_oracle_csv, write_refinement_csv, write_truncation_csv, CounterexampleRow,
    CounterexampleTrend, DualityReport, OracleComparison, RefinementRow, RefinementTable,
};
use modlab_core::families::{min_weight_cut, min_weight_curve};
use modlab_core::solver::{solve_modulus, variational_certificate, ReportSummary};
use modlab_core::{rng, Density, FamilyKind, FamilySpec, ModulusProblem, SolveStatus};

use crate::config::{ConfigError, Experiment, ExperimentConfig, Format};

/// Everything a run can end in, with its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or input; exit 2.
    Validation(String),
    /// Some solve hit its iteration limit; artifacts were written. Exit 3.
    NonConvergence(String),
    /// The self-test found a disagreement; exit 1.
    SelftestMismatch(String),
    /// I/O and other runtime errors; exit 1.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::NonConvergence(_) => 3,
            Failure::SelftestMismatch(_) | Failure::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::NonConvergence(m) => write!(f, "solver did not converge: {m}"),
            Failure::SelftestMismatch(m) => write!(f, "selftest failed: {m}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<modlab_core::Error> for Failure {
    fn from(e: modlab_core::Error) -> Self {
        use modlab_core::Error as E;
        match e {
            E::InvalidMesh(_)
            | E::EmptyDomain
            | E::Disconnected { .. }
            | E::InvalidRegion(_)
            | E::InvalidPath(_)
            | E::InvalidFaces(_)
            | E::InvalidProblem(_)
            | E::TooLarge { .. } => Failure::Validation(e.to_string()),
            other => Failure::Runtime(other.into()),
        }
    }
}

/// The results file of a run, read back by `emit-plots`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportSet {
    Modulus {
        family: FamilyKind,
        h: f64,
        report: ReportSummary,
        /// Largest `value_lower - int phi rho^(p-1)` over the trial densities.
        certificate: Option<f64>,
    },
    Duality {
        report: DualityReport,
    },
    TruncationSweep {
        reports: Vec<DualityReport>,
    },
    RefinementStudy {
        table: RefinementTable,
    },
    Counterexample {
        rows: Vec<CounterexampleRow>,
        trend: CounterexampleTrend,
    },
    Selftest {
        rows: Vec<OracleComparison>,
    },
}

impl ReportSet {
    /// Statuses of every solve in the set.
    fn statuses(&self) -> Vec<SolveStatus> {
        let pair = |r: &DualityReport| [r.path_status, r.surface_status];
        match self {
            ReportSet::Modulus { report, .. } => vec![report.status],
            ReportSet::Duality { report } => pair(report).to_vec(),
            ReportSet::TruncationSweep { reports } => reports.iter().flat_map(pair).collect(),
            ReportSet::RefinementStudy { table } => table.rows.iter().filter_map(|r| r.report.as_ref()).flat_map(pair).collect(),
            ReportSet::Counterexample { rows, .. } => rows.iter().flat_map(|r| pair(&r.report)).collect(),
            ReportSet::Selftest { .. } => Vec::new(),
        }
    }
}

pub const RESULTS_FILE: &str = "results.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub config_path: String,
    pub config_sha256: String,
    pub experiment: &'static str,
    pub seed: u64,
    pub modlab_version: &'static str,
    pub core_version: &'static str,
    pub target: String,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
    pub status: &'static str,
}

/// Runs the experiment and writes its artifacts. Returns the output
/// directory.
pub fn run(config_path: &Path) -> Result<PathBuf, Failure> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());

    let results = execute(&cfg)?;
    let mut artifacts = Vec::new();
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    if cfg.output.wants(Format::Csv) {
        for (name, bytes) in csv_artifacts(&results)? {
            write(dir, &name, &bytes)?;
            artifacts.push(name);
        }
    }
    if cfg.output.wants(Format::Json) {
        let json = serde_json::to_vec_pretty(&results).map_err(|e| Failure::Runtime(e.into()))?;
        write(dir, RESULTS_FILE, &json)?;
        artifacts.push(RESULTS_FILE.to_string());
    }

    let stalled = results.statuses().iter().filter(|s| **s == SolveStatus::IterationLimit).count();
    let mismatches = match &results {
        ReportSet::Selftest { rows } => rows.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect(),
        _ => Vec::new(),
    };
    let status = if stalled > 0 {
        "non_convergence"
    } else if !mismatches.is_empty() {
        "selftest_mismatch"
    } else {
        "ok"
    };
    let manifest = Manifest {
        config_path: config_path.display().to_string(),
        config_sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
        experiment: cfg.experiment.name(),
        seed: cfg.seed,
        modlab_version: env!("CARGO_PKG_VERSION"),
        core_version: modlab_core::VERSION,
        target: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
        threads: rayon::current_num_threads(),
        started_unix,
        wall_time_s: started.elapsed().as_secs_f64(),
        artifacts,
        status,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Failure::Runtime(e.into()))?;
    write(dir, MANIFEST_FILE, &json)?;

    if stalled > 0 {
        return Err(Failure::NonConvergence(format!(
            "{stalled} solve(s) stopped at the iteration limit; results in {}",
            dir.display()
        )));
    }
    if !mismatches.is_empty() {
        return Err(Failure::SelftestMismatch(mismatches.join(", ")));
    }
    Ok(dir.clone())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(anyhow::Error::new(e).context(format!("writing {}", path.display())))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| io_failure(&path, e))
}

/// Runs the computation of a validated configuration.
pub fn execute(cfg: &ExperimentConfig) -> Result<ReportSet, Failure> {
    let geometry = cfg.geometry.as_ref();
    let solver = cfg.solver.as_ref();
    Ok(match &cfg.experiment {
        Experiment::Modulus { family, trials } => {
            let (g, s) = (geometry.unwrap(), solver.unwrap());
            let h = g.h.unwrap();
            let (dom, region) = g.spec().build(h)?;
            let spec = FamilySpec::new(*family, region, s.truncation_j)?;
            let prob = ModulusProblem::new(&dom, spec.clone(), s.p)?.with_tol(s.tol)?.with_max_iters(s.max_iters)?;
            let report = solve_modulus(&prob)?;
            let certificate = if *trials > 0 && report.is_converged() {
                let densities = trial_densities(&dom, &spec, *trials, cfg.seed)?;
                Some(variational_certificate(&prob, &report, &densities)?)
            } else {
                None
            };
            ReportSet::Modulus { family: *family, h, report: report.summary(), certificate }
        }
        Experiment::Duality {} => {
            let (g, s) = (geometry.unwrap(), solver.unwrap());
            let (dom, region) = g.spec().build(g.h.unwrap())?;
            ReportSet::Duality { report: duality_product(&dom, &region, s.p, s.truncation_j, &s.settings())? }
        }
        Experiment::TruncationSweep { j_list } => {
            let (g, s) = (geometry.unwrap(), solver.unwrap());
            let (dom, region) = g.spec().build(g.h.unwrap())?;
            ReportSet::TruncationSweep { reports: truncation_sweep(&dom, &region, s.p, j_list, &s.settings())? }
        }
        Experiment::RefinementStudy { h_list, max_cells } => {
            let (g, s) = (geometry.unwrap(), solver.unwrap());
            ReportSet::RefinementStudy { table: refinement_study(&g.spec(), s.p, h_list, &s.settings(), *max_cells)? }
        }
        Experiment::Counterexample { epsilon, levels, side_cells } => {
            let s = solver.unwrap();
            let rows = counterexample_study(*epsilon, s.p, levels, *side_cells, &s.settings())?;
            let trend = CounterexampleTrend::of(&rows);
            ReportSet::Counterexample { rows, trend }
        }
        Experiment::Selftest {} => ReportSet::Selftest { rows: run_oracle_suite()? },
    })
}

/// Random positive densities scaled so the cheapest object has weight 1.
fn trial_densities(
    dom: &modlab_core::MeshDomain,
    spec: &FamilySpec,
    count: usize,
    seed: u64,
) -> Result<Vec<Density>, Failure> {
    let mut g = rng::stream(seed, rng::streams::TRIAL_DENSITIES);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let raw: Vec<f64> = (0..dom.num_cells()).map(|_| g.random_range(0.05..1.0)).collect();
        let least = match spec.kind() {
            FamilyKind::Connecting => min_weight_curve(dom, spec, &raw)?.map(|c| c.value),
            FamilyKind::Separating => min_weight_cut(dom, spec, &raw)?.map(|c| c.value),
        };
        let Some(least) = least else { break };
        out.push(Density::new(raw.iter().map(|v| v / least).collect())?);
    }
    Ok(out)
}

fn csv_artifacts(results: &ReportSet) -> Result<Vec<(String, Vec<u8>)>, Failure> {
    let mut buf = Vec::new();
    let name = match results {
        ReportSet::Modulus { family, h, report, certificate } => {
            let mut w = csv_writer(&mut buf);
            let family = match family {
                FamilyKind::Connecting => "connecting",
                FamilyKind::Separating => "separating",
            };
            let row = [
                family.to_string(),
                format!("{h:.12e}"),
                format!("{:.12e}", report.p),
                format!("{:.12e}", report.value_lower),
                format!("{:.12e}", report.value_upper),
                report.iterations.to_string(),
                certificate.map_or(String::new(), |c| format!("{c:.12e}")),
                status_label(report.status).to_string(),
            ];
            w.write_record(["family", "h", "p", "value_lower", "value_upper", "iterations", "certificate", "status"])
                .and_then(|_| w.write_record(&row))
                .map_err(|e| Failure::Runtime(e.into()))?;
            w.flush().map_err(|e| Failure::Runtime(e.into()))?;
            "modulus.csv"
        }
        ReportSet::Duality { report } => {
            let row = RefinementRow { h: report.mesh.h, p: report.p, report: Some(report.clone()) };
            write_refinement_csv(&[row], &mut buf)?;
            "duality.csv"
        }
        ReportSet::TruncationSweep { reports } => {
            write_truncation_csv(reports, &mut buf)?;
            "truncation.csv"
        }
        ReportSet::RefinementStudy { table } => {
            write_refinement_csv(&table.rows, &mut buf)?;
            "refinement.csv"
        }
        ReportSet::Counterexample { rows, .. } => {
            write_counterexample_csv(rows, &mut buf)?;
            "counterexample.csv"
        }
        ReportSet::Selftest { rows } => {
            write_oracle_csv(rows, &mut buf)?;
            "selftest.csv"
        }
    };
    Ok(vec![(name.to_string(), buf)])
}

fn csv_writer<W: std::io::Write>(out: W) -> csv::Writer<W> {
    csv::Writer::from_writer(out)
}

pub fn status_label(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::IterationLimit => "iteration_limit",
        SolveStatus::FamilyEmpty => "family_empty",
        SolveStatus::Infeasible => "infeasible",
    }
}
