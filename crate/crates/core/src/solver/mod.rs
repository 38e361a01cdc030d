//! Constraint generation for `mod_p` of a family given by an oracle.
//!
//! The restricted program `min sum_c mu_c rho_c^p` subject to
//! `N_j . rho >= 1` over the active objects `N_j` is solved in the dual by
//! coordinate ascent on the multipliers, with the closed-form primal
//! `rho_c = (s_c / (p mu_c))^(1/(p-1))`, `s = sum_j lambda_j N_j`. The oracle
//! then supplies the object of least weight under `rho`.
//!
//! Every dual point gives a lower bound on the modulus and every oracle call
//! gives an admissible density `rho / m`, so each run carries a certified
//! bracket `[value_lower, value_upper]`.

mod capacity;
mod certificate;
mod restricted;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use capacity::{capacity_solve, CapacityReport};
pub use certificate::variational_certificate;

use crate::families::{Density, FamilyOracle, FamilySpec, MeshOracle, OracleAnswer, UsageVector};
use crate::mesh::MeshDomain;
use crate::{Error, Result};
use restricted::Restricted;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 10_000;
/// Outer iterations an object may keep a zero multiplier before it is dropped.
pub const PRUNE_AFTER: u32 = 50;

/// A modulus problem on a mesh.
#[derive(Clone, Debug)]
pub struct ModulusProblem<'a> {
    pub dom: &'a MeshDomain,
    pub spec: FamilySpec,
    pub p: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl<'a> ModulusProblem<'a> {
    pub fn new(dom: &'a MeshDomain, spec: FamilySpec, p: f64) -> Result<Self> {
        let prob = Self { dom, spec, p, tol: DEFAULT_TOL, max_iters: DEFAULT_MAX_ITERS };
        prob.validate()?;
        Ok(prob)
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        self.tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Result<Self> {
        self.max_iters = max_iters;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_params(self.p, self.tol, self.max_iters)
    }

    /// `p / (p - 1)`.
    pub fn conjugate(&self) -> f64 {
        conjugate(self.p)
    }
}

/// Conjugate exponent `p* = p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_params(p: f64, tol: f64, max_iters: usize) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidProblem(format!("p = {p} must lie in (1, inf)")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidProblem(format!("tol = {tol} must lie in (0, 1)")));
    }
    if max_iters == 0 {
        return Err(Error::InvalidProblem("max_iters must be positive".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    IterationLimit,
    /// The family has no members; the modulus is 0.
    FamilyEmpty,
    /// Some member has empty usage, so nothing is admissible; the modulus is
    /// `+inf`.
    Infeasible,
}

/// An active object and its multiplier.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActiveObject {
    pub usage: UsageVector,
    pub lambda: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    #[serde(with = "crate::serde_f64")]
    pub value_lower: f64,
    #[serde(with = "crate::serde_f64")]
    pub value_upper: f64,
    pub p: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Admissible density whose energy is `value_upper`.
    pub rho_star: Density,
    pub active: Vec<ActiveObject>,
    /// Least oracle weight of `rho_star`; at least 1 up to rounding.
    pub min_usage: f64,
}

/// Compact JSON form of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    #[serde(with = "crate::serde_f64")]
    pub value_lower: f64,
    #[serde(with = "crate::serde_f64")]
    pub value_upper: f64,
    pub p: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub active_count: usize,
}

impl SolverReport {
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            value_lower: self.value_lower,
            value_upper: self.value_upper,
            p: self.p,
            status: self.status,
            iterations: self.iterations,
            active_count: self.active.len(),
        }
    }

    pub fn is_converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// Midpoint of the bracket.
    pub fn value(&self) -> f64 {
        if self.value_upper.is_infinite() {
            self.value_upper
        } else {
            0.5 * (self.value_lower + self.value_upper)
        }
    }
}

pub fn solve_modulus(prob: &ModulusProblem) -> Result<SolverReport> {
    prob.validate()?;
    let oracle = MeshOracle::new(prob.dom, &prob.spec)?;
    solve_with_oracle(&oracle, prob.p, prob.tol, prob.max_iters)
}

/// Constraint generation against any oracle.
pub fn solve_with_oracle(oracle: &dyn FamilyOracle, p: f64, tol: f64, max_iters: usize) -> Result<SolverReport> {
    check_params(p, tol, max_iters)?;
    let n = oracle.num_cells();
    let mu = oracle.measures();
    let mut prog = Restricted::new(mu, p);
    let mut keys: HashSet<Vec<(usize, u64)>> = HashSet::new();
    let mut lower = 0.0f64;
    let mut upper = f64::INFINITY;
    let mut rho_star = vec![0.0; n];
    let mut min_usage = 0.0;
    // Tightened whenever an outer step fails to add a constraint.
    let mut stall_tol = 1e-4;
    let bound = (1.0 + tol).powf(p);

    let finish = |status, iterations, lower: f64, upper: f64, rho: Vec<f64>, prog: &Restricted, m| {
        Ok(SolverReport {
            value_lower: lower.min(upper),
            value_upper: upper,
            p,
            status,
            iterations,
            rho_star: Density::new(rho).expect("closed-form primal is nonnegative"),
            active: prog.active(),
            min_usage: m,
        })
    };

    for iter in 1..=max_iters {
        if !prog.is_empty() {
            let gap = if upper.is_finite() && upper > 0.0 { (upper - lower) / upper } else { 1.0 };
            prog.solve(inner_tolerance(gap, stall_tol));
        }
        lower = lower.max(prog.dual_value());
        let rho = prog.primal();
        let (usage, m) = match oracle.most_violated(&rho)? {
            OracleAnswer::Empty => {
                return finish(SolveStatus::FamilyEmpty, iter, 0.0, 0.0, vec![0.0; n], &prog, f64::INFINITY);
            }
            OracleAnswer::Object { usage, .. } if usage.is_empty() => {
                return finish(
                    SolveStatus::Infeasible,
                    iter,
                    f64::INFINITY,
                    f64::INFINITY,
                    vec![0.0; n],
                    &prog,
                    0.0,
                );
            }
            OracleAnswer::Object { usage, value } => (usage, value),
        };
        if m > 0.0 {
            let energy = prog.energy(&rho);
            let candidate = energy / m.powf(p);
            if candidate < upper {
                upper = candidate;
                rho_star = rho.iter().map(|r| r / m).collect();
                min_usage = 1.0;
            }
        }
        if upper <= lower * bound || upper == 0.0 {
            return finish(SolveStatus::Converged, iter, lower, upper, rho_star, &prog, min_usage);
        }
        let threshold = 1.0 - tol / 2.0;
        let mut added = false;
        if m < threshold {
            let extra = oracle.more_violated(&rho, threshold)?;
            for u in std::iter::once(usage).chain(extra) {
                if keys.insert(u.key()) {
                    prog.push(u);
                    added = true;
                }
            }
        }
        if !added {
            stall_tol = (stall_tol * 0.1).max(1e-15);
        }
        for dropped in prog.prune(PRUNE_AFTER) {
            keys.remove(&dropped.key());
        }
    }
    finish(SolveStatus::IterationLimit, max_iters, lower, upper, rho_star, &prog, min_usage)
}

/// Inner tolerance: loose while the bracket is wide, `1e-10` once it is
/// nearly closed, tighter still after stalls.
fn inner_tolerance(gap: f64, stall_tol: f64) -> f64 {
    (1e-2 * gap).clamp(1e-10, 1e-4).min(stall_tol)
}
