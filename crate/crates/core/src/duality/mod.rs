//! Paired computations of `mod_p` of the connecting family and `mod_{p*}` of
//! the separating family, and the product
//! `mod_p^(1/p) * mod_{p*}^(1/p*)` in interval arithmetic on the solver
//! brackets.

mod brute;
mod counterexample;
mod selftest;
mod sweeps;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force_modulus, cut_family, path_family, BruteForce, BRUTE_FORCE_MAX_CELLS};
pub use counterexample::{counterexample_study, write_counterexample_csv, CounterexampleRow, CounterexampleTrend};
pub use selftest::{oracle_fixtures, run_oracle_suite, write_oracle_csv, OracleComparison, OracleFixture, ORACLE_TOLERANCE};
pub use sweeps::{
    refinement_study, truncation_sweep, write_refinement_csv, write_truncation_csv, RefinementRow, RefinementTable,
};

use crate::families::FamilySpec;
use crate::mesh::{MeshDomain, RegionTriple};
use crate::solver::{conjugate, solve_modulus, ModulusProblem, SolveStatus, SolverReport, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iters: DEFAULT_MAX_ITERS }
    }
}

/// Closed interval `[lo, hi]`; either end may be `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    #[serde(with = "crate::serde_f64")]
    pub lo: f64,
    #[serde(with = "crate::serde_f64")]
    pub hi: f64,
}

impl Bracket {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Whether the whole interval lies in `[lo, hi]`.
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        lo <= self.lo && self.hi <= hi
    }

    fn of(rep: &SolverReport) -> Self {
        Self { lo: rep.value_lower, hi: rep.value_upper }
    }
}

/// The product of the two moduli.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Product {
    Interval {
        #[serde(with = "crate::serde_f64")]
        lo: f64,
        #[serde(with = "crate::serde_f64")]
        hi: f64,
    },
    /// One modulus is 0 and the other `+inf`. The duality statement reads
    /// this product as 1; it is kept apart rather than given a number.
    ZeroTimesInfinity,
}

impl Product {
    fn of(path: Bracket, surface: Bracket, p: f64) -> Self {
        let q = conjugate(p);
        let zero_inf = |a: Bracket, b: Bracket| a.hi == 0.0 && b.lo == f64::INFINITY;
        if zero_inf(path, surface) || zero_inf(surface, path) {
            return Product::ZeroTimesInfinity;
        }
        let term = |v: f64, e: f64| if v == 0.0 { 0.0 } else { v.powf(1.0 / e) };
        let mul = |a: f64, b: f64| if a == 0.0 || b == 0.0 { 0.0 } else { a * b };
        Product::Interval {
            lo: mul(term(path.lo, p), term(surface.lo, q)),
            hi: mul(term(path.hi, p), term(surface.hi, q)),
        }
    }

    pub fn interval(&self) -> Option<Bracket> {
        match *self {
            Product::Interval { lo, hi } => Some(Bracket { lo, hi }),
            Product::ZeroTimesInfinity => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshInfo {
    pub h: f64,
    pub q: usize,
    /// Cells along the first axis.
    pub side_cells: usize,
    pub cells: usize,
}

impl MeshInfo {
    pub fn of(dom: &MeshDomain) -> Self {
        let (lo, hi) = dom
            .cells()
            .iter()
            .fold((i64::MAX, i64::MIN), |(lo, hi), c| (lo.min(c.coords[0]), hi.max(c.coords[0])));
        Self { h: dom.h(), q: dom.dim(), side_cells: (hi - lo + 1) as usize, cells: dom.num_cells() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub p: f64,
    pub p_star: f64,
    pub mod_path: Bracket,
    pub path_status: SolveStatus,
    pub mod_surface: Bracket,
    pub surface_status: SolveStatus,
    pub product: Product,
    pub mesh: MeshInfo,
    pub truncation_j: Option<u32>,
}

impl DualityReport {
    fn assemble(dom: &MeshDomain, p: f64, truncation_j: Option<u32>, path: &SolverReport, surf: &SolverReport) -> Self {
        let (mod_path, mod_surface) = (Bracket::of(path), Bracket::of(surf));
        Self {
            p,
            p_star: conjugate(p),
            mod_path,
            path_status: path.status,
            mod_surface,
            surface_status: surf.status,
            product: Product::of(mod_path, mod_surface, p),
            mesh: MeshInfo::of(dom),
            truncation_j,
        }
    }

    /// False when either solve stopped at its iteration limit.
    pub fn converged(&self) -> bool {
        self.path_status != SolveStatus::IterationLimit && self.surface_status != SolveStatus::IterationLimit
    }

    /// One word for tables: the first non-convergence, the `0 * inf` case,
    /// or `converged`.
    pub fn status_label(&self) -> &'static str {
        if !self.converged() {
            "iteration_limit"
        } else if self.product == Product::ZeroTimesInfinity {
            "zero_times_infinity"
        } else {
            "converged"
        }
    }
}

/// `mod_p` of the connecting family and `mod_{p*}` of the (possibly
/// truncated) separating family of the same region, solved concurrently.
pub fn duality_product(
    dom: &MeshDomain,
    region: &RegionTriple,
    p: f64,
    truncation_j: Option<u32>,
    settings: &SolverSettings,
) -> Result<DualityReport> {
    let path_prob = problem(dom, FamilySpec::connecting(region.clone()), p, settings)?;
    let surf_prob = problem(dom, FamilySpec::separating(region.clone(), truncation_j)?, conjugate(p), settings)?;
    let (path, surf) = rayon::join(|| solve_modulus(&path_prob), || solve_modulus(&surf_prob));
    Ok(DualityReport::assemble(dom, p, truncation_j, &path?, &surf?))
}

fn problem<'a>(dom: &'a MeshDomain, spec: FamilySpec, p: f64, s: &SolverSettings) -> Result<ModulusProblem<'a>> {
    ModulusProblem::new(dom, spec, p)?.with_tol(s.tol)?.with_max_iters(s.max_iters)
}

#[cfg(test)]
mod tests;
