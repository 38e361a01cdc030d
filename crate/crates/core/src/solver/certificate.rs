use super::{ModulusProblem, SolverReport};
use crate::families::{Density, FamilyOracle, MeshOracle, OracleAnswer};
use crate::{Error, Result};

/// Largest `value_lower - int phi rho_star^(p-1) dmu` over admissible trial
/// densities `phi`.
///
/// At an extremal density the integral is at least the modulus for every
/// admissible `phi`, so a sound report gives a value at most about
/// `tol * value_upper`. A trial whose least oracle weight is below `1 - tol`
/// is rejected with that object attached.
pub fn variational_certificate(prob: &ModulusProblem, report: &SolverReport, trials: &[Density]) -> Result<f64> {
    let oracle = MeshOracle::new(prob.dom, &prob.spec)?;
    let mu = oracle.measures();
    let rho = report.rho_star.values();
    let mut worst = f64::NEG_INFINITY;
    for (index, phi) in trials.iter().enumerate() {
        if phi.len() != mu.len() {
            return Err(Error::InvalidProblem(format!("trial {index} has the wrong length")));
        }
        if let OracleAnswer::Object { usage, value } = oracle.most_violated(phi.values())? {
            if value < 1.0 - prob.tol {
                return Err(Error::Inadmissible { index, min_usage: value, object: usage });
            }
        }
        let pairing: f64 = phi
            .values()
            .iter()
            .zip(rho)
            .zip(mu)
            .map(|((f, r), m)| if *f == 0.0 { 0.0 } else { m * f * r.powf(report.p - 1.0) })
            .sum();
        worst = worst.max(report.value_lower - pairing);
    }
    Ok(worst)
}
