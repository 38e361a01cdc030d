use serde::{Deserialize, Serialize};

use super::Ball;
use crate::mesh::MeshDomain;
use crate::{Error, Result};

/// Both sides of the relative isoperimetric inequality on one ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricProbe {
    /// `min(mu(B - U), mu(B n U)) / mu(B)`.
    pub lhs: f64,
    /// `r * area(boundary of U inside lambda B) / mu(lambda B)`.
    pub rhs: f64,
    /// Area of the boundary of `U` inside `lambda B`.
    pub perimeter: f64,
}

impl IsoperimetricProbe {
    /// `lhs / rhs`, with `0/0 = 0`.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Evaluates the inequality for the cell set `u` on `ball`.
///
/// The perimeter counts interior faces with exactly one side in `u` and at
/// least one side in `lambda B`. Mesh boundary faces are not part of it.
pub fn isoperimetric_probe(dom: &MeshDomain, u: &[usize], ball: &Ball, lambda: f64) -> Result<IsoperimetricProbe> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidProblem(format!("lambda = {lambda} must exceed 1")));
    }
    let mut in_u = vec![false; dom.num_cells()];
    for &c in u {
        dom.check_cell(c)?;
        in_u[c] = true;
    }
    let mu_b = ball.measure(dom);
    let inside: f64 = ball.members.iter().filter(|&&c| in_u[c]).map(|&c| dom.cell(c).measure).sum();
    let lhs = inside.min(mu_b - inside).max(0.0) / mu_b;

    let big = ball.scaled(dom, lambda);
    let mut in_big = vec![false; dom.num_cells()];
    for &c in &big.members {
        in_big[c] = true;
    }
    let perimeter: f64 = dom
        .faces()
        .iter()
        .filter(|f| f.hi.is_some_and(|b| in_u[f.lo] != in_u[b] && (in_big[f.lo] || in_big[b])))
        .map(|f| f.area)
        .sum();
    let rhs = ball.radius * perimeter / big.measure(dom);
    Ok(IsoperimetricProbe { lhs, rhs, perimeter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_glued_cubes, build_grid_domain};

    #[test]
    fn half_space_through_center() {
        let dom = build_grid_domain(2, 16, 1.0 / 16.0).unwrap();
        let u: Vec<usize> = (0..256).filter(|&c| dom.cell(c).center[0] > 0.5).collect();
        // Center the ball on the cut: the ball is symmetric about x = 0.5
        // only up to one column, so the fraction is close to 1/2.
        let center = 8 * 16 + 8;
        let ball = Ball::new(&dom, center, 4.0 / 16.0 + 1e-9).unwrap();
        let probe = isoperimetric_probe(&dom, &u, &ball, 2.0).unwrap();
        assert!(probe.lhs > 0.3 && probe.lhs <= 0.5, "{probe:?}");
        assert!(probe.rhs > 0.0);
        // lambda B reaches every row, so the whole cut line counts.
        assert!((probe.perimeter - 1.0).abs() < 1e-12, "{probe:?}");
    }

    #[test]
    fn empty_set() {
        let dom = build_grid_domain(2, 8, 0.125).unwrap();
        let ball = Ball::new(&dom, 27, 0.3).unwrap();
        let probe = isoperimetric_probe(&dom, &[], &ball, 2.0).unwrap();
        assert_eq!((probe.lhs, probe.rhs, probe.ratio()), (0.0, 0.0, 0.0));
        assert!(isoperimetric_probe(&dom, &[], &ball, 1.0).is_err());
    }

    #[test]
    fn glue_ratio_grows_with_level() {
        // A copy-0 cell under a glue face that survives to level 2.
        let deepest = build_glued_cubes(0.5, 2, 8).unwrap();
        let center = deepest
            .faces()
            .iter()
            .find(|f| f.hi.is_some_and(|b| deepest.cell(f.lo).component != deepest.cell(b).component))
            .map(|f| f.lo)
            .unwrap();
        let ratios: Vec<f64> = (0..3)
            .map(|m| {
                let dom = build_glued_cubes(0.5, m, 8).unwrap();
                let copy1: Vec<usize> = (0..dom.num_cells()).filter(|&c| dom.cell(c).component == 1).collect();
                let ball = Ball::new(&dom, center, 0.3).unwrap();
                isoperimetric_probe(&dom, &copy1, &ball, 2.0).unwrap().ratio()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    }
}
