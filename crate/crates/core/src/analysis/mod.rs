//! Analysis devices on meshes: Whitney covers and the Whitney-ball density,
//! restricted maximal functions, upper-gradient and coarea checks, and the
//! relative isoperimetric probe.

mod gradient;
mod isoperimetric;
mod maximal;
mod whitney;

use serde::{Deserialize, Serialize};

pub use gradient::{coarea_check, path_integral, upper_gradient_check, UpperGradientReport};
pub use isoperimetric::{isoperimetric_probe, IsoperimetricProbe};
pub use maximal::maximal_function;
pub use whitney::{build_whitney_density, whitney_cover, WhitneyBall, WhitneyCheck, WhitneyCover, WhitneyDensity};

use crate::mesh::MeshDomain;
use crate::{Error, Result};

/// Open graph ball `{c : d(center, c) < radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
}

impl Ball {
    pub fn new(dom: &MeshDomain, center: usize, radius: f64) -> Result<Self> {
        dom.check_cell(center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidProblem(format!("ball radius {radius} must be positive")));
        }
        Ok(Self { center, radius, members: dom.ball(center, radius) })
    }

    /// The concentric ball of `factor` times the radius.
    pub fn scaled(&self, dom: &MeshDomain, factor: f64) -> Self {
        Self { center: self.center, radius: self.radius * factor, members: dom.ball(self.center, self.radius * factor) }
    }

    pub fn measure(&self, dom: &MeshDomain) -> f64 {
        self.members.iter().map(|&c| dom.cell(c).measure).sum()
    }

    pub fn contains(&self, c: usize) -> bool {
        self.members.binary_search(&c).is_ok()
    }

    pub fn intersects(&self, other: &Ball) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.members.len() && j < other.members.len() {
            match self.members[i].cmp(&other.members[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

fn check_field(dom: &MeshDomain, v: &[f64], name: &str) -> Result<()> {
    if v.len() != dom.num_cells() {
        return Err(Error::InvalidProblem(format!(
            "{name} has {} values for {} cells",
            v.len(),
            dom.num_cells()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid_domain;

    #[test]
    fn balls() {
        let dom = build_grid_domain(2, 5, 1.0).unwrap();
        let b = Ball::new(&dom, 12, 1.0).unwrap();
        assert_eq!(b.members, vec![12]);
        let b2 = b.scaled(&dom, 2.0);
        assert_eq!(b2.members.len(), 5);
        assert!(b2.contains(13) && !b2.contains(0));
        assert!(b.intersects(&b2));
        assert!(!Ball::new(&dom, 0, 1.0).unwrap().intersects(&b2));
        assert!(Ball::new(&dom, 0, 0.0).is_err());
        assert_eq!(b2.measure(&dom), 5.0);
    }
}
