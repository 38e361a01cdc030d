//! Sampled upper-gradient checks and a discrete coarea estimate.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::check_field;
use crate::families::Density;
use crate::mesh::MeshDomain;
use crate::{rng, Error, Result};

/// Densities above this are treated as this value, so `+inf` walls still
/// give finite sums.
const RHO_CAP: f64 = 1e300;

/// `sum (h/2)(rho_a + rho_b)` over consecutive cells, the same quadrature as
/// the curve usage.
pub fn path_integral(dom: &MeshDomain, path: &[usize], rho: &[f64]) -> f64 {
    let half = dom.h() / 2.0;
    path.windows(2)
        .map(|w| half * (rho[w[0]].min(RHO_CAP) + rho[w[1]].min(RHO_CAP)))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperGradientReport {
    /// Largest `|u(end) - u(start)| - integral of rho` over the sample.
    /// Nonpositive means `rho` passed on every sampled path.
    pub worst_deficit: f64,
    pub paths_checked: usize,
    pub worst_path: Vec<usize>,
}

impl UpperGradientReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.worst_deficit <= tol
    }
}

/// Breadth-first path from `a` to `b`, neighbours in mesh order.
fn bfs_path(dom: &MeshDomain, a: usize, b: usize) -> Option<Vec<usize>> {
    let mut pred = vec![usize::MAX; dom.num_cells()];
    pred[a] = a;
    let mut queue = VecDeque::from([a]);
    while let Some(c) = queue.pop_front() {
        if c == b {
            let mut path = vec![b];
            let mut at = b;
            while at != a {
                at = pred[at];
                path.push(at);
            }
            path.reverse();
            return Some(path);
        }
        for &(o, _) in dom.neighbors(c) {
            if pred[o] == usize::MAX {
                pred[o] = c;
                queue.push_back(o);
            }
        }
    }
    None
}

/// Removes cycles in visiting order, leaving a simple path with the same
/// ends.
fn loop_erase(walk: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(walk.len());
    let mut pos = std::collections::HashMap::new();
    for &c in walk {
        if let Some(&i) = pos.get(&c) {
            for d in out.drain(i + 1..) {
                pos.remove(&d);
            }
        } else {
            pos.insert(c, out.len());
            out.push(c);
        }
    }
    out
}

/// Tests `|u(end) - u(start)| <= integral of rho` on `sample_paths` simple
/// paths between random pairs of cells. Even-numbered samples are shortest
/// paths, odd ones detour through a random waypoint and are loop-erased.
pub fn upper_gradient_check(
    dom: &MeshDomain,
    u: &[f64],
    rho: &Density,
    sample_paths: usize,
    seed: u64,
) -> Result<UpperGradientReport> {
    check_field(dom, u, "u")?;
    check_field(dom, rho.values(), "rho")?;
    if sample_paths == 0 {
        return Err(Error::InvalidProblem("sample_paths must be at least 1".into()));
    }
    let n = dom.num_cells();
    let mut rng = rng::stream(seed, rng::streams::UPPER_GRADIENT);
    let mut report = UpperGradientReport { worst_deficit: f64::NEG_INFINITY, paths_checked: 0, worst_path: Vec::new() };
    let mut attempts = 0;
    while report.paths_checked < sample_paths {
        attempts += 1;
        if attempts > 100 * sample_paths {
            break;
        }
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let path = if report.paths_checked % 2 == 0 {
            bfs_path(dom, a, b)
        } else {
            let w = rng.random_range(0..n);
            bfs_path(dom, a, w).and_then(|mut first| {
                let second = bfs_path(dom, w, b)?;
                first.extend_from_slice(&second[1..]);
                Some(loop_erase(&first))
            })
        };
        let Some(path) = path else { continue };
        let deficit = (u[b] - u[a]).abs() - path_integral(dom, &path, rho.values());
        report.paths_checked += 1;
        if deficit > report.worst_deficit {
            report.worst_deficit = deficit;
            report.worst_path = path;
        }
    }
    Ok(report)
}

/// Paths sampled for the precondition of [`coarea_check`].
const COAREA_SAMPLE: usize = 64;

/// Ratio of `integral over t of the g-weighted level-set area of u` to
/// `sum g rho mu`.
///
/// `t` runs over `t_samples` midpoints of `[min u, max u]`. At each `t` the
/// level set is the set of interior faces whose two cells straddle `t`, each
/// weighted by its area and the mean of `g` on its cells. Constant `u` gives
/// 0. `rho` must first pass a sampled upper-gradient check for `u`.
pub fn coarea_check(dom: &MeshDomain, u: &[f64], rho: &Density, g: &Density, t_samples: usize) -> Result<f64> {
    check_field(dom, u, "u")?;
    check_field(dom, g.values(), "g")?;
    if t_samples < 10 {
        return Err(Error::InvalidProblem(format!("t_samples = {t_samples} must be at least 10")));
    }
    if let Some(c) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidProblem(format!("u is not finite at cell {c}")));
    }
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ug = upper_gradient_check(dom, u, rho, COAREA_SAMPLE, 0)?;
    if !ug.passed(1e-9 * scale.max(1.0)) {
        return Err(Error::InvalidProblem(format!(
            "rho is not an upper gradient of u on the sample (deficit {:.3e})",
            ug.worst_deficit
        )));
    }
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(0.0);
    }
    let g = g.values();
    let faces: Vec<(f64, f64, f64)> = dom
        .faces()
        .iter()
        .filter_map(|f| {
            let b = f.hi?;
            let (ua, ub) = (u[f.lo], u[b]);
            (ua != ub).then(|| (ua.min(ub), ua.max(ub), f.area * 0.5 * (g[f.lo] + g[b])))
        })
        .collect();
    let dt = (hi - lo) / t_samples as f64;
    let mut lhs = 0.0;
    for i in 0..t_samples {
        let t = lo + (i as f64 + 0.5) * dt;
        lhs += dt * faces.iter().filter(|&&(a, b, _)| a < t && t < b).map(|f| f.2).sum::<f64>();
    }
    let rhs: f64 = dom
        .cells()
        .iter()
        .enumerate()
        .map(|(c, cell)| g[c] * rho.values()[c].min(RHO_CAP) * cell.measure)
        .sum();
    Ok(if rhs > 0.0 { lhs / rhs } else { f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_grid_domain;
    use proptest::prelude::*;

    fn grid(side: usize) -> MeshDomain {
        build_grid_domain(2, side, 1.0 / side as f64).unwrap()
    }

    fn coord(dom: &MeshDomain, axis: usize) -> Vec<f64> {
        dom.cells().iter().map(|c| c.center[axis]).collect()
    }

    #[test]
    fn loop_erasure() {
        assert_eq!(loop_erase(&[1, 2, 3, 2, 4, 5, 1, 6]), vec![1, 6]);
        assert_eq!(loop_erase(&[1, 2, 3]), vec![1, 2, 3]);
    }

    #[test]
    fn coordinate_is_one_lipschitz() {
        let dom = grid(8);
        let u = coord(&dom, 0);
        let r = upper_gradient_check(&dom, &u, &Density::constant(64, 1.0), 200, 3).unwrap();
        assert_eq!(r.paths_checked, 200);
        assert!(r.worst_deficit <= 1e-12, "{r:?}");
    }

    #[test]
    fn infinite_rho_always_passes() {
        let dom = grid(6);
        let u: Vec<f64> = (0..36).map(|c| (c * 7 % 11) as f64).collect();
        let r = upper_gradient_check(&dom, &u, &Density::constant(36, f64::INFINITY), 50, 1).unwrap();
        assert!(r.worst_deficit <= 0.0);
    }

    #[test]
    fn step_function_fails_with_zero_rho() {
        let dom = grid(8);
        let u: Vec<f64> = coord(&dom, 0).iter().map(|&x| if x > 0.5 { 1.0 } else { 0.0 }).collect();
        let r = upper_gradient_check(&dom, &u, &Density::zeros(64), 100, 2).unwrap();
        assert_eq!(r.worst_deficit, 1.0);
        let path = &r.worst_path;
        assert_ne!(u[path[0]], u[*path.last().unwrap()]);
        assert!(upper_gradient_check(&dom, &u, &Density::zeros(64), 0, 2).is_err());
    }

    #[test]
    fn coarea_of_a_coordinate() {
        let dom = grid(16);
        let one = Density::constant(256, 1.0);
        let u = coord(&dom, 0);
        let r = coarea_check(&dom, &u, &one, &one, 60).unwrap();
        // Level sets are unit segments; the range of u is 1 - h.
        assert!((r - 15.0 / 16.0).abs() < 1e-9, "{r}");
        let u2: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
        let r2 = coarea_check(&dom, &u2, &Density::constant(256, 2.0), &one, 60).unwrap();
        assert_eq!(r, r2);
    }

    #[test]
    fn coarea_of_corner_distance() {
        let dom = grid(16);
        let one = Density::constant(256, 1.0);
        let u = dom.distances_from(&[0]);
        let r = coarea_check(&dom, &u, &one, &one, 200).unwrap();
        assert!(r > 1.0 && r <= 2.0, "{r}");
    }

    #[test]
    fn coarea_edge_cases() {
        let dom = grid(8);
        let one = Density::constant(64, 1.0);
        assert_eq!(coarea_check(&dom, &[3.0; 64], &one, &one, 10).unwrap(), 0.0);
        assert!(coarea_check(&dom, &coord(&dom, 0), &one, &one, 9).is_err());
        assert!(coarea_check(&dom, &coord(&dom, 0), &Density::constant(64, 0.5), &one, 10).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn coarea_homogeneity(
            w in prop::collection::vec(0.1f64..3.0, 36),
            c in prop_oneof![Just(2.0), Just(-4.0), Just(0.25), Just(-1.0)],
        ) {
            let dom = grid(6);
            let one = Density::constant(36, 1.0);
            // Per step u changes by at most h + 6e-3, which 1.05 h covers.
            let u: Vec<f64> = dom.distances_from(&[0]).iter().zip(&w).map(|(d, wi)| d + wi * 1e-3).collect();
            let rho = Density::constant(36, 1.05);
            let r = coarea_check(&dom, &u, &rho, &one, 40).unwrap();
            let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
            let rc = coarea_check(&dom, &cu, &rho.scaled(c.abs()), &one, 40).unwrap();
            prop_assert!((r - rc).abs() <= 1e-12 * r.abs().max(1.0));
        }
    }
}
