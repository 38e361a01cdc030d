//! Cell-graph distances and measure regularity diagnostics.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MeshDomain;
use crate::rng;

/// Hop count of unreachable cells.
pub const UNREACHABLE: u32 = u32::MAX;

impl MeshDomain {
    /// Multi-source breadth-first hop counts, optionally restricted to the
    /// cells where `allowed` is true.
    pub fn hops_from(&self, sources: &[usize], allowed: Option<&[bool]>) -> Vec<u32> {
        let mut hops = vec![UNREACHABLE; self.num_cells()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if allowed.is_none_or(|a| a[s]) && hops[s] == UNREACHABLE {
                hops[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(c) = queue.pop_front() {
            for &(o, _) in self.neighbors(c) {
                if hops[o] == UNREACHABLE && allowed.is_none_or(|a| a[o]) {
                    hops[o] = hops[c] + 1;
                    queue.push_back(o);
                }
            }
        }
        hops
    }

    /// Graph distances (step length `h`) from a set of cells; `+inf` where
    /// unreachable.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<f64> {
        self.hops_from(sources, None)
            .into_iter()
            .map(|k| self.hops_to_length(k))
            .collect()
    }

    pub(crate) fn hops_to_length(&self, k: u32) -> f64 {
        if k == UNREACHABLE {
            f64::INFINITY
        } else {
            f64::from(k) * self.h()
        }
    }

    /// Shortest-path distance between two cells in the face-adjacency graph,
    /// `+inf` across components.
    pub fn geodesic_distance(&self, c1: usize, c2: usize) -> f64 {
        if c1 == c2 {
            return 0.0;
        }
        let hops = self.hops_from(&[c1], None);
        self.hops_to_length(hops[c2])
    }

    /// Cells at graph distance strictly less than `radius` from `center`.
    pub fn ball(&self, center: usize, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.ball_visit(center, radius, |c, _| out.push(c));
        out.sort_unstable();
        out
    }

    /// Calls `visit(cell, hops)` for every cell of the open ball, in
    /// breadth-first order.
    pub(crate) fn ball_visit(&self, center: usize, radius: f64, mut visit: impl FnMut(usize, u32)) {
        if !(radius > 0.0) {
            return;
        }
        // Largest hop count k with k h < radius.
        let max_hops = ((radius / self.h()).ceil() as i64 - 1).max(0);
        let max_hops = if (max_hops as f64 + 1.0) * self.h() < radius {
            max_hops + 1
        } else {
            max_hops
        } as u32;
        let mut seen = std::collections::HashMap::new();
        let mut queue = VecDeque::from([(center, 0u32)]);
        seen.insert(center, 0u32);
        while let Some((c, k)) = queue.pop_front() {
            visit(c, k);
            if k == max_hops {
                continue;
            }
            for &(o, _) in self.neighbors(c) {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(o) {
                    e.insert(k + 1);
                    queue.push_back((o, k + 1));
                }
            }
        }
    }

    pub fn ball_measure(&self, center: usize, radius: f64) -> f64 {
        let mut m = 0.0;
        self.ball_visit(center, radius, |c, _| m += self.cell(c).measure);
        m
    }

    /// Number of connected components of the face-adjacency graph.
    pub fn component_count(&self) -> usize {
        let mut label = vec![false; self.num_cells()];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.num_cells() {
            if label[s] {
                continue;
            }
            count += 1;
            label[s] = true;
            stack.push(s);
            while let Some(c) = stack.pop() {
                for &(o, _) in self.neighbors(c) {
                    if !label[o] {
                        label[o] = true;
                        stack.push(o);
                    }
                }
            }
        }
        count
    }

    /// Graph diameter estimate by a double breadth-first sweep (exact on
    /// boxes).
    pub fn diameter(&self) -> f64 {
        if self.num_cells() == 0 {
            return 0.0;
        }
        let far = |src: usize| {
            let hops = self.hops_from(&[src], None);
            hops.iter()
                .enumerate()
                .filter(|(_, &k)| k != UNREACHABLE)
                .max_by_key(|&(i, &k)| (k, std::cmp::Reverse(i)))
                .map(|(i, &k)| (i, k))
                .unwrap_or((src, 0))
        };
        let (a, _) = far(0);
        let (_, k) = far(a);
        f64::from(k) * self.h()
    }

    /// Samples balls to estimate the Ahlfors bounds `a r^Q <= mu(B) <= A r^Q`
    /// and the doubling constant `mu(2B) <= C mu(B)`.
    ///
    /// Radii are drawn uniformly from `[2h, diam/2]` (just `2h` when the mesh
    /// is too small for that range).
    pub fn regularity_report(&self, samples: usize, seed: u64) -> RegularityReport {
        let mut rng = rng::stream(seed, rng::streams::REGULARITY);
        let q = self.dim() as i32;
        let r_min = 2.0 * self.h();
        let r_max = (self.diameter() / 2.0).max(r_min);
        let mut report = RegularityReport {
            a_hat: f64::INFINITY,
            a_upper_hat: 0.0,
            doubling_hat: 0.0,
            samples: 0,
        };
        if self.num_cells() == 0 {
            return report;
        }
        for _ in 0..samples.max(1) {
            let c = rng.random_range(0..self.num_cells());
            let r = if r_max > r_min { rng.random_range(r_min..=r_max) } else { r_min };
            report.observe(self, c, r, q);
        }
        report
    }

    /// Exhaustive version of [`regularity_report`](Self::regularity_report)
    /// over every cell and the dyadic radii `2h, 4h, ...` up to `diam/2`.
    pub fn regularity_exhaustive(&self) -> RegularityReport {
        let q = self.dim() as i32;
        let r_min = 2.0 * self.h();
        let r_max = (self.diameter() / 2.0).max(r_min);
        let mut report = RegularityReport {
            a_hat: f64::INFINITY,
            a_upper_hat: 0.0,
            doubling_hat: 0.0,
            samples: 0,
        };
        for c in 0..self.num_cells() {
            let mut r = r_min;
            while r <= r_max {
                report.observe(self, c, r, q);
                r *= 2.0;
            }
        }
        report
    }
}

/// Empirical Ahlfors and doubling bounds; a diagnostic only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// Smallest observed `mu(B(x, r)) / r^Q`.
    #[serde(with = "crate::serde_f64")]
    pub a_hat: f64,
    /// Largest observed `mu(B(x, r)) / r^Q`.
    pub a_upper_hat: f64,
    /// Largest observed `mu(B(x, 2r)) / mu(B(x, r))`.
    pub doubling_hat: f64,
    pub samples: usize,
}

impl RegularityReport {
    fn observe(&mut self, dom: &MeshDomain, c: usize, r: f64, q: i32) {
        let m1 = dom.ball_measure(c, r);
        let m2 = dom.ball_measure(c, 2.0 * r);
        let ratio = m1 / r.powi(q);
        self.a_hat = self.a_hat.min(ratio);
        self.a_upper_hat = self.a_upper_hat.max(ratio);
        self.doubling_hat = self.doubling_hat.max(m2 / m1);
        self.samples += 1;
    }

    /// `A_hat / a_hat`.
    pub fn ahlfors_spread(&self) -> f64 {
        self.a_upper_hat / self.a_hat
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_glued_cubes, build_grid_domain};

    /// All simple paths between two cells of a small graph; the shortest one
    /// gives the reference distance.
    fn brute_force_distance(dom: &MeshDomain, a: usize, b: usize) -> f64 {
        fn walk(dom: &MeshDomain, c: usize, b: usize, seen: &mut Vec<bool>, len: usize, best: &mut usize) {
            if c == b {
                *best = (*best).min(len);
                return;
            }
            for &(o, _) in dom.neighbors(c) {
                if !seen[o] {
                    seen[o] = true;
                    walk(dom, o, b, seen, len + 1, best);
                    seen[o] = false;
                }
            }
        }
        let mut seen = vec![false; dom.num_cells()];
        seen[a] = true;
        let mut best = usize::MAX;
        walk(dom, a, b, &mut seen, 0, &mut best);
        best as f64 * dom.h()
    }

    #[test]
    fn identity_and_one_step() {
        let d = build_grid_domain(2, 4, 0.25).unwrap();
        assert_eq!(d.geodesic_distance(5, 5), 0.0);
        assert_eq!(d.geodesic_distance(0, 1), 0.25);
        assert_eq!(d.geodesic_distance(0, 4), 0.25);
    }

    #[test]
    fn opposite_corners_of_2x2() {
        let d = build_grid_domain(2, 2, 0.5).unwrap();
        let expected = brute_force_distance(&d, 0, 3);
        assert_eq!(expected, 1.0);
        assert_eq!(d.geodesic_distance(0, 3), expected);
    }

    #[test]
    fn matches_enumeration_on_3x3() {
        let d = build_grid_domain(2, 3, 1.0).unwrap();
        for a in 0..9 {
            for b in 0..9 {
                assert_eq!(d.geodesic_distance(a, b), brute_force_distance(&d, a, b));
            }
        }
    }

    #[test]
    fn axis_aligned_distance_is_exact() {
        let d = build_grid_domain(3, 5, 0.2).unwrap();
        let at = |i: usize, j: usize, k: usize| (i * 5 + j) * 5 + k;
        for i in 0..5 {
            assert_eq!(d.geodesic_distance(at(0, 2, 1), at(i, 2, 1)), i as f64 * 0.2);
        }
    }

    #[test]
    fn unreachable_is_infinite() {
        let d = build_glued_cubes(0.5, 0, 4).unwrap();
        // Remove the glue by restricting to one copy, then compare across copies
        // of the full mesh through the glue.
        let c0 = 0;
        let c1 = 1;
        assert!(d.geodesic_distance(c0, c1).is_finite());
        let hops = d.hops_from(&[c0], Some(&vec![true, false].repeat(d.num_cells() / 2)));
        assert_eq!(hops[c1], UNREACHABLE);
    }

    #[test]
    fn glue_distance_goes_through_glue() {
        let d = build_glued_cubes(0.5, 0, 4).unwrap();
        let h = d.h();
        let at = |i: usize, j: usize, k: usize, copy: usize| ((i * 4 + j) * 4 + k) * 2 + copy;
        // Directly across the glue.
        assert_eq!(d.geodesic_distance(at(1, 1, 0, 0), at(1, 1, 0, 1)), h);
        // A corner cell must walk to the glue footprint [1, 2] x [1, 2].
        assert_eq!(d.geodesic_distance(at(0, 0, 0, 0), at(0, 0, 0, 1)), 5.0 * h);
    }

    #[test]
    fn ball_membership_is_strict() {
        let d = build_grid_domain(2, 5, 1.0).unwrap();
        assert_eq!(d.ball(12, 1.0), vec![12]);
        assert_eq!(d.ball(12, 1.5).len(), 5);
        assert_eq!(d.ball(12, 2.0).len(), 5);
    }

    #[test]
    fn regularity_on_unit_square() {
        let d = build_grid_domain(2, 16, 1.0 / 16.0).unwrap();
        let exhaustive = d.regularity_exhaustive();
        assert!(exhaustive.ahlfors_spread() <= 16.0, "{exhaustive:?}");
        let sampled = d.regularity_report(200, 7);
        assert!(sampled.ahlfors_spread() <= 16.0, "{sampled:?}");
        assert!(sampled.doubling_hat.is_finite());
    }

    #[test]
    fn regularity_single_cell() {
        let d = build_grid_domain(2, 2, 1.0).unwrap().restrict(|c| c.coords == [0, 0, 0]).unwrap();
        let r = d.regularity_report(3, 1);
        assert_eq!(r.a_hat, 1.0 / 4.0);
        assert_eq!(r.a_upper_hat, r.a_hat);
    }

    #[test]
    fn glued_cubes_are_doubling() {
        let d = build_glued_cubes(0.5, 1, 8).unwrap();
        let r = d.regularity_exhaustive();
        assert!(r.doubling_hat.is_finite() && r.doubling_hat < 64.0, "{r:?}");
    }
}
