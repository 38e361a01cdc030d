use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use ordered_float::OrderedFloat;
use serde::Serialize;

use super::{FamilyKind, FamilySpec};
use crate::mesh::{MeshDomain, RegionTriple};
use crate::{Error, Result};

/// A cheapest curve and its weight `sum usage_c rho_c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveMin {
    pub path: Vec<usize>,
    pub value: f64,
}

/// Cheapest simple `E -> F` path in `G` under `rho`, or `None` when `E` and
/// `F` are not connected in `G`.
///
/// Node weights become edge weights `(h/2)(rho_a + rho_b)`, which reproduces
/// the curve usage exactly. Ties are broken by cell id.
pub fn min_weight_curve(dom: &MeshDomain, spec: &FamilySpec, rho: &[f64]) -> Result<Option<CurveMin>> {
    if spec.kind() != FamilyKind::Connecting {
        return Err(Error::InvalidProblem("min_weight_curve needs a connecting family".into()));
    }
    if rho.len() != dom.num_cells() || rho.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidProblem("rho must be a nonnegative field on the cells".into()));
    }
    Ok(shortest(dom, spec.region(), rho))
}

pub(super) fn shortest(dom: &MeshDomain, region: &RegionTriple, rho: &[f64]) -> Option<CurveMin> {
    let n = dom.num_cells();
    let half = dom.h() / 2.0;
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &e in region.e() {
        dist[e] = 0.0;
        heap.push(Reverse((OrderedFloat(0.0), e)));
    }
    while let Some(Reverse((OrderedFloat(d), c))) = heap.pop() {
        if done[c] {
            continue;
        }
        done[c] = true;
        if region.in_f(c) {
            let mut path = vec![c];
            let mut at = c;
            while pred[at] != usize::MAX {
                at = pred[at];
                path.push(at);
            }
            path.reverse();
            return Some(CurveMin { path, value: d });
        }
        for &(o, _) in dom.neighbors(c) {
            if done[o] || !region.in_g(o) {
                continue;
            }
            let nd = d + half * (rho[c] + rho[o]);
            if nd < dist[o] {
                dist[o] = nd;
                pred[o] = c;
                heap.push(Reverse((OrderedFloat(nd), o)));
            }
        }
    }
    // Every curve has infinite weight, or there is no curve at all.
    fewest_hops(dom, region).map(|path| CurveMin { path, value: f64::INFINITY })
}

/// Cheapest paths from `E` to each `F` cell whose weight is below
/// `threshold`, read off one shortest-path tree. Paths stop at the first `F`
/// cell they meet.
pub(super) fn tree_paths(dom: &MeshDomain, region: &RegionTriple, rho: &[f64], threshold: f64) -> Vec<Vec<usize>> {
    let n = dom.num_cells();
    let half = dom.h() / 2.0;
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &e in region.e() {
        dist[e] = 0.0;
        heap.push(Reverse((OrderedFloat(0.0), e)));
    }
    let mut out = Vec::new();
    while let Some(Reverse((OrderedFloat(d), c))) = heap.pop() {
        if done[c] {
            continue;
        }
        if d >= threshold {
            break;
        }
        done[c] = true;
        if region.in_f(c) {
            let mut path = vec![c];
            let mut at = c;
            while pred[at] != usize::MAX {
                at = pred[at];
                path.push(at);
            }
            path.reverse();
            out.push(path);
            continue;
        }
        for &(o, _) in dom.neighbors(c) {
            if done[o] || !region.in_g(o) {
                continue;
            }
            let nd = d + half * (rho[c] + rho[o]);
            if nd < dist[o] {
                dist[o] = nd;
                pred[o] = c;
                heap.push(Reverse((OrderedFloat(nd), o)));
            }
        }
    }
    out
}

fn fewest_hops(dom: &MeshDomain, region: &RegionTriple) -> Option<Vec<usize>> {
    let n = dom.num_cells();
    let mut pred = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = region.e().iter().copied().collect();
    for &e in region.e() {
        seen[e] = true;
    }
    while let Some(c) = queue.pop_front() {
        if region.in_f(c) {
            let mut path = vec![c];
            let mut at = c;
            while pred[at] != usize::MAX {
                at = pred[at];
                path.push(at);
            }
            path.reverse();
            return Some(path);
        }
        for &(o, _) in dom.neighbors(c) {
            if !seen[o] && region.in_g(o) {
                seen[o] = true;
                pred[o] = c;
                queue.push_back(o);
            }
        }
    }
    None
}
