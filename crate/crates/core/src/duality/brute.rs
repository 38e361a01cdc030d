//! Reference moduli on tiny meshes: every family member is listed and the
//! fully constrained program is solved by a log-barrier interior point method.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::families::{curve_usage, surface_usage, truncation_mask, FamilyKind, FamilySpec, UsageVector};
use crate::mesh::{MeshDomain, RegionTriple};
use crate::{Error, Result};

/// Largest mesh the enumeration accepts.
pub const BRUTE_FORCE_MAX_CELLS: usize = 20;

/// Relative duality gap the barrier method runs down to.
const GAP: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BruteForce {
    #[serde(with = "crate::serde_f64")]
    pub lower: f64,
    #[serde(with = "crate::serde_f64")]
    pub upper: f64,
    /// Number of family members enumerated.
    pub objects: usize,
}

impl BruteForce {
    pub fn value(&self) -> f64 {
        if self.upper.is_infinite() {
            self.upper
        } else {
            0.5 * (self.lower + self.upper)
        }
    }
}

/// `mod_p` of the family by enumeration: all chordless simple paths for a
/// connecting family (any other path uses more of every cell it shares with
/// a shortcut), all inclusion-minimal separating face sets for a separating
/// one.
pub fn brute_force_modulus(dom: &MeshDomain, spec: &FamilySpec, p: f64) -> Result<BruteForce> {
    if dom.num_cells() > BRUTE_FORCE_MAX_CELLS {
        return Err(Error::TooLarge { cells: dom.num_cells(), limit: BRUTE_FORCE_MAX_CELLS });
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidProblem(format!("p = {p} must lie in (1, inf)")));
    }
    let rows = match spec.kind() {
        FamilyKind::Connecting => path_family(dom, spec.region())?,
        FamilyKind::Separating => cut_family(dom, spec)?,
    };
    let objects = rows.len();
    if rows.is_empty() {
        return Ok(BruteForce { lower: 0.0, upper: 0.0, objects });
    }
    if rows.iter().any(|r| r.is_empty()) {
        return Ok(BruteForce { lower: f64::INFINITY, upper: f64::INFINITY, objects });
    }
    let (lower, upper) = barrier(&rows, &dom.measures(), p);
    Ok(BruteForce { lower, upper, objects })
}

/// Simple `E -> F` paths with no chord and no interior cell in `E u F`.
pub fn path_family(dom: &MeshDomain, region: &RegionTriple) -> Result<Vec<UsageVector>> {
    struct Walk<'a> {
        dom: &'a MeshDomain,
        region: &'a RegionTriple,
        on_path: Vec<bool>,
        path: Vec<usize>,
        out: Vec<Vec<usize>>,
    }
    impl Walk<'_> {
        fn step(&mut self) {
            let c = *self.path.last().unwrap();
            if self.region.in_f(c) {
                self.out.push(self.path.clone());
                return;
            }
            for &(o, _) in self.dom.neighbors(c) {
                if self.on_path[o] || !self.region.in_g(o) || self.region.in_e(o) {
                    continue;
                }
                let chord = self.dom.neighbors(o).iter().any(|&(x, _)| x != c && self.on_path[x]);
                if chord {
                    continue;
                }
                self.on_path[o] = true;
                self.path.push(o);
                self.step();
                self.path.pop();
                self.on_path[o] = false;
            }
        }
    }
    let mut walk = Walk { dom, region, on_path: vec![false; dom.num_cells()], path: Vec::new(), out: Vec::new() };
    for &e in region.e() {
        walk.on_path[e] = true;
        walk.path.push(e);
        walk.step();
        walk.path.pop();
        walk.on_path[e] = false;
    }
    walk.out.iter().map(|p| curve_usage(dom, region, p)).collect()
}

/// Inclusion-minimal separating face sets made of allowed faces. Each is the
/// boundary of a set `E ⊂ S ⊂ G - F`; all such `S` are tried.
pub fn cut_family(dom: &MeshDomain, spec: &FamilySpec) -> Result<Vec<UsageVector>> {
    let region = spec.region();
    let allowed = truncation_mask(dom, region, spec.truncation_j());
    let free: Vec<usize> = region.g().iter().copied().filter(|&c| !region.in_e(c) && !region.in_f(c)).collect();
    let inner: Vec<usize> = (0..dom.num_faces())
        .filter(|&f| dom.face(f).cells().filter(|&c| region.in_g(c)).count() == 2)
        .collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    let mut in_s = vec![false; dom.num_cells()];
    for mask in 0u64..(1u64 << free.len()) {
        in_s.fill(false);
        for &e in region.e() {
            in_s[e] = true;
        }
        for (k, &c) in free.iter().enumerate() {
            in_s[c] = mask >> k & 1 == 1;
        }
        let cut: Vec<usize> = inner
            .iter()
            .copied()
            .filter(|&f| {
                let face = dom.face(f);
                in_s[face.lo] != in_s[face.hi.expect("interior face")]
            })
            .collect();
        if cut.iter().any(|&f| !allowed[f]) || !is_minimal_separator(dom, region, &cut) {
            continue;
        }
        if seen.insert(cut.clone()) {
            out.push(surface_usage(dom, region, &cut)?);
        }
    }
    Ok(out)
}

/// Separates, and every face joins the part reachable from `E` to the part
/// reachable from `F`.
fn is_minimal_separator(dom: &MeshDomain, region: &RegionTriple, cut: &[usize]) -> bool {
    let mut removed = vec![false; dom.num_faces()];
    for &f in cut {
        removed[f] = true;
    }
    let reach = |from: &[usize]| {
        let mut seen = vec![false; dom.num_cells()];
        let mut stack = from.to_vec();
        for &c in from {
            seen[c] = true;
        }
        while let Some(c) = stack.pop() {
            for &(o, f) in dom.neighbors(c) {
                if !removed[f] && !seen[o] && region.in_g(o) {
                    seen[o] = true;
                    stack.push(o);
                }
            }
        }
        seen
    };
    let from_e = reach(region.e());
    if region.f().iter().any(|&c| from_e[c]) {
        return false;
    }
    let from_f = reach(region.f());
    cut.iter().all(|&f| {
        let face = dom.face(f);
        let hi = face.hi.expect("interior face");
        (from_e[face.lo] && from_f[hi]) || (from_f[face.lo] && from_e[hi])
    })
}

/// Minimizes `sum mu x^p` subject to `N_j . x >= 1` by a log-barrier method
/// with Newton steps on the cells some row uses. Returns a bracket: the
/// barrier's dual bound and the objective at a strictly feasible point.
fn barrier(rows: &[UsageVector], mu: &[f64], p: f64) -> (f64, f64) {
    let mut used: Vec<usize> = rows.iter().flat_map(|r| r.entries().iter().map(|e| e.0)).collect();
    used.sort_unstable();
    used.dedup();
    let n = used.len();
    let local = |c: usize| used.binary_search(&c).expect("used cell");
    let a: Vec<Vec<(usize, f64)>> = rows
        .iter()
        .map(|r| r.entries().iter().map(|&(c, w)| (local(c), w)).collect())
        .collect();
    let m: Vec<f64> = used.iter().map(|&c| mu[c]).collect();
    let objective = |x: &DVector<f64>| -> f64 { x.iter().zip(&m).map(|(v, mu)| mu * v.powf(p)).sum() };
    let slacks = |x: &DVector<f64>| -> Vec<f64> {
        a.iter().map(|row| row.iter().map(|&(i, w)| w * x[i]).sum::<f64>() - 1.0).collect()
    };

    // Start where every constraint has slack at least 1.
    let least = a.iter().map(|row| row.iter().map(|e| e.1).sum::<f64>()).fold(f64::INFINITY, f64::min);
    let mut x = DVector::from_element(n, 2.0 / least);
    let barrier_terms = (rows.len() + n) as f64;
    let mut t = barrier_terms / objective(&x);

    let phi = |x: &DVector<f64>, t: f64| -> f64 {
        if x.iter().any(|v| *v <= 0.0) {
            return f64::INFINITY;
        }
        let r = slacks(x);
        if r.iter().any(|v| *v <= 0.0) {
            return f64::INFINITY;
        }
        t * objective(x) - r.iter().map(|v| v.ln()).sum::<f64>() - x.iter().map(|v| v.ln()).sum::<f64>()
    };

    loop {
        for _ in 0..200 {
            let r = slacks(&x);
            let mut grad = DVector::zeros(n);
            let mut hess = DMatrix::zeros(n, n);
            for i in 0..n {
                grad[i] = t * p * m[i] * x[i].powf(p - 1.0) - 1.0 / x[i];
                hess[(i, i)] = t * p * (p - 1.0) * m[i] * x[i].powf(p - 2.0) + 1.0 / (x[i] * x[i]);
            }
            for (row, &rj) in a.iter().zip(&r) {
                for &(i, wi) in row {
                    grad[i] -= wi / rj;
                    for &(k, wk) in row {
                        hess[(i, k)] += wi * wk / (rj * rj);
                    }
                }
            }
            let Some(chol) = hess.cholesky() else { break };
            let dx = -chol.solve(&grad);
            let decrement = -grad.dot(&dx);
            if decrement / 2.0 <= 1e-14 {
                break;
            }
            let f0 = phi(&x, t);
            let mut step = 1.0;
            loop {
                let trial = &x + &dx * step;
                if phi(&trial, t) <= f0 - 0.25 * step * decrement {
                    x = trial;
                    break;
                }
                step *= 0.5;
                if step < 1e-20 {
                    break;
                }
            }
            if step < 1e-20 {
                break;
            }
        }
        let f = objective(&x);
        // The barrier's central point is optimal for a dual feasible point of
        // value f - (#terms) / t.
        if barrier_terms / t <= GAP * f {
            return ((f - barrier_terms / t).max(0.0), f);
        }
        t *= 8.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_domain, build_grid_domain};

    fn strip() -> (MeshDomain, RegionTriple) {
        let dom = build_box_domain(&[3, 1], 1.0).unwrap();
        let region = RegionTriple::with_point_ends(&dom, vec![0, 1, 2], vec![0], vec![2]).unwrap();
        (dom, region)
    }

    #[test]
    fn strip_connecting() {
        let (dom, region) = strip();
        let b = brute_force_modulus(&dom, &FamilySpec::connecting(region), 2.0).unwrap();
        assert_eq!(b.objects, 1);
        assert!((b.value() - 2.0 / 3.0).abs() < 1e-9, "{b:?}");
        assert!(b.upper - b.lower <= 1e-10 * b.upper);
    }

    #[test]
    fn two_by_two_separating() {
        // E and F are opposite corners. Each of the four sets between them
        // has a minimal boundary.
        let dom = build_grid_domain(2, 2, 1.0).unwrap();
        let region = RegionTriple::with_point_ends(&dom, vec![0, 1, 2, 3], vec![0], vec![3]).unwrap();
        let spec = FamilySpec::separating(region, None).unwrap();
        let b = brute_force_modulus(&dom, &spec, 2.0).unwrap();
        assert_eq!(b.objects, 4);
        assert!(b.value() > 0.0 && b.value().is_finite());
    }

    #[test]
    fn empty_and_infeasible_families() {
        let dom = build_grid_domain(2, 4, 0.25).unwrap();
        let region = RegionTriple::whole(&dom, (0..4).collect(), (12..16).collect()).unwrap();
        let spec = FamilySpec::separating(region, Some(1)).unwrap();
        let b = brute_force_modulus(&dom, &spec, 2.0).unwrap();
        assert_eq!((b.objects, b.value()), (0, 0.0));
    }

    #[test]
    fn refuses_large_meshes() {
        let dom = build_grid_domain(2, 5, 0.2).unwrap();
        let region = RegionTriple::whole(&dom, vec![0, 1], vec![23, 24]).unwrap();
        assert!(matches!(
            brute_force_modulus(&dom, &FamilySpec::connecting(region), 2.0),
            Err(Error::TooLarge { cells: 25, .. })
        ));
    }
}
