use serde::Serialize;

use super::flow::FlowGraph;
use super::{FamilyKind, FamilySpec};
use crate::mesh::{MeshDomain, RegionTriple, UNREACHABLE};
use crate::{Error, Result};

/// A cheapest separating face set and its weight
/// `sum_f a_f (rho_a + rho_b) / 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutMin {
    pub faces: Vec<usize>,
    pub value: f64,
}

/// Per-face flag: may the face belong to a `j`-truncated separating set?
///
/// A face is at distance `max(d(a), d(b))` from `E u F`, `d` the cell-graph
/// distance of its two cells, and is allowed when that exceeds `1/j`. Without
/// truncation every face is allowed. Boundary faces are never allowed.
pub fn truncation_mask(dom: &MeshDomain, region: &RegionTriple, truncation_j: Option<u32>) -> Vec<bool> {
    let hops = truncation_j.map(|_| {
        let ends: Vec<usize> = region.e().iter().chain(region.f()).copied().collect();
        dom.hops_from(&ends, None)
    });
    (0..dom.num_faces())
        .map(|f| face_allowed(dom, hops.as_deref(), truncation_j, f))
        .collect()
}

/// Single-face version of [`truncation_mask`], given the hop counts to
/// `E u F`.
pub fn face_allowed(dom: &MeshDomain, hops: Option<&[u32]>, truncation_j: Option<u32>, f: usize) -> bool {
    let face = dom.face(f);
    let Some(hi) = face.hi else { return false };
    match (hops, truncation_j) {
        (Some(hops), Some(j)) => {
            let k = hops[face.lo].max(hops[hi]);
            k == UNREACHABLE || f64::from(k) * dom.h() > 1.0 / f64::from(j)
        }
        _ => true,
    }
}

/// Cheapest face set separating `E` from `F` in `G` under `rho`, restricted
/// to allowed faces when the family is truncated. `None` when no allowed set
/// separates (the family is empty).
///
/// Solved as a minimum cut in the cell graph of `G` with face capacities
/// `a_f (rho_a + rho_b) / 2`. Disallowed faces and faces inside `E` or inside
/// `F` get unbounded capacity. The returned set is the boundary between the
/// source side of the residual graph and the part of the rest that is
/// connected to `F`, which makes it inclusion-minimal.
pub fn min_weight_cut(dom: &MeshDomain, spec: &FamilySpec, rho: &[f64]) -> Result<Option<CutMin>> {
    if spec.kind() != FamilyKind::Separating {
        return Err(Error::InvalidProblem("min_weight_cut needs a separating family".into()));
    }
    if rho.len() != dom.num_cells() || rho.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidProblem("rho must be a finite nonnegative field on the cells".into()));
    }
    Ok(CutNetwork::new(dom, spec).min_cut(dom, spec.region(), rho))
}

/// The flow network of a separating family, reusable across densities.
pub(super) struct CutNetwork {
    graph: FlowGraph,
    /// Local node of each mesh cell in `G`.
    local: Vec<usize>,
    /// Mesh face, or `None` for source and sink arcs.
    edge_face: Vec<Option<usize>>,
    /// Unbounded edges.
    edge_inf: Vec<bool>,
    source: usize,
    sink: usize,
}

impl CutNetwork {
    pub(super) fn new(dom: &MeshDomain, spec: &FamilySpec) -> Self {
        let region = spec.region();
        let mut local = vec![usize::MAX; dom.num_cells()];
        for (i, &c) in region.g().iter().enumerate() {
            local[c] = i;
        }
        let source = region.g().len();
        let sink = source + 1;
        let allowed = truncation_mask(dom, region, spec.truncation_j());
        let mut edges = Vec::new();
        let mut edge_face = Vec::new();
        let mut edge_inf = Vec::new();
        for (fi, f) in dom.faces().iter().enumerate() {
            let Some(hi) = f.hi else { continue };
            if !(region.in_g(f.lo) && region.in_g(hi)) {
                continue;
            }
            let same_end = (region.in_e(f.lo) && region.in_e(hi)) || (region.in_f(f.lo) && region.in_f(hi));
            edges.push((local[f.lo], local[hi]));
            edge_face.push(Some(fi));
            edge_inf.push(same_end || !allowed[fi]);
        }
        for &e in region.e() {
            edges.push((source, local[e]));
            edge_face.push(None);
            edge_inf.push(true);
        }
        for &f in region.f() {
            edges.push((local[f], sink));
            edge_face.push(None);
            edge_inf.push(true);
        }
        Self {
            graph: FlowGraph::new(sink + 1, &edges),
            local,
            edge_face,
            edge_inf,
            source,
            sink,
        }
    }

    pub(super) fn min_cut(&self, dom: &MeshDomain, region: &RegionTriple, rho: &[f64]) -> Option<CutMin> {
        let weight = |f: usize| {
            let face = dom.face(f);
            face.area * (rho[face.lo] + rho[face.hi.expect("interior face")]) / 2.0
        };
        let finite: f64 = self
            .edge_face
            .iter()
            .zip(&self.edge_inf)
            .filter(|(_, &inf)| !inf)
            .map(|(f, _)| weight(f.expect("face edge")))
            .sum();
        let big = 2.0 * finite + 1.0;
        let mut cap = Vec::with_capacity(2 * self.edge_face.len());
        for (f, &inf) in self.edge_face.iter().zip(&self.edge_inf) {
            let c = if inf { big } else { weight(f.expect("face edge")) };
            cap.push(c);
            cap.push(c);
        }
        let eps = 1e-14 * finite;
        let flow = self.graph.max_flow(self.source, self.sink, &mut cap, eps);
        if flow > finite * (1.0 + 1e-9) + eps {
            return None;
        }
        let s_side = self.graph.residual_reach(self.source, &cap, eps);

        // Cells connected to F without entering the source side.
        let n = region.num_cells();
        let mut t_side = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        for &f in region.f() {
            if !s_side[self.local[f]] {
                t_side[f] = true;
                stack.push(f);
            }
        }
        while let Some(c) = stack.pop() {
            for &(o, _) in dom.neighbors(c) {
                if region.in_g(o) && !t_side[o] && !s_side[self.local[o]] {
                    t_side[o] = true;
                    stack.push(o);
                }
            }
        }
        let mut faces = Vec::new();
        let mut value = 0.0;
        for f in self.edge_face.iter().flatten().copied() {
            let face = dom.face(f);
            let (a, b) = (face.lo, face.hi.expect("interior face"));
            let (sa, sb) = (s_side[self.local[a]], s_side[self.local[b]]);
            if (sa && t_side[b]) || (sb && t_side[a]) {
                faces.push(f);
                value += weight(f);
            }
        }
        Some(CutMin { faces, value })
    }
}
