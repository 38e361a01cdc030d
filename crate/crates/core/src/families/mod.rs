//! Connecting curve families and separating cut families, their usage
//! vectors, and the most-violated-object oracles used by the solver.
//!
//! A density `rho` is admissible for a family when every member integrates it
//! to at least one, i.e. `usage . rho >= 1`. The oracles return the member
//! minimizing that integral.

mod curves;
mod cuts;
mod flow;
mod usage;

use serde::{Deserialize, Serialize};

pub use curves::{min_weight_curve, CurveMin};
pub use cuts::{face_allowed, min_weight_cut, truncation_mask, CutMin};
pub use usage::{curve_usage, surface_usage};

use crate::mesh::{MeshDomain, RegionTriple};
use crate::{Error, Result};

/// Nonnegative per-cell density. `+inf` is allowed and acts as a wall for the
/// curve oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Density(Vec<f64>);

impl Density {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidProblem(format!(
                "density value {} at cell {i} is not nonnegative",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, v: f64) -> Self {
        assert!(v >= 0.0, "negative density");
        Self(vec![v; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|v| v * s).collect())
    }

    /// `sum_c mu_c rho_c^p`.
    pub fn energy(&self, dom: &MeshDomain, p: f64) -> f64 {
        self.0
            .iter()
            .zip(dom.cells())
            .map(|(r, c)| c.measure * r.powf(p))
            .sum()
    }

    /// Writes `cell,rho` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cell", "rho"])?;
        for (c, v) in self.0.iter().enumerate() {
            w.write_record([c.to_string(), crate::serde_f64::fmt(*v)])?;
        }
        w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    }
}

impl std::ops::Index<usize> for Density {
    type Output = f64;
    fn index(&self, c: usize) -> &f64 {
        &self.0[c]
    }
}

/// Sparse cell-to-weight map, sorted by cell. For a curve the weight is the
/// length it spends in the cell; for a cut it is the share of face area
/// attributed to the cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UsageVector(Vec<(usize, f64)>);

impl UsageVector {
    /// Merges duplicate cells and drops zero weights.
    pub fn from_entries(mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (c, w) in entries {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 += w,
                _ => out.push((c, w)),
            }
        }
        out.retain(|e| e.1 > 0.0);
        Self(out)
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, c: usize) -> f64 {
        self.0
            .binary_search_by_key(&c, |e| e.0)
            .map_or(0.0, |i| self.0[i].1)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().map(|e| e.1).sum()
    }

    /// `sum_c usage_c rho_c`.
    pub fn dot(&self, rho: &[f64]) -> f64 {
        self.0.iter().map(|&(c, w)| w * rho[c]).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|&(c, w)| (c, w * s)).collect())
    }

    /// Bitwise identity key, used to recognise repeated objects.
    pub fn key(&self) -> Vec<(usize, u64)> {
        self.0.iter().map(|&(c, w)| (c, w.to_bits())).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Curves joining `E` to `F` inside `G`.
    Connecting,
    /// Face sets separating `E` from `F` in `G`.
    Separating,
}

/// A family of objects attached to a region.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    kind: FamilyKind,
    region: RegionTriple,
    truncation_j: Option<u32>,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, region: RegionTriple, truncation_j: Option<u32>) -> Result<Self> {
        match (kind, truncation_j) {
            (FamilyKind::Connecting, Some(_)) => Err(Error::InvalidProblem(
                "truncation applies to separating families only".into(),
            )),
            (_, Some(0)) => Err(Error::InvalidProblem("truncation_j must be positive".into())),
            _ => Ok(Self { kind, region, truncation_j }),
        }
    }

    pub fn connecting(region: RegionTriple) -> Self {
        Self { kind: FamilyKind::Connecting, region, truncation_j: None }
    }

    pub fn separating(region: RegionTriple, truncation_j: Option<u32>) -> Result<Self> {
        Self::new(FamilyKind::Separating, region, truncation_j)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn region(&self) -> &RegionTriple {
        &self.region
    }

    pub fn truncation_j(&self) -> Option<u32> {
        self.truncation_j
    }
}

/// What an oracle finds for a density.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleAnswer {
    /// A member minimizing `usage . rho`, with that minimum.
    Object { usage: UsageVector, value: f64 },
    /// The family has no members.
    Empty,
}

/// Most-violated-object oracle over a family of usage vectors.
pub trait FamilyOracle {
    /// Number of cells the densities live on.
    fn num_cells(&self) -> usize;
    fn measures(&self) -> &[f64];
    fn most_violated(&self, rho: &[f64]) -> Result<OracleAnswer>;

    /// Further members weighing less than `threshold` under `rho`. Oracles
    /// may return none; the solver adds whatever it gets as extra constraints.
    fn more_violated(&self, _rho: &[f64], _threshold: f64) -> Result<Vec<UsageVector>> {
        Ok(Vec::new())
    }
}

/// Oracle for a [`FamilySpec`] on a mesh.
pub struct MeshOracle<'a> {
    dom: &'a MeshDomain,
    spec: &'a FamilySpec,
    measures: Vec<f64>,
    cut: Option<cuts::CutNetwork>,
}

impl<'a> MeshOracle<'a> {
    pub fn new(dom: &'a MeshDomain, spec: &'a FamilySpec) -> Result<Self> {
        if spec.region().num_cells() != dom.num_cells() {
            return Err(Error::InvalidRegion("region was built for a different mesh".into()));
        }
        let cut = match spec.kind() {
            FamilyKind::Separating => Some(cuts::CutNetwork::new(dom, spec)),
            FamilyKind::Connecting => None,
        };
        Ok(Self { dom, spec, measures: dom.measures(), cut })
    }
}

impl FamilyOracle for MeshOracle<'_> {
    fn num_cells(&self) -> usize {
        self.dom.num_cells()
    }

    fn measures(&self) -> &[f64] {
        &self.measures
    }

    fn most_violated(&self, rho: &[f64]) -> Result<OracleAnswer> {
        match &self.cut {
            None => Ok(match curves::shortest(self.dom, self.spec.region(), rho) {
                Some(m) => OracleAnswer::Object {
                    usage: curve_usage(self.dom, self.spec.region(), &m.path)?,
                    value: m.value,
                },
                None => OracleAnswer::Empty,
            }),
            Some(net) => Ok(match net.min_cut(self.dom, self.spec.region(), rho) {
                Some(m) => OracleAnswer::Object {
                    usage: surface_usage(self.dom, self.spec.region(), &m.faces)?,
                    value: m.value,
                },
                None => OracleAnswer::Empty,
            }),
        }
    }

    /// For curves: the cheapest path to every `F` cell below the threshold.
    fn more_violated(&self, rho: &[f64], threshold: f64) -> Result<Vec<UsageVector>> {
        if self.cut.is_some() {
            return Ok(Vec::new());
        }
        curves::tree_paths(self.dom, self.spec.region(), rho, threshold)
            .iter()
            .map(|p| curve_usage(self.dom, self.spec.region(), p))
            .collect()
    }
}

/// Whether removing `faces` leaves `E` and `F` in different components of `G`.
/// Non-minimal separating sets are accepted.
pub fn is_separating(dom: &MeshDomain, spec: &FamilySpec, faces: &[usize]) -> Result<bool> {
    let region = spec.region();
    let mut removed = vec![false; dom.num_faces()];
    for &f in faces {
        dom.check_face(f)?;
        removed[f] = true;
    }
    let mut seen = vec![false; dom.num_cells()];
    let mut stack: Vec<usize> = region.e().to_vec();
    for &c in &stack {
        seen[c] = true;
    }
    while let Some(c) = stack.pop() {
        if region.in_f(c) {
            return Ok(false);
        }
        for &(o, f) in dom.neighbors(c) {
            if !removed[f] && !seen[o] && region.in_g(o) {
                seen[o] = true;
                stack.push(o);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests;
