//! Resolution-independent geometry descriptions.
//!
//! A [`GeometrySpec`] names a domain and the cell predicates picking out `G`,
//! `E` and `F`. [`GeometrySpec::build`] realizes it at a given spacing, so the
//! same description drives every level of a refinement study.

use serde::{Deserialize, Serialize};

use crate::mesh::{build_box_domain, build_glued_cubes, build_masked_domain, Cell, MeshDomain, RegionTriple};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// `[0, e_0] x ... x [0, e_{Q-1}]`. Every extent must be a whole number
    /// of cells at the requested spacing.
    Box { extents: Vec<f64> },
    /// Planar disk of radius `outer` plus a margin of 1.5 cells, with the
    /// origin of predicate coordinates at its center.
    Disk { outer: f64 },
    /// Two unit cubes glued along `[1/4, 3/4] x K_level x {0}`.
    GluedCubes { epsilon: f64, level: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Low,
    High,
}

/// Cell predicates, evaluated on cell centers in the domain's coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Predicate {
    Everything,
    /// The first or last layer of cells along `axis`.
    Layer { axis: usize, side: Side },
    /// Centers with `min <= x_axis < max`; a missing bound is unbounded.
    Slab {
        axis: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    /// Centers with `min <= |x| < max`.
    Shell {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    /// Cells of one copy of a glued space.
    Copy { index: usize },
    And { of: Vec<Predicate> },
    Not { of: Box<Predicate> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub domain: DomainSpec,
    /// Defaults to the whole mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Predicate>,
    pub e: Predicate,
    pub f: Predicate,
}

/// Per-axis cell index range of a mesh, used by [`Predicate::Layer`].
struct Bounds {
    lo: [i64; 3],
    hi: [i64; 3],
}

impl Bounds {
    fn of(dom: &MeshDomain) -> Self {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for c in dom.cells() {
            for a in 0..3 {
                lo[a] = lo[a].min(c.coords[a]);
                hi[a] = hi[a].max(c.coords[a]);
            }
        }
        Self { lo, hi }
    }
}

impl Predicate {
    fn eval(&self, cell: &Cell, x: &[f64], bounds: &Bounds) -> bool {
        let within = |v: f64, min: Option<f64>, max: Option<f64>| {
            min.is_none_or(|m| v >= m) && max.is_none_or(|m| v < m)
        };
        match self {
            Predicate::Everything => true,
            Predicate::Layer { axis, side } => match side {
                Side::Low => cell.coords[*axis] == bounds.lo[*axis],
                Side::High => cell.coords[*axis] == bounds.hi[*axis],
            },
            Predicate::Slab { axis, min, max } => within(x[*axis], *min, *max),
            Predicate::Shell { min, max } => within(x.iter().map(|v| v * v).sum::<f64>().sqrt(), *min, *max),
            Predicate::Copy { index } => cell.component == *index,
            Predicate::And { of } => of.iter().all(|p| p.eval(cell, x, bounds)),
            Predicate::Not { of } => !of.eval(cell, x, bounds),
        }
    }

    fn validate(&self, dim: usize, key: &str) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(format!("{key}: {msg}")));
        match self {
            Predicate::Layer { axis, .. } | Predicate::Slab { axis, .. } if *axis >= dim => {
                bad(format!("axis {axis} out of range for a {dim}-dimensional domain"))
            }
            Predicate::And { of } => of.iter().try_for_each(|p| p.validate(dim, key)),
            Predicate::Not { of } => of.validate(dim, key),
            _ => Ok(()),
        }
    }
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Box { extents } => extents.len(),
            DomainSpec::Disk { .. } => 2,
            DomainSpec::GluedCubes { .. } => 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(format!("geometry.domain: {msg}")));
        match self {
            DomainSpec::Box { extents } => {
                if !(2..=3).contains(&extents.len()) {
                    return bad(format!("{} extents given, need 2 or 3", extents.len()));
                }
                if let Some(e) = extents.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
                    return bad(format!("extent {e} must be positive"));
                }
            }
            DomainSpec::Disk { outer } if !(*outer > 0.0 && outer.is_finite()) => {
                return bad(format!("outer radius {outer} must be positive"));
            }
            DomainSpec::GluedCubes { epsilon, .. } if !(*epsilon > 0.0 && *epsilon < 1.0) => {
                return bad(format!("epsilon {epsilon} must lie in (0, 1)"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Cell count at spacing `h` without building; an upper bound for disks.
    pub fn cell_estimate(&self, h: f64) -> usize {
        let cells = |e: f64| (e / h).round().max(1.0) as usize;
        match self {
            DomainSpec::Box { extents } => extents.iter().map(|e| cells(*e)).product(),
            DomainSpec::Disk { outer } => disk_frame(*outer, h).0.pow(2),
            DomainSpec::GluedCubes { .. } => 2 * cells(1.0).pow(3),
        }
    }

    /// Meshes the domain at spacing `h`.
    pub fn build(&self, h: f64) -> Result<MeshDomain> {
        self.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidMesh(format!("h = {h} must be positive")));
        }
        match self {
            DomainSpec::Box { extents } => {
                let dims = extents.iter().map(|e| whole_cells(*e, h)).collect::<Result<Vec<_>>>()?;
                build_box_domain(&dims, h)
            }
            DomainSpec::Disk { outer } => {
                let (side, center) = disk_frame(*outer, h);
                let base = build_box_domain(&[side, side], h)?;
                let reach = outer + 1.5 * h;
                build_masked_domain(&base, |x| (x[0] - center).hypot(x[1] - center) < reach)
            }
            DomainSpec::GluedCubes { epsilon, level } => build_glued_cubes(*epsilon, *level, whole_cells(1.0, h)?),
        }
    }

    /// Predicate coordinates of a mesh point.
    fn local(&self, x: &[f64; 3], h: f64) -> [f64; 3] {
        match self {
            DomainSpec::Disk { outer } => {
                let (_, center) = disk_frame(*outer, h);
                [x[0] - center, x[1] - center, 0.0]
            }
            _ => *x,
        }
    }
}

/// Side cell count and center coordinate of the square holding a disk.
fn disk_frame(outer: f64, h: f64) -> (usize, f64) {
    let half = ((outer / h) + 2.0).ceil() as usize;
    (2 * half, half as f64 * h)
}

fn whole_cells(extent: f64, h: f64) -> Result<usize> {
    let n = (extent / h).round();
    if n < 1.0 || (n * h - extent).abs() > 1e-9 * extent {
        return Err(Error::InvalidMesh(format!("extent {extent} is not a whole number of cells of size {h}")));
    }
    Ok(n as usize)
}

impl GeometrySpec {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        let dim = self.domain.dim();
        if let Some(g) = &self.g {
            g.validate(dim, "geometry.g")?;
        }
        self.e.validate(dim, "geometry.e")?;
        self.f.validate(dim, "geometry.f")
    }

    /// Unit square with `E` and `F` the left and right columns of cells.
    pub fn unit_square() -> Self {
        Self::rectangle(1.0, 1.0)
    }

    /// `[0, a] x [0, b]` with `E` and `F` the columns at `x = 0` and `x = a`.
    pub fn rectangle(a: f64, b: f64) -> Self {
        Self {
            domain: DomainSpec::Box { extents: vec![a, b] },
            g: None,
            e: Predicate::Layer { axis: 0, side: Side::Low },
            f: Predicate::Layer { axis: 0, side: Side::High },
        }
    }

    /// Annulus `inner < |x| < outer`: `E` is the inner disk, `F` the cells
    /// at or beyond the outer radius.
    pub fn annulus(inner: f64, outer: f64) -> Self {
        Self {
            domain: DomainSpec::Disk { outer },
            g: None,
            e: Predicate::Shell { min: None, max: Some(inner) },
            f: Predicate::Shell { min: Some(outer), max: None },
        }
    }

    /// Glued cubes with `E` and `F` the top layers of the two copies.
    pub fn glued_cubes(epsilon: f64, level: u32) -> Self {
        let top = |index| Predicate::And {
            of: vec![Predicate::Copy { index }, Predicate::Layer { axis: 2, side: Side::High }],
        };
        Self { domain: DomainSpec::GluedCubes { epsilon, level }, g: None, e: top(0), f: top(1) }
    }

    /// Meshes the geometry at spacing `h` and selects the region.
    pub fn build(&self, h: f64) -> Result<(MeshDomain, RegionTriple)> {
        self.validate()?;
        let dom = self.domain.build(h)?;
        let region = self.region(&dom)?;
        Ok((dom, region))
    }

    /// Selects the region on a mesh built from this geometry.
    pub fn region(&self, dom: &MeshDomain) -> Result<RegionTriple> {
        let bounds = Bounds::of(dom);
        let select = |p: &Predicate| -> Vec<usize> {
            (0..dom.num_cells())
                .filter(|&c| {
                    let cell = dom.cell(c);
                    p.eval(cell, &self.domain.local(&cell.center, dom.h()), &bounds)
                })
                .collect()
        };
        let e = select(&self.e);
        let f = select(&self.f);
        match &self.g {
            None => RegionTriple::whole(dom, e, f),
            Some(g) => RegionTriple::new(dom, select(g), e, f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_region() {
        let (dom, region) = GeometrySpec::unit_square().build(0.25).unwrap();
        assert_eq!(dom.num_cells(), 16);
        assert_eq!(region.e().len(), 4);
        assert_eq!(region.f().len(), 4);
        assert!(region.e().iter().all(|&c| dom.cell(c).coords[0] == 0));
        assert!(region.f().iter().all(|&c| dom.cell(c).coords[0] == 3));
    }

    #[test]
    fn rectangle_needs_whole_cells() {
        assert!(GeometrySpec::rectangle(2.0, 1.0).build(0.3).is_err());
        let (dom, _) = GeometrySpec::rectangle(2.0, 1.0).build(0.125).unwrap();
        assert_eq!(dom.num_cells(), 16 * 8);
    }

    #[test]
    fn annulus_region() {
        let (dom, region) = GeometrySpec::annulus(0.25, 0.5).build(1.0 / 16.0).unwrap();
        assert_eq!(dom.component_count(), 1);
        let h = dom.h();
        for &c in region.e() {
            let x = DomainSpec::Disk { outer: 0.5 }.local(&dom.cell(c).center, h);
            assert!(x[0].hypot(x[1]) < 0.25);
        }
        // The outer layer is at least one cell thick all round.
        assert!(region.f().len() as f64 > 2.0 * std::f64::consts::PI * 0.5 / h);
    }

    #[test]
    fn glued_region() {
        let (dom, region) = GeometrySpec::glued_cubes(0.5, 1).build(0.125).unwrap();
        assert_eq!(region.e().len(), 64);
        assert!(region.e().iter().all(|&c| dom.cell(c).component == 0 && dom.cell(c).coords[2] == 7));
        assert!(region.f().iter().all(|&c| dom.cell(c).component == 1));
    }

    #[test]
    fn json_round_trip() {
        for g in [GeometrySpec::unit_square(), GeometrySpec::annulus(0.25, 0.5), GeometrySpec::glued_cubes(0.5, 2)] {
            let text = serde_json::to_string(&g).unwrap();
            assert_eq!(serde_json::from_str::<GeometrySpec>(&text).unwrap(), g);
        }
    }

    #[test]
    fn rejects_unknown_keys_and_bad_axes() {
        let text = r#"{"domain": {"kind": "box", "extents": [1, 1], "colour": 3},
                       "e": {"kind": "everything"}, "f": {"kind": "everything"}}"#;
        assert!(serde_json::from_str::<GeometrySpec>(text).is_err());
        let mut g = GeometrySpec::unit_square();
        g.e = Predicate::Layer { axis: 2, side: Side::Low };
        assert!(g.validate().is_err());
    }
}
