use super::cantor::{CantorApprox, CANTOR_HI, CANTOR_LO};
use super::{Cell, Face, FaceKind, GlueInfo, MeshDomain};
use crate::{Error, Result};

/// Axis-aligned box `[0, n_0 h] x ... x [0, n_{Q-1} h]` meshed into unit
/// cells. Cells are ordered lexicographically by lattice coordinates.
pub fn build_box_domain(dims: &[usize], h: f64) -> Result<MeshDomain> {
    let q = dims.len();
    if !(2..=3).contains(&q) {
        return Err(Error::InvalidMesh(format!("dimension {q} not in {{2, 3}}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidMesh(format!("spacing h = {h} must be positive")));
    }
    if dims.iter().any(|&n| n == 0) {
        return Err(Error::InvalidMesh("box has an empty side".into()));
    }
    let lattice = Lattice::new(dims, h);
    let cells = lattice.cells(1);
    let mut faces = Vec::new();
    lattice.push_faces(1, &mut faces, |_, _| None);
    MeshDomain::from_parts(q, h, cells, faces, None)
}

/// The cube `[0, side_cells h]^Q` meshed into `side_cells^Q` cells.
pub fn build_grid_domain(q: usize, side_cells: usize, h: f64) -> Result<MeshDomain> {
    if !(2..=3).contains(&q) {
        return Err(Error::InvalidMesh(format!("dimension {q} not in {{2, 3}}")));
    }
    if side_cells < 2 {
        return Err(Error::InvalidMesh(format!("side_cells = {side_cells} < 2")));
    }
    build_box_domain(&vec![side_cells; q], h)
}

/// Sub-mesh induced on the cells whose center satisfies `keep`.
pub fn build_masked_domain(base: &MeshDomain, keep: impl Fn(&[f64]) -> bool) -> Result<MeshDomain> {
    let dim = base.dim();
    base.restrict(|c| keep(&c.center[..dim]))
}

impl MeshDomain {
    /// Sub-mesh induced on the retained cells. Faces towards dropped cells
    /// become boundary faces; the retained set must be connected.
    pub fn restrict(&self, keep: impl Fn(&Cell) -> bool) -> Result<MeshDomain> {
        let mut map = vec![usize::MAX; self.num_cells()];
        let mut cells = Vec::new();
        for (i, c) in self.cells().iter().enumerate() {
            if keep(c) {
                map[i] = cells.len();
                cells.push(c.clone());
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let kept = |i: usize| (map[i] != usize::MAX).then_some(map[i]);
        let mut faces = Vec::new();
        for f in self.faces() {
            let lo = kept(f.lo);
            let hi = f.hi.and_then(kept);
            let face = match (lo, hi) {
                (Some(lo), Some(hi)) => Face { lo, hi: Some(hi), ..f.clone() },
                (Some(lo), None) if f.hi.is_some() => Face {
                    lo,
                    hi: None,
                    kind: FaceKind::Boundary,
                    outward: if f.kind == FaceKind::Glue { -1 } else { 1 },
                    ..f.clone()
                },
                (Some(lo), None) => Face { lo, ..f.clone() },
                (None, Some(hi)) => Face {
                    lo: hi,
                    hi: None,
                    kind: FaceKind::Boundary,
                    outward: -1,
                    ..f.clone()
                },
                (None, None) => continue,
            };
            faces.push(face);
        }
        let glue = self.glue().cloned();
        let dom = MeshDomain::from_parts(self.dim(), self.h(), cells, faces, glue)?;
        let components = dom.component_count();
        if components > 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(dom)
    }
}

/// Two copies of the unit cube meshed at `h = 1 / side_cells`, glued along the
/// bottom faces whose footprint meets `[1/4, 3/4] x K_m`.
///
/// A glued face's area is the exact measure of its footprint's intersection
/// with the glue set, so the total glue area is `(1/2) |K_m|` at every level
/// even when the Cantor intervals are narrower than a cell.
pub fn build_glued_cubes(epsilon: f64, cantor_level: u32, side_cells: usize) -> Result<MeshDomain> {
    let cantor = CantorApprox::new(epsilon, cantor_level)?;
    if side_cells < 4 || side_cells % 4 != 0 {
        return Err(Error::InvalidMesh(format!(
            "side_cells = {side_cells} does not align [1/4, 3/4] with grid lines"
        )));
    }
    let h = 1.0 / side_cells as f64;
    let rounded = cantor.rounded(h);
    let rounded_len: f64 = rounded.iter().map(|(a, b)| b - a).sum();

    let lattice = Lattice::new(&[side_cells; 3], h);
    let cells = lattice.cells(2);
    let mut faces = Vec::new();
    let mut glue_area = 0.0;
    let mut glue_count = 0;
    lattice.push_faces(2, &mut faces, |ix, _| {
        let x0 = ix[0] as f64 * h;
        let y0 = ix[1] as f64 * h;
        let wx = ((x0 + h).min(CANTOR_HI) - x0.max(CANTOR_LO)).max(0.0);
        let in_footprint = rounded.iter().any(|&(a, b)| y0 + 1e-12 >= a && y0 + h <= b + 1e-12);
        let wy = cantor.covered_length(y0, y0 + h);
        let area = wx * wy;
        (in_footprint && area > 0.0).then(|| {
            glue_area += area;
            glue_count += 1;
            area
        })
    });
    let glue = GlueInfo {
        epsilon,
        level: cantor_level,
        exact_area: (CANTOR_HI - CANTOR_LO) * cantor.retained_length(),
        face_area: glue_area,
        face_count: glue_count,
        rounding: rounded_len - cantor.retained_length(),
    };
    MeshDomain::from_parts(3, h, cells, faces, Some(glue))
}

struct Lattice {
    dims: Vec<usize>,
    strides: Vec<usize>,
    h: f64,
}

impl Lattice {
    fn new(dims: &[usize], h: f64) -> Self {
        let mut strides = vec![1; dims.len()];
        for a in (0..dims.len() - 1).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        Self { dims: dims.to_vec(), strides, h }
    }

    fn len(&self) -> usize {
        self.dims.iter().product()
    }

    fn coords(&self, lin: usize) -> [i64; 3] {
        let mut out = [0; 3];
        for a in 0..self.dims.len() {
            out[a] = ((lin / self.strides[a]) % self.dims[a]) as i64;
        }
        out
    }

    /// Cells of `copies` interleaved copies; the copy index is the last sort key.
    fn cells(&self, copies: usize) -> Vec<Cell> {
        let measure = self.h.powi(self.dims.len() as i32);
        let mut cells = Vec::with_capacity(self.len() * copies);
        for lin in 0..self.len() {
            let coords = self.coords(lin);
            let mut center = [0.0; 3];
            for a in 0..self.dims.len() {
                center[a] = (coords[a] as f64 + 0.5) * self.h;
            }
            for component in 0..copies {
                cells.push(Cell { coords, center, measure, component });
            }
        }
        cells
    }

    /// Emits faces copy by copy. `glue(coords, copy)` is asked about every
    /// bottom face (`axis = Q-1`, lowest layer) of copy 0; returning an area
    /// turns that face and its copy-1 twin into one glue face.
    fn push_faces(
        &self,
        copies: usize,
        faces: &mut Vec<Face>,
        mut glue: impl FnMut([i64; 3], usize) -> Option<f64>,
    ) {
        let q = self.dims.len();
        let area = self.h.powi(q as i32 - 1);
        let mut glued = vec![false; self.len()];
        for lin in 0..self.len() {
            let ix = self.coords(lin);
            for copy in 0..copies {
                let id = lin * copies + copy;
                for axis in 0..q {
                    let i = ix[axis] as usize;
                    if i == 0 {
                        if copies == 2 && axis == q - 1 {
                            if copy == 0 {
                                if let Some(a) = glue(ix, copy) {
                                    glued[lin] = true;
                                    faces.push(Face {
                                        area: a,
                                        lo: id,
                                        hi: Some(id + 1),
                                        axis,
                                        kind: FaceKind::Glue,
                                        outward: 0,
                                    });
                                    continue;
                                }
                            } else if glued[lin] {
                                continue;
                            }
                        }
                        faces.push(Face {
                            area,
                            lo: id,
                            hi: None,
                            axis,
                            kind: FaceKind::Boundary,
                            outward: -1,
                        });
                    }
                    if i + 1 < self.dims[axis] {
                        faces.push(Face {
                            area,
                            lo: id,
                            hi: Some(id + self.strides[axis] * copies),
                            axis,
                            kind: FaceKind::Interior,
                            outward: 0,
                        });
                    } else {
                        faces.push(Face {
                            area,
                            lo: id,
                            hi: None,
                            axis,
                            kind: FaceKind::Boundary,
                            outward: 1,
                        });
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_2x2_counts() {
        let d = build_grid_domain(2, 2, 0.5).unwrap();
        assert_eq!(d.num_cells(), 4);
        assert_eq!(d.interior_face_count(), 4);
        assert!(d.cells().iter().all(|c| c.measure == 0.25));
        assert!(d.faces().iter().all(|f| f.area == 0.5));
        assert_eq!(d.num_faces(), 4 + 8);
    }

    #[test]
    fn grid_3d_counts() {
        let d = build_grid_domain(3, 2, 1.0).unwrap();
        assert_eq!(d.num_cells(), 8);
        assert_eq!(d.interior_face_count(), 12);
        assert!(d.cells().iter().all(|c| c.measure == 1.0));
    }

    #[test]
    fn unit_square_partition() {
        let d = build_grid_domain(2, 64, 1.0 / 64.0).unwrap();
        assert_eq!(d.total_measure(), 1.0);
    }

    #[test]
    fn faces_border_right_number_of_cells() {
        let d = build_grid_domain(3, 3, 1.0).unwrap();
        for f in d.faces() {
            let n = f.cells().count();
            assert_eq!(n, if f.kind == FaceKind::Boundary { 1 } else { 2 });
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(build_grid_domain(4, 2, 1.0).is_err());
        assert!(build_grid_domain(1, 2, 1.0).is_err());
        assert!(build_grid_domain(2, 2, 0.0).is_err());
        assert!(build_grid_domain(2, 2, -1.0).is_err());
        assert!(build_grid_domain(2, 1, 1.0).is_err());
    }

    #[test]
    fn ordering_is_lexicographic() {
        let d = build_grid_domain(2, 3, 1.0).unwrap();
        let coords: Vec<_> = d.cells().iter().map(|c| (c.coords[0], c.coords[1])).collect();
        let mut sorted = coords.clone();
        sorted.sort();
        assert_eq!(coords, sorted);
    }

    #[test]
    fn annulus_mask_is_connected() {
        let base = build_grid_domain(2, 32, 1.0 / 32.0).unwrap();
        let ann = build_masked_domain(&base, |p| {
            let r = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)).sqrt();
            r > 0.25 && r < 0.5
        })
        .unwrap();
        assert!(ann.num_cells() > 0 && ann.num_cells() < base.num_cells());
        assert_eq!(ann.component_count(), 1);
    }

    #[test]
    fn trivial_mask_is_identity() {
        let base = build_grid_domain(2, 4, 0.25).unwrap();
        let same = build_masked_domain(&base, |_| true).unwrap();
        assert_eq!(same.cells(), base.cells());
        assert_eq!(same.faces(), base.faces());
    }

    #[test]
    fn diagonal_corners_disconnected() {
        let base = build_grid_domain(2, 2, 1.0).unwrap();
        let err = base.restrict(|c| c.coords[0] == c.coords[1]).unwrap_err();
        assert!(matches!(err, Error::Disconnected { components: 2 }));
        assert!(matches!(base.restrict(|_| false).unwrap_err(), Error::EmptyDomain));
    }

    #[test]
    fn masked_boundary_faces_point_outward() {
        let base = build_grid_domain(2, 3, 1.0).unwrap();
        let left = base.restrict(|c| c.coords[0] == 0).unwrap();
        for (fi, f) in left.faces().iter().enumerate() {
            if f.is_boundary() && f.axis == 0 {
                let g = left.ghost_point(fi).unwrap();
                assert!(g[0] < 0.0 || g[0] > 1.0);
            }
        }
    }

    #[test]
    fn glued_level0_has_four_faces() {
        let d = build_glued_cubes(0.5, 0, 4).unwrap();
        let glue: Vec<_> = d.faces().iter().filter(|f| f.kind == FaceKind::Glue).collect();
        assert_eq!(glue.len(), 4);
        assert_eq!(d.glue().unwrap().face_area, 0.25);
        assert_eq!(d.total_measure(), 2.0);
        for f in glue {
            assert_eq!(d.cell(f.lo).component, 0);
            assert_eq!(d.cell(f.hi.unwrap()).component, 1);
            assert_eq!(d.cell(f.lo).coords, d.cell(f.hi.unwrap()).coords);
        }
    }

    #[test]
    fn glued_level1_has_fewer_faces() {
        let l0 = build_glued_cubes(0.5, 0, 8).unwrap();
        let l1 = build_glued_cubes(0.5, 1, 8).unwrap();
        assert_eq!(l0.glue().unwrap().face_count, 16);
        assert_eq!(l1.glue().unwrap().face_count, 8);
        assert_eq!(l1.total_measure(), 2.0);
    }

    #[test]
    fn glue_area_scales_exactly() {
        for m in 0..4 {
            let a = build_glued_cubes(0.5, m, 8).unwrap().glue().unwrap().face_area;
            let b = build_glued_cubes(0.5, m + 1, 8).unwrap().glue().unwrap().face_area;
            assert_eq!(b / a, 2.0 * 0.25);
        }
    }

    #[test]
    fn glued_rejects_misaligned() {
        assert!(build_glued_cubes(0.5, 0, 6).is_err());
        assert!(build_glued_cubes(1.5, 0, 8).is_err());
    }

    #[test]
    fn glue_swap_is_isomorphism() {
        let d = build_glued_cubes(0.5, 2, 8).unwrap();
        let swap = |c: usize| c ^ 1;
        for c in 0..d.num_cells() {
            assert_eq!(d.cell(c).coords, d.cell(swap(c)).coords);
            let mut a: Vec<_> = d
                .neighbors(c)
                .iter()
                .map(|&(o, f)| (swap(o), d.face(f).area.to_bits()))
                .collect();
            let mut b: Vec<_> = d
                .neighbors(swap(c))
                .iter()
                .map(|&(o, f)| (o, d.face(f).area.to_bits()))
                .collect();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }
}
