//! Cell complexes that discretize the ambient metric measure spaces.
//!
//! Cells carry the measure and the densities; faces carry codimension-1 area.
//! Curves are walks on the face-adjacency graph of cells and surfaces are sets
//! of faces, so a single per-cell density serves both families.

mod build;
pub mod cantor;
mod io;
mod metric;
mod region;

use serde::{Deserialize, Serialize};

pub use build::{build_box_domain, build_glued_cubes, build_grid_domain, build_masked_domain};
pub use cantor::CantorApprox;
pub use io::{CellRecord, FaceRecord, MeshDocument};
pub use metric::{RegularityReport, UNREACHABLE};
pub use region::RegionTriple;

use crate::{Error, Result};

/// A cell of the complex. Unused coordinate slots are zero in dimension 2.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    /// Integer lattice coordinates.
    pub coords: [i64; 3],
    pub center: [f64; 3],
    pub measure: f64,
    /// Which copy of a glued space the cell belongs to; 0 otherwise.
    pub component: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    Interior,
    Boundary,
    Glue,
}

/// A codimension-1 interface.
///
/// Interior faces join `lo` to its `+axis` neighbour `hi`. Glue faces join a
/// copy-0 cell (`lo`) to its copy-1 partner. Boundary faces have no `hi`; the
/// outward normal points along `outward * e_axis`.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub area: f64,
    pub lo: usize,
    pub hi: Option<usize>,
    pub axis: usize,
    pub kind: FaceKind,
    pub outward: i8,
}

impl Face {
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.lo).chain(self.hi)
    }

    /// The cell across the face from `c`, if any.
    pub fn other(&self, c: usize) -> Option<usize> {
        match self.hi {
            Some(hi) if hi == c => Some(self.lo),
            Some(hi) if self.lo == c => Some(hi),
            _ => None,
        }
    }

    pub fn is_boundary(&self) -> bool {
        self.hi.is_none()
    }
}

/// Bookkeeping for the glued-cube construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueInfo {
    pub epsilon: f64,
    pub level: u32,
    /// Exact measure of the glue set `[1/4, 3/4] x K_m`.
    pub exact_area: f64,
    /// Sum of the glue face areas; equals `exact_area` up to rounding.
    pub face_area: f64,
    pub face_count: usize,
    /// Length added to the Cantor approximation when its intervals are rounded
    /// outward to grid lines in order to decide which faces are glued.
    pub rounding: f64,
}

/// Immutable cell complex with per-cell measure and per-face area.
#[derive(Clone, Debug)]
pub struct MeshDomain {
    dim: usize,
    h: f64,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    nbr_start: Vec<usize>,
    nbrs: Vec<(usize, usize)>,
    face_start: Vec<usize>,
    cell_faces: Vec<usize>,
    glue: Option<GlueInfo>,
}

impl MeshDomain {
    /// Assembles a complex from its cells and faces, checking the structural
    /// invariants and building the adjacency tables.
    pub fn from_parts(
        dim: usize,
        h: f64,
        cells: Vec<Cell>,
        faces: Vec<Face>,
        glue: Option<GlueInfo>,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidMesh(format!("dimension {dim} not in {{2, 3}}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidMesh(format!("spacing h = {h} must be positive")));
        }
        if let Some(c) = cells.iter().position(|c| !(c.measure > 0.0)) {
            return Err(Error::InvalidMesh(format!("cell {c} has nonpositive measure")));
        }
        let n = cells.len();
        for (i, f) in faces.iter().enumerate() {
            if !(f.area > 0.0) {
                return Err(Error::InvalidMesh(format!("face {i} has nonpositive area")));
            }
            if f.lo >= n || f.hi.is_some_and(|hi| hi >= n || hi == f.lo) {
                return Err(Error::InvalidMesh(format!("face {i} references invalid cells")));
            }
            if f.is_boundary() != (f.kind == FaceKind::Boundary) {
                return Err(Error::InvalidMesh(format!("face {i} kind does not match its cells")));
            }
        }

        let mut nbr_count = vec![0usize; n + 1];
        let mut face_count = vec![0usize; n + 1];
        for f in &faces {
            for c in f.cells() {
                face_count[c + 1] += 1;
                if f.hi.is_some() {
                    nbr_count[c + 1] += 1;
                }
            }
        }
        for i in 0..n {
            nbr_count[i + 1] += nbr_count[i];
            face_count[i + 1] += face_count[i];
        }
        let mut nbrs = vec![(0, 0); nbr_count[n]];
        let mut cell_faces = vec![0; face_count[n]];
        let mut nbr_fill = nbr_count.clone();
        let mut face_fill = face_count.clone();
        for (fi, f) in faces.iter().enumerate() {
            for c in f.cells() {
                cell_faces[face_fill[c]] = fi;
                face_fill[c] += 1;
                if let Some(o) = f.other(c) {
                    nbrs[nbr_fill[c]] = (o, fi);
                    nbr_fill[c] += 1;
                }
            }
        }
        // Deterministic neighbour order: by neighbour id.
        for c in 0..n {
            nbrs[nbr_count[c]..nbr_count[c + 1]].sort_unstable();
        }

        Ok(Self {
            dim,
            h,
            cells,
            faces,
            nbr_start: nbr_count,
            nbrs,
            face_start: face_count,
            cell_faces,
            glue,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &Cell {
        &self.cells[c]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn glue(&self) -> Option<&GlueInfo> {
        self.glue.as_ref()
    }

    pub fn measures(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.measure).collect()
    }

    pub fn total_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).sum()
    }

    /// `(neighbour, face)` pairs of `c`, sorted by neighbour id.
    pub fn neighbors(&self, c: usize) -> &[(usize, usize)] {
        &self.nbrs[self.nbr_start[c]..self.nbr_start[c + 1]]
    }

    /// All faces incident to `c`, boundary faces included.
    pub fn incident_faces(&self, c: usize) -> &[usize] {
        &self.cell_faces[self.face_start[c]..self.face_start[c + 1]]
    }

    pub fn interior_face_count(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    /// Face joining two cells, if they are adjacent.
    pub fn face_between(&self, a: usize, b: usize) -> Option<usize> {
        let nb = self.neighbors(a);
        nb.binary_search_by_key(&b, |&(o, _)| o).ok().map(|i| nb[i].1)
    }

    /// Point just outside a boundary face: the center of the ghost cell that
    /// would sit across it.
    pub fn ghost_point(&self, face: usize) -> Option<[f64; 3]> {
        let f = &self.faces[face];
        if !f.is_boundary() {
            return None;
        }
        let mut p = self.cells[f.lo].center;
        p[f.axis] += self.h * f64::from(f.outward);
        Some(p)
    }

    pub(crate) fn check_cell(&self, c: usize) -> Result<()> {
        if c < self.cells.len() {
            Ok(())
        } else {
            Err(Error::InvalidRegion(format!(
                "cell {c} out of range ({} cells)",
                self.cells.len()
            )))
        }
    }

    pub(crate) fn check_face(&self, f: usize) -> Result<()> {
        if f < self.faces.len() {
            Ok(())
        } else {
            Err(Error::InvalidFaces(format!(
                "face {f} out of range ({} faces)",
                self.faces.len()
            )))
        }
    }
}
