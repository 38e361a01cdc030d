//! JSON exchange format for meshes:
//! `{Q, h, cells: [{id, center, mu, component}], faces: [{id, area, cells}]}`.
//!
//! Cells appear in the mesh's own (lexicographic) order. The optional
//! `coords`, `kind`, `axis` and `outward` fields preserve lattice information
//! for a lossless round trip; documents without them are still accepted.

use serde::{Deserialize, Serialize};

use super::{Cell, Face, FaceKind, GlueInfo, MeshDomain};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshDocument {
    #[serde(rename = "Q")]
    pub q: usize,
    pub h: f64,
    pub cells: Vec<CellRecord>,
    pub faces: Vec<FaceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glue: Option<GlueInfo>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub id: usize,
    pub center: Vec<f64>,
    pub mu: f64,
    pub component: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub id: usize,
    pub area: f64,
    pub cells: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<FaceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outward: Option<i8>,
}

impl MeshDomain {
    pub fn to_document(&self) -> MeshDocument {
        let q = self.dim();
        MeshDocument {
            q,
            h: self.h(),
            cells: self
                .cells()
                .iter()
                .enumerate()
                .map(|(id, c)| CellRecord {
                    id,
                    center: c.center[..q].to_vec(),
                    mu: c.measure,
                    component: c.component,
                    coords: Some(c.coords[..q].to_vec()),
                })
                .collect(),
            faces: self
                .faces()
                .iter()
                .enumerate()
                .map(|(id, f)| FaceRecord {
                    id,
                    area: f.area,
                    cells: f.cells().collect(),
                    kind: Some(f.kind),
                    axis: Some(f.axis),
                    outward: (f.kind == FaceKind::Boundary).then_some(f.outward),
                })
                .collect(),
            glue: self.glue().cloned(),
        }
    }

    pub fn from_document(doc: &MeshDocument) -> Result<Self> {
        let q = doc.q;
        if !(2..=3).contains(&q) {
            return Err(Error::InvalidMesh(format!("dimension {q} not in {{2, 3}}")));
        }
        let mut cells = Vec::with_capacity(doc.cells.len());
        for (i, rec) in doc.cells.iter().enumerate() {
            if rec.id != i {
                return Err(Error::InvalidMesh(format!("cell record {i} has id {}", rec.id)));
            }
            if rec.center.len() != q {
                return Err(Error::InvalidMesh(format!("cell {i} center has wrong dimension")));
            }
            let mut center = [0.0; 3];
            center[..q].copy_from_slice(&rec.center);
            let mut coords = [0i64; 3];
            match &rec.coords {
                Some(c) if c.len() == q => coords[..q].copy_from_slice(c),
                Some(_) => return Err(Error::InvalidMesh(format!("cell {i} coords have wrong dimension"))),
                None => {
                    for a in 0..q {
                        coords[a] = (center[a] / doc.h - 0.5).round() as i64;
                    }
                }
            }
            cells.push(Cell { coords, center, measure: rec.mu, component: rec.component });
        }
        let mut faces = Vec::with_capacity(doc.faces.len());
        for (i, rec) in doc.faces.iter().enumerate() {
            if rec.id != i {
                return Err(Error::InvalidMesh(format!("face record {i} has id {}", rec.id)));
            }
            let face = match rec.cells.as_slice() {
                &[lo] => Face {
                    area: rec.area,
                    lo,
                    hi: None,
                    axis: rec.axis.unwrap_or(0),
                    kind: FaceKind::Boundary,
                    outward: rec.outward.unwrap_or(0),
                },
                &[lo, hi] => {
                    let (a, b) = (cells.get(lo), cells.get(hi));
                    let (Some(a), Some(b)) = (a, b) else {
                        return Err(Error::InvalidMesh(format!("face {i} references invalid cells")));
                    };
                    let kind = rec.kind.unwrap_or(if a.component != b.component {
                        FaceKind::Glue
                    } else {
                        FaceKind::Interior
                    });
                    let axis = rec.axis.unwrap_or_else(|| {
                        (0..q)
                            .max_by(|&x, &y| {
                                let dx = (a.center[x] - b.center[x]).abs();
                                let dy = (a.center[y] - b.center[y]).abs();
                                dx.total_cmp(&dy)
                            })
                            .unwrap_or(0)
                    });
                    Face { area: rec.area, lo, hi: Some(hi), axis, kind, outward: 0 }
                }
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "face {i} borders {} cells",
                        rec.cells.len()
                    )))
                }
            };
            faces.push(face);
        }
        MeshDomain::from_parts(q, doc.h, cells, faces, doc.glue.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MeshDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}
