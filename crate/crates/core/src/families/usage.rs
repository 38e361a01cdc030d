use super::UsageVector;
use crate::mesh::{MeshDomain, RegionTriple};
use crate::{Error, Result};

/// Length a simple `E -> F` path spends in each cell: `h` per visited cell,
/// `h/2` for the first and the last.
pub fn curve_usage(dom: &MeshDomain, region: &RegionTriple, path: &[usize]) -> Result<UsageVector> {
    if path.len() < 2 {
        return Err(Error::InvalidPath("a path needs at least two cells".into()));
    }
    let mut seen = std::collections::HashSet::with_capacity(path.len());
    for &c in path {
        dom.check_cell(c).map_err(|e| Error::InvalidPath(e.to_string()))?;
        if !seen.insert(c) {
            return Err(Error::InvalidPath(format!("cell {c} repeated")));
        }
        if !region.in_g(c) {
            return Err(Error::InvalidPath(format!("cell {c} lies outside G")));
        }
    }
    for w in path.windows(2) {
        if dom.face_between(w[0], w[1]).is_none() {
            return Err(Error::InvalidPath(format!("cells {} and {} are not adjacent", w[0], w[1])));
        }
    }
    let (first, last) = (path[0], path[path.len() - 1]);
    if !region.in_e(first) {
        return Err(Error::InvalidPath(format!("first cell {first} is not in E")));
    }
    if !region.in_f(last) {
        return Err(Error::InvalidPath(format!("last cell {last} is not in F")));
    }
    let h = dom.h();
    let n = path.len();
    Ok(UsageVector::from_entries(
        path.iter()
            .enumerate()
            .map(|(i, &c)| (c, if i == 0 || i + 1 == n { h / 2.0 } else { h }))
            .collect(),
    ))
}

/// Area of a face set shared out to the `G` cells next to it: half to each
/// side when both sides are in `G`, all of it to the `G` side otherwise.
/// Mesh boundary faces carry nothing.
pub fn surface_usage(dom: &MeshDomain, region: &RegionTriple, faces: &[usize]) -> Result<UsageVector> {
    let mut faces = faces.to_vec();
    faces.sort_unstable();
    faces.dedup();
    let mut entries = Vec::with_capacity(2 * faces.len());
    for f in faces {
        dom.check_face(f)?;
        let face = dom.face(f);
        let in_g: Vec<usize> = face.cells().filter(|&c| region.in_g(c)).collect();
        match (in_g.as_slice(), face.hi) {
            ([], _) => return Err(Error::InvalidFaces(format!("face {f} does not touch G"))),
            (_, None) => {}
            ([a, b], Some(_)) => {
                entries.push((*a, face.area / 2.0));
                entries.push((*b, face.area / 2.0));
            }
            ([a], Some(_)) => entries.push((*a, face.area)),
            _ => unreachable!("a face has at most two cells"),
        }
    }
    Ok(UsageVector::from_entries(entries))
}
