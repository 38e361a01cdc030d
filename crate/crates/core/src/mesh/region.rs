use super::MeshDomain;
use crate::{Error, Result};

/// A domain `G` with two disjoint continua `E, F ⊂ G`, stored as sorted cell
/// index sets plus membership masks.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionTriple {
    g: Vec<usize>,
    e: Vec<usize>,
    f: Vec<usize>,
    in_g: Vec<bool>,
    in_e: Vec<bool>,
    in_f: Vec<bool>,
}

impl RegionTriple {
    /// Checks that `E, F ⊂ G` are disjoint, connected and contain at least two
    /// cells each, and that `G` is connected.
    pub fn new(dom: &MeshDomain, g: Vec<usize>, e: Vec<usize>, f: Vec<usize>) -> Result<Self> {
        Self::build(dom, g, e, f, 2)
    }

    /// Like [`new`](Self::new) but accepts single-cell `E` and `F`. Used for
    /// tiny fixtures such as a strip of three cells.
    pub fn with_point_ends(dom: &MeshDomain, g: Vec<usize>, e: Vec<usize>, f: Vec<usize>) -> Result<Self> {
        Self::build(dom, g, e, f, 1)
    }

    /// `G` is the whole mesh.
    pub fn whole(dom: &MeshDomain, e: Vec<usize>, f: Vec<usize>) -> Result<Self> {
        Self::new(dom, (0..dom.num_cells()).collect(), e, f)
    }

    fn build(dom: &MeshDomain, g: Vec<usize>, e: Vec<usize>, f: Vec<usize>, min_cells: usize) -> Result<Self> {
        let n = dom.num_cells();
        let mask = |set: &[usize], name: &str| -> Result<Vec<bool>> {
            let mut m = vec![false; n];
            for &c in set {
                dom.check_cell(c)?;
                m[c] = true;
            }
            if m.iter().all(|&x| !x) {
                return Err(Error::InvalidRegion(format!("{name} is empty")));
            }
            Ok(m)
        };
        let in_g = mask(&g, "G")?;
        let in_e = mask(&e, "E")?;
        let in_f = mask(&f, "F")?;
        let norm = |m: &[bool]| -> Vec<usize> { (0..n).filter(|&c| m[c]).collect() };
        let (g, e, f) = (norm(&in_g), norm(&in_e), norm(&in_f));

        if e.iter().any(|&c| in_f[c]) {
            return Err(Error::InvalidRegion("E and F intersect".into()));
        }
        if e.iter().chain(&f).any(|&c| !in_g[c]) {
            return Err(Error::InvalidRegion("E and F must lie in G".into()));
        }
        for (set, mask, name) in [(&e, &in_e, "E"), (&f, &in_f, "F")] {
            if set.len() < min_cells {
                return Err(Error::InvalidRegion(format!(
                    "{name} has {} cell(s), need at least {min_cells}",
                    set.len()
                )));
            }
            if !connected(dom, set, mask) {
                return Err(Error::InvalidRegion(format!("{name} is not connected")));
            }
        }
        if !connected(dom, &g, &in_g) {
            return Err(Error::InvalidRegion("G is not connected".into()));
        }
        Ok(Self { g, e, f, in_g, in_e, in_f })
    }

    pub fn g(&self) -> &[usize] {
        &self.g
    }

    pub fn e(&self) -> &[usize] {
        &self.e
    }

    pub fn f(&self) -> &[usize] {
        &self.f
    }

    pub fn in_g(&self, c: usize) -> bool {
        self.in_g[c]
    }

    pub fn in_e(&self, c: usize) -> bool {
        self.in_e[c]
    }

    pub fn in_f(&self, c: usize) -> bool {
        self.in_f[c]
    }

    pub fn g_mask(&self) -> &[bool] {
        &self.in_g
    }

    /// The same region with `E` and `F` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            g: self.g.clone(),
            e: self.f.clone(),
            f: self.e.clone(),
            in_g: self.in_g.clone(),
            in_e: self.in_f.clone(),
            in_f: self.in_e.clone(),
        }
    }

    pub(crate) fn num_cells(&self) -> usize {
        self.in_g.len()
    }
}

fn connected(dom: &MeshDomain, set: &[usize], mask: &[bool]) -> bool {
    match set.first() {
        None => true,
        Some(&s) => {
            let hops = dom.hops_from(&[s], Some(mask));
            set.iter().all(|&c| hops[c] != super::UNREACHABLE)
        }
    }
}
