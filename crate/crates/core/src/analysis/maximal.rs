use rayon::prelude::*;

use super::check_field;
use crate::mesh::MeshDomain;
use crate::{Error, Result};

/// Restricted maximal function: at each cell, the largest `mu`-average of
/// `|u|` over the balls `B(x, kh)` with `kh <= radius`.
pub fn maximal_function(dom: &MeshDomain, u: &[f64], radius: f64) -> Result<Vec<f64>> {
    check_field(dom, u, "u")?;
    let h = dom.h();
    if !(radius >= h) || !radius.is_finite() {
        return Err(Error::InvalidProblem(format!("radius {radius} must be at least h = {h}")));
    }
    let steps = ((radius / h) * (1.0 + 1e-12)).floor() as usize;
    let abs: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    Ok((0..dom.num_cells())
        .into_par_iter()
        .map(|x| {
            // B(x, kh) holds the cells at hop distance below k.
            let mut mass = vec![0.0; steps];
            let mut vol = vec![0.0; steps];
            dom.ball_visit(x, steps as f64 * h, |c, k| {
                let m = dom.cell(c).measure;
                mass[k as usize] += m * abs[c];
                vol[k as usize] += m;
            });
            let (mut acc_mass, mut acc_vol, mut best) = (0.0, 0.0, 0.0f64);
            for k in 0..steps {
                acc_mass += mass[k];
                acc_vol += vol[k];
                best = best.max(acc_mass / acc_vol);
            }
            best
        })
        .collect())
}
