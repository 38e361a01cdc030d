use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{problem, Bracket, DualityReport, Product, SolverSettings};
use crate::families::FamilySpec;
use crate::geometry::GeometrySpec;
use crate::mesh::{MeshDomain, RegionTriple};
use crate::serde_f64::fmt;
use crate::solver::{conjugate, solve_modulus};
use crate::{Error, Result};

/// One report per `j`, in input order. The connecting family does not depend
/// on `j`, so it is solved once.
pub fn truncation_sweep(
    dom: &MeshDomain,
    region: &RegionTriple,
    p: f64,
    j_list: &[u32],
    settings: &SolverSettings,
) -> Result<Vec<DualityReport>> {
    if j_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidProblem("j_list must be strictly increasing".into()));
    }
    let path = solve_modulus(&problem(dom, FamilySpec::connecting(region.clone()), p, settings)?)?;
    j_list
        .par_iter()
        .map(|&j| {
            let spec = FamilySpec::separating(region.clone(), Some(j))?;
            let surf = solve_modulus(&problem(dom, spec, conjugate(p), settings)?)?;
            Ok(DualityReport::assemble(dom, p, Some(j), &path, &surf))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub h: f64,
    pub p: f64,
    /// `None` when the mesh would exceed the cell budget.
    pub report: Option<DualityReport>,
}

impl RefinementRow {
    pub fn status_label(&self) -> &'static str {
        self.report.as_ref().map_or("skipped_too_large", DualityReport::status_label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementTable {
    pub rows: Vec<RefinementRow>,
    /// Some level was skipped for the cell budget.
    pub partial: bool,
}

/// Builds the geometry at each spacing and computes both moduli. Levels whose
/// mesh would have more than `max_cells` cells are skipped and flagged.
pub fn refinement_study(
    geometry: &GeometrySpec,
    p: f64,
    h_list: &[f64],
    settings: &SolverSettings,
    max_cells: Option<usize>,
) -> Result<RefinementTable> {
    geometry.validate()?;
    if h_list.is_empty() || h_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidProblem("h_list must be nonempty and strictly decreasing".into()));
    }
    let rows: Vec<RefinementRow> = h_list
        .par_iter()
        .map(|&h| {
            let cells = geometry.domain.cell_estimate(h);
            if max_cells.is_some_and(|limit| cells > limit) {
                return Ok(RefinementRow { h, p, report: None });
            }
            let (dom, region) = geometry.build(h)?;
            let report = super::duality_product(&dom, &region, p, None, settings)?;
            Ok(RefinementRow { h, p, report: Some(report) })
        })
        .collect::<Result<_>>()?;
    let partial = rows.iter().any(|r| r.report.is_none());
    Ok(RefinementTable { rows, partial })
}

pub(super) fn bracket_fields(b: Option<Bracket>) -> [String; 2] {
    match b {
        Some(b) => [fmt(b.lo), fmt(b.hi)],
        None => [String::new(), String::new()],
    }
}

/// Moduli and product columns shared by every table, in order.
pub(super) fn report_fields(rep: Option<&DualityReport>) -> Vec<String> {
    let product = rep.and_then(|r| match r.product {
        Product::Interval { lo, hi } => Some(Bracket { lo, hi }),
        Product::ZeroTimesInfinity => None,
    });
    let mut out = Vec::with_capacity(6);
    out.extend(bracket_fields(rep.map(|r| r.mod_path)));
    out.extend(bracket_fields(rep.map(|r| r.mod_surface)));
    out.extend(bracket_fields(product));
    out
}

pub(super) const REPORT_COLUMNS: [&str; 6] =
    ["mod_path_lo", "mod_path_hi", "mod_surf_lo", "mod_surf_hi", "product_lo", "product_hi"];

/// Columns `h, p, mod_path_lo, mod_path_hi, mod_surf_lo, mod_surf_hi,
/// product_lo, product_hi, status`. The `0 * inf` case leaves the product
/// empty and says so in `status`.
pub fn write_refinement_csv<W: std::io::Write>(rows: &[RefinementRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["h", "p"];
    header.extend(REPORT_COLUMNS);
    header.push("status");
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![fmt(row.h), fmt(row.p)];
        rec.extend(report_fields(row.report.as_ref()));
        rec.push(row.status_label().to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })
}

/// Columns `j, p, <moduli and product>, status`.
pub fn write_truncation_csv<W: std::io::Write>(reports: &[DualityReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["j", "p"];
    header.extend(REPORT_COLUMNS);
    header.push("status");
    w.write_record(&header)?;
    for rep in reports {
        let mut rec = vec![rep.truncation_j.map_or(String::new(), |j| j.to_string()), fmt(rep.p)];
        rec.extend(report_fields(Some(rep)));
        rec.push(rep.status_label().to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })
}
