//! The glued-cube experiment: the Cantor level of the glue is raised on a
//! fixed mesh, so the glue area falls at the construction rate while the cell
//! graph, and with it the curve family, barely changes.

use serde::{Deserialize, Serialize};

use super::sweeps::{report_fields, REPORT_COLUMNS};
use super::{duality_product, DualityReport, SolverSettings};
use crate::geometry::GeometrySpec;
use crate::serde_f64::fmt;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub level: u32,
    pub side_cells: usize,
    /// Total area of the glue faces.
    pub glue_area: f64,
    pub glue_faces: usize,
    pub report: DualityReport,
}

/// Both moduli at each Cantor level, with `E` and `F` the top layers of the
/// two cubes. Levels run in parallel; rows come back in input order.
pub fn counterexample_study(
    epsilon: f64,
    p: f64,
    levels: &[u32],
    side_cells: usize,
    settings: &SolverSettings,
) -> Result<Vec<CounterexampleRow>> {
    use rayon::prelude::*;
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidProblem("levels must be strictly increasing".into()));
    }
    levels
        .par_iter()
        .map(|&level| {
            let (dom, region) = GeometrySpec::glued_cubes(epsilon, level).build(1.0 / side_cells as f64)?;
            let glue = dom.glue().expect("glued mesh");
            let (glue_area, glue_faces) = (glue.face_area, glue.face_count);
            let report = duality_product(&dom, &region, p, None, settings)?;
            Ok(CounterexampleRow { level, side_cells, glue_area, glue_faces, report })
        })
        .collect()
}

/// Level-to-level growth read conservatively off the brackets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleTrend {
    /// `mod_surface(m+1).lo / mod_surface(m).hi` for consecutive rows.
    pub surface_ratios: Vec<f64>,
    /// Largest `mod_path` upper end over the smallest lower end.
    pub path_spread: f64,
    /// Lower end of the product at the last level.
    pub final_product_lo: f64,
}

impl CounterexampleTrend {
    pub fn of(rows: &[CounterexampleRow]) -> Self {
        let surface_ratios = rows
            .windows(2)
            .map(|w| w[1].report.mod_surface.lo / w[0].report.mod_surface.hi)
            .collect();
        let hi = rows.iter().map(|r| r.report.mod_path.hi).fold(0.0, f64::max);
        let lo = rows.iter().map(|r| r.report.mod_path.lo).fold(f64::INFINITY, f64::min);
        let final_product_lo = rows
            .last()
            .and_then(|r| r.report.product.interval())
            .map_or(f64::NAN, |b| b.lo);
        Self { surface_ratios, path_spread: hi / lo, final_product_lo }
    }
}

/// Columns `level, side_cells, glue_area, glue_faces, <moduli and product>,
/// status`.
pub fn write_counterexample_csv<W: std::io::Write>(rows: &[CounterexampleRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["level", "side_cells", "glue_area", "glue_faces"];
    header.extend(REPORT_COLUMNS);
    header.push("status");
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.level.to_string(),
            row.side_cells.to_string(),
            fmt(row.glue_area),
            row.glue_faces.to_string(),
        ];
        rec.extend(report_fields(Some(&row.report)));
        rec.push(row.report.status_label().to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })
}
