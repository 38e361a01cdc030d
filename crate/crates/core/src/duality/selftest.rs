//! Small fixtures on which the solver is compared with exhaustive
//! enumeration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::brute_force_modulus;
use crate::families::{FamilyKind, FamilySpec};
use crate::geometry::GeometrySpec;
use crate::mesh::{build_box_domain, MeshDomain, RegionTriple};
use crate::solver::{solve_modulus, ModulusProblem};
use crate::serde_f64::fmt;
use crate::{Error, Result};

/// Relative agreement required between solver and enumeration.
pub const ORACLE_TOLERANCE: f64 = 1e-5;

pub struct OracleFixture {
    pub name: &'static str,
    pub dom: MeshDomain,
    pub spec: FamilySpec,
    pub p: f64,
}

/// Eight fixtures of at most 20 cells, both family kinds, `p` in
/// `{1.5, 2, 3}`.
pub fn oracle_fixtures() -> Result<Vec<OracleFixture>> {
    let strip = build_box_domain(&[3, 1], 1.0)?;
    let strip_region = RegionTriple::with_point_ends(&strip, vec![0, 1, 2], vec![0], vec![2])?;
    let (sq, sq_region) = GeometrySpec::unit_square().build(0.25)?;
    let rect = build_box_domain(&[5, 3], 0.2)?;
    let rect_region = RegionTriple::whole(&rect, vec![0, 1, 2], vec![12, 13, 14])?;
    let tall = build_box_domain(&[4, 5], 0.25)?;
    let tall_region = RegionTriple::whole(&tall, vec![0, 1], vec![18, 19])?;
    let fixture = |name, dom: &MeshDomain, spec, p| OracleFixture { name, dom: dom.clone(), spec, p };
    Ok(vec![
        fixture("strip curves", &strip, FamilySpec::connecting(strip_region), 2.0),
        fixture("square curves", &sq, FamilySpec::connecting(sq_region.clone()), 1.5),
        fixture("square cuts", &sq, FamilySpec::separating(sq_region.clone(), None)?, 3.0),
        fixture("square truncated cuts", &sq, FamilySpec::separating(sq_region, Some(3))?, 2.0),
        fixture("rectangle curves", &rect, FamilySpec::connecting(rect_region.clone()), 3.0),
        fixture("rectangle cuts", &rect, FamilySpec::separating(rect_region, None)?, 1.5),
        fixture("corner curves", &tall, FamilySpec::connecting(tall_region.clone()), 2.0),
        fixture("corner cuts", &tall, FamilySpec::separating(tall_region, None)?, 2.0),
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub name: String,
    pub kind: FamilyKind,
    pub p: f64,
    pub cells: usize,
    pub solver: f64,
    pub brute_force: f64,
    pub rel_diff: f64,
    pub passed: bool,
}

/// Solves every fixture both ways, in parallel; rows in fixture order.
pub fn run_oracle_suite() -> Result<Vec<OracleComparison>> {
    oracle_fixtures()?
        .into_par_iter()
        .map(|f| {
            let brute = brute_force_modulus(&f.dom, &f.spec, f.p)?.value();
            let kind = f.spec.kind();
            let solver = solve_modulus(&ModulusProblem::new(&f.dom, f.spec, f.p)?)?.value();
            let rel_diff = if brute == 0.0 { solver.abs() } else { (solver - brute).abs() / brute.abs() };
            Ok(OracleComparison {
                name: f.name.to_string(),
                kind,
                p: f.p,
                cells: f.dom.num_cells(),
                solver,
                brute_force: brute,
                rel_diff,
                passed: rel_diff <= ORACLE_TOLERANCE,
            })
        })
        .collect()
}

/// Columns `name, kind, p, cells, solver, brute_force, rel_diff, passed`.
pub fn write_oracle_csv<W: std::io::Write>(rows: &[OracleComparison], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "kind", "p", "cells", "solver", "brute_force", "rel_diff", "passed"])?;
    for r in rows {
        let kind = match r.kind {
            FamilyKind::Connecting => "connecting",
            FamilyKind::Separating => "separating",
        };
        w.write_record([
            r.name.clone(),
            kind.to_string(),
            fmt(r.p),
            r.cells.to_string(),
            fmt(r.solver),
            fmt(r.brute_force),
            fmt(r.rel_diff),
            r.passed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })
}
