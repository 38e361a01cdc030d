//! `emit-plots`: collects `results.json` files under a directory and writes
//! one tidy CSV per experiment kind.

use std::path::{Path, PathBuf};

use modlab_core::duality::{Bracket, DualityReport};

use crate::run::{status_label, Failure, ReportSet, RESULTS_FILE};

/// Subdirectory of the plot directory that receives the CSV files.
pub const PLOTS_DIR: &str = "plots";

/// Result files in `dir` and its immediate subdirectories, sorted by path.
pub fn find_results(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let read = |d: &Path| {
        std::fs::read_dir(d).map_err(|e| Failure::Validation(format!("cannot read directory {}: {e}", d.display())))
    };
    let mut found = Vec::new();
    if dir.join(RESULTS_FILE).is_file() {
        found.push(dir.join(RESULTS_FILE));
    }
    for entry in read(dir)? {
        let path = entry.map_err(|e| Failure::Runtime(e.into()))?.path();
        if path.is_dir() && path.join(RESULTS_FILE).is_file() {
            found.push(path.join(RESULTS_FILE));
        }
    }
    found.sort();
    Ok(found)
}

fn run_label(base: &Path, file: &Path) -> String {
    let parent = file.parent().unwrap_or(base);
    match parent.strip_prefix(base) {
        Ok(rel) if !rel.as_os_str().is_empty() => rel.display().to_string(),
        _ => ".".to_string(),
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.12e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn bracket(b: Option<Bracket>) -> [String; 2] {
    b.map_or([String::new(), String::new()], |b| [num(b.lo), num(b.hi)])
}

fn report_label(r: &DualityReport) -> &'static str {
    if r.product.interval().is_none() {
        "zero_times_infinity"
    } else if r.converged() {
        "converged"
    } else {
        "iteration_limit"
    }
}

/// Rows of one output table.
struct Table {
    file: &'static str,
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

const DUALITY_COLUMNS: [&str; 12] = [
    "run", "h", "p", "truncation_j", "mod_path_lo", "mod_path_hi", "mod_surf_lo", "mod_surf_hi", "product_lo",
    "product_hi", "cells", "status",
];
const REFINEMENT_COLUMNS: [&str; 10] =
    ["run", "h", "p", "product_lo", "product_hi", "mod_path_lo", "mod_path_hi", "mod_surf_lo", "mod_surf_hi", "status"];
const TRUNCATION_COLUMNS: [&str; 10] =
    ["run", "j", "p", "mod_surf_lo", "mod_surf_hi", "mod_path_lo", "mod_path_hi", "product_lo", "product_hi", "status"];
const COUNTEREXAMPLE_COLUMNS: [&str; 11] = [
    "run", "level", "side_cells", "glue_area", "mod_path_lo", "mod_path_hi", "mod_surf_lo", "mod_surf_hi",
    "product_lo", "product_hi", "status",
];
const MODULUS_COLUMNS: [&str; 7] = ["run", "family", "h", "p", "value_lower", "value_upper", "status"];
const SELFTEST_COLUMNS: [&str; 6] = ["run", "name", "p", "solver", "brute_force", "passed"];

fn push_duality(rows: &mut Vec<Vec<String>>, run: &str, r: &DualityReport) {
    let mut row = vec![run.to_string(), num(r.mesh.h), num(r.p), r.truncation_j.map_or(String::new(), |j| j.to_string())];
    row.extend(bracket(Some(r.mod_path)));
    row.extend(bracket(Some(r.mod_surface)));
    row.extend(bracket(r.product.interval()));
    row.push(r.mesh.cells.to_string());
    row.push(report_label(r).to_string());
    rows.push(row);
}

/// Reads every result set under `dir` and writes the plot tables into
/// `dir/plots`. Returns the files written.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !dir.is_dir() {
        return Err(Failure::Validation(format!("{} is not a directory", dir.display())));
    }
    let files = find_results(dir)?;
    if files.is_empty() {
        return Err(Failure::Validation(format!("no {RESULTS_FILE} found in {} or its subdirectories", dir.display())));
    }
    let mut tables = vec![
        Table { file: "duality.csv", header: &DUALITY_COLUMNS, rows: Vec::new() },
        Table { file: "refinement.csv", header: &REFINEMENT_COLUMNS, rows: Vec::new() },
        Table { file: "truncation.csv", header: &TRUNCATION_COLUMNS, rows: Vec::new() },
        Table { file: "counterexample.csv", header: &COUNTEREXAMPLE_COLUMNS, rows: Vec::new() },
        Table { file: "modulus.csv", header: &MODULUS_COLUMNS, rows: Vec::new() },
        Table { file: "selftest.csv", header: &SELFTEST_COLUMNS, rows: Vec::new() },
    ];
    for file in &files {
        let text = std::fs::read_to_string(file).map_err(|e| Failure::Validation(format!("cannot read {}: {e}", file.display())))?;
        let set: ReportSet = serde_json::from_str(&text)
            .map_err(|e| Failure::Validation(format!("{} is not a result file: {e}", file.display())))?;
        let run = run_label(dir, file);
        match &set {
            ReportSet::Duality { report } => push_duality(&mut tables[0].rows, &run, report),
            ReportSet::RefinementStudy { table } => {
                for r in &table.rows {
                    let rep = r.report.as_ref();
                    let mut row = vec![run.clone(), num(r.h), num(r.p)];
                    row.extend(bracket(rep.and_then(|x| x.product.interval())));
                    row.extend(bracket(rep.map(|x| x.mod_path)));
                    row.extend(bracket(rep.map(|x| x.mod_surface)));
                    row.push(r.status_label().to_string());
                    tables[1].rows.push(row);
                }
            }
            ReportSet::TruncationSweep { reports } => {
                for r in reports {
                    let mut row = vec![run.clone(), r.truncation_j.map_or(String::new(), |j| j.to_string()), num(r.p)];
                    row.extend(bracket(Some(r.mod_surface)));
                    row.extend(bracket(Some(r.mod_path)));
                    row.extend(bracket(r.product.interval()));
                    row.push(report_label(r).to_string());
                    tables[2].rows.push(row);
                }
            }
            ReportSet::Counterexample { rows, .. } => {
                for r in rows {
                    let mut row = vec![run.clone(), r.level.to_string(), r.side_cells.to_string(), num(r.glue_area)];
                    row.extend(bracket(Some(r.report.mod_path)));
                    row.extend(bracket(Some(r.report.mod_surface)));
                    row.extend(bracket(r.report.product.interval()));
                    row.push(report_label(&r.report).to_string());
                    tables[3].rows.push(row);
                }
            }
            ReportSet::Modulus { family, h, report, .. } => {
                let family = serde_json::to_value(family).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                tables[4].rows.push(vec![
                    run.clone(),
                    family,
                    num(*h),
                    num(report.p),
                    num(report.value_lower),
                    num(report.value_upper),
                    status_label(report.status).to_string(),
                ]);
            }
            ReportSet::Selftest { rows } => {
                for r in rows {
                    tables[5].rows.push(vec![
                        run.clone(),
                        r.name.clone(),
                        num(r.p),
                        num(r.solver),
                        num(r.brute_force),
                        r.passed.to_string(),
                    ]);
                }
            }
        }
    }
    let out_dir = dir.join(PLOTS_DIR);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Runtime(anyhow::Error::new(e).context(format!("creating {}", out_dir.display()))))?;
    let mut written = Vec::new();
    for t in tables.iter().filter(|t| !t.rows.is_empty()) {
        let path = out_dir.join(t.file);
        let fail = |e: csv::Error| Failure::Runtime(anyhow::Error::new(e).context(format!("writing {}", path.display())));
        let mut w = csv::Writer::from_path(&path).map_err(fail)?;
        w.write_record(t.header).map_err(fail)?;
        for row in &t.rows {
            w.write_record(row).map_err(fail)?;
        }
        w.flush()
            .map_err(|e| Failure::Runtime(anyhow::Error::new(e).context(format!("writing {}", path.display()))))?;
        written.push(path);
    }
    Ok(written)
}
