use super::*;
use crate::geometry::GeometrySpec;

fn square(side: usize) -> (MeshDomain, RegionTriple) {
    GeometrySpec::unit_square().build(1.0 / side as f64).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn product_interval_arithmetic() {
    let path = Bracket { lo: 0.25, hi: 0.25 };
    let surf = Bracket { lo: 2.0, hi: 2.0 };
    let Product::Interval { lo, hi } = Product::of(path, surf, 3.0) else { panic!() };
    assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);

    let zero = Bracket { lo: 0.0, hi: 0.0 };
    let inf = Bracket { lo: f64::INFINITY, hi: f64::INFINITY };
    assert_eq!(Product::of(zero, inf, 2.0), Product::ZeroTimesInfinity);
    assert_eq!(Product::of(inf, zero, 2.0), Product::ZeroTimesInfinity);
    assert_eq!(Product::of(zero, surf, 2.0), Product::Interval { lo: 0.0, hi: 0.0 });
    let json = serde_json::to_string(&Product::ZeroTimesInfinity).unwrap();
    assert_eq!(json, r#"{"kind":"zero_times_infinity"}"#);
}

#[test]
fn unit_square_product_is_near_one() {
    let (dom, region) = square(8);
    let rep = duality_product(&dom, &region, 2.0, None, &SolverSettings::default()).unwrap();
    assert!((rep.p_star - 2.0).abs() < 1e-14);
    assert!((1.0 / rep.p + 1.0 / rep.p_star - 1.0).abs() < 1e-14);
    let b = rep.product.interval().unwrap();
    assert!(b.lo > 0.0 && b.lo <= b.hi);
    assert!(b.within(0.9, 1.15), "{b:?}");
    assert_eq!(rep.mesh.side_cells, 8);
}

#[test]
fn truncation_sweep_examples() {
    let (dom, region) = square(8);
    let settings = SolverSettings::default();
    let reps = truncation_sweep(&dom, &region, 2.0, &[1, 2, 3, 4, 6, 9], &settings).unwrap();
    // j = 1: every face is within 1 of E u F.
    assert_eq!(reps[0].surface_status, SolveStatus::FamilyEmpty);
    assert_eq!(reps[0].mod_surface.hi, 0.0);
    for w in reps.windows(2) {
        assert!(w[1].mod_surface.hi >= w[0].mod_surface.lo * (1.0 - 1e-9));
    }
    let full = duality_product(&dom, &region, 2.0, None, &settings).unwrap();
    assert_eq!(reps.last().unwrap().mod_surface, full.mod_surface);
    assert!(truncation_sweep(&dom, &region, 2.0, &[3, 2], &settings).is_err());
}

#[test]
fn swapping_ends_keeps_the_product() {
    let (dom, region) = square(6);
    for p in [2.0, 3.0] {
        let a = duality_product(&dom, &region, p, None, &SolverSettings::default()).unwrap();
        let b = duality_product(&dom, &region.swapped(), p, None, &SolverSettings::default()).unwrap();
        let (a, b) = (a.product.interval().unwrap(), b.product.interval().unwrap());
        assert!(rel(a.lo, b.lo) < 1e-6 && rel(a.hi, b.hi) < 1e-6, "{a:?} {b:?}");
    }
}

#[test]
fn solver_matches_brute_force() {
    let rows = run_oracle_suite().unwrap();
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert!(r.passed, "{}: solver {} brute {}", r.name, r.solver, r.brute_force);
    }
    let mut buf = Vec::new();
    write_oracle_csv(&rows, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 9);
}

#[test]
fn brute_force_strip_is_two_thirds() {
    let f = oracle_fixtures().unwrap().remove(0);
    assert!((brute_force_modulus(&f.dom, &f.spec, f.p).unwrap().value() - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn refinement_study_csv() {
    let study =
        refinement_study(&GeometrySpec::unit_square(), 2.0, &[0.25, 0.125, 1.0 / 64.0], &SolverSettings::default(), Some(1000))
            .unwrap();
    assert!(study.partial);
    assert_eq!(study.rows[2].status_label(), "skipped_too_large");
    let mut buf = Vec::new();
    write_refinement_csv(&study.rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "h,p,mod_path_lo,mod_path_hi,mod_surf_lo,mod_surf_hi,product_lo,product_hi,status"
    );
    assert!(lines.next().unwrap().ends_with(",converged"));
    assert!(lines.nth(1).unwrap().ends_with(",,,,,,,skipped_too_large"));
    assert!(refinement_study(&GeometrySpec::unit_square(), 2.0, &[0.125, 0.25], &SolverSettings::default(), None).is_err());
}

#[test]
fn refinement_product_error_shrinks() {
    let study =
        refinement_study(&GeometrySpec::unit_square(), 2.0, &[0.125, 0.0625, 0.03125], &SolverSettings::default(), None)
            .unwrap();
    let errs: Vec<f64> = study
        .rows
        .iter()
        .map(|r| {
            let b = r.report.as_ref().unwrap().product.interval().unwrap();
            (0.5 * (b.lo + b.hi) - 1.0).abs()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn counterexample_rows() {
    let rows = counterexample_study(0.5, 3.0, &[0, 1], 4, &SolverSettings { tol: 1e-4, max_iters: 10_000 }).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].glue_area < rows[0].glue_area);
    let trend = CounterexampleTrend::of(&rows);
    assert!(trend.surface_ratios[0] > 1.0);
    let mut buf = Vec::new();
    write_counterexample_csv(&rows, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("level,side_cells,glue_area,glue_faces,mod_path_lo"));
}
