use proptest::prelude::*;

use super::*;
use crate::mesh::{build_box_domain, build_glued_cubes, build_grid_domain, FaceKind};

fn square(side: usize) -> (MeshDomain, RegionTriple) {
    let dom = build_grid_domain(2, side, 1.0 / side as f64).unwrap();
    let e: Vec<usize> = (0..side).collect();
    let f: Vec<usize> = (0..side).map(|j| (side - 1) * side + j).collect();
    let region = RegionTriple::whole(&dom, e, f).unwrap();
    (dom, region)
}

/// Every simple path from an `E` cell to an `F` cell whose interior avoids
/// `E u F`, by depth-first enumeration.
fn all_paths(dom: &MeshDomain, region: &RegionTriple) -> Vec<Vec<usize>> {
    fn walk(dom: &MeshDomain, r: &RegionTriple, path: &mut Vec<usize>, seen: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let c = *path.last().unwrap();
        if r.in_f(c) {
            out.push(path.clone());
            return;
        }
        for &(o, _) in dom.neighbors(c) {
            if !seen[o] && r.in_g(o) && !r.in_e(o) {
                seen[o] = true;
                path.push(o);
                walk(dom, r, path, seen, out);
                path.pop();
                seen[o] = false;
            }
        }
    }
    let mut out = Vec::new();
    for &e in region.e() {
        let mut seen = vec![false; dom.num_cells()];
        seen[e] = true;
        walk(dom, region, &mut vec![e], &mut seen, &mut out);
    }
    out
}

/// Cheapest cut by enumerating every set `S` with `E ⊂ S ⊂ G - F` and
/// weighing its boundary in `G`; `None` when no admissible boundary exists.
fn brute_cut(dom: &MeshDomain, region: &RegionTriple, allowed: &[bool], rho: &[f64]) -> Option<f64> {
    let free: Vec<usize> = region
        .g()
        .iter()
        .copied()
        .filter(|&c| !region.in_e(c) && !region.in_f(c))
        .collect();
    assert!(free.len() <= 20);
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << free.len()) {
        let mut in_s = vec![false; dom.num_cells()];
        for &e in region.e() {
            in_s[e] = true;
        }
        for (k, &c) in free.iter().enumerate() {
            if mask >> k & 1 == 1 {
                in_s[c] = true;
            }
        }
        let mut total = 0.0;
        let mut ok = true;
        for (fi, f) in dom.faces().iter().enumerate() {
            let Some(hi) = f.hi else { continue };
            if !(region.in_g(f.lo) && region.in_g(hi)) || in_s[f.lo] == in_s[hi] {
                continue;
            }
            if !allowed[fi] {
                ok = false;
                break;
            }
            total += f.area * (rho[f.lo] + rho[hi]) / 2.0;
        }
        if ok {
            best = Some(best.map_or(total, |b: f64| b.min(total)));
        }
    }
    best
}

#[test]
fn curve_usage_examples() {
    let strip = build_box_domain(&[3, 1], 1.0).unwrap();
    let r = RegionTriple::with_point_ends(&strip, vec![0, 1, 2], vec![0], vec![2]).unwrap();
    let u = curve_usage(&strip, &r, &[0, 1, 2]).unwrap();
    assert_eq!(u.entries(), &[(0, 0.5), (1, 1.0), (2, 0.5)]);
    assert_eq!(u.total(), 2.0);

    let pair = build_box_domain(&[2, 1], 0.25).unwrap();
    let r = RegionTriple::with_point_ends(&pair, vec![0, 1], vec![0], vec![1]).unwrap();
    assert_eq!(curve_usage(&pair, &r, &[0, 1]).unwrap().total(), 0.25);

    // L-shaped path on a 3x3 grid from the corner (0,0) to (2,2).
    let g = build_grid_domain(2, 3, 1.0).unwrap();
    let r = RegionTriple::with_point_ends(&g, (0..9).collect(), vec![0], vec![8]).unwrap();
    let u = curve_usage(&g, &r, &[0, 3, 6, 7, 8]).unwrap();
    assert_eq!(u.total(), 4.0);
}

#[test]
fn curve_usage_rejects_bad_paths() {
    let g = build_grid_domain(2, 3, 1.0).unwrap();
    let r = RegionTriple::with_point_ends(&g, (0..9).collect(), vec![0], vec![8]).unwrap();
    assert!(curve_usage(&g, &r, &[0, 4, 8]).is_err());
    assert!(curve_usage(&g, &r, &[0, 1, 0, 1, 2, 5, 8]).is_err());
    assert!(curve_usage(&g, &r, &[1, 2, 5, 8]).is_err());
    assert!(curve_usage(&g, &r, &[0, 1, 2, 5]).is_err());
}

#[test]
fn surface_usage_examples() {
    let g = build_grid_domain(2, 2, 0.5).unwrap();
    let r = RegionTriple::with_point_ends(&g, (0..4).collect(), vec![0], vec![3]).unwrap();
    let f = g.face_between(0, 1).unwrap();
    let u = surface_usage(&g, &r, &[f]).unwrap();
    assert_eq!(u.entries(), &[(0, 0.25), (1, 0.25)]);
    assert_eq!(u.total(), 0.5);

    let (dom, region) = square(4);
    let midline: Vec<usize> = (0..4).map(|j| dom.face_between(4 + j, 8 + j).unwrap()).collect();
    assert_eq!(surface_usage(&dom, &region, &midline).unwrap().total(), 1.0);

    let glued = build_glued_cubes(0.5, 0, 4).unwrap();
    let gf = glued.faces().iter().position(|f| f.kind == FaceKind::Glue).unwrap();
    let face = glued.face(gf);
    let copy0: Vec<usize> = (0..glued.num_cells()).filter(|&c| c % 2 == 0).collect();
    let e: Vec<usize> = copy0.iter().copied().filter(|&c| glued.cell(c).coords[2] == 3).collect();
    let f: Vec<usize> = e.iter().map(|c| c + 1).collect();
    let r = RegionTriple::whole(&glued, e, f).unwrap();
    let u = surface_usage(&glued, &r, &[gf]).unwrap();
    assert_eq!(u.entries(), &[(face.lo, face.area / 2.0), (face.hi.unwrap(), face.area / 2.0)]);
}

#[test]
fn separation_examples() {
    let (dom, region) = square(4);
    let spec = FamilySpec::separating(region, None).unwrap();
    let midline: Vec<usize> = (0..4).map(|j| dom.face_between(4 + j, 8 + j).unwrap()).collect();
    assert!(is_separating(&dom, &spec, &midline).unwrap());
    assert!(!is_separating(&dom, &spec, &midline[1..]).unwrap());
    assert!(!is_separating(&dom, &spec, &[]).unwrap());
}

#[test]
fn unit_density_examples() {
    let (dom, region) = square(4);
    let ones = vec![1.0; 16];
    let curves = FamilySpec::connecting(region.clone());
    let best = min_weight_curve(&dom, &curves, &ones).unwrap().unwrap();
    let brute = all_paths(&dom, &region)
        .iter()
        .map(|p| curve_usage(&dom, &region, p).unwrap().dot(&ones))
        .fold(f64::INFINITY, f64::min);
    // A straight row crosses n cells with half weight at both ends: (n - 1) h.
    assert_eq!(best.value, 0.75);
    assert_eq!(brute, 0.75);

    let cuts = FamilySpec::separating(region.clone(), None).unwrap();
    let cut = min_weight_cut(&dom, &cuts, &ones).unwrap().unwrap();
    assert_eq!(cut.value, 1.0);
    assert_eq!(brute_cut(&dom, &region, &truncation_mask(&dom, &region, None), &ones), Some(1.0));
    assert!(is_separating(&dom, &cuts, &cut.faces).unwrap());
    assert_eq!(cut.faces.len(), 4);

    let zeros = vec![0.0; 16];
    assert_eq!(min_weight_curve(&dom, &curves, &zeros).unwrap().unwrap().value, 0.0);
    assert_eq!(min_weight_cut(&dom, &cuts, &zeros).unwrap().unwrap().value, 0.0);
}

#[test]
fn infinite_density_leaves_a_corridor() {
    let (dom, region) = square(4);
    let spec = FamilySpec::connecting(region);
    // Open only the row j = 2 plus nothing else.
    let rho: Vec<f64> = (0..16).map(|c| if c % 4 == 2 { 1.0 } else { f64::INFINITY }).collect();
    let best = min_weight_curve(&dom, &spec, &rho).unwrap().unwrap();
    assert_eq!(best.path, vec![2, 6, 10, 14]);
    assert_eq!(best.value, 0.75);
    let walls = vec![f64::INFINITY; 16];
    assert!(min_weight_curve(&dom, &spec, &walls).unwrap().unwrap().value.is_infinite());
}

#[test]
fn glue_is_the_cheapest_separator() {
    let dom = build_glued_cubes(0.5, 0, 4).unwrap();
    let e: Vec<usize> = (0..dom.num_cells()).filter(|&c| c % 2 == 0 && dom.cell(c).coords[2] == 3).collect();
    let f: Vec<usize> = e.iter().map(|c| c + 1).collect();
    let region = RegionTriple::whole(&dom, e, f).unwrap();
    let spec = FamilySpec::separating(region, None).unwrap();
    let rho = vec![1.0; dom.num_cells()];
    let cut = min_weight_cut(&dom, &spec, &rho).unwrap().unwrap();
    assert_eq!(cut.value, 0.25);
    assert!(cut.faces.iter().all(|&f| dom.face(f).kind == FaceKind::Glue));
    assert_eq!(cut.faces.len(), 4);
}

#[test]
fn truncation_covering_everything_empties_the_family() {
    let (dom, region) = square(4);
    let spec = FamilySpec::separating(region.clone(), Some(1)).unwrap();
    assert!(min_weight_cut(&dom, &spec, &vec![1.0; 16]).unwrap().is_none());
    let oracle = MeshOracle::new(&dom, &spec).unwrap();
    assert_eq!(oracle.most_violated(&vec![1.0; 16]).unwrap(), OracleAnswer::Empty);
}

#[test]
fn truncation_is_monotone_and_vanishes_below_h() {
    let (dom, region) = square(4);
    let rho: Vec<f64> = (0..16).map(|c| 1.0 + (c % 5) as f64 * 0.3).collect();
    let full = FamilySpec::separating(region.clone(), None).unwrap();
    let base = min_weight_cut(&dom, &full, &rho).unwrap().unwrap().value;
    let mut last = f64::INFINITY;
    for j in [1, 2, 3, 4, 5, 8, 100] {
        let spec = FamilySpec::separating(region.clone(), Some(j)).unwrap();
        let v = min_weight_cut(&dom, &spec, &rho).unwrap().map_or(f64::INFINITY, |c| c.value);
        let brute = brute_cut(&dom, &region, &truncation_mask(&dom, &region, Some(j)), &rho);
        assert_eq!(brute.unwrap_or(f64::INFINITY), v, "j = {j}");
        assert!(v <= last);
        assert!(v >= base);
        if 1.0 / j as f64 <= dom.h() * (1.0 - 1e-12) {
            assert_eq!(v, base);
        }
        last = v;
    }
}

#[test]
fn family_settings_are_validated() {
    let (_, region) = square(4);
    assert!(FamilySpec::new(FamilyKind::Connecting, region.clone(), Some(3)).is_err());
    assert!(FamilySpec::separating(region.clone(), Some(0)).is_err());
    let spec = FamilySpec::connecting(region);
    let dom = build_grid_domain(2, 4, 0.25).unwrap();
    assert!(min_weight_cut(&dom, &spec, &vec![1.0; 16]).is_err());
}

#[test]
fn usage_vector_merges_and_sorts() {
    let u = UsageVector::from_entries(vec![(3, 1.0), (1, 0.5), (3, 0.25), (2, 0.0)]);
    assert_eq!(u.entries(), &[(1, 0.5), (3, 1.25)]);
    assert_eq!(u.get(3), 1.25);
    assert_eq!(u.get(2), 0.0);
    assert_eq!(u.dot(&[0.0, 2.0, 0.0, 4.0]), 6.0);
}

fn fixtures() -> Vec<(MeshDomain, RegionTriple)> {
    let mut out = vec![square(4), square(3)];
    let rect = build_box_domain(&[4, 3], 0.5).unwrap();
    let r = RegionTriple::whole(&rect, vec![0, 1], vec![10, 11]).unwrap();
    out.push((rect, r));
    let g = build_grid_domain(2, 4, 0.25).unwrap();
    // E = corner L, F = opposite corner L.
    let r = RegionTriple::whole(&g, vec![0, 1, 4], vec![11, 14, 15]).unwrap();
    out.push((g, r));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curve_oracle_matches_enumeration(which in 0usize..4, seed in prop::collection::vec(0.0f64..3.0, 16)) {
        let (dom, region) = fixtures().swap_remove(which);
        let rho: Vec<f64> = (0..dom.num_cells()).map(|c| seed[c % seed.len()]).collect();
        let spec = FamilySpec::connecting(region.clone());
        let best = min_weight_curve(&dom, &spec, &rho).unwrap().unwrap();
        let brute = all_paths(&dom, &region)
            .iter()
            .map(|p| curve_usage(&dom, &region, p).unwrap().dot(&rho))
            .fold(f64::INFINITY, f64::min);
        prop_assert!((best.value - brute).abs() <= 1e-12 * brute.max(1.0));
        let usage = curve_usage(&dom, &region, &best.path).unwrap();
        prop_assert!((usage.dot(&rho) - best.value).abs() <= 1e-12 * brute.max(1.0));
    }

    #[test]
    fn cut_oracle_matches_enumeration(which in 0usize..4, j in 0u32..6, seed in prop::collection::vec(0.0f64..3.0, 16)) {
        let (dom, region) = fixtures().swap_remove(which);
        let rho: Vec<f64> = (0..dom.num_cells()).map(|c| seed[c % seed.len()]).collect();
        let trunc = (j > 0).then_some(j);
        let spec = FamilySpec::separating(region.clone(), trunc).unwrap();
        let got = min_weight_cut(&dom, &spec, &rho).unwrap();
        let brute = brute_cut(&dom, &region, &truncation_mask(&dom, &region, trunc), &rho);
        match (got, brute) {
            (None, None) => {}
            (Some(cut), Some(b)) => {
                prop_assert!((cut.value - b).abs() <= 1e-12 * b.max(1.0), "{} vs {}", cut.value, b);
                prop_assert!(is_separating(&dom, &spec, &cut.faces).unwrap());
                let usage = surface_usage(&dom, &region, &cut.faces).unwrap();
                prop_assert!((usage.dot(&rho) - cut.value).abs() <= 1e-12 * b.max(1.0));
                // Minimality: dropping any face reconnects E and F.
                for k in 0..cut.faces.len() {
                    let mut fewer = cut.faces.clone();
                    fewer.remove(k);
                    prop_assert!(!is_separating(&dom, &spec, &fewer).unwrap());
                }
            }
            (got, brute) => prop_assert!(false, "oracle {:?} vs enumeration {:?}", got, brute),
        }
    }
}
