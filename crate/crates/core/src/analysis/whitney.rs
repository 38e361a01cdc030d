//! Whitney covers built band by band with greedy 5r selection, and the
//! density that sums normalized indicators of dilated Whitney balls along a
//! path.

use serde::{Deserialize, Serialize};

use super::Ball;
use crate::families::{curve_usage, min_weight_cut, Density, FamilySpec};
use crate::mesh::{MeshDomain, RegionTriple, UNREACHABLE};
use crate::{Error, Result};

/// A cover ball with the data of its construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyBall {
    pub ball: Ball,
    /// Hop distance from the center to the complement of `Omega`.
    pub hops: u32,
    /// Dyadic band: `2^(band-1) < hops <= 2^band`.
    pub band: u32,
}

/// Exhaustive checks of the cover properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCheck {
    /// Every radius is `d(center, X - Omega) / (2n)`.
    pub radii_exact: bool,
    /// Extreme radius ratio over all intersecting pairs.
    pub max_neighbor_ratio: f64,
    /// Least and greatest number of doubled balls over the cells of `A`.
    pub min_overlap: usize,
    pub max_overlap: usize,
}

impl WhitneyCheck {
    pub fn holds(&self, c_overlap: usize) -> bool {
        self.radii_exact && self.max_neighbor_ratio <= 2.0 && self.min_overlap >= 1 && self.max_overlap <= c_overlap
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCover {
    pub n: u32,
    pub omega: Vec<usize>,
    pub a: Vec<usize>,
    pub balls: Vec<WhitneyBall>,
    /// Largest number of doubled balls over any cell of `A`.
    pub overlap: usize,
}

#[derive(Serialize)]
struct BallRecord {
    center: usize,
    radius: f64,
    members: usize,
    band: u32,
}

impl WhitneyCover {
    /// `{n, overlap, balls: [{center, radius, members, band}]}`.
    pub fn to_json(&self) -> Result<String> {
        let balls: Vec<BallRecord> = self
            .balls
            .iter()
            .map(|b| BallRecord { center: b.ball.center, radius: b.ball.radius, members: b.ball.members.len(), band: b.band })
            .collect();
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "n": self.n,
            "overlap": self.overlap,
            "balls": balls,
        }))?)
    }

    pub fn check(&self, dom: &MeshDomain) -> WhitneyCheck {
        let omega: Vec<bool> = mask(dom.num_cells(), &self.omega);
        let hops = complement_hops(dom, &omega);
        let radii_exact = self.balls.iter().all(|b| {
            let d = f64::from(hops[b.ball.center]) * dom.h();
            b.hops == hops[b.ball.center] && b.ball.radius == d / (2.0 * f64::from(self.n))
        });
        let mut max_neighbor_ratio: f64 = 1.0;
        for (i, a) in self.balls.iter().enumerate() {
            for b in &self.balls[i + 1..] {
                if a.ball.intersects(&b.ball) {
                    max_neighbor_ratio = max_neighbor_ratio.max(a.ball.radius / b.ball.radius).max(b.ball.radius / a.ball.radius);
                }
            }
        }
        let counts = overlap_counts(dom, &self.balls);
        let on_a = self.a.iter().map(|&c| counts[c]);
        WhitneyCheck {
            radii_exact,
            max_neighbor_ratio,
            min_overlap: on_a.clone().min().unwrap_or(0),
            max_overlap: on_a.max().unwrap_or(0),
        }
    }
}

fn mask(n: usize, cells: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &c in cells {
        m[c] = true;
    }
    m
}

fn complement_hops(dom: &MeshDomain, omega: &[bool]) -> Vec<u32> {
    let outside: Vec<usize> = (0..dom.num_cells()).filter(|&c| !omega[c]).collect();
    dom.hops_from(&outside, None)
}

/// Number of doubled balls containing each cell.
fn overlap_counts(dom: &MeshDomain, balls: &[WhitneyBall]) -> Vec<usize> {
    let mut counts = vec![0usize; dom.num_cells()];
    for b in balls {
        dom.ball_visit(b.ball.center, 2.0 * b.ball.radius, |c, _| counts[c] += 1);
    }
    counts
}

fn band_of(hops: u32) -> u32 {
    // Smallest k with hops <= 2^k.
    hops.next_power_of_two().trailing_zeros()
}

/// Whitney cover of `a` inside `omega`.
///
/// Cells of `a` are grouped by the band of their hop distance `d` to
/// `X - omega`. In each band, candidate balls `B(x, d/(10n))` are taken by
/// decreasing radius (ties by cell id) whenever they are metrically disjoint
/// from every ball already taken in that band, that is `d(x, y) >= r_x + r_y`.
/// The chosen balls are then scaled by 5, which gives radius `d/(2n)`.
pub fn whitney_cover(dom: &MeshDomain, omega: &[usize], a: &[usize], n: u32) -> Result<WhitneyCover> {
    if n < 2 {
        return Err(Error::InvalidProblem(format!("n = {n} must be at least 2")));
    }
    for &c in omega.iter().chain(a) {
        dom.check_cell(c)?;
    }
    let in_omega = mask(dom.num_cells(), omega);
    if in_omega.iter().all(|&x| x) {
        return Err(Error::InvalidRegion("Omega is the whole space; its complement is empty".into()));
    }
    if let Some(&c) = a.iter().find(|&&c| !in_omega[c]) {
        return Err(Error::InvalidRegion(format!("A cell {c} lies outside Omega")));
    }
    let mut omega: Vec<usize> = omega.to_vec();
    omega.sort_unstable();
    omega.dedup();
    let mut a_sorted: Vec<usize> = a.to_vec();
    a_sorted.sort_unstable();
    a_sorted.dedup();

    let hops = complement_hops(dom, &in_omega);
    if let Some(&c) = a_sorted.iter().find(|&&c| hops[c] == UNREACHABLE) {
        return Err(Error::InvalidRegion(format!("cell {c} cannot reach the complement of Omega")));
    }
    let scale = 1.0 / (2.0 * f64::from(n));
    let mut candidates: Vec<(u32, usize)> = a_sorted.iter().map(|&c| (hops[c], c)).collect();
    candidates.sort_by_key(|&(k, c)| (band_of(k), std::cmp::Reverse(k), c));

    let mut balls: Vec<WhitneyBall> = Vec::new();
    // Band and candidate radius of each chosen center.
    let mut chosen: Vec<Option<(u32, f64)>> = vec![None; dom.num_cells()];
    for (k, c) in candidates {
        let band = band_of(k);
        let r = f64::from(k) * dom.h() * scale / 5.0;
        // Radii in one band differ by at most a factor 2, so a conflicting
        // center lies within 3r.
        let mut clash = false;
        dom.ball_visit(c, 3.0 * r + dom.h(), |y, hops| {
            if let Some((b, ry)) = chosen[y] {
                clash |= b == band && f64::from(hops) * dom.h() < r + ry;
            }
        });
        if clash {
            continue;
        }
        chosen[c] = Some((band, r));
        let radius = 5.0 * r;
        balls.push(WhitneyBall { ball: Ball { center: c, radius, members: dom.ball(c, radius) }, hops: k, band });
    }
    let counts = overlap_counts(dom, &balls);
    let overlap = a_sorted.iter().map(|&c| counts[c]).max().unwrap_or(0);
    Ok(WhitneyCover { n, omega, a: a_sorted, balls, overlap })
}

/// The Whitney-ball density for the truncated separating family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyDensity {
    pub density: Density,
    /// Factor applied to the raw sum so that the cheapest allowed cut has
    /// weight 1. Zero when the truncated family is empty.
    pub normalization: f64,
    pub lambda_prime: f64,
    pub cover: WhitneyCover,
    /// Lowest band kept; balls of lower bands sit inside the `1/j`
    /// neighbourhood of `E u F`.
    pub first_band: u32,
    pub balls_kept: usize,
    /// Cheapest allowed cut under the returned density.
    pub min_cut: f64,
}

impl WhitneyDensity {
    /// `sum_c mu_c phi_c^q`, an upper bound for the `q`-modulus of the
    /// truncated separating family.
    pub fn energy(&self, dom: &MeshDomain, q: f64) -> f64 {
        self.density.energy(dom, q)
    }
}

/// Lowest band whose balls can reach past distance `1/j` from the ends.
///
/// A ball of band `k` has center distance at most `2^k h` and radius
/// `d/(2n)`, so it stays within `2^k h (1 + 1/(2n))`.
fn first_band(h: f64, n: u32, truncation_j: Option<u32>) -> u32 {
    let Some(j) = truncation_j else { return 0 };
    let reach = |k: u32| 2f64.powi(k as i32) * h * (1.0 + 1.0 / (2.0 * f64::from(n)));
    (0..64).find(|&k| reach(k) > 1.0 / f64::from(j)).unwrap_or(64)
}

/// Builds `C sum_B r_B mu(B)^-1 chi_{lambda' B}` over the Whitney cover of
/// `G - (E u F)` with `A` the path cells in that set, keeping bands from the
/// `j` cutoff on, and fixes `C` with the cut oracle.
pub fn build_whitney_density(
    dom: &MeshDomain,
    region: &RegionTriple,
    path: &[usize],
    n: u32,
    truncation_j: Option<u32>,
    lambda_prime: f64,
) -> Result<WhitneyDensity> {
    if !(lambda_prime >= 1.0 && lambda_prime.is_finite()) {
        return Err(Error::InvalidProblem(format!("lambda_prime = {lambda_prime} must be at least 1")));
    }
    curve_usage(dom, region, path)?;
    let omega: Vec<usize> = region.g().iter().copied().filter(|&c| !region.in_e(c) && !region.in_f(c)).collect();
    let in_omega = mask(dom.num_cells(), &omega);
    let a: Vec<usize> = path.iter().copied().filter(|&c| in_omega[c]).collect();
    if a.is_empty() {
        return Err(Error::InvalidPath("the path has no cell outside E and F".into()));
    }
    let cover = whitney_cover(dom, &omega, &a, n)?;
    let first = first_band(dom.h(), n, truncation_j);

    let mut raw = vec![0.0; dom.num_cells()];
    let mut balls_kept = 0;
    for b in cover.balls.iter().filter(|b| b.band >= first) {
        balls_kept += 1;
        let w = b.ball.radius / b.ball.measure(dom);
        dom.ball_visit(b.ball.center, lambda_prime * b.ball.radius, |c, _| raw[c] += w);
    }
    if balls_kept == 0 {
        return Err(Error::InvalidProblem(format!(
            "no Whitney ball survives the truncation cutoff (first band {first})"
        )));
    }
    let spec = FamilySpec::separating(region.clone(), truncation_j)?;
    let Some(cut) = min_weight_cut(dom, &spec, &raw)? else {
        return Ok(WhitneyDensity {
            density: Density::zeros(dom.num_cells()),
            normalization: 0.0,
            lambda_prime,
            cover,
            first_band: first,
            balls_kept,
            min_cut: f64::INFINITY,
        });
    };
    if !(cut.value > 0.0) {
        return Err(Error::InvalidProblem(
            "the Whitney balls miss an allowed separating set; no multiple of the sum is admissible".into(),
        ));
    }
    let normalization = 1.0 / cut.value;
    let density = Density::new(raw.iter().map(|v| v * normalization).collect())?;
    let min_cut = min_weight_cut(dom, &spec, density.values())?.map_or(f64::INFINITY, |c| c.value);
    Ok(WhitneyDensity { density, normalization, lambda_prime, cover, first_band: first, balls_kept, min_cut })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;
    use crate::geometry::GeometrySpec;
    use crate::mesh::build_grid_domain;
    use crate::solver::{solve_modulus, ModulusProblem};

    fn grid(side: usize) -> MeshDomain {
        build_grid_domain(2, side, 1.0 / side as f64).unwrap()
    }

    fn id(side: usize, x: usize, y: usize) -> usize {
        x * side + y
    }

    #[test]
    fn bands() {
        assert_eq!([1, 2, 3, 4, 5, 8, 9].map(band_of), [0, 1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn single_cell_gets_radius_quarter_distance() {
        let dom = grid(16);
        let omega: Vec<usize> = (1..16).flat_map(|y| (0..16).map(move |x| id(16, x, y))).collect();
        let c = id(16, 5, 9);
        let cover = whitney_cover(&dom, &omega, &[c], 2).unwrap();
        assert_eq!(cover.balls.len(), 1);
        let d = 9.0 / 16.0;
        assert_eq!(cover.balls[0].ball.radius, d / 4.0);
        assert!(cover.check(&dom).holds(1));
    }

    #[test]
    fn corridor_cells_are_covered() {
        let dom = grid(12);
        let corridor: Vec<usize> = (1..11).map(|x| id(12, x, 6)).collect();
        let cover = whitney_cover(&dom, &corridor, &corridor, 2).unwrap();
        let check = cover.check(&dom);
        assert!(check.min_overlap >= 1, "{check:?}");
        assert!(check.radii_exact);
    }

    #[test]
    fn diagonal_overlap() {
        let dom = grid(16);
        let omega: Vec<usize> = (0..256).filter(|&c| c != 0 && c != 255).collect();
        let diag: Vec<usize> = (1..15).map(|i| id(16, i, i)).collect();
        let cover = whitney_cover(&dom, &omega, &diag, 2).unwrap();
        let check = cover.check(&dom);
        assert!(check.holds(30), "{check:?}");
        assert_eq!(check.max_overlap, cover.overlap);
        let json: serde_json::Value = serde_json::from_str(&cover.to_json().unwrap()).unwrap();
        assert_eq!(json["balls"].as_array().unwrap().len(), cover.balls.len());
    }

    #[test]
    fn errors() {
        let dom = grid(4);
        let all: Vec<usize> = (0..16).collect();
        assert!(whitney_cover(&dom, &all, &[3], 2).is_err());
        assert!(whitney_cover(&dom, &all[1..], &[0], 2).is_err());
        assert!(whitney_cover(&dom, &all[1..], &[3], 1).is_err());
    }

    fn straight(side: usize) -> (MeshDomain, RegionTriple, Vec<usize>) {
        let (dom, region) = GeometrySpec::unit_square().build(1.0 / side as f64).unwrap();
        let row = side / 2;
        (dom, region, (0..side).map(|x| id(side, x, row)).collect())
    }

    #[test]
    fn straight_path_density_is_admissible() {
        let (dom, region, path) = straight(16);
        let w = build_whitney_density(&dom, &region, &path, 2, None, 3.0).unwrap();
        assert!(w.min_cut >= 1.0 - 1e-6, "{}", w.min_cut);
        assert!(w.normalization > 0.0 && w.normalization.is_finite());
        let support: Vec<usize> = (0..dom.num_cells()).filter(|&c| w.density.values()[c] > 0.0).collect();
        for c in support {
            assert!(w.cover.balls.iter().any(|b| dom.geodesic_distance(b.ball.center, c) < 3.0 * b.ball.radius));
        }
        // Admissible, so its energy bounds the modulus from above.
        let spec = FamilySpec::separating(region, None).unwrap();
        let modulus = solve_modulus(&ModulusProblem::new(&dom, spec, 2.0).unwrap()).unwrap();
        let energy = w.energy(&dom, 2.0);
        assert!(energy.is_finite() && energy >= modulus.value_lower * (1.0 - 1e-9), "{energy} {}", modulus.value_lower);
    }

    #[test]
    fn truncation_drops_near_bands() {
        let (dom, region, path) = straight(16);
        let full = build_whitney_density(&dom, &region, &path, 2, None, 3.0).unwrap();
        let cut = build_whitney_density(&dom, &region, &path, 2, Some(4), 3.0).unwrap();
        assert!(cut.first_band > 0 && cut.balls_kept < full.balls_kept);
        assert!(cut.min_cut >= 1.0 - 1e-6);
        let spec = FamilySpec::separating(region, Some(4)).unwrap();
        let m = min_weight_cut(&dom, &spec, cut.density.values()).unwrap().unwrap();
        assert!((m.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn density_rejects_bad_input() {
        let (dom, region, path) = straight(8);
        assert!(build_whitney_density(&dom, &region, &path[1..], 2, None, 3.0).is_err());
        assert!(build_whitney_density(&dom, &region, &path, 2, None, 0.5).is_err());
    }
}
