//! Self-similar Cantor sets inside `[1/4, 3/4]`.
//!
//! Each generation replaces an interval `[a, b]` of length `L` by its two outer
//! pieces `[a, a + rL]` and `[b - rL, b]`, with contraction ratio
//! `r = (1/2)^(1/(1 - eps))`, so the similarity dimension is
//! `log 2 / log(1/r) = 1 - eps`.

use crate::{Error, Result};

pub const CANTOR_LO: f64 = 0.25;
pub const CANTOR_HI: f64 = 0.75;
/// Children per interval.
pub const CANTOR_CHILDREN: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct CantorApprox {
    epsilon: f64,
    level: u32,
    ratio: f64,
    intervals: Vec<(f64, f64)>,
}

impl CantorApprox {
    pub fn new(epsilon: f64, level: u32) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidMesh(format!("epsilon = {epsilon} not in (0, 1)")));
        }
        if level > 24 {
            return Err(Error::InvalidMesh(format!("Cantor level {level} too deep")));
        }
        let ratio = 0.5f64.powf(1.0 / (1.0 - epsilon));
        let mut intervals = vec![(CANTOR_LO, CANTOR_HI)];
        for _ in 0..level {
            intervals = intervals
                .iter()
                .flat_map(|&(a, b)| {
                    let len = (b - a) * ratio;
                    [(a, a + len), (b - len, b)]
                })
                .collect();
        }
        Ok(Self { epsilon, level, ratio, intervals })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn similarity_dimension(&self) -> f64 {
        (CANTOR_CHILDREN as f64).ln() / (1.0 / self.ratio).ln()
    }

    pub fn interval_length(&self) -> f64 {
        (CANTOR_HI - CANTOR_LO) * self.ratio.powi(self.level as i32)
    }

    pub fn retained_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Length of `[lo, hi]` covered by the retained intervals.
    pub fn covered_length(&self, lo: f64, hi: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
            .sum()
    }

    /// Retained intervals rounded outward to multiples of `h`, merged where
    /// they touch.
    pub fn rounded(&self, h: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &(a, b) in &self.intervals {
            let lo = (a / h + 1e-9).floor() * h;
            let hi = (b / h - 1e-9).ceil() * h;
            match out.last_mut() {
                Some(last) if lo <= last.1 + 1e-12 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        out
    }

    /// Approximate `s`-dimensional Hausdorff content of `K_m ∩ [lo, hi]`,
    /// `s` the similarity dimension: the cheapest cover drawn from the
    /// construction tree, each node covered either by the hull of its part in
    /// the window or by its children. Exponential in nothing, linear in the
    /// number of intervals.
    pub fn content(&self, lo: f64, hi: f64) -> f64 {
        let s = self.similarity_dimension();
        self.content_node(CANTOR_LO, CANTOR_HI, 0, lo, hi, s)
    }

    fn content_node(&self, a: f64, b: f64, depth: u32, lo: f64, hi: f64, s: f64) -> f64 {
        let (l, r) = (a.max(lo), b.min(hi));
        if r <= l {
            return 0.0;
        }
        if depth == self.level {
            return (r - l).powf(s);
        }
        let len = (b - a) * self.ratio;
        let split = self.content_node(a, a + len, depth + 1, lo, hi, s)
            + self.content_node(b - len, b, depth + 1, lo, hi, s);
        // Hull of the retained part inside the window.
        let first = (a.max(lo), (a + len).min(hi));
        let second = ((b - len).max(lo), b.min(hi));
        let hull_lo = if first.1 > first.0 { first.0 } else { second.0 };
        let hull_hi = if second.1 > second.0 { second.1 } else { first.1 };
        split.min((hull_hi - hull_lo).max(0.0).powf(s))
    }

    /// Smallest observed `content(B(x, r)) / r^s` over interval endpoints `x`
    /// and construction scales `r`. A diagnostic for the lower content bound
    /// of the glue set; bounded away from zero for self-similar sets.
    pub fn content_lower_ratio(&self) -> f64 {
        let s = self.similarity_dimension();
        let mut worst = f64::INFINITY;
        for &(a, _) in &self.intervals {
            for k in 0..=self.level {
                let r = (CANTOR_HI - CANTOR_LO) * self.ratio.powi(k as i32);
                let c = self.content(a - r, a + r);
                worst = worst.min(c / r.powf(s));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_matches_epsilon() {
        for &eps in &[0.1, 0.25, 0.5, 0.9] {
            let k = CantorApprox::new(eps, 3).unwrap();
            assert!((k.similarity_dimension() - (1.0 - eps)).abs() < 1e-9);
        }
    }

    #[test]
    fn intervals_disjoint_and_contained() {
        let k = CantorApprox::new(0.3, 5).unwrap();
        assert_eq!(k.intervals().len(), 32);
        for w in k.intervals().windows(2) {
            assert!(w[0].1 < w[1].0);
        }
        assert!(k.intervals()[0].0 >= CANTOR_LO);
        assert!(k.intervals().last().unwrap().1 <= CANTOR_HI);
    }

    #[test]
    fn half_epsilon_is_dyadic() {
        let k = CantorApprox::new(0.5, 1).unwrap();
        assert_eq!(k.ratio(), 0.25);
        assert_eq!(k.intervals(), &[(0.25, 0.375), (0.625, 0.75)]);
        assert_eq!(k.retained_length(), 0.25);
    }

    #[test]
    fn length_scales_by_children_times_ratio() {
        for m in 0..6 {
            let a = CantorApprox::new(0.5, m).unwrap().retained_length();
            let b = CantorApprox::new(0.5, m + 1).unwrap().retained_length();
            assert_eq!(b / a, 2.0 * 0.25);
        }
    }

    #[test]
    fn rounding_is_outward() {
        let k = CantorApprox::new(0.5, 2).unwrap();
        let rounded = k.rounded(1.0 / 16.0);
        for &(a, b) in k.intervals() {
            assert!(rounded.iter().any(|&(lo, hi)| lo <= a && b <= hi));
        }
    }

    #[test]
    fn content_bounded_below() {
        let k = CantorApprox::new(0.5, 4).unwrap();
        let c = k.content_lower_ratio();
        assert!(c > 0.05, "content ratio {c}");
        assert!(k.content(0.0, 1.0) <= 0.5f64.powf(0.5) + 1e-12);
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(CantorApprox::new(0.0, 1).is_err());
        assert!(CantorApprox::new(1.0, 1).is_err());
    }
}
