//! The restricted program over the active objects, solved by dual coordinate
//! ascent.

use super::ActiveObject;
use crate::families::UsageVector;

/// Sweeps per call before giving up on the inner tolerance.
const MAX_SWEEPS: usize = 200_000;

struct Row {
    usage: UsageVector,
    lambda: f64,
    zero_streak: u32,
}

pub(super) struct Restricted<'a> {
    mu: &'a [f64],
    p: f64,
    alpha: f64,
    rows: Vec<Row>,
    /// `s = sum_j lambda_j N_j`.
    s: Vec<f64>,
    /// Closed-form primal at `s`, kept in step with it.
    rho: Vec<f64>,
}

impl<'a> Restricted<'a> {
    pub(super) fn new(mu: &'a [f64], p: f64) -> Self {
        let n = mu.len();
        Self { mu, p, alpha: 1.0 / (p - 1.0), rows: Vec::new(), s: vec![0.0; n], rho: vec![0.0; n] }
    }

    pub(super) fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub(super) fn push(&mut self, usage: UsageVector) {
        self.rows.push(Row { usage, lambda: 0.0, zero_streak: 0 });
    }

    /// Drops rows whose multiplier has been zero for `after` consecutive
    /// calls and returns them.
    pub(super) fn prune(&mut self, after: u32) -> Vec<UsageVector> {
        let mut dropped = Vec::new();
        let mut kept = Vec::with_capacity(self.rows.len());
        for mut row in self.rows.drain(..) {
            row.zero_streak = if row.lambda == 0.0 { row.zero_streak + 1 } else { 0 };
            if row.zero_streak >= after {
                dropped.push(row.usage);
            } else {
                kept.push(row);
            }
        }
        self.rows = kept;
        dropped
    }

    pub(super) fn active(&self) -> Vec<ActiveObject> {
        self.rows
            .iter()
            .map(|r| ActiveObject { usage: r.usage.clone(), lambda: r.lambda })
            .collect()
    }

    fn rho_at(&self, s: f64, c: usize) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            self.pow_alpha(s / (self.p * self.mu[c]))
        }
    }

    /// `x^alpha`, avoiding `powf` for the common exponents.
    fn pow_alpha(&self, x: f64) -> f64 {
        if self.alpha == 1.0 {
            x
        } else if self.alpha == 2.0 {
            x * x
        } else if self.alpha == 0.5 {
            x.sqrt()
        } else {
            x.powf(self.alpha)
        }
    }

    pub(super) fn primal(&self) -> Vec<f64> {
        self.rho.clone()
    }

    pub(super) fn energy(&self, rho: &[f64]) -> f64 {
        rho.iter().zip(self.mu).map(|(r, m)| m * r.powf(self.p)).sum()
    }

    /// `sum_j lambda_j - (p - 1) E(rho(lambda))`, a lower bound on the
    /// restricted (hence on the full) program for every `lambda >= 0`.
    pub(super) fn dual_value(&self) -> f64 {
        let lambdas: f64 = self.rows.iter().map(|r| r.lambda).sum();
        lambdas - (self.p - 1.0) * self.energy(&self.primal())
    }

    fn recompute_s(&mut self) {
        self.s.fill(0.0);
        for row in &self.rows {
            if row.lambda > 0.0 {
                for &(c, w) in row.usage.entries() {
                    self.s[c] += row.lambda * w;
                }
            }
        }
        for c in 0..self.s.len() {
            self.rho[c] = self.rho_at(self.s[c], c);
        }
    }

    /// Round-robin coordinate ascent until no multiplier moves by more than
    /// `tol` relative to the largest one.
    pub(super) fn solve(&mut self, tol: f64) {
        let mut rest = Vec::new();
        for _ in 0..MAX_SWEEPS {
            self.recompute_s();
            let mut max_change = 0.0f64;
            let mut max_lambda = 0.0f64;
            for j in 0..self.rows.len() {
                let old = self.rows[j].lambda;
                // An inactive row that is already satisfied stays inactive.
                if old == 0.0 && self.rows[j].usage.dot(&self.rho) >= 1.0 {
                    continue;
                }
                rest.clear();
                rest.extend(
                    self.rows[j]
                        .usage
                        .entries()
                        .iter()
                        .map(|&(c, w)| (self.s[c] - old * w).max(0.0)),
                );
                let new = self.coordinate(j, &rest, old);
                if new != old {
                    for (&(c, w), &r) in self.rows[j].usage.entries().iter().zip(&rest) {
                        self.s[c] = r + new * w;
                        self.rho[c] = self.rho_at(self.s[c], c);
                    }
                    self.rows[j].lambda = new;
                }
                max_change = max_change.max((new - old).abs());
                max_lambda = max_lambda.max(new);
            }
            if max_change <= tol * max_lambda {
                break;
            }
        }
        self.recompute_s();
    }

    /// Maximizer over `t >= 0` of the dual along coordinate `j`: the root of
    /// `g(t) = sum_c N_c rho_c(rest_c + t N_c) = 1`, or 0 if `g(0) >= 1`.
    fn coordinate(&self, j: usize, rest: &[f64], start: f64) -> f64 {
        let entries = self.rows[j].usage.entries();
        let g = |t: f64| -> (f64, f64) {
            let mut val = 0.0;
            let mut der = 0.0;
            for (&(c, w), &r) in entries.iter().zip(rest) {
                let s = r + t * w;
                if s > 0.0 {
                    let pm = self.p * self.mu[c];
                    let rho = self.pow_alpha(s / pm);
                    val += w * rho;
                    der += self.alpha * w * w * rho / s;
                } else if self.alpha < 1.0 && w > 0.0 {
                    der = f64::INFINITY;
                }
            }
            (val, der)
        };
        if g(0.0).0 >= 1.0 {
            return 0.0;
        }
        // With rest = 0, g(t) = t^alpha sum N^(1+alpha) (p mu)^(-alpha), so
        // this t makes g >= 1.
        let k: f64 = entries
            .iter()
            .map(|&(c, w)| w.powf(1.0 + self.alpha) * (self.p * self.mu[c]).powf(-self.alpha))
            .sum();
        let mut hi = k.powf(-(self.p - 1.0));
        let mut lo = 0.0;
        let mut t = if start > 0.0 && start < hi { start } else { 0.5 * hi };
        for _ in 0..200 {
            let (val, der) = g(t);
            let f = val - 1.0;
            if f == 0.0 {
                return t;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            if hi - lo <= 1e-16 * hi {
                break;
            }
            let newton = t - f / der;
            t = if der.is_finite() && der > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (f / der).abs() <= 1e-16 * t {
                return t;
            }
        }
        0.5 * (lo + hi)
    }
}
