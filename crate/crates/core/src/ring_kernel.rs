//! Ring sums `g(x, y) = Σ_{j=1}^k |x e_1 - y e^{i(2j-1)π/k}|^{-1}` and their bounds.
//!
//! Terms are written as `((x - y)² + 4xy sin²((2j-1)π/2k))^{-1/2}`, which is
//! free of cancellation near the diagonal, and summed pairwise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::configurations::outer_angle;
use crate::error::{Error, Result};
use crate::quad::pairwise_sum;

const CHUNK: usize = 4096;

/// Precomputed `4 sin²((2j-1)π/2k)` for one `k`, folded with the symmetry
/// `j <-> k + 1 - j` so that only about `k/2` terms are evaluated per sum.
#[derive(Debug, Clone)]
pub struct RingTable {
    k: usize,
    s: Vec<f64>,
    weight: Vec<f64>,
}

impl RingTable {
    pub fn new(k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        let half = k.div_ceil(2);
        let mut s = Vec::with_capacity(half);
        let mut weight = Vec::with_capacity(half);
        for j in 1..=half {
            let t = ((2 * j - 1) as f64 * PI / (2 * k) as f64).sin();
            s.push(4.0 * t * t);
            weight.push(if 2 * j - 1 == k { 1.0 } else { 2.0 });
        }
        Ok(Self { k, s, weight })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `g(x, y)` for this `k`.
    pub fn sum(&self, x: f64, y: f64) -> Result<f64> {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::Domain(format!("ring radii must be positive, got x = {x}, y = {y}")));
        }
        let d2 = (x - y) * (x - y);
        let xy = x * y;
        let mut partial = Vec::with_capacity(self.s.len() / CHUNK + 1);
        let mut buf = [0.0; CHUNK];
        for (cs, cw) in self.s.chunks(CHUNK).zip(self.weight.chunks(CHUNK)) {
            for (b, (s, w)) in buf.iter_mut().zip(cs.iter().zip(cw)) {
                *b = w / (d2 + xy * s).sqrt();
            }
            partial.push(pairwise_sum(&buf[..cs.len()]));
        }
        Ok(pairwise_sum(&partial))
    }
}

/// `g(x, y)` for ring radii `x, y > 0` and `k >= 1` peaks.
pub fn g_sum(x: f64, y: f64, k: usize) -> Result<f64> {
    RingTable::new(k)?.sum(x, y)
}

/// `S_k = Σ_{j=1}^k 1 / sin((2j-1)π/2k)`, so that `g(x, x) = S_k / (2x)`.
pub fn diagonal_constant(k: usize) -> f64 {
    let terms: Vec<f64> = (1..=k).map(|j| 1.0 / ((2 * j - 1) as f64 * PI / (2 * k) as f64).sin()).collect();
    pairwise_sum(&terms)
}

/// `Σ_{j=1}^{k-1} 1 / (2 sin(jπ/k))`: the sum of reciprocal distances from one
/// peak of a unit ring to the other `k - 1`.
pub fn same_ring_sum(k: usize) -> f64 {
    if k < 2 {
        return 0.0;
    }
    let terms: Vec<f64> = (1..k).map(|j| 0.5 / (j as f64 * PI / k as f64).sin()).collect();
    pairwise_sum(&terms)
}

/// `π same_ring_sum(k) / (k ln k)`, which tends to 1 (slowly, like `1 + c / ln k`).
pub fn same_ring_ratio(k: usize) -> f64 {
    if k < 2 {
        return f64::NAN;
    }
    PI * same_ring_sum(k) / (k as f64 * (k as f64).ln())
}

/// `Σ_j 1/|x^1 - y^j|` computed from explicit centres
/// `x^1 = (r, 0, 0)` and `y^j = ρ (cos θ_j, sin θ_j, 0)`, `θ_j = (2j-1)π/k`.
pub fn mixed_distance_sum(r: f64, rho: f64, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    if !(r > 0.0 && rho > 0.0) {
        return Err(Error::Domain("ring radii must be positive".into()));
    }
    let terms: Vec<f64> = (1..=k)
        .map(|j| {
            let a = outer_angle(j, k);
            let dx = r - rho * a.cos();
            let dy = -rho * a.sin();
            1.0 / (dx * dx + dy * dy).sqrt()
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// A ring sum with its elementary bounds.
///
/// For `x != y`: `k / (x + y) < g < k / |x - y|` and `g < g(m, m) = S_k / (2m)`
/// with `m = min(x, y)`, since every term's squared distance exceeds the
/// diagonal one. `S_k / 2` grows like `k ln k / π`. On the diagonal only the
/// asymptote `2 k ln k / (π x)` is reported together with the ratio
/// `g / asymptote`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSumReport {
    pub x: f64,
    pub y: f64,
    pub k: usize,
    pub value: f64,
    pub lower_bound: Option<f64>,
    pub upper_bound_distance: Option<f64>,
    pub upper_bound_log: Option<f64>,
    pub diagonal_asymptote: Option<f64>,
    pub diagonal_ratio: Option<f64>,
}

impl RingSumReport {
    /// `lower < value < min(upper bounds)` off the diagonal; `true` on it.
    pub fn sandwich_holds(&self) -> bool {
        match (self.lower_bound, self.upper_bound_distance, self.upper_bound_log) {
            (Some(lo), Some(ud), Some(ul)) => lo < self.value && self.value < ud && self.value < ul,
            _ => true,
        }
    }
}

pub fn ring_bounds(x: f64, y: f64, k: usize) -> Result<RingSumReport> {
    let table = RingTable::new(k)?;
    ring_bounds_with(&table, x, y)
}

/// [`ring_bounds`] with a reusable table.
pub fn ring_bounds_with(table: &RingTable, x: f64, y: f64) -> Result<RingSumReport> {
    let k = table.k();
    let value = table.sum(x, y)?;
    let kf = k as f64;
    let mut rep = RingSumReport {
        x,
        y,
        k,
        value,
        lower_bound: None,
        upper_bound_distance: None,
        upper_bound_log: None,
        diagonal_asymptote: None,
        diagonal_ratio: None,
    };
    if x == y {
        let asym = 2.0 * kf * kf.ln() / (PI * x);
        rep.diagonal_asymptote = Some(asym);
        rep.diagonal_ratio = Some(value / asym);
    } else {
        let m = x.min(y);
        rep.lower_bound = Some(kf / (x + y));
        rep.upper_bound_distance = Some(kf / (x - y).abs());
        rep.upper_bound_log = Some(table.sum(m, m)?);
    }
    Ok(rep)
}
