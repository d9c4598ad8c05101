//! Uniform radial grids and sampled radial profiles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{cubic_weights, trapezoid};

/// Uniform grid `r_i = i h`, `i = 0..=n_points`, with `h = r_max / n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_max: f64,
    n_points: usize,
}

impl RadialGrid {
    /// Smallest number of intervals accepted by [`RadialGrid::new`].
    pub const MIN_POINTS: usize = 100;

    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!("r_max must be positive and finite, got {r_max}")));
        }
        if n_points < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} intervals, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { r_max, n_points })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of intervals.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Number of stored nodes (`n_points + 1`).
    pub fn len(&self) -> usize {
        self.n_points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.n_points as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.spacing();
        (0..self.len()).map(move |i| i as f64 * h)
    }

    /// Same extent, twice the resolution.
    pub fn refined(&self) -> Self {
        Self { r_max: self.r_max, n_points: 2 * self.n_points }
    }
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self { r_max: 30.0, n_points: 3000 }
    }
}

/// How a profile continues beyond the last grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// The profile vanishes identically past `r_max`.
    Zero,
    /// The profile equals `charge / r` past `r_max` (Newtonian far field).
    Coulomb { charge: f64 },
}

/// Least-squares fit `ln(u r) ≈ ln(amplitude) - rate r + power ln r` on a
/// window of the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    pub power: f64,
    pub window: (f64, f64),
}

/// Radial function sampled on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
    tail: Tail,
    decay: Option<DecayFit>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>, tail: Tail) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("radial profile samples".into()));
        }
        if let Tail::Coulomb { charge } = tail {
            if !charge.is_finite() {
                return Err(Error::NonFinite("Coulomb tail charge".into()));
            }
        }
        Ok(Self { grid, values, tail, decay: None })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: RadialGrid, tail: Tail, f: F) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values, tail)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn decay(&self) -> Option<&DecayFit> {
        self.decay.as_ref()
    }

    pub(crate) fn set_decay(&mut self, fit: Option<DecayFit>) {
        self.decay = fit;
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn r_max(&self) -> f64 {
        self.grid.r_max()
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// Pointwise map on the same grid; the decay fit is dropped.
    pub fn map<F: Fn(f64, f64) -> f64>(&self, tail: Tail, f: F) -> Result<Self> {
        let values = self.grid.nodes().zip(&self.values).map(|(r, &v)| f(r, v)).collect();
        Self::new(self.grid, values, tail)
    }

    /// Pointwise product of two profiles on the same grid.
    pub fn product(&self, other: &Self, tail: Tail) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("product of profiles on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::new(self.grid, values, tail)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Value at radius `r` (the profile is extended evenly to `r < 0`).
    ///
    /// Inside the grid this is cubic Lagrange interpolation, which returns
    /// stored samples exactly at nodes; outside it follows the [`Tail`].
    pub fn value_at(&self, r: f64) -> f64 {
        let r = r.abs();
        let h = self.grid.spacing();
        let n = self.grid.n_points;
        let mut x = r / h;
        // Points that are nodes up to rounding of `i h / h` snap onto them.
        let nearest = x.round();
        if (x - nearest).abs() < 1e-9 {
            x = nearest;
        }
        if x > n as f64 {
            return match self.tail {
                Tail::Zero => 0.0,
                Tail::Coulomb { charge } => charge / r,
            };
        }
        let mut i0 = x.floor() as usize;
        if i0 >= n {
            i0 = n - 1;
        }
        let mut t = x - i0 as f64;
        // Keep the four-point stencil inside the grid at the outer end.
        let mut base = i0 as isize - 1;
        if i0 + 2 > n {
            let shift = (i0 + 2 - n) as isize;
            base -= shift;
            t += shift as f64;
        }
        let w = if t == 0.0 { [0.0, 1.0, 0.0, 0.0] } else { cubic_weights(t) };
        let mut acc = 0.0;
        for (k, wk) in w.iter().enumerate() {
            if *wk == 0.0 {
                continue;
            }
            // Even reflection through the origin.
            let idx = (base + k as isize).unsigned_abs();
            acc += wk * self.values[idx];
        }
        acc
    }

    /// `4π ∫_0^{r_max} f(r) r² dr` over the stored samples.
    pub fn volume_integral(&self) -> f64 {
        let h = self.grid.spacing();
        let f: Vec<f64> = self.grid.nodes().zip(&self.values).map(|(r, v)| v * r * r).collect();
        4.0 * PI * trapezoid(&f, h)
    }

    /// `4π ∫ f² r² dr`, i.e. the squared L² norm in three dimensions.
    pub fn norm_squared(&self) -> f64 {
        let h = self.grid.spacing();
        let f: Vec<f64> = self.grid.nodes().zip(&self.values).map(|(r, v)| v * v * r * r).collect();
        4.0 * PI * trapezoid(&f, h)
    }

    /// Fraction of `∫ f² r² dr` carried by the outer `fraction` of the grid.
    pub fn outer_mass_fraction(&self, fraction: f64) -> f64 {
        let h = self.grid.spacing();
        let start = ((1.0 - fraction) * self.grid.n_points as f64).floor() as usize;
        let f: Vec<f64> = self.grid.nodes().zip(&self.values).map(|(r, v)| v * v * r * r).collect();
        let total = trapezoid(&f, h);
        if total == 0.0 {
            return 0.0;
        }
        trapezoid(&f[start..], h) / total
    }

    /// Resamples onto `grid`, evaluating through [`RadialProfile::value_at`].
    pub fn resample(&self, grid: RadialGrid) -> Result<Self> {
        let values = grid.nodes().map(|r| self.value_at(r)).collect();
        Self::new(grid, values, self.tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> RadialProfile {
        RadialProfile::from_fn(RadialGrid::new(10.0, 1000).unwrap(), Tail::Zero, |r| (-r * r).exp())
            .unwrap()
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(RadialGrid::new(0.0, 1000).is_err());
        assert!(RadialGrid::new(f64::NAN, 1000).is_err());
        assert!(RadialGrid::new(10.0, 10).is_err());
        let g = RadialGrid::default();
        assert_eq!(g.len(), 3001);
        assert!((g.spacing() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_accurate_between() {
        let p = gaussian();
        for i in [0usize, 1, 17, 500, 999, 1000] {
            let r = p.grid().node(i);
            assert_eq!(p.value_at(r), p.values()[i]);
        }
        for r in [0.0037, 0.5123, 1.2345, 3.3333, 9.9951] {
            assert!((p.value_at(r) - (-r * r).exp()).abs() < 1e-8, "r = {r}");
        }
        assert_eq!(p.value_at(10.5), 0.0);
        assert_eq!(p.value_at(-0.3), p.value_at(0.3));
    }

    #[test]
    fn coulomb_tail_extends_as_charge_over_r() {
        let p = gaussian().with_tail(Tail::Coulomb { charge: 2.0 });
        assert_eq!(p.value_at(20.0), 0.1);
    }

    #[test]
    fn gaussian_moments() {
        // 4π ∫ e^{-r²} r² dr = π^{3/2}; 4π ∫ e^{-2r²} r² dr = (π/2)^{3/2}.
        let p = gaussian();
        assert!((p.volume_integral() - PI.powf(1.5)).abs() < 1e-10);
        assert!((p.norm_squared() - (PI / 2.0).powf(1.5)).abs() < 1e-10);
        assert!(p.outer_mass_fraction(0.2) < 1e-20);
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = RadialGrid::new(1.0, 100).unwrap();
        assert!(RadialProfile::new(g, vec![0.0; 5], Tail::Zero).is_err());
        let mut v = vec![0.0; 101];
        v[3] = f64::NAN;
        assert!(RadialProfile::new(g, v, Tail::Zero).is_err());
    }
}
