//! Positive radial ground state of `-Δw + w = φ_w w`, `φ_w = |x|^{-1} * w²`.
//!
//! With `v = r w` the equation becomes `-v'' + v = φ v` on `(0, r_max)` with
//! `v(0) = v(r_max) = 0`. Each step solves the tridiagonal system
//! `(-D² + 1) v_new = φ(v) v` and rescales so that the discrete Nehari
//! identity `K + M = P` holds. The scale fixes the otherwise degenerate
//! amplitude and makes the iteration contract onto the ground state.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{cumulative_integral, solve3};
use crate::radial::{DecayFit, RadialGrid, RadialProfile, Tail};

/// Initial guess for the fixed-point iteration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// `exp(-r²/2)`.
    #[default]
    Gaussian,
    /// Samples of `w` at every grid node.
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once `max|v_new - v| / max|v|` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    #[serde(default)]
    pub initial_guess: InitialGuess,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-11, max_iterations: 2000, initial_guess: InitialGuess::Gaussian }
    }
}

/// Pohozaev residual above which a solve is rejected as under-resolved.
pub const MAX_POHOZAEV_RESIDUAL: f64 = 1e-2;
/// Outer-shell mass fraction above which a solve is rejected as truncated.
pub const MAX_TAIL_MASS_FRACTION: f64 = 1e-6;

/// Factorised `-D² + 1` on the interior nodes (Thomas algorithm).
struct Tridiagonal {
    off: f64,
    /// Modified super-diagonal.
    c: Vec<f64>,
    /// Inverse pivots.
    inv: Vec<f64>,
}

impl Tridiagonal {
    fn new(size: usize, h: f64) -> Self {
        let diag = 2.0 / (h * h) + 1.0;
        let off = -1.0 / (h * h);
        let mut c = vec![0.0; size];
        let mut inv = vec![0.0; size];
        let mut prev_c = 0.0;
        for i in 0..size {
            let pivot = diag - off * prev_c;
            inv[i] = 1.0 / pivot;
            c[i] = off * inv[i];
            prev_c = c[i];
        }
        Self { off, c, inv }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut prev = 0.0;
        for i in 0..n {
            rhs[i] = (rhs[i] - self.off * prev) * self.inv[i];
            prev = rhs[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] -= self.c[i] * rhs[i + 1];
        }
    }
}

/// Potential `φ` at every node from `v = r u` (`v_0 = 0`).
fn potential_from_v(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len() - 1;
    let inner: Vec<f64> = v.iter().map(|x| x * x).collect();
    let outer: Vec<f64> = v
        .iter()
        .enumerate()
        .map(|(i, x)| if i == 0 { 0.0 } else { x * x / (i as f64 * h) })
        .collect();
    let ic = cumulative_integral(&inner, h);
    let oc = cumulative_integral(&outer, h);
    (0..=n)
        .map(|i| {
            let near = if i == 0 { 0.0 } else { ic[i] / (i as f64 * h) };
            4.0 * PI * (near + oc[n] - oc[i])
        })
        .collect()
}

/// Discrete `(K, M, P)` for `v = r u` with `v_0 = v_n = 0`.
///
/// `K = 4π Σ (Δv)²/h`, `M = 4π h Σ v²`, `P = 4π h Σ φ v²`. These are the
/// quadratures for which the discrete equation implies `K + M = P` exactly.
fn discrete_functionals(v: &[f64], phi: &[f64], h: f64) -> (f64, f64, f64) {
    let mut k = 0.0;
    let mut m = 0.0;
    let mut p = 0.0;
    for i in 0..v.len() - 1 {
        let dv = v[i + 1] - v[i];
        k += dv * dv;
        m += v[i] * v[i];
        p += phi[i] * v[i] * v[i];
    }
    (4.0 * PI * k / h, 4.0 * PI * h * m, 4.0 * PI * h * p)
}

/// Solves for the positive radial ground state on `grid`.
///
/// Returns the profile `w` with a zero tail and a fitted exponential decay.
/// Rejects non-positive initial guesses, non-convergence, and grids that are
/// too short to hold the solution (outer-shell mass or Pohozaev residual above
/// [`MAX_TAIL_MASS_FRACTION`] / [`MAX_POHOZAEV_RESIDUAL`]).
pub fn solve_ground_state(grid: &RadialGrid, options: &SolverOptions) -> Result<RadialProfile> {
    let n = grid.n_points();
    let h = grid.spacing();
    let r: Vec<f64> = grid.nodes().collect();

    let guess: Vec<f64> = match &options.initial_guess {
        InitialGuess::Gaussian => r.iter().map(|r| (-0.5 * r * r).exp()).collect(),
        InitialGuess::Samples(s) => {
            if s.len() != grid.len() {
                return Err(Error::InvalidGrid(format!(
                    "initial guess has {} samples, grid has {}",
                    s.len(),
                    grid.len()
                )));
            }
            s.clone()
        }
    };
    if guess.iter().any(|g| !g.is_finite() || *g < 0.0) || !guess[1..n].iter().any(|g| *g > 0.0) {
        return Err(Error::DegenerateInput(
            "initial guess must be non-negative, finite and not identically zero".into(),
        ));
    }
    if !(options.tolerance > 0.0) {
        return Err(Error::InvalidParams("tolerance must be positive".into()));
    }

    let mut v: Vec<f64> = r.iter().zip(&guess).map(|(r, g)| r * g).collect();
    v[0] = 0.0;
    v[n] = 0.0;
    let op = Tridiagonal::new(n - 1, h);
    let mut rhs = vec![0.0; n - 1];

    let mut converged = false;
    let mut last_update = f64::INFINITY;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        nehari_rescale(&mut v, h)?;
        let phi = potential_from_v(&v, h);
        for i in 1..n {
            rhs[i - 1] = phi[i] * v[i];
        }
        op.solve(&mut rhs);
        let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut delta = 0.0_f64;
        for i in 1..n {
            delta = delta.max((rhs[i - 1] - v[i]).abs());
            v[i] = rhs[i - 1];
        }
        last_update = delta / scale;
        if !last_update.is_finite() {
            return Err(Error::NonFinite("ground-state iteration".into()));
        }
        if last_update < options.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { iterations, last_update });
    }
    nehari_rescale(&mut v, h)?;

    let mut u: Vec<f64> = v.iter().zip(&r).map(|(v, r)| if *r > 0.0 { v / r } else { 0.0 }).collect();
    // Even extrapolation to the origin, fourth order in h.
    u[0] = (4.0 * u[1] - u[2]) / 3.0;
    u[n] = 0.0;

    if u[..n].iter().any(|x| *x <= 0.0) {
        return Err(Error::Accuracy("iterate lost positivity".into()));
    }

    let mut profile = RadialProfile::new(*grid, u, Tail::Zero)?;
    let tail = profile.outer_mass_fraction(0.2);
    if tail > MAX_TAIL_MASS_FRACTION {
        return Err(Error::Accuracy(format!(
            "r_max = {} is too small: {tail:.2e} of the mass lies in the outer 20% of the grid",
            grid.r_max()
        )));
    }
    let stats = ground_state_stats(&profile)?;
    if stats.pohozaev_residual > MAX_POHOZAEV_RESIDUAL {
        return Err(Error::Accuracy(format!(
            "Pohozaev residual {:.2e} exceeds {MAX_POHOZAEV_RESIDUAL:e}",
            stats.pohozaev_residual
        )));
    }
    let fit = fit_decay(&profile, default_decay_window(grid)).ok();
    profile.set_decay(fit);
    Ok(profile)
}

fn nehari_rescale(v: &mut [f64], h: f64) -> Result<()> {
    let phi = potential_from_v(v, h);
    let (k, m, p) = discrete_functionals(v, &phi, h);
    if !(p > 0.0) {
        return Err(Error::DegenerateInput("iterate has vanishing nonlocal term".into()));
    }
    let c = ((k + m) / p).sqrt();
    for x in v.iter_mut() {
        *x *= c;
    }
    Ok(())
}

/// Energy functionals of a radial profile and its identity residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateStats {
    /// `∫|∇w|²`
    pub kinetic: f64,
    /// `∫ w²`
    pub mass: f64,
    /// `∫ φ_w w²`
    pub potential: f64,
    /// `K/2 + M/2 - P/4`
    pub energy: f64,
    /// `|K + M - P| / P`
    pub nehari_residual: f64,
    /// `|K/2 + 3M/2 - 5P/4| / P`
    pub pohozaev_residual: f64,
    /// Set for the zero profile, where the residuals are reported as 0.
    pub degenerate: bool,
}

/// Quadrature of `K`, `M`, `P`, the energy and the Nehari and Pohozaev
/// residuals for `w` (with the same discrete forms the solver enforces).
pub fn ground_state_stats(w: &RadialProfile) -> Result<GroundStateStats> {
    let h = w.spacing();
    let mut v: Vec<f64> = w.grid().nodes().zip(w.values()).map(|(r, u)| r * u).collect();
    let n = v.len() - 1;
    v[n] = 0.0;
    let phi = potential_from_v(&v, h);
    let (k, m, p) = discrete_functionals(&v, &phi, h);
    let energy = 0.5 * k + 0.5 * m - 0.25 * p;
    if p == 0.0 {
        return Ok(GroundStateStats {
            kinetic: k,
            mass: m,
            potential: p,
            energy,
            nehari_residual: 0.0,
            pohozaev_residual: 0.0,
            degenerate: true,
        });
    }
    Ok(GroundStateStats {
        kinetic: k,
        mass: m,
        potential: p,
        energy,
        nehari_residual: (k + m - p).abs() / p,
        pohozaev_residual: (0.5 * k + 1.5 * m - 1.25 * p).abs() / p,
        degenerate: false,
    })
}

/// Plateau statistics of `w(r) r e^r` on a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub window: (f64, f64),
    /// Mean of `w r e^r` over the window nodes.
    pub mean: f64,
    /// `(max - min) / mean` of `w r e^r`.
    pub relative_variation: f64,
    /// Mean of `w r^{1 - Q/2} e^r` where `Q = ∫ w²` is the charge of `φ_w`.
    pub coulomb_corrected_mean: f64,
    /// `(max - min) / mean` of the Coulomb-corrected quantity.
    pub coulomb_corrected_variation: f64,
    /// Fitted `(rate, power)` of `ln(w r) ≈ c - rate r + power ln r`.
    pub fitted_rate: f64,
    pub fitted_power: f64,
}

pub fn default_decay_window(grid: &RadialGrid) -> (f64, f64) {
    (grid.r_max() / 3.0, grid.r_max() / 2.0)
}

fn window_indices(p: &RadialProfile, window: (f64, f64)) -> Result<(usize, usize)> {
    let (a, b) = window;
    let limit = 0.7 * p.r_max();
    if !(a >= 0.0 && a < b && b <= limit) {
        return Err(Error::Range(format!(
            "decay window [{a}, {b}] must satisfy 0 <= a < b <= 0.7 r_max = {limit}"
        )));
    }
    let h = p.spacing();
    let lo = (a / h).ceil() as usize;
    let hi = (b / h).floor() as usize;
    if hi < lo + 2 {
        return Err(Error::Range("decay window holds fewer than three nodes".into()));
    }
    Ok((lo.max(1), hi))
}

fn fit_decay(p: &RadialProfile, window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window_indices(p, window)?;
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for i in lo..=hi {
        let r = p.grid().node(i);
        let y = p.values()[i];
        if y <= 0.0 {
            return Err(Error::Domain("decay fit needs a positive profile".into()));
        }
        let row = [1.0, -r, r.ln()];
        let rhs = (y * r).ln();
        for a in 0..3 {
            for b in 0..3 {
                ata[a][b] += row[a] * row[b];
            }
            atb[a] += row[a] * rhs;
        }
    }
    let [c, rate, power] = solve3(ata, atb).ok_or_else(|| Error::Singular("decay fit".into()))?;
    Ok(DecayFit { rate, amplitude: c.exp(), power, window })
}

/// Plateau check for `w(r) r e^r` on `window`
/// (requires `0 <= a < b <= 0.7 r_max`).
pub fn decay_report(w: &RadialProfile, window: (f64, f64)) -> Result<DecayReport> {
    let (lo, hi) = window_indices(w, window)?;
    let charge = crate::potential::radial_potential(w)?.charge;
    let mut plain = Vec::with_capacity(hi - lo + 1);
    let mut corrected = Vec::with_capacity(hi - lo + 1);
    for i in lo..=hi {
        let r = w.grid().node(i);
        let base = w.values()[i] * r.exp();
        plain.push(base * r);
        corrected.push(base * r.powf(1.0 - 0.5 * charge));
    }
    let stats = |x: &[f64]| {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let (mn, mx) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        (mean, (mx - mn) / mean)
    };
    let (mean, relative_variation) = stats(&plain);
    let (coulomb_corrected_mean, coulomb_corrected_variation) = stats(&corrected);
    let fit = fit_decay(w, window)?;
    Ok(DecayReport {
        window,
        mean,
        relative_variation,
        coulomb_corrected_mean,
        coulomb_corrected_variation,
        fitted_rate: fit.rate,
        fitted_power: fit.power,
    })
}

/// Relative residual `‖-Δu + λu - μ φ_u u‖ / ‖λ u‖` of the scaled scalar
/// equation, with fourth-order differences on `v = r u`.
///
/// Only interior nodes at least two cells from either end are used.
pub fn radial_equation_residual(u: &RadialProfile, lambda: f64, mu: f64) -> Result<f64> {
    let h = u.spacing();
    let v: Vec<f64> = u.grid().nodes().zip(u.values()).map(|(r, x)| r * x).collect();
    let phi = potential_from_v(&v, h);
    let n = v.len() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 2..n - 1 {
        let d2 = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / (12.0 * h * h);
        let res = -d2 + lambda * v[i] - mu * phi[i] * v[i];
        num += res * res;
        den += (lambda * v[i]) * (lambda * v[i]);
    }
    if den == 0.0 {
        return Err(Error::DegenerateInput("zero profile".into()));
    }
    Ok((num / den).sqrt())
}
