//! Constants of the reduced energy and the landscape functions built from them.
//!
//! With `C_w = M_w²`, the far-field coefficient of `∫ φ_w(x) w²(x - d e) dx ~ C_w / d`,
//! the energy of a two-ring configuration is
//!
//! ```text
//! F(r, ρ) = k [A₀ + Ã + a₁B₁ r^{-m₁} + a₂B₂ r^{-m₂} + a₃B₃ ρ^{-m₃}
//!              - D₀ k ln k / r - D₁ k ln k / ρ - π D₂ g(r, ρ, k)] + ...
//! ```
//!
//! and after `r = x (k ln k)^{1/(1-m)}`, `ρ = y (k ln k)^{1/(1-m)}` the
//! leading part becomes `(k ln k)^{-m/(1-m)} f(x, y)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::GroundStateStats;
use crate::profiles::SystemParams;
use crate::ring_kernel::{same_ring_sum, RingTable};

/// Which decay exponent of the first two potentials is the smaller one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayBranch {
    /// `m₁ < m₂`: the first potential leads.
    FirstLeads,
    /// `m₂ < m₁`: the second potential leads.
    SecondLeads,
    /// `m₁ = m₂`: both contribute at leading order.
    Equal,
}

/// All constants of the reduced problem for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedConstants {
    pub m_w: f64,
    pub k_w: f64,
    pub p_w: f64,
    /// `M_w²`.
    pub c_w: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// `(α² + γ²) P_w / 4`, energy of one synchronized bump.
    pub a0: f64,
    /// `λ^{3/2} P_w / (4 μ₃)`, energy of one scaled bump.
    pub a_tilde: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    /// `m = min(m₁, m₂) = m₃`.
    pub m: f64,
    pub branch: DecayBranch,
    /// Coefficient of `x^{-m}` in `f₁`: `a₁B₁`, `a₂B₂` or their sum.
    pub lead_coefficient: f64,
    /// Coefficient of `y^{-m}` in `f₂`: `a₃B₃`.
    pub outer_coefficient: f64,
    pub lambda_ratio: f64,
    /// Maximizer of `f₁`; `None` unless `lead_coefficient > 0`.
    pub d1_star: Option<f64>,
    /// Maximizer of `f₂`; `None` unless `a₃ > 0`.
    pub d2_star: Option<f64>,
    pub f1_at_d1: Option<f64>,
    pub f2_at_d2: Option<f64>,
    /// `false` when the a-coefficient signs rule out the construction.
    pub valid_for_theorem: bool,
    pub notes: Vec<String>,
}

/// Builds every reduced constant from the parameters and ground-state functionals.
pub fn compute_constants(params: &SystemParams, gs: &GroundStateStats) -> Result<ReducedConstants> {
    params.validate()?;
    if gs.degenerate || !(gs.mass > 0.0) {
        return Err(Error::DegenerateInput("ground-state statistics are degenerate".into()));
    }
    let sync = params.sync()?;
    let (alpha, gamma) = (sync.alpha, sync.gamma);
    let (a2, g2) = (alpha * alpha, gamma * gamma);
    let [mu1, mu2, mu3] = params.mu;
    let lambda = params.lambda;
    let m_w = gs.mass;
    let c_w = m_w * m_w;

    let a0 = 0.25 * (a2 + g2) * gs.potential;
    let a_tilde = lambda.powf(1.5) * gs.potential / (4.0 * mu3);
    let b1 = 0.5 * a2 * m_w;
    let b2 = 0.5 * g2 * m_w;
    let b3 = 0.5 * lambda.sqrt() / mu3 * m_w;
    let d0 = 0.25 * (mu1 * a2 * a2 + mu2 * g2 * g2 + 2.0 * params.beta12 * a2 * g2) * c_w / PI;
    let d1 = 0.25 * (lambda / mu3) * c_w / PI;
    let d2 = 0.5 * (params.beta13 * a2 + params.beta23 * g2) * (lambda.sqrt() / mu3) * c_w / PI;

    let [p1, p2, p3] = params.potentials;
    let (m1, m2) = (p1.effective_m(), p2.effective_m());
    let (a1c, a2c, a3c) = (p1.effective_a(), p2.effective_a(), p3.effective_a());
    let branch = if m1 < m2 {
        DecayBranch::FirstLeads
    } else if m2 < m1 {
        DecayBranch::SecondLeads
    } else {
        DecayBranch::Equal
    };
    let m = m1.min(m2);
    let (lead, lead_weight) = match branch {
        DecayBranch::FirstLeads => (a1c * b1, a1c * a2),
        DecayBranch::SecondLeads => (a2c * b2, a2c * g2),
        DecayBranch::Equal => (a1c * b1 + a2c * b2, a1c * a2 + a2c * g2),
    };
    let outer = a3c * b3;
    let lambda_ratio = a3c * (a2 + g2) / (lead_weight * lambda.sqrt());

    let mut notes = Vec::new();
    let mut valid = true;
    if !(lead > 0.0) {
        valid = false;
        notes.push(format!("leading potential coefficient {lead} is not positive"));
    }
    if !(a3c > 0.0) {
        valid = false;
        notes.push(format!("a₃ = {a3c} is not positive"));
    }
    let exponent = 1.0 / (1.0 - m);
    let d1_star = (lead > 0.0).then(|| (d0 / (lead * m)).powf(exponent));
    let d2_star = (outer > 0.0).then(|| (d1 / (outer * m)).powf(exponent));
    let closed_form = |coef: f64, d: f64| (1.0 - m) * coef.powf(exponent) * (m / d).powf(m * exponent);
    let f1_at_d1 = d1_star.map(|_| closed_form(lead, d0));
    let f2_at_d2 = d2_star.map(|_| closed_form(outer, d1));

    Ok(ReducedConstants {
        m_w,
        k_w: gs.kinetic,
        p_w: gs.potential,
        c_w,
        alpha,
        gamma,
        a0,
        a_tilde,
        b1,
        b2,
        b3,
        d0,
        d1,
        d2,
        m,
        branch,
        lead_coefficient: lead,
        outer_coefficient: outer,
        lambda_ratio,
        d1_star,
        d2_star,
        f1_at_d1,
        f2_at_d2,
        valid_for_theorem: valid,
        notes,
    })
}

impl ReducedConstants {
    /// `f₁(x) = (leading a B) x^{-m} - D₀ / x`.
    pub fn f1(&self, x: f64) -> f64 {
        self.lead_coefficient * x.powf(-self.m) - self.d0 / x
    }

    /// `f₂(y) = a₃B₃ y^{-m} - D₁ / y`.
    pub fn f2(&self, y: f64) -> f64 {
        self.outer_coefficient * y.powf(-self.m) - self.d1 / y
    }

    /// Copy with every landscape coefficient `(aB, D₀, D₁, D₂)` multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        let mut c = self.clone();
        c.lead_coefficient *= t;
        c.outer_coefficient *= t;
        c.d0 *= t;
        c.d1 *= t;
        c.d2 *= t;
        c
    }

    /// `(k ln k)^{1/(1-m)}`, the factor between `(x, y)` and `(r, ρ)`.
    pub fn radius_scale(&self, k: usize) -> f64 {
        let kf = k as f64;
        (kf * kf.ln()).powf(1.0 / (1.0 - self.m))
    }
}

fn check_xy(x: f64, y: f64, k: usize) -> Result<()> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("landscape needs x, y > 0, got ({x}, {y})")));
    }
    if k < 2 {
        return Err(Error::Domain(format!("landscape needs k >= 2, got {k}")));
    }
    Ok(())
}

/// `f(x, y) = f₁(x) + f₂(y) - π D₂ g(x, y, k) / (k ln k)`.
pub fn f_xy(x: f64, y: f64, k: usize, consts: &ReducedConstants) -> Result<f64> {
    check_xy(x, y, k)?;
    let table = RingTable::new(k)?;
    f_xy_with(&table, x, y, consts)
}

/// [`f_xy`] with a prebuilt ring table (the hot path of the optimizer).
pub fn f_xy_with(table: &RingTable, x: f64, y: f64, consts: &ReducedConstants) -> Result<f64> {
    let k = table.k();
    check_xy(x, y, k)?;
    let kf = k as f64;
    let cross = if consts.d2 == 0.0 { 0.0 } else { PI * consts.d2 * table.sum(x, y)? / (kf * kf.ln()) };
    Ok(consts.f1(x) + consts.f2(y) - cross)
}

/// `F̂(x, y) = k [A₀ + Ã + (k ln k)^{-m/(1-m)} f(x, y)]` (higher-order corrections omitted).
pub fn f_hat(x: f64, y: f64, k: usize, consts: &ReducedConstants) -> Result<f64> {
    let f = f_xy(x, y, k, consts)?;
    let kf = k as f64;
    Ok(kf * (consts.a0 + consts.a_tilde + (kf * kf.ln()).powf(-consts.m / (1.0 - consts.m)) * f))
}

/// How same-ring interactions enter [`asymptotic_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingSumMode {
    /// `Σ_{j≠1} 1/|x¹ - x^j| ≈ k ln k / (π r)`, as in the reduced energy.
    Asymptotic,
    /// The exact finite-k sum `same_ring_sum(k) / r`.
    Exact,
}

/// Far-field energy expansion of a configuration with ring radii `(r, ρ)`,
/// with every potential term `a_i B_i r^{-m_i}` kept.
///
/// With [`RingSumMode::Asymptotic`] this is the reduced energy `F(r, ρ)`.
pub fn asymptotic_energy(
    r: f64,
    rho: f64,
    k: usize,
    consts: &ReducedConstants,
    params: &SystemParams,
    mode: RingSumMode,
) -> Result<f64> {
    if !(r > 0.0 && rho > 0.0) {
        return Err(Error::Domain(format!("radii must be positive, got ({r}, {rho})")));
    }
    if k < 1 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let kf = k as f64;
    let ring = match mode {
        RingSumMode::Asymptotic => kf * kf.ln() / PI,
        RingSumMode::Exact => same_ring_sum(k),
    };
    let [p1, p2, p3] = params.potentials;
    let pot = |a: f64, m: f64, b: f64, s: f64| if a == 0.0 { 0.0 } else { a * b * s.powf(-m) };
    let potentials = pot(p1.effective_a(), p1.effective_m(), consts.b1, r)
        + pot(p2.effective_a(), p2.effective_m(), consts.b2, r)
        + pot(p3.effective_a(), p3.effective_m(), consts.b3, rho);
    // D₀ k ln k / r = (1/4)(α²+γ²) C_w / π · (k ln k) / r; the ring factor
    // replaces (k ln k)/π by the chosen sum.
    let same_ring = PI * (consts.d0 / r + consts.d1 / rho) * ring;
    let cross = if consts.d2 == 0.0 { 0.0 } else { PI * consts.d2 * RingTable::new(k)?.sum(r, rho)? };
    Ok(kf * (consts.a0 + consts.a_tilde + potentials - same_ring - cross))
}
