//! System parameters, the synchronized bump pair and the scaled bump.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{RadialGrid, RadialProfile, Tail};

/// Trapping potential `V(r) = λ_i + a / (1 + r²)^{m/2}`.
///
/// Its large-`r` expansion is `λ_i + a r^{-m} + O(r^{-m-θ})` with `θ = 2`.
/// A component marked `constant` has `a = 0` and is treated as having an
/// infinitely fast decay exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    /// Limit of the potential at infinity.
    pub limit: f64,
    pub a: f64,
    pub m: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub constant: bool,
}

fn default_theta() -> f64 {
    2.0
}

impl PotentialSpec {
    pub fn decaying(limit: f64, a: f64, m: f64) -> Self {
        Self { limit, a, m, theta: 2.0, constant: false }
    }

    pub fn constant(limit: f64) -> Self {
        Self { limit, a: 0.0, m: f64::INFINITY, theta: 2.0, constant: true }
    }

    /// Decay exponent seen by the reduced model (`∞` for a constant potential).
    pub fn effective_m(&self) -> f64 {
        if self.constant {
            f64::INFINITY
        } else {
            self.m
        }
    }

    /// Effective coefficient of `r^{-m}` (zero for a constant potential).
    pub fn effective_a(&self) -> f64 {
        if self.constant {
            0.0
        } else {
            self.a
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.limit + self.excess(r)
    }

    /// `V(r) - limit`.
    pub fn excess(&self, r: f64) -> f64 {
        if self.constant || self.a == 0.0 {
            return 0.0;
        }
        self.a * (1.0 + r * r).powf(-0.5 * self.m)
    }

    /// Infimum of `V` over `r >= 0`.
    pub fn infimum(&self) -> f64 {
        if self.constant || self.a >= 0.0 {
            self.limit
        } else {
            self.limit + self.a
        }
    }
}

/// Parameters `(μ_1, μ_2, μ_3, β_12, β_13, β_23, λ, V_1, V_2, V_3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub mu: [f64; 3],
    pub beta12: f64,
    pub beta13: f64,
    pub beta23: f64,
    pub lambda: f64,
    pub potentials: [PotentialSpec; 3],
}

impl SystemParams {
    /// Checks the structural assumptions: `μ_3 > 0`, `λ > 0`, the limits
    /// `(1, 1, λ)`, positive infima, `θ > 0`, and the decay-rate rule
    /// `min(m_1, m_2) = m_3 = m ∈ [1/2, 1)`.
    pub fn validate(&self) -> Result<()> {
        let all = self.mu.iter().chain([&self.beta12, &self.beta13, &self.beta23, &self.lambda]);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("coefficients must be finite".into()));
        }
        if !(self.mu[2] > 0.0) {
            return Err(Error::InvalidParams(format!("μ_3 must be positive, got {}", self.mu[2])));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!("λ must be positive, got {}", self.lambda)));
        }
        let limits = [1.0, 1.0, self.lambda];
        for (i, (p, want)) in self.potentials.iter().zip(limits).enumerate() {
            if (p.limit - want).abs() > 1e-12 * want {
                return Err(Error::InvalidParams(format!(
                    "V_{} must tend to {want}, got {}",
                    i + 1,
                    p.limit
                )));
            }
            if !(p.theta > 0.0) {
                return Err(Error::InvalidParams(format!("θ_{} must be positive", i + 1)));
            }
            if p.constant {
                if p.a != 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "V_{} is marked constant but has a = {}",
                        i + 1,
                        p.a
                    )));
                }
            } else if !(p.m.is_finite() && p.m > 0.0 && p.a.is_finite()) {
                return Err(Error::InvalidParams(format!("V_{} needs finite a and m > 0", i + 1)));
            }
            if !(p.infimum() > 0.0) {
                return Err(Error::InvalidParams(format!("inf V_{} must be positive", i + 1)));
            }
        }
        // Constant components carry an infinite exponent and drop out of the rule.
        let m = self.m();
        let m3 = self.potentials[2].effective_m();
        for (name, v) in [("min(m_1, m_2)", m), ("m_3", m3)] {
            if v.is_finite() && !(0.5..1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{name} = {v} must lie in [1/2, 1)")));
            }
        }
        if m.is_finite() && m3.is_finite() && (m - m3).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("min(m_1, m_2) = {m} must equal m_3 = {m3}")));
        }
        Ok(())
    }

    /// `m = min(m_1, m_2)`.
    pub fn m(&self) -> f64 {
        self.potentials[0].effective_m().min(self.potentials[1].effective_m())
    }

    pub fn sync(&self) -> Result<SyncCoefficients> {
        sync_coefficients(self.mu[0], self.mu[1], self.beta12)
    }

    /// Coupling matrix entry `β_ij` (`μ_i` on the diagonal).
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (a, b) if a == b => self.mu[a],
            (0, 1) => self.beta12,
            (0, 2) => self.beta13,
            _ => self.beta23,
        }
    }
}

/// `(α, γ) > 0` with `μ_1 α² + β γ² = 1` and `β α² + μ_2 γ² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncCoefficients {
    pub alpha: f64,
    pub gamma: f64,
}

impl SyncCoefficients {
    pub fn alpha2_plus_gamma2(&self) -> f64 {
        self.alpha * self.alpha + self.gamma * self.gamma
    }
}

/// Solves the 2x2 synchronization system. Fails when it is singular or when
/// `α²` or `γ²` comes out non-positive.
pub fn sync_coefficients(mu1: f64, mu2: f64, beta12: f64) -> Result<SyncCoefficients> {
    let det = mu1 * mu2 - beta12 * beta12;
    let scale = (mu1 * mu2).abs().max(beta12 * beta12).max(f64::MIN_POSITIVE);
    if det.abs() <= 1e-12 * scale {
        return Err(Error::Singular(format!("μ_1 μ_2 - β_12² = {det:e}")));
    }
    let a2 = (mu2 - beta12) / det;
    let g2 = (mu1 - beta12) / det;
    if !(a2 > 0.0 && g2 > 0.0) {
        return Err(Error::OutsideRegime(format!("α² = {a2}, γ² = {g2} must both be positive")));
    }
    Ok(SyncCoefficients { alpha: a2.sqrt(), gamma: g2.sqrt() })
}

/// Branch of the admissible `(μ_1, μ_2, β_12)` region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainBranch {
    /// `μ_1, μ_2 > 0` and `β_12 ∈ (-√(μ_1 μ_2), 0) ∪ (0, min μ) ∪ (max μ, ∞)`.
    I,
    /// `μ_1, μ_2 < 0` and `β_12 > √(μ_1 μ_2)`.
    II,
    /// `μ_1 μ_2 <= 0` and `β_12 > max(μ_1, μ_2)`.
    III,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainVerdict {
    pub member: bool,
    pub branch: Option<DomainBranch>,
    /// Known limitation attached to an accepted point.
    pub caveat: Option<String>,
}

/// Membership of `(μ_1, μ_2, β_12)` in the region where the synchronized
/// pair exists and is non-degenerate.
///
/// Branch `I` with `β_12 < 0` excludes a sequence of couplings accumulating
/// at `-√(μ_1 μ_2)` that is not known explicitly; such points are accepted
/// with a caveat.
pub fn domain_membership(mu1: f64, mu2: f64, beta12: f64) -> DomainVerdict {
    let (lo, hi) = (mu1.min(mu2), mu1.max(mu2));
    let branch = if mu1 > 0.0 && mu2 > 0.0 {
        let negative = beta12 < 0.0 && beta12 > -(mu1 * mu2).sqrt();
        let weak = beta12 > 0.0 && beta12 < lo;
        (negative || weak || beta12 > hi).then_some(DomainBranch::I)
    } else if mu1 < 0.0 && mu2 < 0.0 {
        (beta12 > (mu1 * mu2).sqrt()).then_some(DomainBranch::II)
    } else if mu1 * mu2 <= 0.0 {
        (beta12 > hi).then_some(DomainBranch::III)
    } else {
        None
    };
    let caveat = (branch == Some(DomainBranch::I) && beta12 < 0.0).then(|| {
        "β_12 < 0: a non-explicit decreasing sequence of couplings tending to -√(μ_1 μ_2) is excluded; \
         membership is not checked against it"
            .to_string()
    });
    DomainVerdict { member: branch.is_some(), branch, caveat }
}

/// Largest `|p(r_max)| / max|p|` for which resampling past the grid treats
/// the profile as zero.
const NEGLIGIBLE_EDGE: f64 = 1e-8;

/// `W(x) = (λ / √μ_3) w(√λ x)`, the positive solution of
/// `-ΔW + λW = μ_3 φ_W W`, resampled onto the grid of `w`.
pub fn scaled_bump(w: &RadialProfile, lambda: f64, mu3: f64) -> Result<RadialProfile> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!("λ must be positive, got {lambda}")));
    }
    if !(mu3 > 0.0 && mu3.is_finite()) {
        return Err(Error::InvalidParams(format!("μ_3 must be positive, got {mu3}")));
    }
    let s = lambda.sqrt();
    let amp = lambda / mu3.sqrt();
    let grid: RadialGrid = *w.grid();
    let needs_extension = s * grid.r_max() > grid.r_max() * (1.0 + 1e-14);
    let edge = w.values()[grid.n_points()].abs();
    if needs_extension && edge > NEGLIGIBLE_EDGE * w.max_abs() {
        return Err(Error::Range(format!(
            "resampling at √λ r_max = {} needs w beyond its grid, where it is not negligible",
            s * grid.r_max()
        )));
    }
    let values = grid.nodes().map(|r| amp * w.value_at(s * r)).collect();
    RadialProfile::new(grid, values, Tail::Zero)
}
