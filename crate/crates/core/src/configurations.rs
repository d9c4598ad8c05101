//! Two concentric rings of `k` peaks in the `x_3 = 0` plane.
//!
//! Components 1 and 2 sit on the inner ring `x^j = r (cos 2(j-1)π/k, sin 2(j-1)π/k, 0)`,
//! component 3 on the staggered ring `y^j = ρ (cos (2j-1)π/k, sin (2j-1)π/k, 0)`.
//! Peak `j` carries the sign `+1` (positive pattern) or `(-1)^j` (alternating).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field3D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPattern {
    Positive,
    Alternating,
}

impl SignPattern {
    /// Sign of peak `j` (1-based).
    pub fn sign(&self, j: usize) -> f64 {
        match self {
            SignPattern::Positive => 1.0,
            SignPattern::Alternating => {
                if j % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Factor picked up under rotation by `2π/k`.
    pub fn rotation_sign(&self) -> f64 {
        match self {
            SignPattern::Positive => 1.0,
            SignPattern::Alternating => -1.0,
        }
    }
}

/// Sign variant of the three components: the first two letters are the
/// pattern of components 1 and 2, the last that of component 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "PPP")]
    Ppp,
    #[serde(rename = "AAA")]
    Aaa,
    #[serde(rename = "PPA")]
    Ppa,
    #[serde(rename = "AAP")]
    Aap,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Ppp, Variant::Aaa, Variant::Ppa, Variant::Aap];

    pub fn inner(&self) -> SignPattern {
        match self {
            Variant::Ppp | Variant::Ppa => SignPattern::Positive,
            Variant::Aaa | Variant::Aap => SignPattern::Alternating,
        }
    }

    pub fn outer(&self) -> SignPattern {
        match self {
            Variant::Ppp | Variant::Aap => SignPattern::Positive,
            Variant::Aaa | Variant::Ppa => SignPattern::Alternating,
        }
    }

    pub fn needs_even_k(&self) -> bool {
        !matches!(self, Variant::Ppp)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Ppp => "PPP",
            Variant::Aaa => "AAA",
            Variant::Ppa => "PPA",
            Variant::Aap => "AAP",
        };
        f.write_str(s)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PPP" => Ok(Variant::Ppp),
            "AAA" => Ok(Variant::Aaa),
            "PPA" => Ok(Variant::Ppa),
            "AAP" => Ok(Variant::Aap),
            other => Err(Error::Parse(format!("unknown variant {other:?} (expected PPP, AAA, PPA or AAP)"))),
        }
    }
}

/// Which of the two rings a field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ring {
    Inner,
    Outer,
}

/// Serialized form of a [`PeakConfig`]; centres are regenerated on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PeakConfigSpec {
    k: usize,
    r: f64,
    rho: f64,
    variant: Variant,
}

/// Ring geometry with per-peak centres and signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PeakConfigSpec", into = "PeakConfigSpec")]
pub struct PeakConfig {
    k: usize,
    r: f64,
    rho: f64,
    variant: Variant,
    inner_centers: Vec<[f64; 3]>,
    outer_centers: Vec<[f64; 3]>,
    inner_signs: Vec<f64>,
    outer_signs: Vec<f64>,
}

impl TryFrom<PeakConfigSpec> for PeakConfig {
    type Error = Error;

    fn try_from(s: PeakConfigSpec) -> Result<Self> {
        PeakConfig::new(s.k, s.r, s.rho, s.variant)
    }
}

impl From<PeakConfig> for PeakConfigSpec {
    fn from(c: PeakConfig) -> Self {
        PeakConfigSpec { k: c.k, r: c.r, rho: c.rho, variant: c.variant }
    }
}

/// Angle of inner peak `j` (1-based).
pub fn inner_angle(j: usize, k: usize) -> f64 {
    2.0 * (j as f64 - 1.0) * PI / k as f64
}

/// Angle of outer peak `j` (1-based).
pub fn outer_angle(j: usize, k: usize) -> f64 {
    (2.0 * j as f64 - 1.0) * PI / k as f64
}

impl PeakConfig {
    pub fn new(k: usize, r: f64, rho: f64, variant: Variant) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if variant.needs_even_k() && k % 2 == 1 {
            return Err(Error::Parity(format!("variant {variant} alternates signs and needs even k, got {k}")));
        }
        if !(r.is_finite() && r > 0.0 && rho.is_finite() && rho > 0.0) {
            return Err(Error::Domain(format!("ring radii must be positive and finite, got r = {r}, ρ = {rho}")));
        }
        let ring = |radius: f64, angle: &dyn Fn(usize) -> f64| -> Vec<[f64; 3]> {
            (1..=k)
                .map(|j| {
                    let a = angle(j);
                    [radius * a.cos(), radius * a.sin(), 0.0]
                })
                .collect()
        };
        let inner_centers = ring(r, &|j| inner_angle(j, k));
        let outer_centers = ring(rho, &|j| outer_angle(j, k));
        let inner_signs = (1..=k).map(|j| variant.inner().sign(j)).collect();
        let outer_signs = (1..=k).map(|j| variant.outer().sign(j)).collect();
        Ok(Self { k, r, rho, variant, inner_centers, outer_centers, inner_signs, outer_signs })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn inner_centers(&self) -> &[[f64; 3]] {
        &self.inner_centers
    }

    pub fn outer_centers(&self) -> &[[f64; 3]] {
        &self.outer_centers
    }

    pub fn inner_signs(&self) -> &[f64] {
        &self.inner_signs
    }

    pub fn outer_signs(&self) -> &[f64] {
        &self.outer_signs
    }

    /// Distance between neighbouring peaks of the inner ring.
    pub fn inner_spacing(&self) -> f64 {
        2.0 * self.r * (PI / self.k as f64).sin()
    }

    /// Smallest distance between an inner and an outer peak.
    pub fn mixed_spacing(&self) -> f64 {
        let a = PI / self.k as f64;
        ((self.r - self.rho).powi(2) + 4.0 * self.r * self.rho * (0.5 * a).sin().powi(2)).sqrt()
    }
}

/// `[C_1 (k ln k)^{1/(1-m)}, C_2 (k ln k)^{1/(1-m)}]`, the admissible band of ring radii.
pub fn s_k_window(k: f64, m: f64, c1: f64, c2: f64) -> Result<(f64, f64)> {
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::Domain(format!("k must exceed 1 so that k ln k > 0, got {k}")));
    }
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::Domain(format!("the window needs 0 < m < 1, got {m}")));
    }
    if !(c1 > 0.0 && c1 <= c2 && c2.is_finite()) {
        return Err(Error::Domain(format!("window constants need 0 < C_1 <= C_2, got {c1}, {c2}")));
    }
    let s = (k * k.ln()).powf(1.0 / (1.0 - m));
    Ok((c1 * s, c2 * s))
}

/// Expected symmetry signs for a ring with the given pattern.
///
/// Rotation by `2π/k` multiplies by the pattern's rotation sign. Under
/// `x_2 -> -x_2` the inner ring maps onto itself with the same signs; the
/// staggered outer ring maps peak `j` to peak `k + 1 - j`, which for the
/// alternating pattern flips every sign, so that field is odd in `x_2`.
pub fn expected_signs(pattern: SignPattern, ring: Ring) -> (f64, f64) {
    let x2 = match (ring, pattern) {
        (Ring::Outer, SignPattern::Alternating) => -1.0,
        _ => 1.0,
    };
    (pattern.rotation_sign(), x2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `max |u(R x) - s_R u(x)|` for the rotation `R` by `2π/k` about the `x_3` axis.
    pub rotation: f64,
    /// `max |u(x_1, -x_2, x_3) - s_2 u(x)|`.
    pub parity_x2: f64,
    /// `max |u(x_1, x_2, -x_3) - u(x)|`.
    pub parity_x3: f64,
    /// `max |u|` for normalisation.
    pub field_max: f64,
}

impl SymmetryReport {
    pub fn max(&self) -> f64 {
        self.rotation.max(self.parity_x2).max(self.parity_x3)
    }

    pub fn relative(&self) -> f64 {
        if self.field_max == 0.0 {
            0.0
        } else {
            self.max() / self.field_max
        }
    }
}

/// Largest symmetry defects of `field` over all nodes whose image stays in the box.
///
/// Images are evaluated by trilinear interpolation, which is exact when the
/// symmetry maps the grid onto itself (`k = 1, 2, 4` on a box centred at the origin).
pub fn symmetry_deviation(field: &Field3D, k: usize, pattern: SignPattern, ring: Ring) -> Result<SymmetryReport> {
    if k < 1 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    let (s_rot, s_x2) = expected_signs(pattern, ring);
    let (sin, cos) = (2.0 * PI / k as f64).sin_cos();
    let n = field.n();
    let mut rotation = 0.0_f64;
    let mut parity_x2 = 0.0_f64;
    let mut parity_x3 = 0.0_f64;
    for kk in 0..n {
        for j in 0..n {
            for i in 0..n {
                let x = field.node(i, j, kk);
                let u = field.data()[field.index(i, j, kk)];
                let rx = [cos * x[0] - sin * x[1], sin * x[0] + cos * x[1], x[2]];
                if let Some(v) = field.value_at(rx) {
                    rotation = rotation.max((v - s_rot * u).abs());
                }
                if let Some(v) = field.value_at([x[0], -x[1], x[2]]) {
                    parity_x2 = parity_x2.max((v - s_x2 * u).abs());
                }
                if let Some(v) = field.value_at([x[0], x[1], -x[2]]) {
                    parity_x3 = parity_x3.max((v - u).abs());
                }
            }
        }
    }
    Ok(SymmetryReport { rotation, parity_x2, parity_x3, field_max: field.max_abs() })
}
