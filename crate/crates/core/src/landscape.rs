//! Hypothesis checks, the interior maximizer of the landscape `f`, peak
//! radii, and dense scans.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::configurations::s_k_window;
use crate::error::{Error, Result};
use crate::nelder_mead::{minimize, Options};
use crate::profiles::SystemParams;
use crate::reduced::{f_xy_with, DecayBranch, ReducedConstants};
use crate::ring_kernel::RingTable;

/// Relative distance of `Λ` from 1 below which `Λ = 1` is assumed.
pub const LAMBDA_ONE_TOLERANCE: f64 = 1e-9;
/// Relative distance of `Λ` from 1 below which both neighbouring cases are reported.
pub const LAMBDA_DUAL_BAND: f64 = 1e-6;
/// Largest central-difference gradient accepted for a stationary point.
pub const GRADIENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremCase {
    /// `Λ ≠ 1`: the two rings have distinct preferred radii.
    Case1,
    /// `Λ = 1` with the cross coefficient inside the admissible interval.
    Case2,
    /// `Λ = 1` with an attractive cross term that does not overwhelm the rings.
    Case3,
    None,
}

impl fmt::Display for TheoremCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TheoremCase::Case1 => "case1",
            TheoremCase::Case2 => "case2",
            TheoremCase::Case3 => "case3",
            TheoremCase::None => "none",
        })
    }
}

/// One checked inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub statement: String,
    pub holds: bool,
    /// Signed slack (positive when the inequality holds).
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub theorem_case: TheoremCase,
    /// Neighbouring case that also applies or sits within the `Λ` dual band.
    pub alternative: Option<TheoremCase>,
    pub reasons: Vec<Condition>,
    /// Set when a positive `β₁₃` or `β₂₃` makes the result depend on the
    /// (non-constructive) small-coupling threshold.
    pub beta0_caveat: bool,
}

fn cond(reasons: &mut Vec<Condition>, statement: impl Into<String>, margin: f64) -> bool {
    let holds = margin > 0.0;
    reasons.push(Condition { statement: statement.into(), holds, margin });
    holds
}

/// Classifies the parameter set into one of the three cases (or none).
pub fn theorem_conditions(params: &SystemParams, consts: &ReducedConstants) -> CaseVerdict {
    let mut reasons = Vec::new();
    let [p1, p2, p3] = params.potentials;
    let sign_ok = match consts.branch {
        DecayBranch::FirstLeads => cond(&mut reasons, "a₁ > 0 (m₁ < m₂)", p1.effective_a()),
        DecayBranch::SecondLeads => cond(&mut reasons, "a₂ > 0 (m₂ < m₁)", p2.effective_a()),
        DecayBranch::Equal => cond(
            &mut reasons,
            "a₁α² + a₂γ² > 0 (m₁ = m₂)",
            p1.effective_a() * consts.alpha.powi(2) + p2.effective_a() * consts.gamma.powi(2),
        ),
    };
    let a3_ok = cond(&mut reasons, "a₃ > 0", p3.effective_a());
    let beta0_caveat = params.beta13 > 0.0 || params.beta23 > 0.0;
    reasons.push(Condition {
        statement: if beta0_caveat {
            "β₁₃χ(β₁₃) + β₂₃χ(β₂₃) < β₀ depends on the unquantified threshold β₀".into()
        } else {
            "β₁₃χ(β₁₃) + β₂₃χ(β₂₃) = 0 < β₀ holds for non-positive couplings".into()
        },
        holds: !beta0_caveat,
        margin: -(params.beta13.max(0.0) + params.beta23.max(0.0)),
    });

    if !(sign_ok && a3_ok) {
        return CaseVerdict { theorem_case: TheoremCase::None, alternative: None, reasons, beta0_caveat };
    }

    let rel = (consts.lambda_ratio - 1.0).abs();
    let lambda_is_one = rel <= LAMBDA_ONE_TOLERANCE;
    cond(&mut reasons, format!("Λ ≠ 1 (Λ = {})", consts.lambda_ratio), rel - LAMBDA_ONE_TOLERANCE);

    let (d0, d1, d2) = (consts.d0, consts.d1, consts.d2);
    let equal_case = || -> (TheoremCase, Vec<Condition>) {
        let mut r = Vec::new();
        let f_min = consts.f1_at_d1.unwrap_or(f64::NAN).min(consts.f2_at_d2.unwrap_or(f64::NAN));
        let upper = 0.5 * consts.d1_star.unwrap_or(f64::NAN) * f_min;
        let lower_ok = cond(&mut r, "-(D₀ + D₁)/2 < D₂", d2 + 0.5 * (d0 + d1));
        let upper_ok = cond(&mut r, "D₂ < (d₁/2) min{f₁(d₁), f₂(d₂)}", upper - d2);
        let attractive = cond(&mut r, "D₂ < 0", -d2);
        let balance = cond(&mut r, "D₀ + D₁ + 2D₂ > 0", d0 + d1 + 2.0 * d2);
        let case = if attractive && balance {
            TheoremCase::Case3
        } else if lower_ok && upper_ok {
            TheoremCase::Case2
        } else {
            TheoremCase::None
        };
        (case, r)
    };

    let near = rel <= LAMBDA_DUAL_BAND;
    if lambda_is_one {
        let (case, extra) = equal_case();
        reasons.extend(extra);
        // Case 3 parameters also satisfy the Case 2 interval.
        let alternative = match case {
            TheoremCase::Case3 => Some(TheoremCase::Case2),
            _ if rel > 0.0 => Some(TheoremCase::Case1),
            _ => None,
        };
        CaseVerdict { theorem_case: case, alternative, reasons, beta0_caveat }
    } else {
        let alternative = if near {
            let (case, extra) = equal_case();
            reasons.extend(extra);
            (case != TheoremCase::None).then_some(case)
        } else {
            None
        };
        CaseVerdict { theorem_case: TheoremCase::Case1, alternative, reasons, beta0_caveat }
    }
}

/// Rectangle `[x.0, x.1] × [y.0, y.1]` in the open positive quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl SearchRegion {
    pub fn validate(&self) -> Result<()> {
        let ok = |(a, b): (f64, f64)| a > 0.0 && b > a && b.is_finite();
        if ok(self.x) && ok(self.y) {
            Ok(())
        } else {
            Err(Error::Domain(format!("degenerate search region {:?} × {:?}", self.x, self.y)))
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x.0 && x < self.x.1 && y > self.y.0 && y < self.y.1
    }

    /// Distance to the nearest edge (negative outside).
    pub fn margin(&self, x: f64, y: f64) -> f64 {
        (x - self.x.0).min(self.x.1 - x).min(y - self.y.0).min(self.y.1 - y)
    }

    /// `[d₁/20, 20 d₁] × [d₂/20, 20 d₂]`, or the unit-scale box if a
    /// maximizer of `f₁`/`f₂` does not exist.
    pub fn around_separable_maximum(consts: &ReducedConstants) -> Self {
        let d1 = consts.d1_star.unwrap_or(1.0);
        let d2 = consts.d2_star.unwrap_or(1.0);
        Self { x: (d1 / 20.0, 20.0 * d1), y: (d2 / 20.0, 20.0 * d2) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizerResult {
    pub x_star: f64,
    pub y_star: f64,
    pub f_value: f64,
    pub gradient: [f64; 2],
    pub interior_margin: f64,
    pub converged: bool,
    pub starts: usize,
}

fn gradient(table: &RingTable, x: f64, y: f64, consts: &ReducedConstants) -> Result<[f64; 2]> {
    let hx = 1e-5 * x;
    let hy = 1e-5 * y;
    let gx = (f_xy_with(table, x + hx, y, consts)? - f_xy_with(table, x - hx, y, consts)?) / (2.0 * hx);
    let gy = (f_xy_with(table, x, y + hy, consts)? - f_xy_with(table, x, y - hy, consts)?) / (2.0 * hy);
    Ok([gx, gy])
}

/// Multi-start simplex search for the interior maximum of `f` in `region`.
///
/// Starts at `(d₁, d₂)` (or the region centre) and four axis perturbations
/// of it. The best end point is certified by a central-difference gradient
/// below [`GRADIENT_TOLERANCE`] and a positive distance to the region edge.
pub fn maximize_f(k: usize, consts: &ReducedConstants, region: &SearchRegion) -> Result<MaximizerResult> {
    region.validate()?;
    if k < 2 {
        return Err(Error::Domain(format!("landscape needs k >= 2, got {k}")));
    }
    let table = RingTable::new(k)?;
    let center = ((region.x.0 * region.x.1).sqrt(), (region.y.0 * region.y.1).sqrt());
    let base = match (consts.d1_star, consts.d2_star) {
        (Some(a), Some(b)) if region.contains(a, b) => (a, b),
        _ => center,
    };
    let starts = [
        base,
        (base.0 * 1.1, base.1),
        (base.0 * 0.9, base.1),
        (base.0, base.1 * 1.1),
        (base.0, base.1 * 0.9),
    ];
    // Optimise in (x/base.0, y/base.1) so the simplex sees unit scales.
    let objective = |v: &[f64]| -> f64 {
        let x = v[0] * base.0;
        let y = v[1] * base.1;
        if !region.contains(x, y) {
            return f64::INFINITY;
        }
        match f_xy_with(&table, x, y, consts) {
            Ok(f) => -f,
            Err(_) => f64::INFINITY,
        }
    };
    let mut best: Option<crate::nelder_mead::Minimum> = None;
    for s in starts.iter().filter(|s| region.contains(s.0, s.1)) {
        let m = minimize(
            objective,
            &[s.0 / base.0, s.1 / base.1],
            Options { initial_step: 0.05, tolerance: 1e-10, max_iterations: 4000 },
        );
        if best.as_ref().map_or(true, |b| m.value < b.value) {
            best = Some(m);
        }
    }
    let best = best.ok_or_else(|| Error::Domain("no start point lies inside the region".into()))?;
    let x = best.x[0] * base.0;
    let y = best.x[1] * base.1;
    let f_value = -best.value;
    let grad = gradient(&table, x, y, consts)?;
    let margin = region.margin(x, y);
    let converged = best.converged
        && f_value.is_finite()
        && grad[0].abs() < GRADIENT_TOLERANCE
        && grad[1].abs() < GRADIENT_TOLERANCE
        && margin > 0.0;
    Ok(MaximizerResult {
        x_star: x,
        y_star: y,
        f_value,
        gradient: grad,
        interior_margin: margin,
        converged,
        starts: starts.len(),
    })
}

/// Ring radii recovered from a maximizer, with the window check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRadii {
    pub r_star: f64,
    pub rho_star: f64,
    /// `(k ln k)^{1/(1-m)}`.
    pub scale: f64,
    pub window: (f64, f64),
    pub in_window: bool,
    /// Window constants that bracket `(x*, y*)` with a factor-two margin.
    pub suggested_c: (f64, f64),
}

pub fn peak_radii(k: usize, consts: &ReducedConstants, result: &MaximizerResult, c1: f64, c2: f64) -> Result<PeakRadii> {
    let kf = k as f64;
    let scale = consts.radius_scale(k);
    let window = s_k_window(kf, consts.m, c1, c2)?;
    let r_star = result.x_star * scale;
    let rho_star = result.y_star * scale;
    let inside = |v: f64| v >= window.0 && v <= window.1;
    let suggested_c = (0.5 * result.x_star.min(result.y_star), 2.0 * result.x_star.max(result.y_star));
    Ok(PeakRadii { r_star, rho_star, scale, window, in_window: inside(r_star) && inside(rho_star), suggested_c })
}

/// Grid of sample points for [`landscape_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub region: SearchRegion,
    pub nx: usize,
    pub ny: usize,
}

/// `values[i][j] = f(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeScan {
    pub k: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl LandscapeScan {
    /// Indices and value of the largest sample.
    pub fn argmax(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        best
    }

    /// Long-format CSV with header `x,y,f`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,f")?;
        for (i, x) in self.xs.iter().enumerate() {
            for (j, y) in self.ys.iter().enumerate() {
                writeln!(out, "{x:?},{y:?},{:?}", self.values[i][j])?;
            }
        }
        Ok(())
    }
}

/// Dense evaluation of `f` on a uniform grid (cell-centred, so no sample sits on an edge).
pub fn landscape_scan(k: usize, consts: &ReducedConstants, spec: &ScanSpec) -> Result<LandscapeScan> {
    spec.region.validate()?;
    if spec.nx == 0 || spec.ny == 0 {
        return Err(Error::Domain("scan needs at least one sample per axis".into()));
    }
    let table = RingTable::new(k)?;
    let axis = |(a, b): (f64, f64), n: usize| -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64).collect()
    };
    let xs = axis(spec.region.x, spec.nx);
    let ys = axis(spec.region.y, spec.ny);
    let values = xs
        .iter()
        .map(|&x| ys.iter().map(|&y| f_xy_with(&table, x, y, consts)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeScan { k, xs, ys, values })
}

/// Values of an energy functional at a centre and its eight ±`step`
/// neighbours in `(r, ρ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub center: (f64, f64),
    pub step: f64,
    pub center_value: f64,
    /// `((r, ρ), value)` for the eight neighbours.
    pub probes: Vec<((f64, f64), f64)>,
    /// Number of neighbours strictly below the centre.
    pub dominated: usize,
}

/// Evaluates `energy` at `(r, ρ)` and at `(r(1 + s_1 step), ρ(1 + s_2 step))`
/// for the eight non-zero sign pairs `s_i ∈ {-1, 0, 1}`.
pub fn probe_local_maximum<F: FnMut(f64, f64) -> Result<f64>>(
    r: f64,
    rho: f64,
    step: f64,
    mut energy: F,
) -> Result<ProbeResult> {
    let center_value = energy(r, rho)?;
    let mut probes = Vec::with_capacity(8);
    for sr in [-1.0, 0.0, 1.0] {
        for sp in [-1.0, 0.0, 1.0] {
            if sr == 0.0 && sp == 0.0 {
                continue;
            }
            let p = (r * (1.0 + sr * step), rho * (1.0 + sp * step));
            probes.push((p, energy(p.0, p.1)?));
        }
    }
    let dominated = probes.iter().filter(|(_, v)| *v < center_value).count();
    Ok(ProbeResult { center: (r, rho), step, center_value, probes, dominated })
}
