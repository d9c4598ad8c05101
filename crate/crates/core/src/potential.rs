//! Newtonian potentials of radial densities and two-centre overlap integrals.
//!
//! For a radial `u`, `φ_u = |x|^{-1} * u²` reduces to
//! `φ(r) = (4π/r) ∫_0^r s² u² ds + 4π ∫_r^∞ s u² ds`, which is evaluated with
//! running integrals. Past the grid the potential is exactly `Q / r` with
//! `Q = 4π ∫ s² u² ds`, which is recorded as a Coulomb tail.
//!
//! Integrals `∫ f(|x|) g(|x - d e|) dx` between two radial functions are
//! reduced with bipolar coordinates to
//! `(2π/d) ∫_0^∞ f(s) s [G(s + d) - G(|s - d|)] ds`, `G(t) = ∫_0^t g(τ) τ dτ`,
//! so each evaluation is a single one-dimensional sweep.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::quad::{cubic_weights, cumulative_integral, gauss_legendre, trapezoid};
use crate::radial::{RadialGrid, RadialProfile, Tail};

/// Outer-shell mass fraction above which a potential is flagged.
pub const TAIL_MASS_WARNING: f64 = 1e-6;

/// Result of [`radial_potential`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonianPotential {
    pub profile: RadialProfile,
    /// Total charge `Q = ∫ u²`, the coefficient of the `1/r` far field.
    pub charge: f64,
    /// Share of `∫ u²` in the outer 20% of the grid.
    pub tail_mass_fraction: f64,
    /// Set when the density is not negligible near `r_max`.
    pub warning: Option<String>,
}

/// Newtonian potential `φ_u(r)` of the radial density `u²`.
pub fn radial_potential(u: &RadialProfile) -> Result<NewtonianPotential> {
    if !matches!(u.tail(), Tail::Zero) {
        return Err(Error::Contract("density profile must vanish beyond its grid".into()));
    }
    let grid = *u.grid();
    let h = grid.spacing();
    let r: Vec<f64> = grid.nodes().collect();
    let inner: Vec<f64> = r.iter().zip(u.values()).map(|(r, v)| r * r * v * v).collect();
    let outer: Vec<f64> = r.iter().zip(u.values()).map(|(r, v)| r * v * v).collect();
    let inner_cum = cumulative_integral(&inner, h);
    let outer_cum = cumulative_integral(&outer, h);
    let outer_total = *outer_cum.last().unwrap_or(&0.0);
    let inner_total = *inner_cum.last().unwrap_or(&0.0);
    let values: Vec<f64> = r
        .iter()
        .enumerate()
        .map(|(i, &ri)| {
            let near = if i == 0 { 0.0 } else { inner_cum[i] / ri };
            4.0 * PI * (near + outer_total - outer_cum[i])
        })
        .collect();
    let charge = ensure_finite(4.0 * PI * inner_total, "potential charge")?;
    let tail_mass_fraction = u.outer_mass_fraction(0.2);
    let warning = (tail_mass_fraction > TAIL_MASS_WARNING).then(|| {
        format!(
            "{:.2e} of the density lies in the outer 20% of the grid; enlarge r_max",
            tail_mass_fraction
        )
    });
    let profile = RadialProfile::new(grid, values, Tail::Coulomb { charge })?;
    Ok(NewtonianPotential { profile, charge, tail_mass_fraction, warning })
}

/// Radial data prepared for repeated two-centre evaluations.
struct Antiderivative {
    /// `G(t_i) = ∫_0^{t_i} g τ dτ` on the grid of `g`.
    values: Vec<f64>,
    h: f64,
    n: usize,
    r_max: f64,
    tail: Tail,
}

impl Antiderivative {
    fn new(g: &RadialProfile) -> Self {
        let h = g.spacing();
        let f: Vec<f64> = g.grid().nodes().zip(g.values()).map(|(t, v)| t * v).collect();
        Self {
            values: cumulative_integral(&f, h),
            h,
            n: g.grid().n_points(),
            r_max: g.r_max(),
            tail: g.tail(),
        }
    }

    fn total(&self) -> f64 {
        self.values[self.n]
    }

    fn at(&self, t: f64) -> f64 {
        if t >= self.r_max {
            return match self.tail {
                Tail::Zero => self.total(),
                Tail::Coulomb { charge } => self.total() + charge * (t - self.r_max),
            };
        }
        let x = t / self.h;
        let mut i0 = (x.floor() as usize).min(self.n - 1);
        let mut tt = x - i0 as f64;
        if i0 == 0 {
            // G is even about the origin only up to sign; use a forward stencil.
            i0 = 1;
            tt -= 1.0;
        }
        let mut base = i0 - 1;
        if i0 + 2 > self.n {
            let shift = i0 + 2 - self.n;
            base -= shift;
            tt += shift as f64;
        }
        let w = cubic_weights(tt);
        w.iter().enumerate().map(|(k, wk)| wk * self.values[base + k]).sum()
    }
}

fn profile_key(p: &RadialProfile) -> impl Ord + '_ {
    struct Key<'a>(&'a RadialProfile);
    impl PartialEq for Key<'_> {
        fn eq(&self, o: &Self) -> bool {
            self.cmp(o) == Ordering::Equal
        }
    }
    impl Eq for Key<'_> {}
    impl PartialOrd for Key<'_> {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Key<'_> {
        fn cmp(&self, o: &Self) -> Ordering {
            let (a, b) = (self.0, o.0);
            a.spacing()
                .total_cmp(&b.spacing())
                .then(a.r_max().total_cmp(&b.r_max()))
                .then_with(|| {
                    for (x, y) in a.values().iter().zip(b.values()) {
                        let c = x.total_cmp(y);
                        if c != Ordering::Equal {
                            return c;
                        }
                    }
                    Ordering::Equal
                })
        }
    }
    Key(p)
}

/// `∫_{R³} f(|x|) g(|x - d e|) dx` for radial profiles `f`, `g` and a
/// centre separation `d ≥ 0`.
///
/// At most one of the profiles may carry a Coulomb tail. The arguments are
/// put into a canonical order before evaluating, so swapping `f` and `g`
/// returns the identical number.
pub fn two_center_integral(f: &RadialProfile, g: &RadialProfile, d: f64) -> Result<f64> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::Domain(format!("separation must be finite and non-negative, got {d}")));
    }
    let (outer, inner) = match (f.tail(), g.tail()) {
        (Tail::Coulomb { .. }, Tail::Coulomb { .. }) => {
            return Err(Error::Domain("both profiles have a non-decaying Coulomb tail".into()))
        }
        (Tail::Coulomb { .. }, Tail::Zero) => (f, g),
        (Tail::Zero, Tail::Coulomb { .. }) => (g, f),
        (Tail::Zero, Tail::Zero) => {
            if profile_key(f) <= profile_key(g) {
                (f, g)
            } else {
                (g, f)
            }
        }
    };
    let value = two_center_ordered(outer, inner, d)?;
    ensure_finite(value, "two-centre integral")
}

fn two_center_ordered(outer: &RadialProfile, inner: &RadialProfile, d: f64) -> Result<f64> {
    let r_outer = outer.r_max();
    let r_inner = inner.r_max();

    // Disjoint supports: the overlap vanishes, or the Coulomb tail of the
    // outer profile sees the whole inner profile, and Newton's theorem gives
    // the answer in closed form.
    if d >= r_outer + r_inner {
        return Ok(match outer.tail() {
            Tail::Zero => 0.0,
            Tail::Coulomb { charge } => charge * inner.volume_integral() / d,
        });
    }

    if d == 0.0 {
        let h = outer.spacing();
        let s_max = match outer.tail() {
            Tail::Zero => r_outer.min(r_inner),
            Tail::Coulomb { .. } => r_inner,
        };
        let n = (s_max / h).ceil() as usize;
        let samples: Vec<f64> = (0..=n)
            .map(|i| {
                let s = (i as f64 * h).min(s_max);
                outer.value_at(s) * inner.value_at(s) * s * s
            })
            .collect();
        return Ok(4.0 * PI * trapezoid(&samples, h));
    }

    let big_g = Antiderivative::new(inner);
    let h = outer.spacing();
    let s_max = match outer.tail() {
        Tail::Zero => r_outer,
        Tail::Coulomb { .. } => d + r_inner,
    };
    let n = (s_max / h).ceil() as usize;
    let samples: Vec<f64> = (0..=n)
        .map(|i| {
            let s = i as f64 * h;
            let diff = big_g.at(s + d) - big_g.at((s - d).abs());
            outer.value_at(s) * s * diff
        })
        .collect();
    Ok(2.0 * PI / d * trapezoid(&samples, h))
}

/// Two-centre integral where `f` is given analytically.
///
/// `∫ f(|x|) g(|x - d e|) dx = (2π/d) ∫_0^{R_g} g(t) t J(t) dt` with
/// `J(t) = ∫_{|d-t|}^{d+t} f(σ) σ dσ`, which is integrated with Gauss-Legendre
/// panels. Unlike a sampled `f` this stays well conditioned for separations
/// far beyond any grid (`d = 10^15` is fine).
pub fn two_center_analytic<F: Fn(f64) -> f64>(f: F, g: &RadialProfile, d: f64) -> Result<f64> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::Domain(format!("separation must be finite and non-negative, got {d}")));
    }
    if !matches!(g.tail(), Tail::Zero) {
        return Err(Error::Domain("analytic two-centre integral needs a decaying profile".into()));
    }
    let h = g.spacing();
    if d == 0.0 {
        let samples: Vec<f64> =
            g.grid().nodes().zip(g.values()).map(|(t, v)| f(t) * v * t * t).collect();
        return ensure_finite(4.0 * PI * trapezoid(&samples, h), "analytic two-centre integral");
    }
    let samples: Vec<f64> = g
        .grid()
        .nodes()
        .zip(g.values())
        .map(|(t, &v)| {
            if v == 0.0 || t == 0.0 {
                return 0.0;
            }
            // Subtract d from σ before scaling so huge d keeps its precision.
            let lo = (d - t).abs();
            let j = gauss_legendre(|s| f(s) * s, lo, d + t, 0.5);
            v * t * j
        })
        .collect();
    ensure_finite(2.0 * PI / d * trapezoid(&samples, h), "analytic two-centre integral")
}

/// `∫ φ_u u²` for a radial `u`.
pub fn self_interaction(u: &RadialProfile) -> Result<f64> {
    let phi = radial_potential(u)?;
    let sq = u.map(Tail::Zero, |_, v| v * v)?;
    two_center_integral(&phi.profile, &sq, 0.0)
}

/// Grid that covers `[0, r_max]` with (at most) spacing `h`.
pub fn covering_grid(r_max: f64, h: f64) -> Result<RadialGrid> {
    let n = (r_max / h).ceil().max(RadialGrid::MIN_POINTS as f64) as usize;
    RadialGrid::new(r_max, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(scale: f64) -> RadialProfile {
        RadialProfile::from_fn(RadialGrid::new(12.0, 2400).unwrap(), Tail::Zero, |r| {
            (-r * r / (2.0 * scale * scale)).exp()
        })
        .unwrap()
    }

    /// Potential of a Gaussian density: `ρ = e^{-r²/σ²}` (u = e^{-r²/2σ²})
    /// has `φ(r) = π^{3/2} σ³ erf(r/σ) / r`.
    fn gaussian_potential_exact(r: f64, sigma: f64) -> f64 {
        let q = PI.powf(1.5) * sigma.powi(3);
        if r == 0.0 {
            return 2.0 * PI * sigma * sigma;
        }
        q * erf(r / sigma) / r
    }

    // Abramowitz-Stegun style erf via the series / continued fraction is
    // overkill here; a high-order series is accurate enough for x ≤ 6.
    fn erf(x: f64) -> f64 {
        if x > 6.0 {
            return 1.0;
        }
        let mut sum = 0.0_f64;
        let mut term = x;
        let mut n = 0.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) || n < 5.0 {
            sum += term / (2.0 * n + 1.0);
            n += 1.0;
            term *= -x * x / n;
            if n > 400.0 {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn gaussian_potential_matches_closed_form() {
        let sigma = 1.3;
        let u = gaussian(sigma);
        let phi = radial_potential(&u).unwrap();
        for r in [0.0, 0.4, 1.0, 2.5, 5.0, 11.9] {
            let exact = gaussian_potential_exact(r, sigma);
            assert!((phi.profile.value_at(r) - exact).abs() < 1e-9 * exact, "r = {r}");
        }
        assert!((phi.charge - PI.powf(1.5) * sigma.powi(3)).abs() < 1e-10);
        assert!(phi.warning.is_none());
        assert!((phi.profile.value_at(40.0) * 40.0 - phi.charge).abs() < 1e-12);
    }

    #[test]
    fn compact_density_gives_exact_newton_field() {
        let g = RadialGrid::new(3.0, 600).unwrap();
        let u = RadialProfile::from_fn(g, Tail::Zero, |r| if r < 1.0 { (1.0 - r * r).powi(3) } else { 0.0 })
            .unwrap();
        let phi = radial_potential(&u).unwrap();
        let q = phi.charge;
        assert!((phi.profile.value_at(2.0) - q / 2.0).abs() < 1e-12);
    }

    #[test]
    fn wide_density_triggers_warning() {
        let g = RadialGrid::new(3.0, 300).unwrap();
        let u = RadialProfile::from_fn(g, Tail::Zero, |r| (-0.1 * r).exp()).unwrap();
        assert!(radial_potential(&u).unwrap().warning.is_some());
    }

    #[test]
    fn gaussian_overlap_closed_form() {
        // ∫ e^{-|x|²} e^{-|x-d|²} dx = (π/2)^{3/2} e^{-d²/2}.
        let g = RadialGrid::new(10.0, 2000).unwrap();
        let f = RadialProfile::from_fn(g, Tail::Zero, |r| (-r * r).exp()).unwrap();
        for d in [0.0_f64, 0.5, 1.7, 3.0, 6.0] {
            let exact = (PI / 2.0).powf(1.5) * (-d * d / 2.0).exp();
            let v = two_center_integral(&f, &f, d).unwrap();
            assert!((v - exact).abs() < 1e-9 * exact + 1e-14, "d = {d}: {v} vs {exact}");
        }
    }

    #[test]
    fn coulomb_far_field_is_exact() {
        let u = gaussian(1.0);
        let phi = radial_potential(&u).unwrap();
        let sq = u.map(Tail::Zero, |_, v| v * v).unwrap();
        let m = sq.volume_integral();
        let d = 30.0;
        let v = two_center_integral(&phi.profile, &sq, d).unwrap();
        assert!((v * d - phi.charge * m).abs() < 1e-12 * phi.charge * m);
        // Inside the overlap region the integrand is only exponentially close.
        let v = two_center_integral(&phi.profile, &sq, 10.0).unwrap();
        assert!((v * 10.0 - phi.charge * m).abs() < 1e-8 * phi.charge * m);
    }

    #[test]
    fn swapped_arguments_agree_bitwise() {
        let a = gaussian(1.0);
        let b = gaussian(1.7);
        for d in [0.0, 0.3, 2.0, 7.5] {
            assert_eq!(
                two_center_integral(&a, &b, d).unwrap(),
                two_center_integral(&b, &a, d).unwrap()
            );
        }
    }

    #[test]
    fn rejects_two_coulomb_tails_and_bad_distance() {
        let u = gaussian(1.0);
        let phi = radial_potential(&u).unwrap().profile;
        assert!(matches!(two_center_integral(&phi, &phi, 1.0), Err(Error::Domain(_))));
        assert!(matches!(two_center_integral(&u, &u, -1.0), Err(Error::Domain(_))));
        assert!(matches!(two_center_integral(&u, &u, f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn analytic_variant_agrees_with_sampled_one() {
        let g = RadialGrid::new(10.0, 2000).unwrap();
        let f = RadialProfile::from_fn(g, Tail::Zero, |r| (-r * r).exp()).unwrap();
        for d in [0.0, 0.8, 2.2] {
            let a = two_center_analytic(|r| (-r * r).exp(), &f, d).unwrap();
            let s = two_center_integral(&f, &f, d).unwrap();
            assert!((a - s).abs() < 1e-10 * s, "{a} vs {s}");
        }
        // Slowly varying f far away: ∫ f g ≈ f(d) ∫ g.
        let v = two_center_analytic(|r| 1.0 / (1.0 + r * r).sqrt(), &f, 1e15).unwrap();
        let expect = 1e-15 * f.volume_integral();
        assert!((v - expect).abs() < 1e-12 * expect);
    }
}
