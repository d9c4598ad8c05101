mod common;

use std::f64::consts::PI;

use common::{erf, ground_state, rel, stats};
use multipeak_core::convolution::grid_potential;
use multipeak_core::potential::{radial_potential, two_center_integral};
use multipeak_core::{Error, Field3D, RadialGrid, RadialProfile, Tail};
use proptest::prelude::*;

fn gaussian(a: f64) -> RadialProfile {
    RadialProfile::from_fn(RadialGrid::new(20.0, 4000).unwrap(), Tail::Zero, move |r| (-a * r * r).exp()).unwrap()
}

#[test]
fn shell_theorem() {
    let grid = RadialGrid::new(10.0, 2000).unwrap();
    let u = RadialProfile::from_fn(grid, Tail::Zero, |r| if r < 1.0 { (1.0 - r * r).powi(2) } else { 0.0 }).unwrap();
    let mass = u.norm_squared();
    let phi = radial_potential(&u).unwrap();
    assert!(rel(phi.profile.value_at(2.0), mass / 2.0) < 1e-7);
    // φ(0) = 4π ∫ s u² ds; the integrand is a polynomial, integrated exactly here.
    // ∫₀¹ s (1 - s²)⁴ ds = 1/10.
    assert!(rel(phi.profile.value_at(0.0), 4.0 * PI / 10.0) < 1e-6);
}

#[test]
fn gaussian_density_matches_erf_closed_form() {
    // u² = e^{-r²} has potential π^{3/2} erf(r) / r.
    let u = RadialProfile::from_fn(RadialGrid::new(12.0, 2400).unwrap(), Tail::Zero, |r| (-r * r / 2.0).exp()).unwrap();
    let phi = radial_potential(&u).unwrap().profile;
    for r in [0.5, 1.0, 2.0, 5.0, 11.0] {
        let exact = PI.powf(1.5) * erf(r) / r;
        assert!(rel(phi.value_at(r), exact) < 1e-6, "r = {r}");
    }
}

#[test]
fn two_center_gaussian_overlap_closed_form() {
    // ∫ e^{-a|x|²} e^{-b|x-d|²} dx = (π/(a+b))^{3/2} e^{-ab d²/(a+b)}.
    let (a, b) = (1.0, 0.5);
    let (f, g) = (gaussian(a), gaussian(b));
    for d in [0.0, 0.7, 2.0, 4.5] {
        let exact = (PI / (a + b)).powf(1.5) * (-a * b * d * d / (a + b)).exp();
        let got = two_center_integral(&f, &g, d).unwrap();
        assert!((got - exact).abs() < 1e-8 * exact, "d = {d}: {got} vs {exact}");
    }
}

#[test]
fn two_center_edge_cases() {
    let f = gaussian(1.0);
    assert!(matches!(two_center_integral(&f, &f, -1.0), Err(Error::Domain(_))));
    assert_eq!(two_center_integral(&f, &f, 45.0).unwrap(), 0.0);
    let direct = 4.0 * PI * (PI / 2.0).sqrt().powi(3) / (4.0 * PI);
    assert!(rel(two_center_integral(&f, &f, 0.0).unwrap(), direct) < 1e-9);
}

#[test]
fn far_field_law_is_monotone() {
    let w = ground_state();
    let phi = radial_potential(w).unwrap().profile;
    let sq = w.map(Tail::Zero, |_, v| v * v).unwrap();
    let c_w = stats().mass.powi(2);
    let gaps: Vec<f64> = [10.0, 15.0, 20.0, 25.0]
        .iter()
        .map(|&d| (d * two_center_integral(&phi, &sq, d).unwrap() - c_w).abs())
        .collect();
    assert!(gaps.windows(2).all(|p| p[1] < p[0]), "{gaps:?}");
    assert!(gaps[3] / c_w < 0.02);
}

#[test]
fn grid_potential_matches_radial_on_axis() {
    let w = ground_state();
    let phi = radial_potential(w).unwrap().profile;
    let sq = Field3D::from_fn(128, 20.0, [0.0; 3], |x| w.value_at((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()).powi(2)).unwrap();
    let grid_phi = grid_potential(&sq).unwrap();
    let n = 128;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let x = grid_phi.node(i, n / 2, n / 2);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        worst = worst.max(rel(grid_phi.data()[grid_phi.index(i, n / 2, n / 2)], phi.value_at(r)));
    }
    assert!(worst < 0.01, "worst relative deviation {worst}");
}

#[test]
fn grid_potential_is_linear() {
    let bump = |c: f64| move |x: [f64; 3]| (-((x[0] - c).powi(2) + x[1] * x[1] + x[2] * x[2])).exp();
    let a = Field3D::from_fn(48, 12.0, [0.0; 3], bump(-4.0)).unwrap();
    let b = Field3D::from_fn(48, 12.0, [0.0; 3], bump(4.0)).unwrap();
    let sum = Field3D::from_fn(48, 12.0, [0.0; 3], |x| bump(-4.0)(x) + bump(4.0)(x)).unwrap();
    let (pa, pb, ps) = (grid_potential(&a).unwrap(), grid_potential(&b).unwrap(), grid_potential(&sum).unwrap());
    let scale = ps.max_abs();
    for i in 0..ps.data().len() {
        assert!((ps.data()[i] - pa.data()[i] - pb.data()[i]).abs() < 1e-10 * scale);
    }
    let zero = Field3D::zeros(32, 5.0, [0.0; 3]).unwrap();
    assert_eq!(grid_potential(&zero).unwrap().max_abs(), 0.0);
}

#[test]
fn grid_oracle_agrees_with_bipolar_at_d12() {
    let w = ground_state();
    let phi = radial_potential(w).unwrap().profile;
    let sq = w.map(Tail::Zero, |_, v| v * v).unwrap();
    let d = 12.0;
    let bipolar = two_center_integral(&phi, &sq, d).unwrap();
    let r2 = |x: [f64; 3], c: f64| (x[0] - c).powi(2) + x[1] * x[1] + x[2] * x[2];
    let l = 22.0;
    let a = Field3D::from_fn(128, l, [0.0; 3], |x| w.value_at(r2(x, -d / 2.0).sqrt()).powi(2)).unwrap();
    let b = Field3D::from_fn(128, l, [0.0; 3], |x| w.value_at(r2(x, d / 2.0).sqrt()).powi(2)).unwrap();
    let conv = multipeak_core::FreeSpaceConvolver::for_field(&a).unwrap().with_boundary_tolerance(1e-6);
    let pa = conv.convolve(&a).unwrap();
    let grid = pa.dot(&b).unwrap();
    assert!(rel(grid, bipolar) < 0.01, "grid {grid} vs bipolar {bipolar}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn two_center_is_symmetric(a in 0.3f64..2.0, b in 0.3f64..2.0, d in 0.0f64..8.0) {
        let (f, g) = (gaussian(a), gaussian(b));
        let fg = two_center_integral(&f, &g, d).unwrap();
        let gf = two_center_integral(&g, &f, d).unwrap();
        prop_assert!((fg - gf).abs() <= 1e-12 * fg.abs().max(1e-300));
    }
}
