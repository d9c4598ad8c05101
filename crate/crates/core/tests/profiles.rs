mod common;

use common::{ground_state, rel, stats};
use multipeak_core::ground_state::radial_equation_residual;
use multipeak_core::profiles::{domain_membership, scaled_bump, sync_coefficients, DomainBranch};
use multipeak_core::Error;
use proptest::prelude::*;

#[test]
fn sync_examples() {
    let s = sync_coefficients(2.0, 2.0, 1.0).unwrap();
    assert!((s.alpha - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    assert!((s.gamma - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    // Solving μ₁a + βg = 1, βa + μ₂g = 1 with (3, 2, 1) by substitution:
    // a = (1 - g)/... gives g = 2/5, a = 1/5.
    let s = sync_coefficients(3.0, 2.0, 1.0).unwrap();
    assert!((s.alpha.powi(2) - 0.2).abs() < 1e-15);
    assert!((s.gamma.powi(2) - 0.4).abs() < 1e-15);
    assert!(matches!(sync_coefficients(1.0, 1.0, 1.0), Err(Error::Singular(_))));
    assert!(matches!(sync_coefficients(1.0, 3.0, 2.0), Err(Error::OutsideRegime(_))));
}

#[test]
fn domain_examples() {
    assert_eq!(domain_membership(1.0, 1.0, 0.5).branch, Some(DomainBranch::I));
    assert_eq!(domain_membership(1.0, -1.0, 2.0).branch, Some(DomainBranch::III));
    assert!(!domain_membership(1.0, -1.0, 0.5).member);
}

#[test]
fn domain_intervals_on_a_dense_sweep() {
    // μ = ν = 1: members are (-1, 0) ∪ (0, 1) ∪ (1, ∞).
    for i in 0..10_000 {
        let beta = -3.0 + 6.0 * (i as f64 + 0.5) / 10_000.0;
        let expected = (beta > -1.0 && beta < 0.0) || (beta > 0.0 && beta < 1.0) || beta > 1.0;
        assert_eq!(domain_membership(1.0, 1.0, beta).member, expected, "β = {beta}");
    }
}

#[test]
fn scaled_bump_examples() {
    let w = ground_state();
    let m = stats().mass;
    let big = scaled_bump(w, 4.0, 1.0).unwrap();
    assert!(rel(big.values()[0], 4.0 * w.values()[0]) < 1e-12);
    assert!(rel(big.norm_squared(), 2.0 * m) < 1e-3);

    let same = scaled_bump(w, 1.0, 1.0).unwrap();
    assert_eq!(same.values(), w.values());

    let base = radial_equation_residual(w, 1.0, 1.0).unwrap();
    let scaled = scaled_bump(w, 2.0, 3.0).unwrap();
    let res = radial_equation_residual(&scaled, 2.0, 3.0).unwrap();
    assert!(res < 10.0 * base.max(1e-12), "{res} vs {base}");
}

#[test]
fn scaling_covariance() {
    let w = ground_state();
    let two_step = scaled_bump(&scaled_bump(w, 1.5, 1.0).unwrap(), 1.0, 2.0).unwrap();
    let direct = scaled_bump(w, 1.5, 2.0).unwrap();
    let diff = two_step.values().iter().zip(direct.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-12 * direct.max_abs(), "{diff}");
}

proptest! {
    #[test]
    fn accepted_pairs_solve_the_system(mu1 in 0.1f64..5.0, mu2 in 0.1f64..5.0, beta in -3.0f64..6.0) {
        if let Ok(s) = sync_coefficients(mu1, mu2, beta) {
            let (a2, g2) = (s.alpha * s.alpha, s.gamma * s.gamma);
            prop_assert!((mu1 * a2 + beta * g2 - 1.0).abs() < 1e-12 * (1.0 + (mu1 * a2).abs() + (beta * g2).abs()));
            prop_assert!((beta * a2 + mu2 * g2 - 1.0).abs() < 1e-12 * (1.0 + (beta * a2).abs() + (mu2 * g2).abs()));
        }
    }
}
