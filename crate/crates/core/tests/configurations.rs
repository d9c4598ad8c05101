mod common;

use std::f64::consts::PI;

use common::{case1, ground_state};
use multipeak_core::configurations::{s_k_window, symmetry_deviation, Ring};
use multipeak_core::energy::{assemble_ansatz, BumpKit, GridSpec};
use multipeak_core::{Error, Field3D, PeakConfig, SignPattern, Variant};
use proptest::prelude::*;

fn angle(c: &[f64; 3]) -> f64 {
    c[1].atan2(c[0]).rem_euclid(2.0 * PI)
}

#[test]
fn ring_angles() {
    let c = PeakConfig::new(4, 1.0, 1.0, Variant::Ppp).unwrap();
    let inner: Vec<f64> = c.inner_centers().iter().map(angle).collect();
    let outer: Vec<f64> = c.outer_centers().iter().map(angle).collect();
    for (j, a) in inner.iter().enumerate() {
        assert!((a - j as f64 * PI / 2.0).abs() < 1e-12);
    }
    for (j, a) in outer.iter().enumerate() {
        assert!((a - (2 * j + 1) as f64 * PI / 4.0).abs() < 1e-12);
    }
    assert!(c.inner_signs().iter().chain(c.outer_signs()).all(|&s| s == 1.0));
}

#[test]
fn alternating_needs_even_k() {
    assert!(matches!(PeakConfig::new(3, 1.0, 1.0, Variant::Aaa), Err(Error::Parity(_))));
    assert!(PeakConfig::new(3, 1.0, 1.0, Variant::Ppp).is_ok());
    let c = PeakConfig::new(6, 1.0, 2.0, Variant::Aap).unwrap();
    assert_eq!(c.inner_signs().iter().sum::<f64>(), 0.0);
    assert!(c.outer_signs().iter().all(|&s| s == 1.0));
}

#[test]
fn window_examples() {
    let e = std::f64::consts::E;
    let (lo, hi) = s_k_window(e, 0.5, 1.0, 1.0).unwrap();
    assert!((lo - e * e).abs() < 1e-12 && (hi - e * e).abs() < 1e-12);
    let (lo, _) = s_k_window(100.0, 0.5, 1.0, 2.0).unwrap();
    assert!((lo / 2.12e5 - 1.0).abs() < 2e-3, "{lo}");
    assert!(s_k_window(100.0, 1.0, 1.0, 2.0).is_err());
}

#[test]
fn assembled_ansatz_is_symmetric() {
    let kit = BumpKit::new(ground_state().clone(), &case1()).unwrap();
    let config = PeakConfig::new(4, 15.0, 15.0, Variant::Ppp).unwrap();
    let fields = assemble_ansatz(&config, &kit, GridSpec { half_width: 30.0, n: 64 }).unwrap();
    for (i, u) in fields.u.iter().enumerate() {
        let ring = if i < 2 { Ring::Inner } else { Ring::Outer };
        let rep = symmetry_deviation(u, 4, SignPattern::Positive, ring).unwrap();
        assert!(rep.relative() < 1e-3, "component {i}: {rep:?}");
    }
    let config = PeakConfig::new(4, 15.0, 15.0, Variant::Aaa).unwrap();
    let fields = assemble_ansatz(&config, &kit, GridSpec { half_width: 30.0, n: 64 }).unwrap();
    let rep = symmetry_deviation(&fields.u[2], 4, SignPattern::Alternating, Ring::Outer).unwrap();
    assert!(rep.relative() < 1e-3, "{rep:?}");
}

#[test]
fn odd_monomial_symmetry() {
    let f = Field3D::from_fn(16, 2.0, [0.0; 3], |x| x[0]).unwrap();
    let alt = symmetry_deviation(&f, 2, SignPattern::Alternating, Ring::Inner).unwrap();
    let pos = symmetry_deviation(&f, 2, SignPattern::Positive, Ring::Inner).unwrap();
    assert!(alt.relative() < 1e-12);
    assert!(pos.relative() > 1.0);
    let zero = Field3D::zeros(8, 1.0, [0.0; 3]).unwrap();
    assert_eq!(symmetry_deviation(&zero, 3, SignPattern::Positive, Ring::Inner).unwrap().max(), 0.0);
}

proptest! {
    #[test]
    fn ring_geometry(k in 2usize..40, r in 0.5f64..100.0, rho in 0.5f64..100.0) {
        let c = PeakConfig::new(k, r, rho, Variant::Ppp).unwrap();
        let x = c.inner_centers();
        for i in 0..k {
            for j in 0..k {
                let d = ((x[i][0] - x[j][0]).powi(2) + (x[i][1] - x[j][1]).powi(2)).sqrt();
                let want = 2.0 * r * ((i as f64 - j as f64).abs() * PI / k as f64).sin();
                prop_assert!((d - want).abs() < 1e-12 * r.max(1.0));
            }
            prop_assert_eq!(x[i][2], 0.0);
        }
        let nearest = c.outer_centers().iter()
            .map(|y| ((x[0][0] - y[0]).powi(2) + (x[0][1] - y[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        let want = (r * r + rho * rho - 2.0 * r * rho * (PI / k as f64).cos()).sqrt();
        prop_assert!((nearest - want).abs() < 1e-9 * (r + rho));
    }
}
