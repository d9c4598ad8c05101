#![allow(dead_code)]

use std::sync::OnceLock;

use multipeak_core::ground_state::{ground_state_stats, solve_ground_state, GroundStateStats, SolverOptions};
use multipeak_core::{PotentialSpec, RadialGrid, RadialProfile, SystemParams};

/// Ground state on the default grid, solved once per test binary.
pub fn ground_state() -> &'static RadialProfile {
    static W: OnceLock<RadialProfile> = OnceLock::new();
    W.get_or_init(|| solve_ground_state(&RadialGrid::default(), &SolverOptions::default()).unwrap())
}

pub fn stats() -> GroundStateStats {
    ground_state_stats(ground_state()).unwrap()
}

/// `μ = (2, 2, 1)`, `β_12 = 1`, `β_13 = β_23 = -0.1`, `λ = 1`,
/// `a = (1, 1, 1)`, `m = (1/2, 3/4, 1/2)`.
pub fn case1() -> SystemParams {
    SystemParams {
        mu: [2.0, 2.0, 1.0],
        beta12: 1.0,
        beta13: -0.1,
        beta23: -0.1,
        lambda: 1.0,
        potentials: [
            PotentialSpec::decaying(1.0, 1.0, 0.5),
            PotentialSpec::decaying(1.0, 1.0, 0.75),
            PotentialSpec::decaying(1.0, 1.0, 0.5),
        ],
    }
}

/// `case1` with every potential flat and the inter-ring couplings off.
pub fn decoupled() -> SystemParams {
    let flat = PotentialSpec::decaying(1.0, 0.0, 0.5);
    SystemParams { beta13: 0.0, beta23: 0.0, potentials: [flat, flat, flat], ..case1() }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Error function by the Taylor series for `|x| < 3` and the asymptotic
/// continued fraction beyond; accurate to about `1e-13`.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 3.0 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        for n in 1..200 {
            term *= -x2 / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return 2.0 / std::f64::consts::PI.sqrt() * sum;
    }
    // erfc(x) = exp(-x²)/√π · 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
    let mut cf = x;
    for n in (1..60).rev() {
        cf = x + (n as f64 / 2.0) / cf;
    }
    1.0 - (-x * x).exp() / std::f64::consts::PI.sqrt() / cf
}
