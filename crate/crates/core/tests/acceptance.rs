//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) and always exits 0; failures
//! are reported on their lines together with the measured values.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use multipeak_core::energy::{isolated_residual_floor, residual_scaling_study, BumpKit, GridSpec};
use multipeak_core::ground_state::{decay_report, ground_state_stats, solve_ground_state, SolverOptions};
use multipeak_core::io::save_profile;
use multipeak_core::landscape::{maximize_f, SearchRegion};
use multipeak_core::potential::{radial_potential, two_center_integral};
use multipeak_core::reduced::compute_constants;
use multipeak_core::ring_kernel::{g_sum, RingTable};
use multipeak_core::run::{build_reports, ground_state_cached, verify_expansion};
use multipeak_core::{
    FreeSpaceConvolver, Field3D, GroundStateStats, PotentialSpec, RadialGrid, RadialProfile, RunConfig, SystemParams, Tail,
    Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Suite {
    passed: usize,
    failed: usize,
}

impl Suite {
    fn run<F: FnOnce() -> Vec<(&'static str, Outcome)>>(&mut self, f: F) {
        let start = Instant::now();
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(lines) => {
                for (id, o) in lines {
                    self.line(id, o.pass, &o.detail);
                }
            }
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                self.line("?", false, &format!("aborted after {:.1?}: {msg}", start.elapsed()));
            }
        }
    }

    fn line(&mut self, id: &str, pass: bool, detail: &str) {
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn identity_errors(s: &GroundStateStats) -> (f64, f64) {
    (rel(s.mass / s.kinetic, 3.0), rel(s.potential / s.kinetic, 4.0))
}

fn case1() -> SystemParams {
    RunConfig::load(&config_path("case1.json")).expect("shipped config").params
}

fn config_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// `params` with every potential flat and the inner/outer coupling off.
fn zeroed(params: &SystemParams) -> SystemParams {
    let mut p = params.clone();
    p.beta13 = 0.0;
    p.beta23 = 0.0;
    for (i, v) in p.potentials.iter_mut().enumerate() {
        let limit = if i == 2 { p.lambda } else { 1.0 };
        *v = PotentialSpec::decaying(limit, 0.0, 0.5);
    }
    p
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while (b - a).abs() > 1e-13 * (a.abs() + b.abs()) {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

fn criterion_1(w_out: &mut Option<RadialProfile>) -> Vec<(&'static str, Outcome)> {
    let start = Instant::now();
    let w = solve_ground_state(&RadialGrid::default(), &SolverOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let s = ground_state_stats(&w).unwrap();
    let (em, ep) = identity_errors(&s);
    let a = outcome(
        em < 1e-3 && ep < 1e-3 && elapsed < Duration::from_secs(30),
        format!("M/K - 3 rel {em:.2e}, P/K - 4 rel {ep:.2e} (tol 1e-3), solve {elapsed:.1?} (budget 30 s)"),
    );
    let fine = ground_state_stats(&solve_ground_state(&RadialGrid::default().refined(), &SolverOptions::default()).unwrap()).unwrap();
    let (fm, fp) = identity_errors(&fine);
    let b = outcome(
        fm < em && fp < ep,
        format!("under grid doubling M/K error {em:.2e} -> {fm:.2e}, P/K error {ep:.2e} -> {fp:.2e}"),
    );
    *w_out = Some(w);
    vec![("1a identities", a), ("1b refinement", b)]
}

fn criterion_2(w: &RadialProfile) -> Vec<(&'static str, Outcome)> {
    let d = decay_report(w, (10.0, 15.0)).unwrap();
    let a = outcome(
        d.relative_variation < 0.05,
        format!(
            "w r e^r varies {:.3} over [10, 15] (tol 0.05); with the Coulomb factor r^(-M/2) the variation is {:.2e}",
            d.relative_variation, d.coulomb_corrected_variation
        ),
    );
    let mass = ground_state_stats(w).unwrap().mass;
    let phi = radial_potential(w).unwrap().profile;
    let e = rel(20.0 * phi.value_at(20.0), mass);
    let b = outcome(e < 1e-3, format!("phi_w(20) * 20 vs M_w: rel {e:.2e} (tol 1e-3)"));
    vec![("2a decay", a), ("2b far potential", b)]
}

fn criterion_3(w: &RadialProfile) -> Vec<(&'static str, Outcome)> {
    let start = Instant::now();
    let phi = radial_potential(w).unwrap().profile;
    let sq = w.map(Tail::Zero, |_, v| v * v).unwrap();
    let c_w = ground_state_stats(w).unwrap().mass.powi(2);
    let ds = [10.0, 15.0, 20.0, 25.0];
    let gaps: Vec<f64> = ds.iter().map(|&d| (d * two_center_integral(&phi, &sq, d).unwrap() - c_w).abs()).collect();
    let monotone = gaps.windows(2).all(|p| p[1] < p[0]);
    let last = gaps[3] / c_w;
    let a = outcome(
        monotone && last < 0.02,
        format!(
            "|d T(d) / M^2 - 1| at d = 10, 15, 20, 25: {:?}; monotone {monotone}, {last:.2e} at 25 (tol 0.02)",
            gaps.iter().map(|g| format!("{:.2e}", g / c_w)).collect::<Vec<_>>()
        ),
    );

    let d = 12.0;
    let bipolar = two_center_integral(&phi, &sq, d).unwrap();
    let r2 = |x: [f64; 3], c: f64| (x[0] - c).powi(2) + x[1] * x[1] + x[2] * x[2];
    let l = 22.0;
    let fa = Field3D::from_fn(128, l, [0.0; 3], |x| w.value_at(r2(x, -d / 2.0).sqrt()).powi(2)).unwrap();
    let fb = Field3D::from_fn(128, l, [0.0; 3], |x| w.value_at(r2(x, d / 2.0).sqrt()).powi(2)).unwrap();
    let conv = FreeSpaceConvolver::for_field(&fa).unwrap().with_boundary_tolerance(1e-6);
    let grid = conv.convolve(&fa).unwrap().dot(&fb).unwrap();
    let e = rel(grid, bipolar);
    let elapsed = start.elapsed();
    let b = outcome(
        e < 0.01 && elapsed < Duration::from_secs(300),
        format!("128^3 grid {grid:.6} vs bipolar {bipolar:.6} at d = 12: rel {e:.2e} (tol 0.01), {elapsed:.1?} (budget 5 min)"),
    );
    vec![("3a far-field law", a), ("3b grid oracle", b)]
}

fn criterion_4() -> Vec<(&'static str, Outcome)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut tables: Vec<RingTable> = Vec::new();
    let (mut samples, mut violations) = (0usize, 0usize);
    while samples < 100_000 {
        let k = 2f64.powf(rng.gen_range(1.0..10.0)).round() as usize;
        let x = 10f64.powf(rng.gen_range(-2.0..2.0));
        let y = 10f64.powf(rng.gen_range(-2.0..2.0));
        if x == y {
            continue;
        }
        if tables.iter().all(|t| t.k() != k) {
            tables.push(RingTable::new(k).unwrap());
        }
        let t = tables.iter().find(|t| t.k() == k).unwrap();
        let rep = multipeak_core::ring_kernel::ring_bounds_with(t, x, y).unwrap();
        samples += 1;
        if !rep.sandwich_holds() {
            violations += 1;
        }
    }
    let a = outcome(violations == 0, format!("{violations} violations in {samples} samples, k in [2, 1024], x, y in [0.01, 100]"));

    let k = 1usize << 14;
    let kf = k as f64;
    let ratio = g_sum(1.0, 1.0, k).unwrap() * PI / (2.0 * kf * kf.ln());
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let law = ((8.0 * kf / PI).ln() + EULER_GAMMA) / (2.0 * kf.ln());
    let b = outcome(
        (ratio - 1.0).abs() <= 0.10,
        format!(
            "g(x,x,2^14) pi x / (2 k ln k) = {ratio:.6} (tol 0.10 around 1); the sum follows (k/(pi x))(ln(8k/pi) + gamma), predicting {law:.6}"
        ),
    );
    vec![("4a sandwich", a), ("4b diagonal ratio", b)]
}

fn criterion_5(w: &RadialProfile) -> Vec<(&'static str, Outcome)> {
    let start = Instant::now();
    let p = zeroed(&case1());
    let kit = BumpKit::new(w.clone(), &p).unwrap();
    let c = verify_expansion(&kit, 6, 25.0, 25.0, GridSpec { half_width: 36.0, n: 128 }, 0.1).unwrap();
    let elapsed = start.elapsed();
    let in_budget = elapsed < Duration::from_secs(600);
    let a = outcome(
        c.interaction_relative_error < 0.05 && in_budget,
        format!(
            "k = 6, r = rho = 25: grid interaction {:.7}, pairwise {:.7}, rel {:.2e} (tol 0.05), {elapsed:.1?} (budget 10 min)",
            c.grid_interaction, c.pairwise.interaction, c.interaction_relative_error
        ),
    );
    let b = outcome(
        (c.ratio_to_d2_g - 1.0).abs() <= 0.10 && in_budget,
        format!(
            "cross gap per peak {:.6}, D2 g = {:.6}: ratio {:.4} (tol 0.10 around 1); against pi D2 g the ratio is {:.6}",
            c.cross_gap_per_peak,
            c.d2 * c.g,
            c.ratio_to_d2_g,
            c.ratio_to_pi_d2_g
        ),
    );
    vec![("5a interaction", a), ("5b cross term", b)]
}

fn criterion_6(w: &RadialProfile) -> Vec<(&'static str, Outcome)> {
    let stats = ground_state_stats(w).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_lambda: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for i in 0..200 {
        let m = rng.gen_range(0.5..0.9);
        let dm = rng.gen_range(0.01..0.09);
        let ms = match i % 3 {
            0 => [m, m + dm, m],
            1 => [m + dm, m, m],
            _ => [m, m, m],
        };
        let lambda = rng.gen_range(0.3..3.0);
        let mut p = case1();
        p.mu[2] = rng.gen_range(0.3..3.0);
        p.lambda = lambda;
        for (j, v) in p.potentials.iter_mut().enumerate() {
            let limit = if j == 2 { lambda } else { 1.0 };
            *v = PotentialSpec::decaying(limit, rng.gen_range(0.1..2.0), ms[j]);
        }
        let c = compute_constants(&p, &stats).unwrap();
        let (d1, d2) = (c.d1_star.unwrap(), c.d2_star.unwrap());
        worst_lambda = worst_lambda.max(rel((d1 / d2).powf(1.0 - c.m), c.lambda_ratio));
        if i < 20 {
            let f1 = golden_max(|x| c.f1(x), d1 / 50.0, d1 * 50.0);
            let f2 = golden_max(|y| c.f2(y), d2 / 50.0, d2 * 50.0);
            worst_f = worst_f.max(rel(f1, c.f1_at_d1.unwrap())).max(rel(f2, c.f2_at_d2.unwrap()));
        }
    }
    vec![
        ("6a Lambda identity", outcome(worst_lambda < 1e-10, format!("worst rel error {worst_lambda:.2e} over 200 parameter sets (tol 1e-10)"))),
        ("6b closed-form maxima", outcome(worst_f < 1e-8, format!("worst rel error {worst_f:.2e} over 20 parameter sets (tol 1e-8)"))),
    ]
}

fn criterion_7(w: &RadialProfile) -> Vec<(&'static str, Outcome)> {
    let stats = ground_state_stats(w).unwrap();
    let mut c = compute_constants(&case1(), &stats).unwrap();
    c.d2 = 0.0;
    let m = maximize_f(64, &c, &SearchRegion::around_separable_maximum(&c)).unwrap();
    let err = (m.x_star - c.d1_star.unwrap()).abs().max((m.y_star - c.d2_star.unwrap()).abs());
    let a = outcome(m.converged && err < 1e-6, format!("D2 = 0 maximizer off (d1, d2) by {err:.2e} (tol 1e-6)"));

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::load(&config_path("case1.json")).unwrap();
    cfg.cache_dir = dir.path().join("cache");
    cfg.out_dir = dir.path().join("out");
    save_profile(&cfg.cache_path(), w).unwrap();
    let gs = ground_state_cached(&cfg).unwrap();
    let reports = build_reports(&cfg, &gs).unwrap();
    let mut ok = !reports.is_empty();
    let mut parts = Vec::new();
    for r in &reports {
        let verdict = r.verdict.value.as_ref().map(|v| format!("{:?}", v.theorem_case)).unwrap_or_default();
        let conv = r.maximizer.value.as_ref().is_some_and(|m| m.converged);
        let window = r.peak_radii.value.as_ref().is_some_and(|p| p.in_window);
        let dominated = r.probe.value.as_ref().map_or(0, |p| p.dominated);
        parts.push(format!("k = {}: {verdict}, converged {conv}, in window {window}, dominates {dominated}/8", r.k));
        // The criterion is asymptotic in k; the largest shipped k carries it.
        if r.k == cfg.k_list.iter().copied().max().unwrap() {
            ok &= conv && window && dominated == 8 && verdict == "Case1";
        }
    }
    let b = outcome(ok, format!("case1.json, {}", parts.join("; ")));
    vec![("7a separable maximizer", a), ("7b case-1 report", b)]
}

fn criterion_8(w: &RadialProfile) -> Vec<(&'static str, Outcome)> {
    let params = case1();
    let kit = BumpKit::new(w.clone(), &params).unwrap();
    let k = 4;
    let m = params.m();
    let s = (k as f64 * (k as f64).ln()).powf(1.0 / (1.0 - m));
    let radii: Vec<(f64, f64)> = [0.5, 0.65, 0.8, 0.975].iter().map(|c| (c * s, c * s)).collect();
    let h = 0.5;
    let rows = residual_scaling_study(&kit, k, Variant::Ppp, &radii, h).unwrap();
    let per_peak: Vec<f64> = rows.iter().map(|r| r.per_peak).collect();
    let monotone = per_peak.windows(2).all(|p| p[1] < p[0]);
    let a = outcome(
        monotone,
        format!("k = 4, r = rho in {:?}: per-peak residual {:?}",
            radii.iter().map(|r| (r.0 * 100.0).round() / 100.0).collect::<Vec<_>>(),
            per_peak.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()),
    );

    let flat = kit.with_params(&zeroed(&params)).unwrap();
    let floor = isolated_residual_floor(&flat, h).unwrap();
    let rows = residual_scaling_study(&flat, k, Variant::Ppp, &radii, h).unwrap();
    let excess: Vec<f64> = rows.iter().map(|r| r.per_peak - floor).collect();
    let last = *excess.last().unwrap();
    let scaled: Vec<String> = rows.iter().zip(&excess).map(|(r, e)| format!("{:.2}", e * r.r)).collect();
    let b = outcome(
        last <= 0.10 * floor,
        format!(
            "zeroed potentials: floor {floor:.4}, excess at largest r {last:.4} (tol 10% of floor); excess * r = {scaled:?}"
        ),
    );
    vec![("8a residual monotone", a), ("8b reaches floor", b)]
}

fn main() {
    let mut suite = Suite { passed: 0, failed: 0 };
    let mut w = None;
    suite.run(|| criterion_1(&mut w));
    let Some(w) = w else {
        println!("FAIL ground state unavailable; criteria 2-8 not run");
        return;
    };
    suite.run(|| criterion_2(&w));
    suite.run(|| criterion_3(&w));
    suite.run(criterion_4);
    suite.run(|| criterion_5(&w));
    suite.run(|| criterion_6(&w));
    suite.run(|| criterion_7(&w));
    suite.run(|| criterion_8(&w));
    println!("acceptance: {} passed, {} failed", suite.passed, suite.failed);
}
