//! Command-line front end: solves, scans and reports for ring-shaped
//! multi-peak configurations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use multipeak_core::configurations::{symmetry_deviation, Ring, PeakConfig, Variant};
use multipeak_core::energy::{
    assemble_ansatz, grid_for, isolated_residual_floor, loglog_slope, residual_scaling_study, BumpKit, GridState,
    ResidualRow,
};
use multipeak_core::ground_state::{decay_report, default_decay_window, DecayReport, GroundStateStats};
use multipeak_core::io::save_field;
use multipeak_core::landscape::{landscape_scan, maximize_f, theorem_conditions, ScanSpec, SearchRegion};
use multipeak_core::radial::RadialGrid;
use multipeak_core::reduced::compute_constants;
use multipeak_core::ring_kernel::ring_bounds;
use multipeak_core::run::{
    build_reports, ground_state_cached, identity_errors, verify_expansion, GroundStateRun, RunConfig,
    IDENTITY_TOLERANCE,
};

#[derive(Parser)]
#[command(name = "multipeak", version, about = "Ring-shaped multi-peak states of a three-component Hartree system")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand; each overrides the config file.
#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated ring sizes.
    #[arg(long, global = true, value_delimiter = ',')]
    k: Vec<usize>,
    /// Sign pattern: PPP, AAA, PPA or AAP.
    #[arg(long, global = true)]
    variant: Option<Variant>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Accept grid work outside the desk envelope.
    #[arg(long, global = true)]
    allow_large: bool,
    /// Radial grid extent.
    #[arg(long, global = true)]
    r_max: Option<f64>,
    /// Radial grid intervals.
    #[arg(long, global = true)]
    n_radial: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve (or load) the radial ground state and write its statistics.
    GroundState,
    /// Print the reduced constants and the case verdict.
    Constants,
    /// Maximize the reduced landscape and write a CSV scan per k.
    Landscape {
        #[arg(long, default_value_t = 64)]
        nx: usize,
        #[arg(long, default_value_t = 64)]
        ny: usize,
    },
    /// Compare grid and pairwise energies of a positive-sign ring.
    VerifyExpansion {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Per-peak PDE residual of the ansatz over a sweep of radii.
    ResidualScaling {
        /// Window constants c; radii are r = ρ = c (k ln k)^{1/(1-m)}.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.65,0.8,0.975")]
        c: Vec<f64>,
        /// Grid spacing.
        #[arg(long, default_value_t = 0.5)]
        h: f64,
    },
    /// Assemble the ansatz on the field grid and dump it with sidecars.
    Construct {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        rho: f64,
    },
    /// Composite report per (k, variant).
    Report {
        /// Include the grid-versus-pairwise expansion check.
        #[arg(long)]
        expansion: bool,
    },
    /// Ring sums and their bounds as CSV.
    RingKernel {
        #[arg(long, value_delimiter = ',', default_value = "1")]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        y: Vec<f64>,
    },
}

/// Config with every command-line override applied, validated.
fn load_config(common: &Common, needs_params: bool) -> Result<Option<RunConfig>> {
    let Some(path) = &common.config else {
        if needs_params {
            bail!("this subcommand needs --config <path> (see configs/ for samples)");
        }
        return Ok(None);
    };
    let mut cfg = RunConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    if !common.k.is_empty() {
        cfg.k_list = common.k.clone();
    }
    if let Some(v) = common.variant {
        cfg.variant = v;
    }
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    if let Some(c) = &common.cache {
        cfg.cache_dir = c.clone();
    }
    if common.allow_large {
        cfg.allow_large = true;
    }
    if common.r_max.is_some() || common.n_radial.is_some() {
        cfg.radial_grid = RadialGrid::new(
            common.r_max.unwrap_or(cfg.radial_grid.r_max()),
            common.n_radial.unwrap_or(cfg.radial_grid.n_points()),
        )?;
    }
    cfg.validate().context("invalid configuration")?;
    Ok(Some(cfg))
}

/// Solver-only settings for subcommands that run without a config file.
fn solver_config(common: &Common, cfg: Option<&RunConfig>) -> Result<RunConfig> {
    let mut base = match cfg {
        Some(c) => c.clone(),
        None => {
            let mut c = RunConfig::new(placeholder_params());
            c.out_dir = common.out.clone().unwrap_or(c.out_dir);
            c.cache_dir = common.cache.clone().unwrap_or(c.cache_dir);
            c
        }
    };
    if cfg.is_none() && (common.r_max.is_some() || common.n_radial.is_some()) {
        base.radial_grid = RadialGrid::new(
            common.r_max.unwrap_or(base.radial_grid.r_max()),
            common.n_radial.unwrap_or(base.radial_grid.n_points()),
        )?;
    }
    Ok(base)
}

/// The ground state does not depend on the system parameters; any valid set will do.
fn placeholder_params() -> multipeak_core::SystemParams {
    use multipeak_core::PotentialSpec;
    let v = PotentialSpec::decaying(1.0, 0.0, 0.5);
    multipeak_core::SystemParams {
        mu: [1.0, 1.0, 1.0],
        beta12: 0.0,
        beta13: 0.0,
        beta23: 0.0,
        lambda: 1.0,
        potentials: [v, v, v],
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn ground_state(cfg: &RunConfig) -> Result<GroundStateRun> {
    let gs = ground_state_cached(cfg)?;
    for w in &gs.warnings {
        eprintln!("warning: {w}");
    }
    Ok(gs)
}

fn usage_hint(what: &str) -> ExitCode {
    eprintln!("{what}: no ring sizes given; pass --k 6,8 or set k_list in the config");
    ExitCode::SUCCESS
}

#[derive(Serialize)]
struct GroundStateSummary {
    stats: GroundStateStats,
    mass_over_kinetic_error: f64,
    potential_over_kinetic_error: f64,
    identity_tolerance: f64,
    identities_ok: bool,
    decay: DecayReport,
    from_cache: bool,
    warnings: Vec<String>,
}

fn cmd_ground_state(common: &Common) -> Result<ExitCode> {
    let cfg = load_config(common, false)?;
    let cfg = solver_config(common, cfg.as_ref())?;
    let gs = ground_state(&cfg)?;
    let (em, ep) = identity_errors(&gs.stats);
    let ok = em <= IDENTITY_TOLERANCE && ep <= IDENTITY_TOLERANCE;
    let summary = GroundStateSummary {
        stats: gs.stats,
        mass_over_kinetic_error: em,
        potential_over_kinetic_error: ep,
        identity_tolerance: IDENTITY_TOLERANCE,
        identities_ok: ok,
        decay: decay_report(&gs.profile, default_decay_window(gs.profile.grid()))?,
        from_cache: gs.from_cache,
        warnings: gs.warnings.clone(),
    };
    let path = write_json(&cfg.out_dir, "ground_state.json", &summary)?;
    println!("{}", path.display());
    if !ok {
        eprintln!("identity suite failed: M/K off by {em:.2e}, P/K off by {ep:.2e}");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_constants(common: &Common) -> Result<ExitCode> {
    let cfg = load_config(common, true)?.expect("params required");
    let gs = ground_state(&cfg)?;
    let consts = compute_constants(&cfg.params, &gs.stats)?;
    let verdict = theorem_conditions(&cfg.params, &consts);
    #[derive(Serialize)]
    struct Out<'a> {
        constants: &'a multipeak_core::ReducedConstants,
        verdict: &'a multipeak_core::CaseVerdict,
    }
    let out = Out { constants: &consts, verdict: &verdict };
    println!("{}", serde_json::to_string_pretty(&out)?);
    write_json(&cfg.out_dir, "constants.json", &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_landscape(common: &Common, nx: usize, ny: usize) -> Result<ExitCode> {
    let cfg = load_config(common, true)?.expect("params required");
    if cfg.k_list.is_empty() {
        return Ok(usage_hint("landscape"));
    }
    let gs = ground_state(&cfg)?;
    let consts = compute_constants(&cfg.params, &gs.stats)?;
    let region = SearchRegion::around_separable_maximum(&consts);
    for &k in &cfg.k_list {
        let max = maximize_f(k, &consts, &region)?;
        let scan = landscape_scan(k, &consts, &ScanSpec { region, nx, ny })?;
        fs::create_dir_all(&cfg.out_dir)?;
        let csv = cfg.out_dir.join(format!("landscape_k{k}.csv"));
        scan.write_csv(fs::File::create(&csv)?)?;
        write_json(&cfg.out_dir, &format!("landscape_k{k}.json"), &max)?;
        println!("k={k} x*={:.9} y*={:.9} f={:.9} converged={} -> {}", max.x_star, max.y_star, max.f_value, max.converged, csv.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_expansion(common: &Common, r: Option<f64>, rho: Option<f64>) -> Result<ExitCode> {
    let mut cfg = load_config(common, true)?.expect("params required");
    let e = &mut cfg.expansion;
    e.r = r.unwrap_or(e.r);
    e.rho = rho.unwrap_or(e.rho);
    if let Some(&k) = common.k.first() {
        e.k = k;
    }
    let e = cfg.expansion;
    PeakConfig::new(e.k, e.r, e.rho, Variant::Ppp)?;
    cfg.check_grid(e.k, e.r.max(e.rho))?;
    let gs = ground_state(&cfg)?;
    let kit = BumpKit::new(gs.profile, &cfg.params)?;
    let check = verify_expansion(&kit, e.k, e.r, e.rho, cfg.field_grid, e.cross_beta)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut csv = fs::File::create(cfg.out_dir.join("expansion.csv"))?;
    writeln!(csv, "k,r,rho,n,half_width,grid_interaction,pairwise_interaction,relative_error,cross_gap_per_peak,d2_g,pi_d2_g")?;
    writeln!(
        csv,
        "{},{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?}",
        check.k,
        check.r,
        check.rho,
        check.grid.n,
        check.grid.half_width,
        check.grid_interaction,
        check.pairwise.interaction,
        check.interaction_relative_error,
        check.cross_gap_per_peak,
        check.d2 * check.g,
        std::f64::consts::PI * check.d2 * check.g
    )?;
    let path = write_json(&cfg.out_dir, "expansion.json", &check)?;
    println!(
        "interaction rel. error {:.3e} (tol {}), cross gap / (π D₂ g) = {:.6} -> {}",
        check.interaction_relative_error,
        check.interaction_tolerance,
        check.ratio_to_pi_d2_g,
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ResidualSummary {
    rows: Vec<ResidualRow>,
    /// Slope of ln(per-peak residual) against ln r, per k.
    slopes_vs_r: Vec<(usize, Option<f64>)>,
    /// Slope of ln(per-peak residual) against ln k at each window constant.
    slopes_vs_k: Vec<(f64, Option<f64>)>,
    floor: f64,
    spacing: f64,
}

fn cmd_residual_scaling(common: &Common, cs: &[f64], h: f64) -> Result<ExitCode> {
    let mut cfg = load_config(common, true)?.expect("params required");
    if cfg.k_list.is_empty() {
        cfg.k_list = vec![4];
    }
    let m = cfg.params.m();
    // Validate every row before any grid work.
    let mut plan = Vec::new();
    for &k in &cfg.k_list {
        let scale = ((k as f64) * (k as f64).ln()).powf(1.0 / (1.0 - m));
        for &c in cs {
            let r = c * scale;
            PeakConfig::new(k, r, r, cfg.variant)?;
            let g = grid_for(r, h);
            cfg.field_grid = g;
            cfg.check_grid(k, r)?;
            plan.push((k, c, r));
        }
    }
    let gs = ground_state(&cfg)?;
    let kit = BumpKit::new(gs.profile, &cfg.params)?;
    let mut rows = Vec::new();
    for &(k, _, r) in &plan {
        rows.extend(residual_scaling_study(&kit, k, cfg.variant, &[(r, r)], h)?);
    }
    let slopes_vs_r = cfg
        .k_list
        .iter()
        .map(|&k| (k, loglog_slope(&rows.iter().filter(|x| x.k == k).map(|x| (x.r, x.per_peak)).collect::<Vec<_>>())))
        .collect();
    let slopes_vs_k = cs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let pts: Vec<_> = rows.iter().skip(i).step_by(cs.len()).map(|x| (x.k as f64, x.per_peak)).collect();
            (c, loglog_slope(&pts))
        })
        .collect();
    let floor = isolated_residual_floor(&kit, h)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut csv = fs::File::create(cfg.out_dir.join("residual_scaling.csv"))?;
    writeln!(csv, "k,r,rho,n,half_width,res1,res2,res3,per_peak,under_resolved")?;
    for x in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{:?},{:?},{:?},{:?},{}",
            x.k, x.r, x.rho, x.grid.n, x.grid.half_width, x.residual[0], x.residual[1], x.residual[2], x.per_peak, x.under_resolved
        )?;
        println!("k={} r={:.3} per-peak residual {:.6e}", x.k, x.r, x.per_peak);
    }
    write_json(&cfg.out_dir, "residual_scaling.json", &ResidualSummary { rows, slopes_vs_r, slopes_vs_k, floor, spacing: h })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_construct(common: &Common, r: f64, rho: f64) -> Result<ExitCode> {
    let cfg = load_config(common, true)?.expect("params required");
    if cfg.k_list.is_empty() {
        return Ok(usage_hint("construct"));
    }
    for &k in &cfg.k_list {
        PeakConfig::new(k, r, rho, cfg.variant)?;
        cfg.check_grid(k, r.max(rho))?;
    }
    let gs = ground_state(&cfg)?;
    let kit = BumpKit::new(gs.profile, &cfg.params)?;
    for &k in &cfg.k_list {
        let config = PeakConfig::new(k, r, rho, cfg.variant)?;
        let fields = assemble_ansatz(&config, &kit, cfg.field_grid)?;
        let dir = cfg.out_dir.join(format!("construct_k{k}_{}", cfg.variant));
        let mut symmetry = Vec::new();
        for (i, u) in fields.u.iter().enumerate() {
            save_field(&dir.join(format!("u{}.bin", i + 1)), u)?;
            let (pattern, ring) = if i < 2 { (cfg.variant.inner(), Ring::Inner) } else { (cfg.variant.outer(), Ring::Outer) };
            symmetry.push(symmetry_deviation(u, k, pattern, ring)?);
        }
        let state = GridState::new(fields)?;
        #[derive(Serialize)]
        struct Out {
            config: PeakConfig,
            energy: multipeak_core::EnergyBreakdown,
            residual: [f64; 3],
            symmetry: Vec<multipeak_core::SymmetryReport>,
        }
        let out = Out { config, energy: state.energy(&cfg.params)?, residual: state.residual(&cfg.params)?, symmetry };
        let path = write_json(&dir, "summary.json", &out)?;
        println!("k={k}: energy {:.9} -> {}", out.energy.total, path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(common: &Common, expansion: bool) -> Result<ExitCode> {
    let mut cfg = load_config(common, true)?.expect("params required");
    if cfg.k_list.is_empty() {
        return Ok(usage_hint("report"));
    }
    if expansion {
        cfg.expansion.enabled = true;
        cfg.validate().context("invalid configuration")?;
    }
    let gs = ground_state(&cfg)?;
    for report in build_reports(&cfg, &gs)? {
        let name = format!("report_k{}_{}.json", report.k, report.variant);
        let path = write_json(&cfg.out_dir, &name, &report)?;
        println!("k={} {}: ok={} -> {}", report.k, report.variant, report.status.ok, path.display());
        for f in &report.status.failures {
            println!("  failure: {f}");
        }
    }
    // Section failures are recorded in the documents, not in the exit code.
    Ok(ExitCode::SUCCESS)
}

fn cmd_ring_kernel(common: &Common, xs: &[f64], ys: &[f64]) -> Result<ExitCode> {
    if common.k.is_empty() {
        return Ok(usage_hint("ring-kernel"));
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "k,x,y,g,lower_bound,upper_bound_distance,upper_bound_log,diagonal_ratio")?;
    for &k in &common.k {
        for &x in xs {
            for &y in ys {
                let b = ring_bounds(x, y, k)?;
                let opt = |v: Option<f64>| v.map(|v| format!("{v:?}")).unwrap_or_default();
                writeln!(
                    out,
                    "{k},{x},{y},{:?},{},{},{},{}",
                    b.value,
                    opt(b.lower_bound),
                    opt(b.upper_bound_distance),
                    opt(b.upper_bound_log),
                    opt(b.diagonal_ratio)
                )?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let result = match &cli.command {
        Command::GroundState => cmd_ground_state(c),
        Command::Constants => cmd_constants(c),
        Command::Landscape { nx, ny } => cmd_landscape(c, *nx, *ny),
        Command::VerifyExpansion { r, rho } => cmd_verify_expansion(c, *r, *rho),
        Command::ResidualScaling { c: cs, h } => cmd_residual_scaling(c, cs, *h),
        Command::Construct { r, rho } => cmd_construct(c, *r, *rho),
        Command::Report { expansion } => cmd_report(c, *expansion),
        Command::RingKernel { x, y } => cmd_ring_kernel(c, x, y),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
