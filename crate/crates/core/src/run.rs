//! Run configuration, the cached ground-state solve and per-`(k, variant)`
//! report assembly.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::configurations::{PeakConfig, Variant};
use crate::energy::{
    assemble_ansatz, isolated_bump, pairwise_energy, BumpKit, GridSpec, GridState, PairwiseEnergy, BOX_MARGIN,
};
use crate::error::{Error, Result};
use crate::ground_state::{ground_state_stats, solve_ground_state, GroundStateStats, SolverOptions};
use crate::io::{load_profile, save_profile};
use crate::landscape::{
    maximize_f, peak_radii, probe_local_maximum, theorem_conditions, CaseVerdict, MaximizerResult, PeakRadii,
    ProbeResult, SearchRegion, GRADIENT_TOLERANCE, LAMBDA_ONE_TOLERANCE,
};
use crate::profiles::SystemParams;
use crate::radial::{RadialGrid, RadialProfile};
use crate::reduced::{compute_constants, ReducedConstants};
use crate::ring_kernel::g_sum;

/// Largest ring size accepted for grid computations without `allow_large`.
pub const DESK_MAX_K: usize = 8;
/// Largest box half-width accepted without `allow_large`.
pub const DESK_MAX_HALF_WIDTH: f64 = 40.0;
/// Largest nodes-per-axis accepted without `allow_large`.
pub const DESK_MAX_N: usize = 192;

/// Relative step of the eight-point dominance probe.
pub const PROBE_STEP: f64 = 0.05;
/// Tolerance on the interaction part in the expansion check.
pub const EXPANSION_INTERACTION_TOLERANCE: f64 = 0.05;
/// Tolerance on the cross-term gap in the expansion check.
pub const EXPANSION_CROSS_TOLERANCE: f64 = 0.10;
/// Tolerance of the `M = 3K`, `P = 4K` identity suite.
pub const IDENTITY_TOLERANCE: f64 = 1e-3;

/// Constants `c₁ ≤ c₂` of the radius window `[c₁ s, c₂ s]`, `s = (k ln k)^{1/(1-m)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub c1: f64,
    pub c2: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { c1: 0.05, c2: 20.0 }
    }
}

/// Grid-versus-pairwise energy comparison settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpansionSpec {
    pub enabled: bool,
    pub k: usize,
    pub r: f64,
    pub rho: f64,
    /// `β_13 = β_23` used to switch the cross term on.
    pub cross_beta: f64,
}

impl Default for ExpansionSpec {
    fn default() -> Self {
        Self { enabled: false, k: 6, r: 25.0, rho: 25.0, cross_beta: 0.1 }
    }
}

fn default_field_grid() -> GridSpec {
    GridSpec { half_width: 36.0, n: 128 }
}

fn default_variant() -> Variant {
    Variant::Ppp
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_cache() -> PathBuf {
    PathBuf::from("cache")
}

/// Everything a run depends on. Every field except `params` has a default,
/// and the effective values are echoed into each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: SystemParams,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub radial_grid: RadialGrid,
    #[serde(default = "default_field_grid")]
    pub field_grid: GridSpec,
    #[serde(default)]
    pub k_list: Vec<usize>,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default)]
    pub expansion: ExpansionSpec,
    #[serde(default)]
    pub allow_large: bool,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default = "default_cache")]
    pub cache_dir: PathBuf,
}

impl RunConfig {
    pub fn new(params: SystemParams) -> Self {
        Self {
            params,
            solver: SolverOptions::default(),
            radial_grid: RadialGrid::default(),
            field_grid: default_field_grid(),
            k_list: Vec::new(),
            variant: default_variant(),
            window: WindowSpec::default(),
            expansion: ExpansionSpec::default(),
            allow_large: false,
            out_dir: default_out(),
            cache_dir: default_cache(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Cheap structural checks; nothing is solved before these pass.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        RadialGrid::new(self.radial_grid.r_max(), self.radial_grid.n_points())?;
        if !(self.solver.tolerance > 0.0) || self.solver.max_iterations == 0 {
            return Err(Error::InvalidParams("solver needs a positive tolerance and iteration budget".into()));
        }
        if !(self.window.c1 > 0.0 && self.window.c2 >= self.window.c1 && self.window.c2.is_finite()) {
            return Err(Error::InvalidParams(format!("window needs 0 < c1 <= c2, got {:?}", self.window)));
        }
        for &k in &self.k_list {
            if k < 2 {
                return Err(Error::Domain(format!("reports need k >= 2, got {k}")));
            }
            if self.variant.needs_even_k() && k % 2 == 1 {
                return Err(Error::Parity(format!("variant {} needs even k, got {k}", self.variant)));
            }
        }
        if self.expansion.enabled {
            let e = &self.expansion;
            PeakConfig::new(e.k, e.r, e.rho, Variant::Ppp)?;
            self.check_grid(e.k, e.r.max(e.rho))?;
        }
        Ok(())
    }

    /// Refuses grid work outside the desk envelope unless `allow_large` is set,
    /// and always refuses boxes without the required margin.
    pub fn check_grid(&self, k: usize, reach: f64) -> Result<()> {
        let g = self.field_grid;
        if !(g.half_width > 0.0 && g.n >= 2) {
            return Err(Error::InvalidGrid(format!("bad field grid {g:?}")));
        }
        if reach + BOX_MARGIN > g.half_width {
            return Err(Error::Geometry(format!(
                "half-width {} is below max(r, ρ) + {BOX_MARGIN} = {}",
                g.half_width,
                reach + BOX_MARGIN
            )));
        }
        if !self.allow_large && (k > DESK_MAX_K || g.half_width > DESK_MAX_HALF_WIDTH || g.n > DESK_MAX_N) {
            return Err(Error::Range(format!(
                "k = {k}, L = {}, n = {} exceeds the desk envelope (k <= {DESK_MAX_K}, L <= {DESK_MAX_HALF_WIDTH}, n <= {DESK_MAX_N}); pass allow_large to override",
                g.half_width, g.n
            )));
        }
        Ok(())
    }

    pub fn cache_path(&self) -> PathBuf {
        self.cache_dir.join(format!(
            "ground_state_rmax{}_n{}_tol{:e}.csv",
            self.radial_grid.r_max(),
            self.radial_grid.n_points(),
            self.solver.tolerance
        ))
    }
}

/// A ground state with its statistics and where it came from.
#[derive(Debug, Clone)]
pub struct GroundStateRun {
    pub profile: RadialProfile,
    pub stats: GroundStateStats,
    pub from_cache: bool,
    pub warnings: Vec<String>,
}

/// Loads the cached ground state for `config`, or solves and caches it.
/// An unreadable or corrupted cache produces a warning and a fresh solve.
pub fn ground_state_cached(config: &RunConfig) -> Result<GroundStateRun> {
    let path = config.cache_path();
    let mut warnings = Vec::new();
    if path.exists() {
        match load_profile(&path) {
            Ok(p) if p.grid() == &config.radial_grid => {
                let stats = ground_state_stats(&p)?;
                return Ok(GroundStateRun { profile: p, stats, from_cache: true, warnings });
            }
            Ok(_) => warnings.push(format!("cache {} holds a different grid; re-solving", path.display())),
            Err(e) => warnings.push(format!("cache {} rejected ({e}); re-solving", path.display())),
        }
    }
    let profile = solve_ground_state(&config.radial_grid, &config.solver)?;
    let stats = ground_state_stats(&profile)?;
    if let Err(e) = save_profile(&path, &profile) {
        warnings.push(format!("could not write cache {}: {e}", path.display()));
    }
    Ok(GroundStateRun { profile, stats, from_cache: false, warnings })
}

/// `M/K - 3` and `P/K - 4`, relative.
pub fn identity_errors(stats: &GroundStateStats) -> (f64, f64) {
    ((stats.mass / stats.kinetic - 3.0).abs() / 3.0, (stats.potential / stats.kinetic - 4.0).abs() / 4.0)
}

/// Outcome of one report section: a value or the error that prevented it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section<T> {
    pub value: Option<T>,
    pub error: Option<String>,
}

impl<T> Section<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Self { value: Some(v), error: None },
            Err(e) => Self { value: None, error: Some(e.to_string()) },
        }
    }

    fn skipped(why: &str) -> Self {
        Self { value: None, error: Some(format!("skipped: {why}")) }
    }
}

/// Grid energy against the pairwise expansion at one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub k: usize,
    pub r: f64,
    pub rho: f64,
    pub grid: GridSpec,
    /// Grid energy of the ring minus the grid energies of its isolated bumps.
    pub grid_interaction: f64,
    pub pairwise: PairwiseEnergy,
    /// `|grid_interaction - pairwise.interaction| / |pairwise.interaction|`.
    pub interaction_relative_error: f64,
    pub interaction_tolerance: f64,
    pub interaction_ok: bool,
    pub cross_beta: f64,
    /// Grid energy with `β_13 = β_23 = cross_beta` minus the energy with both zero.
    pub cross_gap: f64,
    /// `cross_gap / k`.
    pub cross_gap_per_peak: f64,
    pub d2: f64,
    pub g: f64,
    /// `-cross_gap_per_peak / (D₂ g)`.
    pub ratio_to_d2_g: f64,
    /// `-cross_gap_per_peak / (π D₂ g)`, the normalization used by the reduced model.
    pub ratio_to_pi_d2_g: f64,
    pub cross_tolerance: f64,
    /// `|ratio_to_pi_d2_g - 1| <= cross_tolerance`.
    pub cross_ok: bool,
}

/// Compares grid and pairwise energies of a positive-sign ring at `(k, r, ρ)`.
pub fn verify_expansion(kit: &BumpKit, k: usize, r: f64, rho: f64, grid: GridSpec, cross_beta: f64) -> Result<ExpansionCheck> {
    let config = PeakConfig::new(k, r, rho, Variant::Ppp)?;
    let mut off = kit.params().clone();
    off.beta13 = 0.0;
    off.beta23 = 0.0;
    let mut on = off.clone();
    on.beta13 = cross_beta;
    on.beta23 = cross_beta;
    on.validate()?;
    let kit_off = kit.with_params(&off)?;

    let state = GridState::new(assemble_ansatz(&config, &kit_off, grid)?)?;
    let e_off = state.energy(&off)?;
    let e_on = state.energy(&on)?;

    // Isolated bumps share the global lattice so discretization errors cancel.
    let h = grid.spacing();
    let n_local = ((2.0 * (BOX_MARGIN + 4.0) / h).ceil() as usize).div_ceil(8) * 8;
    let mut isolated = 0.0;
    let bumps = config
        .inner_centers()
        .iter()
        .map(|c| (*c, false))
        .chain(config.outer_centers().iter().map(|c| (*c, true)));
    for (c, outer) in bumps {
        let fields = isolated_bump(&kit_off, &grid, c, n_local, outer)?;
        isolated += GridState::new(fields)?.energy(&off)?.total;
    }
    let grid_interaction = e_off.total - isolated;
    let pairwise = pairwise_energy(&config, &kit_off)?;
    let interaction_relative_error = (grid_interaction - pairwise.interaction).abs() / pairwise.interaction.abs();

    let cross_gap = e_on.total - e_off.total;
    let cross_gap_per_peak = cross_gap / k as f64;
    let d2 = compute_constants(&on, kit.stats())?.d2;
    let g = g_sum(r, rho, k)?;
    let ratio_to_d2_g = -cross_gap_per_peak / (d2 * g);
    let ratio_to_pi_d2_g = ratio_to_d2_g / PI;
    Ok(ExpansionCheck {
        k,
        r,
        rho,
        grid,
        grid_interaction,
        pairwise,
        interaction_relative_error,
        interaction_tolerance: EXPANSION_INTERACTION_TOLERANCE,
        interaction_ok: interaction_relative_error < EXPANSION_INTERACTION_TOLERANCE,
        cross_beta,
        cross_gap,
        cross_gap_per_peak,
        d2,
        g,
        ratio_to_d2_g,
        ratio_to_pi_d2_g,
        cross_tolerance: EXPANSION_CROSS_TOLERANCE,
        cross_ok: (ratio_to_pi_d2_g - 1.0).abs() <= EXPANSION_CROSS_TOLERANCE,
    })
}

/// Tolerances every numeric field of a report was checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub identity: f64,
    pub gradient: f64,
    pub lambda_one: f64,
    pub probe_step: f64,
    pub expansion_interaction: f64,
    pub expansion_cross: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: IDENTITY_TOLERANCE,
            gradient: GRADIENT_TOLERANCE,
            lambda_one: LAMBDA_ONE_TOLERANCE,
            probe_step: PROBE_STEP,
            expansion_interaction: EXPANSION_INTERACTION_TOLERANCE,
            expansion_cross: EXPANSION_CROSS_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportStatus {
    /// Every section produced a value and every check passed.
    pub ok: bool,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

/// Composite report for one `(k, variant)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub k: usize,
    pub variant: Variant,
    pub config: RunConfig,
    pub tolerances: Tolerances,
    pub ground_state: Section<GroundStateStats>,
    pub constants: Section<ReducedConstants>,
    pub verdict: Section<CaseVerdict>,
    pub maximizer: Section<MaximizerResult>,
    pub peak_radii: Section<PeakRadii>,
    /// Pairwise energy (radius-dependent part) at `(r*, ρ*)` and its eight ±5% neighbours.
    pub probe: Section<ProbeResult>,
    pub expansion: Option<Section<ExpansionCheck>>,
    pub status: ReportStatus,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Pairwise energy minus its constant self part at `(r, ρ)`.
pub fn probe_energy(kit: &BumpKit, k: usize, variant: Variant, r: f64, rho: f64) -> Result<f64> {
    Ok(pairwise_energy(&PeakConfig::new(k, r, rho, variant)?, kit)?.radius_dependent())
}

/// Builds the reports for every `k` in the config. Section failures are
/// recorded in the report; only an invalid config is an error.
pub fn build_reports(config: &RunConfig, gs: &GroundStateRun) -> Result<Vec<Report>> {
    config.validate()?;
    let kit = BumpKit::new(gs.profile.clone(), &config.params);
    let constants = compute_constants(&config.params, &gs.stats);
    let expansion = if config.expansion.enabled {
        let e = config.expansion;
        let r = kit
            .as_ref()
            .map_err(|e| Error::Contract(e.to_string()))
            .and_then(|kit| verify_expansion(kit, e.k, e.r, e.rho, config.field_grid, e.cross_beta));
        Some(Section::from_result(r))
    } else {
        None
    };
    let mut out = Vec::with_capacity(config.k_list.len());
    for &k in &config.k_list {
        let mut failures = Vec::new();
        let (ident_m, ident_p) = identity_errors(&gs.stats);
        if ident_m.max(ident_p) > IDENTITY_TOLERANCE {
            failures.push(format!("ground-state identities off by {:.2e}", ident_m.max(ident_p)));
        }
        let constants_section = match &constants {
            Ok(c) => Section { value: Some(c.clone()), error: None },
            Err(e) => Section { value: None, error: Some(e.to_string()) },
        };
        let (verdict, maximizer, radii, probe) = match &constants {
            Ok(c) => {
                let verdict = theorem_conditions(&config.params, c);
                let region = SearchRegion::around_separable_maximum(c);
                let maximizer = maximize_f(k, c, &region);
                let radii = maximizer
                    .as_ref()
                    .map_err(|e| Error::Contract(e.to_string()))
                    .and_then(|m| peak_radii(k, c, m, config.window.c1, config.window.c2));
                let probe = match (&radii, &kit) {
                    (Ok(p), Ok(kit)) => Section::from_result(probe_local_maximum(p.r_star, p.rho_star, PROBE_STEP, |r, rho| {
                        probe_energy(kit, k, config.variant, r, rho)
                    })),
                    (Err(_), _) => Section::skipped("no peak radii"),
                    (_, Err(e)) => Section::skipped(&e.to_string()),
                };
                (
                    Section::from_result(Ok(verdict)),
                    Section::from_result(maximizer),
                    Section::from_result(radii),
                    probe,
                )
            }
            Err(_) => (
                Section::skipped("no constants"),
                Section::skipped("no constants"),
                Section::skipped("no constants"),
                Section::skipped("no constants"),
            ),
        };
        for (name, err) in [
            ("constants", &constants_section.error),
            ("verdict", &verdict.error),
            ("maximizer", &maximizer.error),
            ("peak_radii", &radii.error),
            ("probe", &probe.error),
        ] {
            if let Some(e) = err {
                failures.push(format!("{name}: {e}"));
            }
        }
        if let Some(m) = &maximizer.value {
            if !m.converged {
                failures.push("maximizer did not converge to an interior critical point".into());
            }
        }
        if let Some(p) = &radii.value {
            if !p.in_window {
                failures.push("peak radii outside the S_k window".into());
            }
        }
        if let Some(p) = &probe.value {
            if p.dominated < 8 {
                failures.push(format!("pairwise energy dominates only {}/8 probes", p.dominated));
            }
        }
        if let Some(sec) = &expansion {
            match (&sec.value, &sec.error) {
                (Some(x), _) if !(x.interaction_ok && x.cross_ok) => failures.push("expansion check outside tolerance".into()),
                (_, Some(e)) => failures.push(format!("expansion: {e}")),
                _ => {}
            }
        }
        out.push(Report {
            k,
            variant: config.variant,
            config: config.clone(),
            tolerances: Tolerances::default(),
            ground_state: Section { value: Some(gs.stats), error: None },
            constants: constants_section,
            verdict,
            maximizer,
            peak_radii: radii,
            probe,
            expansion: expansion.clone(),
            status: ReportStatus { ok: failures.is_empty(), failures, warnings: gs.warnings.clone() },
        });
    }
    Ok(out)
}
