//! Ansatz assembly, the full grid energy, PDE residuals and the
//! semi-analytic pairwise energy.
//!
//! The energy of `(u_1, u_2, u_3)` is
//! `Σ_i [½∫|∇u_i|² + ½∫V_i u_i² - (μ_i/4)∫φ_{u_i} u_i²] - ½ Σ_{i<j} β_ij ∫φ_{u_j} u_i²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::configurations::PeakConfig;
use crate::convolution::FreeSpaceConvolver;
use crate::error::{Error, Result};
use crate::field::Field3D;
use crate::ground_state::{ground_state_stats, GroundStateStats};
use crate::potential::{radial_potential, two_center_analytic, two_center_integral};
use crate::profiles::{scaled_bump, SyncCoefficients, SystemParams};
use crate::quad::pairwise_sum;
use crate::radial::{RadialProfile, Tail};

/// Required clearance between the outermost peak and the box faces.
pub const BOX_MARGIN: f64 = 10.0;
/// Boundary-decay tolerance used for grid energies; with [`BOX_MARGIN`] the
/// squared bumps are about `1e-6` of their peak at the faces.
pub const ENERGY_BOUNDARY_TOLERANCE: f64 = 1e-5;

/// Cubic box `[-L, L]³` with `n` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }
}

/// `d ↦ ∫ f(x) g(x - d e)` with the far-field value precomputed.
///
/// Beyond the combined support radius the integral is `Q/d` (or zero), so
/// rings with millions of peaks cost one division per pair.
#[derive(Debug, Clone)]
pub struct PairIntegral {
    f: RadialProfile,
    g: RadialProfile,
    reach: f64,
    far_coefficient: f64,
}

impl PairIntegral {
    pub fn new(f: RadialProfile, g: RadialProfile) -> Result<Self> {
        let reach = f.r_max() + g.r_max();
        let far_coefficient = reach * two_center_integral(&f, &g, reach)?;
        Ok(Self { f, g, reach, far_coefficient })
    }

    pub fn eval(&self, d: f64) -> Result<f64> {
        if d >= self.reach {
            Ok(self.far_coefficient / d)
        } else {
            two_center_integral(&self.f, &self.g, d)
        }
    }
}

/// Radial building blocks shared by every energy evaluation.
#[derive(Debug, Clone)]
pub struct BumpKit {
    params: SystemParams,
    sync: SyncCoefficients,
    stats: GroundStateStats,
    w: RadialProfile,
    w_sq: RadialProfile,
    phi_w: RadialProfile,
    big_w: RadialProfile,
    big_w_sq: RadialProfile,
    /// `∫ φ_w w²(· - d)`
    t_w: PairIntegral,
    /// `∫ φ_W W²(· - d)`
    t_big_w: PairIntegral,
    /// `∫ φ_w W²(· - d)`
    t_mixed: PairIntegral,
    /// `∫ φ_w w · w(· - d)`
    o_w: PairIntegral,
    /// `∫ φ_W W · W(· - d)`
    o_big_w: PairIntegral,
}

impl BumpKit {
    pub fn new(w: RadialProfile, params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let sync = params.sync()?;
        let stats = ground_state_stats(&w)?;
        let w_sq = w.map(Tail::Zero, |_, v| v * v)?;
        let phi_w = radial_potential(&w)?.profile;
        let big_w = scaled_bump(&w, params.lambda, params.mu[2])?;
        let big_w_sq = big_w.map(Tail::Zero, |_, v| v * v)?;
        let phi_big_w = radial_potential(&big_w)?.profile;
        Ok(Self {
            params: params.clone(),
            sync,
            stats,
            t_w: PairIntegral::new(phi_w.clone(), w_sq.clone())?,
            t_big_w: PairIntegral::new(phi_big_w.clone(), big_w_sq.clone())?,
            t_mixed: PairIntegral::new(phi_w.clone(), big_w_sq.clone())?,
            o_w: PairIntegral::new(phi_w.product(&w, Tail::Zero)?, w.clone())?,
            o_big_w: PairIntegral::new(phi_big_w.product(&big_w, Tail::Zero)?, big_w.clone())?,
            w,
            w_sq,
            phi_w,
            big_w,
            big_w_sq,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn sync(&self) -> SyncCoefficients {
        self.sync
    }

    pub fn stats(&self) -> &GroundStateStats {
        &self.stats
    }

    pub fn w(&self) -> &RadialProfile {
        &self.w
    }

    pub fn big_w(&self) -> &RadialProfile {
        &self.big_w
    }

    pub fn phi_w(&self) -> &RadialProfile {
        &self.phi_w
    }

    /// `∫ φ_w(x) w²(x - d e)`.
    pub fn t_w(&self, d: f64) -> Result<f64> {
        self.t_w.eval(d)
    }

    /// `∫ φ_W(x) W²(x - d e)`.
    pub fn t_big_w(&self, d: f64) -> Result<f64> {
        self.t_big_w.eval(d)
    }

    /// `∫ φ_w(x) W²(x - d e)`.
    pub fn t_mixed(&self, d: f64) -> Result<f64> {
        self.t_mixed.eval(d)
    }

    /// Rebuilds the kit for new parameters, reusing the radial profiles
    /// when `λ` and `μ_3` are unchanged.
    pub fn with_params(&self, params: &SystemParams) -> Result<Self> {
        params.validate()?;
        if params.lambda != self.params.lambda || params.mu[2] != self.params.mu[2] {
            return Self::new(self.w.clone(), params);
        }
        let mut k = self.clone();
        k.params = params.clone();
        k.sync = params.sync()?;
        Ok(k)
    }
}

/// Adds `amplitude · p(|x - c|)` to `field` on the nodes within the support of `p`.
fn add_bump(field: &mut Field3D, c: [f64; 3], amplitude: f64, p: &RadialProfile) {
    let n = field.n();
    let h = field.spacing();
    let reach = p.r_max();
    let axes = field.axis_nodes();
    let range = |a: usize| -> (usize, usize) {
        let lo = ((c[a] - reach - axes[a][0]) / h).floor().max(0.0) as usize;
        let hi = (((c[a] + reach - axes[a][0]) / h).ceil().max(0.0) as usize + 1).min(n);
        (lo.min(n), hi)
    };
    let (x0, x1) = range(0);
    let (y0, y1) = range(1);
    let (z0, z1) = range(2);
    let r2max = reach * reach;
    for k in z0..z1 {
        let dz = axes[2][k] - c[2];
        for j in y0..y1 {
            let dy = axes[1][j] - c[1];
            let base = (j + n * k) * n;
            for i in x0..x1 {
                let dx = axes[0][i] - c[0];
                let r2 = dx * dx + dy * dy + dz * dz;
                if r2 <= r2max {
                    field.data_mut()[base + i] += amplitude * p.value_at(r2.sqrt());
                }
            }
        }
    }
}

/// Grid samples of the three components of a ring ansatz.
#[derive(Debug, Clone)]
pub struct AnsatzFields {
    pub config: Option<PeakConfig>,
    pub u: [Field3D; 3],
}

impl AnsatzFields {
    pub fn from_fields(u: [Field3D; 3]) -> Result<Self> {
        if !(u[0].same_geometry(&u[1]) && u[0].same_geometry(&u[2])) {
            return Err(Error::InvalidGrid("components live on different grids".into()));
        }
        Ok(Self { config: None, u })
    }
}

/// Samples `u_1 = α Σ s_j w(·-x^j)`, `u_2 = γ Σ s_j w(·-x^j)`, `u_3 = Σ s'_j W(·-y^j)`
/// on the box `grid` centred at the origin.
///
/// Fails with a geometry error unless every peak keeps [`BOX_MARGIN`] to the faces.
pub fn assemble_ansatz(config: &PeakConfig, kit: &BumpKit, grid: GridSpec) -> Result<AnsatzFields> {
    let reach = config.r().max(config.rho()) + BOX_MARGIN;
    if reach > grid.half_width {
        return Err(Error::Geometry(format!(
            "box half-width {} is below max(r, ρ) + {BOX_MARGIN} = {reach}",
            grid.half_width
        )));
    }
    let mut base = Field3D::zeros(grid.n, grid.half_width, [0.0; 3])?;
    let mut u3 = base.clone();
    for (c, s) in config.inner_centers().iter().zip(config.inner_signs()) {
        add_bump(&mut base, *c, *s, kit.w());
    }
    for (c, s) in config.outer_centers().iter().zip(config.outer_signs()) {
        add_bump(&mut u3, *c, *s, kit.big_w());
    }
    let sync = kit.sync();
    let u1 = base.map(|v| sync.alpha * v);
    let u2 = base.map(|v| sync.gamma * v);
    Ok(AnsatzFields { config: Some(config.clone()), u: [u1, u2, u3] })
}

/// A single synchronized bump `(αw, γw, 0)` or scaled bump `(0, 0, W)` at
/// `center`, on a box of `n` nodes that shares its lattice with `lattice`.
pub fn isolated_bump(kit: &BumpKit, lattice: &GridSpec, center: [f64; 3], n: usize, outer: bool) -> Result<AnsatzFields> {
    let h = lattice.spacing();
    let half = 0.5 * n as f64 * h;
    // Shift the local centre so its nodes coincide with the global ones.
    let mut c = [0.0; 3];
    for a in 0..3 {
        let offset = -lattice.half_width + half;
        let steps = ((center[a] - offset) / h).round();
        c[a] = offset + steps * h;
    }
    let zero = Field3D::zeros(n, half, c)?;
    let mut bump = zero.clone();
    if outer {
        add_bump(&mut bump, center, 1.0, kit.big_w());
        Ok(AnsatzFields { config: None, u: [zero.clone(), zero, bump] })
    } else {
        add_bump(&mut bump, center, 1.0, kit.w());
        let s = kit.sync();
        Ok(AnsatzFields { config: None, u: [bump.map(|v| s.alpha * v), bump.map(|v| s.gamma * v), zero] })
    }
}

/// Energy split into its parts; `total` is their signed sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `½∫|∇u_i|²`
    pub kinetic: [f64; 3],
    /// `½∫V_i u_i²`
    pub trap: [f64; 3],
    /// `-(μ_i/4) ∫φ_{u_i} u_i²`
    pub self_interaction: [f64; 3],
    /// `-½ β_12 ∫φ_{u_2} u_1²`
    pub cross_12: f64,
    /// `-½ β_13 ∫φ_{u_3} u_1²`
    pub cross_13: f64,
    /// `-½ β_23 ∫φ_{u_3} u_2²`
    pub cross_23: f64,
    pub total: f64,
}

/// Ansatz fields together with their Newtonian potentials `φ_{u_i}`.
///
/// The potentials do not depend on the couplings, so one state serves
/// energies and residuals for several parameter sets.
#[derive(Debug, Clone)]
pub struct GridState {
    pub fields: AnsatzFields,
    pub phi: [Field3D; 3],
}

fn squared(f: &Field3D) -> Field3D {
    f.map(|v| v * v)
}

impl GridState {
    /// Computes the three potentials (two FFT passes).
    pub fn new(fields: AnsatzFields) -> Result<Self> {
        let u = &fields.u;
        let conv = FreeSpaceConvolver::for_field(&u[0])?.with_boundary_tolerance(ENERGY_BOUNDARY_TOLERANCE);
        let sq: Vec<Field3D> = u.iter().map(squared).collect();
        let zero = |f: &Field3D| f.max_abs() == 0.0;
        let (p0, p1) = match (zero(&sq[0]), zero(&sq[1])) {
            (true, true) => (sq[0].clone(), sq[1].clone()),
            _ => conv.convolve_pair(&sq[0], &sq[1])?,
        };
        let p2 = if zero(&sq[2]) { sq[2].clone() } else { conv.convolve(&sq[2])? };
        Ok(Self { fields, phi: [p0, p1, p2] })
    }

    fn trap_potential(&self, params: &SystemParams, i: usize) -> Field3D {
        let p = params.potentials[i];
        Field3D::from_fn(self.fields.u[i].n(), self.fields.u[i].half_width(), self.fields.u[i].center(), |x| {
            p.value((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
        })
        .expect("geometry already validated")
    }

    /// Energy of the state for the given couplings and potentials.
    pub fn energy(&self, params: &SystemParams) -> Result<EnergyBreakdown> {
        let u = &self.fields.u;
        let h3 = u[0].spacing().powi(3);
        let mut kinetic = [0.0; 3];
        let mut trap = [0.0; 3];
        let mut self_interaction = [0.0; 3];
        for i in 0..3 {
            kinetic[i] = 0.5 * u[i].dirichlet_energy();
            let v = self.trap_potential(params, i);
            trap[i] = 0.5 * h3 * v.data().iter().zip(u[i].data()).map(|(v, x)| v * x * x).sum::<f64>();
            self_interaction[i] = -0.25 * params.mu[i] * weighted(&self.phi[i], &u[i], &u[i]);
        }
        let cross = |i: usize, j: usize| -0.5 * params.coupling(i, j) * weighted(&self.phi[j], &u[i], &u[i]);
        let cross_12 = cross(0, 1);
        let cross_13 = cross(0, 2);
        let cross_23 = cross(1, 2);
        let total = kinetic.iter().sum::<f64>()
            + trap.iter().sum::<f64>()
            + self_interaction.iter().sum::<f64>()
            + cross_12
            + cross_13
            + cross_23;
        if !total.is_finite() {
            return Err(Error::NonFinite("grid energy".into()));
        }
        Ok(EnergyBreakdown { kinetic, trap, self_interaction, cross_12, cross_13, cross_23, total })
    }

    /// `‖-Δ_h u_i + V_i u_i - Σ_j β_ij φ_{u_j} u_i‖_{L²}` for each component
    /// (seven-point Laplacian, `β_ii = μ_i`).
    pub fn residual(&self, params: &SystemParams) -> Result<[f64; 3]> {
        let u = &self.fields.u;
        let h3 = u[0].spacing().powi(3);
        let mut out = [0.0; 3];
        for i in 0..3 {
            if u[i].max_abs() == 0.0 {
                continue;
            }
            let lap = u[i].laplacian();
            let v = self.trap_potential(params, i);
            let b = [params.coupling(i, 0), params.coupling(i, 1), params.coupling(i, 2)];
            let mut acc = 0.0;
            for idx in 0..u[i].data().len() {
                let x = u[i].data()[idx];
                let nonlocal = b[0] * self.phi[0].data()[idx] + b[1] * self.phi[1].data()[idx] + b[2] * self.phi[2].data()[idx];
                let r = -lap.data()[idx] + v.data()[idx] * x - nonlocal * x;
                acc += r * r;
            }
            out[i] = (acc * h3).sqrt();
        }
        Ok(out)
    }
}

fn weighted(phi: &Field3D, a: &Field3D, b: &Field3D) -> f64 {
    let h3 = a.spacing().powi(3);
    h3 * phi.data().iter().zip(a.data().iter().zip(b.data())).map(|(p, (x, y))| p * x * y).sum::<f64>()
}

/// Full energy of the fields (potentials computed on the fly).
pub fn full_energy(fields: &AnsatzFields, params: &SystemParams) -> Result<EnergyBreakdown> {
    GridState::new(fields.clone())?.energy(params)
}

/// PDE residual norms of the fields.
pub fn pde_residual(fields: &AnsatzFields, params: &SystemParams) -> Result<[f64; 3]> {
    GridState::new(fields.clone())?.residual(params)
}

/// Semi-analytic energy of a ring configuration from radial two-centre integrals.
///
/// Each bump contributes its isolated energy; each pair of bumps on a ring
/// contributes the Coulomb interaction of their densities plus the signed
/// overlap term, and each inner/outer pair the coupling-weighted Coulomb
/// interaction. Overlaps of three or more bumps are neglected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseEnergy {
    /// `k (A₀ + Ã)`.
    pub self_part: f64,
    /// Potential terms `½∫(V_i - λ_i) u_i²` summed over peaks.
    pub potential_part: f64,
    pub inner_ring: f64,
    pub outer_ring: f64,
    pub mixed: f64,
    /// `inner_ring + outer_ring + mixed`.
    pub interaction: f64,
    pub total: f64,
}

impl PairwiseEnergy {
    /// Everything that depends on the radii: `potential_part + interaction`.
    pub fn radius_dependent(&self) -> f64 {
        self.potential_part + self.interaction
    }
}

/// Pairwise energy of `config` built from the radial data in `kit`.
pub fn pairwise_energy(config: &PeakConfig, kit: &BumpKit) -> Result<PairwiseEnergy> {
    let params = kit.params();
    let k = config.k();
    let kf = k as f64;
    let sync = kit.sync();
    let a2g2 = sync.alpha2_plus_gamma2();
    let mu3 = params.mu[2];
    let p_w = kit.stats().potential;
    let self_part = kf * (0.25 * a2g2 * p_w + params.lambda.powf(1.5) * p_w / (4.0 * mu3));

    let trap = |i: usize, profile: &RadialProfile, d: f64| -> Result<f64> {
        let p = params.potentials[i];
        if p.effective_a() == 0.0 {
            return Ok(0.0);
        }
        two_center_analytic(|s| p.excess(s), profile, d)
    };
    let a2 = sync.alpha * sync.alpha;
    let g2 = sync.gamma * sync.gamma;
    let per_peak_trap = 0.5 * a2 * trap(0, &kit.w_sq, config.r())?
        + 0.5 * g2 * trap(1, &kit.w_sq, config.r())?
        + 0.5 * trap(2, &kit.big_w_sq, config.rho())?;
    let potential_part = kf * per_peak_trap;

    // Peak 1 against peak 1 + j on the same ring, at distance 2 r sin(jπ/k).
    let inner_sign = config.variant().inner().rotation_sign();
    let outer_sign = config.variant().outer().rotation_sign();
    let mut inner_terms = Vec::with_capacity(k.saturating_sub(1));
    let mut outer_terms = Vec::with_capacity(k.saturating_sub(1));
    for j in 1..k {
        let s = (j as f64 * PI / kf).sin();
        let sign_in = inner_sign.powi(j as i32);
        let sign_out = outer_sign.powi(j as i32);
        let d = 2.0 * config.r() * s;
        let overlap = kit.o_w.eval(d)?;
        inner_terms.push(-a2g2 * (0.5 * kit.t_w(d)? + sign_in * overlap));
        let d = 2.0 * config.rho() * s;
        let overlap = kit.o_big_w.eval(d)?;
        outer_terms.push(-mu3 * (0.5 * kit.t_big_w(d)? + sign_out * overlap));
    }
    let inner_ring = 0.5 * kf * pairwise_sum(&inner_terms);
    let outer_ring = 0.5 * kf * pairwise_sum(&outer_terms);

    let coupling = 0.5 * (params.beta13 * a2 + params.beta23 * g2);
    let mixed = if coupling == 0.0 {
        0.0
    } else {
        let x1 = config.inner_centers()[0];
        let terms = config
            .outer_centers()
            .iter()
            .map(|y| {
                let d = ((x1[0] - y[0]).powi(2) + (x1[1] - y[1]).powi(2)).sqrt();
                kit.t_mixed(d).map(|t| -coupling * t)
            })
            .collect::<Result<Vec<_>>>()?;
        kf * pairwise_sum(&terms)
    };
    let interaction = inner_ring + outer_ring + mixed;
    Ok(PairwiseEnergy {
        self_part,
        potential_part,
        inner_ring,
        outer_ring,
        mixed,
        interaction,
        total: self_part + potential_part + interaction,
    })
}

/// One row of [`residual_scaling_study`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub k: usize,
    pub r: f64,
    pub rho: f64,
    pub grid: GridSpec,
    /// Residual norm per component.
    pub residual: [f64; 3],
    /// `‖(res_1, res_2, res_3)‖ / √k`.
    pub per_peak: f64,
    /// Set when the grid spacing exceeds [`UNDER_RESOLVED_SPACING`].
    pub under_resolved: bool,
}

/// Spacing above which bumps of unit width are considered unresolved.
pub const UNDER_RESOLVED_SPACING: f64 = 0.5;

/// Box that holds a configuration with radii up to `reach` at spacing `h`
/// (node count rounded up to a multiple of 8).
pub fn grid_for(reach: f64, h: f64) -> GridSpec {
    let half = reach + BOX_MARGIN;
    let n = ((2.0 * half / h).ceil() as usize).div_ceil(8) * 8;
    GridSpec { half_width: 0.5 * n as f64 * h, n }
}

/// Per-peak residual of the ansatz for each `(r, ρ)` in `radii`, on boxes of spacing `h`.
pub fn residual_scaling_study(
    kit: &BumpKit,
    k: usize,
    variant: crate::configurations::Variant,
    radii: &[(f64, f64)],
    h: f64,
) -> Result<Vec<ResidualRow>> {
    radii
        .iter()
        .map(|&(r, rho)| {
            let config = PeakConfig::new(k, r, rho, variant)?;
            let grid = grid_for(r.max(rho), h);
            let fields = assemble_ansatz(&config, kit, grid)?;
            let residual = GridState::new(fields)?.residual(kit.params())?;
            let per_peak = residual.iter().map(|x| x * x).sum::<f64>().sqrt() / (k as f64).sqrt();
            Ok(ResidualRow { k, r, rho, grid, residual, per_peak, under_resolved: h > UNDER_RESOLVED_SPACING })
        })
        .collect()
}

/// Residual of one isolated synchronized bump plus one isolated scaled bump
/// on the lattice of spacing `h`: the discretization floor of a single peak pair.
pub fn isolated_residual_floor(kit: &BumpKit, h: f64) -> Result<f64> {
    let grid = grid_for(0.0, h);
    let mut total = 0.0;
    for outer in [false, true] {
        let fields = isolated_bump(kit, &grid, [0.0; 3], grid.n, outer)?;
        let r = GridState::new(fields)?.residual(kit.params())?;
        total += r.iter().map(|x| x * x).sum::<f64>();
    }
    Ok(total.sqrt())
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable points (both coordinates positive).
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
