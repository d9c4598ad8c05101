//! Free-space Coulomb convolution `φ = |x|^{-1} * ρ` on a cubic grid.
//!
//! Hockney's method: the density is zero-padded to a `(2n)³` box and
//! convolved cyclically with the Green's function sampled at the wrapped
//! node offsets, which reproduces the aperiodic discrete convolution
//! exactly. The singular self-cell uses the cell average of `1/|x|`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::Field3D;

/// `∫_{[-1/2,1/2]³} |x|^{-1} dx = 3 ln(2 + √3) - π/2`.
pub fn unit_cell_coulomb_average() -> f64 {
    3.0 * (2.0 + 3f64.sqrt()).ln() - std::f64::consts::FRAC_PI_2
}

/// Default bound on `max|ρ|` over the box faces relative to `max|ρ|`.
pub const DEFAULT_BOUNDARY_TOLERANCE: f64 = 1e-10;

/// Precomputed Green's function spectrum for one grid size and spacing.
pub struct FreeSpaceConvolver {
    n: usize,
    spacing: f64,
    big: usize,
    kernel_hat: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    boundary_tolerance: f64,
}

impl std::fmt::Debug for FreeSpaceConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FreeSpaceConvolver")
            .field("n", &self.n)
            .field("spacing", &self.spacing)
            .field("boundary_tolerance", &self.boundary_tolerance)
            .finish()
    }
}

/// Which part of the padded cube a pass of 1D transforms must touch.
#[derive(Clone, Copy)]
enum Extent {
    Full,
    Low,
}

impl FreeSpaceConvolver {
    pub fn new(n: usize, spacing: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes per axis, got {n}")));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        let big = 2 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(big);
        let inverse = planner.plan_fft_inverse(big);
        let mut conv = Self {
            n,
            spacing,
            big,
            kernel_hat: Vec::new(),
            forward,
            inverse,
            boundary_tolerance: DEFAULT_BOUNDARY_TOLERANCE,
        };
        conv.kernel_hat = conv.kernel_spectrum();
        Ok(conv)
    }

    /// Convolver matching the grid of `field`.
    pub fn for_field(field: &Field3D) -> Result<Self> {
        Self::new(field.n(), field.spacing())
    }

    /// Overrides the boundary-decay contract (see [`FreeSpaceConvolver::convolve`]).
    pub fn with_boundary_tolerance(mut self, tol: f64) -> Self {
        self.boundary_tolerance = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn kernel_spectrum(&self) -> Vec<f64> {
        let big = self.big;
        let h = self.spacing;
        let self_cell = unit_cell_coulomb_average() / h;
        let wrap = |m: usize| -> f64 {
            let o = if m < self.n { m as f64 } else { m as f64 - big as f64 };
            o * h
        };
        let mut buf = vec![Complex64::new(0.0, 0.0); big * big * big];
        for k in 0..big {
            let z = wrap(k);
            for j in 0..big {
                let y = wrap(j);
                let row = (j + big * k) * big;
                for i in 0..big {
                    let x = wrap(i);
                    let r = (x * x + y * y + z * z).sqrt();
                    let g = if r == 0.0 { self_cell } else { 1.0 / r };
                    buf[row + i] = Complex64::new(g * h * h * h, 0.0);
                }
            }
        }
        self.transform(&mut buf, true, Extent::Full);
        // The kernel is real and even, so its spectrum is real.
        buf.iter().map(|c| c.re).collect()
    }

    /// 3D transform of the padded cube. `Extent::Low` skips lanes that are
    /// known to be zero on input (forward) or not needed on output (inverse).
    fn transform(&self, buf: &mut [Complex64], forward: bool, extent: Extent) {
        let big = self.big;
        let n = self.n;
        let plan = if forward { &self.forward } else { &self.inverse };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let mut lane = vec![Complex64::new(0.0, 0.0); big * big];
        let low = matches!(extent, Extent::Low);

        let pass_x = |buf: &mut [Complex64], scratch: &mut [Complex64]| {
            for k in 0..big {
                for j in 0..big {
                    if low && (j >= n || k >= n) {
                        continue;
                    }
                    let start = (j + big * k) * big;
                    plan.process_with_scratch(&mut buf[start..start + big], scratch);
                }
            }
        };
        let pass_y = |buf: &mut [Complex64], scratch: &mut [Complex64], lane: &mut [Complex64]| {
            for k in 0..big {
                if low && k >= n {
                    continue;
                }
                let slab = &mut buf[k * big * big..(k + 1) * big * big];
                for j in 0..big {
                    for i in 0..big {
                        lane[i * big + j] = slab[j * big + i];
                    }
                }
                plan.process_with_scratch(lane, scratch);
                for j in 0..big {
                    for i in 0..big {
                        slab[j * big + i] = lane[i * big + j];
                    }
                }
            }
        };
        let pass_z = |buf: &mut [Complex64], scratch: &mut [Complex64], lane: &mut [Complex64]| {
            for j in 0..big {
                for k in 0..big {
                    let src = (j + big * k) * big;
                    for i in 0..big {
                        lane[i * big + k] = buf[src + i];
                    }
                }
                plan.process_with_scratch(lane, scratch);
                for k in 0..big {
                    let dst = (j + big * k) * big;
                    for i in 0..big {
                        buf[dst + i] = lane[i * big + k];
                    }
                }
            }
        };

        if forward {
            pass_x(buf, &mut scratch);
            pass_y(buf, &mut scratch, &mut lane);
            pass_z(buf, &mut scratch, &mut lane);
        } else {
            pass_z(buf, &mut scratch, &mut lane);
            pass_y(buf, &mut scratch, &mut lane);
            pass_x(buf, &mut scratch);
        }
    }

    fn check(&self, field: &Field3D, name: &str) -> Result<()> {
        if field.n() != self.n || (field.spacing() - self.spacing).abs() > 1e-12 * self.spacing {
            return Err(Error::InvalidGrid(format!("{name} does not match the convolver grid")));
        }
        if field.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(name.to_string()));
        }
        let max = field.max_abs();
        if max > 0.0 && field.boundary_max_abs() > self.boundary_tolerance * max {
            return Err(Error::Contract(format!(
                "{name} does not decay at the box boundary ({:.2e} of its maximum, limit {:.0e})",
                field.boundary_max_abs() / max,
                self.boundary_tolerance
            )));
        }
        Ok(())
    }

    /// `φ(x_i) = h³ Σ_j G(x_i - x_j) ρ_j`.
    ///
    /// The density must decay to the boundary tolerance on the box faces,
    /// since everything outside the box is treated as zero.
    pub fn convolve(&self, density: &Field3D) -> Result<Field3D> {
        self.check(density, "density")?;
        Ok(self.run(density, None).0)
    }

    /// Two convolutions for the price of one: `a` rides in the real part and
    /// `b` in the imaginary part, which the real kernel keeps separate.
    pub fn convolve_pair(&self, a: &Field3D, b: &Field3D) -> Result<(Field3D, Field3D)> {
        self.check(a, "first density")?;
        self.check(b, "second density")?;
        if !a.same_geometry(b) {
            return Err(Error::InvalidGrid("paired densities live on different grids".into()));
        }
        let (pa, pb) = self.run(a, Some(b));
        Ok((pa, pb.expect("paired run returns two fields")))
    }

    fn run(&self, a: &Field3D, b: Option<&Field3D>) -> (Field3D, Option<Field3D>) {
        let big = self.big;
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); big * big * big];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let src = a.index(i, j, k);
                    let im = b.map_or(0.0, |b| b.data()[src]);
                    buf[i + big * (j + big * k)] = Complex64::new(a.data()[src], im);
                }
            }
        }
        self.transform(&mut buf, true, Extent::Low);
        for (c, g) in buf.iter_mut().zip(&self.kernel_hat) {
            *c *= *g;
        }
        self.transform(&mut buf, false, Extent::Low);
        let norm = 1.0 / (big * big * big) as f64;
        let mut out_a = a.clone();
        let mut out_b = b.cloned();
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let c = buf[i + big * (j + big * k)];
                    let dst = a.index(i, j, k);
                    out_a.data_mut()[dst] = c.re * norm;
                    if let Some(ob) = out_b.as_mut() {
                        ob.data_mut()[dst] = c.im * norm;
                    }
                }
            }
        }
        (out_a, out_b)
    }
}

/// Newtonian potential of `density` on its own grid.
pub fn grid_potential(density: &Field3D) -> Result<Field3D> {
    FreeSpaceConvolver::for_field(density)?.convolve(density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{GL8_NODES, GL8_WEIGHTS};

    #[test]
    fn self_cell_average_matches_quadrature() {
        // Split the cube into 24 congruent pyramids with apex at the origin;
        // on each, x = t, y = t s, z = t u maps the singular integrand to the
        // smooth 1/sqrt(1 + s² + u²) on the unit square. Total = 3 ∫∫ ... .
        let mut j = 0.0;
        let panels = 8;
        for pa in 0..panels {
            for pb in 0..panels {
                for (xa, wa) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
                    for (xb, wb) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
                        let s = (pa as f64 + 0.5 + 0.5 * xa) / panels as f64;
                        let u = (pb as f64 + 0.5 + 0.5 * xb) / panels as f64;
                        j += wa * wb * 0.25 / (panels * panels) as f64 / (1.0 + s * s + u * u).sqrt();
                    }
                }
            }
        }
        assert!((3.0 * j - unit_cell_coulomb_average()).abs() < 1e-13);
        assert!((unit_cell_coulomb_average() - 2.380_077_1).abs() < 1e-6);
    }

    fn erf(x: f64) -> f64 {
        if x > 5.5 {
            return 1.0;
        }
        let mut sum = 0.0_f64;
        let mut term = x;
        for n in 0..200 {
            sum += term / (2 * n + 1) as f64;
            term *= -x * x / (n + 1) as f64;
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }

    #[test]
    fn gaussian_density_potential() {
        // ρ = e^{-|x|²} has φ(r) = π^{3/2} erf(r) / r.
        let n = 48;
        let l = 6.0;
        let rho = Field3D::from_fn(n, l, [0.0; 3], |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()).unwrap();
        let phi = grid_potential(&rho).unwrap();
        let mut worst = 0.0_f64;
        for (i, j, k) in [(24, 24, 24), (30, 24, 24), (40, 20, 10), (47, 47, 47)] {
            let p = rho.node(i, j, k);
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            let exact = std::f64::consts::PI.powf(1.5) * erf(r) / r;
            worst = worst.max((phi.data()[phi.index(i, j, k)] - exact).abs() / exact);
        }
        assert!(worst < 5e-3, "relative error {worst}");
    }

    #[test]
    fn paired_transform_matches_single() {
        let n = 16;
        let a = Field3D::from_fn(n, 6.0, [0.0; 3], |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()).unwrap();
        let b = Field3D::from_fn(n, 6.0, [0.0; 3], |x| {
            (-2.0 * ((x[0] - 0.5).powi(2) + x[1] * x[1] + x[2] * x[2])).exp()
        })
        .unwrap();
        let conv = FreeSpaceConvolver::new(n, a.spacing()).unwrap();
        let (pa, pb) = conv.convolve_pair(&a, &b).unwrap();
        let sa = conv.convolve(&a).unwrap();
        let sb = conv.convolve(&b).unwrap();
        for (x, y) in pa.data().iter().zip(sa.data()).chain(pb.data().iter().zip(sb.data())) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn refuses_density_touching_boundary() {
        let rho = Field3D::from_fn(8, 1.0, [0.0; 3], |_| 1.0).unwrap();
        assert!(matches!(grid_potential(&rho), Err(Error::Contract(_))));
        let zero = Field3D::zeros(8, 1.0, [0.0; 3]).unwrap();
        assert_eq!(grid_potential(&zero).unwrap().max_abs(), 0.0);
    }
}
