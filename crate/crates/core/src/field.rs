//! Scalar fields on a uniform cubic, cell-centred grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values on the nodes `c + (-L + (i + 1/2) h)`, `h = 2L/n`, stored
/// x-fastest (`index = i + n (j + n k)`).
#[derive(Debug, Clone, PartialEq)]
pub struct Field3D {
    n: usize,
    half_width: f64,
    center: [f64; 3],
    data: Vec<f64>,
}

/// Geometry of a [`Field3D`] without its values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldGeometry {
    pub n: usize,
    pub half_width: f64,
    pub center: [f64; 3],
}

impl Field3D {
    pub fn zeros(n: usize, half_width: f64, center: [f64; 3]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes per axis, got {n}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid("non-finite box centre".into()));
        }
        Ok(Self { n, half_width, center, data: vec![0.0; n * n * n] })
    }

    pub fn from_data(geometry: FieldGeometry, data: Vec<f64>) -> Result<Self> {
        let mut f = Self::zeros(geometry.n, geometry.half_width, geometry.center)?;
        if data.len() != f.data.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                f.data.len(),
                data.len()
            )));
        }
        f.data = data;
        Ok(f)
    }

    /// Samples `f(x, y, z)` at every node.
    pub fn from_fn<F: Fn([f64; 3]) -> f64>(n: usize, half_width: f64, center: [f64; 3], f: F) -> Result<Self> {
        let mut out = Self::zeros(n, half_width, center)?;
        let axis = out.axis_nodes();
        for k in 0..n {
            for j in 0..n {
                let row = (j + n * k) * n;
                for i in 0..n {
                    out.data[row + i] = f([axis[0][i], axis[1][j], axis[2][k]]);
                }
            }
        }
        Ok(out)
    }

    pub fn geometry(&self) -> FieldGeometry {
        FieldGeometry { n: self.n, half_width: self.half_width, center: self.center }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    /// Node coordinates along each axis.
    pub fn axis_nodes(&self) -> [Vec<f64>; 3] {
        let h = self.spacing();
        let l = self.half_width;
        let axis = |c: f64| (0..self.n).map(|i| c - l + (i as f64 + 0.5) * h).collect::<Vec<_>>();
        [axis(self.center[0]), axis(self.center[1]), axis(self.center[2])]
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing();
        let l = self.half_width;
        [
            self.center[0] - l + (i as f64 + 0.5) * h,
            self.center[1] - l + (j as f64 + 0.5) * h,
            self.center[2] - l + (k as f64 + 0.5) * h,
        ]
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.geometry() == other.geometry()
    }

    /// `h³ Σ values`.
    pub fn integral(&self) -> f64 {
        self.spacing().powi(3) * self.data.iter().sum::<f64>()
    }

    /// `h³ Σ a b` over a common grid.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        if !self.same_geometry(other) {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        Ok(self.spacing().powi(3) * self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest |value| on the six outer faces.
    pub fn boundary_max_abs(&self) -> f64 {
        let n = self.n;
        let mut m = 0.0_f64;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    if i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1 {
                        m = m.max(self.data[self.index(i, j, k)].abs());
                    }
                }
            }
        }
        m
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self { data: self.data.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// Trilinear interpolation; `None` outside the hull of the nodes.
    ///
    /// Points that coincide with nodes (up to rounding) return the stored value.
    pub fn value_at(&self, x: [f64; 3]) -> Option<f64> {
        let h = self.spacing();
        let mut idx = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let s = (x[a] - self.center[a] + self.half_width) / h - 0.5;
            let snapped = s.round();
            let s = if (s - snapped).abs() < 1e-9 { snapped } else { s };
            if s < 0.0 || s > (self.n - 1) as f64 {
                return None;
            }
            let i0 = (s.floor() as usize).min(self.n - 2);
            idx[a] = i0;
            frac[a] = s - i0 as f64;
        }
        let mut acc = 0.0;
        for dz in 0..2 {
            let wz = if dz == 0 { 1.0 - frac[2] } else { frac[2] };
            if wz == 0.0 {
                continue;
            }
            for dy in 0..2 {
                let wy = if dy == 0 { 1.0 - frac[1] } else { frac[1] };
                if wy == 0.0 {
                    continue;
                }
                for dx in 0..2 {
                    let wx = if dx == 0 { 1.0 - frac[0] } else { frac[0] };
                    if wx == 0.0 {
                        continue;
                    }
                    acc += wx * wy * wz * self.data[self.index(idx[0] + dx, idx[1] + dy, idx[2] + dz)];
                }
            }
        }
        Some(acc)
    }

    /// Seven-point Laplacian with zero values outside the box.
    pub fn laplacian(&self) -> Self {
        let n = self.n;
        let h2 = self.spacing() * self.spacing();
        let mut out = self.clone();
        let get = |i: isize, j: isize, k: isize| -> f64 {
            if i < 0 || j < 0 || k < 0 || i >= n as isize || j >= n as isize || k >= n as isize {
                0.0
            } else {
                self.data[i as usize + n * (j as usize + n * k as usize)]
            }
        };
        for k in 0..n as isize {
            for j in 0..n as isize {
                for i in 0..n as isize {
                    let c = get(i, j, k);
                    let s = get(i - 1, j, k) + get(i + 1, j, k) + get(i, j - 1, k) + get(i, j + 1, k)
                        + get(i, j, k - 1)
                        + get(i, j, k + 1);
                    out.data[i as usize + n * (j as usize + n * k as usize)] = (s - 6.0 * c) / h2;
                }
            }
        }
        out
    }

    /// `h³ Σ |∇u|²` with one-sided differences between neighbouring nodes
    /// (zero outside the box); summation by parts gives `-h³ Σ u Δ_h u`.
    pub fn dirichlet_energy(&self) -> f64 {
        let n = self.n;
        let h = self.spacing();
        let mut acc = 0.0;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let c = self.data[self.index(i, j, k)];
                    let nx = if i + 1 < n { self.data[self.index(i + 1, j, k)] } else { 0.0 };
                    let ny = if j + 1 < n { self.data[self.index(i, j + 1, k)] } else { 0.0 };
                    let nz = if k + 1 < n { self.data[self.index(i, j, k + 1)] } else { 0.0 };
                    acc += (nx - c).powi(2) + (ny - c).powi(2) + (nz - c).powi(2);
                    if i == 0 {
                        acc += c * c;
                    }
                    if j == 0 {
                        acc += c * c;
                    }
                    if k == 0 {
                        acc += c * c;
                    }
                }
            }
        }
        acc * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_cell_centred_and_symmetric() {
        let f = Field3D::zeros(4, 2.0, [0.0; 3]).unwrap();
        assert_eq!(f.axis_nodes()[0], vec![-1.5, -0.5, 0.5, 1.5]);
        assert!(Field3D::zeros(1, 1.0, [0.0; 3]).is_err());
        assert!(Field3D::zeros(8, -1.0, [0.0; 3]).is_err());
    }

    #[test]
    fn interpolation_hits_nodes_and_is_exact_for_linear_fields() {
        let f = Field3D::from_fn(8, 2.0, [1.0, 0.0, -1.0], |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2]).unwrap();
        let p = f.node(3, 5, 2);
        assert_eq!(f.value_at(p), Some(f.data()[f.index(3, 5, 2)]));
        let q = [1.3, 0.2, -0.7];
        let v = f.value_at(q).unwrap();
        assert!((v - (1.0 + 2.6 - 0.2 - 0.35)).abs() < 1e-12);
        assert!(f.value_at([10.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn dirichlet_energy_matches_summation_by_parts() {
        let f = Field3D::from_fn(12, 3.0, [0.0; 3], |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2])).exp())
            .unwrap();
        let lap = f.laplacian();
        let by_parts = -f.dot(&lap).unwrap();
        assert!((f.dirichlet_energy() - by_parts).abs() < 1e-12 * by_parts.abs());
    }
}
