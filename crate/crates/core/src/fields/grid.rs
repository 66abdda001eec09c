use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Serializable description of a [`SpectralGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub length: f64,
    pub points: usize,
}

/// Periodic box [0, L)^d with N points per axis, standing in for ℝ^d.
///
/// Arrays are row-major with the last axis fastest. The forward transform
/// is unnormalized with kernel e^{-2πi jk/N}; the inverse divides by N^d,
/// so `inverse(forward(u)) = u`. Frequencies are (2π/L)·n with
/// n ∈ [-N/2, N/2) per axis.
#[derive(Clone)]
pub struct SpectralGrid {
    spec: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    xi2: Arc<Vec<f64>>,
    /// e^{2πi m/N}, m = 0..N.
    roots: Arc<Vec<Complex64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid").field("spec", &self.spec).finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl SpectralGrid {
    pub fn new(dim: usize, length: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("grid dimension must be 1, 2 or 3, got {dim}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("box length must be finite and > 0, got {length}")));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("points per axis must be a power of two ≥ 2, got {points}")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let roots = (0..points).map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / points as f64)).collect();
        let mut grid = Self {
            spec: GridSpec { dim, length, points },
            forward,
            inverse,
            xi2: Arc::new(Vec::new()),
            roots: Arc::new(roots),
        };
        let xi2 = (0..grid.len()).map(|i| grid.xi(i).iter().map(|x| x * x).sum()).collect();
        grid.xi2 = Arc::new(xi2);
        Ok(grid)
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        Self::new(spec.dim, spec.length, spec.points)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn length(&self) -> f64 {
        self.spec.length
    }

    pub fn points(&self) -> usize {
        self.spec.points
    }

    /// Total number of grid points N^d.
    pub fn len(&self) -> usize {
        self.spec.points.pow(self.spec.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing 2π/L of the frequency grid.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.spec.length
    }

    /// Cell volume (L/N)^d.
    pub fn cell_volume(&self) -> f64 {
        (self.spec.length / self.spec.points as f64).powi(self.spec.dim as i32)
    }

    /// Largest radius of a ball centered at 0 inside the frequency box.
    pub fn nyquist_radius(&self) -> f64 {
        self.dxi() * (self.spec.points / 2) as f64
    }

    /// Per-axis grid indices of a flat index; unused axes are 0.
    pub fn unflatten(&self, mut index: usize) -> [usize; 3] {
        let n = self.spec.points;
        let mut out = [0; 3];
        for a in (0..self.spec.dim).rev() {
            out[a] = index % n;
            index /= n;
        }
        out
    }

    /// Flat index of the lattice frequency with signed integer coordinates.
    pub fn frequency_index(&self, freq: [i64; 3]) -> usize {
        let n = self.spec.points as i64;
        (0..self.spec.dim).fold(0, |acc, a| acc * n as usize + freq[a].rem_euclid(n) as usize)
    }

    /// Signed integer frequency coordinates of a flat index.
    pub fn frequency(&self, index: usize) -> [i64; 3] {
        let n = self.spec.points;
        let mut out = [0i64; 3];
        for (a, i) in self.unflatten(index).into_iter().enumerate().take(self.spec.dim) {
            out[a] = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
        }
        out
    }

    /// ξ at a flat frequency index.
    pub fn xi(&self, index: usize) -> [f64; 3] {
        self.frequency(index).map(|n| n as f64 * self.dxi())
    }

    /// |ξ|² at every flat frequency index.
    pub fn xi2(&self) -> &[f64] {
        &self.xi2
    }

    pub fn max_xi2(&self) -> f64 {
        self.xi2.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// Two-thirds rule: true where every |ξ_a| < (2π/L)·N/3.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let limit = self.spec.points as f64 / 3.0;
        (0..self.len()).map(|i| self.frequency(i)[..self.spec.dim].iter().all(|n| (n.abs() as f64) < limit)).collect()
    }

    /// f(|ξ|) at every flat frequency index.
    pub fn radial_multiplier<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.xi2.iter().map(|x2| f(x2.sqrt())).collect()
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "field size does not match the grid");
        let n = self.spec.points;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // Last axis: contiguous rows.
        plan.process_with_scratch(data, &mut scratch);
        let mut stride = n;
        let mut lines = Vec::new();
        for _ in 1..self.spec.dim {
            let block = stride * n;
            lines.resize(block, Complex64::new(0.0, 0.0));
            for chunk in data.chunks_mut(block) {
                for j in 0..stride {
                    for i in 0..n {
                        lines[j * n + i] = chunk[i * stride + j];
                    }
                }
                plan.process_with_scratch(&mut lines, &mut scratch);
                for j in 0..stride {
                    for i in 0..n {
                        chunk[i * stride + j] = lines[j * n + i];
                    }
                }
            }
            stride *= n;
        }
    }

    /// Unnormalized forward DFT over all axes, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse DFT over all axes, normalized by N^d, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Writes coef·e^{ix·ξ} for the lattice frequency `freq` at every grid
    /// point. Phases come from a table of N-th roots, so the values are
    /// exact up to one rounding per axis.
    pub fn plane_wave(&self, freq: [i64; 3], coef: Complex64, out: &mut [Complex64]) {
        let n = self.spec.points;
        let axis = |a: usize| -> Vec<Complex64> {
            if a >= self.spec.dim {
                return vec![Complex64::new(1.0, 0.0)];
            }
            let f = freq[a].rem_euclid(n as i64) as usize;
            (0..n).map(|j| self.roots[(f * j) % n]).collect()
        };
        let (e0, e1, e2) = (axis(0), axis(1), axis(2));
        let mut idx = 0;
        for a in &e0 {
            let ca = coef * a;
            for b in &e1 {
                let cb = ca * b;
                for c in &e2 {
                    out[idx] = cb * c;
                    idx += 1;
                }
            }
        }
    }

    /// Spatial L² norm (Σ|u|²·cell volume)^{1/2}.
    pub fn l2_norm(&self, field: &[Complex64]) -> f64 {
        (field.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    /// The same norm evaluated from forward-transformed coefficients.
    pub fn l2_norm_spectral(&self, coeffs: &[Complex64]) -> f64 {
        (coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume() / self.len() as f64).sqrt()
    }

    /// Grid coordinates of a flat index.
    pub fn position(&self, index: usize) -> [f64; 3] {
        let h = self.spec.length / self.spec.points as f64;
        let idx = self.unflatten(index);
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transforms_round_trip_and_diagonalize_plane_waves() {
        for dim in 1..=3 {
            let g = SpectralGrid::new(dim, 2.0 * PI * 3.0, 8).unwrap();
            let freq = [1, -3, 2];
            let mut u = vec![Complex64::new(0.0, 0.0); g.len()];
            g.plane_wave(freq, Complex64::new(0.5, 0.25), &mut u);
            let orig = u.clone();
            g.forward(&mut u);
            let at = g.frequency_index(freq);
            for (i, v) in u.iter().enumerate() {
                let want = if i == at { Complex64::new(0.5, 0.25) * g.len() as f64 } else { Complex64::new(0.0, 0.0) };
                assert!((v - want).norm() < 1e-11, "dim {dim} index {i}");
            }
            assert_eq!(g.frequency(at)[..dim], freq[..dim]);
            g.inverse(&mut u);
            for (a, b) in u.iter().zip(&orig) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn parseval() {
        let g = SpectralGrid::new(3, 5.0, 8).unwrap();
        let u: Vec<Complex64> = (0..g.len()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut c = u.clone();
        g.forward(&mut c);
        let (a, b) = (g.l2_norm(&u), g.l2_norm_spectral(&c));
        assert!(((a - b) / a).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SpectralGrid::new(4, 1.0, 8).is_err());
        assert!(SpectralGrid::new(2, 1.0, 12).is_err());
        assert!(SpectralGrid::new(2, -1.0, 8).is_err());
    }
}
