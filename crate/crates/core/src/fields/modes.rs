use super::SpectralGrid;
use crate::distributions::MomentumDistribution;
use crate::error::{Error, Result};
use crate::response::Potential;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// One Wiener direction: lattice frequency and real amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// Integer lattice coordinates; unused axes are 0.
    pub freq: [i64; 3],
    pub xi: [f64; 3],
    pub amplitude: f64,
}

impl Mode {
    pub fn xi2(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum()
    }
}

/// Discretized Wiener integral: Y = Σ_k f_k e^{ix·ξ_k} g_k with independent
/// standard complex Gaussians g_k. Never empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    dim: usize,
    modes: Vec<Mode>,
}

impl ModeSet {
    /// Modes at the given lattice frequencies of `grid`.
    pub fn from_lattice(grid: &SpectralGrid, entries: &[([i64; 3], f64)]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("mode set is empty".into()));
        }
        let half = (grid.points() / 2) as i64;
        let mut modes = Vec::with_capacity(entries.len());
        for &(freq, amplitude) in entries {
            if !amplitude.is_finite() {
                return Err(Error::InvalidParameter("mode amplitude must be finite".into()));
            }
            for (a, n) in freq.iter().enumerate() {
                let inside = if a < grid.dim() { (-half..half).contains(n) } else { *n == 0 };
                if !inside {
                    return Err(Error::InvalidParameter(format!("frequency {freq:?} is off the grid's lattice")));
                }
            }
            modes.push(Mode { freq, xi: freq.map(|n| n as f64 * grid.dxi()), amplitude });
        }
        Ok(Self { dim: grid.dim(), modes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }
}

/// One mode per lattice frequency with |ξ| ≤ `cutoff` and f(ξ) ≠ 0, ordered
/// by flat grid index, with amplitude f(ξ)·(2π/L)^{d/2}.
pub fn build_mode_set(dist: &MomentumDistribution, grid: &SpectralGrid, cutoff: f64) -> Result<ModeSet> {
    if dist.dim() != grid.dim() {
        return Err(Error::InvalidParameter(format!("distribution is {}-dimensional but the grid is {}-dimensional", dist.dim(), grid.dim())));
    }
    if !(cutoff > 0.0) || cutoff > grid.nyquist_radius() * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("cutoff {cutoff} must lie in (0, {}]", grid.nyquist_radius())));
    }
    let cell = grid.dxi().powf(grid.dim() as f64 / 2.0);
    let mut entries = Vec::new();
    for i in 0..grid.len() {
        let rho = grid.xi2()[i].sqrt();
        if rho > cutoff * (1.0 + 1e-12) {
            continue;
        }
        let f2 = dist.f_squared(rho)?;
        if f2 > 0.0 {
            entries.push((grid.frequency(i), f2.sqrt() * cell));
        }
    }
    if entries.is_empty() {
        return Err(Error::InvalidParameter("no lattice frequency carries weight: mode set is empty".into()));
    }
    ModeSet::from_lattice(grid, &entries)
}

/// E|Y|² = Σ_k f_k², the same at every (t, x).
pub fn steady_density(modes: &ModeSet) -> f64 {
    modes.modes.iter().map(|m| m.amplitude * m.amplitude).sum()
}

/// The discrete steady state Y on a grid together with its mass shift
/// m = ŵ(0)·Σf_k², so that each y_k(t) = f_k e^{ix·ξ_k - it(m + |ξ_k|²)}
/// solves the Hartree flow with the constant potential w∗E|Y|² exactly.
#[derive(Clone, Debug)]
pub struct Background {
    pub grid: Arc<SpectralGrid>,
    pub modes: Arc<ModeSet>,
    pub mass_shift: f64,
}

impl Background {
    pub fn new(grid: SpectralGrid, modes: ModeSet, w: &Potential) -> Result<Self> {
        if grid.dim() != modes.dim() {
            return Err(Error::InvalidParameter("mode set and grid dimensions differ".into()));
        }
        let mass_shift = w.w_hat_zero() * steady_density(&modes);
        Ok(Self { grid: Arc::new(grid), modes: Arc::new(modes), mass_shift })
    }

    /// A background with an explicitly chosen mass shift.
    pub fn with_mass_shift(grid: SpectralGrid, modes: ModeSet, mass_shift: f64) -> Result<Self> {
        if grid.dim() != modes.dim() {
            return Err(Error::InvalidParameter("mode set and grid dimensions differ".into()));
        }
        Ok(Self { grid: Arc::new(grid), modes: Arc::new(modes), mass_shift })
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Writes y_k(t, ·) into `out`.
    pub fn steady_field(&self, k: usize, t: f64, out: &mut [Complex64]) {
        let mode = &self.modes.modes[k];
        let phase = Complex64::from_polar(mode.amplitude, -t * (self.mass_shift + mode.xi2()));
        self.grid.plane_wave(mode.freq, phase, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{boltzmann_total, MomentumDistribution};
    use std::f64::consts::PI;

    #[test]
    fn fermi_ball_modes_are_lattice_points_of_the_unit_ball() {
        let grid = SpectralGrid::new(3, 2.0 * PI * 8.0, 32).unwrap();
        let modes = build_mode_set(&MomentumDistribution::fermi_zero(1.0, 3).unwrap(), &grid, 1.0).unwrap();
        let dxi = grid.dxi();
        let mut count = 0;
        for a in -8i64..=8 {
            for b in -8i64..=8 {
                for c in -8i64..=8 {
                    if ((a * a + b * b + c * c) as f64) * dxi * dxi <= 1.0 + 1e-12 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(modes.len(), count);
        let amp = modes.modes()[0].amplitude;
        assert!(modes.modes().iter().all(|m| m.amplitude == amp));
        // Lattice count times cell volume approximates the ball volume.
        let ball = 4.0 * PI / 3.0;
        assert!(((steady_density(&modes) - ball) / ball).abs() < 0.05);
    }

    #[test]
    fn boltzmann_variance_matches_gaussian_integral() {
        let grid = SpectralGrid::new(3, 2.0 * PI * 4.0, 32).unwrap();
        let dist = MomentumDistribution::boltzmann(0.5, 0.2, 3).unwrap();
        let modes = build_mode_set(&dist, &grid, grid.nyquist_radius()).unwrap();
        let exact = boltzmann_total(0.5, 0.2, 3);
        assert!(((steady_density(&modes) - exact) / exact).abs() < 0.01);
    }

    #[test]
    fn empty_and_off_lattice_sets_rejected() {
        let grid = SpectralGrid::new(2, 10.0, 8).unwrap();
        assert!(build_mode_set(&MomentumDistribution::zero(2).unwrap(), &grid, 1.0).is_err());
        assert!(ModeSet::from_lattice(&grid, &[([4, 0, 0], 1.0)]).is_err());
        assert!(ModeSet::from_lattice(&grid, &[([0, 0, 1], 1.0)]).is_err());
        let single = ModeSet::from_lattice(&grid, &[([1, -2, 0], 1.0)]).unwrap();
        assert_eq!(steady_density(&single), 1.0);
    }
}
