use super::{chunked_sum, Background, SpectralGrid};
use crate::error::{Error, Result};
use crate::response::{Potential, PotentialKind};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Mode-resolved random field X = Y + Z at time t.
///
/// Each Y direction k carries the combined field x_k = y_k + z_k; y_k is
/// analytic and recomputed from the background whenever needed. Directions
/// independent of Y (`extras`) carry only perturbation.
#[derive(Clone, Debug)]
pub struct RandomFieldState {
    pub background: Background,
    pub t: f64,
    pub(crate) combined: Vec<Vec<Complex64>>,
    pub(crate) extras: Vec<Vec<Complex64>>,
}

impl RandomFieldState {
    /// The unperturbed state Z = 0 at time t.
    pub fn steady(background: Background, t: f64) -> Self {
        let n = background.grid.len();
        let combined = (0..background.mode_count())
            .map(|k| {
                let mut y = vec![ZERO; n];
                background.steady_field(k, t, &mut y);
                y
            })
            .collect();
        Self { background, t, combined, extras: Vec::new() }
    }

    /// Y plus the perturbation with components `z` along Y's directions
    /// (`None` for zero) and `extras` along independent directions.
    pub fn new(background: Background, t: f64, z: Option<Vec<Vec<Complex64>>>, extras: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = background.grid.len();
        if extras.iter().any(|e| e.len() != n) {
            return Err(Error::InvalidParameter("extra field size does not match the grid".into()));
        }
        let mut state = Self::steady(background, t);
        if let Some(z) = z {
            if z.len() != state.combined.len() || z.iter().any(|f| f.len() != n) {
                return Err(Error::InvalidParameter("perturbation needs one grid field per mode".into()));
            }
            for (x, dz) in state.combined.iter_mut().zip(z) {
                for (a, b) in x.iter_mut().zip(dz) {
                    *a += b;
                }
            }
        }
        state.extras = extras;
        Ok(state)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.background.grid
    }

    pub fn combined(&self) -> &[Vec<Complex64>] {
        &self.combined
    }

    pub fn extras(&self) -> &[Vec<Complex64>] {
        &self.extras
    }

    /// z_k = x_k - y_k at the current time.
    pub fn z_field(&self, k: usize) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.grid().len()];
        self.background.steady_field(k, self.t, &mut y);
        self.combined[k].iter().zip(&y).map(|(x, y)| x - y).collect()
    }

    /// ‖x_k‖²_{L²} per Y direction followed by ‖e_j‖²_{L²} per extra.
    pub fn mode_masses(&self) -> Vec<f64> {
        let grid = self.grid();
        self.combined.iter().chain(&self.extras).map(|f| grid.l2_norm(f).powi(2)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.combined.iter().chain(&self.extras).all(|f| f.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// ρ = Σ_k (|y_k + z_k|² - |y_k|²) + Σ_j |e_j|².
///
/// Each term is evaluated as 2Re(ȳ_k z_k) + |z_k|², which never forms the
/// large background |y_k|², and summed in fixed chunk order.
pub fn density_from_fields(y: &[Vec<Complex64>], z: &[Vec<Complex64>], extras: &[Vec<Complex64>]) -> Vec<f64> {
    let n = y.first().or(extras.first()).map_or(0, |f| f.len());
    let mut rho = chunked_sum(y.len(), n, |k, acc| {
        for ((a, yk), zk) in acc.iter_mut().zip(&y[k]).zip(&z[k]) {
            *a += 2.0 * (yk.conj() * zk).re + zk.norm_sqr();
        }
    });
    add_extras(&mut rho, extras);
    rho
}

fn add_extras(rho: &mut [f64], extras: &[Vec<Complex64>]) {
    for e in extras {
        for (a, v) in rho.iter_mut().zip(e) {
            *a += v.norm_sqr();
        }
    }
}

/// The perturbation density ρ_Z = E|Z|² + 2Re E[ȲZ] of a state.
pub fn compute_density(state: &RandomFieldState) -> Vec<f64> {
    let n = state.grid().len();
    let mut rho = chunked_sum(state.combined.len(), n, |k, acc| {
        let mut y = vec![ZERO; n];
        state.background.steady_field(k, state.t, &mut y);
        for ((a, yk), xk) in acc.iter_mut().zip(&y).zip(&state.combined[k]) {
            let zk = xk - yk;
            *a += 2.0 * (yk.conj() * zk).re + zk.norm_sqr();
        }
    });
    add_extras(&mut rho, &state.extras);
    rho
}

/// The convolution ρ ↦ w∗ρ on a fixed grid, with ŵ tabulated once.
#[derive(Clone, Debug)]
pub struct HartreeMap {
    grid: SpectralGrid,
    multiplier: Vec<f64>,
    /// Set when ŵ is constant, so no transform is needed.
    constant: Option<f64>,
}

impl HartreeMap {
    pub fn new(w: &Potential, grid: &SpectralGrid) -> Self {
        let constant = match w.kind() {
            PotentialKind::PointMass { weight } => Some(*weight),
            _ if w.is_zero() => Some(0.0),
            _ => None,
        };
        let multiplier = if constant.is_some() { Vec::new() } else { grid.radial_multiplier(|k| w.w_hat(k)) };
        Self { grid: grid.clone(), multiplier, constant }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == Some(0.0)
    }

    /// V = F^{-1}[ŵ·F ρ]. For w = a·δ₀ this is exactly a·ρ, so a constant
    /// density c gives V ≡ a·c.
    pub fn apply(&self, rho: &[f64]) -> Result<Vec<f64>> {
        if rho.len() != self.grid.len() {
            return Err(Error::InvalidParameter("density size does not match the grid".into()));
        }
        if let Some(a) = self.constant {
            return Ok(rho.iter().map(|r| a * r).collect());
        }
        let mut buf: Vec<Complex64> = rho.iter().map(|r| Complex64::new(*r, 0.0)).collect();
        self.grid.forward(&mut buf);
        for (b, m) in buf.iter_mut().zip(&self.multiplier) {
            *b *= m;
        }
        self.grid.inverse(&mut buf);
        real_part_checked(&buf, 1e-10)
    }
}

/// Discards imaginary parts after checking they are roundoff relative to the
/// largest real part.
pub(crate) fn real_part_checked(values: &[Complex64], rel_tol: f64) -> Result<Vec<f64>> {
    let scale = values.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let residue = values.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if residue > rel_tol * scale && residue > f64::MIN_POSITIVE {
        return Err(Error::NumericalGuard(format!("imaginary residue {residue:.3e} exceeds {rel_tol:.0e} of the real scale {scale:.3e}")));
    }
    Ok(values.iter().map(|z| z.re).collect())
}

/// V = w∗ρ on the grid.
pub fn hartree_potential(rho: &[f64], w: &Potential, grid: &SpectralGrid) -> Result<Vec<f64>> {
    HartreeMap::new(w, grid).apply(rho)
}

/// Density and potential snapshots at increasing times.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityPath {
    pub times: Vec<f64>,
    pub density: Vec<Vec<f64>>,
    pub potential: Vec<Vec<f64>>,
}

impl DensityPath {
    pub fn push(&mut self, t: f64, density: Vec<f64>, potential: Vec<f64>) {
        debug_assert!(self.times.last().is_none_or(|last| t > *last));
        self.times.push(t);
        self.density.push(density);
        self.potential.push(potential);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// max over snapshots and grid points of |ρ|.
    pub fn sup_density(&self) -> f64 {
        self.density.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Ways to place initial perturbation data on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationShape {
    /// amplitude·e^{-|x-c|²/(2 width²)}·e^{ix·p}, with x - c taken in the
    /// nearest periodic image.
    WavePacket { center: [f64; 3], width: f64, momentum: [f64; 3], amplitude: f64 },
    /// Gaussian random coefficients under the spectral envelope
    /// e^{-|ξ|²/(2 bandwidth²)}, rescaled to L² norm `amplitude`.
    Random { bandwidth: f64, amplitude: f64, seed: u64 },
}

impl PerturbationShape {
    pub fn sample(&self, grid: &SpectralGrid) -> Result<Vec<Complex64>> {
        match self {
            PerturbationShape::WavePacket { center, width, momentum, amplitude } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidParameter("wave packet width must be > 0".into()));
                }
                let len = grid.length();
                Ok((0..grid.len())
                    .map(|i| {
                        let x = grid.position(i);
                        let (mut r2, mut phase) = (0.0, 0.0);
                        for a in 0..grid.dim() {
                            let d = (x[a] - center[a]) - len * ((x[a] - center[a]) / len).round();
                            r2 += d * d;
                            phase += momentum[a] * x[a];
                        }
                        Complex64::from_polar(amplitude * (-0.5 * r2 / (width * width)).exp(), phase)
                    })
                    .collect())
            }
            PerturbationShape::Random { bandwidth, amplitude, seed } => {
                if !(*bandwidth > 0.0) {
                    return Err(Error::InvalidParameter("random field bandwidth must be > 0".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut coeffs: Vec<Complex64> = grid
                    .xi2()
                    .iter()
                    .map(|x2| {
                        let env = (-0.5 * x2 / (bandwidth * bandwidth)).exp();
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im) * env
                    })
                    .collect();
                grid.inverse(&mut coeffs);
                let norm = grid.l2_norm(&coeffs);
                if norm == 0.0 {
                    return Ok(coeffs);
                }
                Ok(coeffs.into_iter().map(|z| z * (amplitude / norm)).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ModeSet;
    use std::f64::consts::PI;

    fn background(grid: &SpectralGrid, entries: &[([i64; 3], f64)]) -> Background {
        Background::with_mass_shift(grid.clone(), ModeSet::from_lattice(grid, entries).unwrap(), 0.3).unwrap()
    }

    #[test]
    fn zero_perturbation_has_zero_density() {
        let grid = SpectralGrid::new(2, 2.0 * PI, 8).unwrap();
        let s = RandomFieldState::steady(background(&grid, &[([1, 0, 0], 0.7), ([0, -2, 0], 0.4)]), 1.3);
        assert!(compute_density(&s).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn doubled_mode_gives_three_times_background() {
        let grid = SpectralGrid::new(1, 2.0 * PI, 16).unwrap();
        let bg = background(&grid, &[([2, 0, 0], 0.5)]);
        let mut y = vec![ZERO; 16];
        bg.steady_field(0, 0.0, &mut y);
        let s = RandomFieldState::new(bg, 0.0, Some(vec![y]), Vec::new()).unwrap();
        assert!(compute_density(&s).iter().all(|v| (v - 0.75).abs() < 1e-14));
    }

    #[test]
    fn point_mass_potential_is_exact_and_harmonics_are_eigenvectors() {
        let grid = SpectralGrid::new(3, 7.0, 8).unwrap();
        let v = hartree_potential(&vec![2.5; grid.len()], &Potential::point_mass(-0.4).unwrap(), &grid).unwrap();
        assert!(v.iter().all(|x| *x == -1.0));
        assert!(hartree_potential(&vec![1.0; grid.len()], &Potential::zero(), &grid).unwrap().iter().all(|x| *x == 0.0));

        let w = Potential::new(PotentialKind::GaussianMeasure { weight: 1.5, width: 0.7 }).unwrap();
        let freq = [1, 2, -1];
        let mut h = vec![ZERO; grid.len()];
        grid.plane_wave(freq, Complex64::new(1.0, 0.0), &mut h);
        let rho: Vec<f64> = h.iter().map(|z| z.re).collect();
        let v = hartree_potential(&rho, &w, &grid).unwrap();
        let scale = w.w_hat(grid.xi2()[grid.frequency_index(freq)].sqrt());
        for (a, b) in v.iter().zip(&rho) {
            assert!((a - scale * b).abs() < 1e-14);
        }
    }

    #[test]
    fn wave_packet_and_random_shapes() {
        let grid = SpectralGrid::new(2, 10.0, 16).unwrap();
        let p = PerturbationShape::WavePacket { center: [5.0, 5.0, 0.0], width: 1.0, momentum: [0.0; 3], amplitude: 2.0 };
        let f = p.sample(&grid).unwrap();
        assert!((f[grid.frequency_index([8, 8, 0])].re - 2.0).abs() < 1e-15);
        let r = PerturbationShape::Random { bandwidth: 2.0, amplitude: 0.3, seed: 7 };
        let (a, b) = (r.sample(&grid).unwrap(), r.sample(&grid).unwrap());
        assert_eq!(a, b);
        assert!((grid.l2_norm(&a) - 0.3).abs() < 1e-14);
    }
}
