use crate::error::{Error, Result};
use crate::fields::{RandomFieldState, SpectralGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Cauchy differences of the back-propagated perturbation W(t) = S(-t)Z(t).
///
/// `table[i][j]` = ‖W(t_i) - W(t_j)‖ in L²_ω H^σ_x (or Ḣ^σ_x when
/// `homogeneous`); symmetric with zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterDiagnostics {
    pub times: Vec<f64>,
    pub sigma: f64,
    pub homogeneous: bool,
    pub table: Vec<Vec<f64>>,
    /// ‖W(t_i)‖ in the same norm.
    pub profile_norms: Vec<f64>,
}

impl ScatterDiagnostics {
    /// Largest off-diagonal entry with min(t_i, t_j) ≥ `t_min`, if any.
    pub fn tail_sup(&self, t_min: f64) -> Option<f64> {
        let mut sup: Option<f64> = None;
        for i in 0..self.times.len() {
            for j in (i + 1)..self.times.len() {
                if self.times[i].min(self.times[j]) >= t_min {
                    sup = Some(sup.map_or(self.table[i][j], |s| s.max(self.table[i][j])));
                }
            }
        }
        sup
    }
}

/// Sobolev weight of the diagnostic norm at |ξ|².
pub(crate) fn scatter_weight(xi2: f64, sigma: f64, homogeneous: bool) -> f64 {
    if homogeneous {
        if xi2 == 0.0 {
            if sigma == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            xi2.powf(0.5 * sigma)
        }
    } else {
        (1.0 + xi2).powf(0.5 * sigma)
    }
}

/// Accumulates weighted spectra of S(-t)z_k(t) at sample times.
#[derive(Clone, Debug)]
pub struct ScatterRecorder {
    grid: SpectralGrid,
    mass_shift: f64,
    sigma: f64,
    homogeneous: bool,
    weights: Vec<f64>,
    times: Vec<f64>,
    /// spectra[sample][direction]
    spectra: Vec<Vec<Vec<Complex64>>>,
}

impl ScatterRecorder {
    pub fn new(grid: &SpectralGrid, mass_shift: f64, sigma: f64, homogeneous: bool) -> Self {
        let weights = grid.xi2().iter().map(|x2| scatter_weight(*x2, sigma, homogeneous)).collect();
        Self { grid: grid.clone(), mass_shift, sigma, homogeneous, weights, times: Vec::new(), spectra: Vec::new() }
    }

    /// ⟨∇⟩^σ S(-t) applied to `field`, in forward-transform coefficients.
    pub fn back_propagate(&self, t: f64, field: &[Complex64]) -> Vec<Complex64> {
        let mut c = field.to_vec();
        self.grid.forward(&mut c);
        for ((v, x2), w) in c.iter_mut().zip(self.grid.xi2()).zip(&self.weights) {
            *v *= Complex64::from_polar(*w, t * (self.mass_shift + x2));
        }
        c
    }

    /// Records W(t) for the perturbation of `state`.
    pub fn record(&mut self, state: &RandomFieldState) {
        let t = state.t;
        let mut rows = Vec::with_capacity(state.combined().len() + state.extras().len());
        for k in 0..state.combined().len() {
            rows.push(self.back_propagate(t, &state.z_field(k)));
        }
        for e in state.extras() {
            rows.push(self.back_propagate(t, e));
        }
        self.times.push(t);
        self.spectra.push(rows);
    }

    pub fn sample_count(&self) -> usize {
        self.times.len()
    }

    pub fn finish(self) -> Result<ScatterDiagnostics> {
        let n = self.times.len();
        if n < 3 {
            return Err(Error::InvalidParameter(format!("scattering diagnostics need at least 3 sample times, got {n}")));
        }
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        let norm = |a: &[Vec<Complex64>], b: Option<&[Vec<Complex64>]>| -> f64 {
            let mut s = 0.0;
            for (k, row) in a.iter().enumerate() {
                for (i, v) in row.iter().enumerate() {
                    let d = match b {
                        Some(b) => v - b[k][i],
                        None => *v,
                    };
                    s += d.norm_sqr();
                }
            }
            (s * scale).sqrt()
        };
        let mut table = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = norm(&self.spectra[i], Some(&self.spectra[j]));
                table[i][j] = d;
                table[j][i] = d;
            }
        }
        let profile_norms = self.spectra.iter().map(|s| norm(s, None)).collect();
        Ok(ScatterDiagnostics { times: self.times, sigma: self.sigma, homogeneous: self.homogeneous, table, profile_norms })
    }
}

/// Cauchy table of S(-t)Z(t) over states sampled at ≥ 3 times.
pub fn scattering_diagnostic(states: &[RandomFieldState], sigma: f64, homogeneous: bool) -> Result<ScatterDiagnostics> {
    let first = states.first().ok_or_else(|| Error::InvalidParameter("no states given".into()))?;
    let mut rec = ScatterRecorder::new(first.grid(), first.background.mass_shift, sigma, homogeneous);
    for s in states {
        rec.record(s);
    }
    rec.finish()
}
