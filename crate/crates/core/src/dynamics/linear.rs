use super::propagator::FreePropagator;
use super::DuhamelRule;
use crate::distributions::MomentumDistribution;
use crate::error::{Error, Result};
use crate::fields::{chunked_sum, real_part_checked, Background, HartreeMap, SpectralGrid};
use crate::response::{Potential, ResponseEngine, ResponseSymbol, SymbolConfig, SymbolMeta};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Retarded Duhamel integral d(t_n) = -i∫₀^{t_n} U(t_n, s)ψ(s) ds on the grid
/// t_n = n·dt, n = 0..=steps, for one field.
///
/// `step(n, u)` advances u from t_n to t_{n+1} under U; `source(n, out)`
/// writes ψ(t_n); `emit(n, d)` receives each d(t_n), starting with d(0) = 0.
/// The trapezoid rule needs one propagation per step; Simpson's rule on
/// step pairs needs three per pair, the odd nodes being closed by one
/// trapezoid panel.
pub(crate) fn duhamel<S, P, E>(rule: DuhamelRule, steps: usize, dt: f64, len: usize, mut step: S, mut source: P, mut emit: E)
where
    S: FnMut(usize, &mut [Complex64]),
    P: FnMut(usize, &mut [Complex64]),
    E: FnMut(usize, &[Complex64]),
{
    let i = Complex64::new(0.0, 1.0);
    let mut d = vec![ZERO; len];
    let mut psi = vec![ZERO; len];
    source(0, &mut psi);
    emit(0, &d);
    let mut acc = vec![ZERO; len];
    let axpy = |out: &mut [Complex64], a: &[Complex64], c: Complex64, b: &[Complex64]| {
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = x + c * y;
        }
    };
    let mut n = 0;
    while n < steps {
        if rule == DuhamelRule::Simpson && n + 2 <= steps {
            let mut pair = vec![ZERO; len];
            axpy(&mut pair, &d, -i * (dt / 3.0), &psi);
            axpy(&mut acc, &d, -i * (dt / 2.0), &psi);
            step(n, &mut pair);
            step(n, &mut acc);
            source(n + 1, &mut psi);
            axpy(&mut d, &acc, -i * (dt / 2.0), &psi);
            emit(n + 1, &d);
            let mut mid = vec![ZERO; len];
            axpy(&mut mid, &pair, -i * (4.0 * dt / 3.0), &psi);
            step(n + 1, &mut mid);
            source(n + 2, &mut psi);
            axpy(&mut d, &mid, -i * (dt / 3.0), &psi);
            emit(n + 2, &d);
            n += 2;
        } else {
            axpy(&mut acc, &d, -i * (dt / 2.0), &psi);
            step(n, &mut acc);
            source(n + 1, &mut psi);
            axpy(&mut d, &acc, -i * (dt / 2.0), &psi);
            emit(n + 1, &d);
            n += 1;
        }
    }
}

fn check_samples(u: &[Vec<f64>], grid: &SpectralGrid) -> Result<()> {
    if u.len() < 2 {
        return Err(Error::InvalidParameter("space-time input needs at least two time samples".into()));
    }
    if u.iter().any(|s| s.len() != grid.len()) {
        return Err(Error::InvalidParameter("snapshot size does not match the grid".into()));
    }
    Ok(())
}

/// L[u](t_n) = 2Re Σ_k ȳ_k(t_n)·D((w∗u)y_k)(t_n) on t_n = n·dt, with the
/// Duhamel integral D by `rule` and exact free propagation between nodes.
pub fn apply_l_direct(u: &[Vec<f64>], dt: f64, background: &Background, w: &Potential, rule: DuhamelRule) -> Result<Vec<Vec<f64>>> {
    let grid = &*background.grid;
    check_samples(u, grid)?;
    let n = grid.len();
    let steps = u.len() - 1;
    let hartree = HartreeMap::new(w, grid);
    if hartree.is_zero() {
        return Ok(vec![vec![0.0; n]; u.len()]);
    }
    let v = u.iter().map(|s| hartree.apply(s)).collect::<Result<Vec<_>>>()?;
    let prop = FreePropagator::new(grid, background.mass_shift, dt, false)?;
    let flat = chunked_sum(background.mode_count(), u.len() * n, |k, acc| {
        let mut y = vec![ZERO; n];
        duhamel(
            rule,
            steps,
            dt,
            n,
            |_, f| prop.apply(f),
            |t, out| {
                background.steady_field(k, t as f64 * dt, out);
                for (o, vv) in out.iter_mut().zip(&v[t]) {
                    *o *= vv;
                }
            },
            |t, d| {
                background.steady_field(k, t as f64 * dt, &mut y);
                for ((a, yy), dd) in acc[t * n..(t + 1) * n].iter_mut().zip(&y).zip(d) {
                    *a += 2.0 * (yy.conj() * dd).re;
                }
            },
        );
    });
    Ok(flat.chunks(n).map(|c| c.to_vec()).collect())
}

/// Options of the space-time multiplier path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiplierOptions {
    /// Length of the zero-padded time axis; `None` picks the next power of
    /// two ≥ 4 × the number of samples.
    pub padded_len: Option<usize>,
    /// Apply [`raised_cosine_taper`] to the input first.
    pub taper: bool,
}

impl Default for MultiplierOptions {
    fn default() -> Self {
        Self { padded_len: None, taper: false }
    }
}

impl MultiplierOptions {
    pub fn resolved_len(&self, samples: usize) -> usize {
        self.padded_len.unwrap_or_else(|| (4 * samples).next_power_of_two()).max(samples)
    }
}

/// Angular frequency of padded time index j: 2πj'/(len·dt), j' signed.
pub fn time_frequency(j: usize, len: usize, dt: f64) -> f64 {
    let signed = if j <= len / 2 { j as f64 } else { j as f64 - len as f64 };
    2.0 * PI * signed / (len as f64 * dt)
}

/// Tukey window: raised-cosine ramps over the first and last 10% of the samples.
pub fn raised_cosine_taper(samples: &mut [Vec<f64>]) {
    let m = samples.len();
    if m < 3 {
        return;
    }
    let span = (m - 1) as f64;
    let ramp = 0.1 * span;
    for (i, s) in samples.iter_mut().enumerate() {
        let t = i as f64;
        let edge = t.min(span - t);
        if edge < ramp {
            let f = 0.5 * (1.0 - (PI * edge / ramp).cos());
            for v in s.iter_mut() {
                *v *= f;
            }
        }
    }
}

/// Below this fraction of the largest space-time coefficient an entry is
/// treated as zero and the multiplier is not evaluated there.
const NEGLIGIBLE: f64 = 1e-13;

/// Multiplies the space-time transform of u (zero outside the sampled
/// window) by `symbol(τ, |ξ|)` and returns the first `u.len()` samples.
///
/// The time transform uses the kernel e^{-iτt}; at the Nyquist frequency
/// of an even padded length only the real part of the multiplier is used,
/// keeping the output real.
pub fn apply_space_time_multiplier<F>(u: &[Vec<f64>], dt: f64, grid: &SpectralGrid, opts: &MultiplierOptions, symbol: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, f64) -> Result<Complex64> + Sync,
{
    check_samples(u, grid)?;
    let mut input = u.to_vec();
    if opts.taper {
        raised_cosine_taper(&mut input);
    }
    let n = grid.len();
    let m = input.len();
    let len = opts.resolved_len(m);
    // Spatial transforms, then columns (one per spatial frequency) over time.
    let rows: Vec<Vec<Complex64>> = input
        .par_iter()
        .map(|s| {
            let mut c: Vec<Complex64> = s.iter().map(|x| Complex64::new(*x, 0.0)).collect();
            grid.forward(&mut c);
            c
        })
        .collect();
    let mut planner = rustfft::FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut col = vec![ZERO; len];
            for (t, r) in rows.iter().enumerate() {
                col[t] = r[s];
            }
            fwd.process(&mut col);
            col
        })
        .collect();
    drop(rows);
    let peak = cols.iter().flatten().fold(0.0f64, |a, z| a.max(z.norm()));
    let cut = NEGLIGIBLE * peak;
    let xi2 = grid.xi2();
    cols.par_iter_mut().enumerate().try_for_each(|(s, col)| -> Result<()> {
        let k = xi2[s].sqrt();
        for (j, v) in col.iter_mut().enumerate() {
            if v.norm() <= cut {
                *v = ZERO;
                continue;
            }
            let tau = time_frequency(j, len, dt);
            let mut mult = symbol(tau, k)?;
            if len % 2 == 0 && j == len / 2 {
                mult = Complex64::new(mult.re, 0.0);
            }
            *v *= mult;
        }
        inv.process(col);
        Ok(())
    })?;
    let scale = 1.0 / len as f64;
    (0..m)
        .into_par_iter()
        .map(|t| {
            let mut row: Vec<Complex64> = cols.iter().map(|c| c[t] * scale).collect();
            grid.inverse(&mut row);
            real_part_checked(&row, 1e-8)
        })
        .collect()
}

/// L[u] through its space-time symbol (2π)^{d/2}ŵ(ξ)·m_f(τ, |ξ|).
pub fn apply_l_multiplier(u: &[Vec<f64>], dt: f64, grid: &SpectralGrid, symbol: &ResponseSymbol, w: &Potential, opts: &MultiplierOptions) -> Result<Vec<Vec<f64>>> {
    if symbol.meta.dim != grid.dim() {
        return Err(Error::InvalidParameter("symbol and grid dimensions differ".into()));
    }
    if w.is_zero() {
        check_samples(u, grid)?;
        return Ok(vec![vec![0.0; grid.len()]; u.len()]);
    }
    apply_space_time_multiplier(u, dt, grid, opts, |tau, k| symbol.multiplier(w, tau, k))
}

/// (1 - L)^{-1} g through the multiplier 1/(1 - (2π)^{d/2}ŵ m_f), refusing
/// any used entry where |1 - (2π)^{d/2}ŵ m_f| ≤ `gap_margin`.
pub fn apply_resolvent(g: &[Vec<f64>], dt: f64, grid: &SpectralGrid, symbol: &ResponseSymbol, w: &Potential, opts: &MultiplierOptions, gap_margin: f64) -> Result<Vec<Vec<f64>>> {
    if w.is_zero() {
        check_samples(g, grid)?;
        return Ok(g.to_vec());
    }
    apply_space_time_multiplier(g, dt, grid, opts, |tau, k| {
        let denom = Complex64::new(1.0, 0.0) - symbol.multiplier(w, tau, k)?;
        if denom.norm() <= gap_margin {
            return Err(Error::NumericalGuard(format!("symbol gap |1 - ŵ m_f| = {:.3e} ≤ {gap_margin} at (τ, k) = ({tau:.4}, {k:.4})", denom.norm())));
        }
        Ok(denom.inv())
    })
}

/// Distinct |ξ| of the grid lattice, ascending and starting at 0.
pub fn lattice_shells(grid: &SpectralGrid) -> Vec<f64> {
    let mut n2: Vec<i64> = (0..grid.len()).map(|i| grid.frequency(i).iter().map(|n| n * n).sum()).collect();
    n2.sort_unstable();
    n2.dedup();
    n2.into_iter().map(|v| (v as f64).sqrt() * grid.dxi()).collect()
}

/// The symbol tabulated exactly at the nonnegative time frequencies of a
/// padded length and the given shells, so that multiplier lookups hit
/// table nodes.
pub fn lattice_symbol(dist: &MomentumDistribution, dt: f64, padded_len: usize, shells: Vec<f64>, cfg: SymbolConfig) -> Result<ResponseSymbol> {
    let tau: Vec<f64> = (0..=padded_len / 2).map(|j| 2.0 * PI * j as f64 / (padded_len as f64 * dt)).collect();
    let k_min = shells.iter().copied().filter(|k| *k > 0.0).fold(f64::INFINITY, f64::min);
    let k_max = shells.iter().copied().fold(0.0, f64::max);
    let tau_max = tau.last().copied().unwrap_or(0.0);
    let cover = if k_min.is_finite() { tau_max / (2.0 * k_min) + k_max / 2.0 } else { 1.0 };
    let meta = SymbolMeta { dim: dist.dim(), distribution: format!("{:?}", dist.kind()), config: cfg.clone() };
    let engine = ResponseEngine::for_distribution(dist, cfg, cover)?;
    ResponseSymbol::tabulate(&engine, tau, shells, meta)
}
