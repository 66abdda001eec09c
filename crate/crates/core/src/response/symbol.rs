//! The response symbol m_f(τ, k) = -2∫₀^∞ e^{-iτt} sin(k²t) h(2kt) dt.
//!
//! Substituting s = 2kt and expanding the sine gives the exact identity
//!
//!   m_f(τ, k) = (i / 2k)·[ĥ₊(ν₋) - ĥ₊(ν₊)],   ν± = τ/(2k) ± k/2,
//!
//! with the one-sided transform ĥ₊(ν) = ∫₀^∞ e^{-iνs} h(s) ds. The symbol is
//! therefore reduced to evaluations of a single k-independent transform of h.
//! That transform is conditionally convergent for slowly decaying profiles,
//! so it is computed with damping e^{-ηs} at three rates η, η/2, η/4 and
//! Richardson-extrapolated to η → 0. Damping acts in the natural variable s,
//! where the profile's decay scale does not depend on k.
//!
//! Each damped transform is split by a smooth partition of unity
//! χ(s) = erfc((s - s₀)/σ)/2: the near part χ·h is integrated adaptively,
//! the far part (1 - χ)·h is smooth on all of ℝ and is summed by the
//! trapezoid rule, which is spectrally accurate once the sample spacing
//! clears the band limit of h plus the Gaussian band of the partition.

use super::Potential;
use crate::distributions::{compute_hf_profile, fermi_zero_hf, DistributionKind, MomentumDistribution, RadialProfile};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, CVec, QuadConfig};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

const PARTITION_CENTER: f64 = 7.0;
const PARTITION_WIDTH: f64 = 1.0;
/// χ is below 1e-20 beyond s₀ + 6.5σ.
const NEAR_END: f64 = PARTITION_CENTER + 6.5 * PARTITION_WIDTH;
/// Frequencies beyond this multiple of 1/σ carry partition spectrum below 1e-16.
const PARTITION_BAND: f64 = 12.2 / PARTITION_WIDTH;
/// Phase recurrences are resynchronized with an exact cis every this many steps.
const RESYNC: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SymbolConfig {
    /// Damping ladder; each entry must be half the previous one.
    pub etas: [f64; 3],
    /// Damped integrals are truncated at s = horizon/η.
    pub horizon: f64,
    /// Entries whose error estimate exceeds this are flagged.
    pub tolerance: f64,
    pub quad: QuadConfig,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        Self { etas: [1e-2, 5e-3, 2.5e-3], horizon: 40.0, tolerance: 1e-4, quad: QuadConfig { abs_tol: 1e-12, rel_tol: 1e-10, max_subdivisions: 4000 } }
    }
}

impl SymbolConfig {
    fn validate(&self) -> Result<()> {
        let [a, b, c] = self.etas;
        let halving = (b - a / 2.0).abs() <= 1e-12 * a && (c - b / 2.0).abs() <= 1e-12 * b;
        if !(a > 0.0) || !halving {
            return Err(Error::InvalidParameter("damping ladder must be (η, η/2, η/4) with η > 0".into()));
        }
        if !(self.horizon > 0.0) || !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("horizon and tolerance must be > 0".into()));
        }
        Ok(())
    }
}

/// The radial profile h entering the transform.
#[derive(Clone)]
pub enum ProfileSource {
    Zero,
    /// Closed-form Fermi ball profile.
    FermiZero { mu: f64, dim: usize },
    /// Spline profile; h is taken as zero beyond its last node and the
    /// tail model bounds the truncation error.
    Sampled { profile: Arc<RadialProfile>, band: f64 },
}

impl ProfileSource {
    /// Chooses the closed form when available and otherwise samples H_f out
    /// to where it has decayed (or to r = 1024 at most).
    pub fn for_distribution(dist: &MomentumDistribution, quad: &QuadConfig) -> Result<Self> {
        if dist.is_zero() {
            return Ok(Self::Zero);
        }
        if let DistributionKind::FermiZero { mu } = dist.kind() {
            return Ok(Self::FermiZero { mu: *mu, dim: dist.dim() });
        }
        let band = dist.support_radius();
        let per_unit = (band / 0.02).ceil().max(20.0);
        let mut r_max = 32.0;
        loop {
            let n = (r_max * per_unit) as usize;
            let profile = compute_hf_profile(dist, r_max, n, quad)?;
            let h0 = profile.values()[0].abs();
            let start = n - n / 10;
            let tail_max = profile.values()[start..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let noise = profile.errors()[start..].iter().fold(0.0f64, |m, e| m.max(*e));
            if tail_max <= (1e-13 * h0).max(10.0 * noise) || r_max >= 1024.0 {
                return Ok(Self::Sampled { profile: Arc::new(profile), band });
            }
            r_max *= 2.0;
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::FermiZero { mu, dim } => fermi_zero_hf(*mu, *dim, s),
            Self::Sampled { profile, .. } => profile.eval(s),
        }
    }

    /// Radius of the momentum support; the even extension of h is band-limited to it.
    pub fn band(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::FermiZero { mu, .. } => mu.sqrt(),
            Self::Sampled { band, .. } => *band,
        }
    }

    /// Bound on ∫ |h| over the part of the axis the source does not represent.
    fn truncation_bound(&self) -> f64 {
        match self {
            Self::Sampled { profile, .. } => {
                let t = profile.tail().abs_moment_beyond(profile.r_max(), 0.0);
                t.unwrap_or(f64::INFINITY)
            }
            _ => 0.0,
        }
    }
}

/// ĥ₊(ν) with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformValue {
    pub value: Complex64,
    pub error: f64,
}

/// m_f(τ, k) with an error estimate and a tolerance flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolValue {
    pub value: Complex64,
    pub error: f64,
    pub flagged: bool,
}

/// Far-field trapezoid weights Δs·(1-χ(s_j))·h(s_j)·e^{-η_a s_j}, j ≥ 1.
#[derive(Debug)]
struct FarTable {
    step: f64,
    weights: [Vec<f64>; 3],
}

fn partition(s: f64) -> f64 {
    0.5 * libm::erfc((s - PARTITION_CENTER) / PARTITION_WIDTH)
}

/// Evaluator of the one-sided transform and of the response symbol.
#[derive(Debug, Clone)]
pub struct ResponseEngine {
    source: ProfileSource,
    cfg: SymbolConfig,
    table: Option<Arc<FarTable>>,
    table_cover: f64,
}

impl std::fmt::Debug for ProfileSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::FermiZero { mu, dim } => write!(f, "FermiZero {{ mu: {mu}, dim: {dim} }}"),
            Self::Sampled { profile, band } => write!(f, "Sampled {{ r_max: {}, band: {band} }}", profile.r_max()),
        }
    }
}

impl ResponseEngine {
    /// `nu_cover` is the largest |ν| served from the precomputed far table;
    /// larger frequencies are summed on the fly with a finer spacing.
    pub fn new(source: ProfileSource, cfg: SymbolConfig, nu_cover: f64) -> Result<Self> {
        cfg.validate()?;
        let nu_cover = nu_cover.abs().max(1.0);
        let table = match source {
            ProfileSource::Zero => None,
            _ => Some(Arc::new(Self::build_table(&source, &cfg, nu_cover))),
        };
        Ok(Self { source, cfg, table, table_cover: nu_cover })
    }

    pub fn for_distribution(dist: &MomentumDistribution, cfg: SymbolConfig, nu_cover: f64) -> Result<Self> {
        let source = ProfileSource::for_distribution(dist, &cfg.quad)?;
        Self::new(source, cfg, nu_cover)
    }

    pub fn config(&self) -> &SymbolConfig {
        &self.cfg
    }

    pub fn source(&self) -> &ProfileSource {
        &self.source
    }

    fn far_step(source: &ProfileSource, nu: f64) -> f64 {
        2.0 * PI / (nu.abs() + source.band() + PARTITION_BAND)
    }

    fn far_terms(cfg: &SymbolConfig, step: f64) -> usize {
        (cfg.horizon / cfg.etas[2] / step).ceil() as usize
    }

    fn far_weight(source: &ProfileSource, s: f64, step: f64) -> f64 {
        if s < NEAR_END - 13.0 * PARTITION_WIDTH {
            return 0.0;
        }
        step * (1.0 - partition(s)) * source.eval(s)
    }

    fn build_table(source: &ProfileSource, cfg: &SymbolConfig, nu_cover: f64) -> FarTable {
        let step = Self::far_step(source, nu_cover);
        let n = Self::far_terms(cfg, step);
        let mut weights = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        let decay: Vec<f64> = cfg.etas.iter().map(|e| (-e * step).exp()).collect();
        let mut damp = [1.0; 3];
        for j in 1..=n {
            let s = j as f64 * step;
            let base = Self::far_weight(source, s, step);
            for a in 0..3 {
                damp[a] *= decay[a];
                if j % RESYNC == 0 {
                    damp[a] = (-cfg.etas[a] * s).exp();
                }
                weights[a].push(base * damp[a]);
            }
        }
        FarTable { step, weights }
    }

    fn far_sum(&self, nu: f64) -> [Complex64; 3] {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        match &self.table {
            Some(t) if nu.abs() <= self.table_cover => {
                let rot = Complex64::from_polar(1.0, -nu * t.step);
                let lens: Vec<usize> = self.cfg.etas.iter().map(|e| ((self.cfg.horizon / e / t.step).ceil() as usize).min(t.weights[0].len())).collect();
                let mut z = Complex64::new(1.0, 0.0);
                for j in 0..lens[2] {
                    z *= rot;
                    if (j + 1) % RESYNC == 0 {
                        z = Complex64::from_polar(1.0, -nu * t.step * (j + 1) as f64);
                    }
                    for a in 0..3 {
                        if j < lens[a] {
                            acc[a] += z * t.weights[a][j];
                        }
                    }
                }
            }
            Some(_) => {
                let step = Self::far_step(&self.source, nu);
                let n = Self::far_terms(&self.cfg, step);
                let rot = Complex64::from_polar(1.0, -nu * step);
                let mut z = Complex64::new(1.0, 0.0);
                for j in 1..=n {
                    let s = j as f64 * step;
                    z *= rot;
                    if j % RESYNC == 0 {
                        z = Complex64::from_polar(1.0, -nu * s);
                    }
                    let base = Self::far_weight(&self.source, s, step);
                    for a in 0..3 {
                        let eta = self.cfg.etas[a];
                        if s <= self.cfg.horizon / eta {
                            acc[a] += z * (base * (-eta * s).exp());
                        }
                    }
                }
            }
            None => {}
        }
        acc
    }

    /// The three damped transforms ∫₀^∞ e^{-(η_a + iν)s} h(s) ds and the near-field quadrature error.
    pub fn damped_transforms(&self, nu: f64) -> ([Complex64; 3], f64) {
        if matches!(self.source, ProfileSource::Zero) {
            return ([Complex64::new(0.0, 0.0); 3], 0.0);
        }
        let etas = self.cfg.etas;
        let near = integrate(
            |s: f64| {
                let w = partition(s) * self.source.eval(s);
                let phase = Complex64::from_polar(1.0, -nu * s);
                CVec([phase * (w * (-etas[0] * s).exp()), phase * (w * (-etas[1] * s).exp()), phase * (w * (-etas[2] * s).exp())])
            },
            0.0,
            NEAR_END,
            &self.cfg.quad,
        );
        let far = self.far_sum(nu);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for a in 0..3 {
            out[a] = near.value.0[a] + far[a];
        }
        (out, near.abs_error)
    }

    /// ĥ₊(ν) by second-order Richardson extrapolation over the damping ladder.
    pub fn transform(&self, nu: f64) -> TransformValue {
        let ([i0, i1, i2], quad_err) = self.damped_transforms(nu);
        let r1a = i1 * 2.0 - i0;
        let r1b = i2 * 2.0 - i1;
        let r2 = (r1b * 4.0 - r1a) / 3.0;
        let error = (r2 - r1b).norm() + quad_err + self.source.truncation_bound();
        TransformValue { value: r2, error }
    }

    /// m_f(τ, k) for k > 0.
    pub fn symbol(&self, tau: f64, k: f64) -> Result<SymbolValue> {
        if !(k > 0.0) || !k.is_finite() || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("symbol needs finite τ and k > 0, got τ={tau}, k={k}")));
        }
        if matches!(self.source, ProfileSource::Zero) {
            return Ok(SymbolValue { value: Complex64::new(0.0, 0.0), error: 0.0, flagged: false });
        }
        let minus = self.transform(tau / (2.0 * k) - k / 2.0);
        let plus = self.transform(tau / (2.0 * k) + k / 2.0);
        let value = Complex64::new(0.0, 0.5 / k) * (minus.value - plus.value);
        let error = (minus.error + plus.error) / (2.0 * k);
        Ok(SymbolValue { value, error, flagged: !(error <= self.cfg.tolerance) })
    }
}

/// m_f(τ, k) for a distribution, evaluated pointwise.
pub fn m_f_quadrature(dist: &MomentumDistribution, tau: f64, k: f64, cfg: &SymbolConfig) -> Result<SymbolValue> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("k must be > 0, got {k}")));
    }
    let engine = ResponseEngine::for_distribution(dist, cfg.clone(), tau.abs() / (2.0 * k) + k / 2.0)?;
    engine.symbol(tau, k)
}

/// Provenance carried by a tabulated symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolMeta {
    pub dim: usize,
    pub distribution: String,
    pub config: SymbolConfig,
}

/// m_f sampled on a (τ, k) grid, stored row-major with τ as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseSymbol {
    pub tau_grid: Vec<f64>,
    pub k_grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub err: Vec<f64>,
    pub flagged: Vec<bool>,
    pub meta: SymbolMeta,
}

fn strictly_increasing(v: &[f64]) -> bool {
    !v.is_empty() && v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|x| x.is_finite())
}

impl ResponseSymbol {
    /// Tabulates the symbol in parallel over grid points. Entries at k = 0
    /// are exactly zero (the sine factor vanishes).
    pub fn tabulate(engine: &ResponseEngine, tau_grid: Vec<f64>, k_grid: Vec<f64>, meta: SymbolMeta) -> Result<Self> {
        if !strictly_increasing(&tau_grid) || !strictly_increasing(&k_grid) || k_grid[0] < 0.0 {
            return Err(Error::InvalidParameter("symbol grids must be strictly increasing, with k ≥ 0".into()));
        }
        let nk = k_grid.len();
        let entries: Vec<Result<SymbolValue>> = (0..tau_grid.len() * nk)
            .into_par_iter()
            .map(|idx| {
                let (tau, k) = (tau_grid[idx / nk], k_grid[idx % nk]);
                if k == 0.0 {
                    Ok(SymbolValue { value: Complex64::new(0.0, 0.0), error: 0.0, flagged: false })
                } else {
                    engine.symbol(tau, k)
                }
            })
            .collect();
        let mut values = Vec::with_capacity(entries.len());
        let mut err = Vec::with_capacity(entries.len());
        let mut flagged = Vec::with_capacity(entries.len());
        for e in entries {
            let e = e?;
            values.push(e.value);
            err.push(e.error);
            flagged.push(e.flagged);
        }
        Ok(Self { tau_grid, k_grid, values, err, flagged, meta })
    }

    /// Builds an engine sized for the grid and tabulates.
    pub fn build(dist: &MomentumDistribution, tau_grid: Vec<f64>, k_grid: Vec<f64>, cfg: SymbolConfig) -> Result<Self> {
        let k_min = k_grid.iter().copied().filter(|k| *k > 0.0).fold(f64::INFINITY, f64::min);
        let k_max = k_grid.iter().copied().fold(0.0, f64::max);
        let tau_max = tau_grid.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let cover = if k_min.is_finite() { (tau_max / (2.0 * k_min) + k_max / 2.0).min(4096.0) } else { 1.0 };
        let meta = SymbolMeta { dim: dist.dim(), distribution: format!("{:?}", dist.kind()), config: cfg.clone() };
        let engine = ResponseEngine::for_distribution(dist, cfg, cover)?;
        Self::tabulate(&engine, tau_grid, k_grid, meta)
    }

    pub fn index(&self, i_tau: usize, i_k: usize) -> usize {
        i_tau * self.k_grid.len() + i_k
    }

    pub fn get(&self, i_tau: usize, i_k: usize) -> Complex64 {
        self.values[self.index(i_tau, i_k)]
    }

    pub fn any_flagged(&self) -> bool {
        self.flagged.iter().any(|f| *f)
    }

    /// Whether negative τ is served by conjugate symmetry.
    fn mirrored(&self) -> bool {
        self.tau_grid[0] >= 0.0
    }

    fn locate(grid: &[f64], x: f64) -> Option<(usize, f64)> {
        let n = grid.len();
        if n == 1 {
            return ((x - grid[0]).abs() <= 1e-12 * grid[0].abs().max(1.0)).then_some((0, 0.0));
        }
        let tol = 1e-12 * (grid[n - 1] - grid[0]).abs().max(1.0);
        if x < grid[0] - tol || x > grid[n - 1] + tol {
            return None;
        }
        let i = grid.partition_point(|g| *g <= x).clamp(1, n - 1) - 1;
        let t = ((x - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
        if t <= 1e-12 {
            Some((i, 0.0))
        } else if t >= 1.0 - 1e-12 {
            Some((i + 1, 0.0))
        } else {
            Some((i, t))
        }
    }

    /// Bilinear interpolation, exact at nodes; negative τ by conjugate
    /// symmetry when the table holds τ ≥ 0 only.
    pub fn lookup(&self, tau: f64, k: f64) -> Result<Complex64> {
        if tau < 0.0 && self.mirrored() {
            return self.lookup(-tau, k).map(|v| v.conj());
        }
        let gap = || Error::InvalidParameter(format!("symbol table does not cover (τ, k) = ({tau}, {k})"));
        let (i, s) = Self::locate(&self.tau_grid, tau).ok_or_else(gap)?;
        let (j, t) = Self::locate(&self.k_grid, k.abs()).ok_or_else(gap)?;
        let v = |a: usize, b: usize| self.get(a, b);
        let mut out = v(i, j) * ((1.0 - s) * (1.0 - t));
        if s > 0.0 {
            out += v(i + 1, j) * (s * (1.0 - t));
        }
        if t > 0.0 {
            out += v(i, j + 1) * ((1.0 - s) * t);
        }
        if s > 0.0 && t > 0.0 {
            out += v(i + 1, j + 1) * (s * t);
        }
        Ok(out)
    }

    /// The space-time multiplier (2π)^{d/2}·ŵ(k)·m_f(τ, k).
    pub fn multiplier(&self, w: &Potential, tau: f64, k: f64) -> Result<Complex64> {
        let c = w.coupling(self.meta.dim, k);
        if c == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.lookup(tau, k)? * c)
    }
}
