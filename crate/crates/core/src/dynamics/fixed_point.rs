use super::linear::{apply_resolvent, duhamel, MultiplierOptions};
use super::propagator::{half_phases, sv_step_with, FreePropagator};
use super::scatter::{scatter_weight, ScatterDiagnostics};
use super::DuhamelRule;
use crate::error::{Error, Result};
use crate::fields::{chunked_sum, Background, HartreeMap, SpectralGrid};
use crate::norms::{mixed_norm, NormSpec};
use crate::response::{Potential, ResponseSymbol};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Initial perturbation Z₀: components along Y's Gaussian directions
/// (`correlated`, one field per mode) and along independent directions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InitialPerturbation {
    pub correlated: Option<Vec<Vec<Complex64>>>,
    pub extras: Vec<Vec<Complex64>>,
}

impl InitialPerturbation {
    pub fn independent(extras: Vec<Vec<Complex64>>) -> Self {
        Self { correlated: None, extras }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: &Vec<Vec<Complex64>>| v.iter().map(|f| f.iter().map(|z| z * factor).collect()).collect::<Vec<Vec<Complex64>>>();
        Self { correlated: self.correlated.as_ref().map(s), extras: s(&self.extras) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixedPointConfig {
    pub dt: f64,
    pub steps: usize,
    pub duhamel: DuhamelRule,
    pub multiplier: MultiplierOptions,
    /// Smallest admissible |1 - (2π)^{d/2}ŵ m_f| on the used entries.
    pub gap_margin: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Residual norm; `None` selects L²_t H^{1/2} in d = 3 and L²_t Ḣ^{-1/2} otherwise.
    pub norm: Option<NormSpec>,
    /// Record S(-t)Z(t) every this many steps (0 disables).
    pub scatter_every: usize,
    pub scatter_sigma: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            dt: 0.25,
            steps: 40,
            duhamel: DuhamelRule::Trapezoid,
            multiplier: MultiplierOptions::default(),
            gap_margin: 0.1,
            tol: 1e-10,
            max_iter: 20,
            norm: None,
            scatter_every: 0,
            scatter_sigma: 0.25,
        }
    }
}

impl FixedPointConfig {
    pub fn resolved_norm(&self, dim: usize) -> NormSpec {
        self.norm.unwrap_or_else(|| if dim == 3 { "L2t:Hs(0.5)" } else { "L2t:Hdot(-0.5)" }.parse().expect("valid norm literal"))
    }
}

/// Everything Φ needs besides ρ and Z₀.
#[derive(Clone, Debug)]
pub struct PhiContext {
    pub background: Background,
    pub w: Potential,
    pub symbol: Arc<ResponseSymbol>,
    pub cfg: FixedPointConfig,
    hartree: HartreeMap,
    free: FreePropagator,
    norm: NormSpec,
}

impl PhiContext {
    pub fn new(background: Background, w: Potential, symbol: Arc<ResponseSymbol>, cfg: FixedPointConfig) -> Result<Self> {
        if cfg.steps < 2 || !(cfg.dt > 0.0) {
            return Err(Error::InvalidParameter("fixed point needs dt > 0 and at least 2 steps".into()));
        }
        let grid = &*background.grid;
        let hartree = HartreeMap::new(&w, grid);
        let free = FreePropagator::new(grid, background.mass_shift, cfg.dt, false)?;
        let norm = cfg.resolved_norm(grid.dim());
        Ok(Self { background, w, symbol, cfg, hartree, free, norm })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.background.grid
    }

    pub fn norm_spec(&self) -> NormSpec {
        self.norm
    }

    /// Configured space-time norm of a path on the run's time grid.
    pub fn norm(&self, path: &[Vec<f64>]) -> f64 {
        mixed_norm(path, self.cfg.dt, self.grid(), self.norm)
    }

    pub fn zero_path(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.grid().len()]; self.cfg.steps + 1]
    }
}

#[derive(Clone, Debug)]
pub struct PhiOutput {
    pub rho: Vec<Vec<f64>>,
    /// Norms of 𝔸₁, …, 𝔸₅ in the configured norm.
    pub term_norms: [f64; 5],
    pub scatter: Option<ScatterDiagnostics>,
}

/// Φ[ρ] = (1 - L)^{-1}(𝔸₁ + … + 𝔸₅) with, for V = w∗ρ frozen,
/// 𝔸₁ = E|S_V Z₀|², 𝔸₂ = 2Re E[S_V Z₀·conj(D_V(VY))], 𝔸₃ = E|D_V(VY)|²,
/// 𝔸₄ = 2Re E[Ȳ S_V Z₀] and 𝔸₅ = 2Re E[Ȳ D_V(VY)] - L[ρ].
///
/// S_V is the piecewise Strang product over the time grid; D_V and the free
/// D inside L use the same Duhamel rule, so 𝔸₅ is exactly the part of
/// 2Re E[Ȳ D_V(VY)] beyond first order in V.
pub fn apply_phi(rho: &[Vec<f64>], z0: &InitialPerturbation, ctx: &PhiContext) -> Result<PhiOutput> {
    let grid = ctx.grid();
    let n = grid.len();
    let steps = ctx.cfg.steps;
    let dt = ctx.cfg.dt;
    if rho.len() != steps + 1 || rho.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter(format!("density path must have {} snapshots of {n} points", steps + 1)));
    }
    let modes = ctx.background.mode_count();
    if let Some(c) = &z0.correlated {
        if c.len() != modes || c.iter().any(|f| f.len() != n) {
            return Err(Error::InvalidParameter("correlated perturbation needs one grid field per mode".into()));
        }
    }
    if z0.extras.iter().any(|f| f.len() != n) {
        return Err(Error::InvalidParameter("extra field size does not match the grid".into()));
    }
    let v = rho.iter().map(|r| ctx.hartree.apply(r)).collect::<Result<Vec<_>>>()?;
    let halves = v.iter().map(|x| half_phases(x, dt)).collect::<Result<Vec<_>>>()?;
    let sv = |t: usize, f: &mut [Complex64]| sv_step_with(f, &halves[t], &halves[t + 1], &ctx.free);

    let samples: Vec<usize> = match ctx.cfg.scatter_every {
        0 => Vec::new(),
        e => (0..=steps).step_by(e).collect(),
    };
    let ns = samples.len();
    let weights: Vec<f64> = grid.xi2().iter().map(|x2| scatter_weight(*x2, ctx.cfg.scatter_sigma, false)).collect();
    let m = ctx.background.mass_shift;
    let back = |t: f64, field: &[Complex64]| -> Vec<Complex64> {
        let mut c = field.to_vec();
        grid.forward(&mut c);
        for ((z, x2), w) in c.iter_mut().zip(grid.xi2()).zip(&weights) {
            *z *= Complex64::from_polar(*w, t * (m + x2));
        }
        c
    };
    let block = (steps + 1) * n;
    let cauchy_at = 5 * block;
    let pair_sums = |spectra: &[Vec<Complex64>], acc: &mut [f64]| {
        for i in 0..ns {
            for j in (i + 1)..ns {
                let s: f64 = spectra[i].iter().zip(&spectra[j]).map(|(a, b)| (a - b).norm_sqr()).sum();
                acc[cauchy_at + i * ns + j] += s;
            }
            acc[cauchy_at + i * ns + i] += spectra[i].iter().map(|a| a.norm_sqr()).sum::<f64>();
        }
    };
    let w_active = !ctx.hartree.is_zero();

    let flat = chunked_sum(modes + z0.extras.len(), 5 * block + ns * ns, |idx, acc| {
        let mut spectra = Vec::with_capacity(ns);
        if idx >= modes {
            // Independent direction: only 𝔸₁ and the scattering profile.
            let mut e = z0.extras[idx - modes].clone();
            for t in 0..=steps {
                if t > 0 {
                    sv(t - 1, &mut e);
                }
                for (a, x) in acc[t * n..(t + 1) * n].iter_mut().zip(&e) {
                    *a += x.norm_sqr();
                }
                if samples.contains(&t) {
                    spectra.push(back(t as f64 * dt, &e));
                }
            }
            pair_sums(&spectra, acc);
            return;
        }
        let k = idx;
        let mut y = vec![ZERO; n];
        // S_V z0_k along the run, when Z₀ has a component along g_k.
        let s_traj: Option<Vec<Vec<Complex64>>> = z0.correlated.as_ref().map(|c| {
            let mut s = c[k].clone();
            let mut traj = Vec::with_capacity(steps + 1);
            for t in 0..=steps {
                if t > 0 {
                    sv(t - 1, &mut s);
                }
                traj.push(s.clone());
            }
            traj
        });
        let source = |t: usize, out: &mut [Complex64]| {
            ctx.background.steady_field(k, t as f64 * dt, out);
            for (o, vv) in out.iter_mut().zip(&v[t]) {
                *o *= vv;
            }
        };
        if w_active {
            // -L[ρ] part of 𝔸₅.
            let mut yl = vec![ZERO; n];
            duhamel(ctx.cfg.duhamel, steps, dt, n, |_, f| ctx.free.apply(f), source, |t, d| {
                ctx.background.steady_field(k, t as f64 * dt, &mut yl);
                for ((a, yy), dd) in acc[4 * block + t * n..4 * block + (t + 1) * n].iter_mut().zip(&yl).zip(d) {
                    *a -= 2.0 * (yy.conj() * dd).re;
                }
            });
        }
        let mut z = vec![ZERO; n];
        duhamel(ctx.cfg.duhamel, steps, dt, n, sv, source, |t, d| {
            ctx.background.steady_field(k, t as f64 * dt, &mut y);
            let r = t * n..(t + 1) * n;
            for (i, ((yy, dd), zz)) in y.iter().zip(d).zip(z.iter_mut()).enumerate() {
                let x = r.start + i;
                acc[2 * block + x] += dd.norm_sqr();
                acc[4 * block + x] += 2.0 * (yy.conj() * dd).re;
                *zz = *dd;
                if let Some(traj) = &s_traj {
                    let s = traj[t][i];
                    acc[x] += s.norm_sqr();
                    acc[block + x] += 2.0 * (s * dd.conj()).re;
                    acc[3 * block + x] += 2.0 * (yy.conj() * s).re;
                    *zz += s;
                }
            }
            if samples.contains(&t) {
                spectra.push(back(t as f64 * dt, &z));
            }
        });
        pair_sums(&spectra, acc);
    });

    let terms: Vec<Vec<Vec<f64>>> = (0..5).map(|a| flat[a * block..(a + 1) * block].chunks(n).map(|c| c.to_vec()).collect()).collect();
    let mut term_norms = [0.0; 5];
    for (a, t) in terms.iter().enumerate() {
        term_norms[a] = ctx.norm(t);
    }
    let source: Vec<Vec<f64>> = (0..=steps).map(|t| (0..n).map(|x| terms.iter().map(|a| a[t][x]).sum()).collect()).collect();
    let out = apply_resolvent(&source, dt, grid, &ctx.symbol, &ctx.w, &ctx.cfg.multiplier, ctx.cfg.gap_margin)?;

    let scatter = (ns >= 3).then(|| {
        let scale = grid.cell_volume() / n as f64;
        let mut table = vec![vec![0.0; ns]; ns];
        let mut profile_norms = vec![0.0; ns];
        for i in 0..ns {
            profile_norms[i] = (flat[cauchy_at + i * ns + i] * scale).sqrt();
            for j in (i + 1)..ns {
                let d = (flat[cauchy_at + i * ns + j] * scale).sqrt();
                table[i][j] = d;
                table[j][i] = d;
            }
        }
        ScatterDiagnostics { times: samples.iter().map(|t| *t as f64 * dt).collect(), sigma: ctx.cfg.scatter_sigma, homogeneous: false, table, profile_norms }
    });
    Ok(PhiOutput { rho: out, term_norms, scatter })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointStatus {
    Converged,
    MaxIterations,
    /// Three consecutive residual ratios ≥ 1.
    NonContraction,
}

#[derive(Clone, Debug)]
pub struct FixedPointReport {
    pub rho: Vec<Vec<f64>>,
    /// ‖ρ^{n+1} - ρ^n‖ per iteration.
    pub residuals: Vec<f64>,
    /// residuals[n+1] / residuals[n].
    pub ratios: Vec<f64>,
    pub status: FixedPointStatus,
    pub term_norms: [f64; 5],
    /// Cauchy table of S(-t)Z(t) for Z = S_V Z₀ + D_V(VY) from the last evaluation.
    pub scatter: Option<ScatterDiagnostics>,
}

/// Picard iteration ρ^{n+1} = Φ[ρ^n] from ρ⁰ = 0.
pub fn solve_fixed_point(z0: &InitialPerturbation, ctx: &PhiContext) -> Result<FixedPointReport> {
    let mut rho = ctx.zero_path();
    let mut residuals: Vec<f64> = Vec::new();
    let mut ratios = Vec::new();
    let mut status = FixedPointStatus::MaxIterations;
    let mut last = None;
    for _ in 0..ctx.cfg.max_iter.max(1) {
        let out = apply_phi(&rho, z0, ctx)?;
        let diff: Vec<Vec<f64>> = out.rho.iter().zip(&rho).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
        let r = ctx.norm(&diff);
        if !r.is_finite() {
            return Err(Error::NumericalGuard("fixed-point residual is not finite".into()));
        }
        if let Some(prev) = residuals.last() {
            ratios.push(if *prev > 0.0 { r / prev } else { f64::INFINITY });
        }
        residuals.push(r);
        rho = out.rho.clone();
        last = Some(out);
        if r <= ctx.cfg.tol {
            status = FixedPointStatus::Converged;
            break;
        }
        if ratios.len() >= 3 && ratios[ratios.len() - 3..].iter().all(|q| *q >= 1.0) {
            status = FixedPointStatus::NonContraction;
            break;
        }
    }
    let last = last.expect("at least one iteration");
    Ok(FixedPointReport { rho, residuals, ratios, status, term_norms: last.term_norms, scatter: last.scatter })
}
