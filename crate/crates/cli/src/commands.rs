use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::OutputDir;
use crate::row;
use rfh_core::distributions::{compute_hf_profile, hf_l1_norm, DistributionKind};
use rfh_core::dynamics::*;
use rfh_core::fields::*;
use rfh_core::norms::spatial_norm;
use rfh_core::response::*;
use serde_json::json;
use std::sync::Arc;

/// One-line outcome printed by the binary.
pub type Summary = String;

fn background(cfg: &RunConfig) -> Result<(SpectralGrid, Potential, Background), CliError> {
    let grid = cfg.grid()?;
    let dist = cfg.distribution()?;
    let w = cfg.potential()?;
    let modes = build_mode_set(&dist, &grid, cfg.grid.mode_cutoff)?;
    let bg = Background::new(grid.clone(), modes, &w)?;
    Ok((grid, w, bg))
}

fn scatter_table(out: &OutputDir, diag: &ScatterDiagnostics) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for (i, ti) in diag.times.iter().enumerate() {
        for (j, tj) in diag.times.iter().enumerate().skip(i + 1) {
            rows.push(row![*ti, *tj, diag.table[i][j]]);
        }
    }
    let tails: Vec<_> = diag.times.iter().map(|t| json!({ "t_min": t, "tail_sup": diag.tail_sup(*t) })).collect();
    out.write_table("scatter", &["t_i", "t_j", "cauchy_difference"], &rows, json!({ "sigma": diag.sigma, "homogeneous": diag.homogeneous, "profile_norms": diag.profile_norms, "tails": tails }))
}

fn path_table(out: &OutputDir, name: &str, times: &[f64], columns: &[&str], fields: &[&[Vec<f64>]], meta: serde_json::Value) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for (n, t) in times.iter().enumerate() {
        for i in 0..fields[0][n].len() {
            let mut r = row![*t, i];
            r.extend(fields.iter().map(|f| f[n][i].into()));
            rows.push(r);
        }
    }
    out.write_table(name, columns, &rows, meta)
}

/// Radial profile h_f, its tail fit and L¹ norm, and the steady density.
pub fn steady(cfg: &RunConfig, out: &OutputDir) -> Result<Summary, CliError> {
    let dist = cfg.distribution()?;
    let profile = compute_hf_profile(&dist, cfg.steady.r_max, cfg.steady.points, &cfg.quadrature)?;
    let rows: Vec<_> = profile.radii().iter().zip(profile.values()).zip(profile.errors()).map(|((r, h), e)| row![*r, *h, *e]).collect();
    out.write_table("profile", &["r", "h_f", "error"], &rows, json!({ "dim": cfg.dim }))?;
    let grid = cfg.grid()?;
    let modes = build_mode_set(&dist, &grid, cfg.grid.mode_cutoff)?;
    let l1 = hf_l1_norm(&profile);
    let summary = json!({
        "tail": profile.tail(),
        "hf_l1_norm": l1,
        "f_l2_norm_squared": dist.l2_norm_squared(&cfg.quadrature)?,
        "lattice_modes": modes.len(),
        "steady_density": steady_density(&modes),
        "zeros": profile.zeros().len(),
    });
    out.write_json("steady", &summary)?;
    Ok(format!("steady: tail exponent {:.4}, ‖h_f‖_L¹ {}, {} lattice modes", profile.tail().exponent, if l1.divergent { "divergent".to_string() } else { format!("{:.6}", l1.value) }, modes.len()))
}

/// Symbol table, optional log-term residuals and the smallness criteria.
pub fn response(cfg: &RunConfig, out: &OutputDir) -> Result<Summary, CliError> {
    let dist = cfg.distribution()?;
    let w = cfg.potential()?;
    let r = &cfg.response;
    let tau: Vec<f64> = (0..r.tau_points).map(|j| r.tau_max * j as f64 / (r.tau_points - 1) as f64).collect();
    let k: Vec<f64> = (0..r.k_points).map(|i| r.k_min * (r.k_max / r.k_min).powf(i as f64 / (r.k_points - 1) as f64)).collect();
    let symbol = ResponseSymbol::build(&dist, tau, k, cfg.symbol.clone())?;
    let mut rows = Vec::new();
    for (i, t) in symbol.tau_grid.iter().enumerate() {
        for (j, kk) in symbol.k_grid.iter().enumerate() {
            let idx = symbol.index(i, j);
            rows.push(row![*t, *kk, symbol.values[idx].re, symbol.values[idx].im, symbol.err[idx], symbol.flagged[idx]]);
        }
    }
    let flagged = symbol.flagged.iter().filter(|f| **f).count();
    out.write_table("symbol", &["tau", "k", "re_m_f", "im_m_f", "error", "flagged"], &rows, json!({ "symbol": symbol.meta, "flagged": flagged }))?;

    let mut residual = serde_json::Value::Null;
    if r.log_residual && cfg.dim == 3 && matches!(dist.kind(), DistributionKind::FermiZero { .. }) {
        let mut rows = Vec::new();
        let (mut sup_minus, mut sup_plus) = (0.0f64, 0.0f64);
        for (i, t) in symbol.tau_grid.iter().enumerate() {
            for (j, kk) in symbol.k_grid.iter().enumerate() {
                let m = symbol.get(i, j);
                let lt = log_term_3d(*t, *kk)?;
                let (minus, plus) = ((m - lt).norm(), (m + lt).norm());
                sup_minus = sup_minus.max(minus);
                sup_plus = sup_plus.max(plus);
                rows.push(row![*t, *kk, m.re, m.im, lt, minus, plus]);
            }
        }
        out.write_table("log_residual", &["tau", "k", "re_m_f", "im_m_f", "log_term", "abs_m_minus_log", "abs_m_plus_log"], &rows, json!({ "sup_abs_m_minus_log": sup_minus, "sup_abs_m_plus_log": sup_plus }))?;
        residual = json!({ "sup_abs_m_minus_log": sup_minus, "sup_abs_m_plus_log": sup_plus });
    }

    let profile = compute_hf_profile(&dist, cfg.steady.r_max, cfg.steady.points, &cfg.quadrature)?;
    let mut criteria = vec![check_sc(&profile, cfg.dim, &w), check_cs(&profile, cfg.dim, &w)];
    if cfg.dim == 3 {
        criteria.push(check_cor_3d(&w, r.cor3d.delta, r.cor3d.delta0));
    }
    // Flagged entries are kept in the gap (their values are still the best
    // estimates); the count travels with the report.
    let unflagged = ResponseSymbol { flagged: vec![false; symbol.flagged.len()], ..symbol.clone() };
    let mut gap = symbol_gap(&unflagged, &w, r.gap_margin)?;
    gap.inputs.insert("flagged_entries".into(), flagged as f64);
    criteria.push(gap.clone());
    let a = a_theta(&profile, r.theta);
    let report = json!({
        "criteria": criteria,
        "a_theta": { "theta": r.theta, "value": a.as_ref().ok(), "error": a.as_ref().err().map(|e| e.to_string()) },
        "log_residual": residual,
    });
    out.write_json("criteria", &report)?;
    Ok(format!("response: {} symbol entries ({flagged} flagged), gap {:.4}", symbol.values.len(), gap.value))
}

/// Runs the initial value problem and records ρ, V, norms and scattering data.
pub fn simulate(cfg: &RunConfig, out: &OutputDir) -> Result<Summary, CliError> {
    let (grid, w, bg) = background(cfg)?;
    let z0 = cfg.perturbation(&grid, bg.mode_count())?;
    let modes = bg.mode_count();
    let state = RandomFieldState::new(bg, 0.0, z0.correlated, z0.extras)?;
    let run = run_ivp(state, &w, &cfg.evolution)?;
    let path = &run.path;
    path_table(out, "density", &path.times, &["t", "index", "density", "potential"], &[&path.density, &path.potential], json!({ "grid": grid.spec() }))?;

    let names: Vec<String> = cfg.norms.diagnostics.iter().map(|s| rfh_core::norms::NormSpec { time: None, space: s.space }.to_string()).collect();
    let mut columns = vec!["t"];
    columns.extend(names.iter().map(String::as_str));
    let rows: Vec<_> = path
        .times
        .iter()
        .zip(&path.density)
        .map(|(t, rho)| {
            let mut r = row![*t];
            r.extend(cfg.norms.diagnostics.iter().map(|s| spatial_norm(rho, &grid, s.space).into()));
            r
        })
        .collect();
    out.write_table("norms", &columns, &rows, json!({ "of": "density" }))?;
    if let Some(diag) = &run.scatter {
        scatter_table(out, diag)?;
    }
    let drift = run.mass_drift.iter().fold(0.0f64, |m, d| m.max(*d));
    out.write_json("simulate", &json!({ "status": run.status, "modes": modes, "snapshots": path.len(), "max_mass_drift": drift, "sup_density": path.sup_density() }))?;
    match &run.status {
        RunStatus::Completed => Ok(format!("simulate: {} snapshots, sup|ρ| {:.3e}, max mass drift {drift:.2e}", path.len(), path.sup_density())),
        RunStatus::Aborted { time, reason } => Err(CliError::Numerical(format!("run aborted at t = {time}: {reason}"))),
    }
}

/// Picard iteration of Φ with residual history and the final density.
pub fn fixedpoint(cfg: &RunConfig, out: &OutputDir) -> Result<Summary, CliError> {
    let (grid, w, bg) = background(cfg)?;
    let dist = cfg.distribution()?;
    let fp = cfg.fixedpoint.clone();
    let len = fp.multiplier.resolved_len(fp.steps + 1);
    let symbol = lattice_symbol(&dist, fp.dt, len, lattice_shells(&grid), cfg.symbol.clone())?;
    let flagged = symbol.flagged.iter().filter(|f| **f).count();
    let z0 = cfg.perturbation(&grid, bg.mode_count())?;
    let ctx = PhiContext::new(bg, w, Arc::new(symbol), fp.clone())?;
    let report = solve_fixed_point(&z0, &ctx)?;

    let rows: Vec<_> = report
        .residuals
        .iter()
        .enumerate()
        .map(|(n, r)| row![n + 1, *r, if n == 0 { f64::NAN } else { report.ratios[n - 1] }])
        .collect();
    out.write_table("residuals", &["iteration", "residual", "ratio"], &rows, json!({ "norm": ctx.norm_spec(), "tol": fp.tol }))?;
    let times: Vec<f64> = (0..=fp.steps).map(|n| n as f64 * fp.dt).collect();
    path_table(out, "rho", &times, &["t", "index", "rho"], &[&report.rho], json!({ "grid": grid.spec() }))?;
    if let Some(diag) = &report.scatter {
        scatter_table(out, diag)?;
    }
    out.write_json(
        "fixedpoint",
        &json!({ "status": report.status, "iterations": report.residuals.len(), "ratios": report.ratios, "term_norms": report.term_norms, "symbol_entries_flagged": flagged, "padded_len": len }),
    )?;
    let last = report.residuals.last().copied().unwrap_or(0.0);
    match report.status {
        FixedPointStatus::Converged => Ok(format!("fixedpoint: converged in {} iterations, residual {last:.2e}", report.residuals.len())),
        s => Err(CliError::NonConvergence(format!("{s:?} after {} iterations, residual {last:.2e}", report.residuals.len()))),
    }
}

/// Direct versus multiplier response on a single harmonic across refinement levels.
pub fn crosscheck(cfg: &RunConfig, out: &OutputDir) -> Result<Summary, CliError> {
    let (grid, w, bg) = background(cfg)?;
    let dist = cfg.distribution()?;
    let c = &cfg.crosscheck;
    let freq = c.harmonic;
    let k = grid.dxi() * freq.iter().map(|f| (f * f) as f64).sum::<f64>().sqrt();
    let mut rows = Vec::new();
    let mut last = 0.0;
    for &m in &c.levels {
        let dt = c.window / m as f64;
        let mut u: Vec<Vec<f64>> = (0..=m)
            .map(|n| {
                let t = n as f64 * dt;
                (0..grid.len())
                    .map(|i| {
                        let x = grid.position(i);
                        let phase: f64 = (0..3).map(|a| freq[a] as f64 * grid.dxi() * x[a]).sum();
                        phase.cos() * (c.omega * t).cos()
                    })
                    .collect()
            })
            .collect();
        raised_cosine_taper(&mut u);
        let direct = apply_l_direct(&u, dt, &bg, &w, c.rule)?;
        let len = (c.padded_window / dt).round() as usize;
        let shells = if k > 0.0 { vec![k] } else { vec![grid.dxi()] };
        let symbol = lattice_symbol(&dist, dt, len, shells, cfg.symbol.clone())?;
        let multiplier = apply_l_multiplier(&u, dt, &grid, &symbol, &w, &MultiplierOptions { padded_len: Some(len), taper: false })?;
        let (mut diff, mut norm) = (0.0, 0.0);
        for (a, b) in direct.iter().flatten().zip(multiplier.iter().flatten()) {
            diff += (a - b) * (a - b);
            norm += b * b;
        }
        let scale = grid.cell_volume() * dt;
        let abs = (diff * scale).sqrt();
        last = if norm > 0.0 { (diff / norm).sqrt() } else { 0.0 };
        rows.push(row![m, dt, abs, last]);
    }
    out.write_table("crosscheck", &["steps", "dt", "abs_error", "rel_error"], &rows, json!({ "harmonic": freq, "k": k, "omega": c.omega, "window": c.window, "padded_window": c.padded_window }))?;
    Ok(format!("crosscheck: relative error {last:.3e} at the finest level"))
}
