use super::propagator::{half_phases, sv_step_state, FreePropagator};
use super::scatter::{ScatterDiagnostics, ScatterRecorder};
use super::{EvolutionConfig, SelfConsistency};
use crate::error::{Error, Result};
use crate::fields::{compute_density, DensityPath, HartreeMap, RandomFieldState};
use crate::response::Potential;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// The step starting at `time` produced non-finite values; outputs end
    /// at the last valid snapshot.
    Aborted { time: f64, reason: String },
}

#[derive(Clone, Debug)]
pub struct IvpRun {
    pub path: DensityPath,
    pub scatter: Option<ScatterDiagnostics>,
    pub final_state: RandomFieldState,
    /// |‖x_k(T)‖² - ‖x_k(0)‖²| / ‖x_k(0)‖² per direction, Y's first.
    pub mass_drift: Vec<f64>,
    pub status: RunStatus,
}

/// Number of steps of size `dt` covering [0, t_end] exactly.
pub(crate) fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter("need dt > 0 and t_end ≥ 0".into()));
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

/// Evolves X = Y + Z mode by mode under the self-consistent potential
/// V = w∗ρ_Z, ρ_Z = Σ_k(|x_k|² - |y_k|²) + Σ_j|e_j|², from `initial.t` to
/// `initial.t + cfg.t_end`.
pub fn run_ivp(initial: RandomFieldState, w: &Potential, cfg: &EvolutionConfig) -> Result<IvpRun> {
    cfg.validate()?;
    let steps = step_count(cfg.dt, cfg.t_end)?;
    let grid = initial.grid().clone();
    let prop = FreePropagator::new(&grid, initial.background.mass_shift, cfg.dt, cfg.dealias)?;
    let hartree = HartreeMap::new(w, &grid);
    let mut recorder = (cfg.scatter_every > 0).then(|| ScatterRecorder::new(&grid, initial.background.mass_shift, cfg.scatter_sigma, cfg.scatter_homogeneous));

    let masses0 = initial.mode_masses();
    let t0 = initial.t;
    let mut state = initial;
    let mut path = DensityPath::default();
    let rho = compute_density(&state);
    let mut v = hartree.apply(&rho)?;
    path.push(state.t, rho, v.clone());
    if let Some(r) = recorder.as_mut() {
        r.record(&state);
    }

    let mut status = RunStatus::Completed;
    for n in 0..steps {
        let start = half_phases(&v, cfg.dt)?;
        let mut end = start.clone();
        let mut next = state.clone();
        sv_step_state(&mut next, &start, &end, &prop);
        if let SelfConsistency::Picard { iterations } = cfg.self_consistency {
            for _ in 0..iterations {
                let v_end = hartree.apply(&compute_density(&next))?;
                end = half_phases(&v_end, cfg.dt)?;
                next = state.clone();
                sv_step_state(&mut next, &start, &end, &prop);
            }
        }
        // Exact multiples of dt keep sample times free of accumulated rounding.
        next.t = t0 + (n + 1) as f64 * cfg.dt;
        if !next.is_finite() {
            status = RunStatus::Aborted { time: state.t, reason: "non-finite field values".into() };
            break;
        }
        let rho = compute_density(&next);
        let v_next = match hartree.apply(&rho) {
            Ok(v) if v.iter().all(|x| x.is_finite()) => v,
            Ok(_) => {
                status = RunStatus::Aborted { time: state.t, reason: "non-finite potential".into() };
                break;
            }
            Err(e) => {
                status = RunStatus::Aborted { time: state.t, reason: e.to_string() };
                break;
            }
        };
        state = next;
        v = v_next;
        if (n + 1) % cfg.sample_every == 0 || n + 1 == steps {
            path.push(state.t, rho, v.clone());
        }
        if let Some(r) = recorder.as_mut() {
            if (n + 1) % cfg.scatter_every == 0 {
                r.record(&state);
            }
        }
    }

    let mass_drift = state.mode_masses().iter().zip(&masses0).map(|(m, m0)| if *m0 > 0.0 { (m - m0).abs() / m0 } else { *m }).collect();
    let scatter = match recorder {
        Some(r) if r.sample_count() >= 3 => Some(r.finish()?),
        _ => None,
    };
    Ok(IvpRun { path, scatter, final_state: state, mass_drift, status })
}
