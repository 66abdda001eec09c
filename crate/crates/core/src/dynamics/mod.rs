//! Time evolution of mode-resolved perturbations: free and potential
//! propagators, the self-consistent initial value problem, the two
//! realizations of the response operator L, the fixed-point map Φ and
//! scattering diagnostics.

mod fixed_point;
mod ivp;
mod linear;
mod propagator;
mod scatter;

pub use fixed_point::{apply_phi, solve_fixed_point, FixedPointConfig, FixedPointReport, FixedPointStatus, InitialPerturbation, PhiContext, PhiOutput};
pub use ivp::{run_ivp, IvpRun, RunStatus};
pub use linear::{apply_l_direct, apply_l_multiplier, apply_resolvent, apply_space_time_multiplier, lattice_shells, lattice_symbol, raised_cosine_taper, time_frequency, MultiplierOptions};
pub use propagator::{free_step, half_phases, sv_step, sv_step_state, sv_step_with, FreePropagator};
pub use scatter::{scattering_diagnostic, ScatterDiagnostics, ScatterRecorder};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Quadrature of the retarded Duhamel integral in time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuhamelRule {
    #[default]
    Trapezoid,
    Simpson,
}

/// How the potential of a step is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SelfConsistency {
    /// V from the density at the start of the step, for both half steps.
    #[default]
    Frozen,
    /// Redo the step `iterations` times with the end half step using V
    /// from the previous trial's final density.
    Picard { iterations: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub self_consistency: SelfConsistency,
    /// Store ρ and V every this many steps (the final step is always stored).
    pub sample_every: usize,
    /// Record S(-t)Z(t) every this many steps; 0 disables the diagnostic.
    pub scatter_every: usize,
    pub scatter_sigma: f64,
    pub scatter_homogeneous: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_end: 1.0,
            dealias: false,
            self_consistency: SelfConsistency::Frozen,
            sample_every: 1,
            scatter_every: 0,
            scatter_sigma: 0.25,
            scatter_homogeneous: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter("dt must be finite and > 0".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample_every must be ≥ 1".into()));
        }
        if !self.scatter_sigma.is_finite() {
            return Err(Error::InvalidParameter("scatter_sigma must be finite".into()));
        }
        Ok(())
    }
}
