use crate::error::{Error, Result};
use crate::fields::{RandomFieldState, SpectralGrid};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// The free flow S(dt) = e^{-i dt(m - Δ)} as a tabulated Fourier multiplier,
/// optionally followed by the two-thirds dealiasing mask.
#[derive(Clone, Debug)]
pub struct FreePropagator {
    grid: SpectralGrid,
    dt: f64,
    phases: Vec<Complex64>,
}

impl FreePropagator {
    /// Rejects steps whose largest phase increment dt·(max|ξ|²) reaches 2π.
    pub fn new(grid: &SpectralGrid, mass_shift: f64, dt: f64, dealias: bool) -> Result<Self> {
        if !dt.is_finite() {
            return Err(Error::InvalidParameter("time step must be finite".into()));
        }
        let phase = dt.abs() * grid.max_xi2();
        if phase >= 2.0 * PI {
            return Err(Error::NumericalGuard(format!("dt·max|ξ|² = {phase:.3} reaches 2π; reduce dt or the grid resolution")));
        }
        let mask = dealias.then(|| grid.dealias_mask());
        let phases = grid
            .xi2()
            .iter()
            .enumerate()
            .map(|(i, x2)| {
                if mask.as_ref().is_some_and(|m| !m[i]) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(1.0, -dt * (mass_shift + x2))
                }
            })
            .collect();
        Ok(Self { grid: grid.clone(), dt, phases })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn apply(&self, field: &mut [Complex64]) {
        self.grid.forward(field);
        for (v, p) in field.iter_mut().zip(&self.phases) {
            *v *= p;
        }
        self.grid.inverse(field);
    }
}

/// S(dt) applied to one field; the multiplier is e^{-i dt(m + |ξ|²)}.
pub fn free_step(field: &mut [Complex64], grid: &SpectralGrid, mass_shift: f64, dt: f64) -> Result<()> {
    FreePropagator::new(grid, mass_shift, dt, false)?.apply(field);
    Ok(())
}

/// Pointwise half-step factors e^{-i dt V/2} of a real potential.
pub fn half_phases(v: &[f64], dt: f64) -> Result<Vec<Complex64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalGuard("potential is not finite".into()));
    }
    Ok(v.iter().map(|x| Complex64::from_polar(1.0, -0.5 * dt * x)).collect())
}

/// Strang step e^{-i dt V_end/2}·S(dt)·e^{-i dt V_start/2} with the half-step
/// factors precomputed by [`half_phases`]. Each factor is unitary, so the
/// L² norm of the field is conserved up to roundoff.
pub fn sv_step_with(field: &mut [Complex64], start: &[Complex64], end: &[Complex64], prop: &FreePropagator) {
    for (v, p) in field.iter_mut().zip(start) {
        *v *= p;
    }
    prop.apply(field);
    for (v, p) in field.iter_mut().zip(end) {
        *v *= p;
    }
}

/// One Strang step of a single field under the potential interpolating
/// V_start and V_end. A time-independent potential passes the same array twice.
pub fn sv_step(field: &mut [Complex64], v_start: &[f64], v_end: &[f64], prop: &FreePropagator) -> Result<()> {
    let dt = prop.dt();
    sv_step_with(field, &half_phases(v_start, dt)?, &half_phases(v_end, dt)?, prop);
    Ok(())
}

/// Applies [`sv_step_with`] to every mode field of a state and advances its time.
pub fn sv_step_state(state: &mut RandomFieldState, start: &[Complex64], end: &[Complex64], prop: &FreePropagator) {
    let RandomFieldState { combined, extras, .. } = state;
    combined.par_iter_mut().chain(extras.par_iter_mut()).for_each(|f| sv_step_with(f, start, end, prop));
    state.t += prop.dt();
}
