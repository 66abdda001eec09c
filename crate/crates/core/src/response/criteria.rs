//! Sufficient conditions for invertibility of 1 - L and related functionals.
//!
//! All criteria use the effective coupling (2π)^{d/2}·ŵ, the factor that
//! multiplies m_f in the symbol of L, so that each one bounds the operator
//! actually applied by the solvers.

use super::{Potential, ResponseSymbol};
use crate::distributions::{RadialProfile, TAIL_MARGIN};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_pieces, integrate_to_infinity, QuadConfig};
use crate::special::gamma;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionName {
    SC,
    CS,
    COR3D,
    GAP,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub name: CriterionName,
    pub value: f64,
    pub satisfied: bool,
    /// The integral diverged and `value` is infinite.
    pub divergent: bool,
    /// Estimate of ‖(1 - L)^{-1}‖ when the criterion provides one.
    pub bound_estimate: Option<f64>,
    pub inputs: BTreeMap<String, f64>,
}

/// (1/(2√(2π)))·min(log(max(ε, k)), 0) with ε = min(|2 - τ/k|, |2 + τ/k|).
pub fn log_term_3d(tau: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("k must be > 0, got {k}")));
    }
    let ratio = tau / k;
    let eps = (2.0 - ratio).abs().min((2.0 + ratio).abs());
    Ok(eps.max(k).ln().min(0.0) / (2.0 * (2.0 * PI).sqrt()))
}

fn coupling_sup(w: &Potential, dim: usize) -> f64 {
    (2.0 * PI).powf(dim as f64 / 2.0) * w.sup_abs()
}

/// ‖c‖_∞/(2|S^{d-1}|)·∫|H_f(x)|/|x|^{d-2} dx with c the effective coupling;
/// the angular factor cancels, leaving ‖c‖_∞/2·∫₀^∞|h(r)| r dr.
pub fn check_sc(profile: &RadialProfile, dim: usize, w: &Potential) -> CriterionReport {
    let sup = coupling_sup(w, dim);
    let moment = profile.abs_moment(1.0);
    let mut inputs = BTreeMap::from([("coupling_sup".to_string(), sup), ("dim".to_string(), dim as f64), ("tail_exponent".to_string(), profile.tail().exponent)]);
    let (value, divergent) = if sup == 0.0 {
        (0.0, false)
    } else if moment.divergent {
        (f64::INFINITY, true)
    } else {
        inputs.insert("radial_moment".into(), moment.value);
        (0.5 * sup * moment.value, false)
    };
    CriterionReport { name: CriterionName::SC, value, satisfied: value < 1.0, divergent, bound_estimate: None, inputs }
}

/// sup|c(ξ)|/|ξ| · ∫₀^∞|h(r)| dr with c the effective coupling.
pub fn check_cs(profile: &RadialProfile, dim: usize, w: &Potential) -> CriterionReport {
    let ratio = (2.0 * PI).powf(dim as f64 / 2.0) * w.sup_ratio();
    let moment = profile.abs_moment(0.0);
    let mut inputs = BTreeMap::from([("coupling_ratio_sup".to_string(), ratio), ("dim".to_string(), dim as f64)]);
    let (value, divergent) = if ratio == 0.0 {
        (0.0, false)
    } else if moment.divergent {
        (f64::INFINITY, true)
    } else {
        inputs.insert("radial_l1".into(), moment.value);
        (ratio * moment.value, false)
    };
    CriterionReport { name: CriterionName::CS, value, satisfied: value < 1.0, divergent, bound_estimate: None, inputs }
}

/// Checks -δ ≤ c(ξ) ≤ δ₀/⟨log|ξ|⟩ on 2001 log-spaced |ξ| ∈ [1e-6, 1e6],
/// c = (2π)^{3/2}ŵ. The value is the largest violation margin, so the
/// bound holds exactly when the value is ≤ 0.
pub fn check_cor_3d(w: &Potential, delta: f64, delta0: f64) -> CriterionReport {
    let n = 2001;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        let xi = 10f64.powf(-6.0 + 12.0 * i as f64 / (n - 1) as f64);
        let c = w.coupling(3, xi);
        let bracket = (1.0 + xi.ln().powi(2)).sqrt();
        worst = worst.max((-delta - c).max(c - delta0 / bracket));
    }
    let inputs = BTreeMap::from([("delta".to_string(), delta), ("delta0".to_string(), delta0)]);
    CriterionReport { name: CriterionName::COR3D, value: worst, satisfied: worst <= 0.0, divergent: false, bound_estimate: None, inputs }
}

/// inf over the table of |1 - c(k)·m_f(τ, k)|; satisfied when above `margin`.
pub fn symbol_gap(symbol: &ResponseSymbol, w: &Potential, margin: f64) -> Result<CriterionReport> {
    let flagged = symbol.flagged.iter().filter(|f| **f).count();
    if flagged > 0 {
        return Err(Error::NumericalGuard(format!("{flagged} symbol entries exceed the error tolerance")));
    }
    let mut gap = f64::INFINITY;
    for (i, _) in symbol.tau_grid.iter().enumerate() {
        for (j, &k) in symbol.k_grid.iter().enumerate() {
            let c = w.coupling(symbol.meta.dim, k);
            gap = gap.min((1.0 - symbol.get(i, j) * c).norm());
        }
    }
    let inputs = BTreeMap::from([("margin".to_string(), margin)]);
    Ok(CriterionReport {
        name: CriterionName::GAP,
        value: gap,
        satisfied: gap > margin,
        divergent: false,
        bound_estimate: (gap > 0.0).then(|| 1.0 / gap),
        inputs,
    })
}

fn beta(a: f64, b: f64) -> f64 {
    gamma(a) * gamma(b) / gamma(a + b)
}

/// A_θ[g] = (∫_ℝ (∫_ℝ |g(√(u²+v²))|·|u|^θ du)² dv)^{1/2}.
///
/// Both integrands are even, so A_θ² = 8∫₀^∞ I(v)² dv with
/// I(v) = ∫₀^∞ |g(√(u²+v²))| u^θ du. Beyond the sampled radius the tail
/// model's mean |g| is used, in closed form where v exceeds it.
pub fn a_theta(profile: &RadialProfile, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("θ must lie in (0, 1), got {theta}")));
    }
    if profile.is_zero() {
        return Ok(0.0);
    }
    let tail = *profile.tail();
    let has_tail = tail.constant != 0.0;
    let p = tail.exponent;
    if has_tail && (p - theta - 1.0 <= TAIL_MARGIN || 2.0 * (p - 1.0 - theta) - 1.0 <= TAIL_MARGIN) {
        return Err(Error::NumericalGuard(format!("A_θ diverges for tail exponent {p:.3} at θ = {theta}")));
    }
    let r_max = profile.r_max();
    let c = tail.mean_abs(1.0);
    let b = if has_tail { 0.5 * beta(0.5 * (1.0 + theta), 0.5 * (p - 1.0 - theta)) } else { 0.0 };
    let inner_cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 1e-11, max_subdivisions: 400 };
    let outer_cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 1e-10, max_subdivisions: 400 };
    let expo = 1.0 / (1.0 + theta);

    let inner = |v: f64| -> f64 {
        if v >= r_max {
            return if has_tail { c * b * v.powf(1.0 + theta - p) } else { 0.0 };
        }
        let u_max = (r_max * r_max - v * v).sqrt();
        let w_max = u_max.powf(1.0 + theta);
        let mut cuts = vec![0.0];
        for &z in profile.zeros() {
            if z > v {
                let w = (z * z - v * v).sqrt().powf(1.0 + theta);
                if w > 0.0 && w < w_max {
                    cuts.push(w);
                }
            }
        }
        cuts.push(w_max);
        let sampled = integrate_pieces(
            |w: f64| {
                let u = w.powf(expo);
                profile.eval((u * u + v * v).sqrt()).abs() * expo
            },
            &cuts,
            &inner_cfg,
        );
        let beyond = if has_tail {
            integrate_to_infinity(|u: f64| c * (u * u + v * v).powf(-0.5 * p) * u.powf(theta), u_max, &inner_cfg).value
        } else {
            0.0
        };
        sampled.value + beyond
    };

    let mut cuts = vec![0.0];
    cuts.extend(profile.zeros().iter().copied().filter(|z| *z > 0.0 && *z < r_max));
    cuts.push(r_max);
    let mut total = 0.0;
    for piece in cuts.windows(2) {
        total += integrate(|v: f64| inner(v).powi(2), piece[0], piece[1], &outer_cfg).value;
    }
    if has_tail {
        let q = 2.0 * (p - 1.0 - theta) - 1.0;
        total += (c * b).powi(2) * r_max.powf(-q) / q;
    }
    Ok((8.0 * total).sqrt())
}
