use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Radial interaction measures described by their Fourier multiplier.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// weight·δ₀; constant multiplier.
    PointMass { weight: f64 },
    /// Total mass `weight` spread as a centered Gaussian of standard deviation `width`.
    GaussianMeasure { weight: f64, width: f64 },
    /// weight·κ²/(4π)·e^{-κ|x|}/|x| in d = 3, normalized to total mass `weight`.
    Yukawa3D { weight: f64, screening: f64 },
    /// Multiplier sampled at increasing |ξ| from 0, linear in between and
    /// constant beyond the last node.
    CustomFourier { k: Vec<f64>, values: Vec<f64> },
}

/// A finite signed radial measure w, represented by ŵ(ξ) = ∫ e^{-ix·ξ} dw(x).
///
/// With this normalization (w ∗ u)^ = ŵ·û for any Fourier convention, and
/// ŵ(0) is the total mass of w. The response operator built from w has the
/// space-time multiplier (2π)^{d/2}·ŵ(ξ)·m_f(τ, |ξ|); see [`Potential::coupling`].
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
}

impl Potential {
    pub fn new(kind: PotentialKind) -> Result<Self> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite")))
            }
        };
        match &kind {
            PotentialKind::PointMass { weight } => finite("weight", *weight)?,
            PotentialKind::GaussianMeasure { weight, width } => {
                finite("weight", *weight)?;
                if !(*width > 0.0) || !width.is_finite() {
                    return Err(Error::InvalidParameter("Gaussian width must be finite and > 0".into()));
                }
            }
            PotentialKind::Yukawa3D { weight, screening } => {
                finite("weight", *weight)?;
                if !(*screening > 0.0) || !screening.is_finite() {
                    return Err(Error::InvalidParameter("screening must be finite and > 0".into()));
                }
            }
            PotentialKind::CustomFourier { k, values } => {
                if k.is_empty() || k.len() != values.len() || k[0] != 0.0 {
                    return Err(Error::InvalidParameter("Fourier table needs matching columns starting at |ξ| = 0".into()));
                }
                if k.windows(2).any(|w| !(w[1] > w[0])) || values.iter().chain(k.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("Fourier table needs finite values on strictly increasing |ξ|".into()));
                }
            }
        }
        Ok(Self { kind })
    }

    pub fn point_mass(weight: f64) -> Result<Self> {
        Self::new(PotentialKind::PointMass { weight })
    }

    pub fn zero() -> Self {
        Self { kind: PotentialKind::PointMass { weight: 0.0 } }
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// ŵ at |ξ| = k.
    pub fn w_hat(&self, k: f64) -> f64 {
        let k = k.abs();
        match &self.kind {
            PotentialKind::PointMass { weight } => *weight,
            PotentialKind::GaussianMeasure { weight, width } => weight * (-0.5 * width * width * k * k).exp(),
            PotentialKind::Yukawa3D { weight, screening } => {
                let s2 = screening * screening;
                weight * s2 / (s2 + k * k)
            }
            PotentialKind::CustomFourier { k: nodes, values } => {
                let last = nodes.len() - 1;
                if k >= nodes[last] {
                    return values[last];
                }
                let i = nodes.partition_point(|x| *x <= k) - 1;
                let t = (k - nodes[i]) / (nodes[i + 1] - nodes[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    pub fn w_hat_zero(&self) -> f64 {
        self.w_hat(0.0)
    }

    /// (2π)^{d/2}·ŵ(k): the factor multiplying m_f in the response symbol.
    pub fn coupling(&self, dim: usize, k: f64) -> f64 {
        (2.0 * PI).powf(dim as f64 / 2.0) * self.w_hat(k)
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::PointMass { weight }
            | PotentialKind::GaussianMeasure { weight, .. }
            | PotentialKind::Yukawa3D { weight, .. } => *weight == 0.0,
            PotentialKind::CustomFourier { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// ‖ŵ‖_∞ (exact for every kind: the built-in multipliers peak at 0 and
    /// tables are piecewise linear).
    pub fn sup_abs(&self) -> f64 {
        match &self.kind {
            PotentialKind::PointMass { weight }
            | PotentialKind::GaussianMeasure { weight, .. }
            | PotentialKind::Yukawa3D { weight, .. } => weight.abs(),
            PotentialKind::CustomFourier { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// sup_ξ |ŵ(ξ)|/|ξ|; infinite when ŵ(0) ≠ 0.
    pub fn sup_ratio(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::CustomFourier { k, values } => {
                if values[0] != 0.0 {
                    return f64::INFINITY;
                }
                if k.len() == 1 {
                    return 0.0;
                }
                // |ŵ|/k is monotone on each linear piece, so endpoints suffice.
                let mut sup = (values[1] / k[1]).abs();
                for i in 1..k.len() {
                    sup = sup.max((values[i] / k[i]).abs());
                }
                sup
            }
            _ => f64::INFINITY,
        }
    }

    /// The measure λ·w.
    pub fn scaled(&self, lambda: f64) -> Self {
        let kind = match &self.kind {
            PotentialKind::PointMass { weight } => PotentialKind::PointMass { weight: lambda * weight },
            PotentialKind::GaussianMeasure { weight, width } => PotentialKind::GaussianMeasure { weight: lambda * weight, width: *width },
            PotentialKind::Yukawa3D { weight, screening } => PotentialKind::Yukawa3D { weight: lambda * weight, screening: *screening },
            PotentialKind::CustomFourier { k, values } => PotentialKind::CustomFourier { k: k.clone(), values: values.iter().map(|v| lambda * v).collect() },
        };
        Self { kind }
    }
}
