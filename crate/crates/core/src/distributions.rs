//! Momentum distributions |f(ξ)|², the inverse Fourier transform H_f of
//! |f|² and its sampled radial profile h_f.
//!
//! Fourier convention: H_f(x) = (2π)^{-d/2} ∫ e^{ix·ξ} |f(ξ)|² dξ. For a
//! radial profile g(ρ) = |f(ρ)|² this reduces to
//! H_f(r) = ∫₀^∞ ρ^{d-1} g(ρ) J_ν(rρ)/(rρ)^ν dρ with ν = d/2 - 1.
//! The Fermi ball |ξ|² ≤ μ has the closed form H_f(r) = μ^{d/2} J_{d/2}(√μ r)/(√μ r)^{d/2}.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_pieces, QuadConfig};
use crate::response::Potential;
use crate::special::{bessel_j_over_power, gamma, sphere_area};
use crate::spline::{CubicSpline, LeftEnd};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Thermal weights below e^{-THERMAL_CUTOFF} of their peak are treated as zero.
const THERMAL_CUTOFF: f64 = 40.0;

/// Tail exponents within this distance of a divergence threshold count as divergent.
pub const TAIL_MARGIN: f64 = 0.05;

/// Decay of a [`RadialTable`] beyond its last node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableTail {
    /// Identically zero beyond the last node.
    Compact,
    /// value(last) · exp(-rate·(ρ - ρ_last)) beyond the last node.
    Exponential { rate: f64 },
}

/// Sampled radial |f|², cubic-interpolated and clamped at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialTable {
    spline: CubicSpline,
    tail: TableTail,
}

impl RadialTable {
    pub fn new(radii: Vec<f64>, values: Vec<f64>, tail: TableTail) -> Result<Self> {
        if radii.first().map_or(true, |r| *r < 0.0) {
            return Err(Error::InvalidParameter("radial table needs nodes starting at ρ ≥ 0".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("radial table values must be finite and ≥ 0".into()));
        }
        if let TableTail::Exponential { rate } = tail {
            if !(rate > 0.0) {
                return Err(Error::InvalidParameter("exponential tail rate must be > 0".into()));
            }
        }
        let spline = CubicSpline::new(radii, values, LeftEnd::Natural)?;
        Ok(Self { spline, tail })
    }

    pub fn radii(&self) -> &[f64] {
        self.spline.nodes()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn tail(&self) -> TableTail {
        self.tail
    }

    fn last(&self) -> (f64, f64) {
        let r = self.spline.nodes();
        let v = self.spline.values();
        (r[r.len() - 1], v[v.len() - 1])
    }

    fn eval(&self, rho: f64) -> f64 {
        let (r_last, v_last) = self.last();
        if rho < self.spline.nodes()[0] {
            return self.spline.values()[0];
        }
        if rho <= r_last {
            return self.spline.eval(rho).max(0.0);
        }
        match self.tail {
            TableTail::Compact => 0.0,
            TableTail::Exponential { rate } => v_last * (-rate * (rho - r_last)).exp(),
        }
    }

    fn support(&self) -> f64 {
        let (r_last, v_last) = self.last();
        match self.tail {
            TableTail::Compact => r_last,
            TableTail::Exponential { rate } if v_last > 0.0 => r_last + THERMAL_CUTOFF / rate,
            TableTail::Exponential { .. } => r_last,
        }
    }

    fn is_zero(&self) -> bool {
        self.spline.values().iter().all(|v| *v == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DistributionKind {
    FermiZero { mu: f64 },
    FermiDirac { temperature: f64, mu: f64 },
    Bose { temperature: f64, mu: f64 },
    Boltzmann { temperature: f64, mu: f64 },
    CustomRadial(RadialTable),
}

/// A radial squared momentum profile |f(ξ)|² in dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumDistribution {
    kind: DistributionKind,
    dim: usize,
}

impl MomentumDistribution {
    pub fn new(kind: DistributionKind, dim: usize) -> Result<Self> {
        if !(1..=8).contains(&dim) {
            return Err(Error::Unsupported(format!("dimension {dim}; 1 ≤ d ≤ 8 is supported")));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        match &kind {
            DistributionKind::FermiZero { mu } => positive("μ", *mu)?,
            DistributionKind::FermiDirac { temperature, mu } | DistributionKind::Boltzmann { temperature, mu } => {
                positive("temperature", *temperature)?;
                if !mu.is_finite() {
                    return Err(Error::InvalidParameter("μ must be finite".into()));
                }
            }
            DistributionKind::Bose { temperature, mu } => {
                positive("temperature", *temperature)?;
                if !(*mu < 0.0) {
                    return Err(Error::InvalidParameter(format!("Bose distribution needs μ < 0 (pole at |ξ|² = μ), got {mu}")));
                }
            }
            DistributionKind::CustomRadial(_) => {}
        }
        Ok(Self { kind, dim })
    }

    pub fn fermi_zero(mu: f64, dim: usize) -> Result<Self> {
        Self::new(DistributionKind::FermiZero { mu }, dim)
    }

    pub fn boltzmann(temperature: f64, mu: f64, dim: usize) -> Result<Self> {
        Self::new(DistributionKind::Boltzmann { temperature, mu }, dim)
    }

    /// The identically vanishing distribution.
    pub fn zero(dim: usize) -> Result<Self> {
        let table = RadialTable::new(vec![0.0, 1.0], vec![0.0, 0.0], TableTail::Compact)?;
        Self::new(DistributionKind::CustomRadial(table), dim)
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.kind, DistributionKind::CustomRadial(t) if t.is_zero())
    }

    /// |f(ξ)|² at |ξ| = ρ.
    pub fn f_squared(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be ≥ 0, got {rho}")));
        }
        Ok(self.f_squared_unchecked(rho))
    }

    pub(crate) fn f_squared_unchecked(&self, rho: f64) -> f64 {
        let e = rho * rho;
        match &self.kind {
            DistributionKind::FermiZero { mu } => {
                if e <= *mu {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionKind::FermiDirac { temperature, mu } => {
                let a = (e - mu) / temperature;
                if a > 0.0 {
                    let x = (-a).exp();
                    x / (1.0 + x)
                } else {
                    1.0 / (a.exp() + 1.0)
                }
            }
            DistributionKind::Bose { temperature, mu } => 1.0 / ((e - mu) / temperature).exp_m1(),
            DistributionKind::Boltzmann { temperature, mu } => (-(e - mu) / temperature).exp(),
            DistributionKind::CustomRadial(t) => t.eval(rho),
        }
    }

    /// Radius beyond which |f|² vanishes or is below e^{-40} of its scale.
    pub fn support_radius(&self) -> f64 {
        match &self.kind {
            DistributionKind::FermiZero { mu } => mu.sqrt(),
            DistributionKind::FermiDirac { temperature, mu }
            | DistributionKind::Bose { temperature, mu }
            | DistributionKind::Boltzmann { temperature, mu } => (mu.max(0.0) + THERMAL_CUTOFF * temperature).sqrt(),
            DistributionKind::CustomRadial(t) => t.support(),
        }
    }

    /// Radii where |f|² is discontinuous or has a sharp transition.
    fn breakpoints(&self) -> Vec<f64> {
        let rmax = self.support_radius();
        let mut pts = vec![0.0];
        match &self.kind {
            DistributionKind::FermiDirac { mu, .. } | DistributionKind::Boltzmann { mu, .. } if *mu > 0.0 => {
                let c = mu.sqrt();
                if c < rmax {
                    pts.push(c);
                }
            }
            DistributionKind::CustomRadial(t) => {
                let (r_last, _) = t.last();
                if r_last < rmax {
                    pts.push(r_last);
                }
            }
            _ => {}
        }
        pts.push(rmax);
        pts
    }

    /// ‖f‖²_{L²} = ∫|f(ξ)|² dξ.
    pub fn l2_norm_squared(&self, cfg: &QuadConfig) -> Result<f64> {
        let d = self.dim;
        if let DistributionKind::FermiZero { mu } = self.kind {
            return Ok(sphere_area(d) * mu.powf(d as f64 / 2.0) / d as f64);
        }
        let r = integrate_pieces(|rho: f64| rho.powi(d as i32 - 1) * self.f_squared_unchecked(rho), &self.breakpoints(), cfg);
        if !r.converged {
            return Err(Error::QuadratureNotConverged(format!("‖f‖² error estimate {:.3e}", r.abs_error)));
        }
        Ok(sphere_area(d) * r.value)
    }
}

/// |f(ξ)|² at |ξ| = ρ.
pub fn eval_f_squared(dist: &MomentumDistribution, rho: f64) -> Result<f64> {
    dist.f_squared(rho)
}

/// A value of H_f with an absolute error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HfValue {
    pub value: f64,
    pub abs_error: f64,
}

/// Closed form of H_f for the Fermi ball of radius √μ.
pub fn fermi_zero_hf(mu: f64, dim: usize, r: f64) -> f64 {
    let k = mu.sqrt();
    let x = k * r;
    if dim == 3 && x >= 0.5 {
        let (s, c) = x.sin_cos();
        return mu.powf(1.5) * (2.0 / PI).sqrt() * (s - x * c) / (x * x * x);
    }
    if dim == 1 && x > 0.0 {
        return (2.0 / PI).sqrt() * x.sin() / r;
    }
    mu.powf(dim as f64 / 2.0) * bessel_j_over_power(dim as f64 / 2.0, x).expect("order d/2 is supported for d ≤ 8")
}

/// H_f(r) by adaptive radial quadrature, for any distribution.
pub fn hf_by_quadrature(dist: &MomentumDistribution, r: f64, cfg: &QuadConfig) -> Result<HfValue> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be ≥ 0, got {r}")));
    }
    if dist.is_zero() {
        return Ok(HfValue { value: 0.0, abs_error: 0.0 });
    }
    let d = dist.dim;
    let nu = d as f64 / 2.0 - 1.0;
    let norm = (2.0 / PI).sqrt();
    let mut pts = dist.breakpoints();
    // Split long oscillatory ranges so each piece holds a few periods.
    let rmax = *pts.last().unwrap();
    let periods = (r * rmax / (2.0 * PI)).ceil() as usize;
    if periods > 8 {
        let pieces = periods / 4;
        let mut refined = Vec::with_capacity(pts.len() + pieces);
        for w in pts.windows(2) {
            let n = ((w[1] - w[0]) / rmax * pieces as f64).ceil().max(1.0) as usize;
            for j in 0..n {
                refined.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
            }
        }
        refined.push(rmax);
        pts = refined;
    }
    let res = match d {
        1 => integrate_pieces(|rho: f64| norm * (r * rho).cos() * dist.f_squared_unchecked(rho), &pts, cfg),
        3 => integrate_pieces(
            |rho: f64| {
                let x = r * rho;
                let kernel = if x < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                norm * rho * rho * kernel * dist.f_squared_unchecked(rho)
            },
            &pts,
            cfg,
        ),
        _ => integrate_pieces(
            |rho: f64| {
                let j = bessel_j_over_power(nu, r * rho).expect("supported order");
                rho.powi(d as i32 - 1) * j * dist.f_squared_unchecked(rho)
            },
            &pts,
            cfg,
        ),
    };
    if !res.converged {
        return Err(Error::QuadratureNotConverged(format!("H_f({r}) error estimate {:.3e}", res.abs_error)));
    }
    Ok(HfValue { value: res.value, abs_error: res.abs_error })
}

/// H_f(r): closed form for the Fermi ball, radial quadrature otherwise.
pub fn compute_hf(dist: &MomentumDistribution, r: f64, cfg: &QuadConfig) -> Result<HfValue> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be ≥ 0, got {r}")));
    }
    match dist.kind {
        DistributionKind::FermiZero { mu } => {
            let value = fermi_zero_hf(mu, dist.dim, r);
            let scale = mu.powf(dist.dim as f64 / 2.0);
            Ok(HfValue { value, abs_error: 1e-15 * scale })
        }
        _ => hf_by_quadrature(dist, r, cfg),
    }
}

/// H_f(0) = (2π)^{-d/2} ‖f‖², the value at the origin.
pub fn hf_at_origin(dist: &MomentumDistribution, cfg: &QuadConfig) -> Result<f64> {
    Ok((2.0 * PI).powf(-(dist.dim as f64) / 2.0) * dist.l2_norm_squared(cfg)?)
}

/// Power-law model C·r^{-p} of |h| beyond the last sampled radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub exponent: f64,
    pub constant: f64,
    /// When true the model is the envelope of an oscillating profile.
    pub oscillatory: bool,
    pub points_used: usize,
}

impl TailModel {
    pub fn vanishing() -> Self {
        Self { exponent: f64::INFINITY, constant: 0.0, oscillatory: false, points_used: 0 }
    }

    pub fn envelope(&self, r: f64) -> f64 {
        if self.constant == 0.0 {
            0.0
        } else {
            self.constant * r.powf(-self.exponent)
        }
    }

    /// Mean of |h| under the model; an oscillating envelope averages to 2/π of itself.
    pub fn mean_abs(&self, r: f64) -> f64 {
        self.envelope(r) * self.abs_factor()
    }

    fn abs_factor(&self) -> f64 {
        if self.oscillatory {
            2.0 / PI
        } else {
            1.0
        }
    }

    /// ∫_{r0}^∞ mean|h|·r^q dr, or `None` when the exponent does not clear
    /// the integrability threshold q + 1 by [`TAIL_MARGIN`].
    pub fn abs_moment_beyond(&self, r0: f64, q: f64) -> Option<f64> {
        if self.constant == 0.0 {
            return Some(0.0);
        }
        let excess = self.exponent - q - 1.0;
        if excess <= TAIL_MARGIN {
            return None;
        }
        Some(self.abs_factor() * self.constant * r0.powf(-excess) / excess)
    }
}

/// An integral that may diverge; divergence is flagged rather than thrown.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailIntegral {
    pub value: f64,
    pub divergent: bool,
}

/// Sampled radial profile h(r), r ∈ [0, r_max], with a fitted tail model.
///
/// The interpolant is a cubic spline with zero slope at the origin
/// (evenness of h) and a natural end at r_max.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    spline: CubicSpline,
    errors: Vec<f64>,
    tail: TailModel,
    zeros: Vec<f64>,
}

impl RadialProfile {
    /// Builds a profile from uniform samples on [0, r_max]; `errors` are
    /// absolute error estimates of the samples (zero for exact values).
    pub fn from_samples(radii: Vec<f64>, values: Vec<f64>, errors: Vec<f64>) -> Result<Self> {
        if radii.len() < 3 || radii[0] != 0.0 {
            return Err(Error::InvalidParameter("profile needs at least three nodes starting at r = 0".into()));
        }
        if errors.len() != values.len() {
            return Err(Error::InvalidParameter("one error estimate per sample is required".into()));
        }
        let spline = CubicSpline::new(radii, values, LeftEnd::Slope(0.0))?;
        let tail = if spline.values().iter().all(|v| *v == 0.0) {
            TailModel::vanishing()
        } else {
            fit_tail(spline.nodes(), spline.values(), &errors)?
        };
        let zeros = (0..spline.nodes().len() - 1)
            .filter(|&i| {
                let (a, b) = (spline.values()[i], spline.values()[i + 1]);
                a != 0.0 && b != 0.0 && (a < 0.0) != (b < 0.0)
            })
            .map(|i| spline.root_in_interval(i))
            .collect();
        Ok(Self { spline, errors, tail, zeros })
    }

    /// Samples `h` on n+1 uniform nodes of [0, r_max].
    pub fn from_fn<F: Fn(f64) -> f64>(h: F, r_max: f64, n: usize) -> Result<Self> {
        let radii = uniform_nodes(r_max, n)?;
        let values = radii.iter().map(|&r| h(r)).collect();
        let errors = vec![0.0; n + 1];
        Self::from_samples(radii, values, errors)
    }

    pub fn radii(&self) -> &[f64] {
        self.spline.nodes()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn tail(&self) -> &TailModel {
        &self.tail
    }

    pub fn r_max(&self) -> f64 {
        *self.spline.nodes().last().unwrap()
    }

    /// Sign changes of the interpolant.
    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    /// h(|r|) inside the sampled range; zero beyond r_max, where only the
    /// tail bound [`RadialProfile::abs_beyond`] is known.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.r_max() {
            0.0
        } else {
            self.spline.eval(r)
        }
    }

    /// Mean |h| predicted by the tail model at r > r_max.
    pub fn abs_beyond(&self, r: f64) -> f64 {
        self.tail.mean_abs(r.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.spline.values().iter().all(|v| *v == 0.0)
    }

    /// ∫₀^{r_max} |h(r)| r^q dr over the interpolant, split at its zeros.
    pub fn abs_moment_sampled(&self, q: f64) -> f64 {
        let x = self.spline.nodes();
        let mut total = 0.0;
        let mut zi = 0;
        for i in 0..x.len() - 1 {
            let (a, b) = (x[i], x[i + 1]);
            let mut cuts = vec![a];
            while zi < self.zeros.len() && self.zeros[zi] <= b {
                if self.zeros[zi] > a {
                    cuts.push(self.zeros[zi]);
                }
                zi += 1;
            }
            cuts.push(b);
            for w in cuts.windows(2) {
                let mut f = |r: f64| self.spline.eval(r).abs() * if q == 0.0 { 1.0 } else { r.powf(q) };
                total += crate::quadrature::gk21(&mut f, w[0], w[1]).0;
            }
        }
        total
    }

    /// ∫₀^∞ |h(r)| r^q dr, sampled part plus tail model.
    pub fn abs_moment(&self, q: f64) -> TailIntegral {
        match self.tail.abs_moment_beyond(self.r_max(), q) {
            Some(t) => TailIntegral { value: self.abs_moment_sampled(q) + t, divergent: false },
            None => TailIntegral { value: f64::INFINITY, divergent: true },
        }
    }
}

fn uniform_nodes(r_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(r_max > 0.0) || !r_max.is_finite() || n < 2 {
        return Err(Error::InvalidParameter(format!("profile needs r_max > 0 and n ≥ 2, got r_max={r_max}, n={n}")));
    }
    Ok((0..=n).map(|i| r_max * i as f64 / n as f64).collect())
}

/// Least-squares power-law fit of |h| over the last decade of nodes.
fn fit_tail(radii: &[f64], values: &[f64], errors: &[f64]) -> Result<TailModel> {
    let r_max = *radii.last().unwrap();
    let start = radii.iter().position(|&r| r >= r_max / 10.0 && r > 0.0).unwrap();
    let n = radii.len();
    let global = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let half_window = (n / 50).max(2);

    let usable: Vec<usize> = (start..n)
        .filter(|&i| {
            let v = values[i].abs();
            let lo = i.saturating_sub(half_window);
            let hi = (i + half_window).min(n - 1);
            let local = values[lo..=hi].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            v > 0.0 && v > 10.0 * errors[i] && v > 1e-13 * global && v >= 1e-8 * local
        })
        .collect();

    let sign_changes = usable.windows(2).filter(|p| (values[p[0]] < 0.0) != (values[p[1]] < 0.0)).count();
    let oscillatory = sign_changes >= 2;
    let points: Vec<usize> = if oscillatory {
        usable
            .iter()
            .copied()
            .filter(|&i| i > 0 && i + 1 < n && values[i].abs() >= values[i - 1].abs() && values[i].abs() >= values[i + 1].abs())
            .collect()
    } else {
        usable
    };
    if points.len() < 8 {
        let significant = (start..n).any(|i| values[i].abs() > 10.0 * errors[i] && values[i].abs() > 1e-13 * global);
        if !significant {
            // The sampled tail is zero to within its quadrature error.
            return Ok(TailModel::vanishing());
        }
        return Err(Error::TailFitRejected(format!("{} usable tail nodes, at least 8 are needed", points.len())));
    }

    let m = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &i in &points {
        let x = radii[i].ln();
        let y = values[i].abs().ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;
    let exponent = (-slope).max(0.0);
    // Anchor the constant so the model matches the largest fitted value near r_max.
    let last = *points.last().unwrap();
    let anchored = points[points.len().saturating_sub(3)..]
        .iter()
        .map(|&i| values[i].abs() * radii[i].powf(exponent))
        .fold(0.0f64, f64::max);
    let constant = anchored.max(intercept.exp() * radii[last].powf(slope + exponent));
    Ok(TailModel { exponent, constant, oscillatory, points_used: points.len() })
}

/// Samples H_f on n+1 uniform nodes of [0, r_max] and fits the tail.
pub fn compute_hf_profile(dist: &MomentumDistribution, r_max: f64, n: usize, cfg: &QuadConfig) -> Result<RadialProfile> {
    let radii = uniform_nodes(r_max, n)?;
    if dist.is_zero() {
        let zeros = vec![0.0; n + 1];
        return RadialProfile::from_samples(radii, zeros.clone(), zeros);
    }
    let mut values = Vec::with_capacity(n + 1);
    let mut errors = Vec::with_capacity(n + 1);
    for &r in &radii {
        let h = compute_hf(dist, r, cfg)?;
        values.push(h.value);
        errors.push(h.abs_error);
    }
    RadialProfile::from_samples(radii, values, errors)
}

/// ‖h_f‖_{L¹(ℝ)} = 2∫₀^∞|h_f|, flagged infinite for tails not decaying faster than r^{-1}.
pub fn hf_l1_norm(profile: &RadialProfile) -> TailIntegral {
    let m = profile.abs_moment(0.0);
    TailIntegral { value: 2.0 * m.value, divergent: m.divergent }
}

/// A steady state: distribution, interaction and the induced mass shift.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyStateParams {
    pub distribution: MomentumDistribution,
    pub potential: Potential,
    /// m = ŵ(0)·‖f‖²; equals the constant potential w ∗ E|Y|².
    pub mass_shift: f64,
}

impl SteadyStateParams {
    pub fn new(distribution: MomentumDistribution, potential: Potential, cfg: &QuadConfig) -> Result<Self> {
        let mass_shift = potential.w_hat_zero() * distribution.l2_norm_squared(cfg)?;
        Ok(Self { distribution, potential, mass_shift })
    }
}

/// Closed-form Gaussian integral ∫ e^{-(|ξ|²-μ)/T} dξ = e^{μ/T} (πT)^{d/2}.
pub fn boltzmann_total(temperature: f64, mu: f64, dim: usize) -> f64 {
    (mu / temperature).exp() * (PI * temperature).powf(dim as f64 / 2.0)
}

/// H_f(0) for the Fermi ball, μ^{d/2}/(2^{d/2} Γ(d/2 + 1)).
pub fn fermi_zero_hf_origin(mu: f64, dim: usize) -> f64 {
    let h = dim as f64 / 2.0;
    mu.powf(h) / (2f64.powf(h) * gamma(h + 1.0))
}
