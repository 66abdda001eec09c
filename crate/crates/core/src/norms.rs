//! Discrete fractional Sobolev, Lebesgue and mixed space-time norms on a
//! [`SpectralGrid`].
//!
//! Norm strings have the form `[<time>:]<space>`:
//!
//! ```text
//! time  := "L" p "t"              p ∈ {1, 2, ..., inf}, e.g. L2t, Linft
//! space := "Hs(" σ ")"            ‖⟨∇⟩^σ u‖_{L²}
//!        | "Hdot(" σ ")"          ‖|∇|^σ u‖_{L²}, zero frequency dropped
//!        | "L" q                  ‖u‖_{L^q}, q ∈ {1, 2, ..., inf}
//! ```
//!
//! so `L2t:Hs(0.5)` is L²_t H^{1/2}_x and `Linft:L2` is L^∞_t L²_x.

use crate::error::{Error, Result};
use crate::fields::SpectralGrid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpaceNorm {
    /// ‖|∇|^σ u‖_{L²} (homogeneous) or ‖⟨∇⟩^σ u‖_{L²}.
    Sobolev { sigma: f64, homogeneous: bool },
    /// ‖u‖_{L^q}; q = ∞ is the maximum.
    Lebesgue { q: f64 },
}

/// L^p_t(X) over a uniform time grid, or the spatial norm alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NormSpec {
    /// Time exponent; `None` for a purely spatial norm.
    pub time: Option<f64>,
    pub space: SpaceNorm,
}

fn parse_exponent(s: &str) -> Result<f64> {
    let p = if s == "inf" { f64::INFINITY } else { s.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad exponent '{s}'")))? };
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent must be ≥ 1, got {s}")));
    }
    Ok(p)
}

fn fmt_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognized norm '{s}'"));
        let (time, space) = match s.split_once(':') {
            Some((t, x)) => {
                let p = t.strip_prefix('L').and_then(|r| r.strip_suffix('t')).ok_or_else(bad)?;
                (Some(parse_exponent(p)?), x)
            }
            None => (None, s),
        };
        let sobolev = |prefix: &str| space.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
        let space = if let Some(v) = sobolev("Hdot(") {
            SpaceNorm::Sobolev { sigma: v.trim().parse().map_err(|_| bad())?, homogeneous: true }
        } else if let Some(v) = sobolev("Hs(") {
            SpaceNorm::Sobolev { sigma: v.trim().parse().map_err(|_| bad())?, homogeneous: false }
        } else if let Some(q) = space.strip_prefix('L') {
            SpaceNorm::Lebesgue { q: parse_exponent(q)? }
        } else {
            return Err(bad());
        };
        if let SpaceNorm::Sobolev { sigma, .. } = space {
            if !sigma.is_finite() {
                return Err(Error::InvalidParameter("σ must be finite".into()));
            }
        }
        Ok(Self { time, space })
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.time {
            write!(f, "L{}t:", fmt_exponent(p))?;
        }
        match self.space {
            SpaceNorm::Sobolev { sigma, homogeneous: true } => write!(f, "Hdot({sigma})"),
            SpaceNorm::Sobolev { sigma, homogeneous: false } => write!(f, "Hs({sigma})"),
            SpaceNorm::Lebesgue { q } => write!(f, "L{}", fmt_exponent(q)),
        }
    }
}

impl TryFrom<String> for NormSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NormSpec> for String {
    fn from(n: NormSpec) -> String {
        n.to_string()
    }
}

/// The Fourier weight of |∇|^σ or ⟨∇⟩^σ at |ξ|². For the homogeneous weight
/// |ξ|^σ at ξ = 0 is 0 when σ > 0 and 1 when σ = 0; negative σ leaves it
/// undefined and callers drop the entry.
fn sobolev_weight(xi2: f64, sigma: f64, homogeneous: bool) -> f64 {
    if sigma == 0.0 {
        1.0
    } else if homogeneous {
        if xi2 == 0.0 {
            0.0
        } else {
            xi2.powf(0.5 * sigma)
        }
    } else {
        (1.0 + xi2).powf(0.5 * sigma)
    }
}

/// |∇|^σ u or ⟨∇⟩^σ u by multiplication on the frequency side.
///
/// A homogeneous negative order is ill-defined for input with nonzero mean
/// on the torus and is rejected; for mean-zero input the zero frequency is
/// left at 0.
pub fn frac_deriv(u: &[Complex64], grid: &SpectralGrid, sigma: f64, homogeneous: bool) -> Result<Vec<Complex64>> {
    if u.len() != grid.len() {
        return Err(Error::InvalidParameter("field size does not match the grid".into()));
    }
    if !sigma.is_finite() {
        return Err(Error::InvalidParameter("σ must be finite".into()));
    }
    let mut c = u.to_vec();
    grid.forward(&mut c);
    if homogeneous && sigma < 0.0 {
        let scale = c.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if c[0].norm() > 1e-10 * scale {
            return Err(Error::InvalidParameter("homogeneous negative-order derivative of a field with nonzero mean".into()));
        }
    }
    for (v, x2) in c.iter_mut().zip(grid.xi2()) {
        *v *= if homogeneous && sigma < 0.0 && *x2 == 0.0 { 0.0 } else { sobolev_weight(*x2, sigma, homogeneous) };
    }
    grid.inverse(&mut c);
    Ok(c)
}

/// Grid-sampled values accepted by the norm routines.
pub trait GridValue: Copy + Send + Sync {
    fn to_complex(self) -> Complex64;
}

impl GridValue for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl GridValue for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Spatial norm of one field. Sobolev norms are frequency-exact; for a
/// homogeneous negative order the mean is dropped (see [`field_mean`]).
pub fn spatial_norm<T: GridValue>(u: &[T], grid: &SpectralGrid, space: SpaceNorm) -> f64 {
    match space {
        SpaceNorm::Sobolev { sigma, homogeneous } => {
            let mut c: Vec<Complex64> = u.iter().map(|v| v.to_complex()).collect();
            grid.forward(&mut c);
            let s: f64 = c.iter().zip(grid.xi2()).map(|(z, x2)| {
                let w = if homogeneous && sigma < 0.0 && *x2 == 0.0 { 0.0 } else { sobolev_weight(*x2, sigma, homogeneous) };
                w * w * z.norm_sqr()
            }).sum();
            (s * grid.cell_volume() / grid.len() as f64).sqrt()
        }
        SpaceNorm::Lebesgue { q } if q.is_infinite() => u.iter().fold(0.0f64, |m, v| m.max(v.to_complex().norm())),
        SpaceNorm::Lebesgue { q } => {
            let s: f64 = u.iter().map(|v| v.to_complex().norm().powf(q)).sum::<f64>() * grid.cell_volume();
            s.powf(1.0 / q)
        }
    }
}

/// Spatial average of a field.
pub fn field_mean<T: GridValue>(u: &[T]) -> Complex64 {
    u.iter().map(|v| v.to_complex()).sum::<Complex64>() / u.len() as f64
}

/// (Σ_k ‖u_k‖²_X)^{1/2}: the L²_ω X norm of a mode-resolved random field.
pub fn ensemble_norm(fields: &[Vec<Complex64>], grid: &SpectralGrid, space: SpaceNorm) -> f64 {
    fields.iter().map(|f| spatial_norm(f, grid, space).powi(2)).sum::<f64>().sqrt()
}

/// ‖u‖_{L^p_t X} for snapshots on a uniform time grid with spacing `dt`:
/// spatial norms per snapshot, then the trapezoid rule in t (max for p = ∞).
/// A spec without a time exponent is treated as L^∞_t.
pub fn mixed_norm<T: GridValue>(samples: &[Vec<T>], dt: f64, grid: &SpectralGrid, spec: NormSpec) -> f64 {
    let inner: Vec<f64> = samples.iter().map(|u| spatial_norm(u, grid, spec.space)).collect();
    outer_norm(&inner, dt, spec.time.unwrap_or(f64::INFINITY))
}

/// L^p norm of a uniformly sampled function of t by the trapezoid rule.
pub fn outer_norm(values: &[f64], dt: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let s: f64 = values.iter().enumerate().map(|(i, v)| {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        w * v.abs().powf(p)
    }).sum();
    (s * dt).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grammar_round_trips() {
        for s in ["L2t:Hs(0.5)", "L2t:Hdot(-0.5)", "Linft:L2", "L2t:L4", "Hs(0.25)", "L1t:Linf"] {
            let n: NormSpec = s.parse().unwrap();
            assert_eq!(n.to_string(), s);
        }
        assert_eq!("L2t:Hs(-0.0)".parse::<NormSpec>().unwrap().space, SpaceNorm::Sobolev { sigma: 0.0, homogeneous: false });
        for bad in ["L0.5t:L2", "X2t:L2", "L2t:H(1)", "L2t:Hs(x)", "L2t:Hs(inf)"] {
            assert!(bad.parse::<NormSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn plane_wave_is_an_eigenfunction() {
        let grid = SpectralGrid::new(2, 2.0 * PI, 16).unwrap();
        let mut u = vec![Complex64::new(0.0, 0.0); grid.len()];
        grid.plane_wave([3, -4, 0], Complex64::new(1.0, 0.0), &mut u);
        let d = frac_deriv(&u, &grid, 1.0, true).unwrap();
        for (a, b) in d.iter().zip(&u) {
            assert!((a - b * 5.0).norm() < 1e-12);
        }
        let id = frac_deriv(&u, &grid, 0.0, false).unwrap();
        assert!(id.iter().zip(&u).all(|(a, b)| (a - b).norm() < 1e-14));
        let ones = vec![Complex64::new(1.0, 0.0); grid.len()];
        assert!(frac_deriv(&ones, &grid, -0.5, true).is_err());
    }

    #[test]
    fn second_order_matches_finite_differences() {
        // -Δ of a smooth periodic field against the centered 3-point stencil.
        let mut errors = Vec::new();
        for n in [32usize, 64] {
            let grid = SpectralGrid::new(1, 2.0 * PI, n).unwrap();
            let h = 2.0 * PI / n as f64;
            let u: Vec<Complex64> = (0..n).map(|i| Complex64::new((((i as f64) * h).sin()).exp(), 0.0)).collect();
            let d = frac_deriv(&u, &grid, 2.0, true).unwrap();
            let err = (0..n)
                .map(|i| {
                    let fd = -(u[(i + 1) % n] - 2.0 * u[i] + u[(i + n - 1) % n]) / (h * h);
                    (fd - d[i]).norm()
                })
                .fold(0.0, f64::max);
            errors.push(err);
        }
        let ratio = errors[0] / errors[1];
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn gaussian_in_time_single_harmonic() {
        // u = e^{-t²} cos(x) on [0, 2π): ‖u‖²_{L²_t L²_x} = π·∫_{-T}^{T} e^{-2t²} dt.
        let grid = SpectralGrid::new(1, 2.0 * PI, 16).unwrap();
        let dt = 0.01;
        let samples: Vec<Vec<f64>> = (-600..=600)
            .map(|i| {
                let t = i as f64 * dt;
                (0..16).map(|j| (-t * t).exp() * (j as f64 * 2.0 * PI / 16.0).cos()).collect()
            })
            .collect();
        let got = mixed_norm(&samples, dt, &grid, "L2t:L2".parse().unwrap());
        let want = (PI * (PI / 2.0).sqrt()).sqrt();
        assert!(((got - want) / want).abs() < 1e-10);
        assert_eq!(mixed_norm(&vec![vec![0.0; 16]; 5], dt, &grid, "L2t:Hs(0.5)".parse().unwrap()), 0.0);
    }
}
