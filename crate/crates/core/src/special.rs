//! Bessel functions of the first kind for integer and half-integer order,
//! plus the sphere-area constant.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Below this argument the power series is used.
const SERIES_LIMIT: f64 = 12.0;
/// Integer orders use Miller recurrence up to here, Hankel-based values above.
const MILLER_LIMIT: f64 = 30.0;

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Surface area of the unit sphere S^{d-1} ⊂ ℝ^d.
pub fn sphere_area(dim: usize) -> f64 {
    let h = dim as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

fn check_order(nu: f64) -> Result<()> {
    let twice = 2.0 * nu;
    if twice.fract() != 0.0 || !(-1.0..=16.0).contains(&twice) {
        return Err(Error::Unsupported(format!("Bessel order {nu}; orders with 2ν ∈ {{-1, 0, ..., 16}} are supported")));
    }
    Ok(())
}

/// Σ (-1)^m (x/2)^{2m} / (m! Γ(m+ν+1)), i.e. J_ν(x)/(x/2)^ν.
fn series_reduced(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0 / gamma(nu + 1.0);
    let mut sum = term;
    for m in 1..200 {
        let mf = m as f64;
        term *= q / (mf * (mf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion; terminates exactly for half-integer order.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0f64;
    let mut q = 0.0f64;
    let mut term = 1.0f64;
    let mut prev_abs = f64::INFINITY;
    for k in 0..200usize {
        let t_abs = term.abs();
        if t_abs == 0.0 {
            break;
        }
        if t_abs > prev_abs {
            break;
        }
        // a_k(ν)/x^k with the sign pattern (-1)^{⌊k/2⌋}.
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if t_abs < 1e-17 * p.abs().max(q.abs()).max(1e-300) {
            break;
        }
        prev_abs = t_abs;
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Normalized backward (Miller) recurrence for integer order on moderate
/// arguments, where the power series cancels and the Hankel expansion has
/// not yet converged.
fn miller_integer(order: usize, x: f64) -> f64 {
    let start = 2 * ((x as usize + order + 40) / 2);
    let mut next = 0.0;
    let mut cur = 1e-280;
    let mut wanted = 0.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds the unnormalized J_{k-1}.
        if k - 1 == order {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            wanted *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}

/// Upward recurrence from Hankel-evaluated base orders; stable while ν < x.
fn hankel_upward(nu: f64, x: f64) -> f64 {
    let base = if nu.fract() == 0.0 { 0.0 } else { -0.5 };
    let mut lo = hankel(base, x);
    if nu == base {
        return lo;
    }
    let mut hi = hankel(base + 1.0, x);
    let mut order = base + 1.0;
    while order < nu {
        let up = 2.0 * order / x * hi - lo;
        lo = hi;
        hi = up;
        order += 1.0;
    }
    hi
}

fn j_positive(nu: f64, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        (0.5 * x).powf(nu) * series_reduced(nu, x)
    } else if nu.fract() == 0.0 && x <= MILLER_LIMIT {
        miller_integer(nu as usize, x)
    } else {
        hankel_upward(nu, x)
    }
}

/// J_ν(x) for x ≥ 0 and 2ν ∈ {-1, 0, ..., 16}.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_order(nu)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("Bessel argument must be finite and ≥ 0, got {x}")));
    }
    if x == 0.0 {
        return if nu == 0.0 {
            Ok(1.0)
        } else if nu > 0.0 {
            Ok(0.0)
        } else {
            Err(Error::InvalidParameter("J_{-1/2} is singular at 0".into()))
        };
    }
    Ok(j_positive(nu, x))
}

/// J_ν(x)/x^ν, finite at x = 0 where it equals 1/(2^ν Γ(ν+1)).
pub fn bessel_j_over_power(nu: f64, x: f64) -> Result<f64> {
    check_order(nu)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("Bessel argument must be finite and ≥ 0, got {x}")));
    }
    if x <= SERIES_LIMIT {
        Ok(0.5f64.powf(nu) * series_reduced(nu, x))
    } else {
        Ok(j_positive(nu, x) / x.powf(nu))
    }
}
