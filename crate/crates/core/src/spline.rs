//! Cubic interpolation on strictly increasing nodes.

use crate::error::{Error, Result};

/// Left boundary condition; the right end is always natural (s'' = 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LeftEnd {
    Natural,
    Slope(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
    uniform_step: Option<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>, left: LeftEnd) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidParameter("spline needs at least two nodes and matching values".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("spline nodes must be strictly increasing".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("spline values must be finite".into()));
        }

        // Tridiagonal system for the second derivatives (Thomas algorithm).
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut lower = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        match left {
            LeftEnd::Natural => diag[0] = 1.0,
            LeftEnd::Slope(s) => {
                let h = x[1] - x[0];
                diag[0] = h / 3.0;
                upper[0] = h / 6.0;
                rhs[0] = (y[1] - y[0]) / h - s;
            }
        }
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            lower[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        diag[n - 1] = 1.0;
        for i in 1..n {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
        }

        let step = (x[n - 1] - x[0]) / (n - 1) as f64;
        let uniform = x.iter().enumerate().all(|(i, &xi)| (xi - (x[0] + i as f64 * step)).abs() <= 1e-12 * step.max(1.0));
        Ok(Self { x, y, m, uniform_step: uniform.then_some(step) })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn interval(&self, t: f64) -> usize {
        let last = self.x.len() - 2;
        if let Some(h) = self.uniform_step {
            let i = ((t - self.x[0]) / h).floor();
            return if i <= 0.0 { 0 } else { (i as usize).min(last) };
        }
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    /// Evaluates the interpolant; arguments outside the node range use the
    /// end cubic pieces.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// Zero of the interpolant inside interval `i`, assuming a sign change
    /// between its end nodes.
    pub fn root_in_interval(&self, i: usize) -> f64 {
        let (mut lo, mut hi) = (self.x[i], self.x[i + 1]);
        let mut flo = self.y[i];
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let fm = self.eval(mid);
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_is_accurate_on_smooth_data() {
        let x: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|t| t.cos()).collect();
        let s = CubicSpline::new(x.clone(), y.clone(), LeftEnd::Slope(0.0)).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
        let mut worst: f64 = 0.0;
        for k in 0..1000 {
            let t = 0.0049 + k as f64 * 0.009;
            worst = worst.max((s.eval(t) - t.cos()).abs());
        }
        assert!(worst < 1e-5, "worst {worst}");
    }

    #[test]
    fn nonuniform_nodes_and_roots() {
        let x = vec![0.0, 0.3, 1.0, 1.7, 2.5, 3.5];
        let y: Vec<f64> = x.iter().map(|t| t - 1.2).collect();
        let s = CubicSpline::new(x, y, LeftEnd::Natural).unwrap();
        assert!((s.root_in_interval(2) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(CubicSpline::new(vec![0.0, 0.0], vec![1.0, 1.0], LeftEnd::Natural).is_err());
        assert!(CubicSpline::new(vec![0.0], vec![1.0], LeftEnd::Natural).is_err());
    }
}
