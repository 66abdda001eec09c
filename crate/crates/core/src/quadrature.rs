//! Adaptive Gauss-Kronrod (G10/K21) quadrature.
//!
//! The integrator is generic over the integrand's value type so that real,
//! complex and small vector-valued integrands share one subdivision loop.
//! Error estimation follows the QUADPACK `qk21` heuristic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

/// Kronrod abscissae on [0, 1]; odd indices are the embedded Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Values the integrator can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    /// Norm used for error control; must be a norm on the value space.
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Fixed-size vector of complex values, for integrating several related
/// integrands over one shared subdivision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CVec<const N: usize>(pub [Complex64; N]);

impl<const N: usize> Add for CVec<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for CVec<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul<f64> for CVec<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<const N: usize> QuadValue for CVec<N> {
    fn zero() -> Self {
        CVec([Complex64::new(0.0, 0.0); N])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Tolerances for the adaptive integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_subdivisions: 2000 }
    }
}

impl QuadConfig {
    pub fn tight() -> Self {
        Self { abs_tol: 1e-15, rel_tol: 1e-13, max_subdivisions: 5000 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: QuadValue> QuadResult<T> {
    fn zero() -> Self {
        Self { value: T::zero(), abs_error: 0.0, evaluations: 0, converged: true }
    }

    /// Combines the results of integrals over adjacent intervals.
    pub fn merge(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * result_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

/// One non-adaptive 21-point Kronrod rule on [a, b]: (value, error estimate).
pub fn gk21<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let (v, e, _) = gk21_with_floor(f, a, b);
    (v, e)
}

/// As [`gk21`], also returning the roundoff floor of the error estimate.
fn gk21_with_floor<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center);
    let mut res_g = T::zero();
    let mut res_k = fc * WGK[10];
    let mut res_abs = fc.magnitude() * WGK[10];
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let value = res_k * half;
    let err = ((res_k - res_g) * half).magnitude();
    let floor = 50.0 * f64::EPSILON * res_abs * abs_half;
    (value, rescale_error(err, res_abs * abs_half, res_asc * abs_half), floor)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    floor: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integration of `f` over the finite interval [a, b].
///
/// The panel with the largest error estimate is bisected until the summed
/// error meets `cfg`, the subdivision budget runs out, or the worst panel's
/// error is at its roundoff floor (accepted as converged: further bisection
/// cannot improve it).
pub fn integrate<T: QuadValue, F: FnMut(f64) -> T>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> QuadResult<T> {
    if a == b {
        return QuadResult::zero();
    }
    let (value, error, floor) = gk21_with_floor(&mut f, a, b);
    let mut evaluations = 21;
    let mut total = value;
    let mut total_err = error;
    if total_err <= cfg.target(total.magnitude()) || error <= 2.0 * floor {
        return QuadResult { value: total, abs_error: total_err, evaluations, converged: true };
    }

    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error, floor });
    let mut converged = false;
    for _ in 0..cfg.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.error <= 2.0 * worst.floor || mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            converged = worst.error <= 2.0 * worst.floor;
            heap.push(worst);
            break;
        }
        let (v1, e1, f1) = gk21_with_floor(&mut f, worst.a, mid);
        let (v2, e2, f2) = gk21_with_floor(&mut f, mid, worst.b);
        evaluations += 42;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, floor: f1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, floor: f2 });
        if total_err <= cfg.target(total.magnitude()) {
            converged = true;
            break;
        }
    }

    // Resum to shed the drift of the running totals.
    let mut value = T::zero();
    let mut abs_error = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        abs_error += p.error;
    }
    let converged = converged || abs_error <= cfg.target(value.magnitude());
    QuadResult { value, abs_error, evaluations, converged }
}

/// Integrates over consecutive intervals `[x_0, x_1], [x_1, x_2], ...`.
///
/// Tolerances apply per piece; callers supply breakpoints at kinks.
pub fn integrate_pieces<T: QuadValue, F: FnMut(f64) -> T>(mut f: F, points: &[f64], cfg: &QuadConfig) -> QuadResult<T> {
    let mut acc = QuadResult::zero();
    for w in points.windows(2) {
        acc = acc.merge(integrate(&mut f, w[0], w[1], cfg));
    }
    acc
}

/// Integrates `f` over [a, ∞) through the map x = a + t/(1-t), t ∈ [0, 1).
pub fn integrate_to_infinity<T: QuadValue, F: FnMut(f64) -> T>(mut f: F, a: f64, cfg: &QuadConfig) -> QuadResult<T> {
    integrate(
        |t: f64| {
            if t >= 1.0 {
                return T::zero();
            }
            let s = 1.0 - t;
            let x = a + t / s;
            let v = f(x);
            if v.magnitude().is_finite() {
                v * (1.0 / (s * s))
            } else {
                T::zero()
            }
        },
        0.0,
        1.0,
        cfg,
    )
}
