//! Globally adaptive 21-point Gauss-Kronrod quadrature for real and complex
//! integrands, with user breakpoints and a semi-infinite map.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
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

/// Result of an integration together with its error estimate.
#[derive(Clone, Copy, Debug)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn kronrod21<T, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center)?;
    let mut gauss = T::zero();
    let mut kronrod = f_center * WGK[10];
    let mut res_abs = f_center.modulus() * WGK[10];
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x)?;
        let f2 = f(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        kronrod = kronrod + sum * WGK[j];
        res_abs += WGK[j] * (f1.modulus() + f2.modulus());
        if j % 2 == 1 {
            gauss = gauss + sum * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).modulus();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).modulus() + (fv2[j] - mean).modulus());
    }
    let err = (kronrod - gauss).modulus() * half.abs();
    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    Ok(Segment {
        a,
        b,
        value,
        error: rescale_error(err, res_abs, res_asc),
    })
}

/// Adaptive integrator configuration. The integral is accepted once the
/// summed error estimate is below `max(abs_tol, rel_tol * |I|)`.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(1e-12, 1e-10)
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_segments: 2000,
        }
    }

    pub fn with_max_segments(mut self, n: usize) -> Self {
        self.max_segments = n;
        self
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<T, F>(&self, f: F, a: f64, b: f64) -> Result<Estimate<T>>
    where
        T: QuadValue,
        F: FnMut(f64) -> T,
    {
        self.integrate_points(f, &[a, b])
    }

    /// Integrate over `[points[0], points[last]]`, starting from the given
    /// subdivision. Points must be non-decreasing; empty pieces are skipped.
    pub fn integrate_points<T, F>(&self, mut f: F, points: &[f64]) -> Result<Estimate<T>>
    where
        T: QuadValue,
        F: FnMut(f64) -> T,
    {
        self.try_integrate_points(|x| Ok(f(x)), points)
    }

    /// Like [`Quadrature::integrate_points`] for integrands that can fail.
    pub fn try_integrate_points<T, F>(&self, mut f: F, points: &[f64]) -> Result<Estimate<T>>
    where
        T: QuadValue,
        F: FnMut(f64) -> Result<T>,
    {
        if points.len() < 2 || points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config(format!(
                "integration needs at least two finite limits, got {points:?}"
            )));
        }
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config(format!(
                "breakpoints must be non-decreasing: {points:?}"
            )));
        }
        let mut heap = BinaryHeap::new();
        let mut total = T::zero();
        let mut total_err = 0.0;
        for w in points.windows(2) {
            if w[1] > w[0] {
                let seg = kronrod21(&mut f, w[0], w[1])?;
                total = total + seg.value;
                total_err += seg.error;
                heap.push(seg);
            }
        }
        // Segments too narrow to split further are parked with their error.
        let mut parked_err = 0.0;
        let mut count = heap.len();
        loop {
            let target = self.abs_tol.max(self.rel_tol * total.modulus());
            if total_err <= target {
                return Ok(Estimate {
                    value: total,
                    error: total_err,
                });
            }
            let Some(worst) = heap.pop() else {
                break;
            };
            let mid = 0.5 * (worst.a + worst.b);
            let width = worst.b - worst.a;
            if width <= 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE)
                || mid <= worst.a
                || mid >= worst.b
            {
                parked_err += worst.error;
                if parked_err > target {
                    break;
                }
                continue;
            }
            if count >= self.max_segments {
                heap.push(worst);
                break;
            }
            let left = kronrod21(&mut f, worst.a, mid)?;
            let right = kronrod21(&mut f, mid, worst.b)?;
            total = total - worst.value + left.value + right.value;
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            count += 1;
        }
        // Sum the remaining estimates directly rather than trusting the running total.
        let achieved: f64 = heap.iter().map(|s| s.error).sum::<f64>() + parked_err;
        let target = self.abs_tol.max(self.rel_tol * total.modulus());
        if achieved <= target {
            return Ok(Estimate {
                value: total,
                error: achieved,
            });
        }
        Err(Error::numerical("adaptive quadrature", achieved))
    }

    /// Integrate over `[a, inf)` through the map `x = a + s / (1 - s)`.
    pub fn integrate_to_infinity<T, F>(&self, mut f: F, a: f64) -> Result<Estimate<T>>
    where
        T: QuadValue,
        F: FnMut(f64) -> T,
    {
        self.try_integrate_points(
            |s| {
                let one_minus = 1.0 - s;
                let x = a + s / one_minus;
                let jac = 1.0 / (one_minus * one_minus);
                let y = f(x);
                if jac.is_finite() {
                    Ok(y * jac)
                } else {
                    Ok(T::zero())
                }
            },
            &[0.0, 1.0],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0).unwrap();
        assert_relative_eq!(r.value, 64.0 / 6.0 - 1.0 / 6.0 - 9.0, epsilon = 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let q = Quadrature::new(1e-12, 1e-10);
        let r = q.integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0).unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let q = Quadrature::default();
        let r = q
            .integrate_points(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0])
            .unwrap();
        assert_relative_eq!(r.value, 0.5 * (0.09 + 0.49), epsilon = 1e-14);
    }

    #[test]
    fn complex_oscillatory_integrand() {
        let q = Quadrature::default();
        let w = 40.0;
        let r = q
            .integrate(|x: f64| Complex64::new(0.0, w * x).exp(), 0.0, 1.0)
            .unwrap();
        let exact = (Complex64::new(0.0, w).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let q = Quadrature::default();
        let r = q.integrate_to_infinity(|x: f64| (-x * x).exp(), 0.0).unwrap();
        assert_relative_eq!(r.value, 0.5 * std::f64::consts::PI.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn failure_reports_achieved_error() {
        let q = Quadrature::new(1e-14, 1e-14).with_max_segments(4);
        let err = q
            .integrate(|x: f64| (1.0 / x).sin(), 1e-4, 1.0)
            .unwrap_err();
        match err {
            Error::Numerical { achieved, .. } => assert!(achieved > 1e-14),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_limits_are_rejected() {
        let q = Quadrature::default();
        assert!(q.integrate(|x: f64| x, 0.0, f64::INFINITY).is_err());
        assert!(q.integrate_points(|x: f64| x, &[1.0, 0.0]).is_err());
    }
}
