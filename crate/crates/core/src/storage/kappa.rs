//! Revival function: the share of the frozen field restored a delay
//! `2x / delta0` after the retrieval pulse.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernel::DetuningKernel;
use super::StorageProblem;
use crate::error::{Error, Result};
use crate::medium::MediumParams;
use crate::special::{erf, erfc, SQRT_PI};

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("revival argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// Closed form for the Gaussian hole with every detuning converted:
/// `(1 - v/c) (1 - e^{-x^2} + x sqrt(pi) erfc(x))`.
pub fn kappa(x: f64, params: &MediumParams) -> Result<f64> {
    check_x(x)?;
    let core = -(-x * x).exp_m1() + x * SQRT_PI * erfc(x)?;
    Ok((1.0 - params.v_over_c()) * core)
}

/// Large-delay limit of the band-limited revival relative to the full one,
/// for a Gaussian hole converted over `|delta| <= y delta0`.
pub fn bandwidth_reduction_factor(y: f64) -> Result<f64> {
    if !y.is_finite() || y <= 0.0 {
        return Err(Error::Domain(format!("bandwidth ratio must be positive, got {y}")));
    }
    Ok(erf(y)? + (-y * y).exp_m1() / (SQRT_PI * y))
}

/// Revival function as a double time integral of the detuning kernel,
/// `-(alpha0 v / 2 pi) int_0^inf d tau int_0^{2x/delta0} d tau' K(tau + tau')`.
pub fn kappa_quadrature(x: f64, problem: &StorageProblem) -> Result<Complex64> {
    check_x(x)?;
    let kernel = DetuningKernel::new(problem)?;
    let v = problem.response()?.velocity();
    kappa_with_kernel(x, problem, &kernel, v)
}

pub(crate) fn kappa_with_kernel(x: f64, problem: &StorageProblem, kernel: &DetuningKernel, v: f64) -> Result<Complex64> {
    let m = &problem.medium;
    let span = 2.0 * x / m.delta0;
    let cut = kernel.cutoff();
    let outer = problem.quadrature(1e-1);
    let inner = problem.quadrature(1e-3);
    let total = outer.try_integrate_points(
        |tau: f64| -> Result<Complex64> {
            let top = span.min(cut - tau);
            if top <= 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(inner
                .integrate(|tp: f64| kernel.value(tau + tp), 0.0, top)?
                .value)
        },
        &breakpoints(0.0, cut, &[cut - span, 1.0 / m.delta0]),
    )?;
    Ok(-m.alpha0 * v / (2.0 * PI) * total.value)
}

/// Revival when only `|delta| <= delta1` is converted:
/// `-(alpha0 v / 2 pi) int g (e^{(i delta - gamma) X} - 1) / (delta + i gamma)^2`.
pub fn kappa_band_limited(x: f64, delta1: f64, problem: &StorageProblem) -> Result<Complex64> {
    check_x(x)?;
    let v = problem.response()?.velocity();
    kappa_band_limited_with(x, delta1, problem, v)
}

pub(crate) fn kappa_band_limited_with(x: f64, delta1: f64, problem: &StorageProblem, v: f64) -> Result<Complex64> {
    let m = &problem.medium;
    if !(delta1.is_finite() && delta1 > 0.0) {
        return Err(Error::Domain(format!("conversion bandwidth must be positive, got {delta1}")));
    }
    let gamma = m.gamma_ab;
    if gamma == 0.0 {
        let g0 = problem.profile.g(0.0, m);
        if g0.abs() > 1e-12 {
            return Err(Error::Singular(format!(
                "gamma_ab = 0 and g(0) = {g0:.3e}: the revival integrand diverges at zero detuning"
            )));
        }
    }
    let big_x = 2.0 * x / m.delta0;
    let panels = ((delta1 * big_x / PI).ceil() as usize).clamp(2, 2000);
    let mut pts: Vec<f64> = (0..=2 * panels)
        .map(|i| -delta1 + delta1 * i as f64 / panels as f64)
        .collect();
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let q = problem.quadrature(1e-2).with_max_segments(4 * pts.len() + 4000);
    let profile = &problem.profile;
    let val = q
        .integrate_points(
            |d: f64| {
                let g = profile.g(d, m);
                if g == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let lam = Complex64::new(-gamma, d) * big_x;
                // e^lam - 1 without cancellation for small |lam|
                let num = if lam.norm() < 1e-3 {
                    lam * (1.0 + lam * (0.5 + lam / 6.0))
                } else {
                    lam.exp() - 1.0
                };
                let den = Complex64::new(d, gamma);
                g * num / (den * den)
            },
            &pts,
        )?
        .value;
    Ok(-m.alpha0 * v / (2.0 * PI) * val)
}

pub(crate) fn breakpoints(a: f64, b: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![a, b];
    pts.extend(extra.iter().copied().filter(|p| *p > a && *p < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
