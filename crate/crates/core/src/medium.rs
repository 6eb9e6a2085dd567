//! Absorber description and its linear response: susceptibility models,
//! absorption and group velocity.
//!
//! Susceptibilities are returned as `k * chi`, an inverse length, so that the
//! envelope spectrum picks up `exp(-i k chi z / 2)` over a distance `z`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Quadrature;
use crate::special::{dawson, FRAC_1_SQRT_PI};
use crate::spline::CubicSpline;

/// Ratio `gamma_ab / delta0` below which the homogeneous width counts as negligible.
pub const NARROW_LINE_RATIO: f64 = 0.01;

/// Physical constants of the absorbing slab.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Background absorption coefficient away from the hole (inverse length).
    pub alpha0: f64,
    /// Homogeneous half-width (angular frequency).
    pub gamma_ab: f64,
    /// Hole width (angular frequency).
    pub delta0: f64,
    /// Slab length.
    pub length: f64,
    /// Inverse vacuum speed; zero selects the infinite-c limit.
    pub inv_c: f64,
}

impl MediumParams {
    pub fn new(alpha0: f64, gamma_ab: f64, delta0: f64, length: f64, inv_c: f64) -> Result<Self> {
        let p = Self {
            alpha0,
            gamma_ab,
            delta0,
            length,
            inv_c,
        };
        p.validate()?;
        Ok(p)
    }

    /// Reduced units: `delta0 = alpha0 = 1`, so lengths are optical depths and
    /// times are in units of `1/delta0`. `v_over_c` is the ratio of the
    /// hole group velocity to the vacuum speed.
    pub fn reduced(alpha0_l: f64, gamma_over_delta0: f64, v_over_c: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&v_over_c) {
            return Err(Error::Config(format!("v/c must lie in [0, 1), got {v_over_c}")));
        }
        let inv_c = v_over_c * FRAC_1_SQRT_PI / (1.0 - v_over_c);
        Self::new(1.0, gamma_over_delta0, 1.0, alpha0_l, inv_c)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            bad.push(format!("alpha0 = {} must be positive", self.alpha0));
        }
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            bad.push(format!("delta0 = {} must be positive", self.delta0));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            bad.push(format!("length = {} must be positive", self.length));
        }
        if !(self.gamma_ab >= 0.0 && self.gamma_ab.is_finite()) {
            bad.push(format!("gamma_ab = {} must be non-negative", self.gamma_ab));
        }
        if !(self.inv_c >= 0.0 && self.inv_c.is_finite()) {
            bad.push(format!("inv_c = {} must be non-negative", self.inv_c));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    pub fn narrow_homogeneous(&self) -> bool {
        self.gamma_ab < NARROW_LINE_RATIO * self.delta0
    }

    /// Delay per unit length added by the Gaussian hole, `alpha0 / (sqrt(pi) delta0)`.
    pub fn hole_inverse_velocity(&self) -> f64 {
        self.alpha0 * FRAC_1_SQRT_PI / self.delta0
    }

    pub fn inverse_group_velocity(&self) -> f64 {
        self.inv_c + self.hole_inverse_velocity()
    }

    pub fn group_velocity(&self) -> f64 {
        1.0 / self.inverse_group_velocity()
    }

    pub fn v_over_c(&self) -> f64 {
        self.inv_c * self.group_velocity()
    }

    /// Transit time `L / v` through the slab.
    pub fn group_delay(&self) -> f64 {
        self.length * self.inverse_group_velocity()
    }

    pub fn opacity(&self) -> f64 {
        self.alpha0 * self.length
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }
}

/// Tabulated hole shape: samples of `g` against detuning in units of `delta0`.
/// Outside the table `g` is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedHole {
    spline: CubicSpline,
}

impl TabulatedHole {
    pub fn new(detuning_over_delta0: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if let Some(bad) = g.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("hole profile value {bad} outside [0, 1]")));
        }
        Ok(Self {
            spline: CubicSpline::natural(detuning_over_delta0, g)?,
        })
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        self.spline.knots()
    }

    fn inside(&self, x: f64) -> bool {
        let (lo, hi) = self.spline.domain();
        (lo..=hi).contains(&x)
    }

    fn g(&self, x: f64) -> f64 {
        if self.inside(x) {
            self.spline.value(x).clamp(0.0, 1.0)
        } else {
            1.0
        }
    }

    fn g2(&self, x: f64) -> f64 {
        if self.inside(x) {
            self.spline.second_derivative(x)
        } else {
            0.0
        }
    }

    fn reach(&self) -> f64 {
        let (lo, hi) = self.spline.domain();
        lo.abs().max(hi.abs())
    }

    fn kinks(&self) -> Vec<f64> {
        let (lo, hi) = self.spline.domain();
        vec![lo, hi]
    }
}

/// Normalized inhomogeneous distribution `g(delta)`, 0 in the hole and 1 far away.
#[derive(Clone, Debug, PartialEq)]
pub enum HoleProfile {
    /// `g = 1 - exp(-delta^2 / delta0^2)`.
    Gaussian,
    Tabulated(TabulatedHole),
}

// exp(-64) is far below any tolerance used here
const GAUSSIAN_REACH: f64 = 8.0;

impl HoleProfile {
    pub fn g(&self, delta: f64, params: &MediumParams) -> f64 {
        match self {
            HoleProfile::Gaussian => {
                let x = delta / params.delta0;
                -(-x * x).exp_m1()
            }
            HoleProfile::Tabulated(t) => t.g(delta / params.delta0),
        }
    }

    /// `1 - g`, evaluated without cancellation.
    pub fn deficit(&self, delta: f64, params: &MediumParams) -> f64 {
        let x = delta / params.delta0;
        match self {
            HoleProfile::Gaussian => (-x * x).exp(),
            HoleProfile::Tabulated(t) => 1.0 - t.g(x),
        }
    }

    /// Second derivative of `g` with respect to detuning.
    pub fn g_second_derivative(&self, delta: f64, params: &MediumParams) -> f64 {
        let x = delta / params.delta0;
        let d2 = params.delta0 * params.delta0;
        match self {
            HoleProfile::Gaussian => (2.0 - 4.0 * x * x) * (-x * x).exp() / d2,
            HoleProfile::Tabulated(t) => t.g2(x) / d2,
        }
    }

    /// Detuning beyond which the deficit is negligible (exactly zero for tables).
    pub fn reach(&self, params: &MediumParams) -> f64 {
        match self {
            HoleProfile::Gaussian => GAUSSIAN_REACH * params.delta0,
            HoleProfile::Tabulated(t) => t.reach() * params.delta0,
        }
    }

    fn kinks(&self, params: &MediumParams) -> Vec<f64> {
        match self {
            HoleProfile::Gaussian => Vec::new(),
            HoleProfile::Tabulated(t) => t.kinks().into_iter().map(|x| x * params.delta0).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            HoleProfile::Gaussian => true,
            HoleProfile::Tabulated(t) => {
                let (x, g) = t.samples();
                let n = x.len();
                (0..n).all(|i| x[i] == -x[n - 1 - i] && g[i] == g[n - 1 - i])
            }
        }
    }
}

fn budget_quadrature() -> Quadrature {
    Quadrature::new(1e-13, 1e-11).with_max_segments(4000)
}

/// Breakpoints on `[0, upper]`: a geometric ladder resolving the homogeneous
/// width near zero, plus any extra features.
fn ladder(gamma: f64, scale: f64, upper: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![0.0, upper];
    if gamma > 0.0 {
        let mut p = gamma;
        while p < scale.min(upper) {
            pts.push(p);
            p *= 10.0;
        }
    }
    pts.push(scale);
    pts.extend_from_slice(extra);
    let mut pts: Vec<f64> = pts.into_iter().filter(|p| *p >= 0.0 && *p <= upper).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Exact Gaussian-hole susceptibility, valid when `gamma_ab << delta0`.
pub fn chi_exact_gaussian(omega: f64, params: &MediumParams) -> Result<Complex64> {
    if !params.narrow_homogeneous() {
        return Err(Error::Precondition(format!(
            "Dawson form assumes gamma_ab << delta0 (gamma_ab/delta0 = {:.3e} >= {NARROW_LINE_RATIO})",
            params.gamma_ab / params.delta0
        )));
    }
    let x = omega / params.delta0;
    let absorption = -(-x * x).exp_m1();
    Ok(params.alpha0 * Complex64::new(2.0 * FRAC_1_SQRT_PI * dawson(x)?, -absorption))
}

/// Quadratic expansion of the Gaussian-hole susceptibility around the hole center.
pub fn chi_second_order(omega: f64, params: &MediumParams) -> Complex64 {
    let x = omega / params.delta0;
    params.alpha0 * Complex64::new(2.0 * FRAC_1_SQRT_PI * x, -x * x)
}

/// Susceptibility of an arbitrary profile by direct quadrature.
///
/// The flat background contributes `-i alpha0` analytically; only the hole
/// deficit `1 - g` is integrated, folded onto positive detunings.
pub fn chi_quadrature(omega: f64, profile: &HoleProfile, params: &MediumParams) -> Result<Complex64> {
    if !omega.is_finite() {
        return Err(Error::Domain(format!("frequency offset {omega} is not finite")));
    }
    let gamma = params.gamma_ab;
    let reach = profile.reach(params);
    let window = 50.0 * params.delta0.max(gamma).max(omega.abs());
    let upper = window.max(omega.abs() + reach);
    let h = |d: f64| profile.deficit(d, params);
    let mut extra = vec![omega.abs(), omega.abs() + reach];
    if omega.abs() > reach {
        extra.push(omega.abs() - reach);
    }
    for k in profile.kinks(params) {
        extra.push((k - omega).abs());
        extra.push((k + omega).abs());
    }
    // breakpoints either side of the resonance |delta| = |omega| with hole-scale spacing
    for s in [0.25, 0.5, 1.0, 2.0, 4.0] {
        extra.push(omega.abs() + s * params.delta0);
        if omega.abs() > s * params.delta0 {
            extra.push(omega.abs() - s * params.delta0);
        }
    }
    let pts = ladder(gamma, params.delta0, upper, &extra);
    let q = budget_quadrature();
    let deficit_integral = if gamma > 0.0 {
        q.integrate_points(
            |d: f64| {
                let hp = h(omega + d);
                let hm = h(omega - d);
                Complex64::new(d * (hp - hm), -gamma * (hp + hm)) / (d * d + gamma * gamma)
            },
            &pts,
        )?
        .value
    } else {
        let pv = q
            .integrate_points(|d: f64| (h(omega + d) - h(omega - d)) / d, &pts)?
            .value;
        Complex64::new(pv, -PI * h(omega))
    };
    Ok((params.alpha0 / PI) * (Complex64::new(0.0, -PI) - deficit_integral))
}

/// Lorentzian-weighted averages `(int g L, int g'' L)` of the profile.
fn lorentz_moments(profile: &HoleProfile, params: &MediumParams) -> Result<(f64, f64)> {
    let gamma = params.gamma_ab;
    if gamma == 0.0 {
        let g0 = profile.g(0.0, params);
        if matches!(profile, HoleProfile::Tabulated(_)) && g0.abs() > 1e-12 {
            return Err(Error::Singular(format!(
                "gamma_ab = 0 with a tabulated hole that does not vanish at the center (g(0) = {g0:.3e})"
            )));
        }
        return Ok((g0, profile.g_second_derivative(0.0, params)));
    }
    let reach = profile.reach(params);
    let mut extra = profile.kinks(params).iter().map(|k| k.abs()).collect::<Vec<_>>();
    extra.push(reach);
    let pts = ladder(gamma, params.delta0, reach, &extra);
    let q = budget_quadrature();
    let lorentz = |d: f64| gamma / (PI * (d * d + gamma * gamma));
    let h_avg = q
        .integrate_points(
            |d: f64| (profile.deficit(d, params) + profile.deficit(-d, params)) * lorentz(d),
            &pts,
        )?
        .value;
    let g2_avg = q
        .integrate_points(
            |d: f64| {
                (profile.g_second_derivative(d, params) + profile.g_second_derivative(-d, params))
                    * lorentz(d)
            },
            &pts,
        )?
        .value;
    Ok((1.0 - h_avg, g2_avg))
}

/// Two-term absorption coefficient: the Lorentz-averaged profile plus its
/// curvature times `omega^2 / 2`.
pub fn absorption_coefficient(omega: f64, profile: &HoleProfile, params: &MediumParams) -> Result<f64> {
    let (g_avg, g2_avg) = lorentz_moments(profile, params)?;
    Ok(params.alpha0 * (g_avg + 0.5 * omega * omega * g2_avg))
}

/// Amplitude transmission `exp(-alpha(omega) z / 2)` over a distance `z`.
pub fn transmission(omega: f64, z: f64, profile: &HoleProfile, params: &MediumParams) -> Result<f64> {
    Ok((-0.5 * absorption_coefficient(omega, profile, params)? * z).exp())
}

/// Curvature of the absorption at the hole center, `int g'' L`.
pub(crate) fn absorption_curvature(profile: &HoleProfile, params: &MediumParams) -> Result<f64> {
    Ok(lorentz_moments(profile, params)?.1)
}

/// Inverse group velocity `1/c + (alpha0 / 2 pi) int g delta^2 / (delta^2 + gamma^2)^2`.
pub fn inverse_group_velocity(profile: &HoleProfile, params: &MediumParams) -> Result<f64> {
    let gamma = params.gamma_ab;
    if gamma == 0.0 {
        let g0 = profile.g(0.0, params);
        if g0.abs() > 1e-12 {
            return Err(Error::Singular(format!(
                "gamma_ab = 0 and g(0) = {g0:.3e}: the delay integral diverges at zero detuning"
            )));
        }
    }
    let reach = profile.reach(params);
    let window = (50.0 * params.delta0.max(gamma)).max(2.0 * reach);
    let mut extra = profile.kinks(params).iter().map(|k| k.abs()).collect::<Vec<_>>();
    extra.push(reach);
    let pts = ladder(gamma, params.delta0, window, &extra);
    let q = budget_quadrature();
    let body = q
        .integrate_points(
            |d: f64| {
                let gs = profile.g(d, params) + profile.g(-d, params);
                let den = d * d + gamma * gamma;
                gs * d * d / (den * den)
            },
            &pts,
        )?
        .value;
    // g = 1 beyond the window
    let tail = if gamma > 0.0 {
        (gamma / window).atan() / gamma + window / (window * window + gamma * gamma)
    } else {
        2.0 / window
    };
    Ok(params.inv_c + params.alpha0 / (2.0 * PI) * (body + tail))
}

/// Susceptibility models usable by the spectral propagator.
#[derive(Clone, Debug, PartialEq)]
pub enum ChiModel {
    /// No medium at all.
    Vacuum,
    /// Dispersionless slab with a fixed group velocity and absorption.
    Undistorted { inverse_velocity: f64, absorption: f64 },
    SecondOrder,
    ExactGaussian,
    Quadrature(HoleProfile),
}

impl ChiModel {
    pub fn k_chi(&self, omega: f64, params: &MediumParams) -> Result<Complex64> {
        Ok(match self {
            ChiModel::Vacuum => Complex64::new(0.0, 0.0),
            ChiModel::Undistorted {
                inverse_velocity,
                absorption,
            } => Complex64::new(2.0 * omega * (inverse_velocity - params.inv_c), -absorption),
            ChiModel::SecondOrder => chi_second_order(omega, params),
            ChiModel::ExactGaussian => chi_exact_gaussian(omega, params)?,
            ChiModel::Quadrature(p) => chi_quadrature(omega, p, params)?,
        })
    }

    /// Whether far-detuned components should see the bare background absorption.
    pub(crate) fn has_flat_background(&self) -> bool {
        matches!(self, ChiModel::ExactGaussian | ChiModel::Quadrature(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChiModel::Vacuum => "vacuum",
            ChiModel::Undistorted { .. } => "undistorted",
            ChiModel::SecondOrder => "second_order",
            ChiModel::ExactGaussian => "exact_gaussian",
            ChiModel::Quadrature(_) => "quadrature",
        }
    }
}
