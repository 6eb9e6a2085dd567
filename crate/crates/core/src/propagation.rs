//! Spectral-domain propagation of sampled envelopes and the Gaussian-pulse
//! closed forms.
//!
//! Envelope spectra follow `A(t) = int dW/2pi A~(W) exp(iWt)`, so a positive
//! real `k chi` slope delays the pulse.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{ChiModel, MediumParams};

/// Uniformly sampled complex envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledEnvelope {
    pub t_start: f64,
    pub dt: f64,
    pub samples: Vec<Complex64>,
}

impl SampledEnvelope {
    pub fn new(t_start: f64, dt: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t_start.is_finite() {
            return Err(Error::Config(format!(
                "envelope grid needs a finite start and positive step (t_start = {t_start}, dt = {dt})"
            )));
        }
        if !samples.len().is_power_of_two() {
            return Err(Error::Config(format!(
                "envelope length {} is not a power of two",
                samples.len()
            )));
        }
        Ok(Self {
            t_start,
            dt,
            samples,
        })
    }

    /// Sample `f` on `n` points starting at `t_start`.
    pub fn from_fn(t_start: f64, dt: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = (0..n).map(|i| f(t_start + i as f64 * dt)).collect();
        Self::new(t_start, dt, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    pub fn window(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    /// `sum |A|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dt
    }

    pub fn peak(&self) -> (f64, f64) {
        let (i, a) = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.norm()))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        (self.time(i), a)
    }

    /// Angular frequency of FFT bin `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.len();
        let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        2.0 * PI * kk / (n as f64 * self.dt)
    }

    /// Linear interpolation; zero outside the sampled window.
    pub fn interpolate(&self, t: f64) -> Complex64 {
        let x = (t - self.t_start) / self.dt;
        if x.is_nan() || x < 0.0 || x > (self.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (x.floor() as usize).min(self.len() - 2);
        let f = x - i as f64;
        self.samples[i] * (1.0 - f) + self.samples[i + 1] * f
    }

    fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            t_start: self.t_start,
            dt: self.dt,
            samples,
        }
    }
}

/// Gaussian input pulse `peak * exp(-(t - center)^2 / (2 T^2))` at the slab entrance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub duration: f64,
    pub peak: f64,
    pub center_time: f64,
}

impl PulseSpec {
    pub fn gaussian(duration: f64) -> Result<Self> {
        Self::new(duration, 1.0, 0.0)
    }

    pub fn new(duration: f64, peak: f64, center_time: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::Config(format!("pulse duration {duration} must be positive")));
        }
        if !peak.is_finite() || !center_time.is_finite() {
            return Err(Error::Config("pulse peak and center time must be finite".into()));
        }
        Ok(Self {
            duration,
            peak,
            center_time,
        })
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        let s = (t - self.center_time) / self.duration;
        self.peak * (-0.5 * s * s).exp()
    }

    /// `int |A|^2 dt = peak^2 T sqrt(pi)`.
    pub fn energy(&self) -> f64 {
        self.peak * self.peak * self.duration * PI.sqrt()
    }

    /// Whether the pulse spectrum (width `1/T`) fits inside the hole.
    pub fn fits_hole(&self, params: &MediumParams) -> bool {
        1.0 / self.duration < params.delta0
    }

    /// Sample the pulse on a grid long enough to hold it after crossing the
    /// slab: window `4L/v + 12T` starting `6T` before the peak, so the
    /// periodic extension is continuous to ~1e-8.
    pub fn envelope(&self, params: &MediumParams) -> Result<SampledEnvelope> {
        let t = self.duration;
        let window = 4.0 * params.group_delay() + 12.0 * t;
        let dt_max = (0.1 / params.delta0).min(t / 16.0);
        let n = ((window / dt_max).ceil() as usize).next_power_of_two();
        let dt = window / n as f64;
        SampledEnvelope::from_fn(self.center_time - 6.0 * t, dt, n, |s| {
            Complex64::new(self.amplitude(s), 0.0)
        })
    }
}

/// Knobs of the spectral propagator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationOptions {
    /// Beyond this offset (in units of `delta0`) hole models see only the flat
    /// background, `k chi = -i alpha0`.
    pub background_clamp: f64,
    /// Largest tolerated fraction of spectral energy above half the Nyquist frequency.
    pub max_leakage: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            background_clamp: 40.0,
            max_leakage: 1e-6,
        }
    }
}

fn fft(samples: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(samples.len())
    } else {
        planner.plan_fft_forward(samples.len())
    };
    plan.process(samples);
    if inverse {
        let s = 1.0 / samples.len() as f64;
        for v in samples.iter_mut() {
            *v *= s;
        }
    }
}

/// Discrete spectrum of the envelope (unnormalized forward transform).
pub fn spectrum(env: &SampledEnvelope) -> Vec<Complex64> {
    let mut s = env.samples.clone();
    fft(&mut s, false);
    s
}

/// Inverse of [`spectrum`] on the same grid.
pub fn from_spectrum(grid: &SampledEnvelope, spec: &[Complex64]) -> SampledEnvelope {
    let mut s = spec.to_vec();
    fft(&mut s, true);
    grid.with_samples(s)
}

fn leakage_of(spec: &[Complex64]) -> f64 {
    let n = spec.len();
    let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let high: f64 = spec
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let kk = if *k < n / 2 { *k } else { n - *k };
            kk > n / 4
        })
        .map(|(_, c)| c.norm_sqr())
        .sum();
    high / total
}

/// Fraction of spectral energy above half the Nyquist frequency.
pub fn spectral_leakage(env: &SampledEnvelope) -> f64 {
    leakage_of(&spectrum(env))
}

/// Fraction of the energy sitting in the first and last sixteenth of the
/// window; large values signal wrap-around of a delayed pulse.
pub fn edge_energy_fraction(env: &SampledEnvelope) -> f64 {
    let n = env.len();
    let total: f64 = env.samples.iter().map(|a| a.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let m = (n / 16).max(1);
    let edge: f64 = env.samples[..m]
        .iter()
        .chain(&env.samples[n - m..])
        .map(|a| a.norm_sqr())
        .sum();
    edge / total
}

/// Propagate an envelope over a distance `z` through the medium described by `model`.
pub fn propagate(
    env: &SampledEnvelope,
    z: f64,
    model: &ChiModel,
    params: &MediumParams,
) -> Result<SampledEnvelope> {
    propagate_with(env, z, model, params, &PropagationOptions::default())
}

pub fn propagate_with(
    env: &SampledEnvelope,
    z: f64,
    model: &ChiModel,
    params: &MediumParams,
    opts: &PropagationOptions,
) -> Result<SampledEnvelope> {
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::Config(format!("propagation distance {z} must be non-negative")));
    }
    let mut spec = spectrum(env);
    let leak = leakage_of(&spec);
    if leak > opts.max_leakage {
        return Err(Error::Config(format!(
            "time grid under-resolves the envelope: spectral leakage {leak:.3e} above half Nyquist exceeds {:.1e}",
            opts.max_leakage
        )));
    }
    let clamp = opts.background_clamp * params.delta0;
    let factors: Vec<Complex64> = (0..env.len())
        .into_par_iter()
        .map(|k| {
            let om = env.frequency(k);
            let k_chi = if model.has_flat_background() && om.abs() > clamp {
                Complex64::new(0.0, -params.alpha0)
            } else {
                model.k_chi(om, params)?
            };
            let phase = Complex64::new(0.0, -om * params.inv_c * z) - Complex64::new(0.0, 0.5 * z) * k_chi;
            Ok(phase.exp())
        })
        .collect::<Result<_>>()?;
    for (s, f) in spec.iter_mut().zip(&factors) {
        *s *= f;
    }
    Ok(from_spectrum(env, &spec))
}

/// Closed-form amplitude of a unit Gaussian pulse (centered at `t = 0` at the
/// entrance) after a depth `z`, in the quadratic-susceptibility regime.
pub fn transmitted_gaussian(z: f64, t: f64, duration: f64, params: &MediumParams) -> f64 {
    let dt0 = params.delta0 * duration;
    let var = dt0 * dt0 + params.alpha0 * z;
    let s = t - z * params.inverse_group_velocity();
    dt0 / var.sqrt() * (-params.delta0 * params.delta0 * s * s / (2.0 * var)).exp()
}

/// Duration of the Gaussian after a depth `z`: `T sqrt(1 + alpha0 z / (delta0 T)^2)`.
pub fn stretched_duration(z: f64, duration: f64, params: &MediumParams) -> f64 {
    let dt0 = params.delta0 * duration;
    duration * (1.0 + params.alpha0 * z / (dt0 * dt0)).sqrt()
}

/// Rigid translation by `z * inverse_velocity` with amplitude damping `exp(-absorption z / 2)`.
/// The result lives on a grid shifted by the delay.
pub fn undistorted_solution(
    env: &SampledEnvelope,
    z: f64,
    inverse_velocity: f64,
    absorption: f64,
) -> SampledEnvelope {
    let damp = (-0.5 * absorption * z).exp();
    SampledEnvelope {
        t_start: env.t_start + z * inverse_velocity,
        dt: env.dt,
        samples: env.samples.iter().map(|a| a * damp).collect(),
    }
}

/// How well a pulse of duration `T` fits the slab.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConfinementReport {
    pub group_delay: f64,
    pub delay_over_duration: f64,
    /// `delta0 T / sqrt(alpha0 L)`: the pulse spectrum fits the transmitted band.
    pub spectral_margin: f64,
    /// `alpha0 L / (delta0 T)`: the pulse fits in the slab.
    pub temporal_margin: f64,
    /// `sqrt(alpha0 L)` clears the threshold.
    pub opaque_enough: bool,
}

pub const DEFAULT_OPACITY_THRESHOLD: f64 = 3.0;

pub fn confinement_report(duration: f64, params: &MediumParams, threshold: f64) -> ConfinementReport {
    let delay = params.group_delay();
    let dt0 = params.delta0 * duration;
    let root = params.opacity().sqrt();
    ConfinementReport {
        group_delay: delay,
        delay_over_duration: delay / duration,
        spectral_margin: dt0 / root,
        temporal_margin: params.opacity() / dt0,
        opaque_enough: root >= threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::HoleProfile;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reduced(alpha0_l: f64) -> MediumParams {
        MediumParams::reduced(alpha0_l, 0.0, 0.0).unwrap()
    }

    fn max_diff(a: &SampledEnvelope, b: &SampledEnvelope) -> f64 {
        a.samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_rules() {
        assert!(SampledEnvelope::new(0.0, 0.1, vec![Complex64::new(0.0, 0.0); 3]).is_err());
        assert!(SampledEnvelope::new(0.0, 0.0, vec![Complex64::new(0.0, 0.0); 4]).is_err());
        let p = reduced(100.0);
        let env = PulseSpec::gaussian(10.0).unwrap().envelope(&p).unwrap();
        assert!(env.len().is_power_of_two());
        assert!(env.window() >= 4.0 * p.group_delay() + 80.0);
        assert!(env.dt <= 0.1);
    }

    #[test]
    fn transform_round_trip() {
        let p = reduced(100.0);
        let env = PulseSpec::new(7.0, 1.0, 3.0).unwrap().envelope(&p).unwrap();
        let spec = spectrum(&env);
        let back = from_spectrum(&env, &spec);
        let scale = env.samples.iter().map(|a| a.norm()).fold(0.0, f64::max);
        assert!(max_diff(&env, &back) <= 1e-12 * scale);
        // Parseval
        let e_time: f64 = env.samples.iter().map(|a| a.norm_sqr()).sum();
        let e_freq: f64 = spec.iter().map(|a| a.norm_sqr()).sum::<f64>() / env.len() as f64;
        assert_relative_eq!(e_time, e_freq, max_relative = 1e-12);
    }

    #[test]
    fn vacuum_is_a_pure_delay() {
        let p = reduced(100.0);
        let env = PulseSpec::gaussian(10.0).unwrap().envelope(&p).unwrap();
        let out = propagate(&env, 100.0, &ChiModel::Vacuum, &p).unwrap();
        assert!(max_diff(&env, &out) < 1e-14);
        // finite c: delay by an integer number of samples is exact
        let mut q = p;
        q.inv_c = 8.0 * env.dt / 100.0;
        let out = propagate(&env, 100.0, &ChiModel::Vacuum, &q).unwrap();
        for i in 8..env.len() {
            assert!((out.samples[i] - env.samples[i - 8]).norm() < 1e-13);
        }
    }

    #[test]
    fn second_order_peak_matches_closed_form() {
        let p = reduced(100.0);
        let env = PulseSpec::gaussian(10.0).unwrap().envelope(&p).unwrap();
        let out = propagate(&env, 100.0, &ChiModel::SecondOrder, &p).unwrap();
        let (t_peak, a_peak) = out.peak();
        assert_relative_eq!(a_peak, 10.0 / 200f64.sqrt(), max_relative = 1e-4);
        assert!((t_peak - p.group_delay()).abs() <= out.dt);
        let worst = out
            .times()
            .zip(&out.samples)
            .map(|(t, a)| (a - transmitted_gaussian(100.0, t, 10.0, &p)).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "worst deviation {worst:e}");
    }

    #[test]
    fn exact_and_quadratic_models_stay_close() {
        let p = reduced(100.0);
        let env = PulseSpec::gaussian(5.0).unwrap().envelope(&p).unwrap();
        let a = propagate(&env, 100.0, &ChiModel::ExactGaussian, &p).unwrap();
        let b = propagate(&env, 100.0, &ChiModel::SecondOrder, &p).unwrap();
        let worst = a
            .samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| (x.norm() - y.norm()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.03, "{worst}");
    }

    #[test]
    fn quadrature_model_matches_dawson_model() {
        let p = reduced(20.0);
        let env = PulseSpec::gaussian(6.0).unwrap().envelope(&p).unwrap();
        let a = propagate(&env, 20.0, &ChiModel::ExactGaussian, &p).unwrap();
        let b = propagate(&env, 20.0, &ChiModel::Quadrature(HoleProfile::Gaussian), &p).unwrap();
        assert!(max_diff(&a, &b) < 1e-9);
    }

    #[test]
    fn lossless_energy_conservation() {
        let p = reduced(100.0);
        let env = PulseSpec::gaussian(5.0).unwrap().envelope(&p).unwrap();
        let model = ChiModel::Undistorted {
            inverse_velocity: 0.3,
            absorption: 0.0,
        };
        let out = propagate(&env, 100.0, &model, &p).unwrap();
        assert_relative_eq!(out.energy(), env.energy(), max_relative = 1e-10);
    }

    #[test]
    fn undistorted_matches_constant_chi() {
        let p = reduced(100.0);
        let env = PulseSpec::gaussian(5.0).unwrap().envelope(&p).unwrap();
        let z = 10.0;
        let iv = 37.0 * env.dt / z;
        // absorption * z = 0.1
        let alpha = 0.1 / z;
        let model = ChiModel::Undistorted {
            inverse_velocity: iv,
            absorption: alpha,
        };
        let spectral = propagate(&env, z, &model, &p).unwrap();
        let closed = undistorted_solution(&env, z, iv, alpha);
        assert_relative_eq!(closed.t_start - env.t_start, 37.0 * env.dt, epsilon = 1e-12);
        for i in 37..env.len() {
            assert!((spectral.samples[i] - closed.samples[i - 37]).norm() < 1e-12);
        }
        for (c, e) in closed.samples.iter().zip(&env.samples) {
            assert!((c - e * (-0.05f64).exp()).norm() < 1e-15);
        }
        assert!(((-0.05f64).exp() - 0.95123).abs() < 1e-5);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let p = reduced(10.0);
        let env = SampledEnvelope::from_fn(-8.0, 0.5, 64, |t| {
            Complex64::new(if t.abs() < 0.5 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let err = propagate(&env, 1.0, &ChiModel::SecondOrder, &p).unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("leakage")));
    }

    #[test]
    fn closed_forms() {
        let p = reduced(100.0);
        assert_relative_eq!(transmitted_gaussian(0.0, 3.0, 5.0, &p), (-9.0f64 / 50.0).exp(), epsilon = 1e-15);
        let t = 18.9737;
        let peak = transmitted_gaussian(100.0, 100.0 * p.inverse_group_velocity(), t, &p);
        assert!((peak - 0.88465).abs() < 1e-5);
        assert_relative_eq!(stretched_duration(100.0, 10.0, &p), 10.0 * 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn confinement_examples() {
        let p = reduced(100.0);
        let r = confinement_report(5.0, &p, DEFAULT_OPACITY_THRESHOLD);
        assert!((r.group_delay - 56.419).abs() < 1e-3);
        assert!((r.delay_over_duration - 11.284).abs() < 1e-3);
        assert!(r.opaque_enough);
        let r = confinement_report(0.6 * 100f64.powf(0.75), &p, DEFAULT_OPACITY_THRESHOLD);
        assert!((r.delay_over_duration - 2.974).abs() < 1e-3);
        assert!(!confinement_report(1.0, &reduced(1.0), DEFAULT_OPACITY_THRESHOLD).opaque_enough);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn passive_propagation_never_gains_energy(t in 3.0f64..12.0, l in 1.0f64..60.0) {
            let p = reduced(l);
            let env = PulseSpec::gaussian(t).unwrap().envelope(&p).unwrap();
            for model in [ChiModel::SecondOrder, ChiModel::ExactGaussian] {
                let out = propagate(&env, l, &model, &p).unwrap();
                prop_assert!(out.energy() <= env.energy() * (1.0 + 1e-12));
            }
        }

        #[test]
        fn quadratic_output_peaks_after_vacuum_transit(t in 3.0f64..12.0, l in 1.0f64..60.0, r in 0.0f64..0.9) {
            let p = MediumParams::reduced(l, 0.0, r).unwrap();
            let env = PulseSpec::gaussian(t).unwrap().envelope(&p).unwrap();
            let out = propagate(&env, l, &ChiModel::SecondOrder, &p).unwrap();
            prop_assert!(out.peak().0 >= env.peak().0 + l * p.inv_c - out.dt);
        }
    }
}
