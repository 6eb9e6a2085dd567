//! Sampled restored pulse and retrieval efficiency.

use num_complex::Complex64;
use rayon::prelude::*;

use super::established::{established_at, plateau_with, ESTABLISHED_THRESHOLD};
use super::full::full_at;
use super::kernel::DetuningKernel;
use super::revival::revival_at;
use super::series::{series_at, MAX_SERIES_ORDER};
use super::{Method, RetrievalResult, SlabResponse, StorageProblem, Validity};
use crate::error::{Error, Result};
use crate::medium::HoleProfile;
use crate::propagation::SampledEnvelope;
use crate::special::SQRT_PI;

/// Largest output step in units of `1/delta0`.
const DEFAULT_STEP: f64 = 0.25;
/// Allowed share of the energy in the last tenth of the window.
const MAX_TAIL_FRACTION: f64 = 1e-3;
const EARLY_RATIO_WARNING: f64 = 0.1;

enum Evaluator {
    Full(SlabResponse, DetuningKernel),
    Established(SlabResponse, Complex64),
    Revival(SlabResponse, Option<DetuningKernel>),
    Series(SlabResponse, usize),
}

impl Evaluator {
    fn new(problem: &StorageProblem, method: Method) -> Result<Self> {
        let resp = problem.response()?;
        Ok(match method {
            Method::FullQuadrature => {
                problem.require_full_band("the full quadrature")?;
                Evaluator::Full(resp, DetuningKernel::new(problem)?)
            }
            Method::Established => Evaluator::Established(resp, plateau_with(problem, &resp)?),
            Method::Revival => {
                let kernel = match (&problem.profile, problem.schedule.delta1) {
                    (HoleProfile::Tabulated(_), None) => Some(DetuningKernel::new(problem)?),
                    _ => None,
                };
                Evaluator::Revival(resp, kernel)
            }
            Method::Series(n) => {
                problem.require_gaussian("the depth-derivative expansion")?;
                problem.require_full_band("the depth-derivative expansion")?;
                if n > MAX_SERIES_ORDER {
                    return Err(Error::Config(format!(
                        "series order {n} exceeds the supported maximum {MAX_SERIES_ORDER}"
                    )));
                }
                Evaluator::Series(resp, n)
            }
        })
    }

    fn response(&self) -> &SlabResponse {
        match self {
            Evaluator::Full(r, _) | Evaluator::Established(r, _) | Evaluator::Revival(r, _) | Evaluator::Series(r, _) => r,
        }
    }

    fn eval(&self, theta: f64, problem: &StorageProblem) -> Result<Complex64> {
        match self {
            Evaluator::Full(r, k) => full_at(theta, problem, r, k),
            Evaluator::Established(r, c) => established_at(theta, problem, r, *c),
            Evaluator::Revival(r, k) => Ok(revival_at(theta, problem, r, k.as_ref())?.amplitude),
            Evaluator::Series(r, n) => series_at(theta, problem, r, *n),
        }
    }
}

/// Restored pulse on a grid with step at most `0.25 / delta0`.
pub fn retrieve(problem: &StorageProblem, method: Method) -> Result<RetrievalResult> {
    retrieve_with_step(problem, method, DEFAULT_STEP / problem.medium.delta0)
}

pub fn retrieve_with_step(problem: &StorageProblem, method: Method, max_step: f64) -> Result<RetrievalResult> {
    if !(max_step.is_finite() && max_step > 0.0) {
        return Err(Error::Config(format!("output step must be positive, got {max_step}")));
    }
    let ev = Evaluator::new(problem, method)?;
    let resp = *ev.response();
    let m = &problem.medium;
    let window = resp.delay() + 8.0 * (resp.spread * resp.length).sqrt() + 8.0 / m.delta0;
    let n = ((window / max_step).ceil() as usize).next_power_of_two().max(16);
    // cell midpoints: the late-time form jumps at theta = 0+, which the
    // midpoint rule integrates without a half-cell error
    let dt = window / n as f64;
    let samples: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| ev.eval((i as f64 + 0.5) * dt, problem))
        .collect::<Result<_>>()?;
    let env = SampledEnvelope::new(0.5 * dt, dt, samples)?;

    let power: Vec<f64> = env.samples.iter().map(|a| a.norm_sqr()).collect();
    let energy = dt * power.iter().sum::<f64>();
    let tail_start = n - n / 10;
    let tail = dt * power[tail_start..].iter().sum::<f64>();
    let tail_fraction = if energy > 0.0 { tail / energy } else { 0.0 };
    if tail_fraction > MAX_TAIL_FRACTION {
        return Err(Error::Config(format!(
            "restored pulse not contained in the output window: {tail_fraction:.2e} of its energy lies in the last tenth"
        )));
    }
    let p = &problem.pulse;
    let efficiency = energy / (p.peak * p.peak * p.duration * SQRT_PI);
    let validity = assess(problem, &resp, &env, &power, energy, tail_fraction, method);
    Ok(RetrievalResult {
        output_envelope: env,
        efficiency,
        method,
        validity,
    })
}

fn assess(
    problem: &StorageProblem,
    resp: &SlabResponse,
    env: &SampledEnvelope,
    power: &[f64],
    energy: f64,
    tail_energy_fraction: f64,
    method: Method,
) -> Validity {
    let m = &problem.medium;
    let (t_peak, _) = env.peak();
    let early_time_ratio = m.delta0 * t_peak.clamp(0.0, resp.delay()) / (m.delta0 * resp.duration).powi(2);
    let late: f64 = env
        .times()
        .zip(power)
        .filter(|(t, _)| m.delta0 * t > ESTABLISHED_THRESHOLD)
        .map(|(_, p)| p * env.dt)
        .sum();
    let late_window_fraction = if energy > 0.0 { (late / energy).min(1.0) } else { 0.0 };
    let edge = problem.pulse.peak * 1e-3;
    let t_pi1 = problem.schedule.t_pi1;
    let out_of_depth = resp.frozen_field(0.0, t_pi1) > edge || resp.frozen_field(resp.length, t_pi1) > edge;
    let pulse_fits_hole = problem.pulse.fits_hole(m);

    let mut warnings = Vec::new();
    if out_of_depth {
        warnings.push("pulse not fully inside the slab at the storage instant".to_string());
    }
    if !pulse_fits_hole {
        warnings.push("pulse spectrum wider than the hole".to_string());
    }
    match method {
        Method::Revival | Method::Series(_) if early_time_ratio > EARLY_RATIO_WARNING => {
            warnings.push(format!("early-time expansion stretched: ratio {early_time_ratio:.3}"));
        }
        Method::Established if late_window_fraction < 0.9 => {
            warnings.push(format!(
                "only {:.1}% of the output lies in the established regime",
                100.0 * late_window_fraction
            ));
        }
        _ => {}
    }
    Validity {
        early_time_ratio,
        late_window_fraction,
        out_of_depth,
        tail_energy_fraction,
        pulse_fits_hole,
        warnings,
    }
}

/// Retrieval efficiency: restored energy over input energy.
pub fn efficiency(problem: &StorageProblem, method: Method) -> Result<f64> {
    Ok(retrieve(problem, method)?.efficiency)
}

pub fn efficiency_with_step(problem: &StorageProblem, method: Method, max_step: f64) -> Result<f64> {
    Ok(retrieve_with_step(problem, method, max_step)?.efficiency)
}

/// L2 distance between the normalized restored modulus and the normalized
/// input profile, placed where the stored pulse center re-emerges.
pub fn restored_shape_error(result: &RetrievalResult, problem: &StorageProblem) -> f64 {
    let env = &result.output_envelope;
    let p = &problem.pulse;
    let center = problem.medium.length * problem.response().map(|r| r.inv_v).unwrap_or(0.0)
        - (problem.schedule.t_pi1 - p.center_time);
    let reference: Vec<f64> = env
        .times()
        .map(|t| {
            let s = (t - center) / p.duration;
            (-0.5 * s * s).exp()
        })
        .collect();
    let out: Vec<f64> = env.samples.iter().map(|a| a.norm()).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nr) = (norm(&out), norm(&reference));
    if na == 0.0 || nr == 0.0 {
        return 1.0;
    }
    out.iter()
        .zip(&reference)
        .map(|(a, r)| (a / na - r / nr).powi(2))
        .sum::<f64>()
        .sqrt()
}
