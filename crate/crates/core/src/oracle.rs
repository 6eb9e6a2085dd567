//! Brute-force time-domain reference: a discretized ensemble of two-level
//! dipoles driven by the envelope, co-integrated with the field along `z`.
//!
//! Coherence convention: `sigma(t) = -(i/2) int_0^inf A(t - tau) e^{(i delta - gamma) tau} d tau`,
//! i.e. `d sigma / dt = (i delta - gamma) sigma - (i/2) A`, and the field obeys
//! `dA/dz = -i (alpha0 / pi) int g(delta) sigma(delta) d delta` in retarded time.
//! Slow for anything but small instances; meant for tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::medium::{HoleProfile, MediumParams};
use crate::propagation::SampledEnvelope;

pub const MAX_ATOMS: usize = 512;
/// Largest `alpha0 dz` per step.
pub const MAX_OPTICAL_STEP: f64 = 0.05;
const CHUNKS: usize = 32;
const MAX_HISTORY_EDGE: f64 = 1e-6;

/// One dipole on the Bloch-sphere equator, `sigma = (u + i v) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AtomState {
    pub detuning: f64,
    pub u: f64,
    pub v: f64,
}

impl AtomState {
    pub fn from_coherence(detuning: f64, sigma: Complex64) -> Self {
        Self {
            detuning,
            u: 2.0 * sigma.re,
            v: 2.0 * sigma.im,
        }
    }

    pub fn coherence(&self) -> Complex64 {
        Complex64::new(0.5 * self.u, 0.5 * self.v)
    }
}

/// Leading adiabatic-following terms, `u = -A / delta`, `v = -dA/dt / delta^2`.
///
/// Here `delta` is the field-minus-atom offset, so this equals
/// [`coherence_convolution`] evaluated at atomic detuning `-delta`.
pub fn adiabatic_uv(detuning: f64, amplitude: f64, time_derivative: f64) -> AtomState {
    AtomState {
        detuning,
        u: -amplitude / detuning,
        v: -time_derivative / (detuning * detuning),
    }
}

/// Per-step propagator of one coherence for a piecewise-linear drive.
#[derive(Clone, Copy, Debug)]
struct Stepper {
    decay: Complex64,
    from_prev: Complex64,
    from_next: Complex64,
}

impl Stepper {
    fn new(detuning: f64, gamma: f64, h: f64) -> Self {
        let lam = Complex64::new(-gamma, detuning);
        let x = lam * h;
        // int_0^h e^{lam (h - s)} ds and int_0^h e^{lam (h - s)} s / h ds
        let (i0, psi) = if x.norm() < 1e-3 {
            (
                h * (1.0 + x * (0.5 + x * (1.0 / 6.0 + x / 24.0))),
                h * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0))),
            )
        } else {
            let e = x.exp();
            ((e - 1.0) / lam, (e - 1.0 - x) / (lam * x))
        };
        let half_i = Complex64::new(0.0, -0.5);
        Self {
            decay: x.exp(),
            from_prev: half_i * (i0 - psi),
            from_next: half_i * psi,
        }
    }

    #[inline]
    fn step(&self, sigma: Complex64, a0: Complex64, a1: Complex64) -> Complex64 {
        self.decay * sigma + self.from_prev * a0 + self.from_next * a1
    }
}

/// Coherence at time `t` driven by the sampled history (zero before it,
/// linear between samples, zero after it).
pub fn coherence_convolution(detuning: f64, history: &SampledEnvelope, t: f64, params: &MediumParams) -> Result<Complex64> {
    if !detuning.is_finite() || !t.is_finite() {
        return Err(Error::Domain("detuning and time must be finite".into()));
    }
    let n = history.len();
    let total: f64 = history.samples.iter().map(|a| a.norm_sqr()).sum();
    if total == 0.0 || t <= history.t_start {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lead: f64 = history.samples[..(n / 16).max(1)].iter().map(|a| a.norm_sqr()).sum();
    if lead / total > MAX_HISTORY_EDGE {
        return Err(Error::Config(format!(
            "history starts inside the pulse: {:.2e} of its energy lies in the first sixteenth",
            lead / total
        )));
    }
    let gamma = params.gamma_ab;
    let h = history.dt;
    let st = Stepper::new(detuning, gamma, h);
    let a = &history.samples;
    let pos = (t - history.t_start) / h;
    let whole = (pos.floor() as usize).min(n - 1);
    let mut sigma = Complex64::new(0.0, 0.0);
    for k in 0..whole {
        sigma = st.step(sigma, a[k], a[k + 1]);
    }
    let t_k = history.time(whole);
    let rest = t - t_k;
    if rest <= 0.0 {
        return Ok(sigma);
    }
    if whole + 1 < n {
        // partial step to t along the same linear segment
        let a_t = a[whole] + (a[whole + 1] - a[whole]) * (rest / h);
        Ok(Stepper::new(detuning, gamma, rest).step(sigma, a[whole], a_t))
    } else {
        // after the last sample the drive is off
        Ok(sigma * (Complex64::new(-gamma, detuning) * rest).exp())
    }
}

/// Discrete inhomogeneous line: detunings with quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct DetuningGrid {
    pub detunings: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DetuningGrid {
    /// `delta = delta0 tan(phi)` at midpoints of a uniform `phi` grid on
    /// `(-pi/2, pi/2)`: half the atoms sit within `|delta| < delta0`, and the
    /// far wings are covered out to `~ 2 n delta0 / pi`.
    pub fn tangent(n_atoms: usize, delta0: f64) -> Result<Self> {
        if !(8..=MAX_ATOMS).contains(&n_atoms) {
            return Err(Error::Config(format!(
                "atom count {n_atoms} outside [8, {MAX_ATOMS}]"
            )));
        }
        let dphi = PI / n_atoms as f64;
        let (detunings, weights) = (0..n_atoms)
            .map(|j| {
                let phi = -0.5 * PI + (j as f64 + 0.5) * dphi;
                let c = phi.cos();
                (delta0 * phi.tan(), delta0 * dphi / (c * c))
            })
            .unzip();
        Ok(Self { detunings, weights })
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.detunings.iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }
}

/// Atoms with their weight times population.
#[derive(Clone, Debug)]
pub struct Ensemble {
    detunings: Vec<f64>,
    density: Vec<f64>,
    gamma: f64,
}

impl Ensemble {
    pub fn new(grid: &DetuningGrid, profile: &HoleProfile, params: &MediumParams) -> Self {
        let density = grid
            .detunings
            .iter()
            .zip(&grid.weights)
            .map(|(d, w)| w * profile.g(*d, params))
            .collect();
        Self {
            detunings: grid.detunings.clone(),
            density,
            gamma: params.gamma_ab,
        }
    }

    /// Explicit populations (weight times `g`) per detuning.
    pub fn from_parts(detunings: Vec<f64>, density: Vec<f64>, gamma: f64) -> Result<Self> {
        if detunings.len() != density.len() || detunings.is_empty() || detunings.len() > MAX_ATOMS {
            return Err(Error::Config("ensemble needs 1..=512 atoms with one density each".into()));
        }
        Ok(Self {
            detunings,
            density,
            gamma,
        })
    }

    fn steppers(&self, h: f64) -> Vec<Stepper> {
        self.detunings.iter().map(|d| Stepper::new(*d, self.gamma, h)).collect()
    }

    /// Drive every atom from its initial coherence with the sampled field.
    fn drive(&self, steppers: &[Stepper], a: &[Complex64], h: f64, init: &[Complex64]) -> Drive {
        let n = a.len();
        let m = self.detunings.len();
        let chunk = m.div_ceil(CHUNKS).max(1);
        let parts: Vec<Drive> = (0..m)
            .step_by(chunk)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&lo| {
                let hi = (lo + chunk).min(m);
                let mut d = Drive {
                    polarization: vec![Complex64::new(0.0, 0.0); n],
                    last: Vec::with_capacity(hi - lo),
                    held: 0.0,
                    dissipated: 0.0,
                };
                for j in lo..hi {
                    let w = self.density[j];
                    let st = &steppers[j];
                    let mut s = init[j];
                    d.polarization[0] += w * s;
                    let mut p_prev = s.norm_sqr();
                    let mut acc = 0.0;
                    for k in 0..n - 1 {
                        s = st.step(s, a[k], a[k + 1]);
                        d.polarization[k + 1] += w * s;
                        let p = s.norm_sqr();
                        acc += 0.5 * (p_prev + p);
                        p_prev = p;
                    }
                    d.last.push(s);
                    d.held += w * s.norm_sqr();
                    d.dissipated += w * 2.0 * self.gamma * acc * h;
                }
                d
            })
            .collect();
        let mut total = Drive {
            polarization: vec![Complex64::new(0.0, 0.0); n],
            last: Vec::with_capacity(m),
            held: 0.0,
            dissipated: 0.0,
        };
        for p in parts {
            for (t, v) in total.polarization.iter_mut().zip(p.polarization) {
                *t += v;
            }
            total.last.extend(p.last);
            total.held += p.held;
            total.dissipated += p.dissipated;
        }
        total
    }
}

struct Drive {
    /// `sum_j w_j g_j sigma_j(t_k)`.
    polarization: Vec<Complex64>,
    last: Vec<Complex64>,
    held: f64,
    dissipated: f64,
}

/// Output of a co-integration with its energy bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRun {
    pub output: SampledEnvelope,
    /// `int |A|^2 dt` at the entrance minus at the exit.
    pub field_energy_deficit: f64,
    /// `(2 alpha0 / pi) int dz sum w g (|sigma(t_end)|^2 + 2 gamma int |sigma|^2 dt)`.
    pub atomic_energy: f64,
}

fn check_steps(length: f64, alpha0: f64, n_steps: usize) -> Result<f64> {
    if n_steps == 0 {
        return Err(Error::Config("at least one z step is needed".into()));
    }
    let dz = length / n_steps as f64;
    if dz * alpha0 > MAX_OPTICAL_STEP {
        return Err(Error::Config(format!(
            "z step too coarse: alpha0 dz = {:.3} exceeds {MAX_OPTICAL_STEP}",
            dz * alpha0
        )));
    }
    Ok(dz)
}

fn axpy(a: &[Complex64], k: &[Complex64], s: f64) -> Vec<Complex64> {
    a.iter().zip(k).map(|(x, y)| x + y * s).collect()
}

fn field_energy(a: &[Complex64], h: f64) -> f64 {
    h * a.iter().map(|x| x.norm_sqr()).sum::<f64>()
}

/// Transport `env` through a depth `z` of the given ensemble (RK4 in `z`).
pub fn co_integrate(env: &SampledEnvelope, z: f64, ensemble: &Ensemble, params: &MediumParams, n_steps: usize) -> Result<OracleRun> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::Domain(format!("depth must be finite and >= 0, got {z}")));
    }
    let dz = check_steps(z, params.alpha0, n_steps)?;
    let h = env.dt;
    let steppers = ensemble.steppers(h);
    let zero = vec![Complex64::new(0.0, 0.0); ensemble.detunings.len()];
    let coupling = Complex64::new(0.0, -params.alpha0 / PI);
    let rhs = |a: &[Complex64]| -> (Vec<Complex64>, f64) {
        let d = ensemble.drive(&steppers, a, h, &zero);
        let f = d.polarization.iter().map(|p| coupling * p).collect();
        (f, d.held + d.dissipated)
    };
    let mut a = env.samples.clone();
    let e0 = field_energy(&a, h);
    let mut sink = Vec::with_capacity(n_steps + 1);
    for _ in 0..n_steps {
        let (k1, s) = rhs(&a);
        sink.push(s);
        let (k2, _) = rhs(&axpy(&a, &k1, 0.5 * dz));
        let (k3, _) = rhs(&axpy(&a, &k2, 0.5 * dz));
        let (k4, _) = rhs(&axpy(&a, &k3, dz));
        for i in 0..a.len() {
            a[i] += dz / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    sink.push(rhs(&a).1);
    let atomic = 2.0 * params.alpha0 / PI * trapezoid(&sink, dz);
    let e1 = field_energy(&a, h);
    Ok(OracleRun {
        output: SampledEnvelope::new(env.t_start + z * params.inv_c, h, a)?,
        field_energy_deficit: e0 - e1,
        atomic_energy: atomic,
    })
}

fn trapezoid(y: &[f64], h: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => h * (y.iter().sum::<f64>() - 0.5 * (y[0] + y[n - 1])),
    }
}

/// Output envelope after depth `z`, from the tangent detuning grid.
pub fn time_domain_propagate(
    env: &SampledEnvelope,
    z: f64,
    profile: &HoleProfile,
    params: &MediumParams,
    n_atoms: usize,
    n_steps: usize,
) -> Result<SampledEnvelope> {
    Ok(time_domain_run(env, z, profile, params, n_atoms, n_steps)?.output)
}

pub fn time_domain_run(
    env: &SampledEnvelope,
    z: f64,
    profile: &HoleProfile,
    params: &MediumParams,
    n_atoms: usize,
    n_steps: usize,
) -> Result<OracleRun> {
    let grid = DetuningGrid::tangent(n_atoms, params.delta0)?;
    co_integrate(env, z, &Ensemble::new(&grid, profile, params), params, n_steps)
}
