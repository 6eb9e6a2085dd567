//! Storage of a slowed pulse by a pair of ideal pi-pulses and the field
//! restored at the slab output.
//!
//! All restored-field functions take the absolute observation time `t` and
//! vanish for `t <= t_pi2`.

mod efficiency;
mod established;
mod full;
mod kappa;
mod kernel;
mod revival;
mod series;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{absorption_coefficient, inverse_group_velocity, HoleProfile, MediumParams};
use crate::propagation::{PulseSpec, SampledEnvelope};
use crate::quad::Quadrature;
use crate::special::{erfcx, AccuracyBudget};

pub use efficiency::{efficiency, efficiency_with_step, restored_shape_error, retrieve, retrieve_with_step};
pub use established::{established_signal, plateau_coefficient, ESTABLISHED_THRESHOLD};
pub use full::restored_field_full;
pub use kappa::{bandwidth_reduction_factor, kappa, kappa_band_limited, kappa_quadrature};
pub use kernel::DetuningKernel;
pub use revival::{revival_envelope, RevivalSample};
pub use series::{appendix_series_field, simple_field, MAX_SERIES_ORDER};

/// Instants of the storage and retrieval pi-pulses and the conversion bandwidth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageSchedule {
    pub t_pi1: f64,
    pub t_pi2: f64,
    /// Half-width of the converted band; `None` converts every detuning.
    pub delta1: Option<f64>,
}

impl StorageSchedule {
    pub fn new(t_pi1: f64, t_pi2: f64, delta1: Option<f64>) -> Result<Self> {
        let s = Self {
            t_pi1,
            t_pi2,
            delta1,
        };
        if !t_pi1.is_finite() || !t_pi2.is_finite() || t_pi2 <= t_pi1 {
            return Err(Error::Config(format!(
                "retrieval pulse must follow the storage pulse (t_pi1 = {t_pi1}, t_pi2 = {t_pi2})"
            )));
        }
        if let Some(d1) = delta1 {
            if !(d1.is_finite() && d1 > 0.0) {
                return Err(Error::Config(format!("conversion bandwidth {d1} must be positive")));
            }
        }
        Ok(s)
    }

    /// Store when the pulse peak sits halfway through the slab, `t_pi1 = t_c + L / (2v)`.
    pub fn half_delay(params: &MediumParams, pulse: &PulseSpec, storage_time: f64, delta1: Option<f64>) -> Result<Self> {
        let t_pi1 = pulse.center_time + 0.5 * params.group_delay();
        Self::new(t_pi1, t_pi1 + storage_time, delta1)
    }

    pub fn check_against(&self, params: &MediumParams) -> Result<()> {
        if let Some(d1) = self.delta1 {
            if d1 <= params.delta0 {
                return Err(Error::Config(format!(
                    "conversion bandwidth {d1} must exceed the hole width {}",
                    params.delta0
                )));
            }
        }
        Ok(())
    }
}

/// Pulse duration of the standard protocol, `delta0 T = b (alpha0 L)^(3/4)`.
pub fn protocol_duration(params: &MediumParams, b: f64) -> f64 {
    b * params.opacity().powf(0.75) / params.delta0
}

/// Which expression evaluates the restored field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Two-dimensional time quadrature against the detuning kernel.
    FullQuadrature,
    /// Late-time form with the kernel collapsed to its integral.
    Established,
    /// Early-time product of the frozen field and the revival function.
    Revival,
    /// Partial sum of the Dirac-peak expansion up to the given order.
    Series(usize),
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::FullQuadrature => "full_quadrature".into(),
            Method::Established => "established".into(),
            Method::Revival => "revival".into(),
            Method::Series(n) => format!("series({n})"),
        }
    }
}

/// Everything the retrieval integrals depend on.
#[derive(Clone, Debug, PartialEq)]
pub struct StorageProblem {
    pub medium: MediumParams,
    pub pulse: PulseSpec,
    pub schedule: StorageSchedule,
    pub profile: HoleProfile,
    pub budget: AccuracyBudget,
}

/// Default target for the retrieval quadratures.
pub fn retrieval_budget() -> AccuracyBudget {
    AccuracyBudget {
        abs_tol: 1e-10,
        rel_tol: 1e-8,
    }
}

impl StorageProblem {
    pub fn new(medium: MediumParams, pulse: PulseSpec, schedule: StorageSchedule) -> Result<Self> {
        medium.validate()?;
        schedule.check_against(&medium)?;
        Ok(Self {
            medium,
            pulse,
            schedule,
            profile: HoleProfile::Gaussian,
            budget: retrieval_budget(),
        })
    }

    pub fn with_profile(mut self, profile: HoleProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_budget(mut self, budget: AccuracyBudget) -> Self {
        self.budget = budget;
        self
    }

    /// Standard protocol: `delta0 T = b (alpha0 L)^(3/4)`, unit Gaussian
    /// centered at `t = 0`, storage at half delay.
    pub fn protocol(medium: MediumParams, b: f64, storage_time: f64, delta1: Option<f64>) -> Result<Self> {
        let pulse = PulseSpec::gaussian(protocol_duration(&medium, b))?;
        let schedule = StorageSchedule::half_delay(&medium, &pulse, storage_time, delta1)?;
        Self::new(medium, pulse, schedule)
    }

    pub fn theta(&self, t: f64) -> f64 {
        t - self.schedule.t_pi2
    }

    pub(crate) fn quadrature(&self, tighten: f64) -> Quadrature {
        Quadrature::new(self.budget.abs_tol * tighten, self.budget.rel_tol * tighten).with_max_segments(4000)
    }

    pub(crate) fn response(&self) -> Result<SlabResponse> {
        SlabResponse::new(self)
    }

    pub(crate) fn require_gaussian(&self, what: &str) -> Result<()> {
        match self.profile {
            HoleProfile::Gaussian => Ok(()),
            HoleProfile::Tabulated(_) => Err(Error::Unsupported(format!(
                "{what} is written for the Gaussian hole"
            ))),
        }
    }

    pub(crate) fn require_full_band(&self, what: &str) -> Result<()> {
        match self.schedule.delta1 {
            None => Ok(()),
            Some(_) => Err(Error::Unsupported(format!(
                "{what} assumes every detuning is converted (no finite bandwidth)"
            ))),
        }
    }
}

/// Second-order description of the slab seen by the stored field: group
/// delay, temporal variance growth and residual loss per unit length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct SlabResponse {
    pub inv_v: f64,
    /// Growth of the pulse variance (time^2) per unit length.
    pub spread: f64,
    /// Intensity loss rate at the hole center.
    pub loss: f64,
    pub length: f64,
    pub duration: f64,
    pub peak: f64,
    pub center: f64,
}

impl SlabResponse {
    fn new(p: &StorageProblem) -> Result<Self> {
        let m = &p.medium;
        let (inv_v, spread, loss) = match &p.profile {
            HoleProfile::Gaussian => {
                let loss = if m.gamma_ab > 0.0 {
                    m.alpha0 * (1.0 - erfcx(m.gamma_ab / m.delta0)?)
                } else {
                    0.0
                };
                (m.inverse_group_velocity(), m.alpha0 / (m.delta0 * m.delta0), loss)
            }
            profile => {
                let inv_v = inverse_group_velocity(profile, m)?;
                let a0 = absorption_coefficient(0.0, profile, m)?;
                let curvature = crate::medium::absorption_curvature(profile, m)?;
                if curvature <= 0.0 {
                    return Err(Error::Config(
                        "hole absorption must grow away from the center".into(),
                    ));
                }
                (inv_v, 0.5 * m.alpha0 * curvature, a0)
            }
        };
        Ok(Self {
            inv_v,
            spread,
            loss,
            length: m.length,
            duration: p.pulse.duration,
            peak: p.pulse.peak,
            center: p.pulse.center_time,
        })
    }

    pub fn velocity(&self) -> f64 {
        1.0 / self.inv_v
    }

    pub fn delay(&self) -> f64 {
        self.length * self.inv_v
    }

    /// Slowed input pulse at depth `z` and time `t` (no storage).
    pub fn frozen_field(&self, z: f64, t: f64) -> f64 {
        let t2 = self.duration * self.duration;
        let var = t2 + self.spread * z;
        let s = t - self.center - z * self.inv_v;
        self.peak * (t2 / var).sqrt() * (-s * s / (2.0 * var) - 0.5 * self.loss * z).exp()
    }

    /// Green's function of the second-order medium as a density in the delay
    /// `theta`, after a path `zeta = w^2`, multiplied by `w`.
    fn scaled_propagator(&self, theta: f64, w: f64) -> f64 {
        let zeta = w * w;
        let arg = if w > 0.0 {
            let r = theta - zeta * self.inv_v;
            r * r / (2.0 * self.spread * zeta)
        } else {
            f64::INFINITY
        };
        (-arg - 0.5 * self.loss * zeta).exp() / (2.0 * PI * self.spread).sqrt()
    }

    /// `int_0^L dz' A_in(z', t') P(theta, L - z')`: the output at delay `theta`
    /// radiated by the field frozen at time `t'`.
    pub fn radiated(&self, t_prime: f64, theta: f64, q: &Quadrature) -> Result<f64> {
        if theta <= 0.0 {
            return Ok(0.0);
        }
        let top = self.length.sqrt();
        // the propagator peaks where the path equals v theta
        let w0 = (theta * self.velocity()).sqrt();
        let width = (2.0 * self.spread).sqrt() * self.velocity() * 0.5;
        let mut pts = vec![0.0, top];
        for k in [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            let p = w0 + k * width;
            if p > 0.0 && p < top {
                pts.push(p);
            }
        }
        pts.sort_by(f64::total_cmp);
        let r = q.integrate_points(
            |w: f64| 2.0 * self.frozen_field(self.length - w * w, t_prime) * self.scaled_propagator(theta, w),
            &pts,
        )?;
        Ok(r.value)
    }
}

/// Restored field at time `t` by the chosen method.
pub fn restored_field(t: f64, problem: &StorageProblem, method: Method) -> Result<Complex64> {
    match method {
        Method::FullQuadrature => restored_field_full(t, problem),
        Method::Established => established_signal(t, problem),
        Method::Revival => Ok(revival_envelope(t, problem)?.amplitude),
        Method::Series(n) => appendix_series_field(t, problem, n),
    }
}

/// Validity bookkeeping attached to a retrieval.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Validity {
    /// Largest `delta0 min(theta, L/v) / (delta0 T)^2` over the output window
    /// (the early-time expansions need it small).
    pub early_time_ratio: f64,
    /// Fraction of output samples with `delta0 theta` above the late-time threshold.
    pub late_window_fraction: f64,
    /// Output extends past the group delay, where the revival form is cut off.
    pub out_of_depth: bool,
    /// Share of the restored energy in the last tenth of the output window.
    pub tail_energy_fraction: f64,
    pub pulse_fits_hole: bool,
    pub warnings: Vec<String>,
}

/// Restored envelope versus `t - t_pi2`, with its efficiency.
#[derive(Clone, Debug, PartialEq)]
pub struct RetrievalResult {
    pub output_envelope: SampledEnvelope,
    pub efficiency: f64,
    pub method: Method,
    pub validity: Validity,
}
