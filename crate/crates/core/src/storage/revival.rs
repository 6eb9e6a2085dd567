//! Early-time restored field: the frozen field at the depth the echo has
//! travelled back from, scaled by the revival function.

use num_complex::Complex64;

use super::kappa::{kappa, kappa_band_limited_with, kappa_with_kernel};
use super::kernel::DetuningKernel;
use super::{SlabResponse, StorageProblem};
use crate::error::Result;
use crate::medium::HoleProfile;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RevivalSample {
    pub amplitude: Complex64,
    /// `delta0 min(theta, L/v) / (delta0 T)^2`; the form assumes this is small.
    pub early_time_ratio: f64,
    /// The echo would have to come from beyond the slab entrance.
    pub out_of_depth: bool,
}

pub fn revival_envelope(t: f64, problem: &StorageProblem) -> Result<RevivalSample> {
    let resp = problem.response()?;
    let kernel = match (&problem.profile, problem.schedule.delta1) {
        (HoleProfile::Tabulated(_), None) => Some(DetuningKernel::new(problem)?),
        _ => None,
    };
    revival_at(problem.theta(t), problem, &resp, kernel.as_ref())
}

pub(crate) fn revival_at(
    theta: f64,
    problem: &StorageProblem,
    resp: &SlabResponse,
    kernel: Option<&DetuningKernel>,
) -> Result<RevivalSample> {
    let m = &problem.medium;
    let delay = resp.delay();
    let dt2 = (m.delta0 * resp.duration).powi(2);
    let mut s = RevivalSample {
        amplitude: Complex64::new(0.0, 0.0),
        early_time_ratio: m.delta0 * theta.clamp(0.0, delay) / dt2,
        out_of_depth: theta > delay,
    };
    if theta <= 0.0 || s.out_of_depth {
        return Ok(s);
    }
    let x = 0.5 * theta * m.delta0;
    let factor = match (problem.schedule.delta1, kernel) {
        (Some(d1), _) => kappa_band_limited_with(x, d1, problem, resp.velocity())?,
        (None, Some(k)) => kappa_with_kernel(x, problem, k, resp.velocity())?,
        (None, None) => Complex64::new(kappa(x, m)?, 0.0),
    };
    let frozen = resp.frozen_field(m.length - resp.velocity() * theta, problem.schedule.t_pi1);
    s.amplitude = factor * frozen;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::storage::tests::canonical;
    use crate::storage::StorageSchedule;
    use approx::assert_relative_eq;

    #[test]
    fn zero_before_retrieval_and_beyond_depth() {
        let p = canonical(100.0, 19.0);
        let t2 = p.schedule.t_pi2;
        assert_eq!(revival_envelope(t2 - 1.0, &p).unwrap().amplitude.norm(), 0.0);
        assert_eq!(revival_envelope(t2, &p).unwrap().amplitude.norm(), 0.0);
        let late = revival_envelope(t2 + p.medium.group_delay() + 1.0, &p).unwrap();
        assert!(late.out_of_depth);
        assert_eq!(late.amplitude.norm(), 0.0);
    }

    #[test]
    fn large_delay_gives_slowed_fraction_of_frozen_field() {
        let p = canonical(100.0, 19.0);
        let theta = 20.0;
        let s = revival_envelope(p.schedule.t_pi2 + theta, &p).unwrap();
        let resp = p.response().unwrap();
        let frozen = resp.frozen_field(p.medium.length - resp.velocity() * theta, p.schedule.t_pi1);
        assert_relative_eq!(s.amplitude.re, frozen * (1.0 - p.medium.v_over_c()), max_relative = 1e-12);
        assert_relative_eq!(s.early_time_ratio, theta / (19.0 * 19.0), max_relative = 1e-12);
    }

    #[test]
    fn finite_band_lowers_the_plateau() {
        let p = canonical(100.0, 19.0);
        let s = StorageSchedule::new(p.schedule.t_pi1, p.schedule.t_pi2, Some(2.0)).unwrap();
        let narrow = StorageProblem { schedule: s, ..p.clone() };
        let t = p.schedule.t_pi2 + 15.0;
        let full = revival_envelope(t, &p).unwrap().amplitude.norm();
        let band = revival_envelope(t, &narrow).unwrap().amplitude.norm();
        assert!(band < full);
        assert!(band > 0.5 * full);
    }
}
