//! Late-time restored field. Once the kernel has decayed the time integrals
//! collapse onto its first moment, leaving a propagated copy of the field
//! frozen at the storage instant.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{SlabResponse, StorageProblem};
use crate::error::{Error, Result};
use crate::medium::HoleProfile;

/// `delta0 theta` above which the late-time form is considered established.
pub const ESTABLISHED_THRESHOLD: f64 = 5.0;

/// Long-delay ratio of restored to frozen field,
/// `(alpha0 v / 2 pi) int g / (delta + i gamma)^2` over the converted band.
pub fn plateau_coefficient(problem: &StorageProblem) -> Result<Complex64> {
    let resp = problem.response()?;
    plateau_with(problem, &resp)
}

pub(crate) fn plateau_with(problem: &StorageProblem, resp: &SlabResponse) -> Result<Complex64> {
    let m = &problem.medium;
    let gamma = m.gamma_ab;
    let scale = m.alpha0 * resp.velocity() / (2.0 * PI);
    if let (HoleProfile::Gaussian, 0.0, None) = (&problem.profile, gamma, problem.schedule.delta1) {
        // int (1 - e^{-d^2}) / d^2 = 2 sqrt(pi) delta0^{-1}
        return Ok(Complex64::new(scale * 2.0 * crate::special::SQRT_PI / m.delta0, 0.0));
    }
    let profile = &problem.profile;
    if gamma == 0.0 {
        let g0 = profile.g(0.0, m);
        if g0.abs() > 1e-12 {
            return Err(Error::Singular(format!(
                "gamma_ab = 0 and g(0) = {g0:.3e}: the plateau integral diverges at zero detuning"
            )));
        }
    }
    let reach = profile.reach(m);
    let natural = (50.0 * m.delta0.max(gamma)).max(2.0 * reach);
    let (upper, tail) = match problem.schedule.delta1 {
        Some(d1) if d1 <= natural => (d1, 0.0),
        // g = 1 beyond `natural`: int_W^B [1/(d + i g)^2 + 1/(d - i g)^2]
        Some(d1) => (natural, tail_moment(natural, gamma) - tail_moment(d1, gamma)),
        None => (natural, tail_moment(natural, gamma)),
    };
    let mut pts = vec![0.0, upper, m.delta0.min(upper), reach.min(upper)];
    let mut p = gamma;
    while gamma > 0.0 && p < m.delta0.min(upper) {
        pts.push(p);
        p *= 10.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let q = problem.quadrature(1e-2);
    let body = q
        .integrate_points(
            |d: f64| {
                let a = Complex64::new(d, gamma);
                let b = Complex64::new(-d, gamma);
                profile.g(d, m) / (a * a) + profile.g(-d, m) / (b * b)
            },
            &pts,
        )?
        .value;
    Ok(scale * (body + tail))
}

fn tail_moment(w: f64, gamma: f64) -> f64 {
    2.0 * w / (w * w + gamma * gamma)
}

/// Restored field in the established regime at absolute time `t`.
pub fn established_signal(t: f64, problem: &StorageProblem) -> Result<Complex64> {
    let resp = problem.response()?;
    let plateau = plateau_with(problem, &resp)?;
    established_at(problem.theta(t), problem, &resp, plateau)
}

pub(crate) fn established_at(
    theta: f64,
    problem: &StorageProblem,
    resp: &SlabResponse,
    plateau: Complex64,
) -> Result<Complex64> {
    if theta <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let r = resp.radiated(problem.schedule.t_pi1, theta, &problem.quadrature(1e-1))?;
    Ok(plateau * r * resp.inv_v)
}
