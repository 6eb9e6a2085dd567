//! Restored field with the frozen field evaluated along the echo path, with
//! optional higher-order corrections from the slab dispersion expanded in
//! derivatives with respect to depth.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kappa::breakpoints;
use super::{SlabResponse, StorageProblem};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::special::SQRT_PI;

/// Highest expansion order (the jets carry twelve depth derivatives).
pub const MAX_SERIES_ORDER: usize = 6;

const KERNEL_CUTOFF: f64 = 12.65;

/// Zeroth-order field: the frozen field read at depth `L - v theta`.
pub fn simple_field(t: f64, problem: &StorageProblem) -> Result<Complex64> {
    check(problem)?;
    let resp = problem.response()?;
    let t_pi1 = problem.schedule.t_pi1;
    lag_integral(problem.theta(t), problem, &resp, |tau, theta| {
        resp.frozen_field(resp.length - resp.velocity() * theta, t_pi1 - tau)
    })
}

/// Field including corrections up to `order`:
/// `sum_n (beta v / delta0)^n / n! d^{2n}/dz^{2n} [A_in(z) (L - z)^n]`.
pub fn appendix_series_field(t: f64, problem: &StorageProblem, order: usize) -> Result<Complex64> {
    check(problem)?;
    if order > MAX_SERIES_ORDER {
        return Err(Error::Config(format!(
            "series order {order} exceeds the supported maximum {MAX_SERIES_ORDER}"
        )));
    }
    let resp = problem.response()?;
    series_at(problem.theta(t), problem, &resp, order)
}

fn check(problem: &StorageProblem) -> Result<()> {
    problem.require_gaussian("the depth-derivative expansion")?;
    problem.require_full_band("the depth-derivative expansion")
}

pub(crate) fn series_at(theta: f64, problem: &StorageProblem, resp: &SlabResponse, order: usize) -> Result<Complex64> {
    let m = &problem.medium;
    let step = 0.5 * SQRT_PI * (1.0 - m.v_over_c()) * resp.velocity() / m.delta0;
    let weights: Vec<f64> = (0..=order)
        .map(|n| step.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>())
        .collect();
    let t_pi1 = problem.schedule.t_pi1;
    lag_integral(theta, problem, resp, |tau, th| {
        let z0 = resp.length - resp.velocity() * th;
        let z = Jet::variable(z0);
        let a = frozen_jet(resp, z, t_pi1 - tau);
        let lever = Jet::constant(resp.length) - z;
        let mut sum = 0.0;
        for (n, w) in weights.iter().enumerate() {
            sum += w * (a * lever.powi(n as u32)).derivative(2 * n);
        }
        sum
    })
}

fn frozen_jet(resp: &SlabResponse, z: Jet, t: f64) -> Jet {
    let t2 = resp.duration * resp.duration;
    let var = z.scale(resp.spread).offset(t2);
    let s = z.scale(-resp.inv_v).offset(t - resp.center);
    let expo = (s * s / var).scale(-0.5) - z.scale(0.5 * resp.loss);
    var.powf(-0.5).scale(resp.peak * resp.duration) * expo.exp()
}

/// `(alpha0 v sqrt(pi) delta0 / 2 pi) int d tau int d tau' e^{-delta0^2 s^2 / 4 - gamma s} F(tau, theta - tau')`
/// with `s = tau + tau'` and the path `v (theta - tau')` confined to the slab.
fn lag_integral<F>(theta: f64, problem: &StorageProblem, resp: &SlabResponse, f: F) -> Result<Complex64>
where
    F: Fn(f64, f64) -> f64,
{
    if theta <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let m = &problem.medium;
    let cut = KERNEL_CUTOFF / m.delta0;
    let lo = (theta - resp.delay()).max(0.0);
    if lo >= theta.min(cut) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let outer = problem.quadrature(1.0);
    let inner = problem.quadrature(1e-1);
    let width = 1.0 / m.delta0;
    let kernel = |s: f64| {
        let x = m.delta0 * s;
        (-0.25 * x * x - m.gamma_ab * s).exp()
    };
    let total = outer.try_integrate_points(
        |tau: f64| -> Result<f64> {
            let top = theta.min(cut - tau);
            if top <= lo {
                return Ok(0.0);
            }
            Ok(inner
                .integrate_points(
                    |tp: f64| kernel(tau + tp) * f(tau, theta - tp),
                    &breakpoints(lo, top, &[width, 3.0 * width]),
                )?
                .value)
        },
        &breakpoints(0.0, cut, &[width, 3.0 * width, cut - theta, cut - lo]),
    )?;
    let c = m.alpha0 * resp.velocity() * SQRT_PI * m.delta0 / (2.0 * PI);
    Ok(Complex64::new(c * total.value, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::MediumParams;
    use crate::propagation::PulseSpec;
    use crate::storage::revival::revival_envelope;
    use crate::storage::tests::canonical;
    use crate::storage::StorageSchedule;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zeroth_order_is_simple_field() {
        let p = canonical(50.0, 10.0);
        for theta in [0.3, 2.0, 9.0, 20.0] {
            let t = p.schedule.t_pi2 + theta;
            let a = simple_field(t, &p).unwrap().re;
            let b = appendix_series_field(t, &p, 0).unwrap().re;
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-3), "theta = {theta}: {a} vs {b}");
        }
    }

    #[test]
    fn simple_field_near_revival_form_at_long_pulses() {
        // at the restored peak the mean lag only enters at second order
        let p = canonical(100.0, 40.0);
        let t = p.schedule.t_pi2 + 0.5 * p.medium.group_delay();
        let a = simple_field(t, &p).unwrap().re;
        let b = revival_envelope(t, &p).unwrap().amplitude.re;
        assert_relative_eq!(a, b, max_relative = 5e-3);
    }

    #[test]
    fn order_is_capped() {
        let p = canonical(25.0, 6.0);
        assert!(matches!(
            appendix_series_field(p.schedule.t_pi2 + 1.0, &p, 7),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn jet_matches_frozen_field() {
        let p = canonical(60.0, 9.0);
        let r = p.response().unwrap();
        let z0 = 20.0;
        let j = frozen_jet(&r, Jet::variable(z0), 7.0);
        assert_relative_eq!(j.value(), r.frozen_field(z0, 7.0), max_relative = 1e-14);
        let h = 1e-3;
        let fd = (r.frozen_field(z0 + h, 7.0) - 2.0 * r.frozen_field(z0, 7.0) + r.frozen_field(z0 - h, 7.0)) / (h * h);
        assert_relative_eq!(j.derivative(2), fd, max_relative = 1e-5);
    }

    #[test]
    fn corrections_shrink_with_longer_pulses() {
        // the first correction scales like (delta0 T)^-2 relative to the field
        let rel = |dt: f64| {
            let m = MediumParams::reduced(100.0, 0.0, 0.0).unwrap();
            let pulse = PulseSpec::gaussian(dt).unwrap();
            let s = StorageSchedule::half_delay(&m, &pulse, 10.0, None).unwrap();
            let p = StorageProblem::new(m, pulse, s).unwrap();
            let t = p.schedule.t_pi2 + 3.0;
            let a0 = appendix_series_field(t, &p, 0).unwrap().re;
            let a1 = appendix_series_field(t, &p, 1).unwrap().re;
            ((a1 - a0) / a0).abs()
        };
        let r20 = rel(20.0);
        let r40 = rel(40.0);
        assert!(r40 < r20 / 2.5, "{r20} -> {r40}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn silent_before_retrieval(back in 0.0f64..50.0) {
            let p = canonical(25.0, 6.0);
            let t = p.schedule.t_pi2 - back;
            prop_assert_eq!(simple_field(t, &p).unwrap().norm(), 0.0);
            prop_assert_eq!(appendix_series_field(t, &p, 2).unwrap().norm(), 0.0);
        }
    }
}
