//! Restored field by direct quadrature over the two storage lags: the time
//! `tau` before the storage pulse at which the coherence was written and the
//! time `tau'` after the retrieval pulse at which it radiates.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kappa::breakpoints;
use super::kernel::DetuningKernel;
use super::{SlabResponse, StorageProblem};
use crate::error::Result;

pub fn restored_field_full(t: f64, problem: &StorageProblem) -> Result<Complex64> {
    problem.require_full_band("the full quadrature")?;
    let kernel = DetuningKernel::new(problem)?;
    let resp = problem.response()?;
    full_at(problem.theta(t), problem, &resp, &kernel)
}

pub(crate) fn full_at(
    theta: f64,
    problem: &StorageProblem,
    resp: &SlabResponse,
    kernel: &DetuningKernel,
) -> Result<Complex64> {
    if theta <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let m = &problem.medium;
    let cut = kernel.cutoff();
    let t_pi1 = problem.schedule.t_pi1;
    let outer = problem.quadrature(1.0);
    let middle = problem.quadrature(1e-1);
    let inner = problem.quadrature(1e-2);
    let width = 1.0 / m.delta0;
    let total = outer.try_integrate_points(
        |tau: f64| -> Result<Complex64> {
            // radiation emitted before the retrieval pulse is excluded
            let top = theta.min(cut - tau);
            if top <= 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let est = middle.try_integrate_points(
                |tp: f64| -> Result<Complex64> {
                    let r = resp.radiated(t_pi1 - tau, theta - tp, &inner)?;
                    Ok(kernel.value(tau + tp) * r)
                },
                &breakpoints(0.0, top, &[width, 3.0 * width]),
            )?;
            Ok(est.value)
        },
        &breakpoints(0.0, cut, &[width, 3.0 * width, cut - theta]),
    )?;
    Ok(-m.alpha0 / (2.0 * PI) * total.value)
}
