//! Parameter sweeps on a dedicated worker pool with results kept in input order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::medium::MediumParams;
use crate::storage::{retrieve, Method, StorageProblem};

/// Map `f` over `items` on a pool of `workers` threads (0 picks the rayon
/// default). The output order matches the input order.
pub fn run_ordered<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

/// One row of an efficiency sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencyPoint {
    pub alpha0_l: f64,
    pub delta0_t: f64,
    /// `None` when the point failed; the reason is in `error`.
    pub eta: Option<f64>,
    pub error: Option<String>,
}

/// Efficiency of the standard protocol at each opacity. Failures are
/// recorded per point and do not stop the sweep.
pub fn efficiency_sweep(
    opacities: &[f64],
    b: f64,
    template: &MediumParams,
    delta1: Option<f64>,
    method: Method,
    workers: usize,
) -> Result<Vec<EfficiencyPoint>> {
    run_ordered(opacities, workers, |&alpha0_l| {
        let outcome = (|| -> Result<(f64, f64)> {
            let m = template.with_length(alpha0_l / template.alpha0);
            m.validate()?;
            let p = StorageProblem::protocol(m, b, 10.0 / m.delta0, delta1)?;
            Ok((p.pulse.duration * m.delta0, retrieve(&p, method)?.efficiency))
        })();
        match outcome {
            Ok((delta0_t, eta)) => EfficiencyPoint {
                alpha0_l,
                delta0_t,
                eta: Some(eta),
                error: None,
            },
            Err(e) => EfficiencyPoint {
                alpha0_l,
                delta0_t: b * alpha0_l.powf(0.75),
                eta: None,
                error: Some(e.to_string()),
            },
        }
    })
}
