//! Shared fixtures for the criterion benches.

use holeburn::{MediumParams, PulseSpec, SampledEnvelope, StorageProblem, StorageSchedule};

/// Reduced-unit medium with no homogeneous width and infinite c.
pub fn medium(alpha0_l: f64) -> MediumParams {
    MediumParams::reduced(alpha0_l, 0.0, 0.0).expect("valid reduced medium")
}

/// Standard protocol problem, `delta0 T = 0.6 (alpha0 L)^(3/4)`, stored at half delay.
pub fn protocol(alpha0_l: f64) -> StorageProblem {
    StorageProblem::protocol(medium(alpha0_l), 0.6, 10.0, None).expect("valid protocol")
}

/// Unit Gaussian of duration `t` stored at half delay in a slab of opacity `alpha0_l`.
pub fn stored(alpha0_l: f64, t: f64) -> StorageProblem {
    let m = medium(alpha0_l);
    let pulse = PulseSpec::gaussian(t).expect("positive duration");
    let s = StorageSchedule::half_delay(&m, &pulse, 10.0, None).expect("valid schedule");
    StorageProblem::new(m, pulse, s).expect("valid problem")
}

/// Input envelope on the default propagation grid.
pub fn envelope(alpha0_l: f64, t: f64) -> SampledEnvelope {
    PulseSpec::gaussian(t)
        .and_then(|p| p.envelope(&medium(alpha0_l)))
        .expect("grid fits")
}
