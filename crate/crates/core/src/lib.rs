//! Slow light, storage and retrieval of optical pulses in an inhomogeneously
//! broadened absorber with a spectral hole.

pub mod error;
pub mod io;
pub mod jet;
pub mod medium;
pub mod oracle;
pub mod propagation;
pub mod quad;
pub mod special;
pub mod spline;
pub mod storage;
pub mod sweep;

pub use error::{Error, Result};
pub use medium::{ChiModel, HoleProfile, MediumParams, TabulatedHole};
pub use propagation::{PulseSpec, SampledEnvelope};
pub use special::AccuracyBudget;
pub use storage::{Method, RetrievalResult, StorageProblem, StorageSchedule};
