//! Detuning kernel `K(s) = int g(delta) e^{(i delta - gamma) s} d delta` with
//! its singular part at `s = 0` removed, leaving `-int (1 - g) e^{i delta s}`
//! times the homogeneous decay.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::StorageProblem;
use crate::error::Result;
use crate::medium::{HoleProfile, MediumParams};
use crate::quad::Quadrature;
use crate::special::SQRT_PI;
use crate::spline::CubicSpline;

/// Gaussian kernel is below `exp(-40)` of its peak beyond this many `1/delta0`.
const GAUSSIAN_CUTOFF: f64 = 12.65;
/// Tabulated kernels are tabulated on `[0, TABLE_CUTOFF / delta0]`.
const TABLE_CUTOFF: f64 = 60.0;
const TABLE_STEP: f64 = 0.05;

#[derive(Clone, Debug)]
pub enum DetuningKernel {
    Gaussian { delta0: f64, gamma: f64 },
    Tabulated { re: CubicSpline, im: CubicSpline, gamma: f64, cutoff: f64 },
}

impl DetuningKernel {
    pub fn new(problem: &StorageProblem) -> Result<Self> {
        let m = &problem.medium;
        match &problem.profile {
            HoleProfile::Gaussian => Ok(Self::Gaussian {
                delta0: m.delta0,
                gamma: m.gamma_ab,
            }),
            profile => Self::tabulate(profile, m),
        }
    }

    fn tabulate(profile: &HoleProfile, m: &MediumParams) -> Result<Self> {
        let reach = profile.reach(m);
        let cutoff = TABLE_CUTOFF / m.delta0;
        let n = (TABLE_CUTOFF / TABLE_STEP).round() as usize + 1;
        let q = Quadrature::new(1e-13, 1e-11).with_max_segments(4000);
        let mut s_grid = Vec::with_capacity(n);
        let mut re = Vec::with_capacity(n);
        let mut im = Vec::with_capacity(n);
        for k in 0..n {
            let s = cutoff * k as f64 / (n - 1) as f64;
            // one breakpoint per half oscillation keeps each panel smooth
            let panels = ((2.0 * reach * s / PI).ceil() as usize).clamp(4, 4000);
            let pts: Vec<f64> = (0..=panels)
                .map(|i| -reach + 2.0 * reach * i as f64 / panels as f64)
                .collect();
            let v: Complex64 = q
                .integrate_points(
                    |d: f64| -profile.deficit(d, m) * Complex64::new(0.0, d * s).exp(),
                    &pts,
                )?
                .value;
            s_grid.push(s);
            re.push(v.re);
            im.push(v.im);
        }
        Ok(Self::Tabulated {
            re: CubicSpline::natural(s_grid.clone(), re)?,
            im: CubicSpline::natural(s_grid, im)?,
            gamma: m.gamma_ab,
            cutoff,
        })
    }

    /// Kernel value at lag `s >= 0`, including the homogeneous decay.
    pub fn value(&self, s: f64) -> Complex64 {
        match self {
            Self::Gaussian { delta0, gamma } => {
                let x = delta0 * s;
                Complex64::new(-SQRT_PI * delta0 * (-0.25 * x * x - gamma * s).exp(), 0.0)
            }
            Self::Tabulated { re, im, gamma, cutoff } => {
                if s > *cutoff {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(re.value(s), im.value(s)) * (-gamma * s).exp()
            }
        }
    }

    /// Lag beyond which the kernel is treated as zero.
    pub fn cutoff(&self) -> f64 {
        match self {
            Self::Gaussian { delta0, .. } => GAUSSIAN_CUTOFF / delta0,
            Self::Tabulated { cutoff, .. } => *cutoff,
        }
    }
}
