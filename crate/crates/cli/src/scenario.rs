//! Scenario files: reduced-unit description of one run or sweep.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use holeburn::io::read_hole_profile;
use holeburn::storage::MAX_SERIES_ORDER;
use holeburn::{AccuracyBudget, HoleProfile, MediumParams, Method, PulseSpec, StorageProblem, StorageSchedule};
use serde::{Deserialize, Serialize};

/// When the storage pulse fires, in units of the group delay or absolute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageRule {
    /// `t_pi1 = L / (2v)` after the input peak.
    HalfDelay,
    /// `t_pi1 = f L / v` after the input peak.
    DelayFraction(f64),
    /// `t_pi1` in units of `1/delta0`, input peak at 0.
    Absolute(f64),
}

fn default_rule() -> StorageRule {
    StorageRule::HalfDelay
}

fn default_storage_time() -> f64 {
    10.0
}

fn default_method() -> Method {
    Method::FullQuadrature
}

fn default_sweep() -> Vec<f64> {
    vec![3.0, 4.0, 5.0, 6.0, 8.0, 10.0]
}

/// Reduced units throughout: times in `1/delta0`, lengths as optical depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "alpha0_L")]
    pub alpha0_l: f64,
    /// Pulse duration `delta0 T`; exclusive with `b`.
    #[serde(rename = "delta0_T", default, skip_serializing_if = "Option::is_none")]
    pub delta0_t: Option<f64>,
    /// Protocol constant in `delta0 T = b (alpha0 L)^(3/4)`; exclusive with `delta0_T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default)]
    pub gamma_over_delta0: f64,
    #[serde(default)]
    pub v_over_c: f64,
    /// Conversion half-bandwidth; absent for unbounded conversion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1_over_delta0: Option<f64>,
    #[serde(default = "default_rule")]
    pub tpi1_rule: StorageRule,
    /// `delta0 (t_pi2 - t_pi1)`.
    #[serde(default = "default_storage_time")]
    pub storage_time: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    /// Tabulated hole profile; relative paths resolve against the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_file: Option<PathBuf>,
    /// Output step in units of `1/delta0` for restored pulses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_step: Option<f64>,
    /// `sqrt(alpha0 L)` values of an efficiency sweep.
    #[serde(rename = "sweep_sqrt_alpha0_L", default = "default_sweep")]
    pub sweep_sqrt_alpha0_l: Vec<f64>,
}

impl Scenario {
    pub fn new(alpha0_l: f64) -> Self {
        Self {
            alpha0_l,
            delta0_t: None,
            b: None,
            gamma_over_delta0: 0.0,
            v_over_c: 0.0,
            delta1_over_delta0: None,
            tpi1_rule: default_rule(),
            storage_time: default_storage_time(),
            method: default_method(),
            profile_file: None,
            output_step: None,
            sweep_sqrt_alpha0_l: default_sweep(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, Vec<String>> {
        let text = std::fs::read_to_string(path).map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
        let mut s: Scenario =
            serde_json::from_str(&text).map_err(|e| vec![format!("{}: {e}", path.display())])?;
        if let Some(p) = &s.profile_file {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    s.profile_file = Some(dir.join(p));
                }
            }
        }
        Ok(s)
    }

    /// Every violated precondition, or the resolved inputs.
    pub fn validate(&self) -> Result<Resolved, Vec<String>> {
        let mut bad = Vec::new();
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.alpha0_l) {
            bad.push(format!("alpha0_L = {} must be positive", self.alpha0_l));
        }
        match (self.delta0_t, self.b) {
            (Some(_), Some(_)) => bad.push("give either delta0_T or b, not both".into()),
            (None, None) => bad.push("one of delta0_T or b is required".into()),
            (Some(t), None) if !positive(t) => bad.push(format!("delta0_T = {t} must be positive")),
            (None, Some(b)) if !positive(b) => bad.push(format!("b = {b} must be positive")),
            _ => {}
        }
        if !(self.gamma_over_delta0.is_finite() && self.gamma_over_delta0 >= 0.0) {
            bad.push(format!("gamma_over_delta0 = {} must be non-negative", self.gamma_over_delta0));
        }
        if !(0.0..1.0).contains(&self.v_over_c) {
            bad.push(format!("v_over_c = {} must lie in [0, 1)", self.v_over_c));
        }
        if let Some(d1) = self.delta1_over_delta0 {
            if !(d1.is_finite() && d1 > 1.0) {
                bad.push(format!("delta1_over_delta0 = {d1} must exceed 1"));
            }
            if matches!(self.method, Method::FullQuadrature | Method::Series(_)) {
                bad.push(format!(
                    "method {} needs unbounded conversion; use revival or established with delta1_over_delta0",
                    self.method.label()
                ));
            }
        }
        match self.tpi1_rule {
            StorageRule::DelayFraction(f) if !(f.is_finite() && (0.0..=1.0).contains(&f)) => {
                bad.push(format!("delay_fraction = {f} must lie in [0, 1]"))
            }
            StorageRule::Absolute(t) if !t.is_finite() => bad.push("absolute t_pi1 must be finite".into()),
            _ => {}
        }
        if !positive(self.storage_time) {
            bad.push(format!("storage_time = {} must be positive", self.storage_time));
        }
        if let Method::Series(n) = self.method {
            if n > MAX_SERIES_ORDER {
                bad.push(format!("series order {n} exceeds {MAX_SERIES_ORDER}"));
            }
        }
        if let Some(h) = self.output_step {
            if !positive(h) {
                bad.push(format!("output_step = {h} must be positive"));
            }
        }
        if self.sweep_sqrt_alpha0_l.is_empty() {
            bad.push("sweep_sqrt_alpha0_L must not be empty".into());
        }
        if let Some(v) = self.sweep_sqrt_alpha0_l.iter().find(|v| !positive(**v)) {
            bad.push(format!("sweep value {v} must be positive"));
        }
        let profile = match &self.profile_file {
            None => Some(HoleProfile::Gaussian),
            Some(path) => match File::open(path) {
                Err(e) => {
                    bad.push(format!("cannot open profile {}: {e}", path.display()));
                    None
                }
                Ok(f) => match read_hole_profile(BufReader::new(f)) {
                    Ok(t) => Some(HoleProfile::Tabulated(t)),
                    Err(e) => {
                        bad.push(format!("profile {}: {e}", path.display()));
                        None
                    }
                },
            },
        };
        if let (Some(HoleProfile::Tabulated(_)), Method::Series(_)) = (&profile, self.method) {
            bad.push("the series method needs the Gaussian hole".into());
        }
        if !bad.is_empty() {
            return Err(bad);
        }
        let profile = profile.expect("profile resolved when no error was recorded");
        let resolved = self.resolve(self.alpha0_l, profile.clone()).map_err(|e| vec![e.to_string()])?;
        // sweep points must be buildable too
        for r in &self.sweep_sqrt_alpha0_l {
            if let Err(e) = self.resolve(r * r, profile.clone()) {
                bad.push(format!("sweep point sqrt(alpha0_L) = {r}: {e}"));
            }
        }
        if bad.is_empty() {
            Ok(resolved)
        } else {
            Err(bad)
        }
    }

    /// Build the problem at opacity `alpha0_l` (the sweep varies it).
    pub fn resolve(&self, alpha0_l: f64, profile: HoleProfile) -> holeburn::Result<Resolved> {
        let medium = MediumParams::reduced(alpha0_l, self.gamma_over_delta0, self.v_over_c)?;
        let duration = match (self.delta0_t, self.b) {
            (Some(t), _) => t,
            (None, Some(b)) => holeburn::storage::protocol_duration(&medium, b),
            (None, None) => return Err(holeburn::Error::Config("pulse duration not given".into())),
        };
        let pulse = PulseSpec::gaussian(duration)?;
        let t_pi1 = match self.tpi1_rule {
            StorageRule::HalfDelay => 0.5 * medium.group_delay(),
            StorageRule::DelayFraction(f) => f * medium.group_delay(),
            StorageRule::Absolute(t) => t,
        };
        let schedule = StorageSchedule::new(t_pi1, t_pi1 + self.storage_time, self.delta1_over_delta0)?;
        let problem = StorageProblem::new(medium, pulse, schedule)?.with_profile(profile);
        Ok(Resolved {
            problem,
            method: self.method,
            output_step: self.output_step,
        })
    }
}

/// A validated scenario turned into library inputs.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub problem: StorageProblem,
    pub method: Method,
    pub output_step: Option<f64>,
}

/// Quadrature budget from `--tol`: relative `tol`, absolute `tol / 100` capped at 1e-8.
pub fn budget_from_tol(tol: f64) -> holeburn::Result<AccuracyBudget> {
    AccuracyBudget::new((tol / 100.0).min(1e-8), tol)
}
