//! Subcommand bodies. Each writes its files atomically into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use holeburn::io::{write_columns, write_envelope, write_sidecar, ENVELOPE_HEADER, RESTORED_HEADER};
use holeburn::propagation::{propagate, stretched_duration};
use holeburn::storage::{kappa, kappa_band_limited, kappa_quadrature, retrieve, retrieve_with_step};
use holeburn::sweep::run_ordered;
use holeburn::{AccuracyBudget, ChiModel, Error, HoleProfile, Result, SampledEnvelope};
use num_complex::Complex64;
use serde::Serialize;

use crate::scenario::{Resolved, Scenario};

/// Options shared by every run.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub workers: usize,
    pub budget: Option<AccuracyBudget>,
}

/// Write through a temporary sibling and rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

fn apply_budget(mut r: Resolved, opts: &RunOptions) -> Resolved {
    if let Some(b) = opts.budget {
        r.problem = r.problem.with_budget(b);
    }
    r
}

#[derive(Serialize)]
struct TransmitSummary<'a> {
    scenario: &'a Scenario,
    exact_model: &'static str,
    delta0_t: f64,
    delta0_ts: f64,
    group_delay: f64,
    input_peak: f64,
    exact_peak: (f64, f64),
    second_order_peak: Option<(f64, f64)>,
    /// Closed-form quadratic-model peak `T / T_s`.
    closed_form_peak: f64,
    /// Largest `|exact - second order|` relative to the input peak.
    max_deviation: Option<f64>,
}

pub fn transmit(scenario: &Scenario, resolved: Resolved, out: &Path) -> Result<()> {
    let p = &resolved.problem;
    let m = &p.medium;
    let env = p.pulse.envelope(m)?;
    let exact_model = match &p.profile {
        HoleProfile::Gaussian if m.narrow_homogeneous() => ChiModel::ExactGaussian,
        profile => ChiModel::Quadrature(profile.clone()),
    };
    let exact = propagate(&env, m.length, &exact_model, m)?;
    let second = match p.profile {
        HoleProfile::Gaussian => Some(propagate(&env, m.length, &ChiModel::SecondOrder, m)?),
        HoleProfile::Tabulated(_) => None,
    };
    fs::create_dir_all(out)?;
    write_atomic(&out.join("input.csv"), &csv_bytes(|b| write_envelope(b, &env, ENVELOPE_HEADER))?)?;
    write_atomic(&out.join("exact.csv"), &csv_bytes(|b| write_envelope(b, &exact, ENVELOPE_HEADER))?)?;
    if let Some(s) = &second {
        write_atomic(&out.join("second_order.csv"), &csv_bytes(|b| write_envelope(b, s, ENVELOPE_HEADER))?)?;
    }
    let ts = stretched_duration(m.length, p.pulse.duration, m);
    let summary = TransmitSummary {
        scenario,
        exact_model: exact_model.name(),
        delta0_t: p.pulse.duration * m.delta0,
        delta0_ts: ts * m.delta0,
        group_delay: m.group_delay(),
        input_peak: p.pulse.peak,
        exact_peak: exact.peak(),
        second_order_peak: second.as_ref().map(|s| s.peak()),
        closed_form_peak: p.pulse.peak * p.pulse.duration / ts,
        max_deviation: second.as_ref().map(|s| {
            exact
                .samples
                .iter()
                .zip(&s.samples)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / p.pulse.peak
        }),
    };
    write_atomic(&out.join("transmit.json"), &json_bytes(&summary)?)
}

#[derive(Serialize)]
struct StoreParams<'a> {
    scenario: &'a Scenario,
    delta0_t: f64,
    delta0_ts: f64,
    group_delay: f64,
    t_pi1: f64,
    t_pi2: f64,
}

pub fn store(scenario: &Scenario, resolved: Resolved, opts: &RunOptions, out: &Path) -> Result<()> {
    let r = apply_budget(resolved, opts);
    let p = &r.problem;
    let m = &p.medium;
    let result = match r.output_step {
        Some(h) => retrieve_with_step(p, r.method, h / m.delta0)?,
        None => retrieve(p, r.method)?,
    };

    // the same pulse crossing the slab without storage, against t - t_pi1
    let env = p.pulse.envelope(m)?;
    let model = match &p.profile {
        HoleProfile::Gaussian if m.narrow_homogeneous() => ChiModel::ExactGaussian,
        profile => ChiModel::Quadrature(profile.clone()),
    };
    let original = propagate(&env, m.length, &model, m)?;
    let original = SampledEnvelope {
        t_start: original.t_start - p.schedule.t_pi1,
        ..original
    };

    let thetas: Vec<f64> = (0..=400).map(|i| 0.05 * i as f64 / m.delta0).collect();
    let revival: Vec<Complex64> = thetas
        .iter()
        .map(|&th| {
            let x = 0.5 * m.delta0 * th;
            match (p.schedule.delta1, &p.profile) {
                (Some(d1), _) => kappa_band_limited(x, d1, p),
                (None, HoleProfile::Tabulated(_)) => kappa_quadrature(x, p),
                (None, HoleProfile::Gaussian) => kappa(x, m).map(|k| Complex64::new(k, 0.0)),
            }
        })
        .collect::<Result<_>>()?;

    let params = StoreParams {
        scenario,
        delta0_t: p.pulse.duration * m.delta0,
        delta0_ts: stretched_duration(m.length, p.pulse.duration, m) * m.delta0,
        group_delay: m.group_delay(),
        t_pi1: p.schedule.t_pi1,
        t_pi2: p.schedule.t_pi2,
    };
    fs::create_dir_all(out)?;
    write_atomic(
        &out.join("restored.csv"),
        &csv_bytes(|b| write_envelope(b, &result.output_envelope, RESTORED_HEADER))?,
    )?;
    write_atomic(&out.join("restored.json"), &csv_bytes(|b| write_sidecar(b, &result, &params))?)?;
    write_atomic(
        &out.join("original.csv"),
        &csv_bytes(|b| write_envelope(b, &original, "# t_minus_tpi1, re, im"))?,
    )?;
    write_atomic(
        &out.join("revival_factor.csv"),
        &csv_bytes(|b| write_columns(b, RESTORED_HEADER, &thetas, &revival))?,
    )?;
    for w in &result.validity.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    sqrt_alpha0_l: f64,
    alpha0_l: f64,
    delta0_t: Option<f64>,
    eta: Option<f64>,
    error: Option<String>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    scenario: &'a Scenario,
    method: String,
    points: &'a [SweepRow],
}

/// Returns the number of failed points.
pub fn sweep_efficiency(scenario: &Scenario, profile: HoleProfile, opts: &RunOptions, out: &Path) -> Result<usize> {
    let rows = run_ordered(&scenario.sweep_sqrt_alpha0_l, opts.workers, |&root| {
        let alpha0_l = root * root;
        let outcome = scenario.resolve(alpha0_l, profile.clone()).and_then(|r| {
            let r = apply_budget(r, opts);
            let p = &r.problem;
            let res = match r.output_step {
                Some(h) => retrieve_with_step(p, r.method, h / p.medium.delta0)?,
                None => retrieve(p, r.method)?,
            };
            Ok((p.pulse.duration * p.medium.delta0, res))
        });
        match outcome {
            Ok((dt, res)) => SweepRow {
                sqrt_alpha0_l: root,
                alpha0_l,
                delta0_t: Some(dt),
                eta: Some(res.efficiency),
                error: None,
                warnings: res.validity.warnings,
            },
            Err(e) => SweepRow {
                sqrt_alpha0_l: root,
                alpha0_l,
                delta0_t: None,
                eta: None,
                error: Some(e.to_string()),
                warnings: Vec::new(),
            },
        }
    })?;
    let mut csv = String::from("# sqrt_alpha0_L, alpha0_L, delta0_T, eta\n");
    for r in &rows {
        let cell = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:e}"));
        csv += &format!(
            "{:e}, {:e}, {}, {}\n",
            r.sqrt_alpha0_l,
            r.alpha0_l,
            cell(r.delta0_t),
            cell(r.eta)
        );
    }
    fs::create_dir_all(out)?;
    write_atomic(&out.join("efficiency.csv"), csv.as_bytes())?;
    let report = SweepReport {
        scenario,
        method: scenario.method.label(),
        points: &rows,
    };
    write_atomic(&out.join("efficiency.json"), &json_bytes(&report)?)?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "point sqrt(alpha0_L) = {} failed: {}",
            r.sqrt_alpha0_l,
            r.error.as_deref().unwrap_or_default()
        );
    }
    Ok(rows.iter().filter(|r| r.error.is_some()).count())
}

/// What a preset runs.
pub enum PresetRun {
    Transmit(Scenario),
    Store(Scenario),
    Sweep(Scenario),
}

/// Figure presets as `(subdirectory, run)` pairs.
pub fn preset(name: &str) -> Option<Vec<(PathBuf, PresetRun)>> {
    use holeburn::Method;
    let fixed = |alpha0_l: f64, t: f64| Scenario {
        delta0_t: Some(t),
        ..Scenario::new(alpha0_l)
    };
    let protocol = |alpha0_l: f64| Scenario {
        b: Some(0.6),
        ..Scenario::new(alpha0_l)
    };
    Some(match name {
        "fig2" => [5.0, 10.0]
            .iter()
            .map(|&t| (PathBuf::from(format!("delta0_T_{t}")), PresetRun::Transmit(fixed(100.0, t))))
            .collect(),
        "fig4a" => vec![(
            PathBuf::new(),
            PresetRun::Store(Scenario {
                method: Method::Revival,
                ..fixed(100.0, 19.0)
            }),
        )],
        "fig4b" => vec![(
            PathBuf::new(),
            PresetRun::Store(Scenario {
                method: Method::Revival,
                delta1_over_delta0: Some(5.0),
                ..fixed(100.0, 19.0)
            }),
        )],
        "fig5" => [10.0, 25.0, 50.0, 100.0]
            .iter()
            .map(|&al| (PathBuf::from(format!("alpha0_L_{al}")), PresetRun::Store(protocol(al))))
            .collect(),
        "fig6" => vec![(
            PathBuf::new(),
            PresetRun::Sweep(Scenario {
                sweep_sqrt_alpha0_l: vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0],
                ..protocol(100.0)
            }),
        )],
        _ => return None,
    })
}

pub const PRESETS: [&str; 5] = ["fig2", "fig4a", "fig4b", "fig5", "fig6"];
