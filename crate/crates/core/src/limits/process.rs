//! Exact path samplers for X1..X4 on a finite window.
//!
//! The value at t_lo is drawn from its closed-form marginal. Atoms up to t_lo
//! and atoms after t_lo are restrictions of one Poisson measure to disjoint
//! sets, hence independent, so the path after t_lo is this value maxed with
//! fresh atoms from (t_lo, t_hi]. Those atoms are restricted to marks above
//! a level chosen so that, at any fixed time, the probability that a
//! dropped atom would have been the maximum is at most ε.

use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use super::marginal::{LimitProcess, MarginalLaw};
use super::measure::{sample_prm, MeasureTag, PointMeasure, Relevance, Truncation, Window};
use super::path::{build_extremal_path, ExtremalPath, Floor};
#[cfg(test)]
use super::path::build_from_atoms;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub window: Window,
    /// Pointwise truncation bias budget, in (0, 1).
    pub eps: f64,
    /// Atoms whose value cannot exceed this level are not generated. The
    /// path is then exact wherever it is above the level, which is all that
    /// first-passage times of higher levels need.
    pub level_floor: Option<f64>,
    /// Skip atoms that cannot beat the initial level (exact; the atom list
    /// is then incomplete, the path is not).
    pub prune: bool,
    /// X4 only: start from the floor at t_lo − L, with L from the expected
    /// count of atoms above the floor before it, instead of the exact
    /// initial value. A cross-check on the initial-value construction.
    pub bypass_initial: bool,
}

impl LimitConfig {
    pub fn new(window: Window, eps: f64) -> Self {
        Self { window, eps, level_floor: None, prune: false, bypass_initial: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub process: LimitProcess,
    pub path: ExtremalPath,
    pub points: PointMeasure,
}

pub fn measure_for(process: LimitProcess) -> MeasureTag {
    match process {
        LimitProcess::X1 { alpha } => MeasureTag::P1 { alpha },
        LimitProcess::X2 { alpha, .. } => MeasureTag::P2 { alpha },
        LimitProcess::X3 { mu } => MeasureTag::P3 { mu },
        LimitProcess::X4 { a_coef, .. } => MeasureTag::P2Restricted { a_coef },
    }
}

/// Mark level below which atoms after `t_lo` are dropped.
pub fn mark_truncation(process: LimitProcess, t_lo: f64, eps: f64) -> f64 {
    let l = (1.0 / eps).ln();
    match process {
        LimitProcess::X1 { alpha } => (t_lo * t_lo / (2.0 * l)).powf(1.0 / alpha),
        LimitProcess::X2 { alpha, mu } => (1.0 / (mu * (alpha - 1.0) * l)).powf(1.0 / (alpha - 1.0)),
        LimitProcess::X3 { mu } => mu * t_lo - (mu * l).ln(),
        LimitProcess::X4 { a_coef, .. } => (2.0 / a_coef).sqrt(),
    }
}

/// Length L of the X4 pre-window with (2μ)^{-1}(μL + (2/A)^{1/2})^{-2} ≤ ε.
pub fn x4_past_horizon(a_coef: f64, mu: f64, eps: f64) -> f64 {
    let c = (2.0 / a_coef).sqrt();
    (((1.0 / (2.0 * mu * eps)).sqrt() - c) / mu).max(0.0)
}

pub fn sample_limit_path<R: Rng + ?Sized>(process: LimitProcess, cfg: &LimitConfig, rng: &mut R) -> Result<LimitSample> {
    process.validate()?;
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(Error::Budget(cfg.eps));
    }
    let window = Window::new(cfg.window.t_lo, cfg.window.t_hi)?;
    if matches!(process, LimitProcess::X1 { .. }) && window.t_lo <= 0.0 {
        return Err(Error::Window(format!("X1 paths need t_lo > 0, got {}", window.t_lo)));
    }
    let drift = process.drift();
    let floor = process.floor_offset().map(|c| Floor { slope: drift, intercept: c });

    let (sim_window, initial) = if cfg.bypass_initial {
        let LimitProcess::X4 { a_coef, mu } = process else {
            return Err(Error::Unsupported("bypassing the initial value is only implemented for X4".into()));
        };
        let start = window.t_lo - x4_past_horizon(a_coef, mu, cfg.eps);
        (Window::new(start, window.t_hi)?, f64::NEG_INFINITY)
    } else {
        let u: f64 = rng.sample(Open01);
        (window, MarginalLaw::forward(process, window.t_lo)?.quantile(u)?)
    };

    let mark_min = mark_truncation(process, sim_window.t_lo, cfg.eps);
    let mut level = cfg.level_floor.unwrap_or(f64::NEG_INFINITY);
    if cfg.prune {
        level = level.max(initial);
    }
    let relevance = if level == f64::NEG_INFINITY {
        None
    } else if drift > 0.0 {
        Some(Relevance { level, slope: drift })
    } else {
        Some(Relevance { level, slope: 0.0 })
    };
    let truncation = Truncation { mark_min, relevance };
    let points = sample_prm(measure_for(process), sim_window, truncation, rng)?;
    let mut path = build_extremal_path(&points, drift, initial, floor);
    if cfg.bypass_initial {
        // report the path on the requested window only
        path = ExtremalPath {
            window,
            initial_level: path.value(window.t_lo),
            records: path.records.into_iter().filter(|r| r.0 > window.t_lo).collect(),
            floor,
        };
    }
    Ok(LimitSample { process, path, points })
}
