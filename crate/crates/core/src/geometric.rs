//! Closed phase-space loops, their phases, and planning device parameters
//! from target phases.

use std::f64::consts::PI;

use thiserror::Error;

use crate::hilbert::C64;
use crate::model::{
    validate_conditions, ConditionReport, DeviceParams, DeviceSettings, STRONG_DRIVING_MARGIN,
};

#[derive(Debug, Error, PartialEq)]
pub enum GeometricError {
    #[error("detuning must be nonzero and finite, got {0}")]
    ResonantDetuning(f64),
    #[error("target phase {0} outside (0, 2π)")]
    InvalidPhase(f64),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("need at least 3 path samples, got {0}")]
    TooFewSamples(usize),
}

/// Sign of `σ̃z_j + σ̃z_A` on a coupled sector: `++` has ε = +1, `--` has ε = -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    PlusPlus,
    MinusMinus,
}

impl Branch {
    pub fn epsilon(self) -> f64 {
        match self {
            Branch::PlusPlus => 1.0,
            Branch::MinusMinus => -1.0,
        }
    }
}

fn check_delta(delta: f64) -> Result<(), GeometricError> {
    if delta == 0.0 || !delta.is_finite() {
        Err(GeometricError::ResonantDetuning(delta))
    } else {
        Ok(())
    }
}

/// Coherent amplitude `(gε/δ)(e^{-iδt} - 1)` of the cavity on a coupled
/// sector.
pub fn alpha_trajectory(t: f64, g: f64, delta: f64, branch: Branch) -> Result<C64, GeometricError> {
    check_delta(delta)?;
    let e = C64::from_polar(1.0, -delta * t) - 1.0;
    Ok(e * (g * branch.epsilon() / delta))
}

/// `2mπ/|δ|`.
pub fn cycle_time(m: u32, delta: f64) -> Result<f64, GeometricError> {
    check_delta(delta)?;
    Ok(2.0 * m as f64 * PI / delta.abs())
}

/// Phase `-(g²/δ) T` after `m` loops. Positive for red detuning.
pub fn total_phase(g: f64, delta: f64, m: u32) -> Result<f64, GeometricError> {
    let t = cycle_time(m, delta)?;
    Ok(-g * g / delta * t)
}

/// `Im ∮ α* dα` by trapezoidal accumulation over a sampled path.
pub fn enclosed_phase_numeric(path: &[C64]) -> Result<f64, GeometricError> {
    if path.len() < 3 {
        return Err(GeometricError::TooFewSamples(path.len()));
    }
    // Im[(a* + b*)(b - a)/2] = Im(a* b)
    Ok(path.windows(2).map(|w| (w[0].conj() * w[1]).im).sum())
}

/// Samples `alpha_trajectory` at `n` evenly spaced times in `[0, t_end]`.
pub fn sample_trajectory(
    g: f64,
    delta: f64,
    branch: Branch,
    t_end: f64,
    n: usize,
) -> Result<Vec<C64>, GeometricError> {
    if n < 2 {
        return Err(GeometricError::TooFewSamples(n));
    }
    (0..n)
        .map(|i| alpha_trajectory(t_end * i as f64 / (n - 1) as f64, g, delta, branch))
        .collect()
}

/// Device parameters that realize a set of target phases in one common
/// cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePlan {
    pub theta: Vec<f64>,
    pub m: Vec<u32>,
    pub delta: Vec<f64>,
    pub g: Vec<f64>,
    /// Common cycle time, s.
    pub t_gate: f64,
    pub rabi: f64,
    pub k: u32,
    pub report: ConditionReport,
    pub warnings: Vec<String>,
}

impl PhasePlan {
    pub fn n_targets(&self) -> usize {
        self.theta.len()
    }

    pub fn device_params(&self, settings: &DeviceSettings) -> DeviceParams {
        settings.device_params(&self.delta, &self.g, self.rabi, &self.m, self.k)
    }

    /// `2Ω / max(g, |δ|)`.
    pub fn strong_driving_margin(&self) -> f64 {
        self.report
            .get("strong_driving")
            .map_or(f64::NAN, |c| c.value)
    }
}

/// Solves couplings, cycle time and drive for the requested phases, with
/// `δ_j = (m_j/m_1) δ_1`.
pub fn solve_plan(
    theta: &[f64],
    m: &[u32],
    delta_1: f64,
    k: u32,
) -> Result<PhasePlan, GeometricError> {
    if theta.is_empty() {
        return Err(GeometricError::InvalidPlan("no target phases".into()));
    }
    if theta.len() != m.len() {
        return Err(GeometricError::InvalidPlan(format!(
            "{} phases but {} loop counts",
            theta.len(),
            m.len()
        )));
    }
    if let Some(&bad) = theta.iter().find(|&&t| !(t > 0.0 && t < 2.0 * PI)) {
        return Err(GeometricError::InvalidPhase(bad));
    }
    if m.contains(&0) {
        return Err(GeometricError::InvalidPlan(
            "loop counts must be at least 1".into(),
        ));
    }
    if k == 0 {
        return Err(GeometricError::InvalidPlan("k must be at least 1".into()));
    }
    if !(delta_1 < 0.0) || !delta_1.is_finite() {
        return Err(GeometricError::InvalidPlan(format!(
            "δ1 must be negative, got {delta_1}"
        )));
    }
    let m1 = m[0] as f64;
    let delta: Vec<f64> = m.iter().map(|&mj| mj as f64 / m1 * delta_1).collect();
    let g: Vec<f64> = theta
        .iter()
        .zip(m)
        .zip(&delta)
        .map(|((th, &mj), d)| d.abs() * (th / (2.0 * mj as f64 * PI)).sqrt())
        .collect();
    let t_gate = cycle_time(m[0], delta_1)?;
    let rabi = k as f64 * PI / t_gate;
    let mut plan = PhasePlan {
        theta: theta.to_vec(),
        m: m.to_vec(),
        delta,
        g,
        t_gate,
        rabi,
        k,
        report: ConditionReport::default(),
        warnings: Vec::new(),
    };
    plan.report = validate_conditions(&plan.device_params(&DeviceSettings::default()));
    let margin = plan.strong_driving_margin();
    if margin < STRONG_DRIVING_MARGIN {
        let msg = format!(
            "strong-driving margin 2Ω/max(g, |δ|) = {margin:.3} is below {STRONG_DRIVING_MARGIN}"
        );
        log::warn!("{msg}");
        plan.warnings.push(msg);
    }
    Ok(plan)
}
