//! Configuration, single-point runs, parameter sweeps and the reports behind
//! each CLI subcommand.

mod config;
mod output;

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{
    effective_vs_full_check, fidelity, propagate_lindblad, propagate_pure, rotated_state,
    simulated_propagator, state_fidelity, Diagnostics, DynamicsError, TimeGrid,
};
use crate::gates::{
    default_phase_fix_index, excited_initial_state, ideal_gate_unitary, ideal_output_state,
    GateComparison, GateError, GateSpec,
};
use crate::geometric::{solve_plan, GeometricError, PhasePlan};
use crate::hilbert::{DensityMatrix, HilbertError, HilbertLayout, Levels, StateVector};
use crate::model::{
    mhz, ConditionReport, DeviceParams, EffectiveModel, FullModel, HamiltonianModel, ModelError,
    NoiseParams,
};

pub use config::{
    ConvergeSection, DeviceSection, ExperimentConfig, GateCheckSection, InitialKind,
    InitialSection, NoiseSection, NumericsSection, OutputSection, PlanSection, RwaSection,
    SweepSection,
};
pub use output::{read_rows, write_rows, SweepRow, CSV_HEADER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("threshold not met: {0}")]
    Threshold(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Numeric(_) => 2,
            Self::Threshold(_) => 3,
        }
    }
}

impl From<GeometricError> for ExperimentError {
    fn from(e: GeometricError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<DynamicsError> for ExperimentError {
    fn from(e: DynamicsError) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl From<ModelError> for ExperimentError {
    fn from(e: ModelError) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl From<GateError> for ExperimentError {
    fn from(e: GateError) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl From<HilbertError> for ExperimentError {
    fn from(e: HilbertError) -> Self {
        Self::Numeric(e.to_string())
    }
}

/// Plan for the configured phases at detuning `δ1/2π = delta1_mhz`.
pub fn plan_at(
    cfg: &ExperimentConfig,
    delta1_mhz: f64,
    k: u32,
) -> Result<PhasePlan, ExperimentError> {
    Ok(solve_plan(&cfg.theta(), &cfg.plan.m, mhz(delta1_mhz), k)?)
}

/// Initial register state in rotated coordinates.
pub fn initial_register(cfg: &ExperimentConfig) -> StateVector {
    let n = cfg.n_targets();
    match cfg.initial.kind {
        InitialKind::Excited => excited_initial_state(n),
        InitialKind::RotatedBasis => StateVector::basis(1 << (n + 1), cfg.initial.index),
    }
}

/// Whether a point is run as a pure state or under the master equation.
#[derive(Clone, Debug, PartialEq)]
pub enum Dissipation {
    None,
    Lindblad(NoiseParams),
}

/// One simulated point of a detuning sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSpec {
    pub delta1_mhz: f64,
    pub g12_ratio: f64,
    pub cutoff: usize,
    /// Step in seconds; `None` uses the default rule.
    pub step: Option<f64>,
    /// Runs at half of whatever step was chosen.
    pub halve_step: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointOutcome {
    pub fidelity: f64,
    pub diagnostics: Diagnostics,
    pub step: f64,
    pub wall_ms: f64,
}

/// Re-plans at `spec.delta1_mhz`, propagates the full three-level model from
/// the configured initial state and scores it against the ideal output.
pub fn simulate_point(
    cfg: &ExperimentConfig,
    spec: &PointSpec,
    dissipation: &Dissipation,
) -> Result<PointOutcome, ExperimentError> {
    let start = Instant::now();
    let plan = plan_at(cfg, spec.delta1_mhz, cfg.plan.k)?;
    let p = plan.device_params(&cfg.device_settings(spec.g12_ratio));
    let layout = HilbertLayout::new(plan.n_targets(), Levels::Three, spec.cutoff)?;
    let mut grid = TimeGrid::for_gate(&p, Levels::Three, plan.t_gate, spec.step)?;
    if spec.halve_step {
        grid = grid.halved();
    }
    let register = initial_register(cfg);
    let target = rotated_state(
        &layout,
        &ideal_output_state(&register, &GateSpec::generic(plan.theta.clone()))?,
    )?;
    let psi0 = rotated_state(&layout, &register)?;
    let (fid, diagnostics) = match dissipation {
        Dissipation::None => {
            let h = FullModel.build(&p, &layout)?;
            let (psi, diag) = propagate_pure(&h, &psi0, &layout, &grid)?;
            (state_fidelity(&target, &psi)?, diag)
        }
        Dissipation::Lindblad(np) => {
            let rho0 = DensityMatrix::from_pure(&psi0);
            let run = propagate_lindblad(&rho0, &p, np, &layout, &grid, &FullModel, None)?;
            (fidelity(&run.final_state, &target)?, run.diagnostics)
        }
    };
    Ok(PointOutcome {
        fidelity: fid,
        diagnostics,
        step: grid.step(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn sweep(
    cfg: &ExperimentConfig,
    grid: &[(f64, f64)],
    dissipation: &Dissipation,
) -> Result<Vec<SweepRow>, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.numerics.workers)
        .build()
        .map_err(|e| ExperimentError::Config(format!("worker pool: {e}")))?;
    let run = |&(delta1_mhz, g12_ratio): &(f64, f64)| {
        let spec = PointSpec {
            delta1_mhz,
            g12_ratio,
            cutoff: cfg.numerics.cutoff,
            step: cfg.step_override(),
            halve_step: false,
        };
        let start = Instant::now();
        match simulate_point(cfg, &spec, dissipation) {
            Ok(out) => SweepRow {
                delta1_over_2pi_mhz: delta1_mhz,
                g12_ratio,
                fidelity: out.fidelity,
                trace_drift: out.diagnostics.trace_drift,
                min_eig: out.diagnostics.min_eigenvalue,
                cutoff_occupancy: out.diagnostics.cutoff_occupancy,
                wall_ms: out.wall_ms,
            },
            Err(e) => {
                log::error!("point δ1/2π = {delta1_mhz} MHz, g12 ratio {g12_ratio}: {e}");
                SweepRow {
                    delta1_over_2pi_mhz: delta1_mhz,
                    g12_ratio,
                    fidelity: f64::NAN,
                    trace_drift: f64::NAN,
                    min_eig: f64::NAN,
                    cutoff_occupancy: f64::NAN,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                }
            }
        }
    };
    Ok(pool.install(|| grid.par_iter().map(run).collect()))
}

/// Lossless sweep over `sweep.g12_ratios × δ1 grid`, rows ordered by ratio
/// then by detuning.
pub fn cmd_fig6(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    let deltas = cfg.sweep.delta1_grid();
    let grid: Vec<(f64, f64)> = cfg
        .sweep
        .g12_ratios
        .iter()
        .flat_map(|&r| deltas.iter().map(move |&d| (d, r)))
        .collect();
    sweep(cfg, &grid, &Dissipation::None)
}

/// Lossy sweep over the δ1 grid at `device.g12_ratio`.
pub fn cmd_fig7(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    let grid: Vec<(f64, f64)> = cfg
        .sweep
        .delta1_grid()
        .into_iter()
        .map(|d| (d, cfg.device.g12_ratio))
        .collect();
    sweep(cfg, &grid, &Dissipation::Lindblad(cfg.noise_params()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanReport {
    pub plan: PhasePlan,
    pub params: DeviceParams,
    /// `ω_cj / κ_j`.
    pub quality_factors: Vec<f64>,
    pub conditions: ConditionReport,
}

pub fn cmd_plan(cfg: &ExperimentConfig) -> Result<PlanReport, ExperimentError> {
    let plan = plan_at(cfg, cfg.plan.delta1_mhz, cfg.plan.k)?;
    let params = plan.device_params(&cfg.device_settings(cfg.device.g12_ratio));
    let quality_factors = params.quality_factors(&cfg.noise_params());
    let conditions = crate::model::validate_conditions(&params);
    Ok(PlanReport {
        plan,
        params,
        quality_factors,
        conditions,
    })
}

fn per_2pi_mhz(w: f64) -> f64 {
    w / mhz(1.0)
}

impl fmt::Display for PlanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.plan;
        writeln!(f, "gate time T = {:.6} µs", p.t_gate * 1e6)?;
        writeln!(
            f,
            "drive Ω/2π = {:.6} MHz (k = {})",
            per_2pi_mhz(p.rabi),
            p.k
        )?;
        for j in 0..p.n_targets() {
            writeln!(
                f,
                "target {}: θ = {:.6} rad, m = {}, δ/2π = {:.6} MHz, g/2π = {:.6} MHz, ω_c/2π = {:.9} GHz, Q = {:.6e}",
                j + 1,
                p.theta[j],
                p.m[j],
                per_2pi_mhz(p.delta[j]),
                per_2pi_mhz(p.g[j]),
                self.params.omega_c[j] / mhz(1e3),
                self.quality_factors[j],
            )?;
        }
        writeln!(f, "conditions:")?;
        write!(f, "{}", self.conditions)?;
        for w in &p.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateCheckReport {
    pub cutoff: usize,
    pub comparison: GateComparison,
    pub min_fidelity: f64,
}

impl GateCheckReport {
    pub fn passed(&self) -> bool {
        self.comparison.fidelity > self.min_fidelity
    }
}

impl fmt::Display for GateCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "effective-model propagator at cutoff {}", self.cutoff)?;
        writeln!(f, "gate fidelity  {:.12}", self.comparison.fidelity)?;
        writeln!(f, "max |ΔU|       {:.3e}", self.comparison.max_abs)?;
        writeln!(
            f,
            "{} (threshold {})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.min_fidelity
        )
    }
}

/// Builds the effective-model propagator on the rotated register and
/// compares it with the ideal gate. Falling short of the threshold is an
/// error carrying exit code 3.
pub fn cmd_gate_check(cfg: &ExperimentConfig) -> Result<GateCheckReport, ExperimentError> {
    let report = gate_check_report(cfg)?;
    if report.passed() {
        Ok(report)
    } else {
        Err(ExperimentError::Threshold(format!(
            "gate fidelity {:.9} is not above {}",
            report.comparison.fidelity, report.min_fidelity
        )))
    }
}

/// [`cmd_gate_check`] without the threshold verdict.
pub fn gate_check_report(cfg: &ExperimentConfig) -> Result<GateCheckReport, ExperimentError> {
    let plan = plan_at(cfg, cfg.plan.delta1_mhz, cfg.plan.k)?;
    let p = plan.device_params(&cfg.device_settings(0.0));
    gate_check_params(
        &p,
        &plan,
        cfg.gate_check.cutoff,
        cfg.step_override(),
        cfg.gate_check.min_fidelity,
    )
}

/// Gate check for explicit parameters, e.g. with couplings switched off.
pub fn gate_check_params(
    p: &DeviceParams,
    plan: &PhasePlan,
    cutoff: usize,
    step: Option<f64>,
    min_fidelity: f64,
) -> Result<GateCheckReport, ExperimentError> {
    let layout = HilbertLayout::new(plan.n_targets(), Levels::Two, cutoff)?;
    let grid = TimeGrid::for_gate(p, Levels::Two, plan.t_gate, step)?;
    let u_sim = simulated_propagator(&EffectiveModel, p, &layout, &grid)?;
    let theta = (0..p.n_targets)
        .map(|j| crate::geometric::total_phase(p.g[j], p.delta[j], p.m[j]))
        .collect::<Result<Vec<_>, _>>()?;
    let ideal = ideal_gate_unitary(&GateSpec::generic(theta))?;
    let comparison = crate::gates::propagator_distance(
        &u_sim,
        &ideal,
        default_phase_fix_index(plan.n_targets()),
    )?;
    Ok(GateCheckReport {
        cutoff,
        comparison,
        min_fidelity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergeRow {
    pub cutoff: usize,
    pub step: f64,
    pub halved_step: bool,
    pub fidelity: f64,
    /// Fidelity minus the reference run.
    pub delta: f64,
    pub cutoff_occupancy: f64,
    pub trace_drift: f64,
    pub min_eig: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergeReport {
    pub delta1_mhz: f64,
    pub reference_cutoff: usize,
    pub occupancy_threshold: f64,
    pub rows: Vec<ConvergeRow>,
}

impl ConvergeReport {
    pub fn reference(&self) -> Option<&ConvergeRow> {
        self.rows
            .iter()
            .find(|r| r.cutoff == self.reference_cutoff && !r.halved_step)
    }
}

impl fmt::Display for ConvergeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lossy point δ1/2π = {} MHz, reference cutoff {}",
            self.delta1_mhz, self.reference_cutoff
        )?;
        writeln!(
            f,
            "{:>6} {:>12} {:>14} {:>12} {:>12} {:>12} {:>12}  status",
            "cutoff", "step_ps", "fidelity", "ΔF", "occupancy", "trace_drift", "min_eig"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>6} {:>12.4} {:>14.10} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}  {}",
                r.cutoff,
                r.step * 1e12,
                r.fidelity,
                r.delta,
                r.cutoff_occupancy,
                r.trace_drift,
                r.min_eig,
                if r.converged {
                    "converged"
                } else {
                    "UNCONVERGED (occupancy at cutoff)"
                }
            )?;
        }
        Ok(())
    }
}

/// Reruns the lossy optimum over `converge.cutoffs` at the default step and
/// once at half step for the reference cutoff.
pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<ConvergeReport, ExperimentError> {
    let noise = Dissipation::Lindblad(cfg.noise_params());
    let reference_cutoff = cfg.numerics.cutoff;
    let mut runs: Vec<(usize, bool)> = vec![(reference_cutoff, false), (reference_cutoff, true)];
    runs.extend(
        cfg.converge
            .cutoffs
            .iter()
            .filter(|&&c| c != reference_cutoff)
            .map(|&c| (c, false)),
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.numerics.workers)
        .build()
        .map_err(|e| ExperimentError::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<PointOutcome> = pool.install(|| {
        runs.par_iter()
            .map(|&(cutoff, halve_step)| {
                let spec = PointSpec {
                    delta1_mhz: cfg.plan.delta1_mhz,
                    g12_ratio: cfg.device.g12_ratio,
                    cutoff,
                    step: cfg.step_override(),
                    halve_step,
                };
                simulate_point(cfg, &spec, &noise)
            })
            .collect::<Result<_, _>>()
    })?;
    let f_ref = outcomes[0].fidelity;
    let rows = runs
        .iter()
        .zip(&outcomes)
        .map(|(&(cutoff, halved_step), o)| ConvergeRow {
            cutoff,
            step: o.step,
            halved_step,
            fidelity: o.fidelity,
            delta: o.fidelity - f_ref,
            cutoff_occupancy: o.diagnostics.cutoff_occupancy,
            trace_drift: o.diagnostics.trace_drift,
            min_eig: o.diagnostics.min_eigenvalue,
            converged: o.diagnostics.cutoff_occupancy <= cfg.converge.occupancy_threshold,
        })
        .collect();
    Ok(ConvergeReport {
        delta1_mhz: cfg.plan.delta1_mhz,
        reference_cutoff,
        occupancy_threshold: cfg.converge.occupancy_threshold,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwaRow {
    pub k: u32,
    pub drive_ratio: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RwaCheckReport {
    pub rows: Vec<RwaRow>,
}

impl RwaCheckReport {
    /// Fidelity strictly increases with the drive ratio.
    pub fn monotone(&self) -> bool {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.drive_ratio.total_cmp(&b.drive_ratio));
        rows.windows(2).all(|w| w[1].fidelity > w[0].fidelity)
    }
}

impl fmt::Display for RwaCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>6} {:>12} {:>16}", "k", "2Ω/|δ_n|", "fidelity")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>6} {:>12.4} {:>16.12}",
                r.k, r.drive_ratio, r.fidelity
            )?;
        }
        writeln!(
            f,
            "fidelity increases with drive: {}",
            if self.monotone() { "yes" } else { "NO" }
        )
    }
}

/// Compares the drive-frame model with its rotating-wave reduction at each
/// `rwa.k_values`, re-planning every time. Runs in two-level mode.
pub fn cmd_rwa_check(cfg: &ExperimentConfig) -> Result<RwaCheckReport, ExperimentError> {
    let rows = cfg
        .rwa
        .k_values
        .iter()
        .map(|&k| {
            let plan = plan_at(cfg, cfg.plan.delta1_mhz, k)?;
            let p = plan.device_params(&cfg.device_settings(0.0));
            let layout = HilbertLayout::new(plan.n_targets(), Levels::Two, cfg.rwa.cutoff)?;
            let grid = TimeGrid::for_gate(&p, Levels::Two, plan.t_gate, cfg.step_override())?;
            let psi0 = rotated_state(&layout, &initial_register(cfg))?;
            let r = effective_vs_full_check(&p, &layout, &grid, &psi0)?;
            Ok(RwaRow {
                k,
                drive_ratio: r.drive_ratio,
                fidelity: r.fidelity,
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok(RwaCheckReport { rows })
}
