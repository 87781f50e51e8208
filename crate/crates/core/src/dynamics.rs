//! Fixed-step RK4 propagation of pure states and density matrices.

use std::f64::consts::PI;

use thiserror::Error;

use crate::gates::{register_amplitudes, GateError};
use crate::hilbert::{
    embed_product, minus_ket, plus_ket, CsrMatrix, DensityMatrix, HilbertError, HilbertLayout,
    Levels, Matrix, StateVector, C64, ZERO,
};
use crate::model::{
    collapse_operators, DeviceParams, EffectiveModel, Frame, HamiltonianModel, LindbladGenerator,
    ModelError, NoiseParams, RotatedModel, TimeDependentHamiltonian,
};

/// Norm drift above which a unitary run is rejected.
pub const NORM_FAILURE: f64 = 1e-5;
/// Minimum eigenvalue below which a density matrix is flagged.
pub const POSITIVITY_FLOOR: f64 = -1e-4;
/// Samples per period of the fastest oscillation.
pub const SAMPLES_PER_PERIOD: f64 = 40.0;
/// Minimum number of steps per gate.
pub const MIN_STEPS: f64 = 2000.0;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("norm drifted by {drift:.3e}; retry with step <= {suggested_step:.3e} s")]
    IntegrationFailure { drift: f64, suggested_step: f64 },
    #[error("<ψ|ρ|ψ> = {0:.3e} is negative")]
    NegativeOverlap(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Gate(#[from] GateError),
}

/// Uniform grid covering `[t0, t1]` exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// The largest uniform step not exceeding `max_step` that lands on `t1`.
    pub fn new(t0: f64, t1: f64, max_step: f64) -> Result<Self, DynamicsError> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(DynamicsError::InvalidGrid(format!(
                "need t0 < t1, got [{t0}, {t1}]"
            )));
        }
        if !(max_step > 0.0) || !max_step.is_finite() {
            return Err(DynamicsError::InvalidGrid(format!(
                "step must be positive, got {max_step}"
            )));
        }
        if max_step > t1 - t0 {
            return Err(DynamicsError::InvalidGrid(format!(
                "step {max_step} exceeds span {}",
                t1 - t0
            )));
        }
        let n_steps = ((t1 - t0) / max_step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(Self { t0, t1, n_steps })
    }

    /// `[0, t_gate]` with `step_override` or the default step.
    pub fn for_gate(
        p: &DeviceParams,
        levels: Levels,
        t_gate: f64,
        step_override: Option<f64>,
    ) -> Result<Self, DynamicsError> {
        let step = step_override.unwrap_or_else(|| default_step(p, levels, t_gate));
        Self::new(0.0, t_gate, step)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.n_steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + (self.t1 - self.t0) * i as f64 / self.n_steps as f64
    }

    pub fn halved(&self) -> Self {
        Self {
            n_steps: 2 * self.n_steps,
            ..*self
        }
    }
}

/// `min(2π / (40 ω_fast), T / 2000)`, where `ω_fast` is the fastest term
/// frequency plus the drive dressing `(n+1)|Ω|`.
pub fn default_step(p: &DeviceParams, levels: Levels, t_gate: f64) -> f64 {
    let fast = p.fastest_frequency(levels) + (p.n_targets + 1) as f64 * p.rabi.abs();
    let by_freq = if fast > 0.0 {
        2.0 * PI / (SAMPLES_PER_PERIOD * fast)
    } else {
        f64::INFINITY
    };
    by_freq.min(t_gate / MIN_STEPS)
}

fn axpy_into(out: &mut [C64], y: &[C64], a: f64, k: &[C64]) {
    for ((o, y), k) in out.iter_mut().zip(y).zip(k) {
        *o = y + k * a;
    }
}

/// Integrates `dψ/dt = -iH(t)ψ` without renormalizing.
pub fn propagate_unitary(
    h: &TimeDependentHamiltonian,
    psi0: &StateVector,
    grid: &TimeGrid,
) -> Result<StateVector, DynamicsError> {
    rk4_pure(h, psi0, grid, |_| {})
}

/// Pure-state run with the same diagnostics as a density-matrix run. The
/// state `|ψ><ψ|` has a zero eigenvalue whenever `dim > 1`.
pub fn propagate_pure(
    h: &TimeDependentHamiltonian,
    psi0: &StateVector,
    layout: &HilbertLayout,
    grid: &TimeGrid,
) -> Result<(StateVector, Diagnostics), DynamicsError> {
    if layout.total_dim() != h.dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: h.dim(),
            found: layout.total_dim(),
        });
    }
    let top = cutoff_indices(layout);
    let occupancy = |y: &[C64]| {
        top.iter()
            .map(|set| set.iter().map(|&i| y[i].norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let norm_drift = |y: &[C64]| (y.iter().map(|v| v.norm_sqr()).sum::<f64>() - 1.0).abs();
    let mut diag = Diagnostics {
        trace_drift: norm_drift(psi0.amps()),
        hermiticity_defect: 0.0,
        min_eigenvalue: if h.dim() > 1 {
            0.0
        } else {
            psi0.amps()[0].norm_sqr()
        },
        cutoff_occupancy: occupancy(psi0.amps()),
        steps: grid.n_steps(),
    };
    let psi = rk4_pure(h, psi0, grid, |y| {
        diag.trace_drift = diag.trace_drift.max(norm_drift(y));
        diag.cutoff_occupancy = diag.cutoff_occupancy.max(occupancy(y));
    })?;
    Ok((psi, diag))
}

fn rk4_pure(
    h: &TimeDependentHamiltonian,
    psi0: &StateVector,
    grid: &TimeGrid,
    mut observe: impl FnMut(&[C64]),
) -> Result<StateVector, DynamicsError> {
    let dim = h.dim();
    if psi0.dim() != dim {
        return Err(DynamicsError::DimensionMismatch {
            expected: dim,
            found: psi0.dim(),
        });
    }
    let compiled = h.compile();
    let mut hm = compiled.workspace();
    let mut y = psi0.amps().to_vec();
    let (mut k, mut acc, mut tmp) = (vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]);
    let minus_i = C64::new(0.0, -1.0);
    let mut f = |t: f64, x: &[C64], out: &mut [C64]| {
        compiled.evaluate_into(t, &mut hm);
        hm.mul_vec(x, out);
        out.iter_mut().for_each(|v| *v *= minus_i);
    };
    let h_step = grid.step();
    for i in 0..grid.n_steps() {
        let t = grid.time(i);
        f(t, &y, &mut k);
        acc.copy_from_slice(&k);
        axpy_into(&mut tmp, &y, 0.5 * h_step, &k);
        f(t + 0.5 * h_step, &tmp, &mut k);
        for (((a, o), y), k) in acc.iter_mut().zip(tmp.iter_mut()).zip(&y).zip(&k) {
            *a += k * 2.0;
            *o = y + k * (0.5 * h_step);
        }
        f(t + 0.5 * h_step, &tmp, &mut k);
        for (((a, o), y), k) in acc.iter_mut().zip(tmp.iter_mut()).zip(&y).zip(&k) {
            *a += k * 2.0;
            *o = y + k * h_step;
        }
        f(t + h_step, &tmp, &mut k);
        for ((y, a), k) in y.iter_mut().zip(&acc).zip(&k) {
            *y += (a + k) * (h_step / 6.0);
        }
        observe(&y);
    }
    let norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let drift = (norm - 1.0).abs();
    if !(drift <= NORM_FAILURE) {
        return Err(DynamicsError::IntegrationFailure {
            drift,
            suggested_step: 0.5 * h_step,
        });
    }
    Ok(StateVector::from_raw(y))
}

/// Health of a density-matrix run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// Largest `|tr ρ - 1|` seen at any step.
    pub trace_drift: f64,
    /// Largest anti-Hermitian residue removed by per-step symmetrization.
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of the final state.
    pub min_eigenvalue: f64,
    /// Largest population of the top Fock level of any cavity at any step.
    pub cutoff_occupancy: f64,
    pub steps: usize,
}

impl Diagnostics {
    pub fn positivity_ok(&self) -> bool {
        self.min_eigenvalue >= POSITIVITY_FLOOR
    }
}

#[derive(Clone, Debug)]
pub struct SimResult {
    pub final_state: DensityMatrix,
    /// Fidelity against the requested target, if any.
    pub fidelity: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// Basis indices holding the top Fock level of each cavity.
fn cutoff_indices(layout: &HilbertLayout) -> Vec<Vec<usize>> {
    let Some(cutoff) = layout.fock_cutoff() else {
        return Vec::new();
    };
    (1..=layout.n_targets())
        .map(|j| {
            let s = layout.cavity(j);
            (0..layout.total_dim())
                .filter(|&i| layout.digit(i, s) == cutoff)
                .collect()
        })
        .collect()
}

fn top_occupancy(rho: &[C64], dim: usize, sets: &[Vec<usize>]) -> f64 {
    sets.iter()
        .map(|set| set.iter().map(|&i| rho[i * dim + i].re).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `ρ <- (ρ + ρ†)/2`, returning the largest removed residue.
fn symmetrize(n: usize, m: &mut [C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..n {
        let d = &mut m[r * n + r];
        worst = worst.max(d.im.abs());
        d.im = 0.0;
        for c in r + 1..n {
            let (a, b) = (m[r * n + c], m[c * n + r]);
            worst = worst.max((a - b.conj()).norm());
            let v = (a + b.conj()) * 0.5;
            m[r * n + c] = v;
            m[c * n + r] = v.conj();
        }
    }
    worst
}

/// RK4 on `ρ` with a prepared generator.
pub fn evolve_density(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    layout: &HilbertLayout,
    grid: &TimeGrid,
) -> Result<(DensityMatrix, Diagnostics), DynamicsError> {
    let dim = gen.dim();
    if rho0.dim() != dim || layout.total_dim() != dim {
        return Err(DynamicsError::DimensionMismatch {
            expected: dim,
            found: rho0.dim(),
        });
    }
    let len = dim * dim;
    let mut ws = gen.workspace();
    let mut y = rho0.data().to_vec();
    let (mut k, mut acc, mut tmp) = (vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]);
    let top = cutoff_indices(layout);
    let trace = |m: &[C64]| (0..dim).map(|i| m[i * dim + i]).sum::<C64>();
    let mut diag = Diagnostics {
        trace_drift: (trace(&y) - 1.0).norm(),
        hermiticity_defect: 0.0,
        min_eigenvalue: f64::NAN,
        cutoff_occupancy: top_occupancy(&y, dim, &top),
        steps: grid.n_steps(),
    };
    let h = grid.step();
    for i in 0..grid.n_steps() {
        let t = grid.time(i);
        gen.rhs_into(t, &y, &mut k, &mut ws);
        for (((a, o), y), k) in acc.iter_mut().zip(tmp.iter_mut()).zip(&y).zip(&k) {
            *a = *k;
            *o = y + k * (0.5 * h);
        }
        gen.rhs_into(t + 0.5 * h, &tmp, &mut k, &mut ws);
        for (((a, o), y), k) in acc.iter_mut().zip(tmp.iter_mut()).zip(&y).zip(&k) {
            *a += k * 2.0;
            *o = y + k * (0.5 * h);
        }
        gen.rhs_into(t + 0.5 * h, &tmp, &mut k, &mut ws);
        for (((a, o), y), k) in acc.iter_mut().zip(tmp.iter_mut()).zip(&y).zip(&k) {
            *a += k * 2.0;
            *o = y + k * h;
        }
        gen.rhs_into(t + h, &tmp, &mut k, &mut ws);
        for ((y, a), k) in y.iter_mut().zip(&acc).zip(&k) {
            *y += (a + k) * (h / 6.0);
        }
        diag.hermiticity_defect = diag.hermiticity_defect.max(symmetrize(dim, &mut y));
        diag.trace_drift = diag.trace_drift.max((trace(&y) - 1.0).norm());
        diag.cutoff_occupancy = diag.cutoff_occupancy.max(top_occupancy(&y, dim, &top));
        if !y[0].re.is_finite() {
            return Err(DynamicsError::IntegrationFailure {
                drift: f64::INFINITY,
                suggested_step: 0.5 * h,
            });
        }
    }
    let rho = DensityMatrix::from_raw(dim, y);
    diag.min_eigenvalue = rho.min_eigenvalue();
    if !diag.positivity_ok() {
        log::warn!(
            "density matrix lost positivity: min eigenvalue {:.3e}",
            diag.min_eigenvalue
        );
    }
    Ok((rho, diag))
}

/// Master-equation run of `model` with noise `np` over `grid`.
pub fn propagate_lindblad(
    rho0: &DensityMatrix,
    p: &DeviceParams,
    np: &NoiseParams,
    layout: &HilbertLayout,
    grid: &TimeGrid,
    model: &dyn HamiltonianModel,
    target: Option<&StateVector>,
) -> Result<SimResult, DynamicsError> {
    let h = model.build(p, layout)?;
    let gen = LindbladGenerator::new(&h, &collapse_operators(np, layout)?)?;
    let (final_state, diagnostics) = evolve_density(&gen, rho0, layout, grid)?;
    let fidelity = target.map(|psi| fidelity(&final_state, psi)).transpose()?;
    Ok(SimResult {
        final_state,
        fidelity,
        diagnostics,
    })
}

/// `√<ψ|ρ|ψ>`.
pub fn fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64, DynamicsError> {
    if rho.dim() != psi.dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: rho.dim(),
            found: psi.dim(),
        });
    }
    let v = rho.expectation(psi).re;
    if v < -1e-8 {
        return Err(DynamicsError::NegativeOverlap(v));
    }
    Ok(v.clamp(0.0, 1.0).sqrt())
}

/// `|<a|b>|` for pure states.
pub fn state_fidelity(a: &StateVector, b: &StateVector) -> Result<f64, DynamicsError> {
    if a.dim() != b.dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.inner(b).norm())
}

/// `exp(-iΩt Σ_l σ̃z_l)` on the full layout.
pub fn frame_unitary(
    omega: f64,
    t: f64,
    layout: &HilbertLayout,
) -> Result<CsrMatrix, DynamicsError> {
    let levels = layout.levels();
    let plus = plus_ket(levels);
    let minus = minus_ket(levels);
    let (ep, em) = (
        C64::from_polar(1.0, -omega * t),
        C64::from_polar(1.0, omega * t),
    );
    let d = levels.dim();
    let mut local = Matrix::from_fn(d, d, |r, c| {
        ep * plus[r] * plus[c].conj() + em * minus[r] * minus[c].conj()
    });
    if levels == Levels::Three {
        local[(2, 2)] = C64::new(1.0, 0.0);
    }
    let factors: Vec<(usize, &Matrix)> = layout
        .qutrits()
        .map(|q| (layout.qutrit(q), &local))
        .collect();
    Ok(embed_product(&factors, layout)?)
}

/// Takes a drive-frame state back to the interaction picture.
pub fn frame_transform(
    psi: &StateVector,
    omega: f64,
    t: f64,
    layout: &HilbertLayout,
) -> Result<StateVector, DynamicsError> {
    if psi.dim() != layout.total_dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: layout.total_dim(),
            found: psi.dim(),
        });
    }
    let u = frame_unitary(omega, t, layout)?;
    let mut out = vec![ZERO; psi.dim()];
    u.mul_vec(psi.amps(), &mut out);
    Ok(StateVector::from_raw(out))
}

/// Density-matrix version of [`frame_transform`].
pub fn frame_transform_density(
    rho: &DensityMatrix,
    omega: f64,
    t: f64,
    layout: &HilbertLayout,
) -> Result<DensityMatrix, DynamicsError> {
    let n = rho.dim();
    if n != layout.total_dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: layout.total_dim(),
            found: n,
        });
    }
    let u = frame_unitary(omega, t, layout)?;
    let mut x = vec![ZERO; n * n];
    u.mul_dense_into(C64::new(1.0, 0.0), rho.data(), &mut x);
    let xt: Vec<C64> = (0..n * n).map(|i| x[(i % n) * n + i / n].conj()).collect();
    u.mul_dense_into(C64::new(1.0, 0.0), &xt, &mut x);
    Ok(DensityMatrix::from_raw(n, x))
}

/// Largest spread of the frame phases over the rotated register basis;
/// zero exactly when the frame acts as a global phase on `{g, e}`.
pub fn frame_phase_spread(omega: f64, t: f64, n_qutrits: usize) -> f64 {
    let phase = |b: usize| {
        let s: f64 = (0..n_qutrits)
            .map(|q| if (b >> q) & 1 == 0 { 1.0 } else { -1.0 })
            .sum();
        C64::from_polar(1.0, -omega * t * s)
    };
    let p0 = phase(0);
    (1..1usize << n_qutrits)
        .map(|b| (phase(b) - p0).norm())
        .fold(0.0, f64::max)
}

/// Register amplitudes (computational basis, layout levels) times cavity
/// vacuum.
pub fn embed_register(
    layout: &HilbertLayout,
    register: &[C64],
) -> Result<StateVector, DynamicsError> {
    if register.len() != layout.register_dim() {
        return Err(DynamicsError::DimensionMismatch {
            expected: layout.register_dim(),
            found: register.len(),
        });
    }
    let mut amps = vec![ZERO; layout.total_dim()];
    for (i, a) in register.iter().enumerate() {
        amps[layout.with_vacuum(i)] = *a;
    }
    Ok(StateVector::new(amps)?)
}

/// Rotated-coordinate register state times cavity vacuum.
pub fn rotated_state(
    layout: &HilbertLayout,
    rotated: &StateVector,
) -> Result<StateVector, DynamicsError> {
    embed_register(layout, &register_amplitudes(rotated, layout.levels())?)
}

/// Propagator of `model` restricted to the rotated qubit basis with cavities
/// starting and ending in vacuum, expressed in the interaction picture.
pub fn simulated_propagator(
    model: &dyn HamiltonianModel,
    p: &DeviceParams,
    layout: &HilbertLayout,
    grid: &TimeGrid,
) -> Result<Matrix, DynamicsError> {
    let h = model.build(p, layout)?;
    let n = 1usize << (layout.n_targets() + 1);
    let basis: Vec<StateVector> = (0..n)
        .map(|b| rotated_state(layout, &StateVector::basis(n, b)))
        .collect::<Result<_, _>>()?;
    let mut u = Matrix::zeros(n, n);
    for (b, psi0) in basis.iter().enumerate() {
        let mut psi = propagate_unitary(&h, psi0, grid)?;
        if model.frame() == Frame::Rotated {
            psi = frame_transform(&psi, p.rabi, grid.t1() - grid.t0(), layout)?;
        }
        for (r, out) in basis.iter().enumerate() {
            u[(r, b)] = out.inner(&psi);
        }
    }
    Ok(u)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwaReport {
    /// `2Ω / max_j |δ_j|`.
    pub drive_ratio: f64,
    /// `|<ψ_ideal(T)|ψ_eff(T)>|`.
    pub fidelity: f64,
}

/// Propagates `initial` under the drive-frame Hamiltonian with and without
/// the rotating-wave approximation and compares the two at the end of
/// `grid`. Both runs share a frame, so no restoration is needed.
pub fn effective_vs_full_check(
    p: &DeviceParams,
    layout: &HilbertLayout,
    grid: &TimeGrid,
    initial: &StateVector,
) -> Result<RwaReport, DynamicsError> {
    let exact = propagate_unitary(&RotatedModel.build(p, layout)?, initial, grid)?;
    let eff = propagate_unitary(&EffectiveModel.build(p, layout)?, initial, grid)?;
    let max_delta = p.delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Ok(RwaReport {
        drive_ratio: 2.0 * p.rabi / max_delta,
        fidelity: state_fidelity(&exact, &eff)?,
    })
}

#[cfg(test)]
mod tests;
