//! Ideal gate oracles in the rotated register basis.
//!
//! Rotated basis states of `A, 1, …, n` are indexed big-endian with bit 0
//! for `|+>` and bit 1 for `|->`, so index 0 is `|+ + … +>`.

use thiserror::Error;

use crate::hilbert::{
    minus_ket, plus_ket, HilbertError, Levels, Matrix, StateVector, C64, ONE, ZERO,
};

#[derive(Debug, Error, PartialEq)]
pub enum GateError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variant {variant:?} needs {needed} targets, spec has {found}")]
    VariantMismatch {
        variant: GateVariant,
        needed: usize,
        found: usize,
    },
    #[error("gate needs at least one target")]
    NoTargets,
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateVariant {
    /// One control, `n` targets; `θ_j` applies when target `j` matches the
    /// control's sign.
    Generic,
    /// Generic gate followed by the single-qubit conversion: phase `2θ_j`
    /// on `|->_j` when the control is `|->`.
    Converted,
    /// Generic with exactly one target.
    TwoQubit,
    /// Generic with exactly two targets.
    ThreeQubit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub theta: Vec<f64>,
    pub variant: GateVariant,
}

impl GateSpec {
    pub fn new(theta: Vec<f64>, variant: GateVariant) -> Self {
        Self { theta, variant }
    }

    pub fn generic(theta: Vec<f64>) -> Self {
        Self::new(theta, GateVariant::Generic)
    }

    pub fn n_targets(&self) -> usize {
        self.theta.len()
    }

    /// `2^(n+1)`.
    pub fn dim(&self) -> usize {
        1 << (self.n_targets() + 1)
    }

    fn validate(&self) -> Result<(), GateError> {
        let n = self.n_targets();
        if n == 0 {
            return Err(GateError::NoTargets);
        }
        let needed = match self.variant {
            GateVariant::TwoQubit => 1,
            GateVariant::ThreeQubit => 2,
            _ => return Ok(()),
        };
        if n != needed {
            return Err(GateError::VariantMismatch {
                variant: self.variant,
                needed,
                found: n,
            });
        }
        Ok(())
    }

    /// Diagonal of the gate in the rotated basis.
    pub fn phases(&self) -> Result<Vec<C64>, GateError> {
        self.validate()?;
        let n = self.n_targets();
        Ok((0..self.dim())
            .map(|b| {
                let control = sign_bit(b, n, 0);
                let phase: f64 = (1..=n)
                    .map(|j| {
                        let target = sign_bit(b, n, j);
                        match self.variant {
                            GateVariant::Converted => {
                                if control && target {
                                    2.0 * self.theta[j - 1]
                                } else {
                                    0.0
                                }
                            }
                            _ => {
                                if control == target {
                                    self.theta[j - 1]
                                } else {
                                    0.0
                                }
                            }
                        }
                    })
                    .sum();
                C64::from_polar(1.0, phase)
            })
            .collect())
    }
}

/// `true` when qubit `q` (0 = control) is `|->` in rotated index `b`.
pub fn sign_bit(b: usize, n_targets: usize, q: usize) -> bool {
    (b >> (n_targets - q)) & 1 == 1
}

fn diagonal(d: &[C64]) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(d))
}

/// Gate unitary in the rotated basis.
pub fn ideal_gate_unitary(spec: &GateSpec) -> Result<Matrix, GateError> {
    Ok(diagonal(&spec.phases()?))
}

/// Single two-qubit gate between the control and target `j`, lifted to the
/// `n`-target register.
pub fn two_qubit_gate(n_targets: usize, j: usize, theta: f64) -> Matrix {
    let d: Vec<C64> = (0..1usize << (n_targets + 1))
        .map(|b| {
            if sign_bit(b, n_targets, 0) == sign_bit(b, n_targets, j) {
                C64::from_polar(1.0, theta)
            } else {
                ONE
            }
        })
        .collect();
    diagonal(&d)
}

/// Local unitary taking the generic gate to the converted one:
/// `|+>_A -> Π e^{-iθ_j}|+>_A`, `|->_j -> e^{iθ_j}|->_j`.
pub fn conversion_operation(theta: &[f64]) -> Matrix {
    let n = theta.len();
    let total: f64 = theta.iter().sum();
    let d: Vec<C64> = (0..1usize << (n + 1))
        .map(|b| {
            let mut phase = if sign_bit(b, n, 0) { 0.0 } else { -total };
            for j in 1..=n {
                if sign_bit(b, n, j) {
                    phase += theta[j - 1];
                }
            }
            C64::from_polar(1.0, phase)
        })
        .collect();
    diagonal(&d)
}

/// Phase `e^{iφ}` when both `control` and `target` are `|->`.
pub fn controlled_phase(n_targets: usize, control: usize, target: usize, phi: f64) -> Matrix {
    let d: Vec<C64> = (0..1usize << (n_targets + 1))
        .map(|b| {
            if sign_bit(b, n_targets, control) && sign_bit(b, n_targets, target) {
                C64::from_polar(1.0, phi)
            } else {
                ONE
            }
        })
        .collect();
    diagonal(&d)
}

/// Every qutrit in `(|+> + |->)/√2`, rotated coordinates.
pub fn excited_initial_state(n_targets: usize) -> StateVector {
    let dim = 1usize << (n_targets + 1);
    let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    StateVector::new(vec![a; dim]).expect("uniform state is normalized")
}

/// Applies the ideal gate to a rotated-basis register state.
pub fn ideal_output_state(
    initial: &StateVector,
    spec: &GateSpec,
) -> Result<StateVector, GateError> {
    let phases = spec.phases()?;
    if initial.dim() != phases.len() {
        return Err(GateError::DimensionMismatch {
            expected: phases.len(),
            found: initial.dim(),
        });
    }
    let amps = initial
        .amps()
        .iter()
        .zip(&phases)
        .map(|(a, p)| a * p)
        .collect();
    Ok(StateVector::new(amps)?)
}

/// Columns are the rotated basis states written in the computational
/// `(g, e[, f])` register basis, ordered `A, 1, …, n`.
pub fn rotated_basis_matrix(n_targets: usize, levels: Levels) -> Matrix {
    let d = levels.dim();
    let plus = nalgebra::DVector::from_vec(plus_ket(levels));
    let minus = nalgebra::DVector::from_vec(minus_ket(levels));
    let single = Matrix::from_columns(&[plus, minus]);
    assert_eq!(single.nrows(), d);
    (0..n_targets).fold(single.clone(), |acc, _| acc.kronecker(&single))
}

/// Rotated-coordinate register amplitudes in the computational basis.
pub fn register_amplitudes(rotated: &StateVector, levels: Levels) -> Result<Vec<C64>, GateError> {
    let dim = rotated.dim();
    if !dim.is_power_of_two() || dim < 4 {
        return Err(GateError::DimensionMismatch {
            expected: 4,
            found: dim,
        });
    }
    let n = dim.trailing_zeros() as usize - 1;
    let v = rotated_basis_matrix(n, levels) * nalgebra::DVector::from_column_slice(rotated.amps());
    Ok(v.iter().copied().collect())
}

/// Comparison of a simulated propagator with an ideal one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateComparison {
    /// `max |U_sim - U_ideal|` after fixing the global phase.
    pub max_abs: f64,
    /// `|tr(U_ideal† U_sim)| / dim`.
    pub fidelity: f64,
    /// Diagonal index used to fix the global phase.
    pub phase_index: usize,
}

/// Index of `|+>_A |->_1 … |->_n`, which every variant maps with phase 1.
pub fn default_phase_fix_index(n_targets: usize) -> usize {
    (1 << n_targets) - 1
}

/// Both propagators must be written in the same basis. The global phase of
/// `u_sim` is chosen so its entry at `phase_fix` has the ideal's phase; a
/// vanishing entry there falls back to the largest diagonal entry.
pub fn propagator_distance(
    u_sim: &Matrix,
    u_ideal: &Matrix,
    phase_fix: usize,
) -> Result<GateComparison, GateError> {
    let dim = u_ideal.nrows();
    if u_ideal.ncols() != dim {
        return Err(GateError::DimensionMismatch {
            expected: dim,
            found: u_ideal.ncols(),
        });
    }
    if u_sim.nrows() != dim || u_sim.ncols() != dim {
        return Err(GateError::DimensionMismatch {
            expected: dim,
            found: u_sim.nrows(),
        });
    }
    let mut idx = phase_fix.min(dim - 1);
    if u_sim[(idx, idx)].norm() < 1e-12 || u_ideal[(idx, idx)].norm() < 1e-12 {
        idx = (0..dim)
            .max_by(|&a, &b| u_sim[(a, a)].norm().total_cmp(&u_sim[(b, b)].norm()))
            .unwrap_or(0);
    }
    let s = u_sim[(idx, idx)];
    let i = u_ideal[(idx, idx)];
    let fix = if s.norm() > 0.0 && i.norm() > 0.0 {
        (i / i.norm()) * (s.conj() / s.norm())
    } else {
        ONE
    };
    let fixed = u_sim * fix;
    let max_abs = (&fixed - u_ideal)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.norm()));
    let overlap: C64 = u_ideal
        .iter()
        .zip(u_sim.iter())
        .fold(ZERO, |acc, (a, b)| acc + a.conj() * b);
    Ok(GateComparison {
        max_abs,
        fidelity: overlap.norm() / dim as f64,
        phase_index: idx,
    })
}
