//! Truncated tensor-product Hilbert spaces for a coupler qutrit, `n` target
//! qutrits and one cavity mode per target.
//!
//! Subsystems are ordered `A, 1, ..., n, c1, ..., cn` and qutrit levels are
//! ordered `(|g>, |e>, |f>)`. Basis indices are row-major over that order, so
//! the last cavity digit varies fastest.

mod kernels;
mod ops;
mod sparse;
mod state;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ops::{
    annihilation, creation, dagger, displacement, embed, embed_product, identity, minus_ket,
    number, plus_ket, qutrit_operator, QutritOp,
};
pub use sparse::{CsrMatrix, MonomialMap};
pub use state::{DensityMatrix, StateVector};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("invalid dimension {0}: need at least 2")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subsystem index {index} out of range ({count} subsystems)")]
    SubsystemOutOfRange { index: usize, count: usize },
    #[error("unknown qutrit operator kind `{0}`")]
    UnknownKind(String),
    #[error("operator `{0}` needs the |f> level but the layout is two-level")]
    NeedsThirdLevel(&'static str),
    #[error("operator is not Hermitian: max |M - M^dag| = {0:e}")]
    NotHermitian(f64),
    #[error("state is not normalized: norm = {0}")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("subsystem {0} appears twice in a tensor product")]
    RepeatedSubsystem(usize),
    #[error("a layout needs at least one target qubit")]
    NoTargets,
}

/// Number of modeled transmon levels per qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Levels {
    /// `{|g>, |e>}` only.
    Two,
    /// `{|g>, |e>, |f>}`, includes the leakage level.
    #[default]
    Three,
}

impl Levels {
    pub fn dim(self) -> usize {
        match self {
            Levels::Two => 2,
            Levels::Three => 3,
        }
    }
}

/// A qubit (or qutrit) of the device.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Qutrit {
    /// The shared control qubit `A`.
    Coupler,
    /// Target qubit `j`, 1-based, sitting in cavity `j`.
    Target(usize),
}

/// Ordered subsystem dimensions of the composite space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertLayout {
    n_targets: usize,
    levels: Levels,
    fock_cutoff: Option<usize>,
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl HilbertLayout {
    /// Qutrits plus `n_targets` cavities truncated at `fock_cutoff` photons.
    pub fn new(n_targets: usize, levels: Levels, fock_cutoff: usize) -> Result<Self, HilbertError> {
        if fock_cutoff == 0 {
            return Err(HilbertError::InvalidDimension(1));
        }
        Self::build(n_targets, levels, Some(fock_cutoff))
    }

    /// The qubit register alone, used for ideal gate unitaries.
    pub fn qutrits_only(n_targets: usize, levels: Levels) -> Result<Self, HilbertError> {
        Self::build(n_targets, levels, None)
    }

    fn build(
        n_targets: usize,
        levels: Levels,
        fock_cutoff: Option<usize>,
    ) -> Result<Self, HilbertError> {
        if n_targets == 0 {
            return Err(HilbertError::NoTargets);
        }
        let mut dims = vec![levels.dim(); n_targets + 1];
        if let Some(cutoff) = fock_cutoff {
            dims.extend(std::iter::repeat(cutoff + 1).take(n_targets));
        }
        let mut strides = vec![1; dims.len()];
        for s in (0..dims.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        Ok(Self {
            n_targets,
            levels,
            fock_cutoff,
            dims,
            strides,
        })
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    pub fn fock_cutoff(&self) -> Option<usize> {
        self.fock_cutoff
    }

    pub fn has_cavities(&self) -> bool {
        self.fock_cutoff.is_some()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Dimension of the qubit register (all qutrits, no cavities).
    pub fn register_dim(&self) -> usize {
        self.levels.dim().pow(self.n_targets as u32 + 1)
    }

    /// Subsystem index of a qutrit.
    ///
    /// Panics if a target index is outside `1..=n_targets`.
    pub fn qutrit(&self, q: Qutrit) -> usize {
        match q {
            Qutrit::Coupler => 0,
            Qutrit::Target(j) => {
                assert!(j >= 1 && j <= self.n_targets, "target {j} out of range");
                j
            }
        }
    }

    /// Subsystem index of cavity `j` (1-based).
    ///
    /// Panics if the layout has no cavities or `j` is out of range.
    pub fn cavity(&self, j: usize) -> usize {
        assert!(self.has_cavities(), "layout has no cavities");
        assert!(j >= 1 && j <= self.n_targets, "cavity {j} out of range");
        self.n_targets + j
    }

    /// All qutrits in subsystem order.
    pub fn qutrits(&self) -> impl Iterator<Item = Qutrit> {
        std::iter::once(Qutrit::Coupler).chain((1..=self.n_targets).map(Qutrit::Target))
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for (s, &dim) in self.dims.iter().enumerate().rev() {
            digits[s] = index % dim;
            index /= dim;
        }
        digits
    }

    /// Digit of subsystem `s` in basis index `index`.
    pub fn digit(&self, index: usize, s: usize) -> usize {
        (index / self.strides[s]) % self.dims[s]
    }

    /// Basis index of `register_index ⊗ |0...0>_cavities`.
    pub fn with_vacuum(&self, register_index: usize) -> usize {
        let cavity_block: usize = self.dims[self.n_targets + 1..].iter().product();
        register_index * cavity_block
    }
}
