use super::{HilbertError, Matrix, C64, ZERO};

const NORM_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;
const MIN_EIG_TOL: f64 = -1e-6;

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self, HilbertError> {
        let norm = norm(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::NotNormalized(norm));
        }
        Ok(Self { amps })
    }

    pub fn normalized(mut amps: Vec<C64>) -> Result<Self, HilbertError> {
        let norm = norm(&amps);
        if norm == 0.0 || !norm.is_finite() {
            return Err(HilbertError::NotNormalized(norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amps })
    }

    /// Wraps amplitudes without the norm check; the integrator reports drift
    /// itself.
    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `self ⊗ other` with `self` as the slow index.
    pub fn kron(&self, other: &StateVector) -> StateVector {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Self { amps }
    }
}

fn norm(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Density matrix stored dense and row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self, HilbertError> {
        if data.len() != dim * dim {
            return Err(HilbertError::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let rho = Self { dim, data };
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(HilbertError::InvalidDensity(format!("trace {tr}")));
        }
        let defect = rho.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(HilbertError::InvalidDensity(format!(
                "Hermitian defect {defect:e}"
            )));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < MIN_EIG_TOL {
            return Err(HilbertError::InvalidDensity(format!(
                "min eigenvalue {min_eig:e}"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let dim = psi.dim();
        let a = psi.amps();
        let data = (0..dim * dim)
            .map(|k| a[k / dim] * a[k % dim].conj())
            .collect();
        Self { dim, data }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, psi: &StateVector) -> C64 {
        let a = psi.amps();
        let n = self.dim;
        (0..n)
            .map(|r| {
                let row: C64 = self.data[r * n..(r + 1) * n]
                    .iter()
                    .zip(a)
                    .map(|(x, b)| x * b)
                    .sum();
                a[r].conj() * row
            })
            .sum()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}
