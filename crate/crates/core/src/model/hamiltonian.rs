use crate::hilbert::{CsrMatrix, C64, ONE, ZERO};

/// `amplitude * exp(i * frequency * t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficient {
    pub amplitude: C64,
    pub frequency: f64,
}

impl Coefficient {
    pub fn constant(amplitude: C64) -> Self {
        Self {
            amplitude,
            frequency: 0.0,
        }
    }

    pub fn oscillating(amplitude: C64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
        }
    }

    pub fn at(&self, t: f64) -> C64 {
        if self.frequency == 0.0 {
            self.amplitude
        } else {
            self.amplitude * C64::from_polar(1.0, self.frequency * t)
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            amplitude: self.amplitude.conj(),
            frequency: -self.frequency,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub label: String,
    pub coeff: Coefficient,
    pub op: CsrMatrix,
}

/// `H(t) = Σ_k c_k(t) O_k`.
#[derive(Clone, Debug)]
pub struct TimeDependentHamiltonian {
    dim: usize,
    terms: Vec<Term>,
}

impl TimeDependentHamiltonian {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn push(&mut self, label: impl Into<String>, coeff: Coefficient, op: CsrMatrix) {
        assert_eq!(op.dim(), self.dim, "term dimension mismatch");
        if coeff.amplitude != ZERO && op.nnz() > 0 {
            self.terms.push(Term {
                label: label.into(),
                coeff,
                op,
            });
        }
    }

    /// Adds `c(t) X + h.c.`.
    pub fn push_with_adjoint(&mut self, label: &str, coeff: Coefficient, op: CsrMatrix) {
        let adj = op.adjoint();
        self.push(label, coeff, op);
        self.push(format!("{label}^dag"), coeff.conj(), adj);
    }

    pub fn extend(&mut self, other: TimeDependentHamiltonian) {
        assert_eq!(other.dim, self.dim, "dimension mismatch");
        self.terms.extend(other.terms);
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn at(&self, t: f64) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.dim,
            self.terms.iter().flat_map(|term| {
                let c = term.coeff.at(t);
                term.op.triplets().map(move |(r, col, v)| (r, col, c * v))
            }),
        )
    }

    pub fn compile(&self) -> CompiledOperator {
        CompiledOperator::new(self.dim, &self.terms)
    }
}

/// Fixed sparsity pattern covering every term, refilled per time point.
#[derive(Clone, Debug)]
pub struct CompiledOperator {
    pattern: CsrMatrix,
    coeffs: Vec<Coefficient>,
    slots: Vec<Vec<(usize, C64)>>,
}

impl CompiledOperator {
    fn new(dim: usize, terms: &[Term]) -> Self {
        let pattern = CsrMatrix::from_triplets(
            dim,
            terms
                .iter()
                .flat_map(|t| t.op.triplets().map(|(r, c, _)| (r, c, ONE))),
        );
        let slots = terms
            .iter()
            .map(|t| {
                t.op.triplets()
                    .map(|(r, c, v)| (pattern.position(r, c).expect("entry in pattern"), v))
                    .collect()
            })
            .collect();
        Self {
            pattern,
            coeffs: terms.iter().map(|t| t.coeff).collect(),
            slots,
        }
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn nnz(&self) -> usize {
        self.pattern.nnz()
    }

    /// Writes `H(t)` into `out`, which must come from [`Self::workspace`].
    pub fn evaluate_into(&self, t: f64, out: &mut CsrMatrix) {
        let vals = out.values_mut();
        vals.iter_mut().for_each(|v| *v = ZERO);
        for (coeff, slots) in self.coeffs.iter().zip(&self.slots) {
            let c = coeff.at(t);
            for &(pos, v) in slots {
                vals[pos] += c * v;
            }
        }
    }

    pub fn workspace(&self) -> CsrMatrix {
        self.pattern.clone()
    }

    pub fn evaluate(&self, t: f64) -> CsrMatrix {
        let mut out = self.workspace();
        self.evaluate_into(t, &mut out);
        out
    }
}
