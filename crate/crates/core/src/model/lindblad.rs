//! Master-equation right-hand side.
//!
//! The generator is evaluated as `M = -iKρ + ½ Σ γ LρL†` with the non-Hermitian
//! `K = H - (i/2) Σ γ L†L`, followed by `dρ = M + M†`. That costs one sparse
//! times dense product per call plus cheap gathers for the jump terms.

use super::hamiltonian::{Coefficient, CompiledOperator, TimeDependentHamiltonian};
use super::params::{DeviceParams, NoiseParams};
use super::{HamiltonianModel, ModelError};
use crate::hilbert::{
    annihilation, embed, qutrit_operator, CsrMatrix, DensityMatrix, HilbertLayout, Levels, Matrix,
    MonomialMap, QutritOp, C64, ZERO,
};

#[derive(Clone, Debug)]
pub struct CollapseOp {
    pub label: String,
    pub rate: f64,
    pub op: CsrMatrix,
}

/// Decay and dephasing channels with nonzero rate. `|f>` channels are
/// dropped in two-level mode.
pub fn collapse_operators(
    np: &NoiseParams,
    layout: &HilbertLayout,
) -> Result<Vec<CollapseOp>, ModelError> {
    let n = layout.n_targets();
    np.validate(n)?;
    let mut out = Vec::new();
    let mut push = |label: String, rate: f64, op: CsrMatrix| {
        if rate > 0.0 {
            out.push(CollapseOp { label, rate, op });
        }
    };
    if let Some(cutoff) = layout.fock_cutoff() {
        let a = annihilation(cutoff + 1)?;
        for j in 1..=n {
            push(
                format!("a{j}"),
                np.kappa[j - 1],
                embed(&a, layout.cavity(j), layout)?,
            );
        }
    }
    let three = layout.levels() == Levels::Three;
    for (idx, l) in layout.qutrits().enumerate() {
        let s = layout.qutrit(l);
        let op = |kind| -> Result<CsrMatrix, ModelError> {
            Ok(embed(&qutrit_operator(kind, layout.levels())?, s, layout)?)
        };
        push(
            format!("s-[{l:?}]"),
            np.gamma[idx],
            op(QutritOp::SigmaMinus)?,
        );
        push(
            format!("see[{l:?}]"),
            np.gamma_phi_e[idx],
            op(QutritOp::SigmaEe)?,
        );
        if three {
            push(
                format!("sfe-[{l:?}]"),
                np.gamma_fe[idx],
                op(QutritOp::SigmaFeMinus)?,
            );
            push(
                format!("sfg-[{l:?}]"),
                np.gamma_fg[idx],
                op(QutritOp::SigmaFgMinus)?,
            );
            push(
                format!("sff[{l:?}]"),
                np.gamma_phi_f[idx],
                op(QutritOp::SigmaFf)?,
            );
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Jump {
    Monomial(MonomialMap),
    General(CsrMatrix),
}

/// Reusable buffers for [`LindbladGenerator::rhs_into`].
#[derive(Clone, Debug)]
pub struct LindbladWorkspace {
    k: CsrMatrix,
    scratch: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    dim: usize,
    k: CompiledOperator,
    jumps: Vec<(f64, Jump)>,
}

impl LindbladGenerator {
    pub fn new(h: &TimeDependentHamiltonian, collapse: &[CollapseOp]) -> Result<Self, ModelError> {
        let dim = h.dim();
        let mut k = h.clone();
        let mut jumps = Vec::with_capacity(collapse.len());
        for c in collapse {
            if c.op.dim() != dim {
                return Err(crate::hilbert::HilbertError::DimensionMismatch {
                    expected: dim,
                    found: c.op.dim(),
                }
                .into());
            }
            let ldl = c.op.adjoint().matmul(&c.op)?;
            k.push(
                format!("-i/2 {} L†L", c.label),
                Coefficient::constant(C64::new(0.0, -0.5 * c.rate)),
                ldl,
            );
            let jump = match c.op.as_monomial() {
                Some(m) => Jump::Monomial(m),
                None => Jump::General(c.op.clone()),
            };
            jumps.push((c.rate, jump));
        }
        Ok(Self {
            dim,
            k: k.compile(),
            jumps,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn workspace(&self) -> LindbladWorkspace {
        let needs_scratch = self
            .jumps
            .iter()
            .any(|(_, j)| matches!(j, Jump::General(_)));
        LindbladWorkspace {
            k: self.k.workspace(),
            scratch: if needs_scratch {
                vec![ZERO; self.dim * self.dim]
            } else {
                Vec::new()
            },
        }
    }

    /// Writes `dρ/dt` at time `t` into `out`. Both buffers are row-major
    /// `dim x dim`; `rho` is assumed Hermitian.
    pub fn rhs_into(&self, t: f64, rho: &[C64], out: &mut [C64], ws: &mut LindbladWorkspace) {
        let n = self.dim;
        assert_eq!(rho.len(), n * n);
        assert_eq!(out.len(), n * n);
        self.k.evaluate_into(t, &mut ws.k);
        ws.k.mul_dense_into(C64::new(0.0, -1.0), rho, out);
        for (rate, jump) in &self.jumps {
            match jump {
                Jump::Monomial(m) => m.add_sandwich(0.5 * rate, rho, out),
                Jump::General(l) => general_sandwich(l, 0.5 * rate, rho, out, &mut ws.scratch),
            }
        }
        hermitian_complete(n, out);
    }

    pub fn rhs(&self, t: f64, rho: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; rho.len()];
        self.rhs_into(t, rho, &mut out, &mut self.workspace());
        out
    }
}

/// `out += scale L rho L†` for arbitrary sparse `L`.
fn general_sandwich(l: &CsrMatrix, scale: f64, rho: &[C64], out: &mut [C64], scratch: &mut [C64]) {
    let n = l.dim();
    l.mul_dense_into(C64::new(scale, 0.0), rho, scratch);
    for c in 0..n {
        let (cols, vals) = l.row(c);
        if cols.is_empty() {
            continue;
        }
        for r in 0..n {
            let x = &scratch[r * n..(r + 1) * n];
            let s: C64 = cols.iter().zip(vals).map(|(&k, v)| x[k] * v.conj()).sum();
            out[r * n + c] += s;
        }
    }
}

const BLOCK: usize = 64;

/// `m <- m + m†` in place.
fn hermitian_complete(n: usize, m: &mut [C64]) {
    for bi in (0..n).step_by(BLOCK) {
        let r_end = (bi + BLOCK).min(n);
        for bj in (bi..n).step_by(BLOCK) {
            let c_end = (bj + BLOCK).min(n);
            for r in bi..r_end {
                for c in r.max(bj)..c_end {
                    let v = m[r * n + c] + m[c * n + r].conj();
                    m[r * n + c] = v;
                    m[c * n + r] = v.conj();
                }
            }
        }
    }
}

/// `dρ/dt` for `model` with the given noise, built from scratch.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    t: f64,
    model: &dyn HamiltonianModel,
    p: &DeviceParams,
    np: &NoiseParams,
    layout: &HilbertLayout,
) -> Result<Matrix, ModelError> {
    if rho.dim() != layout.total_dim() {
        return Err(crate::hilbert::HilbertError::DimensionMismatch {
            expected: layout.total_dim(),
            found: rho.dim(),
        }
        .into());
    }
    let h = model.build(p, layout)?;
    let gen = LindbladGenerator::new(&h, &collapse_operators(np, layout)?)?;
    let d = gen.rhs(t, rho.data());
    Ok(Matrix::from_row_slice(rho.dim(), rho.dim(), &d))
}
