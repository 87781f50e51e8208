use std::f64::consts::FRAC_1_SQRT_2;
use std::str::FromStr;

use super::{CsrMatrix, HilbertError, HilbertLayout, Levels, Matrix, C64, ONE, ZERO};

/// Truncated ladder operator with `(n-1, n)` entry `sqrt(n)`.
pub fn annihilation(dim: usize) -> Result<Matrix, HilbertError> {
    if dim < 2 {
        return Err(HilbertError::InvalidDimension(dim));
    }
    let mut a = Matrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn creation(dim: usize) -> Result<Matrix, HilbertError> {
    Ok(annihilation(dim)?.adjoint())
}

pub fn number(dim: usize) -> Result<Matrix, HilbertError> {
    if dim < 2 {
        return Err(HilbertError::InvalidDimension(dim));
    }
    Ok(Matrix::from_diagonal(&nalgebra::DVector::from_fn(
        dim,
        |n, _| C64::new(n as f64, 0.0),
    )))
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

pub fn dagger(m: &Matrix) -> Matrix {
    m.adjoint()
}

/// Single-qutrit operators in the `(|g>, |e>, |f>)` basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QutritOp {
    /// `|e><g|`
    SigmaPlus,
    /// `|g><e|`
    SigmaMinus,
    /// `|f><e|`
    SigmaFePlus,
    /// `|e><f|`
    SigmaFeMinus,
    /// `|g><f|`
    SigmaFgMinus,
    /// `|e><e|`
    SigmaEe,
    /// `|f><f|`
    SigmaFf,
    /// `|+><+| - |-><-|` with `|±> = (|e> ± |g>)/√2`.
    SigmaZRot,
    /// `|+><-|`
    SigmaPlusRot,
    /// `|-><+|`
    SigmaMinusRot,
}

impl QutritOp {
    pub const ALL: [QutritOp; 10] = [
        QutritOp::SigmaPlus,
        QutritOp::SigmaMinus,
        QutritOp::SigmaFePlus,
        QutritOp::SigmaFeMinus,
        QutritOp::SigmaFgMinus,
        QutritOp::SigmaEe,
        QutritOp::SigmaFf,
        QutritOp::SigmaZRot,
        QutritOp::SigmaPlusRot,
        QutritOp::SigmaMinusRot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QutritOp::SigmaPlus => "sigma_plus",
            QutritOp::SigmaMinus => "sigma_minus",
            QutritOp::SigmaFePlus => "sigma_fe_plus",
            QutritOp::SigmaFeMinus => "sigma_fe_minus",
            QutritOp::SigmaFgMinus => "sigma_fg_minus",
            QutritOp::SigmaEe => "sigma_ee",
            QutritOp::SigmaFf => "sigma_ff",
            QutritOp::SigmaZRot => "sigma_z_rot",
            QutritOp::SigmaPlusRot => "sigma_plus_rot",
            QutritOp::SigmaMinusRot => "sigma_minus_rot",
        }
    }

    fn needs_f(self) -> bool {
        matches!(
            self,
            QutritOp::SigmaFePlus
                | QutritOp::SigmaFeMinus
                | QutritOp::SigmaFgMinus
                | QutritOp::SigmaFf
        )
    }
}

impl FromStr for QutritOp {
    type Err = HilbertError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QutritOp::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HilbertError::UnknownKind(s.to_string()))
    }
}

const G: usize = 0;
const E: usize = 1;
const F: usize = 2;

/// `|+> = (|e> + |g>)/√2` as a column of length `levels.dim()`.
pub fn plus_ket(levels: Levels) -> Vec<C64> {
    let mut v = vec![ZERO; levels.dim()];
    v[G] = C64::new(FRAC_1_SQRT_2, 0.0);
    v[E] = C64::new(FRAC_1_SQRT_2, 0.0);
    v
}

/// `|-> = (|e> - |g>)/√2`.
pub fn minus_ket(levels: Levels) -> Vec<C64> {
    let mut v = vec![ZERO; levels.dim()];
    v[G] = C64::new(-FRAC_1_SQRT_2, 0.0);
    v[E] = C64::new(FRAC_1_SQRT_2, 0.0);
    v
}

fn outer(ket: &[C64], bra: &[C64]) -> Matrix {
    Matrix::from_fn(ket.len(), bra.len(), |r, c| ket[r] * bra[c].conj())
}

pub fn qutrit_operator(kind: QutritOp, levels: Levels) -> Result<Matrix, HilbertError> {
    if kind.needs_f() && levels == Levels::Two {
        return Err(HilbertError::NeedsThirdLevel(kind.name()));
    }
    let d = levels.dim();
    let unit = |r: usize, c: usize| {
        let mut m = Matrix::zeros(d, d);
        m[(r, c)] = ONE;
        m
    };
    let plus = plus_ket(levels);
    let minus = minus_ket(levels);
    Ok(match kind {
        QutritOp::SigmaPlus => unit(E, G),
        QutritOp::SigmaMinus => unit(G, E),
        QutritOp::SigmaFePlus => unit(F, E),
        QutritOp::SigmaFeMinus => unit(E, F),
        QutritOp::SigmaFgMinus => unit(G, F),
        QutritOp::SigmaEe => unit(E, E),
        QutritOp::SigmaFf => unit(F, F),
        QutritOp::SigmaZRot => outer(&plus, &plus) - outer(&minus, &minus),
        QutritOp::SigmaPlusRot => outer(&plus, &minus),
        QutritOp::SigmaMinusRot => outer(&minus, &plus),
    })
}

/// `exp(alpha a^dag - alpha^* a)` on a `dim`-level truncated oscillator.
///
/// Truncation error is small only while `|alpha|^2 + 4|alpha| <= dim`.
pub fn displacement(alpha: C64, dim: usize) -> Result<Matrix, HilbertError> {
    let a = annihilation(dim)?;
    let generator = a.adjoint() * alpha - a * alpha.conj();
    Ok(generator.exp())
}

/// Lifts `op` acting on subsystem `s` to the full layout.
pub fn embed(op: &Matrix, s: usize, layout: &HilbertLayout) -> Result<CsrMatrix, HilbertError> {
    embed_product(&[(s, op)], layout)
}

/// Tensor product of operators on distinct subsystems, identity elsewhere.
pub fn embed_product(
    factors: &[(usize, &Matrix)],
    layout: &HilbertLayout,
) -> Result<CsrMatrix, HilbertError> {
    let dims = layout.dims();
    let strides = layout.strides();
    for (i, &(s, op)) in factors.iter().enumerate() {
        if s >= dims.len() {
            return Err(HilbertError::SubsystemOutOfRange {
                index: s,
                count: dims.len(),
            });
        }
        if op.nrows() != dims[s] || op.ncols() != dims[s] {
            return Err(HilbertError::DimensionMismatch {
                expected: dims[s],
                found: op.nrows(),
            });
        }
        if factors[..i].iter().any(|&(t, _)| t == s) {
            return Err(HilbertError::RepeatedSubsystem(s));
        }
    }
    let total = layout.total_dim();
    let mut triplets = Vec::new();
    // (row offset, value) pairs for the acted-on digits of one column.
    let mut partial: Vec<(usize, C64)> = Vec::new();
    let mut next: Vec<(usize, C64)> = Vec::new();
    for col in 0..total {
        partial.clear();
        partial.push((col, ONE));
        for &(s, op) in factors {
            let cd = (col / strides[s]) % dims[s];
            next.clear();
            for &(row, val) in &partial {
                let base = row - cd * strides[s];
                for rd in 0..dims[s] {
                    let m = op[(rd, cd)];
                    if m != ZERO {
                        next.push((base + rd * strides[s], val * m));
                    }
                }
            }
            std::mem::swap(&mut partial, &mut next);
        }
        triplets.extend(partial.iter().map(|&(row, v)| (row, col, v)));
    }
    Ok(CsrMatrix::from_triplets(total, triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Qutrit;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn smallest_ladder() {
        let a = annihilation(2).unwrap();
        assert_eq!(a, Matrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]));
        assert_eq!(annihilation(1), Err(HilbertError::InvalidDimension(1)));
        assert_eq!(annihilation(0), Err(HilbertError::InvalidDimension(0)));
    }

    #[test]
    fn ladder_entry_sqrt2() {
        let a = annihilation(3).unwrap();
        assert!((a[(1, 2)].re - 1.41421356).abs() < 1e-8);
    }

    #[test]
    fn number_operator_from_ladder() {
        let a = annihilation(4).unwrap();
        let n = a.adjoint() * &a;
        let expect = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.0),
            c(1.0),
            c(2.0),
            c(3.0),
        ]));
        assert!((n - expect.clone()).norm() < 1e-14);
        assert!((number(4).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn qutrit_matrices() {
        let sp = qutrit_operator(QutritOp::SigmaPlus, Levels::Three).unwrap();
        assert_eq!(sp[(1, 0)], ONE);
        assert_eq!(sp.iter().filter(|v| **v != ZERO).count(), 1);
        let ff = qutrit_operator(QutritOp::SigmaFf, Levels::Three).unwrap();
        assert_eq!(
            ff,
            Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ZERO, ZERO, ONE]))
        );
        let sz = qutrit_operator(QutritOp::SigmaZRot, Levels::Three).unwrap();
        let expect =
            Matrix::from_row_slice(3, 3, &[ZERO, ONE, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO]);
        assert!((sz - expect).norm() < 1e-15);
    }

    #[test]
    fn rotated_sigma_z_eigenvectors() {
        for levels in [Levels::Two, Levels::Three] {
            let sz = qutrit_operator(QutritOp::SigmaZRot, levels).unwrap();
            let plus = nalgebra::DVector::from_vec(plus_ket(levels));
            let minus = nalgebra::DVector::from_vec(minus_ket(levels));
            assert!((&sz * &plus - &plus).norm() < 1e-15);
            assert!((&sz * &minus + &minus).norm() < 1e-15);
        }
    }

    #[test]
    fn rotated_decomposition_of_ladder() {
        // sigma^- = (sz + s+ - s-)/2 in the rotated basis.
        let lv = Levels::Three;
        let q = |k| qutrit_operator(k, lv).unwrap();
        let lhs = q(QutritOp::SigmaMinus);
        let rhs = (q(QutritOp::SigmaZRot) + q(QutritOp::SigmaPlusRot) - q(QutritOp::SigmaMinusRot))
            * c(0.5);
        assert!((lhs - rhs).norm() < 1e-15);
        let lhs = q(QutritOp::SigmaPlus);
        let rhs = (q(QutritOp::SigmaZRot) - q(QutritOp::SigmaPlusRot) + q(QutritOp::SigmaMinusRot))
            * c(0.5);
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn ladder_pairs_are_adjoints() {
        let q = |k| qutrit_operator(k, Levels::Three).unwrap();
        assert_eq!(q(QutritOp::SigmaPlus).adjoint(), q(QutritOp::SigmaMinus));
        assert_eq!(
            q(QutritOp::SigmaFePlus).adjoint(),
            q(QutritOp::SigmaFeMinus)
        );
        assert_eq!(
            q(QutritOp::SigmaPlusRot).adjoint(),
            q(QutritOp::SigmaMinusRot)
        );
        assert_eq!(creation(5).unwrap(), annihilation(5).unwrap().adjoint());
    }

    #[test]
    fn kind_names_parse() {
        for k in QutritOp::ALL {
            assert_eq!(k.name().parse::<QutritOp>().unwrap(), k);
        }
        assert!(matches!(
            "sigma_q".parse::<QutritOp>(),
            Err(HilbertError::UnknownKind(_))
        ));
        assert!(matches!(
            qutrit_operator(QutritOp::SigmaFf, Levels::Two),
            Err(HilbertError::NeedsThirdLevel(_))
        ));
    }

    #[test]
    fn displacement_of_zero_is_identity() {
        let d = displacement(ZERO, 12).unwrap();
        assert!((d - Matrix::identity(12, 12)).norm() < 1e-15);
    }

    #[test]
    fn embed_identity_and_trace() {
        let layout = HilbertLayout::new(2, Levels::Three, 2).unwrap();
        let total = layout.total_dim();
        for s in 0..layout.n_subsystems() {
            let id = embed(&identity(layout.dims()[s]), s, &layout).unwrap();
            assert_eq!(id, CsrMatrix::identity(total));
        }
        let a = annihilation(3).unwrap() + number(3).unwrap() * C64::new(0.3, 0.0);
        let s = layout.cavity(2);
        let big = embed(&a, s, &layout).unwrap();
        let expect = a.trace() * (total / 3) as f64;
        assert!((big.trace() - expect).norm() < 1e-12);
    }

    #[test]
    fn embed_dimension_mismatch() {
        let layout = HilbertLayout::new(1, Levels::Two, 3).unwrap();
        let err = embed(&annihilation(3).unwrap(), layout.cavity(1), &layout).unwrap_err();
        assert_eq!(
            err,
            HilbertError::DimensionMismatch {
                expected: 4,
                found: 3
            }
        );
        assert!(embed(&identity(2), 9, &layout).is_err());
    }

    #[test]
    fn embed_matches_kronecker() {
        let layout = HilbertLayout::new(1, Levels::Two, 2).unwrap();
        let sm = qutrit_operator(QutritOp::SigmaMinus, Levels::Two).unwrap();
        let a = annihilation(3).unwrap();
        let ad = a.adjoint();
        let got = embed_product(
            &[
                (layout.qutrit(Qutrit::Target(1)), &sm),
                (layout.cavity(1), &ad),
            ],
            &layout,
        )
        .unwrap()
        .to_dense();
        let expect = identity(2).kronecker(&sm).kronecker(&ad);
        assert!((got - expect).norm() < 1e-15);
    }
}
