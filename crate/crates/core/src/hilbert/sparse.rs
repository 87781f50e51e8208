use super::kernels::{caxpy, caxpy_weighted, combine_rows};
use super::{HilbertError, Matrix, C64, ZERO};

/// Square compressed-sparse-row complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

/// Width of the column tiles used by [`CsrMatrix::mul_dense_into`].
const COL_TILE: usize = 1024;

impl CsrMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut entries: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        let mut kept_cols = Vec::with_capacity(cols.len());
        let mut kept_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != ZERO {
                row_ptr[r + 1] += 1;
                kept_cols.push(c);
                kept_vals.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols: kept_cols,
            vals: kept_vals,
        }
    }

    pub fn from_dense(m: &Matrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|r| (0..n).map(move |c| (r, c, m[(r, c)]))),
        )
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.cols[span.clone()], &self.vals[span])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.position(r, c).map(|k| self.vals[k]).unwrap_or(ZERO)
    }

    /// Index of entry `(r, c)` in the value array, if stored.
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let start = self.row_ptr[r];
        self.cols[start..self.row_ptr[r + 1]]
            .binary_search(&c)
            .ok()
            .map(|k| start + k)
    }

    /// Stored values in pattern order. Writing zeros keeps the pattern.
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.vals
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, HilbertError> {
        self.check_dim(other)?;
        Ok(Self::from_triplets(
            self.dim,
            self.triplets().chain(other.triplets()),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, HilbertError> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, HilbertError> {
        self.check_dim(other)?;
        let mut acc = vec![ZERO; self.dim];
        let mut touched = Vec::new();
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (&k, &a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(k);
                for (&c, &b) in ocols.iter().zip(ovals) {
                    if acc[c] == ZERO {
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                triplets.push((r, c, acc[c]));
                acc[c] = ZERO;
            }
            touched.clear();
        }
        Ok(Self::from_triplets(self.dim, triplets))
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Result<Self, HilbertError> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M^dag|` over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<(), HilbertError> {
        let defect = self.hermitian_defect();
        if defect < tol {
            Ok(())
        } else {
            Err(HilbertError::NotHermitian(defect))
        }
    }

    pub fn mul_vec(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (r, o) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            *o = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    /// `out = scale * self * rho` for a dense row-major `dim x dim` operand.
    pub fn mul_dense_into(&self, scale: C64, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        assert_eq!(rho.len(), n * n);
        assert_eq!(out.len(), n * n);
        let coeffs: Vec<C64> = self.vals.iter().map(|&v| scale * v).collect();
        let mut offsets = vec![0; self.cols.len()];
        let mut start = 0;
        while start < n {
            let end = (start + COL_TILE).min(n);
            for (o, &k) in offsets.iter_mut().zip(&self.cols) {
                *o = k * n + start;
            }
            for r in 0..n {
                let span = self.row_ptr[r]..self.row_ptr[r + 1];
                combine_rows(
                    &coeffs[span.clone()],
                    &offsets[span],
                    rho,
                    &mut out[r * n + start..r * n + end],
                );
            }
            start = end;
        }
    }

    /// `Some` when every row and every column holds at most one entry, so
    /// `L rho L^dag` reduces to a weighted gather.
    pub fn as_monomial(&self) -> Option<MonomialMap> {
        let mut seen_col = vec![false; self.dim];
        let mut entries = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            match cols.len() {
                0 => {}
                1 => {
                    if std::mem::replace(&mut seen_col[cols[0]], true) {
                        return None;
                    }
                    entries.push((r, cols[0], vals[0]));
                }
                _ => return None,
            }
        }
        Some(MonomialMap::from_entries(self.dim, entries))
    }

    fn check_dim(&self, other: &Self) -> Result<(), HilbertError> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(HilbertError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            })
        }
    }
}

/// Operator with at most one entry per row and column, stored as
/// `(row, col, weight)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialMap {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
    runs: Vec<Run>,
    run_weights: Vec<C64>,
}

/// Stretch `dst..dst + len` of the column image read from `src..src + len`,
/// with conjugated weights at `run_weights[first..first + len]`. Short gaps
/// inside a stretch carry zero weight.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Run {
    dst: usize,
    src: usize,
    len: usize,
    first: usize,
    uniform: bool,
}

impl MonomialMap {
    fn from_entries(dim: usize, entries: Vec<(usize, usize, C64)>) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        let mut run_weights = Vec::with_capacity(entries.len());
        for &(r, c, w) in &entries {
            let extend = runs.last().and_then(|run| {
                let end = run.dst + run.len;
                let gap = r.checked_sub(end)?;
                (c + run.dst == run.src + r && gap <= (run.len / 2).max(1)).then_some(gap)
            });
            match extend {
                Some(gap) => {
                    let run = runs.last_mut().expect("run exists");
                    run_weights.extend(std::iter::repeat(ZERO).take(gap));
                    run_weights.push(w.conj());
                    run.len += gap + 1;
                    run.uniform &= gap == 0 && run_weights[run.first] == w.conj();
                }
                None => {
                    runs.push(Run {
                        dst: r,
                        src: c,
                        len: 1,
                        first: run_weights.len(),
                        uniform: true,
                    });
                    run_weights.push(w.conj());
                }
            }
        }
        Self {
            dim,
            entries,
            runs,
            run_weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    /// `out += scale * L rho L^dag` for dense row-major `rho`.
    pub fn add_sandwich(&self, scale: f64, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for &(r, src_r, w) in &self.entries {
            let a = w * scale;
            let src = &rho[src_r * n..(src_r + 1) * n];
            let dst = &mut out[r * n..(r + 1) * n];
            for run in &self.runs {
                let d = &mut dst[run.dst..run.dst + run.len];
                let s = &src[run.src..run.src + run.len];
                if run.uniform {
                    caxpy(a * self.run_weights[run.first], s, d);
                } else {
                    caxpy_weighted(a, &self.run_weights[run.first..run.first + run.len], s, d);
                }
            }
        }
    }
}
