//! Complex axpy loops shared by the dense Lindblad kernels. On x86-64 an
//! AVX2/FMA path is chosen at runtime; elsewhere the scalar loops run.

use super::C64;

/// `y += a * x`.
#[inline]
pub(crate) fn caxpy(a: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    #[cfg(target_arch = "x86_64")]
    if has_avx2_fma() {
        // SAFETY: the required CPU features were detected above.
        unsafe { avx::caxpy(a, x, y) };
        return;
    }
    for (d, s) in y.iter_mut().zip(x) {
        *d += a * s;
    }
}

/// `y[i] += a * w[i] * x[i]`.
#[inline]
pub(crate) fn caxpy_weighted(a: C64, w: &[C64], x: &[C64], y: &mut [C64]) {
    debug_assert!(x.len() == y.len() && w.len() == y.len());
    #[cfg(target_arch = "x86_64")]
    if has_avx2_fma() {
        // SAFETY: the required CPU features were detected above.
        unsafe { avx::caxpy_weighted(a, w, x, y) };
        return;
    }
    for ((d, s), wi) in y.iter_mut().zip(x).zip(w) {
        *d += a * wi * s;
    }
}

/// `y = sum_k coeffs[k] * src[offsets[k]..offsets[k] + y.len()]`.
pub(crate) fn combine_rows(coeffs: &[C64], offsets: &[usize], src: &[C64], y: &mut [C64]) {
    assert_eq!(coeffs.len(), offsets.len());
    assert!(offsets.iter().all(|&o| o + y.len() <= src.len()));
    #[cfg(target_arch = "x86_64")]
    if has_avx2_fma() {
        // SAFETY: features detected above; every source window was bounds checked.
        unsafe { avx::combine_rows(coeffs, offsets, src, y) };
        return;
    }
    for (i, d) in y.iter_mut().enumerate() {
        *d = coeffs
            .iter()
            .zip(offsets)
            .map(|(&a, &o)| a * src[o + i])
            .sum();
    }
}

#[cfg(target_arch = "x86_64")]
#[inline]
fn has_avx2_fma() -> bool {
    std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma")
}

#[cfg(target_arch = "x86_64")]
mod avx {
    use super::C64;
    use std::arch::x86_64::*;

    /// Product of packed complex pairs `b * x` given `b` split into
    /// duplicated real and imaginary lanes.
    #[inline(always)]
    unsafe fn cmul(br: __m256d, bi: __m256d, x: __m256d) -> __m256d {
        let swapped = _mm256_permute_pd(x, 0b0101);
        _mm256_fmaddsub_pd(br, x, _mm256_mul_pd(bi, swapped))
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn caxpy(a: C64, x: &[C64], y: &mut [C64]) {
        let n = x.len().min(y.len());
        let xp = x.as_ptr() as *const f64;
        let yp = y.as_mut_ptr() as *mut f64;
        let ar = _mm256_set1_pd(a.re);
        let ai = _mm256_set1_pd(a.im);
        let mut i = 0;
        while i + 4 <= n {
            let s0 = _mm256_loadu_pd(xp.add(2 * i));
            let s1 = _mm256_loadu_pd(xp.add(2 * i + 4));
            let d0 = _mm256_loadu_pd(yp.add(2 * i));
            let d1 = _mm256_loadu_pd(yp.add(2 * i + 4));
            _mm256_storeu_pd(yp.add(2 * i), _mm256_add_pd(d0, cmul(ar, ai, s0)));
            _mm256_storeu_pd(yp.add(2 * i + 4), _mm256_add_pd(d1, cmul(ar, ai, s1)));
            i += 4;
        }
        while i + 2 <= n {
            let s = _mm256_loadu_pd(xp.add(2 * i));
            let d = _mm256_loadu_pd(yp.add(2 * i));
            _mm256_storeu_pd(yp.add(2 * i), _mm256_add_pd(d, cmul(ar, ai, s)));
            i += 2;
        }
        for k in i..n {
            y[k] += a * x[k];
        }
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn combine_rows(
        coeffs: &[C64],
        offsets: &[usize],
        src: &[C64],
        y: &mut [C64],
    ) {
        let n = y.len();
        let sp = src.as_ptr() as *const f64;
        let yp = y.as_mut_ptr() as *mut f64;
        let mut i = 0;
        while i + 4 <= n {
            let (mut a0, mut b0) = (_mm256_setzero_pd(), _mm256_setzero_pd());
            let (mut a1, mut b1) = (_mm256_setzero_pd(), _mm256_setzero_pd());
            for (c, &off) in coeffs.iter().zip(offsets) {
                let cr = _mm256_set1_pd(c.re);
                let ci = _mm256_set1_pd(c.im);
                let p = sp.add(2 * (off + i));
                let s0 = _mm256_loadu_pd(p);
                let s1 = _mm256_loadu_pd(p.add(4));
                a0 = _mm256_fmadd_pd(cr, s0, a0);
                b0 = _mm256_fmadd_pd(ci, _mm256_permute_pd(s0, 0b0101), b0);
                a1 = _mm256_fmadd_pd(cr, s1, a1);
                b1 = _mm256_fmadd_pd(ci, _mm256_permute_pd(s1, 0b0101), b1);
            }
            _mm256_storeu_pd(yp.add(2 * i), _mm256_addsub_pd(a0, b0));
            _mm256_storeu_pd(yp.add(2 * i + 4), _mm256_addsub_pd(a1, b1));
            i += 4;
        }
        for k in i..n {
            y[k] = coeffs
                .iter()
                .zip(offsets)
                .map(|(&a, &o)| a * src[o + k])
                .sum();
        }
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn caxpy_weighted(a: C64, w: &[C64], x: &[C64], y: &mut [C64]) {
        let n = x.len().min(y.len()).min(w.len());
        let xp = x.as_ptr() as *const f64;
        let wp = w.as_ptr() as *const f64;
        let yp = y.as_mut_ptr() as *mut f64;
        let ar = _mm256_set1_pd(a.re);
        let ai = _mm256_set1_pd(a.im);
        let mut i = 0;
        while i + 2 <= n {
            let b = cmul(ar, ai, _mm256_loadu_pd(wp.add(2 * i)));
            let br = _mm256_movedup_pd(b);
            let bi = _mm256_permute_pd(b, 0b1111);
            let s = _mm256_loadu_pd(xp.add(2 * i));
            let d = _mm256_loadu_pd(yp.add(2 * i));
            _mm256_storeu_pd(yp.add(2 * i), _mm256_add_pd(d, cmul(br, bi, s)));
            i += 2;
        }
        for k in i..n {
            y[k] += a * w[k] * x[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: f64) -> Vec<C64> {
        (0..n)
            .map(|k| C64::new((k as f64 * seed).sin(), (k as f64 + seed).cos()))
            .collect()
    }

    #[test]
    fn kernels_match_scalar_reference() {
        for n in [0, 1, 2, 3, 5, 8, 13] {
            let a = C64::new(0.3, -1.7);
            let x = sample(n, 1.3);
            let w = sample(n, 0.4);
            let y0 = sample(n, 2.9);
            let mut y = y0.clone();
            caxpy(a, &x, &mut y);
            for k in 0..n {
                assert!((y[k] - (y0[k] + a * x[k])).norm() < 1e-14);
            }
            let mut y = y0.clone();
            caxpy_weighted(a, &w, &x, &mut y);
            for k in 0..n {
                assert!((y[k] - (y0[k] + a * w[k] * x[k])).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn row_combination_matches_scalar_reference() {
        let src = sample(64, 0.9);
        let coeffs = [
            C64::new(0.5, 1.0),
            C64::new(-2.0, 0.25),
            C64::new(0.0, -1.0),
        ];
        let offsets = [3, 40, 17];
        for n in [0, 1, 4, 7, 11] {
            let mut y = vec![C64::new(9.0, 9.0); n];
            combine_rows(&coeffs, &offsets, &src, &mut y);
            for k in 0..n {
                let expect: C64 = coeffs
                    .iter()
                    .zip(&offsets)
                    .map(|(a, &o)| a * src[o + k])
                    .sum();
                assert!((y[k] - expect).norm() < 1e-13);
            }
        }
    }
}
