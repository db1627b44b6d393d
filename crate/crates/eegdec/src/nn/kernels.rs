//! Inner-loop kernels shared by the layers. Everything is written in
//! axpy/elementwise form so the f32 instantiation vectorizes without
//! reassociating reductions (keeps results bit-deterministic).

use super::tensor::Scalar;

#[inline]
pub(crate) fn axpy<F: Scalar>(a: F, x: &[F], y: &mut [F]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub(crate) fn dot<F: Scalar>(x: &[F], y: &[F]) -> F {
    debug_assert_eq!(x.len(), y.len());
    let mut s = F::zero();
    for (&a, &b) in x.iter().zip(y) {
        s += a * b;
    }
    s
}

/// C[m×n] += A[m×k] · B[k×n], all row-major slices.
pub(crate) fn mm_nn<F: Scalar>(m: usize, k: usize, n: usize, a: &[F], b: &[F], c: &mut [F]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    for i in 0..m {
        let crow = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            axpy(a[i * k + p], &b[p * n..(p + 1) * n], crow);
        }
    }
}

/// C[m×n] += A[m×k] · B[n×k]ᵀ.
pub(crate) fn mm_nt<F: Scalar>(m: usize, k: usize, n: usize, a: &[F], b: &[F], c: &mut [F]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(c.len(), m * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        for j in 0..n {
            c[i * n + j] += dot(arow, &b[j * k..(j + 1) * k]);
        }
    }
}

/// C[m×n] += A[k×m]ᵀ · B[k×n].
pub(crate) fn mm_tn<F: Scalar>(m: usize, k: usize, n: usize, a: &[F], b: &[F], c: &mut [F]) {
    debug_assert_eq!(a.len(), k * m);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    for p in 0..k {
        for i in 0..m {
            axpy(a[p * m + i], &b[p * n..(p + 1) * n], &mut c[i * n..(i + 1) * n]);
        }
    }
}

/// Row-wise softmax in place over the last dimension (f64 accumulation).
pub(crate) fn softmax_rows<F: Scalar>(data: &mut [F], row_len: usize) {
    debug_assert_eq!(data.len() % row_len, 0);
    for row in data.chunks_mut(row_len) {
        let max = row.iter().cloned().fold(F::neg_infinity(), F::max);
        let mut sum = 0.0f64;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += v.as_f64();
        }
        let inv = F::from_f64(1.0 / sum);
        for v in row.iter_mut() {
            *v *= inv;
        }
    }
}

/// Gradient through a row-wise softmax with saved output `y`:
/// dx = y ⊙ (dy − Σ dy⊙y).
pub(crate) fn softmax_rows_backward<F: Scalar>(
    y: &[F],
    dy: &[F],
    dx: &mut [F],
    row_len: usize,
) {
    for ((yrow, dyrow), dxrow) in y
        .chunks(row_len)
        .zip(dy.chunks(row_len))
        .zip(dx.chunks_mut(row_len))
    {
        let mut s = 0.0f64;
        for (&yv, &dyv) in yrow.iter().zip(dyrow) {
            s += (yv * dyv).as_f64();
        }
        let s = F::from_f64(s);
        for ((dxv, &yv), &dyv) in dxrow.iter_mut().zip(yrow).zip(dyrow) {
            *dxv = yv * (dyv - s);
        }
    }
}
