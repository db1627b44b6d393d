//! Small dense linear algebra in f64: symmetric eigendecomposition (cyclic
//! Jacobi), Cholesky factorization, triangular solves, and the
//! symmetric-definite generalized eigenproblem via Cholesky whitening.
//!
//! Matrices here are at most channels × channels (58 × 58), so an O(n^3)
//! Jacobi sweep is plenty and keeps the crate free of BLAS/LAPACK bindings.

use ndarray::{Array1, Array2};

use crate::error::{EegError, Result};

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue,
/// eigenvectors as columns.
pub fn jacobi_eigh(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(EegError::ShapeMismatch(format!(
            "jacobi_eigh expects a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(EegError::Numeric("non-finite entry in matrix".into()));
    }

    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);

    let off_norm = |m: &Array2<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[[i, j]] * m[[i, j]];
            }
        }
        s.sqrt()
    };
    let frob = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-14 * frob;

    for _sweep in 0..100 {
        if off_norm(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                // Stable rotation angle (Golub & Van Loan).
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());

    let vals = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vecs = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vecs[[r, dst]] = v[[r, src]];
        }
    }
    Ok((vals, vecs))
}

/// Lower-triangular Cholesky factor L with A = L L^T.
///
/// Fails with a numeric error if the matrix is not positive definite.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(EegError::ShapeMismatch("cholesky expects a square matrix".into()));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return Err(EegError::Numeric(format!(
                        "cholesky pivot {sum:e} at row {i}: matrix not positive definite"
                    )));
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solve L x = b for lower-triangular L.
pub fn solve_lower(l: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[[i, k]] * x[k];
        }
        x[i] /= l[[i, i]];
    }
    x
}

/// Solve L^T x = b for lower-triangular L.
pub fn solve_lower_transpose(l: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= l[[k, i]] * x[k];
        }
        x[i] /= l[[i, i]];
    }
    x
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let l = cholesky(a)?;
    let mut inv = Array2::<f64>::zeros((n, n));
    let mut e = vec![0.0; n];
    for col in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[col] = 1.0;
        let y = solve_lower(&l, &e);
        let x = solve_lower_transpose(&l, &y);
        for row in 0..n {
            inv[[row, col]] = x[row];
        }
    }
    // Symmetrize against round-off.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (inv[[i, j]] + inv[[j, i]]);
            inv[[i, j]] = m;
            inv[[j, i]] = m;
        }
    }
    Ok(inv)
}

/// Generalized symmetric-definite eigenproblem A w = λ B w with B positive
/// definite, solved by Cholesky whitening: B = L L^T, C = L⁻¹ A L⁻ᵀ,
/// C = V D Vᵀ, W = L⁻ᵀ V.
///
/// Returns `(eigenvalues, W)` sorted by descending eigenvalue, eigenvectors
/// as columns of W (B-orthonormal: Wᵀ B W = I).
pub fn generalized_eigh(a: &Array2<f64>, b: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if b.nrows() != n || b.ncols() != n || a.ncols() != n {
        return Err(EegError::ShapeMismatch(
            "generalized_eigh expects square matrices of equal size".into(),
        ));
    }
    let l = cholesky(b)?;

    // C = L⁻¹ A L⁻ᵀ, built column by column: first Y = L⁻¹ A, then C = Y L⁻ᵀ
    // i.e. Cᵀ = L⁻¹ Yᵀ (C symmetric).
    let mut y = Array2::<f64>::zeros((n, n));
    for col in 0..n {
        let acol: Vec<f64> = (0..n).map(|r| a[[r, col]]).collect();
        let sol = solve_lower(&l, &acol);
        for r in 0..n {
            y[[r, col]] = sol[r];
        }
    }
    let mut c = Array2::<f64>::zeros((n, n));
    for row in 0..n {
        let yrow: Vec<f64> = (0..n).map(|cidx| y[[row, cidx]]).collect();
        let sol = solve_lower(&l, &yrow);
        for cidx in 0..n {
            c[[row, cidx]] = sol[cidx];
        }
    }
    // Symmetrize against round-off before Jacobi.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (c[[i, j]] + c[[j, i]]);
            c[[i, j]] = m;
            c[[j, i]] = m;
        }
    }

    let (vals, vecs) = jacobi_eigh(&c)?;
    let mut w = Array2::<f64>::zeros((n, n));
    for col in 0..n {
        let vcol: Vec<f64> = (0..n).map(|r| vecs[[r, col]]).collect();
        let sol = solve_lower_transpose(&l, &vcol);
        for r in 0..n {
            w[[r, col]] = sol[r];
        }
    }
    Ok((vals, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                a[[i, j]] = v;
                a[[j, i]] = v;
            }
        }
        a
    }

    fn random_spd(n: usize, seed: u64) -> Array2<f64> {
        let m = random_symmetric(n, seed);
        let mut a = m.dot(&m.t());
        for i in 0..n {
            a[[i, i]] += 0.5;
        }
        a
    }

    #[test]
    fn jacobi_diagonal_matrix() {
        let a = array![[3.0, 0.0], [0.0, 7.0]];
        let (vals, vecs) = jacobi_eigh(&a).unwrap();
        assert!((vals[0] - 7.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        assert!(vecs[[1, 0]].abs() > 0.999);
    }

    #[test]
    fn jacobi_reconstructs_random_matrices() {
        for seed in 0..4u64 {
            let n = 7;
            let a = random_symmetric(n, seed);
            let (vals, v) = jacobi_eigh(&a).unwrap();
            // residual A v_i - λ_i v_i
            for col in 0..n {
                for row in 0..n {
                    let mut av = 0.0;
                    for k in 0..n {
                        av += a[[row, k]] * v[[k, col]];
                    }
                    assert!(
                        (av - vals[col] * v[[row, col]]).abs() < 1e-9,
                        "eigen residual too large (seed {seed})"
                    );
                }
            }
            // orthonormal columns
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = (0..n).map(|k| v[[k, i]] * v[[k, j]]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-10);
                }
            }
            // eigenvalues descending
            for i in 1..n {
                assert!(vals[i - 1] >= vals[i] - 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_roundtrip_and_solves() {
        let a = random_spd(6, 11);
        let l = cholesky(&a).unwrap();
        let recon = l.dot(&l.t());
        for (x, y) in a.iter().zip(recon.iter()) {
            assert!((x - y).abs() < 1e-10);
        }
        let b: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let y = solve_lower(&l, &b);
        let x = solve_lower_transpose(&l, &y);
        // A x should equal b
        for i in 0..6 {
            let mut ax = 0.0;
            for j in 0..6 {
                ax += a[[i, j]] * x[j];
            }
            assert!((ax - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(cholesky(&a), Err(EegError::Numeric(_))));
    }

    #[test]
    fn spd_inverse_identity() {
        let a = random_spd(5, 3);
        let inv = spd_inverse(&a).unwrap();
        let prod = a.dot(&inv);
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn generalized_eigh_diagonal_case() {
        // A = diag(2/3, 1/3), B = I: plain eigenproblem.
        let a = array![[2.0 / 3.0, 0.0], [0.0, 1.0 / 3.0]];
        let b = Array2::<f64>::eye(2);
        let (vals, w) = generalized_eigh(&a, &b).unwrap();
        assert!((vals[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(w[[0, 0]].abs() > 0.999);
    }

    #[test]
    fn generalized_eigh_b_orthonormal_and_residual() {
        for seed in 0..3u64 {
            let n = 6;
            let a = random_symmetric(n, 100 + seed);
            let b = random_spd(n, 200 + seed);
            let (vals, w) = generalized_eigh(&a, &b).unwrap();
            // A w = λ B w
            for col in 0..n {
                for row in 0..n {
                    let mut aw = 0.0;
                    let mut bw = 0.0;
                    for k in 0..n {
                        aw += a[[row, k]] * w[[k, col]];
                        bw += b[[row, k]] * w[[k, col]];
                    }
                    assert!((aw - vals[col] * bw).abs() < 1e-8, "residual (seed {seed})");
                }
            }
            // Wᵀ B W = I
            let bw = b.dot(&w);
            let wtbw = w.t().dot(&bw);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((wtbw[[i, j]] - expect).abs() < 1e-8);
                }
            }
        }
    }
}
