//! Small dense linear-algebra helpers shared across the crate.
//!
//! Problem sizes are tiny (K <= 8), so everything routes through
//! `nalgebra`'s dense factorizations.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// 1/2 * log2(det(M)) for a symmetric positive-definite matrix.
///
/// Uses the Cholesky factor: det(M) = prod(diag(L))^2, so the half
/// log-determinant is the sum of log2 of the diagonal entries of L.
pub fn half_log2_det_pd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = cholesky(m)?;
    Ok(chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|&d| d.log2())
        .sum::<f64>())
}

/// Cholesky factorization, mapping failure to [`Error::SigmaNotPd`].
pub fn cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or(Error::SigmaNotPd)
}

/// Largest absolute deviation from symmetry, `max |M_ij - M_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Largest absolute deviation from the identity matrix.
pub fn identity_residual(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - target).abs());
        }
    }
    worst
}

/// Spectral condition number sigma_max / sigma_min (infinite for singular input).
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = jacobi_svd(m).singular_values;
    let lo = *sv.last().expect("non-empty matrix");
    let hi = sv[0];
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Thin SVD of a square matrix, `M = U diag(sigma) V^T` with `sigma`
/// descending.
pub struct JacobiSvd {
    /// Singular values, largest first.
    pub singular_values: Vec<f64>,
    /// Left singular vectors as columns.
    pub u: DMatrix<f64>,
    /// Right singular vectors as columns.
    pub v: DMatrix<f64>,
}

/// One-sided Jacobi SVD.
///
/// The general-purpose bidiagonalization SVD can silently produce an
/// inconsistent factorization on structured inputs (exactly-zero rows of
/// rank-1 matrices, for instance). Column rotations are immune to that
/// failure mode and give high relative accuracy on the tiny matrices used
/// here, which matters because degradedness is judged by sigma2/sigma1
/// ratios as small as 1e-9.
pub fn jacobi_svd(m: &DMatrix<f64>) -> JacobiSvd {
    assert_eq!(m.nrows(), m.ncols(), "jacobi_svd expects a square matrix");
    let k = m.ncols();
    let mut w = m.clone();
    let mut v = DMatrix::<f64>::identity(k, k);
    for _sweep in 0..64 {
        let mut off = 0.0_f64;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if alpha == 0.0 || beta == 0.0 || gamma == 0.0 {
                    continue;
                }
                let denom = (alpha * beta).sqrt();
                off = off.max(gamma.abs() / denom);
                if gamma.abs() <= f64::EPSILON * denom {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (mat, rows) in [(&mut w, k), (&mut v, k)] {
                    for i in 0..rows {
                        let mp = mat[(i, p)];
                        let mq = mat[(i, q)];
                        mat[(i, p)] = c * mp - s * mq;
                        mat[(i, q)] = s * mp + c * mq;
                    }
                }
            }
        }
        if off <= 4.0 * f64::EPSILON {
            break;
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    let norms: Vec<f64> = (0..k).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));
    let mut singular_values = Vec::with_capacity(k);
    let mut u = DMatrix::zeros(k, k);
    let mut v_sorted = DMatrix::zeros(k, k);
    for (pos, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        singular_values.push(sigma);
        if sigma > 0.0 {
            let col = w.column(j) / sigma;
            u.set_column(pos, &col);
        } else {
            u[(pos, pos)] = 1.0;
        }
        v_sorted.set_column(pos, &v.column(j));
    }
    JacobiSvd {
        singular_values,
        u,
        v: v_sorted,
    }
}

/// Upper-triangular portion of a square matrix (entries with i <= j),
/// with the strictly-lower part zeroed.
pub fn upper_triangular_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| if i <= j { m[(i, j)] } else { 0.0 })
}

/// Strictly-lower-triangular portion of a square matrix (entries with i > j).
pub fn strict_lower_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| if i > j { m[(i, j)] } else { 0.0 })
}

/// Largest absolute difference over the upper-triangular entries (i <= j).
pub fn max_upper_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn jacobi_svd_reconstructs_zero_row_rank1() {
        // A rank-1 matrix with an exactly-zero row; the bidiagonalization
        // SVD used to return an inconsistent factorization here.
        let a = DVector::from_column_slice(&[
            1.7939862087066565,
            1.761673861013162,
            0.0,
            1.8922679292691762,
            2.145803492612759,
        ]);
        let b = DVector::from_column_slice(&[
            2.14420869736998,
            -0.9877412604033275,
            -3.453720626046345,
            2.845474030345514,
            -2.4921880973543518,
        ]);
        let h = DMatrix::from_fn(5, 5, |i, j| a[i] * b[j]);
        let svd = jacobi_svd(&h);
        let reconstructed: DMatrix<f64> =
            &svd.u * DMatrix::from_diagonal(&DVector::from_vec(svd.singular_values.clone()))
                * svd.v.transpose();
        let scale = h.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        assert!((reconstructed - &h).abs().max() <= 1e-13 * scale);
        // Exactly rank 1 up to roundoff.
        assert!(svd.singular_values[1] <= 1e-14 * svd.singular_values[0]);
        let expected_sigma = a.norm() * b.norm();
        assert!((svd.singular_values[0] - expected_sigma).abs() <= 1e-12 * expected_sigma);
    }

    #[test]
    fn jacobi_svd_matches_known_values() {
        // Diagonal matrix: singular values are the absolute entries.
        let m = DMatrix::from_diagonal(&nalgebra::dvector![3.0, -2.0, 0.0]);
        let svd = jacobi_svd(&m);
        assert_eq!(svd.singular_values.len(), 3);
        assert!((svd.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((svd.singular_values[1] - 2.0).abs() < 1e-14);
        assert!(svd.singular_values[2].abs() < 1e-14);
        // Orthogonality of the accumulated right factor.
        let vtv = svd.v.transpose() * &svd.v;
        assert!(identity_residual(&vtv) < 1e-13);
    }

    #[test]
    fn jacobi_svd_random_cross_check() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let k = rng.gen_range(1..=8);
            let m = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-3.0..=3.0_f64));
            let svd = jacobi_svd(&m);
            let reconstructed: DMatrix<f64> = &svd.u
                * DMatrix::from_diagonal(&DVector::from_vec(svd.singular_values.clone()))
                * svd.v.transpose();
            let scale = m.iter().fold(1.0_f64, |s, &x| s.max(x.abs()));
            assert!((reconstructed - &m).abs().max() <= 1e-12 * scale);
            for w in svd.singular_values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn half_log2_det_of_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::dvector![4.0, 2.0]);
        // det = 8, half log2 = 1.5
        assert!((half_log2_det_pd(&m).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn half_log2_det_rejects_indefinite() {
        let m = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0]);
        assert_eq!(half_log2_det_pd(&m), Err(Error::SigmaNotPd));
    }

    #[test]
    fn condition_number_of_identity_is_one() {
        let m = DMatrix::<f64>::identity(3, 3);
        assert!((condition_number(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangular_parts_recompose() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let sum = upper_triangular_part(&m) + strict_lower_part(&m);
        assert_eq!(sum, m);
    }
}
