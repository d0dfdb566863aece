//! Small dense linear-algebra helpers on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::fp;

/// Symmetrize in place: (M + M^T)/2.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Copy the lower triangle onto the upper one (for BLAS-style routines
/// that only touch the lower part).
pub fn mirror_lower(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            m[(i, j)] = m[(j, i)];
        }
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn eigvalsh(m: &DMatrix<f64>) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-finite eigenvalue"));
    v
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    eigvalsh(m)[0]
}

/// Symmetric positive-definite check via Cholesky.
pub fn is_pd(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

/// log det of a symmetric positive definite matrix, `None` if not PD.
pub fn logdet_pd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    let l = chol.l();
    let mut s = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        s += fp::ln(d);
    }
    Some(2.0 * s)
}

/// Symmetric square root via eigendecomposition (PSD input; negative
/// eigenvalues are clamped to zero).
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = fp::sqrt(eig.eigenvalues[i].max(0.0));
    }
    let q = &eig.eigenvectors;
    let mut out = q * d * q.transpose();
    symmetrize(&mut out);
    out
}

/// Inverse of a symmetric positive definite matrix.
pub fn inv_pd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = m.clone().cholesky()?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    Some(inv)
}

/// Householder QR with column pivoting of `a` (m x n).
///
/// Returns (q, r, perm, rank) with `a[:, perm] = q * r`, q m x m orthogonal,
/// r upper triangular (trapezoidal), and rank detected against `tol`
/// relative to the largest pivot.
pub struct PivotedQr {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub perm: Vec<usize>,
    pub rank: usize,
}

pub fn pivoted_qr(a: &DMatrix<f64>, tol: f64) -> PivotedQr {
    let m = a.nrows();
    let n = a.ncols();
    let mut r = a.clone();
    let mut q = DMatrix::<f64>::identity(m, m);
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);
    let mut rank = 0;
    let mut first_pivot = 0.0f64;

    for k in 0..steps {
        // pivot: column with the largest remaining norm
        let mut best = k;
        let mut best_norm = 0.0;
        for j in k..n {
            let nrm: f64 = (k..m).map(|i| r[(i, j)] * r[(i, j)]).sum();
            if nrm > best_norm {
                best_norm = nrm;
                best = j;
            }
        }
        let best_norm = fp::sqrt(best_norm);
        if k == 0 {
            first_pivot = best_norm;
        }
        if best_norm <= tol * first_pivot.max(1.0) {
            break;
        }
        if best != k {
            r.swap_columns(k, best);
            perm.swap(k, best);
        }
        // Householder vector for column k
        let mut v = DVector::<f64>::zeros(m - k);
        for i in k..m {
            v[i - k] = r[(i, k)];
        }
        let alpha = -v[0].signum() * v.norm();
        if alpha.abs() < 1e-300 {
            break;
        }
        v[0] -= alpha;
        let vn = v.norm();
        if vn < 1e-300 {
            rank += 1;
            continue;
        }
        v /= vn;
        // apply H = I - 2 v v^T to trailing block of r and to q columns
        for j in k..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i - k] * r[(i, j)];
            }
            for i in k..m {
                r[(i, j)] -= 2.0 * v[i - k] * dot;
            }
        }
        for jq in 0..m {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i - k] * q[(jq, i)];
            }
            for i in k..m {
                q[(jq, i)] -= 2.0 * v[i - k] * dot;
            }
        }
        rank += 1;
    }
    // zero below-diagonal noise
    for j in 0..n {
        for i in (j + 1)..m {
            r[(i, j)] = 0.0;
        }
    }
    PivotedQr { q, r, perm, rank }
}

/// Orthonormal basis of the null space of `a` (m x n, acting on R^n).
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let qr = pivoted_qr(&a.transpose(), tol);
    let rank = qr.rank;
    qr.q.columns(rank, n - rank).into_owned()
}

/// Minimum-norm solution of `a x = b`; `None` if the system is inconsistent
/// beyond `tol` (relative to |b|).
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
    let qr = pivoted_qr(&a.transpose(), 1e-12);
    let rank = qr.rank;
    // a = r^T q^T with column permutation on rows of a
    // Solve r[0..rank,0..rank]^T y = P b, x = q[:, 0..rank] y
    let mut pb = DVector::<f64>::zeros(rank);
    for k in 0..rank {
        pb[k] = b[qr.perm[k]];
    }
    let mut y = DVector::<f64>::zeros(rank);
    for i in 0..rank {
        let mut s = pb[i];
        for j in 0..i {
            s -= qr.r[(j, i)] * y[j];
        }
        let d = qr.r[(i, i)];
        if d.abs() < 1e-300 {
            return None;
        }
        y[i] = s / d;
    }
    let x = qr.q.columns(0, rank) * y;
    let resid = (a * &x - b).amax();
    if resid > tol * (1.0 + b.amax()) {
        None
    } else {
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let z = null_space(&a, 1e-12);
        assert_eq!(z.ncols(), 2);
        let prod = &a * &z;
        assert!(prod.amax() < 1e-12);
        let gram = z.transpose() * &z;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn min_norm_solution() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, -1.0]);
        let b = DVector::from_row_slice(&[2.0, 1.0]);
        let x = min_norm_solve(&a, &b, 1e-10).unwrap();
        assert!((&a * &x - &b).amax() < 1e-10);
    }

    #[test]
    fn inconsistent_system_detected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let b = DVector::from_row_slice(&[1.0, 0.0]);
        assert!(min_norm_solve(&a, &b, 1e-10).is_none());
    }

    #[test]
    fn rank_detection() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        let qr = pivoted_qr(&a, 1e-10);
        assert_eq!(qr.rank, 2);
    }

    #[test]
    fn sym_sqrt_squares_back() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = sym_sqrt(&m);
        assert!((&s * &s - &m).amax() < 1e-12);
    }

    #[test]
    fn logdet_matches_det() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let ld = logdet_pd(&m).unwrap();
        assert!((ld - (11.0f64).ln()).abs() < 1e-12);
        let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(logdet_pd(&not_pd).is_none());
    }
}
