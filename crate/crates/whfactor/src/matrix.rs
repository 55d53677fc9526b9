//! Dense complex matrix helpers shared across the crate.
//!
//! The universal value type is `ComplexMatrix`, a dynamically sized
//! column-major matrix of `Complex64` entries.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lapack;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Identity of the given order.
pub fn eye(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Operator 2-norm (largest singular value); zero for empty matrices.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    lapack::singular_values(m).map_or(f64::NAN, |s| s[0])
}

/// Smallest and largest singular values.
pub fn singular_extremes(m: &ComplexMatrix) -> Result<(f64, f64)> {
    let s = lapack::singular_values(m)?;
    match (s.first(), s.last()) {
        (Some(&max), Some(&min)) => Ok((min, max)),
        _ => Ok((0.0, 0.0)),
    }
}

/// 2-norm condition number; 1 for empty matrices, infinity when singular.
pub fn cond2(m: &ComplexMatrix) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(1.0);
    }
    let (min, max) = singular_extremes(m)?;
    if min == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(max / min)
    }
}

/// Hermitian part `(m + m^*)/2`.
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// Departure from selfadjointness in the operator norm.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    op_norm(&(m - m.adjoint()))
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn lambda_min_hermitian(m: &ComplexMatrix) -> Result<f64> {
    let (w, _) = lapack::hermitian_eig(&hermitize(m), false)?;
    Ok(w.first().copied().unwrap_or(f64::INFINITY))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let (w, _) = lapack::hermitian_eig(&hermitize(m), false)?;
    Ok(w)
}

/// Eigenvalues of a general square matrix (diagonal of the Schur form).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    Ok(lapack::schur(m)?.eigenvalues())
}

/// Counts of positive and negative eigenvalues of a selfadjoint matrix.
/// Fails with `SingularGram` when an eigenvalue is too close to zero to
/// classify.
pub fn inertia(h: &ComplexMatrix, singular_tol: f64) -> Result<(usize, usize)> {
    let w = hermitian_eigenvalues(h)?;
    let scale = w.iter().fold(1f64, |acc, x| acc.max(x.abs()));
    let (mut pos, mut neg) = (0usize, 0usize);
    for &x in &w {
        if x.abs() <= singular_tol * scale {
            return Err(Error::SingularGram);
        }
        if x > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    Ok((pos, neg))
}

/// Inverse with a relative singularity guard.
pub fn inverse_guarded(m: &ComplexMatrix, rel_tol: f64, err: Error) -> Result<ComplexMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "inverse of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let (min, max) = singular_extremes(m)?;
    if min <= rel_tol * max.max(1.0) {
        return Err(err);
    }
    m.clone().lu().try_inverse().ok_or(err)
}

/// Principal matrix square root of a square matrix with no eigenvalue on
/// the closed negative real axis. Schur form plus the triangular
/// recurrence of Bjorck and Hammarling.
pub fn principal_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "square root of a {}x{} matrix",
            n,
            m.ncols()
        )));
    }
    let sch = lapack::schur(m)?;
    let scale = op_norm(m).max(1.0);
    for lambda in sch.eigenvalues() {
        if lambda.re <= 0.0 && lambda.im.abs() <= 1e-14 * scale {
            return Err(Error::SqrtBranchCut);
        }
    }
    let t = &sch.t;
    let mut s = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = t[(i, i)].sqrt();
    }
    for off in 1..n {
        for i in 0..n - off {
            let j = i + off;
            let mut acc = t[(i, j)];
            for k in i + 1..j {
                acc -= s[(i, k)] * s[(k, j)];
            }
            let denom = s[(i, i)] + s[(j, j)];
            if denom.norm() <= 1e-300 {
                return Err(Error::SqrtBranchCut);
            }
            s[(i, j)] = acc / denom;
        }
    }
    Ok(&sch.q * s * sch.q.adjoint())
}

/// Stacks `[left | right]` horizontally.
pub fn hstack(left: &ComplexMatrix, right: &ComplexMatrix) -> ComplexMatrix {
    debug_assert_eq!(left.nrows(), right.nrows());
    let mut out = ComplexMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(right);
    out
}

/// Assembles a 2x2 block matrix.
pub fn block2x2(
    a11: &ComplexMatrix,
    a12: &ComplexMatrix,
    a21: &ComplexMatrix,
    a22: &ComplexMatrix,
) -> ComplexMatrix {
    let (r1, c1) = a11.shape();
    let (r2, c2) = a22.shape();
    debug_assert_eq!(a12.shape(), (r1, c2));
    debug_assert_eq!(a21.shape(), (r2, c1));
    let mut out = ComplexMatrix::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a11);
    out.view_mut((0, c1), (r1, c2)).copy_from(a12);
    out.view_mut((r1, 0), (r2, c1)).copy_from(a21);
    out.view_mut((r1, c1), (r2, c2)).copy_from(a22);
    out
}

/// Block diagonal embedding `diag(h, I_k)` used by the KYP forms.
pub fn diag_with_identity(h: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let n = h.nrows();
    let mut out = ComplexMatrix::zeros(n + k, n + k);
    out.view_mut((0, 0), (n, n)).copy_from(h);
    for i in 0..k {
        out[(n + i, n + i)] = c64(1.0, 0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sqrt_of_positive_diagonal() {
        let m = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
            c64(2.0, 0.0),
            c64(0.5, 0.0),
        ]));
        let s = principal_sqrt(&m).unwrap();
        assert_abs_diff_eq!(s[(0, 0)].re, 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s[(1, 1)].re, 0.5f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!((&s * &s - &m).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_rejects_negative_axis() {
        let m = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c64(-1.0, 0.0)]));
        assert!(matches!(principal_sqrt(&m), Err(Error::SqrtBranchCut)));
    }

    #[test]
    fn sqrt_of_nonnormal_matrix_squares_back() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(4.0, 0.0), c64(1.0, 2.0), c64(0.0, 0.0), c64(0.25, 0.0)],
        );
        let s = principal_sqrt(&m).unwrap();
        assert_abs_diff_eq!((&s * &s - &m).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn inertia_counts_and_guards() {
        let h = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
            c64(2.0, 0.0),
            c64(-0.5, 0.0),
            c64(1.0, 0.0),
        ]));
        assert_eq!(inertia(&h, 1e-12).unwrap(), (2, 1));
        let singular = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
            c64(1.0, 0.0),
            c64(0.0, 0.0),
        ]));
        assert!(matches!(inertia(&singular, 1e-12), Err(Error::SingularGram)));
    }

    #[test]
    fn cond_of_empty_is_one() {
        assert_abs_diff_eq!(cond2(&ComplexMatrix::zeros(0, 0)).unwrap(), 1.0);
    }
}
