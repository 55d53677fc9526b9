//! Thin safe wrappers around the complex LAPACK routines used by the crate.
//!
//! `nalgebra` covers day-to-day dense arithmetic and LU solves; the
//! decompositions that need production-grade robustness (Schur form,
//! eigenvalue reordering, Hermitian eigensolves, singular values) go
//! through LAPACK. `DMatrix` stores entries column-major, so buffers can
//! be handed to Fortran directly.

use std::ffi::c_char;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type ZMat = DMatrix<Complex64>;

// Complex64 is repr(C) { re: f64, im: f64 }, identical to LAPACK's
// complex double layout.
fn zptr(s: &mut [Complex64]) -> *mut lapack_sys::__BindgenComplex<f64> {
    s.as_mut_ptr().cast()
}

fn check_info(routine: &'static str, info: i32) -> Result<()> {
    if info == 0 {
        Ok(())
    } else {
        Err(Error::Lapack { routine, info })
    }
}

/// Unitary Schur decomposition `a = q t q^*` with `t` upper triangular.
pub(crate) struct Schur {
    pub q: ZMat,
    pub t: ZMat,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Complex Schur form via `zgees` (no eigenvalue sorting).
pub(crate) fn schur(a: &ZMat) -> Result<Schur> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Schur decomposition needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(Schur {
            q: ZMat::zeros(0, 0),
            t: ZMat::zeros(0, 0),
        });
    }
    let ni = n as i32;
    let mut t = a.clone();
    let mut q = ZMat::zeros(n, n);
    let mut w = vec![Complex64::ZERO; n];
    let mut rwork = vec![0f64; n];
    let mut sdim = 0i32;
    let mut info = 0i32;
    let jobvs = b'V' as c_char;
    let sort = b'N' as c_char;

    // Workspace query, then the actual call.
    let mut lwork = -1i32;
    let mut wkopt = [Complex64::ZERO];
    unsafe {
        lapack_sys::zgees_(
            &jobvs,
            &sort,
            None,
            &ni,
            zptr(t.as_mut_slice()),
            &ni,
            &mut sdim,
            zptr(&mut w),
            zptr(q.as_mut_slice()),
            &ni,
            zptr(&mut wkopt),
            &lwork,
            rwork.as_mut_ptr(),
            std::ptr::null_mut(),
            &mut info,
        );
    }
    check_info("zgees", info)?;
    lwork = (wkopt[0].re as i32).max(2 * ni).max(1);
    let mut work = vec![Complex64::ZERO; lwork as usize];
    unsafe {
        lapack_sys::zgees_(
            &jobvs,
            &sort,
            None,
            &ni,
            zptr(t.as_mut_slice()),
            &ni,
            &mut sdim,
            zptr(&mut w),
            zptr(q.as_mut_slice()),
            &ni,
            zptr(&mut work),
            &lwork,
            rwork.as_mut_ptr(),
            std::ptr::null_mut(),
            &mut info,
        );
    }
    check_info("zgees", info)?;
    Ok(Schur { q, t })
}

/// Reorder a Schur form so the eigenvalues flagged in `select` occupy the
/// leading diagonal positions (`ztrsen`). Returns the number of selected
/// eigenvalues; the first that many columns of `q` then span the
/// corresponding invariant subspace.
pub(crate) fn reorder_schur(schur: &mut Schur, select: &[bool]) -> Result<usize> {
    let n = schur.t.nrows();
    if select.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "selection vector has length {} for order {}",
            select.len(),
            n
        )));
    }
    let m = select.iter().filter(|&&s| s).count();
    if n == 0 || m == 0 || m == n {
        return Ok(m);
    }
    let ni = n as i32;
    let sel: Vec<i32> = select.iter().map(|&s| i32::from(s)).collect();
    let mut w = vec![Complex64::ZERO; n];
    let mut mm = 0i32;
    let mut s = 0f64;
    let mut sep = 0f64;
    let mut info = 0i32;
    let job = b'N' as c_char;
    let compq = b'V' as c_char;

    let mut lwork = -1i32;
    let mut wkopt = [Complex64::ZERO];
    unsafe {
        lapack_sys::ztrsen_(
            &job,
            &compq,
            sel.as_ptr(),
            &ni,
            zptr(schur.t.as_mut_slice()),
            &ni,
            zptr(schur.q.as_mut_slice()),
            &ni,
            zptr(&mut w),
            &mut mm,
            &mut s,
            &mut sep,
            zptr(&mut wkopt),
            &lwork,
            &mut info,
        );
    }
    check_info("ztrsen", info)?;
    lwork = (wkopt[0].re as i32).max(1);
    let mut work = vec![Complex64::ZERO; lwork as usize];
    unsafe {
        lapack_sys::ztrsen_(
            &job,
            &compq,
            sel.as_ptr(),
            &ni,
            zptr(schur.t.as_mut_slice()),
            &ni,
            zptr(schur.q.as_mut_slice()),
            &ni,
            zptr(&mut w),
            &mut mm,
            &mut s,
            &mut sep,
            zptr(&mut work),
            &lwork,
            &mut info,
        );
    }
    check_info("ztrsen", info)?;
    Ok(mm as usize)
}

/// Eigenvalues (ascending) and optionally eigenvectors of a Hermitian
/// matrix via `zheev`. Only the lower triangle of `a` is referenced.
pub(crate) fn hermitian_eig(a: &ZMat, vectors: bool) -> Result<(Vec<f64>, Option<ZMat>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Hermitian eigensolve needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| ZMat::zeros(0, 0))));
    }
    let ni = n as i32;
    let mut m = a.clone();
    let mut w = vec![0f64; n];
    let mut rwork = vec![0f64; (3 * n).max(1)];
    let mut info = 0i32;
    let jobz = if vectors { b'V' } else { b'N' } as c_char;
    let uplo = b'L' as c_char;

    let mut lwork = -1i32;
    let mut wkopt = [Complex64::ZERO];
    unsafe {
        lapack_sys::zheev_(
            &jobz,
            &uplo,
            &ni,
            zptr(m.as_mut_slice()),
            &ni,
            w.as_mut_ptr(),
            zptr(&mut wkopt),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    check_info("zheev", info)?;
    lwork = (wkopt[0].re as i32).max(2 * ni - 1).max(1);
    let mut work = vec![Complex64::ZERO; lwork as usize];
    unsafe {
        lapack_sys::zheev_(
            &jobz,
            &uplo,
            &ni,
            zptr(m.as_mut_slice()),
            &ni,
            w.as_mut_ptr(),
            zptr(&mut work),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    check_info("zheev", info)?;
    Ok((w, vectors.then_some(m)))
}

/// Singular values of a rectangular complex matrix, descending (`zgesvd`).
pub(crate) fn singular_values(a: &ZMat) -> Result<Vec<f64>> {
    Ok(svd(a, false)?.1)
}

/// Thin SVD `a = u diag(s) vt` with `u` of size m x k, `vt` of size k x n,
/// k = min(m, n).
pub(crate) fn svd_thin(a: &ZMat) -> Result<(ZMat, Vec<f64>, ZMat)> {
    let (uvt, s) = svd(a, true)?;
    let (u, vt) = uvt.expect("factors requested");
    Ok((u, s, vt))
}

#[allow(clippy::type_complexity)]
fn svd(a: &ZMat, factors: bool) -> Result<(Option<(ZMat, ZMat)>, Vec<f64>)> {
    let (m, n) = (a.nrows(), a.ncols());
    let k = m.min(n);
    if k == 0 {
        let out = factors.then(|| (ZMat::zeros(m, 0), ZMat::zeros(0, n)));
        return Ok((out, Vec::new()));
    }
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    let mut work_a = a.clone();
    let mut s = vec![0f64; k];
    let mut u = ZMat::zeros(m, if factors { k } else { 1 });
    let mut vt = ZMat::zeros(if factors { k } else { 1 }, n);
    let mut rwork = vec![0f64; 5 * k];
    let mut info = 0i32;
    let job = if factors { b'S' } else { b'N' } as c_char;
    let ldu = if factors { mi } else { 1 };
    let ldvt = if factors { ki } else { 1 };

    let mut lwork = -1i32;
    let mut wkopt = [Complex64::ZERO];
    unsafe {
        lapack_sys::zgesvd_(
            &job,
            &job,
            &mi,
            &ni,
            zptr(work_a.as_mut_slice()),
            &mi,
            s.as_mut_ptr(),
            zptr(u.as_mut_slice()),
            &ldu,
            zptr(vt.as_mut_slice()),
            &ldvt,
            zptr(&mut wkopt),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    check_info("zgesvd", info)?;
    lwork = (wkopt[0].re as i32).max(1);
    let mut work = vec![Complex64::ZERO; lwork as usize];
    unsafe {
        lapack_sys::zgesvd_(
            &job,
            &job,
            &mi,
            &ni,
            zptr(work_a.as_mut_slice()),
            &mi,
            s.as_mut_ptr(),
            zptr(u.as_mut_slice()),
            &ldu,
            zptr(vt.as_mut_slice()),
            &ldvt,
            zptr(&mut work),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    check_info("zgesvd", info)?;
    Ok((factors.then_some((u, vt)), s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn schur_reconstructs_matrix() {
        let a = ZMat::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.2),
                c(-0.5, 0.0),
                c(0.0, 1.0),
                c(2.0, 0.0),
                c(0.3, -0.1),
                c(0.0, 0.0),
                c(0.0, 0.5),
                c(1.0, 0.0),
                c(-2.0, 0.4),
            ],
        );
        let sch = schur(&a).unwrap();
        let re = &sch.q * &sch.t * sch.q.adjoint();
        assert_abs_diff_eq!((re - &a).norm(), 0.0, epsilon = 1e-12);
        // strict lower triangle of t vanishes
        for i in 0..3 {
            for j in 0..i {
                assert_abs_diff_eq!(sch.t[(i, j)].norm(), 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn reorder_moves_selected_eigenvalues_first() {
        let a = ZMat::from_row_slice(
            2,
            2,
            &[c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)],
        );
        let mut sch = schur(&a).unwrap();
        let select: Vec<bool> = sch.eigenvalues().iter().map(|l| l.norm() > 1.0).collect();
        let m = reorder_schur(&mut sch, &select).unwrap();
        assert_eq!(m, 1);
        assert_abs_diff_eq!(sch.t[(0, 0)].re, 2.0, epsilon = 1e-12);
        let re = &sch.q * &sch.t * sch.q.adjoint();
        assert_abs_diff_eq!((re - &a).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_ascending() {
        let a = ZMat::from_row_slice(
            2,
            2,
            &[c(2.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(3.0, 0.0)],
        );
        let (w, v) = hermitian_eig(&a, true).unwrap();
        // eigenvalues of [[2, -i],[i, 3]] are (5 +- sqrt(5))/2
        let s5 = 5f64.sqrt();
        assert_abs_diff_eq!(w[0], (5.0 - s5) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], (5.0 + s5) / 2.0, epsilon = 1e-12);
        let v = v.unwrap();
        let d = ZMat::from_diagonal(&nalgebra::DVector::from_iterator(
            2,
            w.iter().map(|&x| c(x, 0.0)),
        ));
        assert_abs_diff_eq!((&v * d * v.adjoint() - &a).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let a = ZMat::from_row_slice(
            3,
            2,
            &[
                c(1.0, 1.0),
                c(0.0, 0.0),
                c(2.0, 0.0),
                c(-1.0, 0.5),
                c(0.0, -2.0),
                c(0.5, 0.0),
            ],
        );
        let (u, s, vt) = svd_thin(&a).unwrap();
        let d = ZMat::from_fn(2, 2, |i, j| if i == j { c(s[i], 0.0) } else { Complex64::ZERO });
        assert_abs_diff_eq!((u * d * vt - &a).norm(), 0.0, epsilon = 1e-12);
        let sv = singular_values(&a).unwrap();
        assert_abs_diff_eq!(sv[0], s[0], epsilon = 1e-13);
        assert!(sv[0] >= sv[1]);
    }
}
