//! The strict KYP inequality and the associated Krein-space structure.
//!
//! For a system matrix `S = [[A, B], [C, D]]` an invertible selfadjoint
//! `H` solves the strict KYP inequality when
//! `S^* diag(H, I) S < diag(H, I) - eps I` for some `eps > 0`; this holds
//! exactly when the transfer function is strictly contractive on the
//! circle. This module verifies the inequality and its adjoint
//! counterpart, solves for an interior `H` by a deflating-subspace method
//! on the associated matrix pencil, and checks bicontractivity of
//! operators in the Krein space with Gram operator `H`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lapack;
use crate::matrix::{self, block2x2, c64, diag_with_identity, eye, ComplexMatrix};
use crate::realization::{self, StateSpaceSystem};
use crate::Tolerances;

/// Certified solution of the strict KYP inequality.
#[derive(Debug, Clone)]
pub struct KypCertificate {
    /// Selfadjoint invertible solution.
    pub h: ComplexMatrix,
    /// Smallest eigenvalue of the KYP test matrix; positive means the
    /// strict inequality holds with this slack.
    pub margin: f64,
    /// Counts of positive and negative eigenvalues of `h`.
    pub inertia: (usize, usize),
}

/// Indefinite inner product `[x, y] = <Gx, y>` induced by an invertible
/// selfadjoint Gram operator `G`.
#[derive(Debug, Clone)]
pub struct KreinSpace {
    gram: ComplexMatrix,
}

impl KreinSpace {
    pub fn new(gram: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let defect = matrix::hermitian_defect(&gram);
        if defect > tol.sym {
            return Err(Error::NotSelfadjoint { defect });
        }
        check_invertible_gram(&gram, tol)?;
        Ok(KreinSpace {
            gram: matrix::hermitize(&gram),
        })
    }

    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    fn gram_inverse(&self) -> Result<ComplexMatrix> {
        let inv = matrix::inverse_guarded(&self.gram, 1e-14, Error::SingularGram)?;
        Ok(matrix::hermitize(&inv))
    }
}

fn check_invertible_gram(h: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    if h.nrows() == 0 {
        return Ok(());
    }
    let w = matrix::hermitian_eigenvalues(h)?;
    let scale = w.iter().fold(1f64, |acc, x| acc.max(x.abs()));
    if w.iter().any(|x| x.abs() <= tol.singular * scale) {
        return Err(Error::SingularGram);
    }
    Ok(())
}

fn check_shapes(sys: &StateSpaceSystem, h: &ComplexMatrix) -> Result<()> {
    let n = sys.order();
    if h.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "H must be {}x{}, got {}x{}",
            n,
            n,
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(())
}

fn check_selfadjoint(h: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    let defect = matrix::hermitian_defect(h);
    if defect > tol.sym {
        return Err(Error::NotSelfadjoint { defect });
    }
    Ok(())
}

/// Smallest eigenvalue of `diag(H, I) - S^* diag(H, I) S` for the system
/// matrix `S`; a positive value certifies the strict KYP inequality with
/// that margin.
pub fn verify_kyp(sys: &StateSpaceSystem, h: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    check_shapes(sys, h)?;
    check_selfadjoint(h, tol)?;
    let sigma = block2x2(sys.a(), sys.b(), sys.c(), sys.d());
    let test = diag_with_identity(h, sys.inputs())
        - sigma.adjoint() * diag_with_identity(h, sys.outputs()) * &sigma;
    matrix::lambda_min_hermitian(&test)
}

/// Smallest eigenvalue of `diag(H^{-1}, I) - S diag(H^{-1}, I) S^*`, the
/// KYP test for the adjoint system.
pub fn verify_adjoint_kyp(
    sys: &StateSpaceSystem,
    h: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<f64> {
    check_shapes(sys, h)?;
    check_selfadjoint(h, tol)?;
    check_invertible_gram(h, tol)?;
    let hinv = matrix::hermitize(&matrix::inverse_guarded(h, 1e-14, Error::SingularGram)?);
    let sigma = block2x2(sys.a(), sys.b(), sys.c(), sys.d());
    let test = diag_with_identity(&hinv, sys.outputs())
        - &sigma * diag_with_identity(&hinv, sys.inputs()) * sigma.adjoint();
    matrix::lambda_min_hermitian(&test)
}

/// Grid used for the contractivity gate and the inflation sizing.
const NORM_GRID: usize = 512;

/// Solves the strict KYP inequality for a dichotomous system with
/// strictly contractive transfer function.
///
/// The KYP equality is a discrete algebraic Riccati equation; its
/// associated 2n x 2n pencil has no unimodular eigenvalues when the sup
/// norm is below one, so the n-dimensional deflating subspace for the
/// eigenvalues inside the disc exists and yields `H = X2 X1^{-1}` from a
/// stacked basis `[X1; X2]`. The quadratic term `C^* C` is inflated by a
/// small multiple of the identity sized so the inflated transfer function
/// stays contractive; this moves the recovered solution from the boundary
/// of the solution set into its interior. The result is certified a
/// posteriori through [`verify_kyp`] and [`verify_adjoint_kyp`].
pub fn solve_kyp(sys: &StateSpaceSystem) -> Result<KypCertificate> {
    solve_kyp_with(sys, &Tolerances::default())
}

pub fn solve_kyp_with(sys: &StateSpaceSystem, tol: &Tolerances) -> Result<KypCertificate> {
    let n = sys.order();
    let m = sys.inputs();

    let sup = realization::sup_norm_on_circle(sys, NORM_GRID, true)?;
    if sup >= 1.0 - tol.norm {
        return Err(Error::NormNotStrictlyContractive { sup });
    }

    if n == 0 {
        let margin = matrix::lambda_min_hermitian(&(eye(m) - sys.d().adjoint() * sys.d()))?;
        return Ok(KypCertificate {
            h: ComplexMatrix::zeros(0, 0),
            margin,
            inertia: (0, 0),
        });
    }

    // Size the inflation so ||[F; sqrt(delta) z (I - zA)^{-1} B]|| stays
    // below one on the circle.
    let mut input_gain: f64 = 0.0;
    for j in 0..NORM_GRID {
        let theta = 2.0 * std::f64::consts::PI * (j as f64) / (NORM_GRID as f64);
        let z = Complex64::from_polar(1.0, theta);
        let x = realization::resolvent_solve(sys.a(), z, sys.b())?;
        input_gain = input_gain.max(matrix::op_norm(&x));
    }
    let delta = if input_gain == 0.0 {
        1.0
    } else {
        (0.5 * (1.0 - sup * sup) / (input_gain * input_gain)).clamp(1e-8, 1.0)
    };

    // DARE data: R = D*D - I, S = C*D, Q = C*C + delta I.
    let r = sys.d().adjoint() * sys.d() - eye(m);
    let rinv = matrix::inverse_guarded(
        &r,
        1e-12,
        Error::PencilSelectionFailed("D*D - I is numerically singular".into()),
    )?;
    let s = sys.c().adjoint() * sys.d();
    let a_s = sys.a() - sys.b() * &rinv * s.adjoint();
    let g = sys.b() * &rinv * sys.b().adjoint();
    let q_hat = sys.c().adjoint() * sys.c() + eye(n) * c64(delta, 0.0) - &s * &rinv * s.adjoint();

    let pencil_e = block2x2(&eye(n), &g, &ComplexMatrix::zeros(n, n), &a_s.adjoint());
    let pencil_m = block2x2(&a_s, &ComplexMatrix::zeros(n, n), &(-&q_hat), &eye(n));

    // Reduce the pencil to a single matrix through a Mobius point on the
    // circle, where the pencil has no eigenvalues. Pencil eigenvalues
    // inside the disc map to eigenvalues nu of N = (alpha E - M)^{-1} E
    // with Re(alpha nu) > 1/2.
    let mut best: Option<(Complex64, f64)> = None;
    for theta in [0.9501f64, 2.2311, 3.5771, 4.7634, 5.8812, 1.3141, 0.4172, 2.7183] {
        let alpha = Complex64::from_polar(1.0, theta);
        let k = &pencil_e * alpha - &pencil_m;
        let (smin, smax) = matrix::singular_extremes(&k)?;
        let rcond = if smax == 0.0 { 0.0 } else { smin / smax };
        if best.is_none_or(|(_, b)| rcond > b) {
            best = Some((alpha, rcond));
        }
    }
    let (alpha, rcond) = best.expect("candidate list is nonempty");
    if rcond <= 1e-12 {
        return Err(Error::PencilSelectionFailed(
            "no well-conditioned circle point for the pencil".into(),
        ));
    }
    let k = &pencil_e * alpha - &pencil_m;
    let n_mat = k
        .lu()
        .solve(&pencil_e)
        .ok_or_else(|| Error::PencilSelectionFailed("pencil shift is singular".into()))?;

    let mut sch = lapack::schur(&n_mat)?;
    let select: Vec<bool> = sch
        .eigenvalues()
        .iter()
        .map(|nu| (alpha * nu).re > 0.5)
        .collect();
    let count = select.iter().filter(|&&s| s).count();
    if count != n {
        return Err(Error::PencilSelectionFailed(format!(
            "expected {n} pencil eigenvalues inside the disc, found {count}"
        )));
    }
    lapack::reorder_schur(&mut sch, &select)?;
    let basis = sch.q.columns(0, n).into_owned();
    let x1 = basis.view((0, 0), (n, n)).into_owned();
    let x2 = basis.view((n, 0), (n, n)).into_owned();

    let x1_inv = matrix::inverse_guarded(
        &x1,
        1e-10,
        Error::PencilSelectionFailed("deflating basis has singular leading block".into()),
    )?;
    let h = matrix::hermitize(&(x2 * x1_inv));

    let margin = verify_kyp(sys, &h, tol)?;
    if margin <= 0.0 {
        return Err(Error::CertificationFailed(format!(
            "KYP margin {margin:.3e} is not positive"
        )));
    }
    let adjoint_margin = verify_adjoint_kyp(sys, &h, tol)?;
    if adjoint_margin <= 0.0 {
        return Err(Error::CertificationFailed(format!(
            "adjoint KYP margin {adjoint_margin:.3e} is not positive"
        )));
    }
    let inertia = matrix::inertia(&h, tol.singular)
        .map_err(|_| Error::CertificationFailed("computed H is nearly singular".into()))?;

    Ok(KypCertificate { h, margin, inertia })
}

/// Whether the inertia of the certificate matches the dichotomy: positive
/// count equals `dim X_+`, negative count equals `dim X_-`.
pub fn inertia_check(cert: &KypCertificate, info: &realization::DichotomyInfo) -> bool {
    cert.inertia == (info.dim_plus, info.dim_minus)
}

/// Krein-space adjoint `H^{-1} S^* H`.
pub fn krein_adjoint(s: &ComplexMatrix, space: &KreinSpace) -> Result<ComplexMatrix> {
    if s.shape() != (space.dim(), space.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "operator must be {0}x{0} on this Krein space, got {1}x{2}",
            space.dim(),
            s.nrows(),
            s.ncols()
        )));
    }
    Ok(space.gram_inverse()? * s.adjoint() * space.gram())
}

/// Margins of uniform bicontractivity of `M` in the Krein space:
/// `(lambda_min(H - M^* H M), lambda_min(H^{-1} - M H^{-1} M^*))`.
/// Both positive certifies that `M` is a uniform bicontraction.
pub fn bicontraction_margins(m: &ComplexMatrix, space: &KreinSpace) -> Result<(f64, f64)> {
    if m.shape() != (space.dim(), space.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "operator must be {0}x{0} on this Krein space, got {1}x{2}",
            space.dim(),
            m.nrows(),
            m.ncols()
        )));
    }
    let h = space.gram();
    let hinv = space.gram_inverse()?;
    let first = matrix::lambda_min_hermitian(&(h - m.adjoint() * h * m))?;
    let second = matrix::lambda_min_hermitian(&(&hinv - m * &hinv * m.adjoint()))?;
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn scalar_h(x: f64) -> ComplexMatrix {
        ComplexMatrix::from_element(1, 1, c64(x, 0.0))
    }

    fn stable() -> StateSpaceSystem {
        StateSpaceSystem::scalar(0.0, 1.0, 0.5, 0.0)
    }

    fn antistable() -> StateSpaceSystem {
        StateSpaceSystem::scalar(2.0, 0.4, 1.0, 0.0)
    }

    #[test]
    fn verify_kyp_scalar_examples() {
        // test matrix diag(0.25, 0.5)
        let margin = verify_kyp(&stable(), &scalar_h(0.5), &tol()).unwrap();
        assert_abs_diff_eq!(margin, 0.25, epsilon = 1e-12);

        // test matrix [[2, 0.8], [0.8, 1.16]]
        let margin = verify_kyp(&antistable(), &scalar_h(-1.0), &tol()).unwrap();
        let expect = (3.16 - (0.84f64 * 0.84 + 4.0 * 0.64).sqrt()) / 2.0;
        assert_abs_diff_eq!(margin, expect, epsilon = 1e-12);
        assert!(margin > 0.0);

        // H too small: diag(-0.15, 0.9)
        let margin = verify_kyp(&stable(), &scalar_h(0.1), &tol()).unwrap();
        assert_abs_diff_eq!(margin, -0.15, epsilon = 1e-12);
    }

    #[test]
    fn verify_kyp_rejects_nonselfadjoint() {
        let h = ComplexMatrix::from_element(1, 1, c64(0.5, 0.3));
        assert!(matches!(
            verify_kyp(&stable(), &h, &tol()),
            Err(Error::NotSelfadjoint { .. })
        ));
    }

    #[test]
    fn verify_adjoint_examples() {
        let margin = verify_adjoint_kyp(&stable(), &scalar_h(0.5), &tol()).unwrap();
        assert_abs_diff_eq!(margin, 0.5, epsilon = 1e-12);

        let margin = verify_adjoint_kyp(&antistable(), &scalar_h(-1.0), &tol()).unwrap();
        assert!(margin > 0.0);

        assert!(matches!(
            verify_adjoint_kyp(&stable(), &scalar_h(0.0), &tol()),
            Err(Error::SingularGram)
        ));
    }

    #[test]
    fn adjoint_follows_primal_on_hand_picked_h() {
        for (sys, h) in [
            (stable(), 0.3),
            (stable(), 0.9),
            (antistable(), -0.5),
            (antistable(), -2.0),
        ] {
            let primal = verify_kyp(&sys, &scalar_h(h), &tol()).unwrap();
            if primal > 0.0 {
                let adjoint = verify_adjoint_kyp(&sys, &scalar_h(h), &tol()).unwrap();
                assert!(adjoint > 0.0, "adjoint margin {adjoint} for H = {h}");
            }
        }
    }

    #[test]
    fn solve_kyp_scalar_stable() {
        let cert = solve_kyp(&stable()).unwrap();
        let h = cert.h[(0, 0)].re;
        assert!(h > 0.25 && h < 1.0, "H = {h} outside the admissible interval");
        assert!(cert.margin > 0.0);
        assert_eq!(cert.inertia, (1, 0));
    }

    #[test]
    fn solve_kyp_scalar_antistable() {
        let cert = solve_kyp(&antistable()).unwrap();
        let h = cert.h[(0, 0)].re;
        assert!(h < 0.0, "H = {h} should be negative");
        assert!(cert.margin > 0.0);
        assert_eq!(cert.inertia, (0, 1));
        assert!(verify_adjoint_kyp(&antistable(), &cert.h, &tol()).unwrap() > 0.0);
    }

    #[test]
    fn solve_kyp_rejects_unit_norm() {
        // F(z) = z has sup norm exactly one
        let sys = StateSpaceSystem::scalar(0.0, 1.0, 1.0, 0.0);
        assert!(matches!(
            solve_kyp(&sys),
            Err(Error::NormNotStrictlyContractive { .. })
        ));
    }

    #[test]
    fn inertia_check_matches_and_mismatches() {
        let sys = stable();
        let cert = solve_kyp(&sys).unwrap();
        let info = realization::dichotomy_info(sys.a()).unwrap();
        assert!(inertia_check(&cert, &info));

        let anti = antistable();
        let cert_a = solve_kyp(&anti).unwrap();
        let info_a = realization::dichotomy_info(anti.a()).unwrap();
        assert!(inertia_check(&cert_a, &info_a));

        // mismatched counts
        assert!(!inertia_check(&cert, &info_a));
    }

    #[test]
    fn krein_adjoint_examples() {
        let s = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 2.0), c64(0.0, -1.0), c64(3.0, 0.0), c64(0.5, 0.5)],
        );
        let hilbert = KreinSpace::new(eye(2), &tol()).unwrap();
        let adj = krein_adjoint(&s, &hilbert).unwrap();
        assert_abs_diff_eq!((adj - s.adjoint()).norm(), 0.0, epsilon = 1e-14);

        let id = eye(2);
        let adj = krein_adjoint(&id, &hilbert).unwrap();
        assert_abs_diff_eq!((adj - &id).norm(), 0.0, epsilon = 1e-14);

        let diag_s = ComplexMatrix::from_diagonal(&crate::ComplexVector::from_vec(vec![
            c64(2.0, 0.0),
            c64(0.5, 0.0),
        ]));
        let indefinite = KreinSpace::new(
            ComplexMatrix::from_diagonal(&crate::ComplexVector::from_vec(vec![
                c64(1.0, 0.0),
                c64(-1.0, 0.0),
            ])),
            &tol(),
        )
        .unwrap();
        let adj = krein_adjoint(&diag_s, &indefinite).unwrap();
        assert_abs_diff_eq!((adj - &diag_s).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn krein_adjoint_is_involutive() {
        let s = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.3, 1.0), c64(-2.0, 0.4), c64(1.5, 0.0), c64(0.0, -0.7)],
        );
        let gram = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(2.0, 0.0), c64(0.5, 0.5), c64(0.5, -0.5), c64(-1.0, 0.0)],
        );
        let space = KreinSpace::new(gram, &tol()).unwrap();
        let twice = krein_adjoint(&krein_adjoint(&s, &space).unwrap(), &space).unwrap();
        assert_abs_diff_eq!((twice - &s).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bicontraction_examples() {
        let hilbert = KreinSpace::new(eye(1), &tol()).unwrap();
        let (a, b) = bicontraction_margins(&ComplexMatrix::zeros(1, 1), &hilbert).unwrap();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-14);

        // A cross of the stable scalar system in the space with H = 0.5
        let space = KreinSpace::new(scalar_h(0.5), &tol()).unwrap();
        let m = ComplexMatrix::from_element(1, 1, c64(-0.5, 0.0));
        let (a, b) = bicontraction_margins(&m, &space).unwrap();
        assert_abs_diff_eq!(a, 0.375, epsilon = 1e-14);
        assert_abs_diff_eq!(b, 1.5, epsilon = 1e-14);

        let expansion = ComplexMatrix::from_element(1, 1, c64(2.0, 0.0));
        let (a, _) = bicontraction_margins(&expansion, &hilbert).unwrap();
        assert!(a < 0.0);
    }
}
