//! Discrete-time state-space systems and their dichotomy structure.
//!
//! A system `(A, B, C, D)` realizes the transfer function
//! `F(z) = D + zC(I - zA)^{-1}B` on `rho(A)^{-1} U {0}`. When `A` has no
//! spectrum on the unit circle the state space splits into the spectral
//! subspaces `X_-` (spectrum outside) and `X_+` (spectrum inside); this
//! module computes that splitting two independent ways, evaluates circle
//! sup norms, builds dichotomous realizations of rational symbols and
//! expands transfer functions into Laurent series on the circle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lapack;
use crate::matrix::{self, c64, eye, hstack, ComplexMatrix};
use crate::Tolerances;

/// Relative reciprocal-condition floor for resolvent solves.
const RESOLVENT_RCOND: f64 = 1e-12;

/// State-space system `(A, B, C, D)` with `A` of order `n`, `B` of size
/// `n x m`, `C` of size `p x n` and `D` of size `p x m`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceSystem {
    a: ComplexMatrix,
    b: ComplexMatrix,
    c: ComplexMatrix,
    d: ComplexMatrix,
}

impl StateSpaceSystem {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
    ) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let (p, m) = d.shape();
        if b.shape() != (n, m) {
            return Err(Error::DimensionMismatch(format!(
                "B must be {}x{}, got {}x{}",
                n,
                m,
                b.nrows(),
                b.ncols()
            )));
        }
        if c.shape() != (p, n) {
            return Err(Error::DimensionMismatch(format!(
                "C must be {}x{}, got {}x{}",
                p,
                n,
                c.nrows(),
                c.ncols()
            )));
        }
        for mat in [&a, &b, &c, &d] {
            if !matrix::is_finite(mat) {
                return Err(Error::NonFiniteData);
            }
        }
        Ok(StateSpaceSystem { a, b, c, d })
    }

    /// Scalar system convenience constructor.
    pub fn scalar(a: f64, b: f64, c: f64, d: f64) -> Self {
        StateSpaceSystem::new(
            ComplexMatrix::from_element(1, 1, c64(a, 0.0)),
            ComplexMatrix::from_element(1, 1, c64(b, 0.0)),
            ComplexMatrix::from_element(1, 1, c64(c, 0.0)),
            ComplexMatrix::from_element(1, 1, c64(d, 0.0)),
        )
        .expect("scalar dimensions are consistent")
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }
    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }
    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }
    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }

    /// State dimension `n`.
    pub fn order(&self) -> usize {
        self.a.nrows()
    }
    /// Input dimension `m`.
    pub fn inputs(&self) -> usize {
        self.d.ncols()
    }
    /// Output dimension `p`.
    pub fn outputs(&self) -> usize {
        self.d.nrows()
    }

    /// Whether the symbol `I + F` is square (`p == m`).
    pub fn is_square(&self) -> bool {
        self.inputs() == self.outputs()
    }

    /// Transfer function value `F(z) = D + zC(I - zA)^{-1}B`.
    ///
    /// `F(0) = D` exactly. Fails with `SingularResolvent` when `I - zA`
    /// is numerically singular, i.e. `1/z` hits the spectrum of `A`.
    pub fn transfer(&self, z: Complex64) -> Result<ComplexMatrix> {
        if self.order() == 0 || z == Complex64::ZERO {
            return Ok(self.d.clone());
        }
        let x = resolvent_solve(&self.a, z, &self.b)?;
        Ok(&self.d + (&self.c * x) * z)
    }

    /// Symbol value `G(z) = I + F(z)`; requires a square symbol.
    pub fn symbol(&self, z: Complex64) -> Result<ComplexMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "symbol needs p = m, got p = {}, m = {}",
                self.outputs(),
                self.inputs()
            )));
        }
        Ok(eye(self.inputs()) + self.transfer(z)?)
    }
}

/// Solves `(I - zA) X = rhs` with a singularity guard.
pub(crate) fn resolvent_solve(
    a: &ComplexMatrix,
    z: Complex64,
    rhs: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let n = a.nrows();
    if n == 0 {
        return Ok(rhs.clone());
    }
    let m = eye(n) - a * z;
    let (smin, smax) = matrix::singular_extremes(&m)?;
    if smin <= RESOLVENT_RCOND * smax.max(1.0) {
        return Err(Error::SingularResolvent { z });
    }
    m.lu().solve(rhs).ok_or(Error::SingularResolvent { z })
}

/// Dichotomy data of a square matrix: the spectral projection onto the
/// inside-the-disc subspace, orthonormal bases of both spectral
/// subspaces, the distance of the spectrum to the circle and the
/// subspace dimensions.
#[derive(Debug, Clone)]
pub struct DichotomyInfo {
    pub p_plus: ComplexMatrix,
    pub basis_minus: ComplexMatrix,
    pub basis_plus: ComplexMatrix,
    pub margin: f64,
    pub dim_minus: usize,
    pub dim_plus: usize,
}

/// Distance of a spectrum to the unit circle; infinite for empty spectra.
pub fn circle_margin(eigenvalues: &[Complex64]) -> f64 {
    eigenvalues
        .iter()
        .map(|l| (l.norm() - 1.0).abs())
        .fold(f64::INFINITY, f64::min)
}

fn require_square(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

fn check_dichotomy(eigenvalues: &[Complex64], tol: &Tolerances) -> Result<f64> {
    let margin = circle_margin(eigenvalues);
    if margin <= tol.dichotomy {
        return Err(Error::NotDichotomous { distance: margin });
    }
    Ok(margin)
}

/// Spectral projection onto the inside-the-disc subspace by trapezoidal
/// quadrature of the resolvent over the unit circle,
/// `P_+ = (1/N) sum_j z_j (z_j I - A)^{-1}` at the roots of unity.
///
/// The rule is exponentially accurate in the order for integrands
/// analytic in an annulus around the circle, with rate governed by the
/// distance of the spectrum to the circle.
pub fn spectral_projection_riesz(
    a: &ComplexMatrix,
    quadrature_order: usize,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let n = require_square(a)?;
    if quadrature_order < 16 {
        return Err(Error::InvalidArgument(format!(
            "quadrature order must be at least 16, got {quadrature_order}"
        )));
    }
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    check_dichotomy(&matrix::eigenvalues(a)?, tol)?;

    let id = eye(n);
    let mut acc = ComplexMatrix::zeros(n, n);
    for j in 0..quadrature_order {
        let theta = 2.0 * std::f64::consts::PI * (j as f64) / (quadrature_order as f64);
        let z = Complex64::from_polar(1.0, theta);
        let resolvent = (&id * z - a)
            .lu()
            .solve(&id)
            .ok_or(Error::NotDichotomous { distance: 0.0 })?;
        acc += resolvent * z;
    }
    Ok(acc / c64(quadrature_order as f64, 0.0))
}

/// Orthonormal bases of the two spectral subspaces from a reordered Schur
/// form: columns of `basis_plus` span the inside subspace, columns of
/// `basis_minus` the outside one.
fn spectral_split_bases(a: &ComplexMatrix, tol: &Tolerances) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
    let n = require_square(a)?;
    if n == 0 {
        return Ok((ComplexMatrix::zeros(0, 0), ComplexMatrix::zeros(0, 0), f64::INFINITY));
    }
    let sch = lapack::schur(a)?;
    let eigs = sch.eigenvalues();
    let margin = check_dichotomy(&eigs, tol)?;
    let inside: Vec<bool> = eigs.iter().map(|l| l.norm() < 1.0).collect();
    let k_plus = inside.iter().filter(|&&s| s).count();

    let mut inner = sch_clone(&sch);
    lapack::reorder_schur(&mut inner, &inside)?;
    let basis_plus = inner.q.columns(0, k_plus).into_owned();

    let outside: Vec<bool> = inside.iter().map(|s| !s).collect();
    let mut outer = sch_clone(&sch);
    lapack::reorder_schur(&mut outer, &outside)?;
    let basis_minus = outer.q.columns(0, n - k_plus).into_owned();

    Ok((basis_minus, basis_plus, margin))
}

fn sch_clone(s: &lapack::Schur) -> lapack::Schur {
    lapack::Schur {
        q: s.q.clone(),
        t: s.t.clone(),
    }
}

/// Spectral projection onto the inside-the-disc subspace via the ordered
/// invariant-subspace decomposition. Serves as the cross-check oracle for
/// the contour quadrature route.
pub fn spectral_projection_ordered(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let (basis_minus, basis_plus, _) = spectral_split_bases(a, tol)?;
    oblique_projection(&basis_minus, &basis_plus)
}

/// Projection onto the span of `onto` along the span of `along`; the two
/// bases together must form a square invertible matrix.
fn oblique_projection(along: &ComplexMatrix, onto: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = along.nrows().max(onto.nrows());
    let k = along.ncols();
    if along.ncols() + onto.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "complementary bases of sizes {} and {} do not span dimension {}",
            along.ncols(),
            onto.ncols(),
            n
        )));
    }
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let v = hstack(along, onto);
    let vinv = v
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::NotDichotomous { distance: 0.0 })?;
    let mut selector = ComplexMatrix::zeros(n, n);
    for i in k..n {
        selector[(i, i)] = c64(1.0, 0.0);
    }
    Ok(&v * selector * vinv)
}

/// Upper bound on the trapezoidal quadrature error of the Riesz
/// projection, used to budget the cross-check between the two projection
/// routes. For spectrum at distance `margin` from the circle the rule
/// converges like `(1 - margin)^order`, amplified by the skewness of the
/// projection.
fn riesz_error_allowance(eigenvalues: &[Complex64], order: usize, p_norm: f64) -> f64 {
    let mut r_in: f64 = 0.0; // largest modulus inside
    let mut r_out = f64::INFINITY; // smallest modulus outside
    for l in eigenvalues {
        let m = l.norm();
        if m < 1.0 {
            r_in = r_in.max(m);
        } else {
            r_out = r_out.min(m);
        }
    }
    let geom = |rho: f64| -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let t = rho.powi(order as i32);
        if t >= 0.5 {
            f64::INFINITY
        } else {
            t / (1.0 - t)
        }
    };
    let quad = geom(r_in) + geom(1.0 / r_out);
    50.0 * (1.0 + 2.0 * p_norm) * quad
}

/// Classifies the dichotomy of `a`: spectral projection (ordered route,
/// cross-checked against the contour quadrature), orthonormal bases of
/// both spectral subspaces, dimensions and circle margin.
pub fn dichotomy_info(a: &ComplexMatrix) -> Result<DichotomyInfo> {
    dichotomy_info_with(a, &Tolerances::default())
}

/// Default quadrature order for the Riesz cross-check.
pub const RIESZ_ORDER: usize = 256;

pub fn dichotomy_info_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<DichotomyInfo> {
    let n = require_square(a)?;
    if n == 0 {
        return Ok(DichotomyInfo {
            p_plus: ComplexMatrix::zeros(0, 0),
            basis_minus: ComplexMatrix::zeros(0, 0),
            basis_plus: ComplexMatrix::zeros(0, 0),
            margin: f64::INFINITY,
            dim_minus: 0,
            dim_plus: 0,
        });
    }
    let eigs = matrix::eigenvalues(a)?;
    let (basis_minus, basis_plus, margin) = spectral_split_bases(a, tol)?;
    let p_plus = oblique_projection(&basis_minus, &basis_plus)?;
    let p_norm = matrix::op_norm(&p_plus);

    // Projection invariants: idempotence and commutation with A.
    let idem = matrix::op_norm(&(&p_plus * &p_plus - &p_plus));
    let comm = matrix::op_norm(&(a * &p_plus - &p_plus * a));
    let scale = matrix::op_norm(a).max(1.0);
    let invariant_allowance =
        (tol.proj).max(100.0 * f64::EPSILON * (1.0 + p_norm) * (1.0 + p_norm));
    if idem > invariant_allowance || comm > invariant_allowance * scale {
        return Err(Error::ProjectionOracleMismatch {
            diff: idem.max(comm / scale),
            allowance: invariant_allowance,
        });
    }

    // Cross-check against the quadrature oracle, with an allowance for
    // what the quadrature can deliver at this margin and order.
    let riesz = spectral_projection_riesz(a, RIESZ_ORDER, tol)?;
    let diff = matrix::op_norm(&(&riesz - &p_plus));
    let allowance = tol
        .cross
        .max(riesz_error_allowance(&eigs, RIESZ_ORDER, p_norm));
    if diff > allowance {
        return Err(Error::ProjectionOracleMismatch { diff, allowance });
    }

    Ok(DichotomyInfo {
        dim_minus: basis_minus.ncols(),
        dim_plus: basis_plus.ncols(),
        p_plus,
        basis_minus,
        basis_plus,
        margin,
    })
}

/// Largest singular value of `F(z)` over an equispaced circle grid, with
/// optional golden-section refinement around the grid maximizer. The
/// result is a lower bound that converges from below under grid
/// refinement.
pub fn sup_norm_on_circle(
    sys: &StateSpaceSystem,
    grid_points: usize,
    refine: bool,
) -> Result<f64> {
    if grid_points < 64 {
        return Err(Error::InvalidArgument(format!(
            "grid must have at least 64 points, got {grid_points}"
        )));
    }
    let gain = |theta: f64| -> Result<f64> {
        let f = sys.transfer(Complex64::from_polar(1.0, theta))?;
        Ok(matrix::op_norm(&f))
    };
    let mut best = 0.0f64;
    let mut best_theta = 0.0f64;
    let step = 2.0 * std::f64::consts::PI / (grid_points as f64);
    for j in 0..grid_points {
        let theta = step * j as f64;
        let g = gain(theta)?;
        if g > best {
            best = g;
            best_theta = theta;
        }
    }
    if refine && sys.order() > 0 {
        let (mut lo, mut hi) = (best_theta - step, best_theta + step);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = gain(x1)?;
        let mut f2 = gain(x2)?;
        for _ in 0..80 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = gain(x2)?;
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = gain(x1)?;
            }
            best = best.max(f1.max(f2));
        }
    }
    Ok(best)
}

/// A simple pole of a rational symbol with its matrix residue.
#[derive(Debug, Clone)]
pub struct SimplePole {
    pub q: Complex64,
    pub residue: ComplexMatrix,
}

/// Rational symbol data
/// `F(z) = constant + sum_k poly_coeffs[k] z^{k+1} + sum_j residue_j / (z - q_j)`
/// with all poles off the unit circle and away from the origin.
#[derive(Debug, Clone)]
pub struct RationalSymbolSpec {
    pub constant: ComplexMatrix,
    pub poly_coeffs: Vec<ComplexMatrix>,
    pub simple_poles: Vec<SimplePole>,
}

impl RationalSymbolSpec {
    /// Output and input dimensions `(p, m)`.
    pub fn dims(&self) -> (usize, usize) {
        self.constant.shape()
    }

    /// Direct evaluation from the partial-fraction data; the independent
    /// oracle for realized systems. Fails on evaluation at a pole.
    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        let mut acc = self.constant.clone();
        let mut zp = Complex64::ONE;
        for coeff in &self.poly_coeffs {
            zp *= z;
            acc += coeff * zp;
        }
        for pole in &self.simple_poles {
            let denom = z - pole.q;
            if denom.norm() <= 1e-14 * (1.0 + z.norm()) {
                return Err(Error::SingularResolvent { z });
            }
            acc += &pole.residue / denom;
        }
        Ok(acc)
    }

    fn validate(&self, tol: &Tolerances) -> Result<()> {
        let (p, m) = self.dims();
        if !matrix::is_finite(&self.constant) {
            return Err(Error::NonFiniteData);
        }
        for coeff in &self.poly_coeffs {
            if coeff.shape() != (p, m) {
                return Err(Error::DimensionMismatch(format!(
                    "polynomial coefficient must be {}x{}, got {}x{}",
                    p,
                    m,
                    coeff.nrows(),
                    coeff.ncols()
                )));
            }
            if !matrix::is_finite(coeff) {
                return Err(Error::NonFiniteData);
            }
        }
        for pole in &self.simple_poles {
            if pole.residue.shape() != (p, m) {
                return Err(Error::DimensionMismatch(format!(
                    "residue must be {}x{}, got {}x{}",
                    p,
                    m,
                    pole.residue.nrows(),
                    pole.residue.ncols()
                )));
            }
            if !matrix::is_finite(&pole.residue) || !pole.q.is_finite() {
                return Err(Error::NonFiniteData);
            }
            if pole.q.norm() <= 1e-8 {
                return Err(Error::PoleAtOrigin);
            }
            if (pole.q.norm() - 1.0).abs() <= tol.dichotomy {
                return Err(Error::PoleOnCircle { q: pole.q });
            }
        }
        Ok(())
    }
}

/// Builds a dichotomous realization of a rational symbol.
///
/// The polynomial part becomes a nilpotent shift block of size
/// `deg * min(p, m)` whose Markov parameters are the coefficients; each
/// simple pole `(q, R)` becomes a block `(1/q) I_r` over a full-rank
/// factorization `R = U V` with `r = rank R`, contributing `-R/q` to the
/// feedthrough. Poles outside the circle land as eigenvalues `1/q`
/// inside, and conversely, so `A` is dichotomous by construction.
pub fn realize_rational(spec: &RationalSymbolSpec) -> Result<StateSpaceSystem> {
    realize_rational_with(spec, &Tolerances::default())
}

pub fn realize_rational_with(
    spec: &RationalSymbolSpec,
    tol: &Tolerances,
) -> Result<StateSpaceSystem> {
    spec.validate(tol)?;
    let (p, m) = spec.dims();

    // Per-block triples (a, b, c); assembled block-diagonally below.
    let mut blocks: Vec<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> = Vec::new();
    let mut d = spec.constant.clone();

    let deg = spec.poly_coeffs.len();
    if deg > 0 {
        let s = p.min(m);
        let size = deg * s;
        let mut a = ComplexMatrix::zeros(size, size);
        let mut b = ComplexMatrix::zeros(size, m);
        let mut c = ComplexMatrix::zeros(p, size);
        if m <= p {
            // Controller form: shift down, inject at the first block,
            // read the coefficients out of C.
            for blk in 0..deg.saturating_sub(1) {
                for i in 0..s {
                    a[((blk + 1) * s + i, blk * s + i)] = c64(1.0, 0.0);
                }
            }
            for i in 0..s {
                b[(i, i)] = c64(1.0, 0.0);
            }
            for (blk, coeff) in spec.poly_coeffs.iter().enumerate() {
                c.view_mut((0, blk * s), (p, s)).copy_from(coeff);
            }
        } else {
            // Observer form: shift up, stack the coefficients into B,
            // read the first block out of C.
            for blk in 0..deg.saturating_sub(1) {
                for i in 0..s {
                    a[(blk * s + i, (blk + 1) * s + i)] = c64(1.0, 0.0);
                }
            }
            for (blk, coeff) in spec.poly_coeffs.iter().enumerate() {
                b.view_mut((blk * s, 0), (s, m)).copy_from(coeff);
            }
            for i in 0..s {
                c[(i, i)] = c64(1.0, 0.0);
            }
        }
        blocks.push((a, b, c));
    }

    for pole in &spec.simple_poles {
        let (u, sv, vt) = lapack::svd_thin(&pole.residue)?;
        let smax = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&s| s > smax * tol.rank).count();
        if rank == 0 {
            return Err(Error::RankDeficiencyTolerance { q: pole.q });
        }
        let mut uf = u.columns(0, rank).into_owned();
        let mut vf = vt.rows(0, rank).into_owned();
        for j in 0..rank {
            let root = c64(sv[j].sqrt(), 0.0);
            uf.column_mut(j).scale_mut(root.re);
            vf.row_mut(j).scale_mut(root.re);
        }
        let q = pole.q;
        let a = eye(rank) / q;
        let b = -&vf / (q * q);
        let c = uf;
        d -= &pole.residue / q;
        blocks.push((a, b, c));
    }

    let n: usize = blocks.iter().map(|(a, _, _)| a.nrows()).sum();
    let mut a = ComplexMatrix::zeros(n, n);
    let mut b = ComplexMatrix::zeros(n, m);
    let mut c = ComplexMatrix::zeros(p, n);
    let mut at = 0usize;
    for (ab, bb, cb) in blocks {
        let k = ab.nrows();
        a.view_mut((at, at), (k, k)).copy_from(&ab);
        b.view_mut((at, 0), (k, m)).copy_from(&bb);
        c.view_mut((0, at), (p, k)).copy_from(&cb);
        at += k;
    }
    StateSpaceSystem::new(a, b, c, d)
}

/// Laurent coefficients of `F` on the unit circle.
///
/// With basis-adapted blocks `A_-, A_+, B_-, B_+, C_-, C_+` the
/// coefficient of `z^k` with `k >= 1` is `C_+ A_+^{k-1} B_+`, the
/// constant term is `D - C_- A_-^{-1} B_-`, and the coefficient of
/// `z^{-k}` with `k >= 1` is `-C_- A_-^{-k-1} B_-`. Returns the
/// coefficients for `k_min..=k_max`, index 0 holding `k_min`.
pub fn fourier_coefficients(
    sys: &StateSpaceSystem,
    info: &DichotomyInfo,
    k_min: i64,
    k_max: i64,
) -> Result<Vec<ComplexMatrix>> {
    if k_min > 0 || k_max < 0 {
        return Err(Error::InvalidArgument(format!(
            "coefficient range must contain zero, got [{k_min}, {k_max}]"
        )));
    }
    let n = sys.order();
    if info.dim_minus + info.dim_plus != n {
        return Err(Error::DimensionMismatch(format!(
            "dichotomy info of order {} applied to a system of order {}",
            info.dim_minus + info.dim_plus,
            n
        )));
    }
    let len = (k_max - k_min + 1) as usize;
    let zero = ComplexMatrix::zeros(sys.outputs(), sys.inputs());
    let at = |k: i64| (k - k_min) as usize;
    if n == 0 {
        let mut out = vec![zero; len];
        out[at(0)] = sys.d().clone();
        return Ok(out);
    }

    let k_minus = info.dim_minus;
    let v = hstack(&info.basis_minus, &info.basis_plus);
    let lu = v.clone().lu();
    let a_t = lu
        .solve(&(sys.a() * &v))
        .ok_or(Error::NotDichotomous { distance: 0.0 })?;
    let b_t = lu
        .solve(sys.b())
        .ok_or(Error::NotDichotomous { distance: 0.0 })?;
    let c_t = sys.c() * &v;

    let a_minus = a_t.view((0, 0), (k_minus, k_minus)).into_owned();
    let a_plus = a_t
        .view((k_minus, k_minus), (n - k_minus, n - k_minus))
        .into_owned();
    let b_minus = b_t.view((0, 0), (k_minus, sys.inputs())).into_owned();
    let b_plus = b_t
        .view((k_minus, 0), (n - k_minus, sys.inputs()))
        .into_owned();
    let c_minus = c_t.view((0, 0), (sys.outputs(), k_minus)).into_owned();
    let c_plus = c_t
        .view((0, k_minus), (sys.outputs(), n - k_minus))
        .into_owned();

    let a_minus_inv = matrix::inverse_guarded(
        &a_minus,
        1e-13,
        Error::InvalidArgument("outside block of A is not invertible".into()),
    )?;

    let mut out = vec![zero; len];

    // Nonnegative powers from the inside block.
    let mut power = eye(n - k_minus);
    for k in 1..=k_max {
        out[at(k)] = &c_plus * &power * &b_plus;
        power = &a_plus * power;
    }
    // Zero and negative powers from the outside block.
    let mut power = a_minus_inv.clone();
    out[at(0)] = sys.d() - &c_minus * &power * &b_minus;
    for k in 1..=(-k_min) {
        power = &a_minus_inv * power;
        out[at(-k)] = -(&c_minus * &power * &b_minus);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn scalar_shift() -> StateSpaceSystem {
        // F(z) = 0.5 z
        StateSpaceSystem::scalar(0.0, 1.0, 0.5, 0.0)
    }

    fn scalar_antistable() -> StateSpaceSystem {
        // F(z) = 0.4 z / (1 - 2z)
        StateSpaceSystem::scalar(2.0, 0.4, 1.0, 0.0)
    }

    #[test]
    fn transfer_examples() {
        let f = scalar_shift().transfer(c64(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(f[(0, 0)].re, 0.5, epsilon = 1e-15);

        let f = scalar_antistable().transfer(c64(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(f[(0, 0)].re, -0.4, epsilon = 1e-14);

        // z = 1/eigenvalue is outside the domain
        let err = scalar_antistable().transfer(c64(0.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::SingularResolvent { .. }));

        // F(0) = D exactly
        let f = scalar_antistable().transfer(Complex64::ZERO).unwrap();
        assert_eq!(f[(0, 0)], Complex64::ZERO);
    }

    #[test]
    fn riesz_projection_of_diagonal() {
        let a = ComplexMatrix::from_diagonal(&crate::ComplexVector::from_vec(vec![
            c64(0.5, 0.0),
            c64(2.0, 0.0),
        ]));
        let p = spectral_projection_riesz(&a, 256, &tol()).unwrap();
        assert_abs_diff_eq!(p[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[(1, 1)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[(0, 1)].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn riesz_projection_of_coupled_matrix() {
        // eigenvectors (1,0) for 0.5 and (1, 1.5) for 2
        let a = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.5, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0)],
        );
        let p = spectral_projection_riesz(&a, 256, &tol()).unwrap();
        assert_abs_diff_eq!(p[(0, 0)].re, 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(p[(0, 1)].re, -2.0 / 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(p[(1, 0)].norm(), 0.0, epsilon = 1e-11);
        assert_abs_diff_eq!(p[(1, 1)].norm(), 0.0, epsilon = 1e-11);
    }

    #[test]
    fn riesz_rejects_spectrum_on_circle() {
        let a = ComplexMatrix::from_element(1, 1, c64(1.0, 0.0));
        assert!(matches!(
            spectral_projection_riesz(&a, 64, &tol()),
            Err(Error::NotDichotomous { .. })
        ));
    }

    #[test]
    fn ordered_projection_matches_riesz_examples() {
        let a = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.5, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0)],
        );
        let p = spectral_projection_ordered(&a, &tol()).unwrap();
        assert_abs_diff_eq!(p[(0, 0)].re, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(p[(0, 1)].re, -2.0 / 3.0, epsilon = 1e-13);

        // zero matrix: everything inside the disc
        let z = ComplexMatrix::zeros(3, 3);
        let p = spectral_projection_ordered(&z, &tol()).unwrap();
        assert_abs_diff_eq!((&p - eye(3)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn dichotomy_info_dimensions_and_margin() {
        let a = ComplexMatrix::from_diagonal(&crate::ComplexVector::from_vec(vec![
            c64(0.5, 0.0),
            c64(2.0, 0.0),
        ]));
        let info = dichotomy_info(&a).unwrap();
        assert_eq!((info.dim_minus, info.dim_plus), (1, 1));
        assert_abs_diff_eq!(info.margin, 0.5, epsilon = 1e-14);

        let z = ComplexMatrix::zeros(2, 2);
        let info = dichotomy_info(&z).unwrap();
        assert_eq!((info.dim_minus, info.dim_plus), (0, 2));
        assert_abs_diff_eq!(info.margin, 1.0, epsilon = 1e-14);

        let near = ComplexMatrix::from_diagonal(&crate::ComplexVector::from_vec(vec![
            c64(0.9, 0.0),
            c64(1.1, 0.0),
        ]));
        let info = dichotomy_info(&near).unwrap();
        assert_eq!((info.dim_minus, info.dim_plus), (1, 1));
        assert_abs_diff_eq!(info.margin, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn sup_norm_examples() {
        assert_abs_diff_eq!(
            sup_norm_on_circle(&scalar_shift(), 128, false).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        // max of |0.4 z / (1 - 2z)| on the circle is 0.4 at z = 1
        assert_abs_diff_eq!(
            sup_norm_on_circle(&scalar_antistable(), 128, true).unwrap(),
            0.4,
            epsilon = 1e-9
        );
        // constant symbol: largest singular value of D
        let constant = StateSpaceSystem::new(
            ComplexMatrix::zeros(0, 0),
            ComplexMatrix::zeros(0, 2),
            ComplexMatrix::zeros(2, 0),
            ComplexMatrix::from_row_slice(
                2,
                2,
                &[c64(0.3, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.7, 0.0)],
            ),
        )
        .unwrap();
        assert_abs_diff_eq!(
            sup_norm_on_circle(&constant, 64, false).unwrap(),
            0.7,
            epsilon = 1e-14
        );
    }

    #[test]
    fn sup_norm_rejects_small_grid() {
        assert!(matches!(
            sup_norm_on_circle(&scalar_shift(), 32, false),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn realize_single_pole() {
        // F(z) = -0.2 / (z - 0.5) equals 0.4 z / (1 - 2z)
        let spec = RationalSymbolSpec {
            constant: ComplexMatrix::zeros(1, 1),
            poly_coeffs: vec![],
            simple_poles: vec![SimplePole {
                q: c64(0.5, 0.0),
                residue: ComplexMatrix::from_element(1, 1, c64(-0.2, 0.0)),
            }],
        };
        let sys = realize_rational(&spec).unwrap();
        assert_eq!(sys.order(), 1);
        assert_abs_diff_eq!(sys.a()[(0, 0)].re, 2.0, epsilon = 1e-14);
        let f = sys.transfer(c64(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(f[(0, 0)].re, -0.4, epsilon = 1e-13);
    }

    #[test]
    fn realize_polynomial_part() {
        let spec = RationalSymbolSpec {
            constant: ComplexMatrix::zeros(1, 1),
            poly_coeffs: vec![ComplexMatrix::from_element(1, 1, c64(0.5, 0.0))],
            simple_poles: vec![],
        };
        let sys = realize_rational(&spec).unwrap();
        assert_eq!(sys.order(), 1);
        assert_abs_diff_eq!(sys.a()[(0, 0)].norm(), 0.0, epsilon = 1e-15);
        let f = sys.transfer(c64(0.3, 0.4)).unwrap();
        assert_abs_diff_eq!(f[(0, 0)].re, 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(f[(0, 0)].im, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn realize_rejects_bad_poles() {
        let base = RationalSymbolSpec {
            constant: ComplexMatrix::zeros(1, 1),
            poly_coeffs: vec![],
            simple_poles: vec![SimplePole {
                q: c64(1.0, 0.0),
                residue: ComplexMatrix::from_element(1, 1, c64(1.0, 0.0)),
            }],
        };
        assert!(matches!(
            realize_rational(&base),
            Err(Error::PoleOnCircle { .. })
        ));

        let origin = RationalSymbolSpec {
            constant: ComplexMatrix::zeros(1, 1),
            poly_coeffs: vec![],
            simple_poles: vec![SimplePole {
                q: Complex64::ZERO,
                residue: ComplexMatrix::from_element(1, 1, c64(1.0, 0.0)),
            }],
        };
        assert!(matches!(realize_rational(&origin), Err(Error::PoleAtOrigin)));

        let zero_res = RationalSymbolSpec {
            constant: ComplexMatrix::zeros(1, 1),
            poly_coeffs: vec![],
            simple_poles: vec![SimplePole {
                q: c64(0.5, 0.0),
                residue: ComplexMatrix::zeros(1, 1),
            }],
        };
        assert!(matches!(
            realize_rational(&zero_res),
            Err(Error::RankDeficiencyTolerance { .. })
        ));
    }

    #[test]
    fn fourier_coefficients_of_antistable_pole() {
        let sys = scalar_antistable();
        let info = dichotomy_info(sys.a()).unwrap();
        let coeffs = fourier_coefficients(&sys, &info, -2, 1).unwrap();
        // -0.2 sum_k 2^{-k} z^{-k}
        assert_abs_diff_eq!(coeffs[2][(0, 0)].re, -0.2, epsilon = 1e-14); // k = 0
        assert_abs_diff_eq!(coeffs[1][(0, 0)].re, -0.1, epsilon = 1e-14); // k = -1
        assert_abs_diff_eq!(coeffs[0][(0, 0)].re, -0.05, epsilon = 1e-14); // k = -2
        assert_abs_diff_eq!(coeffs[3][(0, 0)].norm(), 0.0, epsilon = 1e-14); // k = 1
    }

    #[test]
    fn fourier_coefficients_of_shift() {
        let sys = scalar_shift();
        let info = dichotomy_info(sys.a()).unwrap();
        let coeffs = fourier_coefficients(&sys, &info, -2, 3).unwrap();
        for (i, c) in coeffs.iter().enumerate() {
            let k = i as i64 - 2;
            let expect = if k == 1 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(c[(0, 0)].re, expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn fourier_coefficients_of_constant() {
        let d = ComplexMatrix::from_element(1, 1, c64(0.25, -0.5));
        let sys = StateSpaceSystem::new(
            ComplexMatrix::zeros(0, 0),
            ComplexMatrix::zeros(0, 1),
            ComplexMatrix::zeros(1, 0),
            d.clone(),
        )
        .unwrap();
        let info = dichotomy_info(sys.a()).unwrap();
        let coeffs = fourier_coefficients(&sys, &info, -1, 1).unwrap();
        assert_abs_diff_eq!((&coeffs[1] - &d).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coeffs[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coeffs[2].norm(), 0.0, epsilon = 1e-15);
    }
}
