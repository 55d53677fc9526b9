//! Canonical Wiener-Hopf factorization of `G = I + F` on the unit circle.
//!
//! Writing `A^x = A - B(I + D)^{-1}C` for the main operator of the
//! realization of `G^{-1}`, the state space decomposes both as
//! `X = X_- (+) X_+^x` and as `X = X_-^x (+) X_+`, where `(X_-, X_+)` and
//! `(X_-^x, X_+^x)` are the dichotomous pairs of `A` and `A^x`. In a basis
//! adapted to the first decomposition `A` becomes upper block triangular
//! and `A^x` lower block triangular, with
//!
//! `spec(A_11) in E, spec(A_22) in D, spec(A^x_11) in E, spec(A^x_22) in D`,
//!
//! and with any splitting `I + D = D_1 D_2` the factors of the right
//! factorization `G = V_- V_+` read
//!
//! `V_-(z) = D_1 + z C_1 (I - z A_11)^{-1} B_1 D_2^{-1}`
//! `V_+(z) = D_2 + z D_1^{-1} C_2 (I - z A_22)^{-1} B_2`
//! `V_+(z)^{-1} = D_2^{-1} - z (I+D)^{-1} C_2 (I - z A^x_22)^{-1} B_2 D_2^{-1}`
//! `V_-(z)^{-1} = D_1^{-1} - z D_1^{-1} C_1 (I - z A^x_11)^{-1} B_1 (I+D)^{-1}`.
//!
//! The second decomposition produces the left factorization `G = W_+ W_-`
//! the same way. The spectral containments above certify that each plus
//! factor extends analytically over the closed disc and each minus factor
//! over the closed exterior.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{self, c64, eye, hstack, ComplexMatrix};
use crate::realization::{self, DichotomyInfo, StateSpaceSystem};
use crate::Tolerances;

/// Which canonical factorization to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `G = V_- V_+`
    Right,
    /// `G = W_+ W_-`
    Left,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
        }
    }
}

/// Analyticity domain of a factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorDomain {
    /// Analytic on a neighborhood of the closed unit disc.
    Inner,
    /// Analytic on a neighborhood of the closed exterior.
    Outer,
}

impl FactorDomain {
    pub fn as_str(self) -> &'static str {
        match self {
            FactorDomain::Inner => "inner",
            FactorDomain::Outer => "outer",
        }
    }
}

/// Strategy for splitting `I + D = D_1 D_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitStrategy {
    /// `D_1 = I + D`, `D_2 = I`.
    #[default]
    LeftIdentity,
    /// `D_1 = I`, `D_2 = I + D`.
    RightIdentity,
    /// Both factors equal to the principal square root of `I + D`.
    SymmetricSqrt,
}

impl SplitStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitStrategy::LeftIdentity => "left_identity",
            SplitStrategy::RightIdentity => "right_identity",
            SplitStrategy::SymmetricSqrt => "symmetric_sqrt",
        }
    }
}

/// A factorization `I + D = D_1 D_2` with both factors invertible.
#[derive(Debug, Clone)]
pub struct DSplit {
    pub d1: ComplexMatrix,
    pub d2: ComplexMatrix,
    pub strategy: SplitStrategy,
}

/// The associate main operator `A^x` with the dichotomy data of the
/// inverse system.
#[derive(Debug, Clone)]
pub struct CrossData {
    pub a_cross: ComplexMatrix,
    pub info_cross: DichotomyInfo,
    pub id_plus_d_inv: ComplexMatrix,
}

/// State-space realization of one factor,
/// `value(z) = dterm + z cvec (I - z amat)^{-1} bvec`, together with its
/// certified analyticity domain.
#[derive(Debug, Clone)]
pub struct FactorRealization {
    pub dterm: ComplexMatrix,
    pub cvec: ComplexMatrix,
    pub amat: ComplexMatrix,
    pub bvec: ComplexMatrix,
    pub domain: FactorDomain,
    /// Largest eigenvalue modulus of `amat` for inner factors, smallest
    /// for outer ones.
    pub spectrum_bound: f64,
}

impl FactorRealization {
    /// Number of states.
    pub fn states(&self) -> usize {
        self.amat.nrows()
    }

    /// Evaluates the factor; fails with `SingularResolvent` at the
    /// reciprocal spectrum of `amat`.
    pub fn eval(&self, z: Complex64) -> Result<ComplexMatrix> {
        if self.states() == 0 || z == Complex64::ZERO {
            return Ok(self.dterm.clone());
        }
        let x = realization::resolvent_solve(&self.amat, z, &self.bvec)?;
        Ok(&self.dterm + (&self.cvec * x) * z)
    }
}

/// Evaluates a factor realization at a point.
pub fn eval_factor(f: &FactorRealization, z: Complex64) -> Result<ComplexMatrix> {
    f.eval(z)
}

/// A canonical Wiener-Hopf factorization with realizations of both
/// factors and both inverse factors.
#[derive(Debug, Clone)]
pub struct WienerHopfFactorization {
    pub side: Side,
    pub factor_outer: FactorRealization,
    pub factor_inner: FactorRealization,
    pub inverse_outer: FactorRealization,
    pub inverse_inner: FactorRealization,
    /// The matching projection: onto `X_+^x` along `X_-` for the right
    /// side, onto `X_-^x` along `X_+` for the left side.
    pub projection: ComplexMatrix,
    /// Condition number of the matched-basis matrix.
    pub basis_cond: f64,
}

impl WienerHopfFactorization {
    /// Product of the factors in the order dictated by the side:
    /// `V_-(z) V_+(z)` or `W_+(z) W_-(z)`.
    pub fn product(&self, z: Complex64) -> Result<ComplexMatrix> {
        match self.side {
            Side::Right => Ok(self.factor_outer.eval(z)? * self.factor_inner.eval(z)?),
            Side::Left => Ok(self.factor_inner.eval(z)? * self.factor_outer.eval(z)?),
        }
    }

    /// The four factors with conventional names.
    pub fn named_factors(&self) -> [(&'static str, &FactorRealization); 4] {
        match self.side {
            Side::Right => [
                ("V_minus", &self.factor_outer),
                ("V_plus", &self.factor_inner),
                ("V_minus_inverse", &self.inverse_outer),
                ("V_plus_inverse", &self.inverse_inner),
            ],
            Side::Left => [
                ("W_plus", &self.factor_inner),
                ("W_minus", &self.factor_outer),
                ("W_plus_inverse", &self.inverse_inner),
                ("W_minus_inverse", &self.inverse_outer),
            ],
        }
    }
}

/// The associate main operator `A^x = A - B(I + D)^{-1} C`.
pub fn a_cross(sys: &StateSpaceSystem) -> Result<ComplexMatrix> {
    let id_plus_d_inv = invert_id_plus_d(sys)?;
    Ok(sys.a() - sys.b() * id_plus_d_inv * sys.c())
}

fn invert_id_plus_d(sys: &StateSpaceSystem) -> Result<ComplexMatrix> {
    if !sys.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "I + D needs a square D, got {}x{}",
            sys.outputs(),
            sys.inputs()
        )));
    }
    let id_plus_d = eye(sys.inputs()) + sys.d();
    matrix::inverse_guarded(&id_plus_d, 1e-12, Error::SingularIPlusD)
}

/// `A^x` together with its dichotomy data and `(I + D)^{-1}`.
pub fn cross_data(sys: &StateSpaceSystem, tol: &Tolerances) -> Result<CrossData> {
    let id_plus_d_inv = invert_id_plus_d(sys)?;
    let a_cross = sys.a() - sys.b() * &id_plus_d_inv * sys.c();
    let info_cross = realization::dichotomy_info_with(&a_cross, tol)?;
    Ok(CrossData {
        a_cross,
        info_cross,
        id_plus_d_inv,
    })
}

/// Realization of `G(z)^{-1}` for `G = I + F`: main operator `A^x`,
/// control `B(I+D)^{-1}`, observation `-(I+D)^{-1}C` and feedthrough
/// `(I+D)^{-1} - I`, so that `I + transfer` evaluates to `G^{-1}`.
pub fn inverse_system(sys: &StateSpaceSystem) -> Result<StateSpaceSystem> {
    let id_plus_d_inv = invert_id_plus_d(sys)?;
    let a_cross = sys.a() - sys.b() * &id_plus_d_inv * sys.c();
    StateSpaceSystem::new(
        a_cross,
        sys.b() * &id_plus_d_inv,
        -(&id_plus_d_inv * sys.c()),
        &id_plus_d_inv - eye(sys.inputs()),
    )
}

/// The matching projection for the chosen side, with the condition
/// number of the stacked-basis matrix.
///
/// Right side: `T = [basis(X_-) | basis(X_+^x)]` and the projection maps
/// onto `X_+^x` along `X_-`. Left side: `T = [basis(X_+) | basis(X_-^x)]`
/// and the projection maps onto `X_-^x` along `X_+`.
pub fn matching_projection(
    info: &DichotomyInfo,
    cross: &CrossData,
    side: Side,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, f64)> {
    let (along, onto) = match side {
        Side::Right => (&info.basis_minus, &cross.info_cross.basis_plus),
        Side::Left => (&info.basis_plus, &cross.info_cross.basis_minus),
    };
    oblique_matching(along, onto, tol)
}

/// Projection onto the second subspace along the first, from orthonormal
/// bases of complementary subspaces.
fn oblique_matching(
    along: &ComplexMatrix,
    onto: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, f64)> {
    let n = along.nrows().max(onto.nrows());
    let k = along.ncols();
    if k + onto.ncols() != n {
        return Err(Error::MatchingFailed { cond: f64::INFINITY });
    }
    if n == 0 {
        return Ok((ComplexMatrix::zeros(0, 0), 1.0));
    }
    let t = hstack(along, onto);
    let cond = matrix::cond2(&t)?;
    if !cond.is_finite() || cond > tol.matching {
        return Err(Error::MatchingFailed { cond });
    }
    let tinv = t
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::MatchingFailed { cond: f64::INFINITY })?;
    let mut selector = ComplexMatrix::zeros(n, n);
    for i in k..n {
        selector[(i, i)] = c64(1.0, 0.0);
    }
    Ok((&t * selector * tinv, cond))
}

/// Splits `I + D = D_1 D_2` by the requested strategy.
pub fn split_identity_plus_d(d: &ComplexMatrix, strategy: SplitStrategy) -> Result<DSplit> {
    if d.nrows() != d.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "D must be square, got {}x{}",
            d.nrows(),
            d.ncols()
        )));
    }
    let m = d.nrows();
    let id_plus_d = eye(m) + d;
    // Invertibility gate shared by all strategies.
    matrix::inverse_guarded(&id_plus_d, 1e-12, Error::SingularIPlusD)?;
    let (d1, d2) = match strategy {
        SplitStrategy::LeftIdentity => (id_plus_d, eye(m)),
        SplitStrategy::RightIdentity => (eye(m), id_plus_d),
        SplitStrategy::SymmetricSqrt => {
            let root = matrix::principal_sqrt(&id_plus_d)?;
            (root.clone(), root)
        }
    };
    Ok(DSplit { d1, d2, strategy })
}

struct BlockData {
    a11: ComplexMatrix,
    a22: ComplexMatrix,
    ax11: ComplexMatrix,
    ax22: ComplexMatrix,
    b1: ComplexMatrix,
    b2: ComplexMatrix,
    c1: ComplexMatrix,
    c2: ComplexMatrix,
}

/// Change of basis to `[first | second]` coordinates and block extraction
/// of `A`, `A^x`, `B`, `C`.
fn extract_blocks(
    sys: &StateSpaceSystem,
    a_cross: &ComplexMatrix,
    first: &ComplexMatrix,
    second: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(BlockData, f64)> {
    let n = sys.order();
    let k = first.ncols();
    if k + second.ncols() != n {
        return Err(Error::MatchingFailed { cond: f64::INFINITY });
    }
    let t = hstack(first, second);
    let cond = if n == 0 { 1.0 } else { matrix::cond2(&t)? };
    if !cond.is_finite() || cond > tol.matching {
        return Err(Error::MatchingFailed { cond });
    }
    let (a_t, ax_t, b_t) = if n == 0 {
        (
            ComplexMatrix::zeros(0, 0),
            ComplexMatrix::zeros(0, 0),
            ComplexMatrix::zeros(0, sys.inputs()),
        )
    } else {
        let lu = t.clone().lu();
        let solve = |rhs: &ComplexMatrix| {
            lu.solve(rhs)
                .ok_or(Error::MatchingFailed { cond: f64::INFINITY })
        };
        (
            solve(&(sys.a() * &t))?,
            solve(&(a_cross * &t))?,
            solve(sys.b())?,
        )
    };
    let c_t = sys.c() * &t;
    let (p, m) = (sys.outputs(), sys.inputs());
    Ok((
        BlockData {
            a11: a_t.view((0, 0), (k, k)).into_owned(),
            a22: a_t.view((k, k), (n - k, n - k)).into_owned(),
            ax11: ax_t.view((0, 0), (k, k)).into_owned(),
            ax22: ax_t.view((k, k), (n - k, n - k)).into_owned(),
            b1: b_t.view((0, 0), (k, m)).into_owned(),
            b2: b_t.view((k, 0), (n - k, m)).into_owned(),
            c1: c_t.view((0, 0), (p, k)).into_owned(),
            c2: c_t.view((0, k), (p, n - k)).into_owned(),
        },
        cond,
    ))
}

fn certify_domain(
    amat: ComplexMatrix,
    dterm: ComplexMatrix,
    cvec: ComplexMatrix,
    bvec: ComplexMatrix,
    domain: FactorDomain,
    what: &str,
    tol: &Tolerances,
) -> Result<FactorRealization> {
    let eigs = matrix::eigenvalues(&amat)?;
    let spectrum_bound = match domain {
        FactorDomain::Inner => {
            let bound = eigs.iter().map(|l| l.norm()).fold(0.0, f64::max);
            if bound > 1.0 - tol.dichotomy {
                return Err(Error::SpectralContainmentViolated(format!(
                    "{what}: eigenvalue modulus {bound} not inside the disc"
                )));
            }
            bound
        }
        FactorDomain::Outer => {
            let bound = eigs.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
            if bound < 1.0 + tol.dichotomy {
                return Err(Error::SpectralContainmentViolated(format!(
                    "{what}: eigenvalue modulus {bound} not outside the disc"
                )));
            }
            bound
        }
    };
    Ok(FactorRealization {
        dterm,
        cvec,
        amat,
        bvec,
        domain,
        spectrum_bound,
    })
}

/// Computes the canonical Wiener-Hopf factorization of `G = I + F` for
/// the given side and splitting of `I + D`.
pub fn factorize(
    sys: &StateSpaceSystem,
    side: Side,
    strategy: SplitStrategy,
) -> Result<WienerHopfFactorization> {
    factorize_with(sys, side, strategy, &Tolerances::default())
}

pub fn factorize_with(
    sys: &StateSpaceSystem,
    side: Side,
    strategy: SplitStrategy,
    tol: &Tolerances,
) -> Result<WienerHopfFactorization> {
    let info = realization::dichotomy_info_with(sys.a(), tol)?;

    let sup = realization::sup_norm_on_circle(sys, 512, true)?;
    if sup >= 1.0 - tol.norm {
        return Err(Error::NormNotStrictlyContractive { sup });
    }

    // Dichotomy of A cross is guaranteed once the norm gate passed.
    let cross = cross_data(sys, tol)?;
    let dsplit = split_identity_plus_d(sys.d(), strategy)?;
    factorize_prepared(sys, side, &dsplit, &info, &cross, tol)
}

/// Factorization from precomputed dichotomy data and D-split; the entry
/// point for callers that reuse the analysis across sides or strategies.
pub fn factorize_prepared(
    sys: &StateSpaceSystem,
    side: Side,
    dsplit: &DSplit,
    info: &DichotomyInfo,
    cross: &CrossData,
    tol: &Tolerances,
) -> Result<WienerHopfFactorization> {
    let m = sys.inputs();
    if dsplit.d1.shape() != (m, m) || dsplit.d2.shape() != (m, m) {
        return Err(Error::DimensionMismatch(format!(
            "D-split factors must be {m}x{m}"
        )));
    }

    // Basis in the block order of the factor formulas: [X_- | X_+^x] for
    // the right side, [X_-^x | X_+] for the left side.
    let (first, second) = match side {
        Side::Right => (&info.basis_minus, &cross.info_cross.basis_plus),
        Side::Left => (&cross.info_cross.basis_minus, &info.basis_plus),
    };
    let (blocks, basis_cond) = extract_blocks(sys, &cross.a_cross, first, second, tol)?;

    // The projection of the theorems maps onto the cross subspace: the
    // second block for the right side, the first for the left side.
    let n = sys.order();
    let projection = if n == 0 {
        ComplexMatrix::zeros(0, 0)
    } else {
        let t = hstack(first, second);
        let tinv = t
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::MatchingFailed { cond: f64::INFINITY })?;
        let k = first.ncols();
        let mut selector = ComplexMatrix::zeros(n, n);
        let range = match side {
            Side::Right => k..n,
            Side::Left => 0..k,
        };
        for i in range {
            selector[(i, i)] = c64(1.0, 0.0);
        }
        &t * selector * tinv
    };

    let d1 = &dsplit.d1;
    let d2 = &dsplit.d2;
    let d1_inv = matrix::inverse_guarded(d1, 1e-12, Error::SingularIPlusD)?;
    let d2_inv = matrix::inverse_guarded(d2, 1e-12, Error::SingularIPlusD)?;
    let id_plus_d_inv = &cross.id_plus_d_inv;

    let (factor_outer, factor_inner, inverse_outer, inverse_inner) = match side {
        Side::Right => {
            let v_minus = certify_domain(
                blocks.a11.clone(),
                d1.clone(),
                blocks.c1.clone(),
                &blocks.b1 * &d2_inv,
                FactorDomain::Outer,
                "V_minus",
                tol,
            )?;
            let v_plus = certify_domain(
                blocks.a22.clone(),
                d2.clone(),
                &d1_inv * &blocks.c2,
                blocks.b2.clone(),
                FactorDomain::Inner,
                "V_plus",
                tol,
            )?;
            let v_minus_inv = certify_domain(
                blocks.ax11.clone(),
                d1_inv.clone(),
                -(&d1_inv * &blocks.c1),
                &blocks.b1 * id_plus_d_inv,
                FactorDomain::Outer,
                "V_minus_inverse",
                tol,
            )?;
            let v_plus_inv = certify_domain(
                blocks.ax22.clone(),
                d2_inv.clone(),
                -(id_plus_d_inv * &blocks.c2),
                &blocks.b2 * &d2_inv,
                FactorDomain::Inner,
                "V_plus_inverse",
                tol,
            )?;
            (v_minus, v_plus, v_minus_inv, v_plus_inv)
        }
        Side::Left => {
            let w_plus = certify_domain(
                blocks.a22.clone(),
                d1.clone(),
                blocks.c2.clone(),
                &blocks.b2 * &d2_inv,
                FactorDomain::Inner,
                "W_plus",
                tol,
            )?;
            let w_minus = certify_domain(
                blocks.a11.clone(),
                d2.clone(),
                &d1_inv * &blocks.c1,
                blocks.b1.clone(),
                FactorDomain::Outer,
                "W_minus",
                tol,
            )?;
            let w_plus_inv = certify_domain(
                blocks.ax22.clone(),
                d1_inv.clone(),
                -(&d1_inv * &blocks.c2),
                &blocks.b2 * id_plus_d_inv,
                FactorDomain::Inner,
                "W_plus_inverse",
                tol,
            )?;
            let w_minus_inv = certify_domain(
                blocks.ax11.clone(),
                d2_inv.clone(),
                -(id_plus_d_inv * &blocks.c1),
                &blocks.b1 * &d2_inv,
                FactorDomain::Outer,
                "W_minus_inverse",
                tol,
            )?;
            (w_minus, w_plus, w_minus_inv, w_plus_inv)
        }
    };

    Ok(WienerHopfFactorization {
        side,
        factor_outer,
        factor_inner,
        inverse_outer,
        inverse_inner,
        projection,
        basis_cond,
    })
}
