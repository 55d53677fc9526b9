//! Finite sections of the block Toeplitz operator with symbol `G` and
//! their inversion through the Wiener-Hopf factors.
//!
//! The section of order `N` has block `(i, j)` equal to the Laurent
//! coefficient of `G` at offset `i - j`. For the right factorization
//! `G = V_- V_+`, the coefficients of `V_+^{-1}` live on nonnegative
//! offsets and those of `V_-^{-1}` on nonpositive offsets, so
//! `T(G)^{-1} = T(V_+^{-1}) T(V_-^{-1})` holds for the one-sided
//! operator; applying the two triangular sections approximates the
//! finite solve away from the truncation boundary.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::{self, eye, ComplexMatrix, ComplexVector};
use crate::realization::{self, DichotomyInfo, StateSpaceSystem};
use crate::wiener_hopf::{FactorRealization, Side, WienerHopfFactorization};
use crate::Tolerances;

/// A finite block Toeplitz section with its assembled dense matrix.
#[derive(Debug, Clone)]
pub struct ToeplitzSection {
    pub symbol_coeffs: BTreeMap<i64, ComplexMatrix>,
    pub n_blocks: usize,
    pub block_rows: usize,
    pub block_cols: usize,
    pub matrix: ComplexMatrix,
}

impl ToeplitzSection {
    /// Assembles the section from symbol coefficients; offsets absent
    /// from the map are zero blocks.
    pub fn from_coeffs(
        symbol_coeffs: BTreeMap<i64, ComplexMatrix>,
        n_blocks: usize,
        block_rows: usize,
        block_cols: usize,
    ) -> Result<Self> {
        for (k, block) in &symbol_coeffs {
            if block.shape() != (block_rows, block_cols) {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient at offset {k} has shape {}x{}, expected {}x{}",
                    block.nrows(),
                    block.ncols(),
                    block_rows,
                    block_cols
                )));
            }
        }
        let mut matrix = ComplexMatrix::zeros(n_blocks * block_rows, n_blocks * block_cols);
        for i in 0..n_blocks {
            for j in 0..n_blocks {
                if let Some(block) = symbol_coeffs.get(&(i as i64 - j as i64)) {
                    matrix
                        .view_mut((i * block_rows, j * block_cols), (block_rows, block_cols))
                        .copy_from(block);
                }
            }
        }
        Ok(ToeplitzSection {
            symbol_coeffs,
            n_blocks,
            block_rows,
            block_cols,
            matrix,
        })
    }
}

/// Builds the order-`n_blocks` section of `T(G)` for `G = I + F` from the
/// Laurent coefficients of the realized `F`. The coefficient range must
/// cover every offset of the section, `[-(n_blocks-1), n_blocks-1]`;
/// coefficients outside the stored range are zero, with truncation error
/// geometric in the dichotomy margin.
pub fn build_section(
    sys: &StateSpaceSystem,
    info: &DichotomyInfo,
    n_blocks: usize,
    k_range: (i64, i64),
) -> Result<ToeplitzSection> {
    if n_blocks == 0 {
        return Err(Error::InvalidArgument("section needs at least one block".into()));
    }
    let needed = n_blocks as i64 - 1;
    if k_range.0 > -needed || k_range.1 < needed {
        return Err(Error::InvalidArgument(format!(
            "coefficient range [{}, {}] does not cover the section range [{}, {}]",
            k_range.0, k_range.1, -needed, needed
        )));
    }
    let coeffs = realization::fourier_coefficients(sys, info, k_range.0, k_range.1)?;
    let mut symbol_coeffs = BTreeMap::new();
    let id = eye(sys.inputs());
    for (idx, block) in coeffs.into_iter().enumerate() {
        let k = k_range.0 + idx as i64;
        let block = if k == 0 { block + &id } else { block };
        symbol_coeffs.insert(k, block);
    }
    ToeplitzSection::from_coeffs(symbol_coeffs, n_blocks, sys.outputs(), sys.inputs())
}

/// Dense direct solve of the assembled section; the oracle for the
/// factorization route.
pub fn solve_direct(section: &ToeplitzSection, rhs: &ComplexVector) -> Result<ComplexVector> {
    let n = section.matrix.nrows();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, section has order {}",
            rhs.len(),
            n
        )));
    }
    let (smin, smax) = matrix::singular_extremes(&section.matrix)?;
    if smin <= 1e-13 * smax.max(1.0) {
        return Err(Error::SingularSection);
    }
    section
        .matrix
        .clone()
        .lu()
        .solve(rhs)
        .ok_or(Error::SingularSection)
}

/// Laurent coefficients of an inner-domain factor on offsets
/// `0..=count`: `c_0 = dterm`, `c_k = cvec amat^{k-1} bvec`.
fn inner_coefficients(f: &FactorRealization, count: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(count + 1);
    out.push(f.dterm.clone());
    let mut power = eye(f.states());
    for _ in 1..=count {
        out.push(&f.cvec * &power * &f.bvec);
        power = &f.amat * &power;
    }
    out
}

/// Laurent coefficients of an outer-domain factor on offsets
/// `0..=-count`: `c_0 = dterm - cvec amat^{-1} bvec`,
/// `c_{-k} = -cvec amat^{-k-1} bvec`.
fn outer_coefficients(f: &FactorRealization, count: usize) -> Result<Vec<ComplexMatrix>> {
    let mut out = Vec::with_capacity(count + 1);
    if f.states() == 0 {
        out.push(f.dterm.clone());
        let zero = ComplexMatrix::zeros(f.dterm.nrows(), f.dterm.ncols());
        out.extend(std::iter::repeat_n(zero, count));
        return Ok(out);
    }
    let a_inv = matrix::inverse_guarded(
        &f.amat,
        1e-13,
        Error::SpectralContainmentViolated("outer factor matrix is singular".into()),
    )?;
    let mut power = a_inv.clone();
    out.push(&f.dterm - &f.cvec * &power * &f.bvec);
    for _ in 1..=count {
        power = &a_inv * &power;
        out.push(-(&f.cvec * &power * &f.bvec));
    }
    Ok(out)
}

/// Block lower-triangular Toeplitz apply: coefficients on nonnegative
/// offsets.
fn apply_lower(coeffs: &[ComplexMatrix], n_blocks: usize, m: usize, x: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(n_blocks * m);
    for i in 0..n_blocks {
        let mut acc = ComplexVector::zeros(m);
        for j in 0..=i {
            let k = i - j;
            if k < coeffs.len() {
                acc += &coeffs[k] * x.rows(j * m, m);
            }
        }
        out.rows_mut(i * m, m).copy_from(&acc);
    }
    out
}

/// Block upper-triangular Toeplitz apply: coefficients on nonpositive
/// offsets, `coeffs[k]` holding offset `-k`.
fn apply_upper(coeffs: &[ComplexMatrix], n_blocks: usize, m: usize, x: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(n_blocks * m);
    for i in 0..n_blocks {
        let mut acc = ComplexVector::zeros(m);
        for j in i..n_blocks {
            let k = j - i;
            if k < coeffs.len() {
                acc += &coeffs[k] * x.rows(j * m, m);
            }
        }
        out.rows_mut(i * m, m).copy_from(&acc);
    }
    out
}

/// Solves `T_N(G) x = b` approximately through the right factorization:
/// `x = T_N(V_+^{-1}) T_N(V_-^{-1}) b`, with the inverse-factor
/// coefficient series truncated after `tail` terms. The truncation is
/// certified: the first omitted coefficient must be negligible, otherwise
/// `TailTooShort` is returned.
pub fn solve_via_factorization(
    wh: &WienerHopfFactorization,
    rhs: &ComplexVector,
    n_blocks: usize,
    tail: usize,
) -> Result<ComplexVector> {
    solve_via_factorization_with(wh, rhs, n_blocks, tail, &Tolerances::default())
}

pub fn solve_via_factorization_with(
    wh: &WienerHopfFactorization,
    rhs: &ComplexVector,
    n_blocks: usize,
    tail: usize,
    tol: &Tolerances,
) -> Result<ComplexVector> {
    if wh.side != Side::Right {
        return Err(Error::InvalidArgument(
            "the Toeplitz solve needs a right factorization".into(),
        ));
    }
    let m = wh.factor_inner.dterm.ncols();
    if rhs.len() != n_blocks * m {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, expected {}",
            rhs.len(),
            n_blocks * m
        )));
    }
    if tail == 0 {
        return Err(Error::InvalidArgument("tail must be positive".into()));
    }

    // The triangular sections use offsets up to n_blocks - 1, truncated
    // at the requested tail.
    let used = (n_blocks - 1).min(tail);
    let plus_inv = inner_coefficients(&wh.inverse_inner, used);
    let minus_inv = outer_coefficients(&wh.inverse_outer, used)?;

    let tail_norm = {
        let inner_tail = tail_coefficient_norm_inner(&wh.inverse_inner, tail);
        let outer_tail = tail_coefficient_norm_outer(&wh.inverse_outer, tail)?;
        inner_tail.max(outer_tail)
    };
    if tail_norm > tol.tail {
        return Err(Error::TailTooShort { norm: tail_norm });
    }

    let y = apply_upper(&minus_inv, n_blocks, m, rhs);
    Ok(apply_lower(&plus_inv, n_blocks, m, &y))
}

fn tail_coefficient_norm_inner(f: &FactorRealization, tail: usize) -> f64 {
    if f.states() == 0 {
        return 0.0;
    }
    let mut power = eye(f.states());
    for _ in 1..tail {
        power = &f.amat * &power;
    }
    matrix::op_norm(&(&f.cvec * power * &f.bvec))
}

fn tail_coefficient_norm_outer(f: &FactorRealization, tail: usize) -> Result<f64> {
    if f.states() == 0 {
        return Ok(0.0);
    }
    let a_inv = matrix::inverse_guarded(
        &f.amat,
        1e-13,
        Error::SpectralContainmentViolated("outer factor matrix is singular".into()),
    )?;
    let mut power = a_inv.clone();
    for _ in 1..=tail {
        power = &a_inv * &power;
    }
    Ok(matrix::op_norm(&(&f.cvec * power * &f.bvec)))
}
