//! Seeded generation of random symbols and dichotomous matrices for
//! tests and demonstrations. All draws are deterministic in the supplied
//! generator state.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{self, c64, ComplexMatrix};
use crate::realization::{
    realize_rational, sup_norm_on_circle, RationalSymbolSpec, SimplePole, StateSpaceSystem,
};

/// Shape of a random rational symbol.
#[derive(Debug, Clone)]
pub struct SymbolOptions {
    /// Square dimension `p = m`.
    pub dim: usize,
    /// Degree of the polynomial part.
    pub poly_degree: usize,
    /// Number of poles outside the circle (realized inside the disc).
    pub poles_outside: usize,
    /// Number of poles inside the circle (realized outside the disc).
    pub poles_inside: usize,
    /// Minimal distance of every pole to the unit circle.
    pub pole_clearance: f64,
    /// Maximal rank of each residue.
    pub max_residue_rank: usize,
    /// The sup norm of `F` on the circle after rescaling.
    pub target_sup: f64,
}

impl Default for SymbolOptions {
    fn default() -> Self {
        SymbolOptions {
            dim: 2,
            poly_degree: 1,
            poles_outside: 1,
            poles_inside: 1,
            pole_clearance: 0.2,
            max_residue_rank: 2,
            target_sup: 0.8,
        }
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * std::f64::consts::PI)
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c64(
            (rng.random::<f64>() * 2.0 - 1.0) * scale,
            (rng.random::<f64>() * 2.0 - 1.0) * scale,
        )
    })
}

fn random_low_rank<R: Rng>(rng: &mut R, dim: usize, max_rank: usize, scale: f64) -> ComplexMatrix {
    let rank = rng.random_range(1..=max_rank.clamp(1, dim));
    random_matrix(rng, dim, rank, scale) * random_matrix(rng, rank, dim, 1.0)
}

fn scaled(spec: &RationalSymbolSpec, s: f64) -> RationalSymbolSpec {
    let sc = c64(s, 0.0);
    RationalSymbolSpec {
        constant: &spec.constant * sc,
        poly_coeffs: spec.poly_coeffs.iter().map(|m| m * sc).collect(),
        simple_poles: spec
            .simple_poles
            .iter()
            .map(|p| SimplePole {
                q: p.q,
                residue: &p.residue * sc,
            })
            .collect(),
    }
}

/// Draws a rational symbol obeying the options, realizes it, and rescales
/// so the circle sup norm hits `target_sup` and `I + D` stays well
/// conditioned. Returns the scaled spec with its realization.
pub fn random_symbol<R: Rng>(
    rng: &mut R,
    opts: &SymbolOptions,
) -> Result<(RationalSymbolSpec, StateSpaceSystem)> {
    for _ in 0..64 {
        let dim = opts.dim;
        let mut simple_poles = Vec::new();
        for _ in 0..opts.poles_outside {
            let radius = 1.0 + opts.pole_clearance + rng.random::<f64>() * 2.5;
            simple_poles.push(SimplePole {
                q: random_unit(rng) * radius,
                residue: random_low_rank(rng, dim, opts.max_residue_rank, 1.0),
            });
        }
        for _ in 0..opts.poles_inside {
            let hi = 1.0 - opts.pole_clearance;
            let lo = (hi * 0.2).max(0.05);
            let radius = lo + rng.random::<f64>() * (hi - lo);
            simple_poles.push(SimplePole {
                q: random_unit(rng) * radius,
                residue: random_low_rank(rng, dim, opts.max_residue_rank, 0.5),
            });
        }
        let spec = RationalSymbolSpec {
            constant: random_matrix(rng, dim, dim, 0.3),
            poly_coeffs: (0..opts.poly_degree)
                .map(|_| random_matrix(rng, dim, dim, 0.5))
                .collect(),
            simple_poles,
        };

        let sys = realize_rational(&spec)?;
        let sup = sup_norm_on_circle(&sys, 512, true)?;
        if sup <= 1e-8 {
            continue;
        }
        let spec = scaled(&spec, opts.target_sup / sup);
        let sys = realize_rational(&spec)?;

        // Keep only draws where the factorization problem is well posed.
        let id_plus_d = matrix::eye(dim) + sys.d();
        let (smin, _) = matrix::singular_extremes(&id_plus_d)?;
        if smin < 0.05 {
            continue;
        }
        return Ok((spec, sys));
    }
    Err(Error::InvalidArgument(
        "failed to draw a well-posed symbol with these options".into(),
    ))
}

/// Random matrix with no spectrum on the unit circle: eigenvalue moduli
/// are kept at least `margin` away from one, with `inside` of them in the
/// disc, under a random unitary similarity of an upper triangular form
/// with the given off-diagonal coupling.
pub fn random_dichotomous_matrix<R: Rng>(
    rng: &mut R,
    n: usize,
    inside: usize,
    margin: f64,
    coupling: f64,
) -> ComplexMatrix {
    assert!(inside <= n);
    assert!(margin < 0.9);
    let mut t = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let modulus = if i < inside {
            let hi = 1.0 - margin;
            0.2 * hi + rng.random::<f64>() * 0.8 * hi
        } else {
            1.0 + margin + rng.random::<f64>() * 1.5
        };
        t[(i, i)] = random_unit(rng) * modulus;
        for j in i + 1..n {
            t[(i, j)] = c64(
                (rng.random::<f64>() * 2.0 - 1.0) * coupling,
                (rng.random::<f64>() * 2.0 - 1.0) * coupling,
            );
        }
    }
    if n == 0 {
        return t;
    }
    let q = random_matrix(rng, n, n, 1.0).qr().q();
    &q * t * q.adjoint()
}
