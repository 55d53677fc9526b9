//! Shared JSON formats.
//!
//! Complex scalars are `[re, im]` pairs; matrices are row-major nested
//! arrays of pairs; a system is an object with keys `"A"`, `"B"`, `"C"`,
//! `"D"`. The same matrix encoding is used for symbol specs, KYP data,
//! factorizations, right-hand sides and reports, so every artifact
//! round-trips bit-exactly through `serde_json`.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::kyp::KypCertificate;
use crate::matrix::{ComplexMatrix, ComplexVector};
use crate::realization::{RationalSymbolSpec, SimplePole, StateSpaceSystem};
use crate::verification::DiagnosticsReport;
use crate::wiener_hopf::{
    FactorDomain, FactorRealization, Side, SplitStrategy, WienerHopfFactorization,
};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_from_json(v: &Value) -> Result<Complex64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| bad("complex scalar must be a [re, im] pair"))?;
    let re = pair[0]
        .as_f64()
        .ok_or_else(|| bad("complex real part must be a number"))?;
    let im = pair[1]
        .as_f64()
        .ok_or_else(|| bad("complex imaginary part must be a number"))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::NonFiniteData);
    }
    Ok(Complex64::new(re, im))
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

/// Parses a row-major nested array; `[]` yields a 0 x 0 matrix.
pub fn matrix_from_json(v: &Value) -> Result<ComplexMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| bad("matrix must be an array of rows"))?;
    if rows.is_empty() {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let ncols = rows[0]
        .as_array()
        .ok_or_else(|| bad("matrix row must be an array"))?
        .len();
    let mut entries = Vec::with_capacity(rows.len() * ncols);
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| bad("matrix row must be an array"))?;
        if row.len() != ncols {
            return Err(bad("matrix rows must have equal length"));
        }
        for entry in row {
            entries.push(complex_from_json(entry)?);
        }
    }
    Ok(ComplexMatrix::from_row_slice(rows.len(), ncols, &entries))
}

fn object<'v>(v: &'v Value, what: &str, keys: &[&str]) -> Result<&'v Map<String, Value>> {
    let map = v
        .as_object()
        .ok_or_else(|| bad(format!("{what} must be a JSON object")))?;
    for key in map.keys() {
        if !keys.contains(&key.as_str()) {
            return Err(bad(format!("{what}: unknown key {key:?}")));
        }
    }
    Ok(map)
}

fn field<'v>(map: &'v Map<String, Value>, what: &str, key: &str) -> Result<&'v Value> {
    map.get(key)
        .ok_or_else(|| bad(format!("{what}: missing key {key:?}")))
}

pub fn system_to_json(sys: &StateSpaceSystem) -> Value {
    json!({
        "A": matrix_to_json(sys.a()),
        "B": matrix_to_json(sys.b()),
        "C": matrix_to_json(sys.c()),
        "D": matrix_to_json(sys.d()),
    })
}

pub fn system_from_json(v: &Value) -> Result<StateSpaceSystem> {
    let map = object(v, "system", &["A", "B", "C", "D"])?;
    let a = matrix_from_json(field(map, "system", "A")?)?;
    let d = matrix_from_json(field(map, "system", "D")?)?;
    if d.nrows() == 0 || d.ncols() == 0 {
        return Err(bad("system: D must have at least one row and column"));
    }
    let n = a.nrows();
    let (p, m) = d.shape();
    let b_raw = matrix_from_json(field(map, "system", "B")?)?;
    // An empty B for a zero-state system cannot carry its column count.
    let b = if n == 0 && b_raw.nrows() == 0 {
        ComplexMatrix::zeros(0, m)
    } else {
        b_raw
    };
    let c_raw = matrix_from_json(field(map, "system", "C")?)?;
    let c = if n == 0 && c_raw.ncols() == 0 {
        ComplexMatrix::zeros(p, 0)
    } else {
        c_raw
    };
    StateSpaceSystem::new(a, b, c, d)
}

pub fn symbol_spec_to_json(spec: &RationalSymbolSpec) -> Value {
    json!({
        "constant": matrix_to_json(&spec.constant),
        "poly_coeffs": spec.poly_coeffs.iter().map(matrix_to_json).collect::<Vec<_>>(),
        "simple_poles": spec
            .simple_poles
            .iter()
            .map(|p| json!({"q": complex_to_json(p.q), "residue": matrix_to_json(&p.residue)}))
            .collect::<Vec<_>>(),
    })
}

pub fn symbol_spec_from_json(v: &Value) -> Result<RationalSymbolSpec> {
    let map = object(v, "symbol spec", &["constant", "poly_coeffs", "simple_poles"])?;
    let constant = matrix_from_json(field(map, "symbol spec", "constant")?)?;
    if constant.nrows() == 0 || constant.ncols() == 0 {
        return Err(bad("symbol spec: constant must have at least one entry"));
    }
    let poly_coeffs = field(map, "symbol spec", "poly_coeffs")?
        .as_array()
        .ok_or_else(|| bad("symbol spec: poly_coeffs must be an array"))?
        .iter()
        .map(matrix_from_json)
        .collect::<Result<Vec<_>>>()?;
    let simple_poles = field(map, "symbol spec", "simple_poles")?
        .as_array()
        .ok_or_else(|| bad("symbol spec: simple_poles must be an array"))?
        .iter()
        .map(|pole| -> Result<SimplePole> {
            let pole = object(pole, "pole", &["q", "residue"])?;
            Ok(SimplePole {
                q: complex_from_json(field(pole, "pole", "q")?)?,
                residue: matrix_from_json(field(pole, "pole", "residue")?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RationalSymbolSpec {
        constant,
        poly_coeffs,
        simple_poles,
    })
}

pub fn vector_to_json(v: &ComplexVector) -> Value {
    Value::Array(v.iter().map(|z| complex_to_json(*z)).collect())
}

pub fn vector_from_json(v: &Value) -> Result<ComplexVector> {
    let entries = v
        .as_array()
        .ok_or_else(|| bad("vector must be an array of [re, im] pairs"))?
        .iter()
        .map(complex_from_json)
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexVector::from_vec(entries))
}

fn domain_to_str(domain: FactorDomain) -> &'static str {
    domain.as_str()
}

fn domain_from_str(s: &str) -> Result<FactorDomain> {
    match s {
        "inner" => Ok(FactorDomain::Inner),
        "outer" => Ok(FactorDomain::Outer),
        other => Err(bad(format!("unknown factor domain {other:?}"))),
    }
}

fn factor_to_json(f: &FactorRealization) -> Value {
    json!({
        "dterm": matrix_to_json(&f.dterm),
        "cvec": matrix_to_json(&f.cvec),
        "amat": matrix_to_json(&f.amat),
        "bvec": matrix_to_json(&f.bvec),
        "domain": domain_to_str(f.domain),
        "spectrum_bound": f.spectrum_bound,
        "states": f.states(),
    })
}

fn factor_from_json(v: &Value) -> Result<FactorRealization> {
    let map = object(
        v,
        "factor",
        &["dterm", "cvec", "amat", "bvec", "domain", "spectrum_bound", "states"],
    )?;
    let dterm = matrix_from_json(field(map, "factor", "dterm")?)?;
    let states = field(map, "factor", "states")?
        .as_u64()
        .ok_or_else(|| bad("factor: states must be a nonnegative integer"))? as usize;
    let fix_rows = |m: ComplexMatrix, rows: usize, cols: usize| -> ComplexMatrix {
        if m.nrows() == 0 && m.ncols() == 0 && (rows == 0 || cols == 0) {
            ComplexMatrix::zeros(rows, cols)
        } else {
            m
        }
    };
    let amat = fix_rows(matrix_from_json(field(map, "factor", "amat")?)?, states, states);
    let bvec = fix_rows(
        matrix_from_json(field(map, "factor", "bvec")?)?,
        states,
        dterm.ncols(),
    );
    let cvec = fix_rows(
        matrix_from_json(field(map, "factor", "cvec")?)?,
        dterm.nrows(),
        states,
    );
    let domain = domain_from_str(
        field(map, "factor", "domain")?
            .as_str()
            .ok_or_else(|| bad("factor: domain must be a string"))?,
    )?;
    // Empty outer factors have no spectrum; the bound is infinite and
    // JSON renders it as null.
    let spectrum_bound = match field(map, "factor", "spectrum_bound")? {
        Value::Null => f64::INFINITY,
        v => v
            .as_f64()
            .ok_or_else(|| bad("factor: spectrum_bound must be a number"))?,
    };
    if amat.shape() != (states, states)
        || bvec.nrows() != states
        || cvec.ncols() != states
        || bvec.ncols() != dterm.ncols()
        || cvec.nrows() != dterm.nrows()
    {
        return Err(bad("factor: inconsistent block dimensions"));
    }
    Ok(FactorRealization {
        dterm,
        cvec,
        amat,
        bvec,
        domain,
        spectrum_bound,
    })
}

pub fn side_from_str(s: &str) -> Result<Side> {
    match s {
        "right" => Ok(Side::Right),
        "left" => Ok(Side::Left),
        other => Err(bad(format!("unknown side {other:?}"))),
    }
}

pub fn split_strategy_from_str(s: &str) -> Result<SplitStrategy> {
    match s {
        "left_identity" => Ok(SplitStrategy::LeftIdentity),
        "right_identity" => Ok(SplitStrategy::RightIdentity),
        "symmetric_sqrt" => Ok(SplitStrategy::SymmetricSqrt),
        other => Err(bad(format!("unknown D-split strategy {other:?}"))),
    }
}

pub fn factorization_to_json(wh: &WienerHopfFactorization) -> Value {
    json!({
        "side": wh.side.as_str(),
        "factor_outer": factor_to_json(&wh.factor_outer),
        "factor_inner": factor_to_json(&wh.factor_inner),
        "inverse_outer": factor_to_json(&wh.inverse_outer),
        "inverse_inner": factor_to_json(&wh.inverse_inner),
        "projection": matrix_to_json(&wh.projection),
        "basis_cond": wh.basis_cond,
    })
}

pub fn factorization_from_json(v: &Value) -> Result<WienerHopfFactorization> {
    let map = object(
        v,
        "factorization",
        &[
            "side",
            "factor_outer",
            "factor_inner",
            "inverse_outer",
            "inverse_inner",
            "projection",
            "basis_cond",
        ],
    )?;
    Ok(WienerHopfFactorization {
        side: side_from_str(
            field(map, "factorization", "side")?
                .as_str()
                .ok_or_else(|| bad("factorization: side must be a string"))?,
        )?,
        factor_outer: factor_from_json(field(map, "factorization", "factor_outer")?)?,
        factor_inner: factor_from_json(field(map, "factorization", "factor_inner")?)?,
        inverse_outer: factor_from_json(field(map, "factorization", "inverse_outer")?)?,
        inverse_inner: factor_from_json(field(map, "factorization", "inverse_inner")?)?,
        projection: matrix_from_json(field(map, "factorization", "projection")?)?,
        basis_cond: field(map, "factorization", "basis_cond")?
            .as_f64()
            .ok_or_else(|| bad("factorization: basis_cond must be a number"))?,
    })
}

pub fn certificate_to_json(cert: &KypCertificate) -> Value {
    json!({
        "H": matrix_to_json(&cert.h),
        "margin": cert.margin,
        "inertia": [cert.inertia.0, cert.inertia.1],
    })
}

pub fn certificate_from_json(v: &Value) -> Result<KypCertificate> {
    let map = object(v, "certificate", &["H", "margin", "inertia"])?;
    let h = matrix_from_json(field(map, "certificate", "H")?)?;
    let margin = field(map, "certificate", "margin")?
        .as_f64()
        .ok_or_else(|| bad("certificate: margin must be a number"))?;
    let inertia = field(map, "certificate", "inertia")?
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| bad("certificate: inertia must be a pair"))?;
    let pos = inertia[0]
        .as_u64()
        .ok_or_else(|| bad("certificate: inertia counts must be integers"))? as usize;
    let neg = inertia[1]
        .as_u64()
        .ok_or_else(|| bad("certificate: inertia counts must be integers"))? as usize;
    Ok(KypCertificate {
        h,
        margin,
        inertia: (pos, neg),
    })
}

fn opt_f64(x: Option<f64>) -> Value {
    x.map_or(Value::Null, |v| json!(v))
}

fn opt_pair(x: Option<(f64, f64)>) -> Value {
    x.map_or(Value::Null, |(a, b)| json!([a, b]))
}

pub fn report_to_json(report: &DiagnosticsReport) -> Value {
    json!({
        "sup_norm": report.sup_norm,
        "norm_margin": report.norm_margin,
        "factor_residual_max": report.factor_residual_max,
        "inverse_residual_max": report.inverse_residual_max,
        "containment_margins": report.containment_margins,
        "kyp_margin": opt_f64(report.kyp_margin),
        "adjoint_kyp_margin": opt_f64(report.adjoint_kyp_margin),
        "bicontraction_margins_a": opt_pair(report.bicontraction_margins_a),
        "bicontraction_margins_across": opt_pair(report.bicontraction_margins_across),
        "inertia_ok": report.inertia_ok.map_or(Value::Null, Value::Bool),
        "basis_cond": report.basis_cond,
        "grid_points": report.grid_points,
        "all_pass": report.all_pass(),
        "notes": report.notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c64;
    use crate::wiener_hopf::factorize;
    use approx::assert_abs_diff_eq;

    #[test]
    fn matrix_round_trip() {
        let m = ComplexMatrix::from_row_slice(
            2,
            3,
            &[
                c64(1.0, -2.0),
                c64(0.125, 0.0),
                c64(0.0, 1e-17),
                c64(-3.5, 4.25),
                c64(0.1, 0.2),
                c64(9.0, -8.0),
            ],
        );
        let v = matrix_to_json(&m);
        let back = matrix_from_json(&v).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn system_round_trip_and_validation() {
        let sys = StateSpaceSystem::scalar(2.0, 0.4, 1.0, 0.0);
        let v = system_to_json(&sys);
        let back = system_from_json(&v).unwrap();
        assert_eq!(sys, back);

        let malformed: Value = serde_json::from_str(r#"{"A": [[[0,0]]], "B": [[[1,0]]]}"#).unwrap();
        assert!(system_from_json(&malformed).is_err());

        let unknown: Value =
            serde_json::from_str(r#"{"A": [], "B": [], "C": [], "D": [[[1,0]]], "X": 1}"#)
                .unwrap();
        assert!(system_from_json(&unknown).is_err());
    }

    #[test]
    fn zero_state_system_parses() {
        let v: Value =
            serde_json::from_str(r#"{"A": [], "B": [], "C": [[],[]], "D": [[[0.5,0],[0,0]],[[0,0],[0.25,0]]]}"#)
                .unwrap();
        let sys = system_from_json(&v).unwrap();
        assert_eq!(sys.order(), 0);
        assert_eq!((sys.outputs(), sys.inputs()), (2, 2));
    }

    #[test]
    fn non_finite_entries_rejected() {
        let v: Value = serde_json::from_str(r#"[[[1, 0], [2, 0]]]"#).unwrap();
        assert!(matrix_from_json(&v).is_ok());
        // JSON has no infinity literal; a null sneaks through as a non-number
        let v: Value = serde_json::from_str(r#"[[[null, 0]]]"#).unwrap();
        assert!(matrix_from_json(&v).is_err());
    }

    #[test]
    fn factorization_round_trip() {
        let sys = StateSpaceSystem::scalar(2.0, 0.4, 1.0, 0.0);
        let wh = factorize(&sys, Side::Right, SplitStrategy::LeftIdentity).unwrap();
        let v = factorization_to_json(&wh);
        let back = factorization_from_json(&v).unwrap();
        assert_eq!(back.side, Side::Right);
        assert_eq!(back.factor_inner.states(), 0);
        let z = Complex64::new(-1.0, 0.0);
        assert_abs_diff_eq!(
            (back.factor_outer.eval(z).unwrap() - wh.factor_outer.eval(z).unwrap()).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn factorization_round_trip_with_empty_outer_factor() {
        // the stable scalar symbol has a trivial outer factor whose
        // spectrum bound is infinite
        let sys = StateSpaceSystem::scalar(0.0, 1.0, 0.5, 0.0);
        let wh = factorize(&sys, Side::Right, SplitStrategy::LeftIdentity).unwrap();
        assert!(wh.factor_outer.spectrum_bound.is_infinite());
        let back = factorization_from_json(&factorization_to_json(&wh)).unwrap();
        assert!(back.factor_outer.spectrum_bound.is_infinite());
        assert_eq!(back.factor_outer.states(), 0);
    }

    #[test]
    fn spec_round_trip() {
        let spec = RationalSymbolSpec {
            constant: ComplexMatrix::from_element(1, 1, c64(0.1, 0.0)),
            poly_coeffs: vec![ComplexMatrix::from_element(1, 1, c64(0.5, -0.5))],
            simple_poles: vec![SimplePole {
                q: c64(2.0, 1.0),
                residue: ComplexMatrix::from_element(1, 1, c64(0.3, 0.0)),
            }],
        };
        let v = symbol_spec_to_json(&spec);
        let back = symbol_spec_from_json(&v).unwrap();
        assert_eq!(back.poly_coeffs.len(), 1);
        assert_eq!(back.simple_poles[0].q, spec.simple_poles[0].q);
    }
}
