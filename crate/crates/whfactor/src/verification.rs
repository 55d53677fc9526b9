//! Independent diagnostics for computed factorizations.
//!
//! Residuals are measured pointwise on an equispaced circle grid, the
//! analyticity domains are re-derived from the factor spectra, and the
//! optional KYP data is re-verified against the system. The report is
//! deterministic for fixed inputs and grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kyp::{self, KypCertificate, KreinSpace};
use crate::matrix::{self, eye};
use crate::realization::{self, StateSpaceSystem};
use crate::wiener_hopf::{self, FactorDomain, WienerHopfFactorization};
use crate::Tolerances;

/// Maximal factorization and inverse residuals over an equispaced circle
/// grid: `(max ||G - product||, max ||factor * inverse - I||)`.
pub fn residual_on_circle(
    sys: &StateSpaceSystem,
    wh: &WienerHopfFactorization,
    grid_points: usize,
) -> Result<(f64, f64)> {
    if grid_points < 64 {
        return Err(Error::InvalidArgument(format!(
            "grid must have at least 64 points, got {grid_points}"
        )));
    }
    let m = sys.inputs();
    let id = eye(m);
    let mut factor_residual: f64 = 0.0;
    let mut inverse_residual: f64 = 0.0;
    for j in 0..grid_points {
        let theta = 2.0 * std::f64::consts::PI * (j as f64) / (grid_points as f64);
        let z = Complex64::from_polar(1.0, theta);
        let g = sys.symbol(z)?;
        let product = wh.product(z)?;
        factor_residual = factor_residual.max(matrix::op_norm(&(g - product)));

        for (factor, inverse) in [
            (&wh.factor_outer, &wh.inverse_outer),
            (&wh.factor_inner, &wh.inverse_inner),
        ] {
            let prod = factor.eval(z)? * inverse.eval(z)?;
            inverse_residual = inverse_residual.max(matrix::op_norm(&(prod - &id)));
        }
    }
    Ok((factor_residual, inverse_residual))
}

/// Analyticity summary of one factor: finite pole moduli (reciprocals of
/// the nonzero eigenvalues of `amat`), the declared domain and whether
/// the poles respect it with margin.
#[derive(Debug, Clone)]
pub struct FactorAnalyticity {
    pub factor_name: &'static str,
    pub pole_moduli: Vec<f64>,
    pub domain: FactorDomain,
    pub ok: bool,
}

/// Pole report for all four factors of a factorization.
///
/// A factor analytic over the closed disc needs all poles strictly
/// outside the circle; a factor analytic over the closed exterior needs
/// them strictly inside.
pub fn analyticity_report(wh: &WienerHopfFactorization) -> Result<Vec<FactorAnalyticity>> {
    analyticity_report_with(wh, &Tolerances::default())
}

pub fn analyticity_report_with(
    wh: &WienerHopfFactorization,
    tol: &Tolerances,
) -> Result<Vec<FactorAnalyticity>> {
    let mut out = Vec::with_capacity(4);
    for (factor_name, factor) in wh.named_factors() {
        let eigs = matrix::eigenvalues(&factor.amat)?;
        let mut pole_moduli: Vec<f64> = eigs
            .iter()
            .filter(|l| l.norm() > 1e-14)
            .map(|l| 1.0 / l.norm())
            .collect();
        pole_moduli.sort_by(f64::total_cmp);
        let ok = match factor.domain {
            FactorDomain::Inner => pole_moduli
                .iter()
                .all(|&r| r >= 1.0 + tol.dichotomy),
            FactorDomain::Outer => pole_moduli
                .iter()
                .all(|&r| r <= 1.0 - tol.dichotomy),
        };
        out.push(FactorAnalyticity {
            factor_name,
            pole_moduli,
            domain: factor.domain,
            ok,
        });
    }
    Ok(out)
}

/// Aggregated diagnostics of a factorization, with optional KYP margins
/// when a certificate is supplied. All maxima refer to the declared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub sup_norm: f64,
    pub norm_margin: f64,
    pub factor_residual_max: f64,
    pub inverse_residual_max: f64,
    /// Distance of each factor spectrum to the unit circle, in the order
    /// factor_outer, factor_inner, inverse_outer, inverse_inner.
    pub containment_margins: [f64; 4],
    pub kyp_margin: Option<f64>,
    pub adjoint_kyp_margin: Option<f64>,
    pub bicontraction_margins_a: Option<(f64, f64)>,
    pub bicontraction_margins_across: Option<(f64, f64)>,
    pub inertia_ok: Option<bool>,
    pub basis_cond: f64,
    pub grid_points: usize,
    /// Checks that could not be evaluated, with the reported reason.
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    /// Whether every evaluated check passes: positive norm and
    /// containment margins, residuals within `1e-8 (1 + basis_cond)`,
    /// positive KYP and bicontraction margins where present, matching
    /// inertia where present, and no skipped checks.
    pub fn all_pass(&self) -> bool {
        let residual_allowance = 1e-8 * (1.0 + self.basis_cond);
        self.norm_margin > 0.0
            && self.factor_residual_max <= residual_allowance
            && self.inverse_residual_max <= residual_allowance
            && self.containment_margins.iter().all(|&m| m > 0.0)
            && self.kyp_margin.is_none_or(|m| m > 0.0)
            && self.adjoint_kyp_margin.is_none_or(|m| m > 0.0)
            && self
                .bicontraction_margins_a
                .is_none_or(|(a, b)| a > 0.0 && b > 0.0)
            && self
                .bicontraction_margins_across
                .is_none_or(|(a, b)| a > 0.0 && b > 0.0)
            && self.inertia_ok.is_none_or(|ok| ok)
            && self.notes.is_empty()
    }

    /// Line-oriented `key: value` rendering, stable for machine parsing.
    pub fn render_text(&self) -> String {
        let mut lines = Vec::new();
        let fmt_opt = |x: Option<f64>| x.map_or("absent".to_string(), |v| format!("{v:.6e}"));
        let fmt_pair = |x: Option<(f64, f64)>| {
            x.map_or("absent".to_string(), |(a, b)| format!("{a:.6e} {b:.6e}"))
        };
        lines.push(format!("sup_norm: {:.6e}", self.sup_norm));
        lines.push(format!("norm_margin: {:.6e}", self.norm_margin));
        lines.push(format!(
            "factor_residual_max: {:.6e}",
            self.factor_residual_max
        ));
        lines.push(format!(
            "inverse_residual_max: {:.6e}",
            self.inverse_residual_max
        ));
        lines.push(format!(
            "containment_margins: {:.6e} {:.6e} {:.6e} {:.6e}",
            self.containment_margins[0],
            self.containment_margins[1],
            self.containment_margins[2],
            self.containment_margins[3]
        ));
        lines.push(format!("kyp_margin: {}", fmt_opt(self.kyp_margin)));
        lines.push(format!(
            "adjoint_kyp_margin: {}",
            fmt_opt(self.adjoint_kyp_margin)
        ));
        lines.push(format!(
            "bicontraction_margins_a: {}",
            fmt_pair(self.bicontraction_margins_a)
        ));
        lines.push(format!(
            "bicontraction_margins_across: {}",
            fmt_pair(self.bicontraction_margins_across)
        ));
        lines.push(format!(
            "inertia_ok: {}",
            self.inertia_ok
                .map_or("absent".to_string(), |b| b.to_string())
        ));
        lines.push(format!("basis_cond: {:.6e}", self.basis_cond));
        lines.push(format!("grid_points: {}", self.grid_points));
        lines.push(format!("all_pass: {}", self.all_pass()));
        for note in &self.notes {
            lines.push(format!("note: {note}"));
        }
        lines.join("\n")
    }
}

/// Distance of a factor spectrum to the unit circle, positive when the
/// containment holds.
fn containment_margin(factor: &wiener_hopf::FactorRealization) -> f64 {
    match factor.domain {
        FactorDomain::Inner => 1.0 - factor.spectrum_bound,
        FactorDomain::Outer => factor.spectrum_bound - 1.0,
    }
}

/// Assembles the full diagnostics report. Failing constituents are
/// recorded in `notes` instead of aborting the remaining checks.
pub fn full_report(
    sys: &StateSpaceSystem,
    wh: &WienerHopfFactorization,
    cert: Option<&KypCertificate>,
    grid_points: usize,
) -> Result<DiagnosticsReport> {
    full_report_with(sys, wh, cert, grid_points, &Tolerances::default())
}

pub fn full_report_with(
    sys: &StateSpaceSystem,
    wh: &WienerHopfFactorization,
    cert: Option<&KypCertificate>,
    grid_points: usize,
    tol: &Tolerances,
) -> Result<DiagnosticsReport> {
    let mut notes = Vec::new();

    let sup_norm = realization::sup_norm_on_circle(sys, grid_points, true)?;
    let (factor_residual_max, inverse_residual_max) = residual_on_circle(sys, wh, grid_points)?;
    let containment_margins = [
        containment_margin(&wh.factor_outer),
        containment_margin(&wh.factor_inner),
        containment_margin(&wh.inverse_outer),
        containment_margin(&wh.inverse_inner),
    ];

    let mut kyp_margin = None;
    let mut adjoint_kyp_margin = None;
    let mut bicontraction_margins_a = None;
    let mut bicontraction_margins_across = None;
    let mut inertia_ok = None;
    if let Some(cert) = cert {
        match kyp::verify_kyp(sys, &cert.h, tol) {
            Ok(m) => kyp_margin = Some(m),
            Err(e) => notes.push(format!("kyp_margin: {e}")),
        }
        match kyp::verify_adjoint_kyp(sys, &cert.h, tol) {
            Ok(m) => adjoint_kyp_margin = Some(m),
            Err(e) => notes.push(format!("adjoint_kyp_margin: {e}")),
        }
        match KreinSpace::new(cert.h.clone(), tol) {
            Ok(space) => {
                match kyp::bicontraction_margins(sys.a(), &space) {
                    Ok(pair) => bicontraction_margins_a = Some(pair),
                    Err(e) => notes.push(format!("bicontraction_margins_a: {e}")),
                }
                match wiener_hopf::a_cross(sys)
                    .and_then(|ax| kyp::bicontraction_margins(&ax, &space))
                {
                    Ok(pair) => bicontraction_margins_across = Some(pair),
                    Err(e) => notes.push(format!("bicontraction_margins_across: {e}")),
                }
            }
            Err(e) => notes.push(format!("krein_space: {e}")),
        }
        match realization::dichotomy_info_with(sys.a(), tol) {
            Ok(info) => inertia_ok = Some(kyp::inertia_check(cert, &info)),
            Err(e) => notes.push(format!("inertia_ok: {e}")),
        }
    }

    Ok(DiagnosticsReport {
        sup_norm,
        norm_margin: 1.0 - sup_norm,
        factor_residual_max,
        inverse_residual_max,
        containment_margins,
        kyp_margin,
        adjoint_kyp_margin,
        bicontraction_margins_a,
        bicontraction_margins_across,
        inertia_ok,
        basis_cond: wh.basis_cond,
        grid_points,
        notes,
    })
}
