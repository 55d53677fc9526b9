//! Command-line interface for canonical Wiener-Hopf factorization.
//!
//! JSON in, JSON out: results go to `--output` or standard output, the
//! human-readable report goes to standard error. Exit codes: 0 when all
//! requested checks pass, 2 when a mathematical check fails, 1 on I/O or
//! computational errors. `WHFACTOR_TOL_*` environment variables override
//! the numerical tolerances.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use whfactor::json as wire;
use whfactor::kyp;
use whfactor::matrix;
use whfactor::realization::{self, StateSpaceSystem};
use whfactor::synth;
use whfactor::toeplitz;
use whfactor::verification;
use whfactor::wiener_hopf::{self, Side, SplitStrategy};
use whfactor::Tolerances;

#[derive(Parser)]
#[command(
    name = "whfactor",
    version,
    about = "Canonical Wiener-Hopf factorization of matrix functions on the unit circle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check dichotomy, circle contractivity and invertibility data of a system.
    Check {
        /// System JSON file with keys A, B, C, D.
        system: PathBuf,
        #[arg(long, default_value_t = 512)]
        grid_points: usize,
        #[arg(long, default_value_t = 256)]
        quadrature_order: usize,
        /// Write the check summary JSON here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write a CSV profile of |F| over the circle.
        #[arg(long)]
        profile_out: Option<PathBuf>,
    },
    /// Compute a canonical factorization with diagnostics.
    Factorize {
        system: PathBuf,
        /// Factorization side: right (G = V- V+) or left (G = W+ W-).
        #[arg(long, default_value = "right")]
        side: String,
        /// Splitting of I + D: left_identity, right_identity or symmetric_sqrt.
        #[arg(long, default_value = "left_identity")]
        dsplit: String,
        #[arg(long, default_value_t = 512)]
        grid_points: usize,
        /// Also solve the KYP inequality and fold it into the report.
        #[arg(long)]
        kyp: bool,
        /// Write the factorization JSON here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the diagnostics report JSON here.
        #[arg(long)]
        report_out: Option<PathBuf>,
        /// Write a CSV profile of the factorization residual over the circle.
        #[arg(long)]
        profile_out: Option<PathBuf>,
    },
    /// Solve the strict KYP inequality, or verify a supplied solution.
    Kyp {
        system: PathBuf,
        /// Verify this H (matrix JSON) instead of solving.
        #[arg(long)]
        verify: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Realize a rational symbol as a dichotomous state-space system.
    Realize {
        /// Symbol JSON with keys constant, poly_coeffs, simple_poles.
        symbol: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve a finite block Toeplitz section through the factorization,
    /// with a dense direct solve as oracle.
    Toeplitz {
        system: PathBuf,
        /// Right-hand side JSON: an array of [re, im] pairs.
        rhs: PathBuf,
        #[arg(long)]
        n_blocks: usize,
        #[arg(long, default_value_t = 200)]
        tail: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a random rational symbol for experiments.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        poly_degree: usize,
        #[arg(long, default_value_t = 1)]
        poles_outside: usize,
        #[arg(long, default_value_t = 1)]
        poles_inside: usize,
        #[arg(long, default_value_t = 0.2)]
        pole_clearance: f64,
        #[arg(long, default_value_t = 0.8)]
        target_sup: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum CliError {
    Math(whfactor::Error),
    Compute(whfactor::Error),
    Io(String),
    /// A check ran to completion and failed.
    CheckFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Math(_) | CliError::CheckFailed(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Math(e) | CliError::Compute(e) => format!("error: {e}"),
            CliError::Io(msg) => format!("error: {msg}"),
            CliError::CheckFailed(msg) => format!("check failed: {msg}"),
        }
    }
}

impl From<whfactor::Error> for CliError {
    fn from(e: whfactor::Error) -> Self {
        if e.is_math_check_failure() {
            CliError::Math(e)
        } else {
            CliError::Compute(e)
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Io(format!("cannot parse {}: {e}", path.display())))
}

fn read_system(path: &Path) -> CliResult<StateSpaceSystem> {
    let value = read_json(path)?;
    Ok(wire::system_from_json(&value)?)
}

fn emit(value: &Value, output: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("cannot serialize output: {e}")))?;
    match output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_profile(path: &Path, header: &str, rows: &[(f64, f64)]) -> CliResult<()> {
    let mut text = String::from(header);
    text.push('\n');
    for (theta, value) in rows {
        let _ = writeln!(text, "{theta:.12e},{value:.12e}");
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tolerances::from_env();
    let result = match cli.command {
        Command::Check {
            system,
            grid_points,
            quadrature_order,
            output,
            profile_out,
        } => cmd_check(
            &system,
            grid_points,
            quadrature_order,
            output.as_deref(),
            profile_out.as_deref(),
            &tol,
        ),
        Command::Factorize {
            system,
            side,
            dsplit,
            grid_points,
            kyp,
            output,
            report_out,
            profile_out,
        } => cmd_factorize(
            &system,
            &side,
            &dsplit,
            grid_points,
            kyp,
            output.as_deref(),
            report_out.as_deref(),
            profile_out.as_deref(),
            &tol,
        ),
        Command::Kyp {
            system,
            verify,
            output,
        } => cmd_kyp(&system, verify.as_deref(), output.as_deref(), &tol),
        Command::Realize { symbol, output } => cmd_realize(&symbol, output.as_deref(), &tol),
        Command::Toeplitz {
            system,
            rhs,
            n_blocks,
            tail,
            output,
        } => cmd_toeplitz(&system, &rhs, n_blocks, tail, output.as_deref(), &tol),
        Command::Generate {
            seed,
            dim,
            poly_degree,
            poles_outside,
            poles_inside,
            pole_clearance,
            target_sup,
            output,
        } => cmd_generate(
            seed,
            dim,
            poly_degree,
            poles_outside,
            poles_inside,
            pole_clearance,
            target_sup,
            output.as_deref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_check(
    system: &Path,
    grid_points: usize,
    quadrature_order: usize,
    output: Option<&Path>,
    profile_out: Option<&Path>,
    tol: &Tolerances,
) -> CliResult<()> {
    let sys = read_system(system)?;
    let info = realization::dichotomy_info_with(sys.a(), tol)?;
    let sup = realization::sup_norm_on_circle(&sys, grid_points, true)?;

    // independent quadrature projection at the requested order
    let cross_error = if sys.order() > 0 {
        let riesz = realization::spectral_projection_riesz(sys.a(), quadrature_order, tol)?;
        matrix::op_norm(&(&riesz - &info.p_plus))
    } else {
        0.0
    };

    if let Some(path) = profile_out {
        let rows: Vec<(f64, f64)> = (0..grid_points)
            .map(|j| {
                let theta = std::f64::consts::TAU * j as f64 / grid_points as f64;
                let f = sys.transfer(Complex64::from_polar(1.0, theta)).unwrap();
                (theta, matrix::op_norm(&f))
            })
            .collect();
        write_profile(path, "theta,gain", &rows)?;
    }

    let contractive = sup < 1.0 - tol.norm;
    let mut cross_margin = None;
    let mut cross_dims = None;
    let mut failure: Option<String> = None;
    if !contractive {
        failure = Some(format!("sup norm {sup} is not strictly below one"));
    } else {
        match wiener_hopf::cross_data(&sys, tol) {
            Ok(cross) => {
                cross_margin = Some(cross.info_cross.margin);
                cross_dims = Some((cross.info_cross.dim_minus, cross.info_cross.dim_plus));
            }
            Err(e) => failure = Some(format!("associate operator check failed: {e}")),
        }
    }

    let summary = json!({
        "order": sys.order(),
        "inputs": sys.inputs(),
        "outputs": sys.outputs(),
        "margin": info.margin,
        "dim_minus": info.dim_minus,
        "dim_plus": info.dim_plus,
        "sup_norm": sup,
        "norm_margin": 1.0 - sup,
        "projection_cross_error": cross_error,
        "quadrature_order": quadrature_order,
        "cross_margin": cross_margin,
        "cross_dims": cross_dims.map(|(a, b)| json!([a, b])),
        "ok": failure.is_none(),
    });
    eprintln!(
        "order: {}  margin: {:.3e}  dims: ({}, {})  sup_norm: {:.6}",
        sys.order(),
        info.margin,
        info.dim_minus,
        info.dim_plus,
        sup
    );
    emit(&summary, output)?;
    match failure {
        Some(msg) => Err(CliError::CheckFailed(msg)),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_factorize(
    system: &Path,
    side: &str,
    dsplit: &str,
    grid_points: usize,
    with_kyp: bool,
    output: Option<&Path>,
    report_out: Option<&Path>,
    profile_out: Option<&Path>,
    tol: &Tolerances,
) -> CliResult<()> {
    let sys = read_system(system)?;
    let side = wire::side_from_str(side)?;
    let strategy = wire::split_strategy_from_str(dsplit)?;
    let wh = wiener_hopf::factorize_with(&sys, side, strategy, tol)?;

    let cert = if with_kyp {
        Some(kyp::solve_kyp_with(&sys, tol)?)
    } else {
        None
    };
    let report =
        verification::full_report_with(&sys, &wh, cert.as_ref(), grid_points, tol)?;

    if let Some(path) = profile_out {
        let rows: Vec<(f64, f64)> = (0..grid_points)
            .map(|j| {
                let theta = std::f64::consts::TAU * j as f64 / grid_points as f64;
                let z = Complex64::from_polar(1.0, theta);
                let g = sys.symbol(z).unwrap();
                let product = wh.product(z).unwrap();
                (theta, matrix::op_norm(&(g - product)))
            })
            .collect();
        write_profile(path, "theta,residual", &rows)?;
    }

    eprintln!("{}", report.render_text());
    emit(&wire::factorization_to_json(&wh), output)?;
    if let Some(path) = report_out {
        emit(&wire::report_to_json(&report), Some(path))?;
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(
            "diagnostics report contains failing checks".into(),
        ))
    }
}

fn cmd_kyp(
    system: &Path,
    verify: Option<&Path>,
    output: Option<&Path>,
    tol: &Tolerances,
) -> CliResult<()> {
    let sys = read_system(system)?;
    match verify {
        Some(h_path) => {
            let h = wire::matrix_from_json(&read_json(h_path)?)?;
            let margin = kyp::verify_kyp(&sys, &h, tol)?;
            let adjoint_margin = kyp::verify_adjoint_kyp(&sys, &h, tol)?;
            eprintln!("kyp_margin: {margin:.6e}");
            eprintln!("adjoint_kyp_margin: {adjoint_margin:.6e}");
            emit(
                &json!({
                    "kyp_margin": margin,
                    "adjoint_kyp_margin": adjoint_margin,
                    "ok": margin > 0.0 && adjoint_margin > 0.0,
                }),
                output,
            )?;
            if margin > 0.0 && adjoint_margin > 0.0 {
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!(
                    "supplied H fails the strict KYP inequality (margins {margin:.3e}, {adjoint_margin:.3e})"
                )))
            }
        }
        None => {
            let cert = match kyp::solve_kyp_with(&sys, tol) {
                Ok(cert) => cert,
                Err(e @ whfactor::Error::PencilSelectionFailed(_)) => {
                    eprintln!(
                        "{e}; rerun with --verify and a candidate H to use verification only"
                    );
                    return Err(e.into());
                }
                Err(e) => return Err(e.into()),
            };
            eprintln!(
                "margin: {:.6e}  inertia: ({}, {})",
                cert.margin, cert.inertia.0, cert.inertia.1
            );
            emit(&wire::certificate_to_json(&cert), output)
        }
    }
}

fn cmd_realize(symbol: &Path, output: Option<&Path>, tol: &Tolerances) -> CliResult<()> {
    let spec = wire::symbol_spec_from_json(&read_json(symbol)?)?;
    let sys = realization::realize_rational_with(&spec, tol)?;
    eprintln!(
        "realized {} states, {} inputs, {} outputs",
        sys.order(),
        sys.inputs(),
        sys.outputs()
    );
    emit(&wire::system_to_json(&sys), output)
}

fn cmd_toeplitz(
    system: &Path,
    rhs: &Path,
    n_blocks: usize,
    tail: usize,
    output: Option<&Path>,
    tol: &Tolerances,
) -> CliResult<()> {
    let sys = read_system(system)?;
    let rhs = wire::vector_from_json(&read_json(rhs)?)?;
    let info = realization::dichotomy_info_with(sys.a(), tol)?;
    let range = n_blocks as i64;
    let section = toeplitz::build_section(&sys, &info, n_blocks, (-range, range))?;
    let wh = wiener_hopf::factorize_with(&sys, Side::Right, SplitStrategy::LeftIdentity, tol)?;
    let solution = toeplitz::solve_via_factorization_with(&wh, &rhs, n_blocks, tail, tol)?;
    let direct = toeplitz::solve_direct(&section, &rhs)?;

    let m = sys.inputs();
    let max_deviation = (0..solution.len())
        .map(|i| (solution[i] - direct[i]).norm())
        .fold(0.0f64, f64::max);
    let interior = ((n_blocks / 3) * m)..((2 * n_blocks / 3).max(n_blocks / 3 + 1) * m).min(solution.len());
    let interior_max_deviation = interior
        .clone()
        .map(|i| (solution[i] - direct[i]).norm())
        .fold(0.0f64, f64::max);

    eprintln!(
        "blocks: {n_blocks}  tail: {tail}  interior deviation: {interior_max_deviation:.3e}  full deviation: {max_deviation:.3e}"
    );
    emit(
        &json!({
            "solution": wire::vector_to_json(&solution),
            "direct": wire::vector_to_json(&direct),
            "max_deviation": max_deviation,
            "interior_max_deviation": interior_max_deviation,
        }),
        output,
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    seed: u64,
    dim: usize,
    poly_degree: usize,
    poles_outside: usize,
    poles_inside: usize,
    pole_clearance: f64,
    target_sup: f64,
    output: Option<&Path>,
) -> CliResult<()> {
    let opts = synth::SymbolOptions {
        dim,
        poly_degree,
        poles_outside,
        poles_inside,
        pole_clearance,
        max_residue_rank: 2.min(dim),
        target_sup,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (spec, sys) = synth::random_symbol(&mut rng, &opts)?;
    eprintln!(
        "generated symbol: dim {dim}, {} poles, realization order {}",
        spec.simple_poles.len(),
        sys.order()
    );
    emit(&wire::symbol_spec_to_json(&spec), output)
}
