//! Command-line front end: `derive`, `squeeze`, `qfunc` and `validate`.
//!
//! Exit codes: 0 ok, 1 I/O or internal error, 2 configuration or usage error,
//! 3 discrepancy flagged, 4 truncation did not converge.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{self, GridSpec, Poisson, DUAL_ROUTE_TOL, POISSON_TAIL_TOL, Q_CROSS_TOL};
use crate::error::{Error, Result};
use crate::oracle::{CONVERGENCE_TOL, MAX_BLOCK_DIM};
use crate::output::{self, RunManifest};
use crate::params::{derive, weak_coupling_check, DerivedParams, PhysicalConfig, WeakCouplingReport};
use crate::validation::{self, ValidationOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DISCREPANCY: i32 = 3;
pub const EXIT_TRUNCATION: i32 = 4;

/// Heisenberg bound slack on (S_q + 1)(S_p + 1).
pub const UNCERTAINTY_SLACK: f64 = 1e-8;

const STDERR_LINES: usize = 16;

#[derive(Debug, Parser)]
#[command(
    name = "apa",
    version,
    about = "Cavity-coupled BEC Bogoliubov mode: squeezing, Q function and validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Accepted for compatibility; every run is deterministic.
    #[arg(long, global = true, hide = true)]
    seedless: bool,
}

#[derive(Debug, Args)]
struct Io {
    /// JSON physical configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; a `<out>.manifest.json` is written beside it. Stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print every derived parameter, in ω_R units and SI.
    Derive {
        #[command(flatten)]
        io: Io,
        /// ω_sw/ω_R values replacing the configured one; one document each.
        #[arg(long, value_delimiter = ',')]
        omega_sw: Vec<f64>,
    },
    /// S_q(τ) and S_p(τ) on a τ grid for one or more ω_sw.
    Squeeze {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 4.0 * PI)]
        tau_max: f64,
        #[arg(long, default_value_t = 400)]
        tau_steps: usize,
        #[arg(long, value_delimiter = ',')]
        omega_sw: Vec<f64>,
    },
    /// Husimi Q function of the Bogoliubov mode on a γ grid.
    Qfunc {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        /// `min:max:steps` for both axes, or `re_spec,im_spec`.
        #[arg(long, default_value = "-4:4:81", allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        omega_sw: Option<f64>,
    },
    /// Compare every closed form against the truncated-Fock oracle.
    Validate {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = validation::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_delimiter = ',')]
        omega_sw: Vec<f64>,
        #[arg(long, default_value_t = 2.0 * PI)]
        tau_max: f64,
        #[arg(long, default_value_t = 17)]
        tau_steps: usize,
        /// Force every oracle block onto the dense engine at this cutoff.
        #[arg(long)]
        cutoff: Option<usize>,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let recorded: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, recorded) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::UnstableFrequency { .. } | Error::Grid(_) => EXIT_CONFIG,
        Error::Truncation { .. } => EXIT_TRUNCATION,
        _ => EXIT_ERROR,
    }
}

fn dispatch(command: Command, args: Vec<String>) -> Result<i32> {
    match command {
        Command::Derive { io, omega_sw } => cmd_derive(&io, &omega_sw, args),
        Command::Squeeze {
            io,
            tau_max,
            tau_steps,
            omega_sw,
        } => cmd_squeeze(&io, tau_max, tau_steps, &omega_sw, args),
        Command::Qfunc {
            io,
            tau,
            grid,
            omega_sw,
        } => cmd_qfunc(&io, tau, &grid, omega_sw, args),
        Command::Validate {
            io,
            tol,
            omega_sw,
            tau_max,
            tau_steps,
            cutoff,
        } => cmd_validate(&io, tol, &omega_sw, tau_max, tau_steps, cutoff, args),
    }
}

/// `config` with its ω_sw replaced by an explicit ω_R-unit value.
pub fn with_omega_sw(config: &PhysicalConfig, omega_sw: f64) -> PhysicalConfig {
    PhysicalConfig {
        waist: None,
        omega_sw_over_omega_r: Some(omega_sw),
        ..config.clone()
    }
}

fn resolve(config: &PhysicalConfig, omega_sw: &[f64]) -> Result<Vec<DerivedParams>> {
    if omega_sw.is_empty() {
        return Ok(vec![derive(config)?]);
    }
    omega_sw.iter().map(|&w| derive(&with_omega_sw(config, w))).collect()
}

fn emit(io: &Io, contents: &str, manifest: &mut RunManifest) -> Result<()> {
    match &io.out {
        Some(path) => {
            output::write_with_manifest(path, contents, manifest)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn manifest(command: &str, io: &Io, args: Vec<String>, params: Vec<DerivedParams>) -> RunManifest {
    let mut m = RunManifest::new(command, args, Some(io.config.clone()));
    m.params = params;
    m
}

/// Frequencies in rad/s.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SiEquivalents {
    pub omega_r: f64,
    pub u0: f64,
    pub omega_sw: f64,
    pub zeta: f64,
    pub delta_c: f64,
    pub omega_c: f64,
    pub omega_c_prime: f64,
}

impl SiEquivalents {
    pub fn of(p: &DerivedParams) -> Self {
        let s = p.omega_r;
        SiEquivalents {
            omega_r: s,
            u0: p.u0 * s,
            omega_sw: p.omega_sw * s,
            zeta: p.zeta * s,
            delta_c: p.delta_c * s,
            omega_c: p.omega_c * s,
            omega_c_prime: p.omega_c_prime * s,
        }
    }
}

/// Coefficients left after the displacement and squeeze, in ω_R units.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Residuals {
    pub pair_coefficient: f64,
    pub number_coefficient: f64,
    pub kerr_coefficient: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeriveDocument {
    pub alpha_sq: f64,
    pub params: DerivedParams,
    pub si: SiEquivalents,
    pub transformed: Residuals,
    pub weak_coupling: WeakCouplingReport,
}

pub fn derive_document(p: &DerivedParams, alpha_sq: f64) -> DeriveDocument {
    DeriveDocument {
        alpha_sq,
        params: *p,
        si: SiEquivalents::of(p),
        transformed: Residuals {
            pair_coefficient: p.pair_coefficient(),
            number_coefficient: p.number_coefficient(),
            kerr_coefficient: p.kerr_coefficient(),
        },
        weak_coupling: weak_coupling_check(p, alpha_sq),
    }
}

fn cmd_derive(io: &Io, omega_sw: &[f64], args: Vec<String>) -> Result<i32> {
    let config = PhysicalConfig::from_path(&io.config)?;
    let params = resolve(&config, omega_sw)?;
    let docs: Vec<DeriveDocument> = params.iter().map(|p| derive_document(p, config.alpha_sq)).collect();
    let text = if docs.len() == 1 {
        output::to_json(&docs[0])?
    } else {
        output::to_json(&docs)?
    };
    for d in docs.iter().filter(|d| !d.weak_coupling.weak) {
        eprintln!(
            "warning: U0|alpha|^2 = {} omega_R exceeds the weak-coupling bound {}",
            d.weak_coupling.ratio, d.weak_coupling.bound
        );
    }
    emit(io, &text, &mut manifest("derive", io, args, params))?;
    Ok(EXIT_OK)
}

fn cmd_squeeze(io: &Io, tau_max: f64, tau_steps: usize, omega_sw: &[f64], args: Vec<String>) -> Result<i32> {
    let config = PhysicalConfig::from_path(&io.config)?;
    let params = resolve(&config, omega_sw)?;
    let taus = analytic::tau_grid(tau_max, tau_steps)?;
    let series: Vec<_> = params
        .par_iter()
        .map(|p| analytic::squeeze_series(p, config.alpha_sq, &taus))
        .collect();

    let mut code = EXIT_OK;
    for s in &series {
        if s.discrepancy {
            eprintln!(
                "discrepancy: omega_sw = {}: closed form vs moments differ by {:e} (tolerance {:e})",
                s.omega_sw_over_omega_r, s.max_dual_route_residual, DUAL_ROUTE_TOL
            );
            code = EXIT_DISCREPANCY;
        }
        let h = s.heisenberg_min();
        if h < 1.0 - UNCERTAINTY_SLACK {
            eprintln!(
                "discrepancy: omega_sw = {}: min (S_q+1)(S_p+1) = {h} below 1",
                s.omega_sw_over_omega_r
            );
            code = EXIT_DISCREPANCY;
        }
    }

    let mut m = manifest("squeeze", io, args, params);
    m.tolerances.insert("dual_route".into(), DUAL_ROUTE_TOL);
    m.tolerances.insert("uncertainty_slack".into(), UNCERTAINTY_SLACK);
    emit(io, &output::squeeze_csv(&series), &mut m)?;
    Ok(code)
}

fn cmd_qfunc(io: &Io, tau: f64, grid: &str, omega_sw: Option<f64>, args: Vec<String>) -> Result<i32> {
    let config = PhysicalConfig::from_path(&io.config)?;
    let p = resolve(&config, omega_sw.as_slice())?[0];
    let grid: GridSpec = grid.parse()?;
    if !tau.is_finite() {
        return Err(Error::Grid(format!("tau must be finite, got {tau}")));
    }
    let q = analytic::q_function(&p, config.alpha_sq, tau, grid)?;

    let mut code = EXIT_OK;
    if q.discrepancy {
        eprintln!(
            "discrepancy: Q closed form vs overlaps differ by {:e} (tolerance {:e})",
            q.closed_form_residual.unwrap_or(f64::NAN),
            Q_CROSS_TOL
        );
        code = EXIT_DISCREPANCY;
    }

    let mut m = manifest("qfunc", io, args, vec![p]);
    let poisson = Poisson::truncated(config.alpha_sq, POISSON_TAIL_TOL);
    m.cutoffs.insert("photon_n_max".into(), poisson.n_max());
    m.tolerances.insert("poisson_tail".into(), POISSON_TAIL_TOL);
    m.tolerances.insert("closed_form".into(), Q_CROSS_TOL);
    emit(io, &output::qfunc_csv(&q), &mut m)?;
    Ok(code)
}

fn cmd_validate(
    io: &Io,
    tol: f64,
    omega_sw: &[f64],
    tau_max: f64,
    tau_steps: usize,
    cutoff: Option<usize>,
    args: Vec<String>,
) -> Result<i32> {
    let config = PhysicalConfig::from_path(&io.config)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Config {
            field: "tol".into(),
            message: format!("must be positive, got {tol}"),
        });
    }
    let params = resolve(&config, omega_sw)?;
    let taus = analytic::tau_grid(tau_max, tau_steps)?;
    let mut options = ValidationOptions::new(params.iter().map(|p| p.omega_sw).collect(), taus);
    options.tol = tol;
    options.oracle.cutoff = cutoff;
    let report = validation::validate(&config, &options)?;

    let discrepancies = report.discrepancies.iter().map(|d| {
        format!(
            "discrepancy: omega_sw = {} {}{}: residual {:e} > {:e}",
            d.omega_sw_over_omega_r,
            d.quantity,
            d.tau.map(|t| format!(" at tau = {t}")).unwrap_or_default(),
            d.residual,
            d.tolerance
        )
    });
    let truncations = report.truncation_failures.iter().map(|f| format!("truncation: {f}"));
    let unconverged = report.unconverged().map(|e| {
        format!(
            "unconverged: omega_sw = {} {}: cutoff doubling moved it by {:e}",
            e.omega_sw_over_omega_r, e.report.quantity, e.report.convergence_delta
        )
    });
    let lines: Vec<String> = discrepancies.chain(truncations).chain(unconverged).collect();
    for l in lines.iter().take(STDERR_LINES) {
        eprintln!("{l}");
    }
    if lines.len() > STDERR_LINES {
        eprintln!("... {} more, see the report", lines.len() - STDERR_LINES);
    }
    eprintln!(
        "status: {:?}, {} entries, {} discrepancies, {} unconverged, {} truncation failures",
        report.status,
        report.entries.len(),
        report.discrepancies.len(),
        report.unconverged().count(),
        report.truncation_failures.len()
    );

    let mut m = manifest("validate", io, args, params);
    if let Some(c) = cutoff {
        m.cutoffs.insert("forced".into(), c);
    }
    m.cutoffs.insert("max_block_dim".into(), MAX_BLOCK_DIM);
    m.tolerances.insert("tol".into(), tol);
    m.tolerances.insert("convergence".into(), CONVERGENCE_TOL);
    m.tolerances.insert("dual_route".into(), DUAL_ROUTE_TOL);
    m.tolerances.insert("closed_form_q".into(), Q_CROSS_TOL);
    emit(io, &output::to_json(&report)?, &mut m)?;
    Ok(report.status.exit_code())
}
