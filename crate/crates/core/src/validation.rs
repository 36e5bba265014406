//! Analytic-vs-oracle comparison over a τ × ω_sw lattice, and the
//! discrepancy protocol: printed closed forms are never altered, a failing
//! comparison is recorded and surfaces as a dedicated exit status.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, GridSpec, Moments, DUAL_ROUTE_TOL, MAX_STATE_DIM, Q_CROSS_TOL};
use crate::error::{Error, Result};
use crate::oracle::{self, BlockOracle, OracleOptions, OracleReport, MAX_BLOCK_DIM};
use crate::params::{derive, DerivedParams, PhysicalConfig};

pub const DEFAULT_TOL: f64 = 1e-6;

/// Floor of the relative-residual denominator for lattice quantities, so
/// that values crossing zero are compared absolutely.
pub const LATTICE_SCALE: f64 = 1e-3;

/// Fixed time of the single-τ checks (ρ_c, Q closed form, full tensor).
pub const CHECK_TAU: f64 = FRAC_PI_2;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub tol: f64,
    pub omega_sw: Vec<f64>,
    pub taus: Vec<f64>,
    pub oracle: OracleOptions,
    pub q_grid: GridSpec,
}

impl ValidationOptions {
    pub fn new(omega_sw: Vec<f64>, taus: Vec<f64>) -> Self {
        ValidationOptions {
            tol: DEFAULT_TOL,
            omega_sw,
            taus,
            oracle: OracleOptions::default(),
            q_grid: "-5:5:41".parse().expect("static grid"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Discrepancy,
    Unconverged,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Discrepancy => 3,
            Status::Unconverged => 4,
        }
    }
}

/// An [`OracleReport`] placed on the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub omega_sw_over_omega_r: f64,
    pub tau: Option<f64>,
    #[serde(flatten)]
    pub report: OracleReport,
}

/// Agreement of two closed-form routes inside the analytic layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualRoute {
    pub omega_sw_over_omega_r: f64,
    pub quantity: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub omega_sw_over_omega_r: f64,
    pub quantity: String,
    pub tau: Option<f64>,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tol: f64,
    pub alpha_sq: f64,
    pub entries: Vec<Entry>,
    pub dual_routes: Vec<DualRoute>,
    pub discrepancies: Vec<Discrepancy>,
    /// Checks that could not run, with the reason.
    pub skipped: Vec<String>,
    /// Truncation failures; each forces at least the non-convergence status.
    pub truncation_failures: Vec<String>,
    pub status: Status,
}

impl ValidationReport {
    pub fn unconverged(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.report.converged)
    }
}

#[derive(Default)]
struct Collected {
    entries: Vec<Entry>,
    dual_routes: Vec<DualRoute>,
    skipped: Vec<String>,
    truncation_failures: Vec<String>,
}

impl Collected {
    fn push(&mut self, omega_sw: f64, tau: Option<f64>, report: OracleReport) {
        self.entries.push(Entry {
            omega_sw_over_omega_r: omega_sw,
            tau,
            report,
        });
    }

    fn absorb(&mut self, omega_sw: f64, what: &str, result: Result<()>) -> Result<()> {
        match result {
            Ok(()) => Ok(()),
            Err(e @ Error::Truncation { .. }) => {
                self.truncation_failures.push(format!("ω_sw = {omega_sw}: {what}: {e}"));
                Ok(())
            }
            Err(e) => Err(e),
        }
    }
}

/// `closed` is the closed-form (S_q, S_p); the moment route is checked
/// separately as a dual route.
fn moment_reports(
    closed: (f64, f64),
    analytic: &Moments,
    oracle: &Moments,
    doubled: &Moments,
    dim: usize,
) -> Vec<OracleReport> {
    let (aq, ap) = closed;
    let (oq, op) = oracle.squeezing();
    let (dq, dp) = doubled.squeezing();
    let r = |name: &str, a: f64, o: f64, d: f64| OracleReport::new(name, a, o, LATTICE_SCALE, dim, (o - d).abs());
    vec![
        r("s_q", aq, oq, dq),
        r("s_p", ap, op, dp),
        r("c_mean_re", analytic.c_mean.re, oracle.c_mean.re, doubled.c_mean.re),
        r("c_mean_im", analytic.c_mean.im, oracle.c_mean.im, doubled.c_mean.im),
        r("c_sq_re", analytic.c_sq.re, oracle.c_sq.re, doubled.c_sq.re),
        r("c_sq_im", analytic.c_sq.im, oracle.c_sq.im, doubled.c_sq.im),
        r("n_mean", analytic.n_mean, oracle.n_mean, doubled.n_mean),
    ]
}

fn lattice(p: &DerivedParams, alpha_sq: f64, options: &ValidationOptions, out: &mut Collected) -> Result<()> {
    let w = p.omega_sw;
    let oracle = BlockOracle::new(p, alpha_sq, options.oracle)?;
    let doubled = oracle.doubled()?;
    let dim = oracle.max_dim();
    let rows: Vec<(f64, Vec<OracleReport>, f64)> = options
        .taus
        .par_iter()
        .map(|&tau| {
            let o = oracle.moments(tau)?;
            let d = doubled.moments(tau)?;
            let a = analytic::moments(p, alpha_sq, tau);
            let s = analytic::squeezing(p, alpha_sq, tau);
            let reports = moment_reports((s.s_q, s.s_p), &a, &o, &d, dim);
            Ok((tau, reports, s.dual_route_residual))
        })
        .collect::<Result<_>>()?;
    let mut max_dual: f64 = 0.0;
    for (tau, reports, dual) in rows {
        max_dual = max_dual.max(dual);
        for r in reports {
            out.push(w, Some(tau), r);
        }
    }
    out.dual_routes.push(DualRoute {
        omega_sw_over_omega_r: w,
        quantity: "squeezing_closed_vs_moments".into(),
        max_residual: max_dual,
        tolerance: DUAL_ROUTE_TOL,
        flagged: max_dual.is_nan() || max_dual > DUAL_ROUTE_TOL,
    });
    Ok(())
}

fn reduced_state(p: &DerivedParams, alpha_sq: f64, out: &mut Collected) -> Result<()> {
    let w = p.omega_sw;
    let space = oracle::rho_c_space(p, alpha_sq)?;
    let internal = analytic::rho_c_cutoff(p, alpha_sq);
    if space.dim() > MAX_BLOCK_DIM || internal > MAX_STATE_DIM {
        out.skipped.push(format!(
            "ω_sw = {w}: reduced-state comparison needs cutoff {} (oracle) / {internal} (closed form)",
            space.dim()
        ));
        return Ok(());
    }
    let rho = oracle::evolve_rho_c(p, alpha_sq, CHECK_TAU, space)?;
    let closed = analytic::rho_c(p, alpha_sq, CHECK_TAU, space)?;
    let distance = closed.rho.trace_distance(&rho)?;
    let delta = oracle::rho_c_convergence(p, alpha_sq, CHECK_TAU, space)?;
    out.push(
        w,
        Some(CHECK_TAU),
        OracleReport::new("rho_c_trace_distance", 0.0, distance, 1.0, space.dim(), delta),
    );
    Ok(())
}

fn q_cross_check(p: &DerivedParams, alpha_sq: f64, grid: GridSpec, out: &mut Collected) -> Result<()> {
    let q = analytic::q_function(p, alpha_sq, CHECK_TAU, grid)?;
    let residual = q.closed_form_residual.unwrap_or(f64::NAN);
    out.dual_routes.push(DualRoute {
        omega_sw_over_omega_r: p.omega_sw,
        quantity: "q_half_pi_closed_vs_overlaps".into(),
        max_residual: residual,
        tolerance: Q_CROSS_TOL,
        flagged: q.discrepancy,
    });
    Ok(())
}

fn structural(p: &DerivedParams, alpha_sq: f64, out: &mut Collected) -> Result<()> {
    let w = p.omega_sw;
    let space = oracle::diagonalization_space(p)?;
    for r in oracle::check_diagonalization(p, space)? {
        out.push(w, None, r);
    }
    let micro = oracle::micro_params(p)?;
    for r in oracle::check_full_tensor(&micro, alpha_sq, CHECK_TAU)? {
        out.push(w, Some(CHECK_TAU), r);
    }
    Ok(())
}

/// Runs every comparison for each ω_sw in `options` on top of `config`
/// (whose own ω_sw setting is replaced).
pub fn validate(config: &PhysicalConfig, options: &ValidationOptions) -> Result<ValidationReport> {
    let alpha_sq = config.alpha_sq;
    let mut out = Collected::default();
    for &w in &options.omega_sw {
        let mut c = config.clone();
        c.waist = None;
        c.omega_sw_over_omega_r = Some(w);
        let p = derive(&c)?;
        let r = lattice(&p, alpha_sq, options, &mut out);
        out.absorb(w, "moment lattice", r)?;
        let r = structural(&p, alpha_sq, &mut out);
        out.absorb(w, "diagonalization / full tensor", r)?;
        let r = reduced_state(&p, alpha_sq, &mut out);
        out.absorb(w, "reduced state", r)?;
        let r = q_cross_check(&p, alpha_sq, options.q_grid, &mut out);
        out.absorb(w, "Q function", r)?;
    }
    Ok(finish(out, options.tol, alpha_sq))
}

fn finish(out: Collected, tol: f64, alpha_sq: f64) -> ValidationReport {
    let mut discrepancies: Vec<Discrepancy> = out
        .dual_routes
        .iter()
        .filter(|d| d.flagged)
        .map(|d| Discrepancy {
            omega_sw_over_omega_r: d.omega_sw_over_omega_r,
            quantity: d.quantity.clone(),
            tau: None,
            residual: d.max_residual,
            tolerance: d.tolerance,
        })
        .collect();
    discrepancies.extend(
        out.entries
            .iter()
            .filter(|e| e.report.converged && !e.report.passes(tol))
            .map(|e| Discrepancy {
                omega_sw_over_omega_r: e.omega_sw_over_omega_r,
                quantity: e.report.quantity.clone(),
                tau: e.tau,
                residual: e.report.rel_residual,
                tolerance: tol,
            }),
    );
    let unconverged = out.entries.iter().any(|e| !e.report.converged) || !out.truncation_failures.is_empty();
    let status = if !discrepancies.is_empty() {
        Status::Discrepancy
    } else if unconverged {
        Status::Unconverged
    } else {
        Status::Pass
    };
    ValidationReport {
        tol,
        alpha_sq,
        entries: out.entries,
        dual_routes: out.dual_routes,
        discrepancies,
        skipped: out.skipped,
        truncation_failures: out.truncation_failures,
        status,
    }
}
