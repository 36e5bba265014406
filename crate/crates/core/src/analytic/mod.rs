//! Closed-form reduced state, moments, squeezing parameters and Q function
//! of the Bogoliubov mode, evaluated on the nonnegative ν root carried by
//! [`DerivedParams`].
//!
//! Where a printed closed form can be checked against a second route (the
//! moment-assembled squeezing parameters, the numeric-overlap Q function) both
//! are computed and any disagreement is surfaced as a discrepancy flag. The
//! closed forms are never adjusted to make the routes agree.

mod qfunc;
mod state;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DerivedParams;

pub use qfunc::{q_closed_half_pi, q_closed_initial, q_function, Axis, GridSpec, QGrid};
pub use state::{rho_c, rho_c_cutoff, ReducedState, MAX_STATE_DIM};

/// Default tail mass allowed when truncating the photon-number sum.
pub const POISSON_TAIL_TOL: f64 = 1e-12;

/// Largest tolerated |closed form − moment route| for S_q and S_p.
pub const DUAL_ROUTE_TOL: f64 = 1e-10;

/// Tolerance of the τ = 0 and τ = π/2 Q closed-form cross-checks.
pub const Q_CROSS_TOL: f64 = 1e-7;

/// Photon-number distribution e^{−|α|²}|α|^{2n}/n! truncated at `n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poisson {
    pub weights: Vec<f64>,
    /// Mass of the discarded terms n > n_max.
    pub tail: f64,
}

impl Poisson {
    /// Smallest n_max whose discarded tail is below `tail_tol`.
    pub fn truncated(alpha_sq: f64, tail_tol: f64) -> Self {
        Self::truncated_weighted(alpha_sq, tail_tol, |_| 1.0)
    }

    /// Smallest n_max with Σ_{n>n_max} P_n w(n) below `tail_tol`. The oracle
    /// weights the tail by the block's occupation so moments converge too.
    pub fn truncated_weighted(alpha_sq: f64, tail_tol: f64, weight: impl Fn(usize) -> f64) -> Self {
        let a = alpha_sq.max(0.0);
        let mut p = (-a).exp();
        let mut weights = Vec::new();
        let mut n = 0;
        loop {
            weights.push(p);
            // remaining mass, summed forward to avoid 1 − Σ cancellation
            let mut q = p;
            let mut tail = 0.0;
            let mut weighted = 0.0;
            for k in n + 1..n + 400 {
                q *= a / k as f64;
                tail += q;
                weighted += q * weight(k);
                if q == 0.0 || q < 1e-40 * tail.max(f64::MIN_POSITIVE) {
                    break;
                }
            }
            if weighted < tail_tol {
                return Poisson { weights, tail };
            }
            n += 1;
            p *= a / n as f64;
        }
    }

    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// The four auxiliary functions of the moment closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1234 {
    pub f1: Complex64,
    pub f2: Complex64,
    pub f3: f64,
    pub f4: f64,
}

/// f₁…f₄ exactly as printed, including the bare −2cos τ in f₃.
pub fn f1234(mu: f64, nu: f64, tau: f64) -> F1234 {
    let e1 = Complex64::from_polar(1.0, -tau);
    let e2 = Complex64::from_polar(1.0, -2.0 * tau);
    let d = mu - nu;
    let pair2 = mu * mu * e2 + nu * nu * e2.conj();
    let pair1 = mu * e1 + nu * e1.conj();
    let f1 = d * d * pair2 + 2.0 * mu * nu * d * d - 2.0 * d * pair1 + 1.0;
    let f2 = -mu * nu * pair2 + mu * nu + 2.0 * mu * nu.powi(3);
    let c1 = tau.cos();
    let c2 = (2.0 * tau).cos();
    let f3 = 2.0 * mu * nu * d * d * c2 + (mu * mu + nu * nu) * d * d - 2.0 * c1 + 1.0;
    let f4 = -2.0 * mu * mu * nu * nu * c2 + nu * nu * (mu * mu + nu * nu) + nu * nu;
    F1234 { f1, f2, f3, f4 }
}

/// First and second moments of the Bogoliubov mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub c_mean: Complex64,
    pub c_sq: Complex64,
    pub n_mean: f64,
    pub tau: f64,
}

impl Moments {
    /// (S_q, S_p) assembled from the moments:
    /// S_{q,p} = ±[⟨c²⟩ + ⟨c†²⟩ − ⟨c⟩² − ⟨c†⟩²] + 2[⟨c†c⟩ − |⟨c⟩|²].
    pub fn squeezing(&self) -> (f64, f64) {
        let anomalous = 2.0 * (self.c_sq - self.c_mean * self.c_mean).re;
        let normal = 2.0 * (self.n_mean - self.c_mean.norm_sqr());
        (anomalous + normal, -anomalous + normal)
    }

    /// Largest violation of ⟨c†c⟩ ≥ |⟨c⟩|² and ⟨c†c⟩ ≥ 0 (0 when both hold).
    pub fn violation(&self) -> f64 {
        (self.c_mean.norm_sqr() - self.n_mean).max(-self.n_mean).max(0.0)
    }

    /// Largest componentwise |a − b|.
    pub fn max_abs_diff(&self, other: &Moments) -> f64 {
        (self.c_mean - other.c_mean)
            .norm()
            .max((self.c_sq - other.c_sq).norm())
            .max((self.n_mean - other.n_mean).abs())
    }

    /// Largest componentwise |a − b| / max(|a|, |b|, floor).
    pub fn max_rel_diff(&self, other: &Moments, floor: f64) -> f64 {
        let rel = |d: f64, a: f64, b: f64| d / a.max(b).max(floor);
        rel(
            (self.c_mean - other.c_mean).norm(),
            self.c_mean.norm(),
            other.c_mean.norm(),
        )
        .max(rel(
            (self.c_sq - other.c_sq).norm(),
            self.c_sq.norm(),
            other.c_sq.norm(),
        ))
        .max(rel(
            (self.n_mean - other.n_mean).abs(),
            self.n_mean.abs(),
            other.n_mean.abs(),
        ))
    }
}

/// ⟨c⟩, ⟨c²⟩ and ⟨c†c⟩ from the closed forms (infinite photon sum).
pub fn moments(params: &DerivedParams, alpha_sq: f64, tau: f64) -> Moments {
    let (mu, nu, beta) = (params.mu, params.nu, params.beta);
    let f = f1234(mu, nu, tau);
    let e1 = Complex64::from_polar(1.0, -tau);
    let c_mean = beta * alpha_sq * ((mu - nu) * (mu * e1 + nu * e1.conj()) - 1.0);
    let second = alpha_sq * (1.0 + alpha_sq) * beta * beta;
    Moments {
        c_mean,
        c_sq: second * f.f1 + f.f2,
        n_mean: second * f.f3 + f.f4,
        tau,
    }
}

/// Closed-form (S_q, S_p).
pub fn squeezing_closed(params: &DerivedParams, alpha_sq: f64, tau: f64) -> (f64, f64) {
    let (mu, nu, beta) = (params.mu, params.nu, params.beta);
    let (c1, c2, s1) = (tau.cos(), (2.0 * tau).cos(), tau.sin());
    let coherent = 4.0 * beta * beta * alpha_sq;
    let s_q = coherent * (1.0 - c1).powi(2) + 2.0 * nu * (mu + nu) * (1.0 - (mu + nu) * (mu * c2 - nu));
    let s_p = coherent * (mu - nu).powi(4) * s1 * s1 + 2.0 * nu * (mu - nu) * ((mu - nu) * (mu * c2 + nu) - 1.0);
    (s_q, s_p)
}

/// Both squeezing routes at one τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Squeezing {
    pub tau: f64,
    pub s_q: f64,
    pub s_p: f64,
    pub s_q_moments: f64,
    pub s_p_moments: f64,
    /// max(|ΔS_q|, |ΔS_p|) between the routes.
    pub dual_route_residual: f64,
    pub discrepancy: bool,
}

pub fn squeezing(params: &DerivedParams, alpha_sq: f64, tau: f64) -> Squeezing {
    let (s_q, s_p) = squeezing_closed(params, alpha_sq, tau);
    let (s_q_moments, s_p_moments) = moments(params, alpha_sq, tau).squeezing();
    let dual_route_residual = (s_q - s_q_moments).abs().max((s_p - s_p_moments).abs());
    Squeezing {
        tau,
        s_q,
        s_p,
        s_q_moments,
        s_p_moments,
        dual_route_residual,
        discrepancy: dual_route_residual.is_nan() || dual_route_residual > DUAL_ROUTE_TOL,
    }
}

/// `steps` evenly spaced points on [0, tau_max], both ends included.
pub fn tau_grid(tau_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::Grid(format!("tau grid needs at least 2 points, got {steps}")));
    }
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(Error::Grid(format!(
            "tau_max must be positive and finite, got {tau_max}"
        )));
    }
    let h = tau_max / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| if k == steps - 1 { tau_max } else { k as f64 * h })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezeSeries {
    pub omega_sw_over_omega_r: f64,
    pub tau: Vec<f64>,
    pub s_q: Vec<f64>,
    pub s_p: Vec<f64>,
    pub max_dual_route_residual: f64,
    pub discrepancy: bool,
}

impl SqueezeSeries {
    /// min over the grid of (S_q + 1)(S_p + 1).
    pub fn heisenberg_min(&self) -> f64 {
        self.s_q
            .iter()
            .zip(&self.s_p)
            .map(|(q, p)| (q + 1.0) * (p + 1.0))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn squeeze_series(params: &DerivedParams, alpha_sq: f64, taus: &[f64]) -> SqueezeSeries {
    let points: Vec<Squeezing> = taus.par_iter().map(|&t| squeezing(params, alpha_sq, t)).collect();
    SqueezeSeries {
        omega_sw_over_omega_r: params.omega_sw,
        tau: taus.to_vec(),
        s_q: points.iter().map(|p| p.s_q).collect(),
        s_p: points.iter().map(|p| p.s_p).collect(),
        max_dual_route_residual: points.iter().map(|p| p.dual_route_residual).fold(0.0, f64::max),
        discrepancy: points.iter().any(|p| p.discrepancy),
    }
}
