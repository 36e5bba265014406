//! Brute-force evolution of the two-mode Hamiltonian.
//!
//! The Hamiltonian commutes with a†a, so it splits into one Bogoliubov-mode
//! block per photon number n:
//!
//! H_n = δ_c n + Ω_c c†c + (ω_sw/4)(c² + c†²) + (√2/2) ζ n (c + c†)
//!
//! Each block is evolved from |0⟩ by a single exponential at t = τ/Ω′_c and
//! the blocks are mixed with Poisson weights. Blocks whose state does not fit
//! the dense cutoff cap are advanced instead with the numeric exponential of
//! their linear Heisenberg equations, see [`block_flow`].

mod diag;
mod phase;
mod tensor;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{Moments, Poisson, POISSON_TAIL_TOL};
use crate::error::{Error, Result};
use crate::fock::{gaussian_cutoff, DensityMatrix, FockOperator, FockSpace, FockState, HermitianSpectrum};
use crate::params::DerivedParams;

pub use diag::{check_diagonalization, diagonalization_space, DIAG_COLUMNS};
pub use phase::{block_extent, block_flow, LinearFlow};
pub use tensor::{check_full_tensor, micro_params, MICRO_BOGOLIUBOV_DIM, MICRO_PHOTON_DIM};

/// Largest change under cutoff doubling for a report to count as converged.
pub const CONVERGENCE_TOL: f64 = 1e-8;

/// Dense cutoff cap for the automatically sized block engine.
pub const MAX_BLOCK_DIM: usize = 1536;

/// Tail tolerance of the occupation-weighted photon sum used for moments.
pub const MOMENT_TAIL_TOL: f64 = 1e-12;

/// One comparison between a closed-form value and its numeric counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub quantity: String,
    pub analytic: f64,
    pub oracle: f64,
    pub abs_residual: f64,
    /// abs_residual divided by the quantity's natural scale.
    pub rel_residual: f64,
    pub cutoff: usize,
    pub convergence_delta: f64,
    pub converged: bool,
}

impl OracleReport {
    /// `scale` sets the denominator of the relative residual; it is floored
    /// by |analytic| so large quantities are compared relatively.
    pub fn new(
        quantity: impl Into<String>,
        analytic: f64,
        oracle: f64,
        scale: f64,
        cutoff: usize,
        convergence_delta: f64,
    ) -> Self {
        let abs_residual = (analytic - oracle).abs();
        let denom = analytic.abs().max(scale.abs()).max(f64::MIN_POSITIVE);
        OracleReport {
            quantity: quantity.into(),
            analytic,
            oracle,
            abs_residual,
            rel_residual: abs_residual / denom,
            cutoff,
            convergence_delta,
            converged: convergence_delta < CONVERGENCE_TOL,
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.rel_residual <= tol
    }
}

#[derive(Debug, Clone)]
pub struct BlockHamiltonian {
    pub photon_number: usize,
    pub matrix: FockOperator,
}

/// H_n on `space` (real symmetric).
pub fn block_hamiltonian(params: &DerivedParams, n: usize, space: FockSpace) -> BlockHamiltonian {
    let g = FRAC_1_SQRT_2 * params.zeta * n as f64;
    let shift = params.delta_c * n as f64;
    let quarter = 0.25 * params.omega_sw;
    let matrix = FockOperator::from_fn(space, |i, j| {
        let (lo, hi) = (i.min(j), i.max(j));
        let v = match hi - lo {
            0 => shift + params.omega_c * lo as f64,
            1 => g * (hi as f64).sqrt(),
            2 => quarter * ((hi * (hi - 1)) as f64).sqrt(),
            _ => 0.0,
        };
        Complex64::new(v, 0.0)
    });
    BlockHamiltonian {
        photon_number: n,
        matrix,
    }
}

pub fn build_blocks(params: &DerivedParams, n_max: usize, space: FockSpace) -> Vec<BlockHamiltonian> {
    (0..=n_max).map(|n| block_hamiltonian(params, n, space)).collect()
}

/// Cutoff holding block n's state at every τ.
pub fn block_cutoff(params: &DerivedParams, n: usize) -> usize {
    let (amplitude, r) = block_extent(params, n);
    gaussian_cutoff(amplitude, r)
}

/// (⟨c⟩, ⟨c²⟩, ⟨c†c⟩) of a pure state.
pub fn state_moments(state: &FockState) -> (Complex64, Complex64, f64) {
    let a = state.amplitudes();
    let mut c = Complex64::new(0.0, 0.0);
    let mut c2 = Complex64::new(0.0, 0.0);
    let mut n = 0.0;
    for k in 0..a.len() {
        n += k as f64 * a[k].norm_sqr();
        if k + 1 < a.len() {
            c += a[k].conj() * a[k + 1] * ((k + 1) as f64).sqrt();
        }
        if k + 2 < a.len() {
            c2 += a[k].conj() * a[k + 2] * (((k + 1) * (k + 2)) as f64).sqrt();
        }
    }
    (c, c2, n)
}

/// tr(ρc), tr(ρc²), tr(ρc†c).
pub fn density_moments(rho: &DensityMatrix, tau: f64) -> Moments {
    let n = rho.space().dim();
    let mut c = Complex64::new(0.0, 0.0);
    let mut c2 = Complex64::new(0.0, 0.0);
    let mut occ = 0.0;
    for i in 0..n {
        occ += i as f64 * rho.get(i, i).re;
        if i >= 1 {
            c += rho.get(i, i - 1) * (i as f64).sqrt();
        }
        if i >= 2 {
            c2 += rho.get(i, i - 2) * ((i * (i - 1)) as f64).sqrt();
        }
    }
    Moments {
        c_mean: c,
        c_sq: c2,
        n_mean: occ,
        tau,
    }
}

fn evolved_vacuum(spectrum: &HermitianSpectrum, params: &DerivedParams, n: usize, tau: f64) -> Result<FockState> {
    let space = spectrum.space();
    let state = spectrum.evolve(&FockState::vacuum(space), tau / params.omega_c_prime)?;
    state.check_leakage(&format!("block n = {n} at τ = {tau}"))?;
    Ok(state)
}

/// Σ_n w_n U_n(τ)|0⟩⟨0|U_n†(τ) on `space`, block n evolved at cutoff
/// `dim(n)` (at most `space`) and zero-padded. Not renormalized.
pub(crate) fn block_mixture(
    params: &DerivedParams,
    weights: &[f64],
    tau: f64,
    space: FockSpace,
    dim: impl Fn(usize) -> usize + Sync,
) -> Result<DensityMatrix> {
    let states: Vec<FockState> = weights
        .par_iter()
        .enumerate()
        .map(|(n, _)| {
            let own = FockSpace::new(dim(n).clamp(2, space.dim()))?;
            let block = block_hamiltonian(params, n, own);
            let state = evolved_vacuum(&HermitianSpectrum::new(&block.matrix)?, params, n, tau)?;
            Ok(state.resized(space).0)
        })
        .collect::<Result<_>>()?;
    let mut rho = DensityMatrix::zeros(space);
    for (w, s) in weights.iter().zip(&states) {
        rho.add_projector(*w, s);
    }
    Ok(rho)
}

fn rho_c_scaled(
    params: &DerivedParams,
    alpha_sq: f64,
    tau: f64,
    space: FockSpace,
    scale: usize,
) -> Result<DensityMatrix> {
    let poisson = Poisson::truncated(alpha_sq, POISSON_TAIL_TOL);
    let mut rho = block_mixture(params, &poisson.weights, tau, space, |n| {
        scale * block_cutoff(params, n)
    })?;
    let trace = rho.trace();
    rho.scale_in_place(1.0 / trace);
    Ok(rho)
}

/// ρ_c(τ) = Σ_n P_n U_n(τ)|0⟩⟨0|U_n†(τ) on `space`, photon sum truncated by
/// the tail rule and renormalized to unit trace. Each block is evolved at its
/// own cutoff (capped by `space`); leakage is checked on every block state.
pub fn evolve_rho_c(params: &DerivedParams, alpha_sq: f64, tau: f64, space: FockSpace) -> Result<DensityMatrix> {
    rho_c_scaled(params, alpha_sq, tau, space, 1)
}

/// Trace distance between [`evolve_rho_c`] and the same state with every
/// block and the output space at twice the cutoff.
pub fn rho_c_convergence(params: &DerivedParams, alpha_sq: f64, tau: f64, space: FockSpace) -> Result<f64> {
    let base = evolve_rho_c(params, alpha_sq, tau, space)?;
    let fine = rho_c_scaled(params, alpha_sq, tau, space.doubled(), 2)?;
    fine.resized(space).trace_distance(&base)
}

/// Output cutoff holding every block kept by the tail rule.
pub fn rho_c_space(params: &DerivedParams, alpha_sq: f64) -> Result<FockSpace> {
    let poisson = Poisson::truncated(alpha_sq, POISSON_TAIL_TOL);
    FockSpace::new(
        (0..=poisson.n_max())
            .map(|n| block_cutoff(params, n))
            .max()
            .unwrap_or(2),
    )
}

/// Moments as traces against [`evolve_rho_c`].
pub fn evolve_moments(params: &DerivedParams, alpha_sq: f64, tau: f64, space: FockSpace) -> Result<Moments> {
    Ok(density_moments(&evolve_rho_c(params, alpha_sq, tau, space)?, tau))
}

/// How a block is advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Fock { dim: usize },
    PhaseSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub photon_number: usize,
    pub weight: f64,
    pub engine: Engine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Force every block onto the dense engine at this cutoff.
    pub cutoff: Option<usize>,
    pub max_block_dim: usize,
    pub tail_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            cutoff: None,
            max_block_dim: MAX_BLOCK_DIM,
            tail_tol: MOMENT_TAIL_TOL,
        }
    }
}

/// Block oracle with every dense spectrum precomputed, for τ sweeps.
#[derive(Debug, Clone)]
pub struct BlockOracle {
    params: DerivedParams,
    plans: Vec<BlockPlan>,
    spectra: Vec<Option<HermitianSpectrum>>,
}

impl BlockOracle {
    pub fn new(params: &DerivedParams, alpha_sq: f64, options: OracleOptions) -> Result<Self> {
        // weight the tail by a bound on the block's moments so the truncated
        // sum converges for ⟨c†c⟩ as well as for the probabilities
        let grow = (2.0 * params.xi.abs()).exp();
        let poisson = Poisson::truncated_weighted(alpha_sq, options.tail_tol, |n| {
            (1.0 + 2.0 * params.beta.abs() * n as f64 * grow).powi(2)
        });
        let plans = poisson
            .weights
            .iter()
            .enumerate()
            .map(|(n, &weight)| {
                let engine = match options.cutoff {
                    Some(dim) => Engine::Fock { dim },
                    None => {
                        let dim = block_cutoff(params, n);
                        if dim <= options.max_block_dim {
                            Engine::Fock { dim }
                        } else {
                            Engine::PhaseSpace
                        }
                    }
                };
                BlockPlan {
                    photon_number: n,
                    weight,
                    engine,
                }
            })
            .collect();
        Self::from_plans(params, plans)
    }

    pub fn from_plans(params: &DerivedParams, plans: Vec<BlockPlan>) -> Result<Self> {
        let spectra = plans
            .par_iter()
            .map(|plan| match plan.engine {
                Engine::Fock { dim } => {
                    let block = block_hamiltonian(params, plan.photon_number, FockSpace::new(dim)?);
                    HermitianSpectrum::new(&block.matrix).map(Some)
                }
                Engine::PhaseSpace => Ok(None),
            })
            .collect::<Result<_>>()?;
        Ok(BlockOracle {
            params: *params,
            plans,
            spectra,
        })
    }

    /// Same blocks with every dense cutoff doubled.
    pub fn doubled(&self) -> Result<Self> {
        let plans = self
            .plans
            .iter()
            .map(|p| BlockPlan {
                engine: match p.engine {
                    Engine::Fock { dim } => Engine::Fock { dim: 2 * dim },
                    Engine::PhaseSpace => Engine::PhaseSpace,
                },
                ..*p
            })
            .collect();
        Self::from_plans(&self.params, plans)
    }

    pub fn params(&self) -> &DerivedParams {
        &self.params
    }

    pub fn plans(&self) -> &[BlockPlan] {
        &self.plans
    }

    /// Largest dense cutoff in use (0 when every block is phase-space).
    pub fn max_dim(&self) -> usize {
        self.plans
            .iter()
            .filter_map(|p| match p.engine {
                Engine::Fock { dim } => Some(dim),
                Engine::PhaseSpace => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// U_n(τ)|0⟩ for a dense block, `None` for a phase-space one.
    pub fn block_state(&self, n: usize, tau: f64) -> Result<Option<FockState>> {
        match self.spectra.get(n) {
            Some(Some(spectrum)) => evolved_vacuum(spectrum, &self.params, n, tau).map(Some),
            Some(None) => Ok(None),
            None => Err(Error::Grid(format!("no block for photon number {n}"))),
        }
    }

    pub fn moments(&self, tau: f64) -> Result<Moments> {
        let mut m = Moments {
            c_mean: Complex64::new(0.0, 0.0),
            c_sq: Complex64::new(0.0, 0.0),
            n_mean: 0.0,
            tau,
        };
        for plan in &self.plans {
            let n = plan.photon_number;
            let (c, c2, occ) = match self.block_state(n, tau)? {
                Some(state) => state_moments(&state),
                None => block_flow(&self.params, n, tau).vacuum_moments(),
            };
            m.c_mean += plan.weight * c;
            m.c_sq += plan.weight * c2;
            m.n_mean += plan.weight * occ;
        }
        Ok(m)
    }

    pub fn moment_series(&self, taus: &[f64]) -> Result<Vec<Moments>> {
        taus.par_iter().map(|&t| self.moments(t)).collect()
    }
}
