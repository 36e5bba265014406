use std::f64::consts::FRAC_1_SQRT_2;

use faer::Mat;
use num_complex::Complex64;

use super::{block_mixture, OracleReport};
use crate::analytic::{Poisson, POISSON_TAIL_TOL};
use crate::error::Result;
use crate::fock::{
    annihilation, creation, matrix_exp_hermitian, partial_trace_first, DensityMatrix, FockOperator, FockSpace,
    FockState,
};
use crate::params::{from_reduced, DerivedParams};

pub const MICRO_PHOTON_DIM: usize = 5;
pub const MICRO_BOGOLIUBOV_DIM: usize = 64;

/// The given parameters with ζ lowered so that β = 1/20 and the micro
/// product space holds every block.
pub fn micro_params(params: &DerivedParams) -> Result<DerivedParams> {
    let zeta = 0.05 * std::f64::consts::SQRT_2 * (params.omega_c + 0.5 * params.omega_sw);
    from_reduced(params.omega_r, params.u0, params.omega_sw, zeta, params.delta_c)
}

fn kron(a: &FockOperator, b: &FockOperator) -> Result<FockOperator> {
    let (da, db) = (a.space().dim(), b.space().dim());
    let space = FockSpace::new(da * db)?;
    Ok(FockOperator::from_fn(space, |i, j| {
        a.get(i / db, j / db) * b.get(i % db, j % db)
    }))
}

/// H on photon ⊗ Bogoliubov, assembled from tensor products rather than
/// blocks.
fn full_hamiltonian(params: &DerivedParams, photon: FockSpace, bog: FockSpace) -> Result<FockOperator> {
    let (a, ad) = (annihilation(photon), creation(photon));
    let (c, cd) = (annihilation(bog), creation(bog));
    let num_a = ad.mul(&a)?;
    let id_a = FockOperator::identity(photon);
    let id_c = FockOperator::identity(bog);
    let real = |x: f64| Complex64::new(x, 0.0);
    let terms = [
        kron(&num_a, &id_c)?.scale(real(params.delta_c)),
        kron(&id_a, &cd.mul(&c)?)?.scale(real(params.omega_c)),
        kron(&id_a, &c.mul(&c)?.add(&cd.mul(&cd)?)?)?.scale(real(0.25 * params.omega_sw)),
        kron(&num_a, &c.add(&cd)?)?.scale(real(FRAC_1_SQRT_2 * params.zeta)),
    ];
    let mut h = FockOperator::zeros(FockSpace::new(photon.dim() * bog.dim())?);
    for t in &terms {
        h = h.add(t)?;
    }
    Ok(h)
}

struct TensorRun {
    rho_c: DensityMatrix,
    commutator: f64,
    unitarity: f64,
}

fn run_tensor(params: &DerivedParams, photon_state: &FockState, tau: f64, bog: FockSpace) -> Result<TensorRun> {
    let photon = photon_state.space();
    let h = full_hamiltonian(params, photon, bog)?;
    let number = kron(&FockOperator::number(photon), &FockOperator::identity(bog))?;
    let commutator = h.commutator(&number)?.matrix().norm_max();
    let u = matrix_exp_hermitian(&h, tau / params.omega_c_prime)?;
    let unitarity = u.unitarity_residual();
    let (dp, db) = (photon.dim(), bog.dim());
    let psi0 = Mat::from_fn(dp * db, 1, |i, _| {
        if i % db == 0 {
            photon_state.amplitudes()[i / db]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let psi = u.matrix() * &psi0;
    let state = FockState::new(u.space(), (0..dp * db).map(|i| psi[(i, 0)]).collect())?;
    let rho = DensityMatrix::pure(&state);
    Ok(TensorRun {
        rho_c: partial_trace_first(&rho, dp, db)?,
        commutator,
        unitarity,
    })
}

/// Second-level check of the block decomposition on the micro product space:
/// one dense exponential of the full Hamiltonian, a partial trace over the
/// photons and a comparison with the block route at the same truncation.
/// Also reruns at δ_c = 0 and 3 ω_R to check that ρ_c does not depend on it.
pub fn check_full_tensor(params: &DerivedParams, alpha_sq: f64, tau: f64) -> Result<Vec<OracleReport>> {
    let poisson = Poisson::truncated(alpha_sq, POISSON_TAIL_TOL);
    let photon_dim = (poisson.n_max() + 1).clamp(2, MICRO_PHOTON_DIM);
    let bog = FockSpace::new(MICRO_BOGOLIUBOV_DIM)?;
    let photon = FockSpace::new(photon_dim)?;
    // truncated coherent state: weights P_n / Σ_{m<dim} P_m
    let coherent = FockState::new(
        photon,
        (0..photon_dim)
            .map(|n| Complex64::new(poisson.weights.get(n).copied().unwrap_or(0.0).sqrt(), 0.0))
            .collect(),
    )?
    .normalized();
    let weights: Vec<f64> = coherent.amplitudes().iter().map(|a| a.norm_sqr()).collect();

    let full = run_tensor(params, &coherent, tau, bog)?;
    let blocks = block_mixture(params, &weights, tau, bog, |_| bog.dim())?;
    let distance = full.rho_c.trace_distance(&blocks)?;
    // the block route is cheap at twice the cutoff; every block state is
    // leakage-checked at both sizes
    let fine = block_mixture(params, &weights, tau, bog.doubled(), |_| 2 * bog.dim())?;
    let convergence = fine.resized(bog).trace_distance(&blocks)?;

    let at_zero = run_tensor(&params.with_delta_c(0.0), &coherent, tau, bog)?;
    let at_three = run_tensor(&params.with_delta_c(3.0), &coherent, tau, bog)?;
    let delta_c_distance = at_zero.rho_c.trace_distance(&at_three.rho_c)?;

    let dim = bog.dim();
    let unitarity = full.unitarity.max(at_zero.unitarity).max(at_three.unitarity);
    Ok(vec![
        OracleReport::new("full_tensor_trace_distance", 0.0, distance, 1.0, dim, convergence),
        OracleReport::new("delta_c_trace_distance", 0.0, delta_c_distance, 1.0, dim, 0.0),
        OracleReport::new("photon_number_commutator", 0.0, full.commutator, 1.0, dim, 0.0),
        OracleReport::new("tensor_unitarity", 0.0, unitarity, 1.0, dim, 0.0),
    ])
}
