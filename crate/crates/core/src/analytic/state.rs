use super::{Poisson, POISSON_TAIL_TOL};
use crate::error::{Error, Result};
use crate::fock::{gaussian_cutoff, squeezed_coherent, DensityMatrix, Displacer, FockSpace, FockState, Squeezer};
use crate::params::DerivedParams;
use num_complex::Complex64;

/// Largest internal cutoff used to build the |φ_n⟩ vectors.
pub const MAX_STATE_DIM: usize = 4096;

#[derive(Debug, Clone)]
pub struct ReducedState {
    pub rho: DensityMatrix,
    pub n_max: usize,
    /// Trace before renormalization: Poisson mass kept minus norm lost to the
    /// output cutoff.
    pub raw_trace: f64,
    /// Largest norm of any |φ_n⟩ discarded when projecting on the output space.
    pub dropped: f64,
    /// Internal cutoff the vectors were built in.
    pub internal_dim: usize,
}

#[derive(Debug, Clone, Copy)]
struct Bound {
    amplitude: f64,
    squeeze: f64,
}

// |φ_n⟩ passes through |βne^{−iτ}, ξe^{−2iτ}⟩ and S(−ξ) of it before the final
// displacement; none of the three has |⟨c⟩| above (1 + e^{2ξ})βn or
// squeezing above 2ξ.
fn bound(params: &DerivedParams, n: usize) -> Bound {
    let xi = params.xi.abs();
    Bound {
        amplitude: (1.0 + (2.0 * xi).exp()) * (params.beta * n as f64).abs(),
        squeeze: 2.0 * xi,
    }
}

/// Output cutoff large enough for every |φ_n⟩ kept by the Poisson rule.
pub fn rho_c_cutoff(params: &DerivedParams, alpha_sq: f64) -> usize {
    let poisson = Poisson::truncated(alpha_sq, POISSON_TAIL_TOL);
    (0..=poisson.n_max())
        .map(|n| {
            let b = bound(params, n);
            gaussian_cutoff(b.amplitude, b.squeeze)
        })
        .max()
        .unwrap_or(2)
}

/// |φ_n(τ)⟩ = D†(βn)S†(ξ)|βne^{−iτ}, ξe^{−2iτ}⟩ in `space`, leakage checked at
/// every stage.
fn phi(
    params: &DerivedParams,
    n: usize,
    tau: f64,
    displacer: &Displacer,
    squeezer: Option<&Squeezer>,
) -> Result<FockState> {
    let bn = params.beta * n as f64;
    let xi = Complex64::new(params.xi, 0.0);
    let s = squeezed_coherent(
        displacer.space(),
        Complex64::from_polar(bn, -tau),
        xi * Complex64::from_polar(1.0, -2.0 * tau),
    )?;
    let unsqueezed = match squeezer {
        Some(sq) => {
            let v = sq.apply(-xi, &s)?;
            v.check_leakage("S†(ξ)|s⟩")?;
            v
        }
        None => s,
    };
    let state = displacer.apply(Complex64::new(-bn, 0.0), &unsqueezed)?;
    state.check_leakage("D†(βn)S†(ξ)|s⟩")?;
    Ok(state)
}

/// ρ_c(τ) = Σ_n P_n |φ_n(τ)⟩⟨φ_n(τ)| on `space`, renormalized to unit trace.
pub fn rho_c(params: &DerivedParams, alpha_sq: f64, tau: f64, space: FockSpace) -> Result<ReducedState> {
    let poisson = Poisson::truncated(alpha_sq, POISSON_TAIL_TOL);
    let needed = rho_c_cutoff(params, alpha_sq);
    let internal = needed.max(space.dim());
    if internal > MAX_STATE_DIM {
        return Err(Error::Truncation {
            context: format!("reduced state needs cutoff {internal} (limit {MAX_STATE_DIM})"),
            dim: MAX_STATE_DIM,
            leakage: f64::NAN,
        });
    }
    let internal_space = FockSpace::new(internal)?;
    let displacer = Displacer::new(internal_space)?;
    let squeezer = if params.xi == 0.0 {
        None
    } else {
        Some(Squeezer::new(internal_space)?)
    };

    let mut rho = DensityMatrix::zeros(space);
    let mut dropped: f64 = 0.0;
    for (n, &p) in poisson.weights.iter().enumerate() {
        let state = phi(params, n, tau, &displacer, squeezer.as_ref())?;
        let (projected, lost) = state.resized(space);
        dropped = dropped.max(lost);
        rho.add_projector(p, &projected);
    }
    let raw_trace = rho.trace();
    rho.scale_in_place(1.0 / raw_trace);
    Ok(ReducedState {
        rho,
        n_max: poisson.n_max(),
        raw_trace,
        dropped,
        internal_dim: internal,
    })
}
