use num_complex::Complex64;
use rayon::prelude::*;

use super::{block_hamiltonian, OracleReport};
use crate::error::{Error, Result};
use crate::fock::{gaussian_cutoff, Displacer, FockSpace, FockState, Squeezer};
use crate::params::DerivedParams;

/// Number of low basis vectors |0⟩..|K−1⟩ on which H″ is sampled.
pub const DIAG_COLUMNS: usize = 8;

// Cutoffs above this use two photon levels instead of three.
const PREFERRED_DIM: usize = 2048;

// D†(βn)S†(ξ)|j⟩ for j < K: the squeezed number state widens the amplitude
// by about e^{ξ}√(2K).
fn needed_dim(params: &DerivedParams, n: usize) -> usize {
    let k = DIAG_COLUMNS as f64;
    let amplitude = params.beta.abs() * n as f64 + params.xi.abs().exp() * (2.0 * k).sqrt();
    gaussian_cutoff(amplitude, params.xi) + 2 * DIAG_COLUMNS
}

/// Cutoff for [`check_diagonalization`]: three photon levels when they fit
/// below a few thousand levels, two otherwise.
pub fn diagonalization_space(params: &DerivedParams) -> Result<FockSpace> {
    let three = needed_dim(params, 2);
    FockSpace::new(if three <= PREFERRED_DIM {
        three
    } else {
        needed_dim(params, 1)
    })
}

fn photon_levels(params: &DerivedParams, space: FockSpace) -> Result<usize> {
    if needed_dim(params, 2) <= space.dim() {
        Ok(3)
    } else if needed_dim(params, 1) <= space.dim() {
        Ok(2)
    } else {
        Err(Error::Truncation {
            context: format!(
                "diagonalization check needs cutoff {} for the n = 1 block",
                needed_dim(params, 1)
            ),
            dim: space.dim(),
            leakage: f64::NAN,
        })
    }
}

/// Coefficients read off H″_n = S(ξ)D(βn) H_n D†(βn)S†(ξ).
#[derive(Debug, Clone)]
struct Extracted {
    /// max over n, k of |⟨k|H″|k+2⟩| / √((k+1)(k+2)).
    pair: f64,
    /// max over n, k of |⟨k|H″|k+1⟩| / √(k+1).
    linear: f64,
    /// ⟨k+1|H″|k+1⟩ − ⟨k|H″|k⟩ farthest from Ω′_c.
    number: f64,
    /// ⟨0|H″_n|0⟩ per photon level.
    constants: Vec<f64>,
}

impl Extracted {
    fn kerr(&self, delta_c: f64) -> f64 {
        let e = &self.constants;
        if e.len() >= 3 {
            0.5 * (e[2] - 2.0 * e[1] + e[0])
        } else {
            e[1] - e[0] - delta_c
        }
    }
}

/// Low K×K corner of H″_n.
fn transformed_corner(
    params: &DerivedParams,
    n: usize,
    displacer: &Displacer,
    squeezer: Option<&Squeezer>,
) -> Result<Vec<Vec<Complex64>>> {
    let space = displacer.space();
    let h = block_hamiltonian(params, n, space).matrix;
    let xi = Complex64::new(params.xi, 0.0);
    let bn = Complex64::new(params.beta * n as f64, 0.0);
    (0..DIAG_COLUMNS)
        .into_par_iter()
        .map(|j| {
            let basis = FockState::number(space, j)?;
            let v = match squeezer {
                Some(sq) => sq.apply(-xi, &basis)?,
                None => basis,
            };
            let v = displacer.apply(-bn, &v)?;
            v.check_leakage(&format!("D†(βn)S†(ξ)|{j}⟩ for n = {n}"))?;
            let v = displacer.apply(bn, &h.apply(&v)?)?;
            let col = match squeezer {
                Some(sq) => sq.apply(xi, &v)?,
                None => v,
            };
            Ok(col.amplitudes()[..DIAG_COLUMNS].to_vec())
        })
        .collect()
}

fn extract(params: &DerivedParams, space: FockSpace, levels: usize) -> Result<Extracted> {
    let displacer = Displacer::new(space)?;
    let squeezer = if params.xi == 0.0 {
        None
    } else {
        Some(Squeezer::new(space)?)
    };
    let mut out = Extracted {
        pair: 0.0,
        linear: 0.0,
        number: params.omega_c_prime,
        constants: Vec::with_capacity(levels),
    };
    for n in 0..levels {
        // cols[j][k] = ⟨k|H″|j⟩
        let cols = transformed_corner(params, n, &displacer, squeezer.as_ref())?;
        for k in 0..DIAG_COLUMNS - 1 {
            let lin = cols[k + 1][k].norm() / ((k + 1) as f64).sqrt();
            out.linear = out.linear.max(lin);
            let spacing = cols[k + 1][k + 1].re - cols[k][k].re;
            if (spacing - params.omega_c_prime).abs() > (out.number - params.omega_c_prime).abs() {
                out.number = spacing;
            }
            if k + 2 < DIAG_COLUMNS {
                let pair = cols[k + 2][k].norm() / (((k + 1) * (k + 2)) as f64).sqrt();
                out.pair = out.pair.max(pair);
            }
        }
        out.constants.push(cols[0][0].re);
    }
    Ok(out)
}

/// Transforms each photon-number block of the two-mode Hamiltonian with
/// D(βa†a) and S(ξ) and reads the remaining coefficients off its low corner:
/// the c², c†² coefficient (zero when diagonal), the linear term, the c†c
/// coefficient (Ω′_c) and the (a†a)² Kerr coefficient −(Ω_c + ω_sw/2)β².
/// Each value is recomputed at twice the cutoff for the convergence delta.
pub fn check_diagonalization(params: &DerivedParams, space: FockSpace) -> Result<Vec<OracleReport>> {
    let levels = photon_levels(params, space)?;
    let (base, doubled) = rayon::join(
        || extract(params, space, levels),
        || extract(params, space.doubled(), levels),
    );
    let (base, doubled) = (base?, doubled?);
    let dim = space.dim();
    let scale = params.omega_c;
    Ok(vec![
        OracleReport::new(
            "pair_coefficient",
            0.0,
            base.pair,
            scale,
            dim,
            (base.pair - doubled.pair).abs(),
        ),
        OracleReport::new(
            "linear_coefficient",
            0.0,
            base.linear,
            scale,
            dim,
            (base.linear - doubled.linear).abs(),
        ),
        OracleReport::new(
            "number_coefficient",
            params.omega_c_prime,
            base.number,
            params.omega_c_prime,
            dim,
            (base.number - doubled.number).abs(),
        ),
        OracleReport::new(
            "kerr_coefficient",
            params.kerr_coefficient(),
            base.kerr(params.delta_c),
            scale,
            dim,
            (base.kerr(params.delta_c) - doubled.kerr(params.delta_c)).abs(),
        ),
    ])
}
