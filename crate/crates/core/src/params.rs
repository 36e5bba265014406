//! Laboratory inputs and the effective model parameters derived from them.
//!
//! Internally ħ = 1 and every frequency is expressed in units of the recoil
//! frequency ω_R. Only [`DerivedParams::omega_r`] carries SI units (rad/s).

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of ⁸⁷Rb, kg.
pub const RB87_MASS: f64 = 86.909_180_527 * ATOMIC_MASS_UNIT;

/// Upper bound on U₀⟨a†a⟩ in units of ω_R for the weakly interacting regime.
pub const WEAK_COUPLING_BOUND: f64 = 10.0;

/// Raw laboratory inputs. Field names double as the keys of the JSON config
/// file; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    /// Number of condensed atoms N.
    pub n_atoms: u64,
    /// Cavity length L, m.
    pub cavity_length: f64,
    /// Pump wavelength λ, m (k = 2π/λ).
    pub pump_wavelength: f64,
    /// Atomic mass m₀, kg.
    pub atom_mass: f64,
    /// Vacuum Rabi frequency g₀, rad/s.
    pub vacuum_rabi: f64,
    /// Pump-atom detuning Δ_a, rad/s.
    pub atom_detuning: f64,
    /// s-wave scattering length a_s, m.
    pub scattering_length: f64,
    /// Waist of the optical potential w, m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waist: Option<f64>,
    /// Direct override of ω_sw/ω_R.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_sw_over_omega_r: Option<f64>,
    /// Cavity-pump detuning Δ_c, rad/s.
    #[serde(default)]
    pub cavity_detuning: f64,
    /// Mean intracavity photon number |α|².
    pub alpha_sq: f64,
}

impl PhysicalConfig {
    /// ⁸⁷Rb in a 178 µm cavity driven at 780 nm, g₀ = 2π×14.1 MHz,
    /// Δ_a = 2π×58 GHz, a_s = 5 nm, N = 10⁵, |α|² = 0.01, with ω_sw given
    /// directly in ω_R units.
    pub fn reference(omega_sw_over_omega_r: f64) -> Self {
        PhysicalConfig {
            n_atoms: 100_000,
            cavity_length: 178e-6,
            pump_wavelength: 780e-9,
            atom_mass: RB87_MASS,
            vacuum_rabi: 2.0 * PI * 14.1e6,
            atom_detuning: 2.0 * PI * 58e9,
            scattering_length: 5e-9,
            waist: None,
            omega_sw_over_omega_r: Some(omega_sw_over_omega_r),
            cavity_detuning: 0.0,
            alpha_sq: 0.01,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: PhysicalConfig =
            serde_json::from_str(text).map_err(|e| Error::config(json_field(&e), e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return Err(Error::config("n_atoms", "must be at least 1"));
        }
        for (name, value) in [
            ("cavity_length", self.cavity_length),
            ("pump_wavelength", self.pump_wavelength),
            ("atom_mass", self.atom_mass),
            ("scattering_length", self.scattering_length),
        ] {
            positive(name, value)?;
        }
        finite("vacuum_rabi", self.vacuum_rabi)?;
        finite("cavity_detuning", self.cavity_detuning)?;
        finite("atom_detuning", self.atom_detuning)?;
        if self.atom_detuning == 0.0 {
            return Err(Error::config(
                "atom_detuning",
                "must be nonzero in the dispersive regime",
            ));
        }
        finite("alpha_sq", self.alpha_sq)?;
        if self.alpha_sq < 0.0 {
            return Err(Error::config("alpha_sq", "must be nonnegative"));
        }
        match (self.waist, self.omega_sw_over_omega_r) {
            (None, None) => Err(Error::config(
                "waist, omega_sw_over_omega_r",
                "exactly one of `waist` or `omega_sw_over_omega_r` must be given; found neither",
            )),
            (Some(_), Some(_)) => Err(Error::config(
                "waist, omega_sw_over_omega_r",
                "exactly one of `waist` or `omega_sw_over_omega_r` must be given; found both",
            )),
            (Some(w), None) => positive("waist", w),
            (None, Some(r)) => finite("omega_sw_over_omega_r", r),
        }
    }

    /// Recoil angular frequency ħk²/2m₀, rad/s.
    pub fn recoil_frequency(&self) -> f64 {
        let k = 2.0 * PI / self.pump_wavelength;
        HBAR * k * k / (2.0 * self.atom_mass)
    }

    /// ω_sw/ω_R, either the override or 8πħa_sN/(m₀Lw²) divided by ω_R.
    pub fn omega_sw_ratio(&self) -> Result<f64> {
        match (self.omega_sw_over_omega_r, self.waist) {
            (Some(r), None) => Ok(r),
            (None, Some(w)) => {
                let omega_sw = 8.0 * PI * HBAR * self.scattering_length * self.n_atoms as f64
                    / (self.atom_mass * self.cavity_length * w * w);
                Ok(omega_sw / self.recoil_frequency())
            }
            _ => Err(Error::config(
                "waist, omega_sw_over_omega_r",
                "exactly one of `waist` or `omega_sw_over_omega_r` must be given",
            )),
        }
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(name, format!("must be finite and > 0, got {value}")))
    }
}

fn finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::config(name, format!("must be finite, got {value}")))
    }
}

// serde_json reports unknown/missing fields inside the message text only.
fn json_field(err: &serde_json::Error) -> String {
    let msg = err.to_string();
    for marker in ["unknown field `", "missing field `", "duplicate field `"] {
        if let Some(start) = msg.find(marker) {
            let rest = &msg[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    "config".to_string()
}

/// Effective model quantities. Everything except `omega_r` is in ω_R units
/// (frequencies) or dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Recoil angular frequency, rad/s.
    pub omega_r: f64,
    /// Lattice depth per photon U₀ = g₀²/Δ_a.
    pub u0: f64,
    /// s-wave scattering frequency ω_sw.
    pub omega_sw: f64,
    /// Optomechanical coupling ζ = ½√N U₀.
    pub zeta: f64,
    /// Effective cavity detuning δ_c = −Δ_c + ½NU₀.
    pub delta_c: f64,
    /// Bare Bogoliubov frequency Ω_c = 4 + ω_sw.
    pub omega_c: f64,
    /// Photon-number-proportional displacement β = (√2/2) ζ / (Ω_c + ω_sw/2).
    pub beta: f64,
    /// Effective Bogoliubov frequency Ω′_c = √((4 + ω_sw/2)(4 + 3ω_sw/2)).
    pub omega_c_prime: f64,
    /// cosh ξ.
    pub mu: f64,
    /// sinh ξ, on the nonnegative root.
    pub nu: f64,
    /// Squeezing parameter ξ ≥ 0.
    pub xi: f64,
}

/// Evaluate every derived quantity for a validated configuration.
pub fn derive(config: &PhysicalConfig) -> Result<DerivedParams> {
    config.validate()?;
    let omega_r = config.recoil_frequency();
    let n = config.n_atoms as f64;
    let u0 = config.vacuum_rabi * config.vacuum_rabi / config.atom_detuning / omega_r;
    let omega_sw = config.omega_sw_ratio()?;
    let zeta = 0.5 * n.sqrt() * u0;
    let delta_c = -config.cavity_detuning / omega_r + 0.5 * n * u0;
    from_reduced(omega_r, u0, omega_sw, zeta, delta_c)
}

/// Build [`DerivedParams`] directly from reduced (ω_R-unit) inputs. Used by
/// tests and the oracle's micro configurations where the laboratory chain is
/// irrelevant.
pub fn from_reduced(omega_r: f64, u0: f64, omega_sw: f64, zeta: f64, delta_c: f64) -> Result<DerivedParams> {
    let omega_c = 4.0 + omega_sw;
    let lower = 4.0 + 0.5 * omega_sw;
    let upper = 4.0 + 1.5 * omega_sw;
    // Both factors must be positive: a product of two negatives would pass a
    // bare Ω′_c² > 0 test but leaves Ω_c < 0.
    if !(lower > 0.0 && upper > 0.0) || !omega_sw.is_finite() {
        return Err(Error::UnstableFrequency {
            omega_sw,
            omega_c_prime_sq: lower * upper,
        });
    }
    let omega_c_prime = (lower * upper).sqrt();
    let ratio = omega_c / omega_c_prime;
    let mu = ((ratio + 1.0) / 2.0).sqrt();
    let nu = ((ratio - 1.0).max(0.0) / 2.0).sqrt();
    // asinh is well conditioned near ξ = 0 where acosh is not.
    let xi = nu.asinh();
    let beta = std::f64::consts::FRAC_1_SQRT_2 * zeta / (omega_c + 0.5 * omega_sw);
    Ok(DerivedParams {
        omega_r,
        u0,
        omega_sw,
        zeta,
        delta_c,
        omega_c,
        beta,
        omega_c_prime,
        mu,
        nu,
        xi,
    })
}

impl DerivedParams {
    /// Coefficient of (c² + c†²) left after transforming the displaced
    /// Hamiltonian with c → μc + νc†: Ω_c μν + ¼ω_sw(μ² + ν²).
    ///
    /// Diagonalization requires this to vanish. On the nonnegative ν root it
    /// equals ω_sw Ω_c / (2Ω′_c), so it is zero only for ω_sw = 0.
    pub fn pair_coefficient(&self) -> f64 {
        self.omega_c * self.mu * self.nu + 0.25 * self.omega_sw * (self.mu * self.mu + self.nu * self.nu)
    }

    /// Coefficient of c†c after the same transformation:
    /// Ω_c(μ² + ν²) + ω_sw μν.
    pub fn number_coefficient(&self) -> f64 {
        self.omega_c * (self.mu * self.mu + self.nu * self.nu) + self.omega_sw * self.mu * self.nu
    }

    /// Coefficient of (a†a)² generated by the photon-number-dependent
    /// displacement: −(Ω_c + ω_sw/2)β².
    pub fn kerr_coefficient(&self) -> f64 {
        -(self.omega_c + 0.5 * self.omega_sw) * self.beta * self.beta
    }

    /// The same parameters with ν → −ν and ξ → −ξ, i.e. the other sign root
    /// of μ² − ν² = 1 with μν < 0. Only used to diagnose discrepancies; the
    /// closed forms are always evaluated on the nonnegative root.
    pub fn negative_root(&self) -> DerivedParams {
        DerivedParams {
            nu: -self.nu,
            xi: -self.xi,
            ..*self
        }
    }

    /// Copy with a different δ_c; every implemented observable must be
    /// independent of it.
    pub fn with_delta_c(&self, delta_c: f64) -> DerivedParams {
        DerivedParams { delta_c, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakCouplingReport {
    /// U₀|α|² in units of ω_R.
    pub ratio: f64,
    pub bound: f64,
    pub weak: bool,
}

/// Is U₀⟨a†a⟩ ≤ 10ω_R?
pub fn weak_coupling_check(params: &DerivedParams, alpha_sq: f64) -> WeakCouplingReport {
    let ratio = params.u0 * alpha_sq;
    WeakCouplingReport {
        ratio,
        bound: WEAK_COUPLING_BOUND,
        weak: ratio <= WEAK_COUPLING_BOUND,
    }
}
