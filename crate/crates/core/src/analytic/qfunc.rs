use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Poisson, POISSON_TAIL_TOL, Q_CROSS_TOL};
use crate::error::{Error, Result};
use crate::fock::{overlap, squeezed_coherent, squeezed_cutoff, FockSpace, FockState};
use crate::params::DerivedParams;

/// Evenly spaced samples `min..=max`; one step means the single point `min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        let axis = Axis { min, max, steps };
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::Grid(format!("axis bounds must be finite: {axis}")));
        }
        match steps {
            0 => Err(Error::Grid(format!("axis needs at least one step: {axis}"))),
            1 if min != max => Err(Error::Grid(format!("a one-point axis needs min == max: {axis}"))),
            1 => Ok(axis),
            _ if min >= max => Err(Error::Grid(format!("axis needs min < max: {axis}"))),
            _ => Ok(axis),
        }
    }

    pub fn spacing(&self) -> f64 {
        if self.steps < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.steps - 1) as f64
        }
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            self.max
        } else {
            self.min + k as f64 * self.spacing()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.steps)
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Grid(format!("expected min:max:steps, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].trim().parse().map_err(|_| bad())?;
        let max = parts[1].trim().parse().map_err(|_| bad())?;
        let steps = parts[2].trim().parse().map_err(|_| bad())?;
        Axis::new(min, max, steps)
    }
}

/// Rectangular grid over γ = γ_R + iγ_I.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re: Axis,
    pub im: Axis,
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.re.steps * self.im.steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major: γ_R is the slow index.
    pub fn gamma(&self, index: usize) -> Complex64 {
        let (i, j) = (index / self.im.steps, index % self.im.steps);
        Complex64::new(self.re.value(i), self.im.value(j))
    }

    /// Largest |γ| on the grid.
    pub fn radius(&self) -> f64 {
        self.re.max_abs().hypot(self.im.max_abs())
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.re, self.im)
    }
}

/// `min:max:steps` for both axes, or `re,im` with one spec per axis.
impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.split(',');
        let re: Axis = it.next().unwrap_or_default().parse()?;
        let im = match it.next() {
            Some(part) => part.parse()?,
            None => re,
        };
        if it.next().is_some() {
            return Err(Error::Grid(format!("at most two axis specs allowed, got `{s}`")));
        }
        Ok(GridSpec { re, im })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub grid: GridSpec,
    pub tau: f64,
    /// Row-major values, see [`GridSpec::gamma`].
    pub values: Vec<f64>,
    /// max |numeric − closed form| when τ is 0 or π/2.
    pub closed_form_residual: Option<f64>,
    pub discrepancy: bool,
}

impl QGrid {
    pub fn value(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[i_re * self.grid.im.steps + i_im]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Σ Q ΔγR ΔγI.
    pub fn riemann_sum(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.re.spacing() * self.grid.im.spacing()
    }

    /// Q-weighted variances (along γ_R, along γ_I).
    pub fn second_moments(&self) -> (f64, f64) {
        let mut w = 0.0;
        let (mut mr, mut mi) = (0.0, 0.0);
        for (k, q) in self.values.iter().enumerate() {
            let g = self.grid.gamma(k);
            w += q;
            mr += q * g.re;
            mi += q * g.im;
        }
        let (mr, mi) = (mr / w, mi / w);
        let (mut vr, mut vi) = (0.0, 0.0);
        for (k, q) in self.values.iter().enumerate() {
            let g = self.grid.gamma(k);
            vr += q * (g.re - mr).powi(2);
            vi += q * (g.im - mi).powi(2);
        }
        (vr / w, vi / w)
    }
}

/// Q(γ, 0) = e^{−|γ|²}/π.
pub fn q_closed_initial(gamma: Complex64) -> f64 {
    (-gamma.norm_sqr()).exp() / PI
}

/// Q(γ, π/2) from the printed closed form with μ′ = cosh 2ξ, ν′ = sinh 2ξ,
/// summed over the same truncated photon distribution as the numeric route.
pub fn q_closed_half_pi(params: &DerivedParams, poisson: &Poisson, gamma: Complex64) -> f64 {
    let (mu2, nu2) = ((2.0 * params.xi).cosh(), (2.0 * params.xi).sinh());
    let t = nu2 / mu2;
    let (gr, gi) = (gamma.re, gamma.im);
    let common = (t - 1.0) * gr * gr - (t + 1.0) * gi * gi;
    let sum: f64 = poisson
        .weights
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let bn = params.beta * n as f64;
            let e = 2.0 * bn * (t - 1.0) * gr - 2.0 * bn / mu2 * gi + 2.0 * (t - 1.0) * bn * bn;
            p * (common + e).exp()
        })
        .sum();
    sum / (PI * mu2)
}

/// Q(γ, τ) = (1/π) Σ_n P_n |⟨βn + γ, ξ | βne^{−iτ}, ξe^{−2iτ}⟩|², with every
/// overlap taken numerically between number-basis vectors. At τ = 0 and
/// τ = π/2 the printed closed forms are evaluated as a second route.
pub fn q_function(params: &DerivedParams, alpha_sq: f64, tau: f64, grid: GridSpec) -> Result<QGrid> {
    let poisson = Poisson::truncated(alpha_sq, POISSON_TAIL_TOL);
    let xi = Complex64::new(params.xi, 0.0);
    let xi_t = xi * Complex64::from_polar(1.0, -2.0 * tau);
    let radius = grid.radius();
    let blocks: Vec<(f64, Complex64, FockState)> = poisson
        .weights
        .iter()
        .enumerate()
        .map(|(n, &p)| {
            let bn = params.beta * n as f64;
            let target = Complex64::from_polar(bn, -tau);
            // the left vectors |βn + γ, ξ⟩ span the disc of radius βn + |γ|
            let worst_left = squeezed_cutoff(Complex64::new(0.0, bn.abs() + radius), xi)
                .max(squeezed_cutoff(Complex64::new(bn.abs() + radius, 0.0), xi));
            let dim = worst_left.max(squeezed_cutoff(target, xi_t));
            let space = FockSpace::new(dim)?;
            Ok((p, Complex64::new(bn, 0.0), squeezed_coherent(space, target, xi_t)?))
        })
        .collect::<Result<_>>()?;

    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let gamma = grid.gamma(k);
            let mut q = 0.0;
            for (p, bn, s) in &blocks {
                let left = squeezed_coherent(s.space(), bn + gamma, xi)?;
                q += p * overlap(&left, s)?.norm_sqr();
            }
            Ok(q / PI)
        })
        .collect::<Result<Vec<f64>>>()?;

    let closed: Option<Box<dyn Fn(Complex64) -> f64 + Sync>> = if tau == 0.0 {
        Some(Box::new(q_closed_initial))
    } else if (tau - FRAC_PI_2).abs() <= 1e-12 {
        Some(Box::new(|g| q_closed_half_pi(params, &poisson, g)))
    } else {
        None
    };
    let closed_form_residual = closed.map(|f| {
        values
            .iter()
            .enumerate()
            .map(|(k, q)| (q - f(grid.gamma(k))).abs())
            .fold(0.0, f64::max)
    });
    Ok(QGrid {
        grid,
        tau,
        values,
        closed_form_residual,
        discrepancy: closed_form_residual.is_some_and(|r| r.is_nan() || r > Q_CROSS_TOL),
    })
}
