use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::params::DerivedParams;

/// Heisenberg-picture solution of one photon-number block started from the
/// Bogoliubov vacuum: c(t) = a c + b c† + offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFlow {
    pub a: Complex64,
    pub b: Complex64,
    pub offset: Complex64,
}

impl LinearFlow {
    /// (⟨c⟩, ⟨c²⟩, ⟨c†c⟩) in the evolved vacuum.
    pub fn vacuum_moments(&self) -> (Complex64, Complex64, f64) {
        let c = self.offset;
        (c, self.a * self.b + c * c, self.b.norm_sqr() + c.norm_sqr())
    }

    /// Squeezing r of the evolved vacuum, |b| = sinh r.
    pub fn squeeze(&self) -> f64 {
        self.b.norm().asinh()
    }
}

/// Numeric exponential of the linear equations of motion of H_n,
/// d/dt (c, c†, 1) = M (c, c†, 1), evaluated at t = τ/Ω′_c.
pub fn block_flow(params: &DerivedParams, n: usize, tau: f64) -> LinearFlow {
    let t = tau / params.omega_c_prime;
    let g = FRAC_1_SQRT_2 * params.zeta * n as f64;
    let w = params.omega_c;
    let h = 0.5 * params.omega_sw;
    let i = |x: f64| Complex64::new(0.0, x * t);
    let zero = Complex64::new(0.0, 0.0);
    #[rustfmt::skip]
    let m = Matrix3::new(
        i(-w), i(-h), i(-g),
        i(h),  i(w),  i(g),
        zero,  zero,  zero,
    );
    let e = m.exp();
    LinearFlow {
        a: e[(0, 0)],
        b: e[(0, 1)],
        offset: e[(0, 2)],
    }
}

/// Largest displacement and squeezing the block state reaches over one
/// period, sampled on a fine τ grid.
pub fn block_extent(params: &DerivedParams, n: usize) -> (f64, f64) {
    const SAMPLES: usize = 256;
    (0..=SAMPLES).fold((0.0_f64, 0.0_f64), |(amp, r), k| {
        let flow = block_flow(params, n, 2.0 * PI * k as f64 / SAMPLES as f64);
        (amp.max(flow.offset.norm()), r.max(flow.squeeze()))
    })
}
