//! Dense linear algebra over a truncated number basis |0⟩..|dim−1⟩.
//!
//! Conventions: D(β) = exp(βc† − β*c), S(ξ) = exp(½(ξ*c² − ξc†²)) and
//! |β, ξ⟩ = S(ξ)D(β)|0⟩. With ξ = re^{iθ}, S(ξ)cS†(ξ) = μc + νe^{iθ}c† where
//! μ = cosh r, ν = sinh r.

mod density;
mod spectral;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use density::{partial_trace_first, DensityMatrix};
pub use spectral::{matrix_exp_hermitian, FramedSpectrum, HermitianSpectrum};

/// Largest L2 norm tolerated in the top decile of a constructor's output.
pub const TRUNCATION_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cutoff rule: dim = ⌈m + 10√(m+1) + 20⌉ for a mean occupation m.
pub fn cutoff_for(mean_occupation: f64) -> usize {
    let m = mean_occupation.max(0.0);
    (m + 10.0 * (m + 1.0).sqrt() + 20.0).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Grid(format!("Fock cutoff must be at least 2, got {dim}")));
        }
        Ok(FockSpace { dim })
    }

    /// Space sized by [`cutoff_for`].
    pub fn for_occupation(mean_occupation: f64) -> Self {
        FockSpace {
            dim: cutoff_for(mean_occupation).max(2),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn doubled(&self) -> Self {
        FockSpace { dim: 2 * self.dim }
    }

    /// First index of the top 10% of levels (at least one level).
    pub fn top_decile_start(&self) -> usize {
        self.dim - (self.dim / 10).max(1)
    }

    pub(crate) fn check(&self, other: FockSpace) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    space: FockSpace,
    amplitudes: Vec<Complex64>,
}

impl FockState {
    pub fn new(space: FockSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(FockState { space, amplitudes })
    }

    pub fn number(space: FockSpace, n: usize) -> Result<Self> {
        if n >= space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: n + 1,
            });
        }
        let mut amplitudes = vec![ZERO; space.dim()];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(FockState { space, amplitudes })
    }

    pub fn vacuum(space: FockSpace) -> Self {
        Self::number(space, 0).expect("dim >= 2")
    }

    /// Coherent state e^{−|β|²/2} Σ βⁿ/√n! |n⟩, normalized on the retained
    /// levels.
    pub fn coherent(space: FockSpace, beta: Complex64) -> Result<Self> {
        let r = beta.norm();
        let phase = beta.arg();
        let mut amplitudes = Vec::with_capacity(space.dim());
        if r == 0.0 {
            return Ok(Self::vacuum(space));
        }
        // log space: e^{−r²/2} underflows long before the peak for large r
        let ln_r = r.ln();
        let mut ln_fact = 0.0;
        for n in 0..space.dim() {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            let ln_mag = -0.5 * r * r + n as f64 * ln_r - 0.5 * ln_fact;
            amplitudes.push(Complex64::from_polar(ln_mag.exp(), n as f64 * phase));
        }
        let state = FockState { space, amplitudes };
        state.check_leakage("coherent state")?;
        Ok(state.normalized())
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
        self
    }

    /// L2 norm carried by the top 10% of levels.
    pub fn leakage(&self) -> f64 {
        self.amplitudes[self.space.top_decile_start()..]
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn check_leakage(&self, context: &str) -> Result<()> {
        let leakage = self.leakage() / self.norm().max(f64::MIN_POSITIVE);
        if leakage > TRUNCATION_TOL {
            Err(Error::Truncation {
                context: context.to_string(),
                dim: self.space.dim(),
                leakage,
            })
        } else {
            Ok(())
        }
    }

    pub fn mean_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    /// Copy into another cutoff: zero-padded when growing, truncated when
    /// shrinking. The discarded norm is returned alongside.
    pub fn resized(&self, space: FockSpace) -> (FockState, f64) {
        let keep = space.dim().min(self.space.dim());
        let mut amplitudes = vec![ZERO; space.dim()];
        amplitudes[..keep].copy_from_slice(&self.amplitudes[..keep]);
        let dropped = self.amplitudes[keep..].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (FockState { space, amplitudes }, dropped)
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    matrix: Mat<Complex64>,
}

impl FockOperator {
    pub fn from_matrix(space: FockSpace, matrix: Mat<Complex64>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(FockOperator { space, matrix })
    }

    pub fn from_fn(space: FockSpace, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        FockOperator {
            space,
            matrix: Mat::from_fn(space.dim(), space.dim(), f),
        }
    }

    pub fn identity(space: FockSpace) -> Self {
        Self::from_fn(space, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { ZERO })
    }

    pub fn zeros(space: FockSpace) -> Self {
        Self::from_fn(space, |_, _| ZERO)
    }

    pub fn number(space: FockSpace) -> Self {
        Self::from_fn(space, |i, j| if i == j { Complex64::new(i as f64, 0.0) } else { ZERO })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        FockOperator {
            space: self.space,
            matrix: self.matrix.adjoint().to_owned(),
        }
    }

    pub fn mul(&self, rhs: &FockOperator) -> Result<FockOperator> {
        self.space.check(rhs.space)?;
        Ok(FockOperator {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn add(&self, rhs: &FockOperator) -> Result<FockOperator> {
        self.space.check(rhs.space)?;
        Ok(FockOperator {
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    pub fn sub(&self, rhs: &FockOperator) -> Result<FockOperator> {
        self.space.check(rhs.space)?;
        Ok(FockOperator {
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        })
    }

    pub fn scale(&self, factor: Complex64) -> FockOperator {
        let n = self.space.dim();
        FockOperator {
            space: self.space,
            matrix: Mat::from_fn(n, n, |i, j| self.matrix[(i, j)] * factor),
        }
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, rhs: &FockOperator) -> Result<FockOperator> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        self.space.check(state.space)?;
        let n = self.space.dim();
        let mut out = vec![ZERO; n];
        for j in 0..n {
            let a = state.amplitudes[j];
            if a == ZERO {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.matrix[(i, j)] * a;
            }
        }
        Ok(FockState {
            space: self.space,
            amplitudes: out,
        })
    }

    /// ⟨ψ|A|ψ⟩.
    pub fn expectation(&self, state: &FockState) -> Result<Complex64> {
        overlap(state, &self.apply(state)?)
    }

    /// max |A − A†|.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.space.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// max |U†U − I|.
    pub fn unitarity_residual(&self) -> f64 {
        let product = self.matrix.adjoint() * &self.matrix;
        let n = self.space.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((product[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Norm of U|0⟩ in the top decile of levels.
    pub fn leakage(&self) -> f64 {
        let start = self.space.top_decile_start();
        (start..self.space.dim())
            .map(|i| self.matrix[(i, 0)].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// max |A_ij − B_ij| over the leading `block` × `block` entries.
    pub fn max_abs_diff_block(&self, rhs: &FockOperator, block: usize) -> Result<f64> {
        self.space.check(rhs.space)?;
        let b = block.min(self.space.dim());
        let mut worst: f64 = 0.0;
        for j in 0..b {
            for i in 0..b {
                worst = worst.max((self.matrix[(i, j)] - rhs.matrix[(i, j)]).norm());
            }
        }
        Ok(worst)
    }

    pub fn max_abs_diff(&self, rhs: &FockOperator) -> Result<f64> {
        self.max_abs_diff_block(rhs, self.space.dim())
    }
}

/// Annihilation operator c, ⟨n−1|c|n⟩ = √n.
pub fn annihilation(space: FockSpace) -> FockOperator {
    FockOperator::from_fn(space, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

/// Creation operator c†, the conjugate transpose of [`annihilation`].
pub fn creation(space: FockSpace) -> FockOperator {
    annihilation(space).adjoint()
}

fn truncation_checked(op: FockOperator, context: &str) -> Result<FockOperator> {
    let leakage = op.leakage();
    if leakage > TRUNCATION_TOL {
        Err(Error::Truncation {
            context: context.to_string(),
            dim: op.space.dim(),
            leakage,
        })
    } else {
        Ok(op)
    }
}

/// Hermitian K with exp(βc† − β*c) = e^{−iK}.
pub fn displacement_generator(space: FockSpace, beta: Complex64) -> FockOperator {
    // K = i(βc† − β*c); only the first off-diagonals are populated
    FockOperator::from_fn(space, |i, j| {
        if i == j + 1 {
            I * beta * (i as f64).sqrt()
        } else if j == i + 1 {
            -I * beta.conj() * (j as f64).sqrt()
        } else {
            ZERO
        }
    })
}

/// Hermitian K with exp(½(ξ*c² − ξc†²)) = e^{−iK}.
pub fn squeeze_generator(space: FockSpace, xi: Complex64) -> FockOperator {
    FockOperator::from_fn(space, |i, j| {
        if j == i + 2 {
            // ⟨i|c²|i+2⟩ = √((i+1)(i+2))
            0.5 * I * xi.conj() * ((j as f64) * (j as f64 - 1.0)).sqrt()
        } else if i == j + 2 {
            -0.5 * I * xi * ((i as f64) * (i as f64 - 1.0)).sqrt()
        } else {
            ZERO
        }
    })
}

/// Applies D(β) to states of one space; the spectrum is shared by every β.
#[derive(Debug, Clone)]
pub struct Displacer(FramedSpectrum);

impl Displacer {
    pub fn new(space: FockSpace) -> Result<Self> {
        Ok(Displacer(FramedSpectrum::quadrature(space)?))
    }

    pub fn space(&self) -> FockSpace {
        self.0.space()
    }

    // D(β) = R T e^{−i|β|(c+c†)} T† R†, R = e^{i arg β c†c}, T = i^{c†c}
    fn frame(beta: Complex64) -> f64 {
        beta.arg() + FRAC_PI_2
    }

    pub fn apply(&self, beta: Complex64, state: &FockState) -> Result<FockState> {
        if beta == ZERO {
            self.space().check(state.space)?;
            return Ok(state.clone());
        }
        self.0.propagate(Self::frame(beta), beta.norm(), state)
    }

    pub fn operator(&self, beta: Complex64) -> FockOperator {
        if beta == ZERO {
            return FockOperator::identity(self.space());
        }
        self.0.operator(Self::frame(beta), beta.norm())
    }
}

/// Applies S(ξ) to states of one space.
#[derive(Debug, Clone)]
pub struct Squeezer(FramedSpectrum);

impl Squeezer {
    pub fn new(space: FockSpace) -> Result<Self> {
        Ok(Squeezer(FramedSpectrum::pair(space)?))
    }

    pub fn space(&self) -> FockSpace {
        self.0.space()
    }

    // S(re^{iθ}) = R T e^{ir(c²+c†²)/2} T† R†, R = e^{iθc†c/2}, T = e^{iπc†c/4}
    fn frame(xi: Complex64) -> f64 {
        0.5 * xi.arg() + FRAC_PI_4
    }

    pub fn apply(&self, xi: Complex64, state: &FockState) -> Result<FockState> {
        if xi == ZERO {
            self.space().check(state.space)?;
            return Ok(state.clone());
        }
        self.0.propagate(Self::frame(xi), xi.norm(), state)
    }

    pub fn operator(&self, xi: Complex64) -> FockOperator {
        if xi == ZERO {
            return FockOperator::identity(self.space());
        }
        self.0.operator(Self::frame(xi), xi.norm())
    }
}

/// D(β) = exp(βc† − β*c).
pub fn displacement(space: FockSpace, beta: Complex64) -> Result<FockOperator> {
    if beta == ZERO {
        return Ok(FockOperator::identity(space));
    }
    truncation_checked(Displacer::new(space)?.operator(beta), "displacement")
}

/// S(ξ) = exp(½(ξ*c² − ξc†²)).
pub fn squeeze(space: FockSpace, xi: Complex64) -> Result<FockOperator> {
    if xi == ZERO {
        return Ok(FockOperator::identity(space));
    }
    truncation_checked(Squeezer::new(space)?.operator(xi), "squeeze")
}

/// Cutoff for a Gaussian pure state with displacement amplitude at most
/// `amplitude` and squeezing at most `r`: the cutoff rule on its mean
/// occupation with the spread widened by e^{r}, plus room for the geometric
/// tanh r tail of the squeezed vacuum. The result is stretched by 1/0.9 so the
/// whole top decile, where leakage is measured, lies past that margin even
/// when the occupation is in the thousands.
pub fn gaussian_cutoff(amplitude: f64, r: f64) -> usize {
    let r = r.abs();
    let m = amplitude * amplitude + r.sinh().powi(2);
    let mut dim = m + 10.0 * r.exp() * (m + 1.0).sqrt() + 20.0;
    if r > 0.0 {
        dim += 60.0 / -r.tanh().ln();
    }
    (dim / 0.9).ceil() as usize
}

/// [`gaussian_cutoff`] for |β, ξ⟩ = D(μβ − νe^{iθ}β*)S(ξ)|0⟩.
pub fn squeezed_cutoff(beta: Complex64, xi: Complex64) -> usize {
    let r = xi.norm();
    let gamma = r.cosh() * beta - Complex64::from_polar(r.sinh(), xi.arg()) * beta.conj();
    gaussian_cutoff(gamma.norm(), r)
}

/// |β, ξ⟩ = S(ξ)D(β)|0⟩.
///
/// Amplitudes follow from the eigenvalue relation (μc + νe^{iθ}c†)|β,ξ⟩ =
/// β|β,ξ⟩ as a two-term recurrence seeded by ⟨0|β,ξ⟩ =
/// μ^{−1/2} exp(−|β|²/2 + e^{−iθ} tanh r β²/2), carried with a running log
/// scale so large |β| does not underflow.
pub fn squeezed_coherent(space: FockSpace, beta: Complex64, xi: Complex64) -> Result<FockState> {
    let r = xi.norm();
    let theta = xi.arg();
    let mu = r.cosh();
    let kappa = Complex64::from_polar(r.sinh(), theta);
    let ln0 = Complex64::new(-0.5 * beta.norm_sqr() - 0.5 * mu.ln(), 0.0)
        + 0.5 * Complex64::from_polar(r.tanh(), -theta) * beta * beta;
    let mut log_scale = ln0.re;
    let mut prev = ZERO;
    let mut cur = Complex64::from_polar(1.0, ln0.im);
    let mut amplitudes = Vec::with_capacity(space.dim());
    amplitudes.push(cur * log_scale.exp());
    for k in 0..space.dim() - 1 {
        let kf = k as f64;
        let mut next = (beta * cur - kappa * kf.sqrt() * prev) / (mu * (kf + 1.0).sqrt());
        let size = next.norm().max(cur.norm());
        if size > 1e100 || (size > 0.0 && size < 1e-100) {
            prev = cur / size;
            next /= size;
            log_scale += size.ln();
        } else {
            prev = cur;
        }
        cur = next;
        amplitudes.push(cur * log_scale.exp());
    }
    let state = FockState { space, amplitudes };
    state.check_leakage("squeezed coherent state")?;
    Ok(state.normalized())
}

/// e^{−iωt c†c}|ψ⟩.
pub fn evolve_free(state: &FockState, omega_t: f64) -> FockState {
    let amplitudes = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(n, a)| a * Complex64::from_polar(1.0, -(n as f64) * omega_t))
        .collect();
    FockState {
        space: state.space,
        amplitudes,
    }
}

/// ⟨a|b⟩, conjugate-linear in `a`.
pub fn overlap(a: &FockState, b: &FockState) -> Result<Complex64> {
    a.space.check(b.space)?;
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum())
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &FockState, b: &FockState) -> Result<f64> {
    Ok(overlap(a, b)?.norm_sqr())
}

#[cfg(test)]
mod tests;
