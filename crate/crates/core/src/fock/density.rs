use faer::Mat;
use num_complex::Complex64;

use super::spectral::hermitian_eigenvalues;
use super::{FockOperator, FockSpace, FockState};
use crate::error::{Error, Result};

/// Hermitian, positive, unit-trace matrix over a truncated basis. For
/// product spaces the index of |a⟩⊗|b⟩ is `a * dim_b + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: Mat<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(space: FockSpace, matrix: Mat<Complex64>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(DensityMatrix { space, matrix })
    }

    pub fn pure(state: &FockState) -> Self {
        let mut rho = Self::zeros(state.space());
        rho.add_projector(1.0, state);
        rho
    }

    pub fn zeros(space: FockSpace) -> Self {
        DensityMatrix {
            space,
            matrix: Mat::zeros(space.dim(), space.dim()),
        }
    }

    /// ρ += w|ψ⟩⟨ψ|.
    pub fn add_projector(&mut self, weight: f64, state: &FockState) {
        let a = state.amplitudes();
        let n = self.space.dim().min(a.len());
        for j in 0..n {
            let cj = a[j].conj() * weight;
            if cj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (i, ai) in a[..n].iter().enumerate() {
                self.matrix[(i, j)] += ai * cj;
            }
        }
    }

    /// Σ w_k |ψ_k⟩⟨ψ_k|.
    pub fn mixture<'a>(space: FockSpace, terms: impl IntoIterator<Item = (f64, &'a FockState)>) -> Result<Self> {
        let mut rho = Self::zeros(space);
        for (w, psi) in terms {
            space.check(psi.space())?;
            rho.add_projector(w, psi);
        }
        Ok(rho)
    }

    /// ρ → factor·ρ.
    pub fn scale_in_place(&mut self, factor: f64) {
        let n = self.space.dim();
        for j in 0..n {
            for i in 0..n {
                self.matrix[(i, j)] *= factor;
            }
        }
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

    pub fn trace(&self) -> f64 {
        (0..self.space.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

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

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// tr(ρ²).
    pub fn purity(&self) -> f64 {
        let n = self.space.dim();
        let mut sum = 0.0;
        for j in 0..n {
            for i in 0..n {
                sum += self.matrix[(i, j)].norm_sqr();
            }
        }
        sum
    }

    /// tr(ρA).
    pub fn expectation(&self, op: &FockOperator) -> Result<Complex64> {
        self.space.check(op.space())?;
        let n = self.space.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                acc += self.matrix[(i, j)] * op.matrix()[(j, i)];
            }
        }
        Ok(acc)
    }

    /// ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.space.check(other.space)?;
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * hermitian_eigenvalues(&diff)?.iter().map(|l| l.abs()).sum::<f64>())
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn diagonal_element(&self, state: &FockState) -> Result<f64> {
        self.space.check(state.space())?;
        let a = state.amplitudes();
        let n = self.space.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for (i, ai) in a[..n].iter().enumerate() {
                row += ai.conj() * self.matrix[(i, j)];
            }
            acc += row * a[j];
        }
        Ok(acc.re)
    }

    /// Re-embed into another cutoff (pad or truncate).
    pub fn resized(&self, space: FockSpace) -> DensityMatrix {
        let keep = space.dim().min(self.space.dim());
        let mut matrix = Mat::zeros(space.dim(), space.dim());
        for j in 0..keep {
            for i in 0..keep {
                matrix[(i, j)] = self.matrix[(i, j)];
            }
        }
        DensityMatrix { space, matrix }
    }
}

/// tr_A ρ for ρ on A⊗B.
pub fn partial_trace_first(rho: &DensityMatrix, dim_a: usize, dim_b: usize) -> Result<DensityMatrix> {
    if dim_a * dim_b != rho.space.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.space.dim(),
            found: dim_a * dim_b,
        });
    }
    let space = FockSpace::new(dim_b)?;
    let mut out = Mat::zeros(dim_b, dim_b);
    for a in 0..dim_a {
        for j in 0..dim_b {
            for i in 0..dim_b {
                out[(i, j)] += rho.matrix[(a * dim_b + i, a * dim_b + j)];
            }
        }
    }
    Ok(DensityMatrix { space, matrix: out })
}
