use faer::{Mat, Side};
use num_complex::Complex64;

use super::{FockOperator, FockSpace, FockState};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance accepted by the spectral routines.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigendecomposition H = V diag(λ) V† of a Hermitian operator, reusable for
/// any number of exponentials e^{−iHt}.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    space: FockSpace,
    values: Vec<f64>,
    vectors: Mat<Complex64>,
}

impl HermitianSpectrum {
    pub fn new(h: &FockOperator) -> Result<Self> {
        let residual = h.hermiticity_residual();
        let scale = h.matrix.norm_max().max(1.0);
        if residual > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { residual });
        }
        let n = h.space.dim();
        let real = (0..n).all(|j| (0..n).all(|i| h.matrix[(i, j)].im == 0.0));
        let (values, vectors) = if real {
            // real symmetric input: the f64 solver is several times faster
            let m = Mat::<f64>::from_fn(n, n, |i, j| h.matrix[(i, j)].re);
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
            let values = (0..n).map(|k| evd.S().column_vector()[k]).collect();
            let u = evd.U();
            let vectors = Mat::from_fn(n, n, |i, j| Complex64::new(u[(i, j)], 0.0));
            (values, vectors)
        } else {
            let evd = h.matrix.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
            let values = (0..n).map(|k| evd.S().column_vector()[k].re).collect();
            (values, evd.U().to_owned())
        };
        Ok(HermitianSpectrum {
            space: h.space,
            values,
            vectors,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// Eigenvalues in nondecreasing order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// e^{−iHt} as a dense operator.
    pub fn unitary(&self, t: f64) -> FockOperator {
        let n = self.space.dim();
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t))
            .collect();
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * phases[j]);
        let matrix = &scaled * self.vectors.adjoint();
        FockOperator {
            space: self.space,
            matrix,
        }
    }

    /// e^{−iHt}|ψ⟩ without forming the unitary.
    pub fn evolve(&self, state: &FockState, t: f64) -> Result<FockState> {
        state.space.check(self.space)?;
        let n = self.space.dim();
        let v = &self.vectors;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                acc += v[(i, k)].conj() * state.amplitudes[i];
            }
            *c = acc * Complex64::from_polar(1.0, -self.values[k] * t);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += v[(i, k)] * c;
            }
        }
        Ok(FockState {
            space: self.space,
            amplitudes: out,
        })
    }
}

/// Spectrum of a real symmetric X used in a diagonal phase frame
/// F = diag(e^{ikφ}): e^{−isK}|ψ⟩ for K = F X F†. Displacements and squeezes
/// along any direction reduce to this form with X = c + c† or −½(c² + c†²).
#[derive(Debug, Clone)]
pub struct FramedSpectrum {
    space: FockSpace,
    values: Vec<f64>,
    vectors: Mat<f64>,
}

impl FramedSpectrum {
    pub fn new(space: FockSpace, x: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = space.dim();
        let m = Mat::<f64>::from_fn(n, n, x);
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
        let values = (0..n).map(|k| evd.S().column_vector()[k]).collect();
        Ok(FramedSpectrum {
            space,
            values,
            vectors: evd.U().to_owned(),
        })
    }

    /// X = c + c†.
    pub fn quadrature(space: FockSpace) -> Result<Self> {
        Self::new(space, |i, j| {
            if j == i + 1 {
                (j as f64).sqrt()
            } else if i == j + 1 {
                (i as f64).sqrt()
            } else {
                0.0
            }
        })
    }

    /// X = −½(c² + c†²). It only couples levels of equal parity, so the even
    /// and odd sublattices are diagonalized separately.
    pub fn pair(space: FockSpace) -> Result<Self> {
        let n = space.dim();
        let x = |i: usize, j: usize| {
            let (lo, hi) = (i.min(j), i.max(j));
            if hi == lo + 2 {
                -0.5 * ((hi as f64) * (hi as f64 - 1.0)).sqrt()
            } else {
                0.0
            }
        };
        let mut values = Vec::with_capacity(n);
        let mut vectors = Mat::<f64>::zeros(n, n);
        for parity in 0..2 {
            let m = (n - parity).div_ceil(2);
            let sub = Mat::<f64>::from_fn(m, m, |a, b| x(2 * a + parity, 2 * b + parity));
            let evd = sub.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
            let u = evd.U();
            for k in 0..m {
                let col = values.len();
                values.push(evd.S().column_vector()[k]);
                for a in 0..m {
                    vectors[(2 * a + parity, col)] = u[(a, k)];
                }
            }
        }
        Ok(FramedSpectrum { space, values, vectors })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// F e^{−isX} F†|ψ⟩ with F = diag(e^{ikφ}).
    pub fn propagate(&self, frame: f64, s: f64, state: &FockState) -> Result<FockState> {
        state.space.check(self.space)?;
        let n = self.space.dim();
        let v = &self.vectors;
        let rotated: Vec<Complex64> = state
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a * Complex64::from_polar(1.0, -(k as f64) * frame))
            .collect();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, r) in rotated.iter().enumerate() {
                acc += r * v[(i, k)];
            }
            *c = acc * Complex64::from_polar(1.0, -self.values[k] * s);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += c * v[(i, k)];
            }
        }
        for (k, o) in out.iter_mut().enumerate() {
            *o *= Complex64::from_polar(1.0, k as f64 * frame);
        }
        Ok(FockState {
            space: self.space,
            amplitudes: out,
        })
    }

    /// F e^{−isX} F† as a dense operator.
    pub fn operator(&self, frame: f64, s: f64) -> FockOperator {
        let n = self.space.dim();
        let v = &self.vectors;
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * s))
            .collect();
        let left = Mat::<Complex64>::from_fn(n, n, |i, k| {
            Complex64::from_polar(v[(i, k)], i as f64 * frame) * phases[k]
        });
        let right = Mat::<Complex64>::from_fn(n, n, |k, j| Complex64::from_polar(v[(j, k)], -(j as f64) * frame));
        FockOperator {
            space: self.space,
            matrix: &left * &right,
        }
    }
}

/// e^{−iHt} for Hermitian H, by spectral decomposition.
pub fn matrix_exp_hermitian(h: &FockOperator, t: f64) -> Result<FockOperator> {
    Ok(HermitianSpectrum::new(h)?.unitary(t))
}

/// Eigenvalues of a Hermitian matrix, nondecreasing.
pub(crate) fn hermitian_eigenvalues(m: &Mat<Complex64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigen)
}
