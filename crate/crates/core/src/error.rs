use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or incomplete physical configuration. `field` names the
    /// offending key(s).
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// Ω′_c² is not strictly positive for the requested ω_sw.
    #[error("unstable effective frequency: Ω′_c² = {omega_c_prime_sq} for ω_sw = {omega_sw} ω_R")]
    UnstableFrequency { omega_sw: f64, omega_c_prime_sq: f64 },

    /// The number-basis cutoff cannot hold the requested state or operator.
    #[error("truncation: {context}: leaked norm {leakage:.3e} at dim {dim}")]
    Truncation { context: String, dim: usize, leakage: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |H - H†| = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
