use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot normalize a zero vector (norm {0:e})")]
    ZeroVector(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid bipartition {d_a}x{d_b}")]
    InvalidBipartition { d_a: usize, d_b: usize },

    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("spectrum has a negative eigenvalue {0:e}")]
    InvalidSpectrum(f64),

    #[error("point {coord} = {value} (with stencil step {step:e}) leaves the chart domain")]
    OutOfDomain { coord: usize, value: f64, step: f64 },

    #[error("metric is singular (condition number {0:e})")]
    SingularMetric(f64),

    #[error("gradient vanishes: squared norm {0:e} at a critical point")]
    VanishingGradient(f64),

    #[error("closed form is singular at theta = {0}")]
    Singular(f64),

    #[error("value {value} outside the admissible range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("all samples are equal ({0}); no density can be estimated")]
    DegenerateSamples(f64),

    #[error("no samples")]
    EmptyInput,

    #[error("need at least 3 nonempty bins, got {0}")]
    TooFewBins(usize),

    #[error("{qubits} qubits exceeds the desk-scale cap of {cap}")]
    TooLarge { qubits: usize, cap: usize },

    #[error("invalid binning: {0}")]
    InvalidBinning(String),
}

impl Error {
    /// Failures that come from the geometry itself (critical points, degenerate
    /// data, singular closed forms) rather than from bad arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroVector(_)
                | Error::NotHermitian(_)
                | Error::InvalidSpectrum(_)
                | Error::SingularMetric(_)
                | Error::VanishingGradient(_)
                | Error::Singular(_)
                | Error::DegenerateSamples(_)
                | Error::TooFewBins(_)
        )
    }
}
