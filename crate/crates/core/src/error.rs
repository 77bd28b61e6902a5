use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The effective coupling v = V sqrt(N_D N_A) vanishes, so the dressed
    /// eigenvectors of the two-level reduction are not defined.
    #[error("degenerate effective system: v = V*sqrt(N_D*N_A) must be nonzero")]
    DegenerateEffectiveSystem,

    #[error("spectral density evaluated at negative frequency {0}")]
    NegativeFrequency(f64),

    #[error("J(omega)/omega has no finite limit at omega -> 0")]
    DivergentLimit,

    /// A bath integral diverges logarithmically at omega -> 0 and no infrared
    /// cutoff was configured.
    #[error("infrared-divergent bath integral ({0}); set ir_cutoff to regularize")]
    InfraredDivergent(&'static str),

    #[error("negative propagation time {0}")]
    NegativeTime(f64),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid probability distribution: {0}")]
    DistributionInvalid(String),

    #[error("Hilbert space dimension {dim} exceeds the cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),
}
