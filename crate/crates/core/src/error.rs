use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {d} exceeds the cap of {cap} for this operation")]
    DimensionCap { d: usize, cap: usize },

    #[error("operation requires an odd dimension, got d = {0}")]
    EvenDimension(usize),

    #[error("theta must lie strictly inside (0, pi/2), got {0}")]
    ThetaOutOfRange(f64),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("index ({alpha}, {beta}) outside [0, {d})")]
    IndexOutOfRange { alpha: usize, beta: usize, d: usize },

    #[error("jacobi iteration did not converge after {0} sweeps")]
    JacobiNoConvergence(usize),

    #[error("power iteration did not converge after {0} iterations")]
    PowerNoConvergence(usize),

    #[error("top eigenvector component {index} = {value:e} violates Perron positivity")]
    PerronViolation { index: usize, value: f64 },

    #[error("eigen-equation residual {0:e} exceeds tolerance")]
    ResidualTooLarge(f64),

    #[error("top eigenvalue is degenerate (gap {0:e})")]
    DegenerateTop(f64),

    #[error("Fourier coefficient f[{m},{n}] has modulus {modulus:e}, inversion is singular")]
    SingularCoefficient { m: usize, n: usize, modulus: f64 },

    #[error("phase point family is not translationally covariant (spread {0:e})")]
    NonCovariant(f64),

    #[error("state has tail mass {0:e} outside the central half of the lattice")]
    BoundaryTail(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
