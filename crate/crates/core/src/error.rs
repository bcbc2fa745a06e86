use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("element is a zero divisor (null for the split form)")]
    ZeroDivisor,
    #[error("operation needs a finite radius ratio")]
    InfiniteRho,
    #[error("rolling integration drifted off the distribution (residual {0:.3e})")]
    NonHorizontalDrift(f64),
    #[error("point is not on the null cone of the imaginary split-octonions")]
    DegenerateCone,
    #[error("covector reached the locus where the characteristic direction is undefined")]
    LeavesRegularLocus,
    #[error("transport is singular or ill conditioned")]
    TransportSingular,
    #[error("Jacobi frames at {t} and {tau} are not transverse")]
    FramesNotTransverse { t: f64, tau: f64 },
    #[error("fundamental form vanishes; no normal parameter exists")]
    FormVanishes,
    #[error("reparameterization has vanishing derivative")]
    DomainError,
    #[error("sample points are degenerate")]
    DegenerateSamples,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("time {0} lies outside the integrated extremal")]
    OutOfRange(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
