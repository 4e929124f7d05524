use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rates must be positive (theta = {theta}, lambda = {lambda})")]
    NonPositiveRate { theta: f64, lambda: f64 },
    #[error("prior shape must be a positive integer, got {0}")]
    InvalidShape(f64),
    #[error("cost exponent p must be nonzero")]
    ZeroExponent,
    #[error("benefit gain must be positive, got {0}")]
    InvalidGain(f64),
    #[error("need at least two agents, got {0}")]
    TooFewAgents(u64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("profile has {got} entries, expected {expected}")]
    ProfileLengthMismatch { expected: usize, got: usize },
    #[error("profile mixes low and high threshold policies")]
    MixedKinds,
    #[error("policy kind does not match the sign of p ({0})")]
    KindMismatch(i32),
    #[error("operation requires {0}")]
    WrongSign(&'static str),
    #[error("sufficient-condition bound is degenerate (bracket = {0})")]
    DegenerateBound(f64),
    #[error("pure Nash enumeration limited to {max} agents, got {got}")]
    TooManyAgents { max: usize, got: usize },
    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("operation requires a finite number of agents")]
    InfiniteAgents,
    #[error("quadrature did not reach tolerance (estimate {estimate}, error {error})")]
    QuadratureFailure { estimate: f64, error: f64 },
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: u64, got: u64 },
    #[error("no solution: {0}")]
    NoSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
