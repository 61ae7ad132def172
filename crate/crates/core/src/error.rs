use thiserror::Error;

/// Errors shared by every layer of the calculus.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("floor mismatch: -{0} vs -{1}")]
    FloorMismatch(i64, i64),

    #[error("h-order mismatch: {0} vs {1}")]
    HOrderMismatch(usize, usize),

    #[error("mode overflow: support {0} exceeds hard cap {1}")]
    ModeOverflow(usize, usize),

    #[error("zero symbol has no principal part")]
    ZeroSymbol,

    #[error("symbol is not invertible: {0}")]
    NotInvertible(String),

    #[error("top order {0} too high for the truncated exponential/logarithm")]
    OrderTooHigh(i64),

    #[error("h-series is not a unit: {0}")]
    NotAUnit(String),

    #[error("exponent has a nonzero h^0 term")]
    NonzeroConstantTerm,

    #[error("series has a non-unit constant term")]
    NonUnitConstantTerm,

    #[error("truncation budget exceeded: {0}")]
    TruncationBudget(String),

    #[error("time jet not tracked for flow index {0}")]
    JetNotTracked(usize),

    #[error("diffeomorphism is not orientation preserving (min g' = {0})")]
    OrientationViolation(f64),

    #[error("Newton iteration for diffeomorphism inversion diverged at y = {0}")]
    NewtonDivergence(f64),

    #[error("ODE integrator failure: {0}")]
    IntegratorFailure(String),

    #[error("trigonometric refit residual {0} above hard limit {1}")]
    RefitResidual(f64, f64),

    #[error("index out of range: {0}")]
    IndexError(String),

    #[error("configuration error: {0}")]
    Config(String),
}
