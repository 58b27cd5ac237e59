use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-physical parameter {name} = {value}: {reason}")]
    NonPhysicalParams {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("1 + chi = {0} lies on the square-root branch cut")]
    BranchCut(Complex64),

    #[error("group delay derivative is unstable: {0}")]
    DivergentDelay(String),

    #[error("complex sinc overflows at omega = {omega:e} rad/s (|Im z| = {im:e})")]
    Overflow { omega: f64, im: f64 },

    #[error("spectrum edge is {ratio:e} of its peak (limit {limit:e}); widen the grid")]
    GridTooNarrow { ratio: f64, limit: f64 },

    #[error("{fraction:e} of the energy sits at the tau-window boundary (limit {limit:e})")]
    AliasingDetected { fraction: f64, limit: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for the numeric gates a scenario run can trip on a valid config.
    pub fn is_numeric_gate(&self) -> bool {
        matches!(
            self,
            Error::Overflow { .. }
                | Error::GridTooNarrow { .. }
                | Error::AliasingDetected { .. }
                | Error::BranchCut(_)
                | Error::DivergentDelay(_)
        )
    }
}
