use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("index {index} out of range 1..={len} for `{field}`")]
    IndexOutOfRange {
        field: &'static str,
        index: usize,
        len: usize,
    },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e}, condition estimate {condition:e})")]
    NotPositiveDefinite {
        pivot: usize,
        value: f64,
        condition: f64,
    },

    #[error("inverse residual {residual:e} exceeds {tolerance:e} (condition estimate {condition:e})")]
    IllConditioned {
        residual: f64,
        tolerance: f64,
        condition: f64,
    },

    #[error("U_{degree}(z) overflows: degree * log10(2z) = {magnitude:.1} exceeds headroom {headroom:.1}")]
    ChebyshevRange {
        degree: usize,
        magnitude: f64,
        headroom: f64,
    },

    #[error("{what} needs {required} but the limit is {limit}")]
    Capacity {
        what: &'static str,
        required: usize,
        limit: usize,
    },

    #[error("no population maximum bracketed on the time grid (peak sample {peak:.3e} at the last point); use a smaller dt or a larger t_max")]
    GridTooCoarse { peak: f64 },

    #[error("Hamiltonian is not mirror symmetric (deviation {deviation:e}); parity resolution unavailable")]
    Symmetry { deviation: f64 },

    #[error("need at least {required} levels for spacing ratios, got {got}")]
    TooFewLevels { required: usize, got: usize },

    #[error("OTOC trace has imaginary part {imag:e} at t = {time:e} s")]
    ComplexOtoc { imag: f64, time: f64 },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerics or capacity.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. } | Error::IndexOutOfRange { .. } | Error::Symmetry { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
