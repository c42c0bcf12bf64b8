//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid population spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evaluation point {m} is within {distance:e} of a pole of g")]
    PoleProximity { m: f64, distance: f64 },

    #[error("ambiguous Stieltjes root selection at z = {re}{im:+}i: {count} roots in the lower half-plane with small residual")]
    AmbiguousRoot { re: f64, im: f64, count: usize },

    #[error("no admissible Stieltjes root at z = {re}{im:+}i")]
    NoAdmissibleRoot { re: f64, im: f64 },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("Newton iteration failed: {what} (residuals {residuals:?})")]
    NewtonFailure { what: String, residuals: Vec<f64> },

    #[error("third derivative g'''(c) = {g3} is not positive at a cusp candidate")]
    NonPositiveThirdDerivative { g3: f64 },

    #[error("quadrature did not converge: {what} (error estimate {estimate:e})")]
    Nonconvergence { what: String, estimate: f64 },

    #[error("truncation bound violated: {0}")]
    Truncation(String),

    #[error("linear system ill-conditioned: residual {0:e}")]
    IllConditioned(f64),

    #[error("argument {0} is outside the supported range of the Bessel evaluator")]
    BesselRange(f64),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::AmbiguousRoot { .. }
                | Error::NoAdmissibleRoot { .. }
                | Error::Eigen(_)
                | Error::NewtonFailure { .. }
                | Error::NonPositiveThirdDerivative { .. }
                | Error::Nonconvergence { .. }
                | Error::Truncation(_)
                | Error::IllConditioned(_)
        )
    }
}
