use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular point at (u, v) = ({u}, {v}): {what}")]
    SingularPoint { u: f64, v: f64, what: String },

    #[error("no sign change of the characteristic relation found within radius {radius}")]
    NoBracket { radius: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("grid too small: need at least {needed} points, got {got}")]
    GridTooSmall { needed: usize, got: usize },

    #[error("singular hodograph Jacobian at (u, v) = ({u}, {v}), det = {det:e}")]
    SingularJacobian { u: f64, v: f64, det: f64 },

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("loss of hyperbolicity at x = {x}: p'(v) = {dp} with v = {v}")]
    HyperbolicityLoss { x: f64, v: f64, dp: f64 },

    #[error("time step underflow: dt = {dt:e}")]
    CflUnderflow { dt: f64 },

    #[error("field contains {count} masked or catastrophe cells")]
    MaskedCells { count: usize },

    #[error("unknown name `{0}`")]
    UnknownName(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn singular(u: f64, v: f64, what: impl Into<String>) -> Self {
        Error::SingularPoint {
            u,
            v,
            what: what.into(),
        }
    }
}
