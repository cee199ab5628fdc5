use thiserror::Error;

use crate::model::{Party, PlatformPair};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-finite input to {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParams {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{0}")]
    Domain(String),

    #[error(
        "parameters are off the symmetry locus (mu_v = {mu_v}, w(1-2mu_i) = {required}); use solve_asymmetric"
    )]
    OffLocus { mu_v: f64, required: f64 },

    #[error("point is not on the solution manifold: |FOC| = {residual:e} exceeds {tolerance:e}")]
    NotARoot { residual: f64, tolerance: f64 },

    #[error("best response of {party:?} against {opponent} hit the bracket edge at [{lo}, {hi}]")]
    UnboundedResponse {
        party: Party,
        opponent: f64,
        lo: f64,
        hi: f64,
    },

    #[error("best-response iteration did not converge in {iterations} iterations (last change {last_change:e})")]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        trace: Vec<PlatformPair>,
    },

    #[error("best-response iteration oscillates with period 2 after {iterations} iterations; lower the damping")]
    Oscillation {
        iterations: usize,
        trace: Vec<PlatformPair>,
    },

    #[error("threshold w_hat is undefined at mu_i = 1/2")]
    DegenerateLocus,

    #[error("denominator {value} is not strictly positive")]
    DegenerateDenominator { value: f64 },

    #[error("grid argmax {argmax} lies on the span edge [{lo}, {hi}]")]
    SpanTooSmall { argmax: f64, lo: f64, hi: f64 },

    #[error("no sign flip of dp_L/dw found below w = {cap}")]
    NoPeak { cap: f64 },
}

impl Error {
    /// Short stable identifier used as the machine-parsable prefix on the command line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "non-finite",
            Error::InvalidParams { .. } => "invalid-params",
            Error::Domain(_) => "domain",
            Error::OffLocus { .. } => "off-locus",
            Error::NotARoot { .. } => "not-a-root",
            Error::UnboundedResponse { .. } => "unbounded-response",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Oscillation { .. } => "oscillation",
            Error::DegenerateLocus => "degenerate-locus",
            Error::DegenerateDenominator { .. } => "degenerate-denominator",
            Error::SpanTooSmall { .. } => "span-too-small",
            Error::NoPeak { .. } => "no-peak",
        }
    }
}
