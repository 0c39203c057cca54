use thiserror::Error;

use crate::steadystate::FixedPoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("drift matrix is not stable (max Re λ = {max_real_part:e}, marginal = {marginal})")]
    NotStable { max_real_part: f64, marginal: bool },

    #[error("eigenvalue computation did not converge")]
    Eigen,

    #[error("linear system is singular")]
    Singular,

    #[error("Lyapunov residual {residual:e} exceeds bound {bound:e}")]
    Residual { residual: f64, bound: f64 },

    #[error("covariance propagation diverged at t = {time:e}")]
    Diverged { time: f64 },

    #[error("unphysical reduced covariance: A² - 4 det V' = {discriminant:e}")]
    Unphysical { discriminant: f64 },

    #[error("degenerate denominator in fixed-point equation for {which}")]
    Degenerate { which: &'static str },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {:e})", last.residual)]
    NoConvergence { last: Box<FixedPoint>, iterations: usize },

    #[error("invalid sweep: {0}")]
    Sweep(String),
}
