use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by the solvers, sweeps and self-checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Lyapunov residual bound, relative to `max|D|`.
    pub lyapunov_residual: f64,
    /// Relative asymmetry of the raw Lyapunov solution reported as an anomaly.
    pub asymmetry: f64,
    /// Max-norm agreement between the Lyapunov solve and the integration oracle.
    pub oracle_agreement: f64,
    /// Allowed shortfall of symplectic eigenvalues below 1/2.
    pub symplectic_slack: f64,
    /// `|max Re λ|` below which a drift matrix is called marginal.
    pub marginal: f64,
    /// Negative discriminants above `-discriminant_clamp` are set to zero silently.
    pub discriminant_clamp: f64,
    /// Negative discriminants below `-discriminant_error` are hard errors.
    pub discriminant_error: f64,
    /// Pointwise agreement for mode-swap mirrors.
    pub swap: f64,
    /// Relative agreement of closed-form and numerical characteristic coefficients.
    pub charpoly: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lyapunov_residual: 1e-9,
            asymmetry: 1e-8,
            oracle_agreement: 1e-6,
            symplectic_slack: 1e-8,
            marginal: 1e-12,
            discriminant_clamp: 1e-12,
            discriminant_error: 1e-6,
            swap: 1e-8,
            charpoly: 1e-6,
        }
    }
}
