//! Linearized optomechanics with one mechanical and two optical modes.
//!
//! The crate builds the drift and diffusion matrices of the linearized
//! quadrature dynamics, checks stability, solves the steady-state Lyapunov
//! equation for the 6×6 covariance matrix, and quantifies bipartite
//! entanglement through the logarithmic negativity. Parameter sweeps and the
//! figure presets sit on top of those pieces.
//!
//! Rates are expressed in units of the mechanical frequency (`omega_m = 1`)
//! and quadratures are normalized so that the vacuum variance is 1/2.
//!
//! ```
//! use optomech::{entanglement, lyapunov, model::EffectiveParams, stability};
//!
//! let p = EffectiveParams {
//!     chi1: 0.4,
//!     chi2: 0.01,
//!     eta: 0.01,
//!     ..EffectiveParams::figure4_base()
//! };
//! assert!(stability::check_stability(&p).unwrap().eigen_stable);
//! let v = lyapunov::steady_state(&p).unwrap();
//! let [en1, _, _] = entanglement::all_negativities(&v).unwrap();
//! assert!(en1.e_n > 0.0);
//! ```

pub mod entanglement;
pub mod error;
pub mod lyapunov;
pub mod model;
pub mod oracle;
pub mod plot;
pub mod presets;
pub mod selfcheck;
pub mod stability;
pub mod steadystate;
pub mod sweep;
pub mod tolerances;

pub use error::{Error, Result};
pub use tolerances::Tolerances;

/// Crate version recorded in sweep metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
