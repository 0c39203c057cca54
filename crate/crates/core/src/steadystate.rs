//! Classical fixed point of the nonlinear mode equations.
//!
//! The optical equations are homogeneous in `(alpha1, alpha2)`, so the zero
//! amplitude point is always a solution and nontrivial optical amplitudes only
//! exist on a measure-zero set of parameters. The solver is therefore a
//! best-effort front end; figure-level work starts from [`EffectiveParams`]
//! directly.
//!
//! All equations are evaluated with rates normalized by `omega_m`.
//!
//! [`EffectiveParams`]: crate::model::EffectiveParams

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PhysicalParams;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DAMPING: f64 = 0.5;
/// Optical denominators smaller than this in magnitude are degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FixedPoint {
    pub beta_s: Complex64,
    pub alpha1_s: Complex64,
    pub alpha2_s: Complex64,
    /// Max modulus of the three equation residuals.
    pub residual: f64,
    /// Iterations spent by the solver (0 for a hand-made point).
    pub iterations: usize,
}

impl FixedPoint {
    pub fn new(beta_s: Complex64, alpha1_s: Complex64, alpha2_s: Complex64) -> Self {
        Self { beta_s, alpha1_s, alpha2_s, residual: f64::NAN, iterations: 0 }
    }

    pub fn trivial() -> Self {
        Self::new(Complex64::ZERO, Complex64::ZERO, Complex64::ZERO)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub beta: Complex64,
    pub alpha1: Complex64,
    pub alpha2: Complex64,
}

impl Residuals {
    pub fn max_norm(&self) -> f64 {
        self.beta.norm().max(self.alpha1.norm()).max(self.alpha2.norm())
    }
}

/// Algebraic residuals of the three steady-state equations, each written as
/// `lhs * denominator - numerator`.
pub fn residuals(p: &PhysicalParams, fp: &FixedPoint) -> Residuals {
    let n = p.normalized();
    let (b, a1, a2) = (fp.beta_s, fp.alpha1_s, fp.alpha2_s);
    let re_b = b.re;

    let source = I * (n.eta1 * a1.norm_sqr() + n.eta2 * a2.norm_sqr())
        - I * n.eta0 * (a1 * a2.conj() + a2 * a1.conj());
    let beta = b * (I * n.omega_m + n.gamma_m) - source;
    let alpha1 = a1 * optical_denominator(n.eta1, re_b, n.omega_c1, n.kappa1)
        - 2.0 * I * n.eta0 * a2 * re_b;
    let alpha2 = a2 * optical_denominator(n.eta2, re_b, n.omega_c2, n.kappa2)
        - 2.0 * I * n.eta0 * a1 * re_b;
    Residuals { beta, alpha1, alpha2 }
}

fn optical_denominator(eta_i: f64, re_beta: f64, omega_c: f64, kappa: f64) -> Complex64 {
    2.0 * I * eta_i * re_beta - (I * omega_c + kappa / 2.0)
}

/// Damped Gauss-Seidel substitution: beta, then alpha1, then alpha2.
///
/// Convergence is judged only through [`residuals`].
pub fn solve_fixed_point(
    p: &PhysicalParams,
    seed: FixedPoint,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    p.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("must be > 0, got {tol}") });
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter { name: "max_iter", reason: "must be >= 1".into() });
    }
    let n = p.normalized();
    let mut fp = FixedPoint { residual: f64::NAN, iterations: 0, ..seed };
    fp.residual = residuals(p, &fp).max_norm();
    if fp.residual <= tol {
        return Ok(fp);
    }

    for iter in 1..=max_iter {
        let (a1, a2) = (fp.alpha1_s, fp.alpha2_s);
        let source = I * (n.eta1 * a1.norm_sqr() + n.eta2 * a2.norm_sqr())
            - I * n.eta0 * (a1 * a2.conj() + a2 * a1.conj());
        let beta_next = source / (I * n.omega_m + n.gamma_m);
        fp.beta_s = relax(fp.beta_s, beta_next);

        let re_b = fp.beta_s.re;
        let den1 = optical_denominator(n.eta1, re_b, n.omega_c1, n.kappa1);
        if den1.norm() < DEGENERATE_DENOMINATOR {
            return Err(Error::Degenerate { which: "alpha1" });
        }
        fp.alpha1_s = relax(fp.alpha1_s, 2.0 * I * n.eta0 * fp.alpha2_s * re_b / den1);

        let den2 = optical_denominator(n.eta2, re_b, n.omega_c2, n.kappa2);
        if den2.norm() < DEGENERATE_DENOMINATOR {
            return Err(Error::Degenerate { which: "alpha2" });
        }
        fp.alpha2_s = relax(fp.alpha2_s, 2.0 * I * n.eta0 * fp.alpha1_s * re_b / den2);

        fp.iterations = iter;
        fp.residual = residuals(p, &fp).max_norm();
        if !fp.residual.is_finite() {
            break;
        }
        if fp.residual <= tol {
            return Ok(fp);
        }
    }
    Err(Error::NoConvergence { iterations: fp.iterations, last: Box::new(fp) })
}

fn relax(old: Complex64, new: Complex64) -> Complex64 {
    old * (1.0 - DAMPING) + new * DAMPING
}
