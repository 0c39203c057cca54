//! Stationary covariance matrix of the linear quadrature dynamics.
//!
//! [`solve_lyapunov`] solves `M V + V Mᵀ = -D` directly by vectorization;
//! [`covariance_by_integration`] propagates `dV/dt = M V + V Mᵀ + D` from
//! `V(0) = 0` and is kept as an independent check.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix6, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{build_diffusion, build_drift, DiffusionMatrix, DriftMatrix, EffectiveParams};
use crate::stability;
use crate::tolerances::Tolerances;

/// Symmetric 6×6 covariance matrix in the order `(q_m, p_m, X_c1, Y_c1, X_c2, Y_c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceMatrix(Matrix6<f64>);

impl CovarianceMatrix {
    /// Symmetrizes `raw` as `(raw + rawᵀ) / 2`.
    pub fn from_raw(raw: Matrix6<f64>) -> Self {
        Self((raw + raw.transpose()) * 0.5)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    /// Symplectic eigenvalues, ascending, for the form `⊕ [[0, 1], [-1, 0]]`.
    ///
    /// Computed from the spectrum of `KᵀK` with `K = V^½ Ω V^½`, which carries
    /// every `ν²` twice.
    pub fn symplectic_eigenvalues(&self) -> [f64; 3] {
        let eig = SymmetricEigen::new(self.0);
        let sqrt_vals = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
        let root = eig.eigenvectors * Matrix6::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
        let k = root * symplectic_form() * root;
        let mut nu2: Vec<f64> = SymmetricEigen::new(k.transpose() * k).eigenvalues.iter().copied().collect();
        nu2.sort_by(f64::total_cmp);
        [0, 2, 4].map(|i| (0.5 * (nu2[i] + nu2[i + 1])).max(0.0).sqrt())
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_eigenvalues()[0]
    }

    /// Smallest eigenvalue of the symmetric matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.0).eigenvalues.min()
    }

    pub fn is_physical(&self, slack: f64) -> bool {
        self.min_symplectic_eigenvalue() >= 0.5 - slack
    }
}

/// `⊕ [[0, 1], [-1, 0]]` over the three modes.
pub fn symplectic_form() -> Matrix6<f64> {
    let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut omega = Matrix6::zeros();
    for b in 0..3 {
        omega.fixed_view_mut::<2, 2>(2 * b, 2 * b).copy_from(&j);
    }
    omega
}

/// Lyapunov solve together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovSolution {
    pub covariance: CovarianceMatrix,
    /// `max|M V + V Mᵀ + D|` of the symmetrized solution.
    pub residual: f64,
    /// `max|V - Vᵀ| / max|V|` before symmetrization.
    pub asymmetry: f64,
}

/// `max|M V + V Mᵀ + D|`.
pub fn lyapunov_residual(m: &DriftMatrix, v: &CovarianceMatrix, d: &DiffusionMatrix) -> f64 {
    let m = m.matrix();
    let v = v.matrix();
    (m * v + v * m.transpose() + d.to_matrix()).amax()
}

pub fn solve_lyapunov(m: &DriftMatrix, d: &DiffusionMatrix) -> Result<CovarianceMatrix> {
    solve_lyapunov_with(m, d, &Tolerances::default()).map(|s| s.covariance)
}

/// Solves `(I ⊗ M + M ⊗ I) vec(V) = -vec(D)` and symmetrizes the result.
///
/// Refuses unstable or marginal drift matrices.
pub fn solve_lyapunov_with(m: &DriftMatrix, d: &DiffusionMatrix, tol: &Tolerances) -> Result<LyapunovSolution> {
    let max_re = stability::max_real_part(m)?;
    let marginal = max_re.abs() < tol.marginal;
    if max_re >= 0.0 || marginal {
        return Err(Error::NotStable { max_real_part: max_re, marginal });
    }

    let op = lyapunov_operator(m.matrix());
    let dm = d.to_matrix();
    let rhs = DVector::from_iterator(36, dm.iter().map(|x| -x));
    let lu = op.clone().lu();
    let mut x = lu.solve(&rhs).ok_or(Error::Singular)?;
    // one round of iterative refinement
    let correction = lu.solve(&(&rhs - &op * &x)).ok_or(Error::Singular)?;
    x += correction;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }

    let raw = Matrix6::from_column_slice(x.as_slice());
    let scale = raw.amax();
    let asymmetry = if scale > 0.0 { (raw - raw.transpose()).amax() / scale } else { 0.0 };
    if asymmetry > tol.asymmetry {
        log::warn!("Lyapunov solution asymmetry {asymmetry:e} before symmetrization");
    }
    let covariance = CovarianceMatrix::from_raw(raw);
    let residual = lyapunov_residual(m, &covariance, d);
    let bound = tol.lyapunov_residual * d.max_abs();
    if residual > bound {
        return Err(Error::Residual { residual, bound });
    }
    Ok(LyapunovSolution { covariance, residual, asymmetry })
}

/// Matrix of `V ↦ M V + V Mᵀ` acting on column-major `vec(V)`.
fn lyapunov_operator(m: &Matrix6<f64>) -> DMatrix<f64> {
    let mut op = DMatrix::zeros(36, 36);
    for i in 0..6 {
        for j in 0..6 {
            let row = i + 6 * j;
            for k in 0..6 {
                op[(row, k + 6 * j)] += m[(i, k)];
                op[(row, i + 6 * k)] += m[(j, k)];
            }
        }
    }
    op
}

/// Builds `M`, `D` from `p` and solves for the stationary covariance.
pub fn steady_state(p: &EffectiveParams) -> Result<CovarianceMatrix> {
    p.validate()?;
    solve_lyapunov(&build_drift(p), &build_diffusion(p))
}

/// Minimum number of RK4 steps in the base window before doubling.
const BASE_STEPS: usize = 1024;
/// `max|F|` beyond which propagation is declared divergent.
const DIVERGENCE_NORM: f64 = 1e8;

/// Truncated `∫₀ᵗ e^{Ms} D e^{Mᵀs} ds` at `t = horizon`.
///
/// A fixed-step RK4 integrator propagates `(F, V)` with `dF/dt = M F`,
/// `dV/dt = M V + V Mᵀ + D` over a base window `τ = horizon / 2ᵏ`; the
/// semigroup identities `V(2t) = V(t) + F(t) V(t) F(t)ᵀ`, `F(2t) = F(t)²`
/// then carry it to `horizon`. Uses no eigenvalues or linear solves.
pub fn covariance_by_integration(
    m: &DriftMatrix,
    d: &DiffusionMatrix,
    horizon: f64,
    step: f64,
) -> Result<CovarianceMatrix> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter { name: "horizon", reason: format!("must be finite and > 0, got {horizon}") });
    }
    if !(step > 0.0 && step <= horizon) {
        return Err(Error::InvalidParameter { name: "step", reason: format!("must be in (0, horizon], got {step}") });
    }
    let m = m.matrix();
    let dm = d.to_matrix();

    let mut doublings = 0u32;
    let mut window = horizon;
    while window > (BASE_STEPS as f64) * step * 2.0 {
        window *= 0.5;
        doublings += 1;
    }
    let steps = (window / step).ceil().max(1.0) as usize;
    let h = window / steps as f64;

    let lyap = |v: &Matrix6<f64>| m * v + v * m.transpose() + dm;
    let mut f = Matrix6::<f64>::identity();
    let mut v = Matrix6::<f64>::zeros();
    for n in 0..steps {
        let (f1, v1) = (m * f, lyap(&v));
        let (f2, v2) = (m * (f + f1 * (h / 2.0)), lyap(&(v + v1 * (h / 2.0))));
        let (f3, v3) = (m * (f + f2 * (h / 2.0)), lyap(&(v + v2 * (h / 2.0))));
        let (f4, v4) = (m * (f + f3 * h), lyap(&(v + v3 * h)));
        f += (f1 + f2 * 2.0 + f3 * 2.0 + f4) * (h / 6.0);
        v += (v1 + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0);
        check_growth(&f, &v, (n + 1) as f64 * h)?;
    }

    let mut t = window;
    for _ in 0..doublings {
        v += f * v * f.transpose();
        f = f * f;
        t *= 2.0;
        check_growth(&f, &v, t)?;
    }
    Ok(CovarianceMatrix::from_raw(v))
}

fn check_growth(f: &Matrix6<f64>, v: &Matrix6<f64>, time: f64) -> Result<()> {
    let fmax = f.amax();
    if !fmax.is_finite() || fmax > DIVERGENCE_NORM || !v.amax().is_finite() {
        return Err(Error::Diverged { time });
    }
    Ok(())
}

/// `50 / min|Re λ|`, long enough for the truncated integral to converge.
pub fn default_horizon(m: &DriftMatrix) -> Result<f64> {
    let slowest = stability::eigenvalues(m.matrix())?
        .iter()
        .map(|z| z.re.abs())
        .fold(f64::INFINITY, f64::min);
    if slowest == 0.0 {
        return Err(Error::NotStable { max_real_part: 0.0, marginal: true });
    }
    Ok(50.0 / slowest)
}

/// RK4 step small enough that truncation error stays below roundoff.
pub fn default_step(m: &DriftMatrix) -> f64 {
    let row_norm = m.matrix().row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    1e-3 / row_norm.max(1.0)
}
