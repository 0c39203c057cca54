//! Bipartite logarithmic negativity of the steady state.
//!
//! Tracing out a mode of a Gaussian state removes its rows and columns from
//! the covariance matrix. The reduced 4×4 matrix `V' = [[X, Z], [Zᵀ, Y]]`
//! gives the smallest partially transposed symplectic eigenvalue
//!
//! ```text
//! μ⁻ = sqrt( (Σ - sqrt(Σ² - 4 det V')) / 2 ),   Σ = det X + det Y - 2 det Z
//! ```
//!
//! and `E_N = max(0, -ln 2μ⁻)`. The state is entangled iff `μ⁻ < 1/2`.

use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lyapunov::CovarianceMatrix;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BipartitePair {
    /// Mechanical mode and optical mode 1.
    MechOpt1,
    /// Mechanical mode and optical mode 2.
    MechOpt2,
    /// The two optical modes.
    Opt1Opt2,
}

impl BipartitePair {
    pub const ALL: [BipartitePair; 3] = [BipartitePair::MechOpt1, BipartitePair::MechOpt2, BipartitePair::Opt1Opt2];

    /// Rows/columns of the full covariance matrix kept by the reduction.
    pub fn indices(self) -> [usize; 4] {
        match self {
            BipartitePair::MechOpt1 => [0, 1, 2, 3],
            BipartitePair::MechOpt2 => [0, 1, 4, 5],
            BipartitePair::Opt1Opt2 => [2, 3, 4, 5],
        }
    }
}

impl fmt::Display for BipartitePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BipartitePair::MechOpt1 => "mech-opt1",
            BipartitePair::MechOpt2 => "mech-opt2",
            BipartitePair::Opt1Opt2 => "opt1-opt2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCovariance {
    pub vprime: Matrix4<f64>,
    pub pair: BipartitePair,
}

impl ReducedCovariance {
    pub fn new(vprime: Matrix4<f64>, pair: BipartitePair) -> Self {
        Self { vprime, pair }
    }

    pub fn x(&self) -> Matrix2<f64> {
        self.vprime.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn y(&self) -> Matrix2<f64> {
        self.vprime.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn z(&self) -> Matrix2<f64> {
        self.vprime.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// `det X + det Y - 2 det Z`.
    pub fn sigma(&self) -> f64 {
        det2(&self.x()) + det2(&self.y()) - 2.0 * det2(&self.z())
    }

    /// Same state with the two modes' block positions exchanged.
    pub fn swapped(&self) -> Self {
        let order = [2, 3, 0, 1];
        let vprime = Matrix4::from_fn(|i, j| self.vprime[(order[i], order[j])]);
        Self { vprime, pair: self.pair }
    }
}

fn det2(m: &Matrix2<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativityResult {
    pub mu_minus: f64,
    pub e_n: f64,
    pub sigma: f64,
    pub det_vprime: f64,
}

pub fn reduce(v: &CovarianceMatrix, pair: BipartitePair) -> ReducedCovariance {
    let idx = pair.indices();
    let full = v.matrix();
    ReducedCovariance { vprime: Matrix4::from_fn(|i, j| full[(idx[i], idx[j])]), pair }
}

pub fn log_negativity(r: &ReducedCovariance) -> Result<NegativityResult> {
    log_negativity_with(r, &Tolerances::default())
}

pub fn log_negativity_with(r: &ReducedCovariance, tol: &Tolerances) -> Result<NegativityResult> {
    let sigma = r.sigma();
    let det_vprime = r.vprime.determinant();
    let mut discriminant = sigma * sigma - 4.0 * det_vprime;
    if discriminant < 0.0 {
        if discriminant < -tol.discriminant_error {
            return Err(Error::Unphysical { discriminant });
        }
        if discriminant < -tol.discriminant_clamp {
            log::warn!("clamping discriminant {discriminant:e} for {}", r.pair);
        }
        discriminant = 0.0;
    }
    let root = discriminant.sqrt();
    // (Σ - root)/2 rewritten as 2 det / (Σ + root) to avoid cancellation
    let mu_sq = if sigma > 0.0 { 2.0 * det_vprime / (sigma + root) } else { 0.5 * (sigma - root) };
    if mu_sq < -tol.discriminant_error {
        return Err(Error::Unphysical { discriminant: mu_sq });
    }
    let mu_minus = mu_sq.max(0.0).sqrt();
    let e_n = if mu_minus < 0.5 { -(2.0 * mu_minus).ln() } else { 0.0 };
    Ok(NegativityResult { mu_minus, e_n, sigma, det_vprime })
}

/// Negativities for `[MechOpt1, MechOpt2, Opt1Opt2]`.
pub fn all_negativities(v: &CovarianceMatrix) -> Result<[NegativityResult; 3]> {
    all_negativities_with(v, &Tolerances::default())
}

pub fn all_negativities_with(v: &CovarianceMatrix, tol: &Tolerances) -> Result<[NegativityResult; 3]> {
    let [a, b, c] = BipartitePair::ALL.map(|pair| log_negativity_with(&reduce(v, pair), tol));
    Ok([a?, b?, c?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::steady_state;
    use crate::model::EffectiveParams;
    use nalgebra::{Matrix6, Vector4};
    use proptest::prelude::*;

    /// Two-mode squeezed vacuum: X = Y = cosh(2r)/2 I, Z = sinh(2r)/2 diag(1, -1).
    fn tmsv(r: f64) -> ReducedCovariance {
        let (c, s) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        #[rustfmt::skip]
        let m = Matrix4::new(
            c, 0.0, s, 0.0,
            0.0, c, 0.0, -s,
            s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        );
        ReducedCovariance::new(m, BipartitePair::Opt1Opt2)
    }

    fn fig2a(omega_eff1: f64) -> EffectiveParams {
        EffectiveParams {
            omega_m: 1.0,
            gamma_m: 1e-5,
            kappa1: 1.0,
            kappa2: 0.5,
            omega_eff1,
            omega_eff2: -1.0,
            chi1: 0.1,
            chi2: 0.9,
            eta: 0.8,
            n_th: 20.0,
        }
    }

    #[test]
    fn vacuum_is_separable() {
        let r = ReducedCovariance::new(Matrix4::identity() * 0.5, BipartitePair::MechOpt1);
        let n = log_negativity(&r).unwrap();
        assert_eq!(n.sigma, 0.5);
        assert!((n.det_vprime - 1.0 / 16.0).abs() < 1e-15);
        assert!((n.mu_minus - 0.5).abs() < 1e-15);
        assert_eq!(n.e_n, 0.0);
    }

    #[test]
    fn squeezed_vacuum_closed_form() {
        for r in [0.1, 0.5, 1.0, 2.0] {
            let n = log_negativity(&tmsv(r)).unwrap();
            assert!((n.mu_minus - (-2.0 * r).exp() / 2.0).abs() < 1e-12, "r = {r}");
            assert!((n.e_n - 2.0 * r).abs() < 1e-9, "r = {r}: {}", n.e_n);
        }
    }

    #[test]
    fn product_states_have_zero_negativity() {
        let p = EffectiveParams { chi1: 0.0, chi2: 0.0, eta: 0.0, ..fig2a(1.0) };
        let v = steady_state(&p).unwrap();
        for pair in BipartitePair::ALL {
            assert_eq!(reduce(&v, pair).z(), Matrix2::zeros());
        }
        let all = all_negativities(&v).unwrap();
        assert_eq!(all.map(|n| n.e_n), [0.0; 3]);
    }

    #[test]
    fn reduction_picks_blocks() {
        let full = CovarianceMatrix::from_raw(Matrix6::from_fn(|i, j| (1 + i.min(j)) as f64 + 10.0 * (i.max(j)) as f64));
        let r = reduce(&full, BipartitePair::MechOpt1);
        assert_eq!(r.x(), full.matrix().fixed_view::<2, 2>(0, 0).into_owned());
        let r2 = reduce(&full, BipartitePair::MechOpt2);
        assert_eq!(r2.y(), full.matrix().fixed_view::<2, 2>(4, 4).into_owned());
        assert_eq!(r2.z(), full.matrix().fixed_view::<2, 2>(0, 4).into_owned());
        let r3 = reduce(&full, BipartitePair::Opt1Opt2);
        assert_eq!(r3.x(), full.matrix().fixed_view::<2, 2>(2, 2).into_owned());
    }

    #[test]
    fn coupled_pairs_have_correlations() {
        let v = steady_state(&fig2a(1.0)).unwrap();
        for pair in BipartitePair::ALL {
            assert!(reduce(&v, pair).z().amax() > 1e-6, "{pair}");
        }
    }

    #[test]
    fn strongly_unphysical_input_is_an_error() {
        // Z so large that Σ² < 4 det V' by a wide margin
        let mut bad = Matrix4::identity() * 0.5;
        bad[(0, 2)] = 3.0;
        bad[(2, 0)] = 3.0;
        bad[(1, 3)] = 3.0;
        bad[(3, 1)] = 3.0;
        assert!(matches!(
            log_negativity(&ReducedCovariance::new(bad, BipartitePair::MechOpt1)),
            Err(Error::Unphysical { .. })
        ));
    }

    fn rotation(theta: f64) -> Matrix2<f64> {
        Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos())
    }

    fn local_rotation(a: f64, b: f64) -> Matrix4<f64> {
        let mut s = Matrix4::zeros();
        s.fixed_view_mut::<2, 2>(0, 0).copy_from(&rotation(a));
        s.fixed_view_mut::<2, 2>(2, 2).copy_from(&rotation(b));
        s
    }

    /// Random physical two-mode state: local squeezing and rotations applied to
    /// thermal-plus-TMSV covariance.
    fn random_state(r: f64, n1: f64, n2: f64, sq: f64, a: f64, b: f64) -> ReducedCovariance {
        let base = tmsv(r).vprime;
        let thermal = Matrix4::from_diagonal(&Vector4::new(n1, n1, n2, n2));
        let squeeze = Matrix4::from_diagonal(&Vector4::new(sq.exp(), (-sq).exp(), 1.0, 1.0));
        let s = local_rotation(a, b) * squeeze;
        ReducedCovariance::new(s * (base + thermal) * s.transpose(), BipartitePair::MechOpt2)
    }

    proptest! {
        #[test]
        fn simon_threshold_equivalence(
            r in 0.0..1.5f64, n1 in 0.0..2.0f64, n2 in 0.0..2.0f64,
            sq in -1.0..1.0f64, a in 0.0..6.3f64, b in 0.0..6.3f64,
        ) {
            let state = random_state(r, n1, n2, sq, a, b);
            let n = log_negativity(&state).unwrap();
            let simon = 4.0 * n.det_vprime < n.sigma - 0.25;
            let margin = (4.0 * n.det_vprime - (n.sigma - 0.25)).abs();
            prop_assume!(margin > 1e-9);
            prop_assert_eq!(n.e_n > 0.0, simon);
            prop_assert_eq!(n.e_n > 0.0, n.mu_minus < 0.5);
            prop_assert!((n.e_n - (-(2.0 * n.mu_minus).ln()).max(0.0)).abs() < 1e-15);
        }

        #[test]
        fn invariant_under_local_rotations(
            r in 0.0..1.5f64, n1 in 0.0..2.0f64, sq in -1.0..1.0f64,
            a in 0.0..6.3f64, b in 0.0..6.3f64, c in 0.0..6.3f64, d in 0.0..6.3f64,
        ) {
            let state = random_state(r, n1, 0.3, sq, a, b);
            let rot = local_rotation(c, d);
            let turned = ReducedCovariance::new(rot * state.vprime * rot.transpose(), state.pair);
            let e0 = log_negativity(&state).unwrap().e_n;
            let e1 = log_negativity(&turned).unwrap().e_n;
            prop_assert!((e0 - e1).abs() < 1e-9);
        }

        #[test]
        fn invariant_under_mode_swap(
            r in 0.0..1.5f64, n1 in 0.0..2.0f64, n2 in 0.0..2.0f64, sq in -1.0..1.0f64, a in 0.0..6.3f64,
        ) {
            let state = random_state(r, n1, n2, sq, a, 0.0);
            let e0 = log_negativity(&state).unwrap().e_n;
            let e1 = log_negativity(&state.swapped()).unwrap().e_n;
            prop_assert!((e0 - e1).abs() < 1e-12);
        }

        #[test]
        fn negativity_decreases_in_mu(m1 in 0.001..0.499f64, m2 in 0.001..0.499f64) {
            prop_assume!((m1 - m2).abs() > 1e-9);
            let en = |mu: f64| -(2.0 * mu).ln();
            let (lo, hi) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
            prop_assert!(en(lo) > en(hi));
            // through the full formula: TMSV with μ⁻ = e^{-2r}/2
            let r_of = |mu: f64| -(2.0 * mu).ln() / 2.0;
            let e_lo = log_negativity(&tmsv(r_of(lo))).unwrap().e_n;
            let e_hi = log_negativity(&tmsv(r_of(hi))).unwrap().e_n;
            prop_assert!(e_lo > e_hi);
        }
    }
}
