//! Oracle-equivalence and invariant suites run by `optomech selfcheck`.
//!
//! Each suite compares two independent routes to the same quantity on
//! seeded random draws. The drift builder is a parameter so that a
//! deliberately broken `M` can be shown to trip the suites.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::entanglement::all_negativities_with;
use crate::lyapunov::{covariance_by_integration, default_horizon, default_step, solve_lyapunov_with};
use crate::model::{build_diffusion, build_drift, mode_swap_permutation, DriftMatrix, EffectiveParams};
use crate::oracle::characteristic_polynomial;
use crate::stability::{routh_hurwitz_coeffs, routh_hurwitz_conditions};
use crate::tolerances::Tolerances;

pub type DriftBuilder = fn(&EffectiveParams) -> DriftMatrix;

pub const DEFAULT_SEED: u64 = 0x6f70_746f;

#[derive(Debug, Clone, Copy)]
pub struct SelfcheckConfig {
    pub seed: u64,
    /// Draws for the cheap suites.
    pub draws: usize,
    /// Draws for the time-integration suite.
    pub integration_draws: usize,
    pub tolerances: Tolerances,
    pub drift: DriftBuilder,
}

impl Default for SelfcheckConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, draws: 500, integration_draws: 12, tolerances: Tolerances::default(), drift: build_drift }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    /// Worst observed deviation, in the units of the suite's tolerance.
    pub worst: f64,
    pub detail: String,
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {}  {}/{} ok  worst={:.3e}  {}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.checked - self.failures,
            self.checked,
            self.worst,
            self.detail
        )
    }
}

/// Uniform draw: rates in `[0, 2)`, detunings in `[-5, 5)`, `n_th` in `[0, 50)`.
pub fn random_params(rng: &mut impl Rng) -> EffectiveParams {
    EffectiveParams {
        omega_m: 1.0,
        gamma_m: rng.random_range(0.0..2.0),
        kappa1: rng.random_range(0.0..2.0),
        kappa2: rng.random_range(0.0..2.0),
        omega_eff1: rng.random_range(-5.0..5.0),
        omega_eff2: rng.random_range(-5.0..5.0),
        chi1: rng.random_range(0.0..2.0),
        chi2: rng.random_range(0.0..2.0),
        eta: rng.random_range(0.0..2.0),
        n_th: rng.random_range(0.0..50.0),
    }
}

/// Mechanical damping range of the broad oracle draws.
pub const BROAD_DAMPING: (f64, f64) = (0.01, 2.0);

/// Weak-damping range where the Markovian Brownian noise model is physical.
///
/// At `gamma_m` of order 1e-3 and above, low `n_th` and strong coupling, the
/// stationary state of this noise model can dip below the uncertainty bound.
pub const WEAK_DAMPING: (f64, f64) = (1e-6, 1e-5);

/// Rejection-samples [`random_params`] with `gamma_m` in `damping` until
/// `drift` gives a point safely inside the stable region.
pub fn random_stable(rng: &mut impl Rng, drift: DriftBuilder, damping: (f64, f64)) -> EffectiveParams {
    loop {
        let p = EffectiveParams {
            gamma_m: rng.random_range(damping.0..damping.1),
            kappa1: rng.random_range(0.01..2.0),
            kappa2: rng.random_range(0.01..2.0),
            ..random_params(rng)
        };
        if crate::stability::max_real_part(&drift(&p)).is_ok_and(|re| re < -1e-3) {
            return p;
        }
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 { 0.0 } else { (a - b).abs() / scale }
}

struct Tally {
    name: &'static str,
    checked: usize,
    failures: usize,
    worst: f64,
    first_failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, checked: 0, failures: 0, worst: 0.0, first_failure: None }
    }

    fn record(&mut self, ok: bool, deviation: f64, p: &EffectiveParams, what: impl FnOnce() -> String) {
        self.checked += 1;
        if deviation.is_nan() {
            self.worst = f64::NAN;
        } else if !self.worst.is_nan() {
            self.worst = self.worst.max(deviation);
        }
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(format!("{} at {p:?}", what()));
            }
        }
    }

    fn finish(self, bound: f64) -> SuiteOutcome {
        let detail = match self.first_failure {
            Some(f) => format!("bound {bound:e}; first failure: {f}"),
            None => format!("bound {bound:e}"),
        };
        SuiteOutcome {
            name: self.name,
            passed: self.failures == 0 && self.checked > 0,
            checked: self.checked,
            failures: self.failures,
            worst: self.worst,
            detail,
        }
    }
}

/// Closed-form coefficients against the expanded characteristic polynomial of `M`.
pub fn suite_charpoly(cfg: &SelfcheckConfig) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = cfg.tolerances.charpoly;
    let mut t = Tally::new("rh-vs-charpoly");
    for _ in 0..cfg.draws {
        let p = random_params(&mut rng);
        let closed = routh_hurwitz_coeffs(&p);
        let numeric = characteristic_polynomial((cfg.drift)(&p).matrix());
        let dev = closed.iter().zip(&numeric).map(|(a, b)| relative_difference(*a, *b)).fold(0.0, f64::max);
        t.record(dev <= bound, dev, &p, || format!("coefficients {closed:?} vs {numeric:?}"));
    }
    t.finish(bound)
}

/// Eigen-stable points must satisfy `S1 > 0` and `S2 > 0`.
pub fn suite_rh_necessity(cfg: &SelfcheckConfig) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 1);
    let mut t = Tally::new("rh-necessity");
    for _ in 0..cfg.draws {
        let p = random_params(&mut rng);
        let Ok(max_re) = crate::stability::max_real_part(&(cfg.drift)(&p)) else {
            t.record(false, f64::NAN, &p, || "eigenvalues failed".into());
            continue;
        };
        if max_re < -cfg.tolerances.marginal {
            let (s1, s2) = routh_hurwitz_conditions(&routh_hurwitz_coeffs(&p));
            t.record(s1 > 0.0 && s2 > 0.0, 0.0, &p, || format!("stable but S1={s1:e} S2={s2:e}"));
        }
    }
    t.finish(0.0)
}

/// Lyapunov solve against direct time integration, plus the residual bound.
pub fn suite_lyapunov(cfg: &SelfcheckConfig) -> SuiteOutcome {
    let tol = &cfg.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 2);
    let mut t = Tally::new("lyapunov-vs-integration");
    for _ in 0..cfg.integration_draws {
        let p = random_stable(&mut rng, cfg.drift, BROAD_DAMPING);
        let m = (cfg.drift)(&p);
        let d = build_diffusion(&p);
        let sol = match solve_lyapunov_with(&m, &d, tol) {
            Ok(s) => s,
            Err(e) => {
                t.record(false, f64::NAN, &p, || format!("solve: {e}"));
                continue;
            }
        };
        let integrated = default_horizon(&m).and_then(|h| covariance_by_integration(&m, &d, h, default_step(&m)));
        match integrated {
            Ok(v) => {
                let dev = (sol.covariance.matrix() - v.matrix()).amax();
                t.record(dev <= tol.oracle_agreement, dev, &p, || format!("max-norm difference {dev:e}"));
            }
            Err(e) => t.record(false, f64::NAN, &p, || format!("integration: {e}")),
        }
    }
    t.finish(tol.oracle_agreement)
}

/// Exchanging the optical modes permutes `M` and swaps `E_N(1)` with `E_N(2)`.
pub fn suite_swap(cfg: &SelfcheckConfig) -> SuiteOutcome {
    let tol = &cfg.tolerances;
    let perm = mode_swap_permutation();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 3);
    let mut t = Tally::new("mode-swap-symmetry");
    for _ in 0..cfg.draws / 10 {
        let p = random_stable(&mut rng, cfg.drift, BROAD_DAMPING);
        let q = p.mode_swapped();
        let m = (cfg.drift)(&p);
        let mq = (cfg.drift)(&q);
        let dm = (perm * m.matrix() * perm.transpose() - mq.matrix()).amax();
        let en = |x: &EffectiveParams, m: &DriftMatrix| {
            solve_lyapunov_with(m, &build_diffusion(x), tol)
                .and_then(|s| all_negativities_with(&s.covariance, tol))
                .map(|n| n.map(|r| r.e_n))
        };
        match (en(&p, &m), en(&q, &mq)) {
            (Ok(a), Ok(b)) => {
                let dev = dm.max((a[0] - b[1]).abs()).max((a[1] - b[0]).abs()).max((a[2] - b[2]).abs());
                t.record(dev <= tol.swap, dev, &p, || format!("E_N {a:?} vs swapped {b:?}, drift mismatch {dm:e}"));
            }
            (Err(e), _) | (_, Err(e)) => t.record(false, f64::NAN, &p, || format!("{e}")),
        }
    }
    t.finish(tol.swap)
}

/// Every stationary covariance satisfies the symplectic uncertainty bound.
pub fn suite_uncertainty(cfg: &SelfcheckConfig) -> SuiteOutcome {
    let tol = &cfg.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 4);
    let mut t = Tally::new("uncertainty-bound");
    for _ in 0..cfg.draws / 5 {
        let p = random_stable(&mut rng, cfg.drift, WEAK_DAMPING);
        match solve_lyapunov_with(&(cfg.drift)(&p), &build_diffusion(&p), tol) {
            Ok(sol) => {
                let nu = sol.covariance.min_symplectic_eigenvalue();
                let dev = (0.5 - nu).max(0.0);
                t.record(nu >= 0.5 - tol.symplectic_slack, dev, &p, || format!("min symplectic eigenvalue {nu}"));
            }
            Err(e) => t.record(false, f64::NAN, &p, || format!("{e}")),
        }
    }
    t.finish(tol.symplectic_slack)
}

pub fn run_all(cfg: &SelfcheckConfig) -> Vec<SuiteOutcome> {
    vec![
        suite_charpoly(cfg),
        suite_rh_necessity(cfg),
        suite_lyapunov(cfg),
        suite_swap(cfg),
        suite_uncertainty(cfg),
    ]
}

/// `build_drift` with the sign of the `chi1` entry in the `p_m` equation flipped.
pub fn drift_with_sign_error(p: &EffectiveParams) -> DriftMatrix {
    let mut m = build_drift(p);
    m.0[(1, 2)] = -m.0[(1, 2)];
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SelfcheckConfig {
        SelfcheckConfig { draws: 200, integration_draws: 3, ..Default::default() }
    }

    #[test]
    fn clean_build_passes() {
        for s in run_all(&quick()) {
            assert!(s.passed, "{s}");
        }
    }

    #[test]
    fn sign_error_is_caught() {
        let cfg = SelfcheckConfig { drift: drift_with_sign_error, ..quick() };
        let failed: Vec<_> = run_all(&cfg).into_iter().filter(|s| !s.passed).map(|s| s.name).collect();
        assert!(failed.contains(&"rh-vs-charpoly"), "{failed:?}");
        assert!(failed.contains(&"mode-swap-symmetry"), "{failed:?}");
    }

    #[test]
    fn zero_tolerances_fail() {
        let zero = Tolerances {
            lyapunov_residual: 0.0,
            oracle_agreement: 0.0,
            charpoly: 0.0,
            swap: 0.0,
            ..Tolerances::default()
        };
        let cfg = SelfcheckConfig { tolerances: zero, ..quick() };
        assert!(run_all(&cfg).iter().any(|s| !s.passed));
    }

    #[test]
    fn relative_difference_is_symmetric() {
        assert_eq!(relative_difference(0.0, 0.0), 0.0);
        assert_eq!(relative_difference(1.0, 2.0), 0.5);
        assert_eq!(relative_difference(2.0, 1.0), 0.5);
    }
}
