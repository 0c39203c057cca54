//! Stability of the linearized dynamics.
//!
//! The spectrum of the drift matrix is the authoritative verdict. The two
//! Routh-Hurwitz expressions `S1`, `S2` built from the closed-form
//! characteristic coefficients are reported alongside; they are necessary
//! conditions, and a point that passes them while being spectrally unstable
//! is logged rather than treated as an error.

use nalgebra::Matrix6;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{build_drift, DriftMatrix, EffectiveParams, ParamField};
use crate::tolerances::Tolerances;

/// Closed-form coefficients `a[k]` of the characteristic polynomial
/// `Σ a[k] λ^k` of the drift matrix, `a[6] = 1`.
pub fn routh_hurwitz_coeffs(p: &EffectiveParams) -> [f64; 7] {
    let EffectiveParams {
        omega_m: wm,
        gamma_m: g,
        kappa1: k1,
        kappa2: k2,
        omega_eff1: o1,
        omega_eff2: o2,
        chi1: c1,
        chi2: c2,
        eta: e,
        ..
    } = *p;
    let (wm2, k1s, k2s, o1s, o2s, e2) = (wm * wm, k1 * k1, k2 * k2, o1 * o1, o2 * o2, e * e);
    let (c1s, c2s) = (c1 * c1, c2 * c2);
    let optical_block = o1s * o2s + e2 * e2 - 2.0 * e2 * o1 * o2;

    let a0 = k1s * k2s * wm2 / 16.0 + e2 * wm2 * k1 * k2 / 2.0 - wm * e * c1 * c2 * k1 * k2 / 2.0
        + k1s * wm2 * o2s / 4.0
        + k1s * wm * o2 * c2s / 4.0
        + k2s * wm2 * o1s / 4.0
        + k2s * wm * o1 * c1s / 4.0
        + wm2 * optical_block
        + wm * (c1s * o2s * o1 - c1s * e2 * o2)
        + wm * (2.0 * e * c1 * c2 * o1 * o2 - 2.0 * c1 * c2 * e2 * e + c2s * o1s * o2 - o1 * c2s * e2);

    let a1 = g * (k1s * k2s / 16.0 + e2 * k1 * k2 / 2.0 + k1s * o2s / 4.0 + k2s * o1s / 4.0 + optical_block)
        + wm2 * k1 * k2 / 4.0 * (k1 + k2)
        + (k1 + k2) * (e2 * wm2 - wm * e * c1 * c2)
        + k1 * (wm2 * o2s + wm * o2 * c2s)
        + k2 * (wm2 * o1s + wm * o1 * c1s);

    let a2 = k1s * k2s / 16.0
        + wm2 * (k1s / 4.0 + k2s / 4.0 + k1 * k2)
        + k1s * k2 * g / 4.0
        + k2s * k1 * g / 4.0
        + 2.0 * e2 * wm2
        - 2.0 * wm * e * c1 * c2
        + e2 * (k1 * k2 / 2.0 + g * k1 + g * k2)
        + o2s * (k1s / 4.0 + wm2 + k1 * g)
        + e2 * e2
        - 2.0 * e2 * o1 * o2
        + o1s * (k2s / 4.0 + wm2 + k2 * g)
        + wm * o2 * c2s
        + wm * o1 * c1s
        + o1s * o2s;

    let a3 = k1 * (k2s / 4.0 + wm2 + e2 + o2s)
        + k2 * (k1s / 4.0 + wm2 + e2 + o1s)
        + g * (k1s / 4.0 + k2s / 4.0 + k1 * k2 + 2.0 * e2 + o1s + o2s);

    let a4 = k1s / 4.0 + k2s / 4.0 + k1 * k2 + g * (k1 + k2) + wm2 + o1s + o2s + 2.0 * e2;
    let a5 = g + k1 + k2;
    [a0, a1, a2, a3, a4, a5, 1.0]
}

/// `(S1, S2)` from the characteristic coefficients.
pub fn routh_hurwitz_conditions(a: &[f64; 7]) -> (f64, f64) {
    let s1 = a[0];
    let s2 = a[5] * a[4] * a[3] + a[6] * a[1] * a[5] - a[6] * a[3] * a[3] - a[2] * a[5] * a[5];
    (s1, s2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// All eigenvalues of the drift matrix have negative real part.
    pub eigen_stable: bool,
    /// `|max Re λ|` is below the marginal threshold.
    pub marginal: bool,
    pub s1: f64,
    pub s2: f64,
    pub rh_pass: bool,
    pub max_real_part: f64,
    pub coefficients: [f64; 7],
    #[serde(skip)]
    pub eigenvalues: [Complex64; 6],
}

impl StabilityReport {
    /// Stable and far enough from the boundary to compute a steady state.
    pub fn usable(&self) -> bool {
        self.eigen_stable && !self.marginal
    }

    /// Routh-Hurwitz expressions pass while the spectrum says unstable.
    pub fn rh_disagrees(&self) -> bool {
        self.rh_pass && !self.eigen_stable
    }
}

/// Eigenvalues of a 6×6 real matrix via the real Schur form.
pub fn eigenvalues(m: &Matrix6<f64>) -> Result<[Complex64; 6]> {
    let schur = m.try_schur(f64::EPSILON, 10_000).ok_or(Error::Eigen)?;
    let ev = schur.complex_eigenvalues();
    let mut out = [Complex64::ZERO; 6];
    for (slot, z) in out.iter_mut().zip(ev.iter()) {
        *slot = Complex64::new(z.re, z.im);
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigen);
    }
    Ok(out)
}

pub fn max_real_part(m: &DriftMatrix) -> Result<f64> {
    Ok(eigenvalues(m.matrix())?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn check_stability(p: &EffectiveParams) -> Result<StabilityReport> {
    check_stability_with(p, &Tolerances::default())
}

pub fn check_stability_with(p: &EffectiveParams, tol: &Tolerances) -> Result<StabilityReport> {
    let coefficients = routh_hurwitz_coeffs(p);
    let (s1, s2) = routh_hurwitz_conditions(&coefficients);
    let eigenvalues = eigenvalues(build_drift(p).matrix())?;
    let max_real_part = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let report = StabilityReport {
        eigen_stable: max_real_part < 0.0,
        marginal: max_real_part.abs() < tol.marginal,
        s1,
        s2,
        rh_pass: s1 > 0.0 && s2 > 0.0,
        max_real_part,
        coefficients,
        eigenvalues,
    };
    if report.rh_disagrees() {
        log::debug!(
            "S1, S2 > 0 but max Re λ = {:e} at {:?}; a higher Hurwitz minor is violated",
            max_real_part,
            p
        );
    }
    Ok(report)
}

/// Locates the point in `[lo, hi]` where `field` crosses the stability
/// boundary, by bisection on the sign of `max Re λ`.
///
/// Returns `None` when both ends have the same verdict.
pub fn stability_boundary(
    base: &EffectiveParams,
    field: ParamField,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let unstable_at = |x: f64| -> Result<bool> { Ok(max_real_part(&build_drift(&base.with(field, x)))? >= 0.0) };
    let (mut a, mut b) = (lo, hi);
    let ua = unstable_at(a)?;
    if ua == unstable_at(b)? {
        return Ok(None);
    }
    while (b - a).abs() > tol {
        let mid = 0.5 * (a + b);
        if unstable_at(mid)? == ua {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::characteristic_polynomial;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

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

    fn fig4a(chi1: f64) -> EffectiveParams {
        EffectiveParams { chi1, chi2: 0.01, eta: 0.01, ..EffectiveParams::figure4_base() }
    }

    fn random_params(rng: &mut impl Rng) -> EffectiveParams {
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
            n_th: 0.0,
        }
    }

    fn rel_close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn decoupled_zero_frequency_coefficients() {
        let p = EffectiveParams {
            omega_eff1: 0.0,
            omega_eff2: 0.0,
            chi1: 0.0,
            chi2: 0.0,
            eta: 0.0,
            kappa1: 0.7,
            kappa2: 1.3,
            ..fig2a(0.0)
        };
        let a = routh_hurwitz_coeffs(&p);
        assert_eq!(a[0], 0.7f64.powi(2) * 1.3f64.powi(2) / 16.0);
        assert_eq!(a[6], 1.0);
    }

    #[test]
    fn a5_is_total_damping() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            assert_eq!(routh_hurwitz_coeffs(&p)[5], p.gamma_m + p.kappa1 + p.kappa2);
        }
    }

    #[test]
    fn closed_form_matches_characteristic_polynomial_at_fig2a() {
        let p = fig2a(-1.0);
        let closed = routh_hurwitz_coeffs(&p);
        let numeric = characteristic_polynomial(build_drift(&p).matrix());
        for k in 0..7 {
            assert!(rel_close(closed[k], numeric[k], 1e-8), "a{k}: {} vs {}", closed[k], numeric[k]);
        }
    }

    #[test]
    fn closed_form_matches_characteristic_polynomial_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let p = random_params(&mut rng);
            let closed = routh_hurwitz_coeffs(&p);
            let numeric = characteristic_polynomial(build_drift(&p).matrix());
            for k in 0..7 {
                assert!(rel_close(closed[k], numeric[k], 1e-6), "a{k} at {p:?}: {} vs {}", closed[k], numeric[k]);
            }
        }
    }

    #[test]
    fn routh_hurwitz_is_necessary() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..2000 {
            let p = random_params(&mut rng);
            let r = check_stability(&p).unwrap();
            if r.eigen_stable {
                assert!(r.rh_pass, "stable but S1 = {}, S2 = {} at {p:?}", r.s1, r.s2);
            }
        }
    }

    #[test]
    fn decoupled_damped_oscillators_are_stable() {
        let p = EffectiveParams {
            gamma_m: 0.1,
            omega_eff1: 1.0,
            omega_eff2: 1.0,
            chi1: 0.0,
            chi2: 0.0,
            eta: 0.0,
            ..fig2a(0.0)
        };
        let r = check_stability(&p).unwrap();
        assert!(r.eigen_stable && !r.marginal && r.rh_pass);
        let mut re: Vec<f64> = r.eigenvalues.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        let expected = [-0.5, -0.5, -0.25, -0.25, -0.05, -0.05];
        for (a, b) in re.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{re:?}");
        }
    }

    #[test]
    fn report_invariants_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let r = check_stability(&random_params(&mut rng)).unwrap();
            assert_eq!(r.rh_pass, r.s1 > 0.0 && r.s2 > 0.0);
            assert_eq!(r.eigen_stable, r.max_real_part < 0.0);
        }
    }

    #[test]
    fn undamped_mechanics_alone_is_marginal() {
        let p = EffectiveParams { gamma_m: 0.0, chi1: 0.0, chi2: 0.0, eta: 0.0, ..fig2a(1.0) };
        let r = check_stability(&p).unwrap();
        assert!(r.marginal);
        assert!(!r.usable());
    }

    #[test]
    fn fig4a_range_is_stable_and_has_an_upper_bound() {
        for i in 0..=100 {
            let chi1 = i as f64 / 100.0;
            assert!(check_stability(&fig4a(chi1)).unwrap().eigen_stable, "chi1 = {chi1}");
        }
        let edge = stability_boundary(&fig4a(0.0), ParamField::Chi1, 0.5, 3.0, 1e-10)
            .unwrap()
            .expect("a stability edge in [0.5, 3]");
        assert!(edge > 1.0 && edge < 1.1, "edge at {edge}");
        let below = max_real_part(&build_drift(&fig4a(edge - 1e-6))).unwrap();
        let above = max_real_part(&build_drift(&fig4a(edge + 1e-6))).unwrap();
        assert!(below < 0.0 && above > 0.0);
        assert!(!check_stability(&fig4a(edge + 0.1)).unwrap().eigen_stable);
    }

    #[test]
    fn boundary_absent_when_verdicts_agree() {
        assert_eq!(stability_boundary(&fig4a(0.0), ParamField::Chi1, 0.1, 0.5, 1e-8).unwrap(), None);
    }
}
