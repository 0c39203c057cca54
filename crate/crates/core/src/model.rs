//! System parameters and the linear drift/diffusion matrices.
//!
//! Quadrature order throughout the crate is
//! `(q_m, p_m, X_c1, Y_c1, X_c2, Y_c2)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::steadystate::FixedPoint;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Mechanical frequency used by the temperature presets, rad/s.
pub const OMEGA_M_DEFAULT_ABS: f64 = 2.0 * std::f64::consts::PI * 1.0e7;

/// Parameters of the linearized model, rates in units of `omega_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Effective optical frequency of mode 1 (signed).
    pub omega_eff1: f64,
    /// Effective optical frequency of mode 2 (signed).
    pub omega_eff2: f64,
    pub chi1: f64,
    pub chi2: f64,
    /// Effective optical-optical coupling.
    pub eta: f64,
    /// Mean thermal occupation of the mechanical bath.
    pub n_th: f64,
}

impl EffectiveParams {
    /// Three damped, uncoupled oscillators at zero temperature.
    pub fn decoupled() -> Self {
        Self {
            omega_m: 1.0,
            gamma_m: 1e-5,
            kappa1: 1.0,
            kappa2: 0.5,
            omega_eff1: 1.0,
            omega_eff2: 1.0,
            chi1: 0.0,
            chi2: 0.0,
            eta: 0.0,
            n_th: 0.0,
        }
    }

    /// Shared base of the optomechanical-coupling scans (couplings zeroed).
    pub fn figure4_base() -> Self {
        Self {
            omega_m: 1.0,
            gamma_m: 1e-5,
            kappa1: 0.5,
            kappa2: 0.5,
            omega_eff1: -1.0,
            omega_eff2: -1.0,
            chi1: 0.0,
            chi2: 0.0,
            eta: 0.0,
            n_th: 20.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for field in ParamField::ALL {
            let v = self.get(field);
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: field.name(),
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        let positive = |name, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") })
            }
        };
        let non_negative = |name, v: f64| {
            if v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be >= 0, got {v}") })
            }
        };
        positive("omega_m", self.omega_m)?;
        non_negative("gamma_m", self.gamma_m)?;
        positive("kappa1", self.kappa1)?;
        positive("kappa2", self.kappa2)?;
        non_negative("n_th", self.n_th)
    }

    pub fn get(&self, field: ParamField) -> f64 {
        match field {
            ParamField::OmegaM => self.omega_m,
            ParamField::GammaM => self.gamma_m,
            ParamField::Kappa1 => self.kappa1,
            ParamField::Kappa2 => self.kappa2,
            ParamField::OmegaEff1 => self.omega_eff1,
            ParamField::OmegaEff2 => self.omega_eff2,
            ParamField::Chi1 => self.chi1,
            ParamField::Chi2 => self.chi2,
            ParamField::Eta => self.eta,
            ParamField::NTh => self.n_th,
        }
    }

    pub fn set(&mut self, field: ParamField, value: f64) {
        let slot = match field {
            ParamField::OmegaM => &mut self.omega_m,
            ParamField::GammaM => &mut self.gamma_m,
            ParamField::Kappa1 => &mut self.kappa1,
            ParamField::Kappa2 => &mut self.kappa2,
            ParamField::OmegaEff1 => &mut self.omega_eff1,
            ParamField::OmegaEff2 => &mut self.omega_eff2,
            ParamField::Chi1 => &mut self.chi1,
            ParamField::Chi2 => &mut self.chi2,
            ParamField::Eta => &mut self.eta,
            ParamField::NTh => &mut self.n_th,
        };
        *slot = value;
    }

    pub fn with(mut self, field: ParamField, value: f64) -> Self {
        self.set(field, value);
        self
    }

    /// Exchanges the two optical modes together with their parameters.
    pub fn mode_swapped(&self) -> Self {
        Self {
            kappa1: self.kappa2,
            kappa2: self.kappa1,
            omega_eff1: self.omega_eff2,
            omega_eff2: self.omega_eff1,
            chi1: self.chi2,
            chi2: self.chi1,
            ..*self
        }
    }
}

/// A named scalar field of [`EffectiveParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamField {
    OmegaM,
    GammaM,
    Kappa1,
    Kappa2,
    OmegaEff1,
    OmegaEff2,
    Chi1,
    Chi2,
    Eta,
    NTh,
}

impl ParamField {
    pub const ALL: [ParamField; 10] = [
        ParamField::OmegaM,
        ParamField::GammaM,
        ParamField::Kappa1,
        ParamField::Kappa2,
        ParamField::OmegaEff1,
        ParamField::OmegaEff2,
        ParamField::Chi1,
        ParamField::Chi2,
        ParamField::Eta,
        ParamField::NTh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamField::OmegaM => "omega_m",
            ParamField::GammaM => "gamma_m",
            ParamField::Kappa1 => "kappa1",
            ParamField::Kappa2 => "kappa2",
            ParamField::OmegaEff1 => "omega_eff1",
            ParamField::OmegaEff2 => "omega_eff2",
            ParamField::Chi1 => "chi1",
            ParamField::Chi2 => "chi2",
            ParamField::Eta => "eta",
            ParamField::NTh => "n_th",
        }
    }

    /// The field that plays the same role after an optical mode swap.
    pub fn mode_swapped(self) -> Self {
        match self {
            ParamField::Kappa1 => ParamField::Kappa2,
            ParamField::Kappa2 => ParamField::Kappa1,
            ParamField::OmegaEff1 => ParamField::OmegaEff2,
            ParamField::OmegaEff2 => ParamField::OmegaEff1,
            ParamField::Chi1 => ParamField::Chi2,
            ParamField::Chi2 => ParamField::Chi1,
            other => other,
        }
    }
}

impl fmt::Display for ParamField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_").to_ascii_lowercase();
        ParamField::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| Error::InvalidParameter {
                name: "field",
                reason: format!("unknown parameter `{s}`"),
            })
    }
}

/// Bare parameters of the three-mode Hamiltonian, absolute units (rad/s, K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_c1: f64,
    pub omega_c2: f64,
    pub omega_m: f64,
    pub gamma_m: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub eta0: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub temperature: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_c1", self.omega_c1),
            ("omega_c2", self.omega_c2),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        for (name, v) in [("eta0", self.eta0), ("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "temperature",
                reason: format!("must be finite and >= 0, got {}", self.temperature),
            });
        }
        Ok(())
    }

    /// Same system with every rate divided by `omega_m`.
    pub fn normalized(&self) -> Self {
        let w = self.omega_m;
        Self {
            omega_c1: self.omega_c1 / w,
            omega_c2: self.omega_c2 / w,
            omega_m: 1.0,
            gamma_m: self.gamma_m / w,
            kappa1: self.kappa1 / w,
            kappa2: self.kappa2 / w,
            eta0: self.eta0 / w,
            eta1: self.eta1 / w,
            eta2: self.eta2 / w,
            temperature: self.temperature,
        }
    }
}

/// Bose-Einstein occupation of a mode at `omega_m` (rad/s) and `temperature` (K).
pub fn thermal_occupation(omega_m: f64, temperature: f64) -> Result<f64> {
    if !omega_m.is_finite() || !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "thermal occupation needs finite inputs, got omega_m = {omega_m}, T = {temperature}"
        )));
    }
    if omega_m <= 0.0 || temperature < 0.0 {
        return Err(Error::Domain(format!(
            "thermal occupation needs omega_m > 0 and T >= 0, got omega_m = {omega_m}, T = {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega_m / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Relative imaginary part above which a complex effective quantity is flagged.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-6;

/// Largest imaginary residue discarded when mapping amplitudes to real couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImaginaryResidue {
    pub quantity: &'static str,
    /// `|Im| / |Re|` of that quantity (infinite for a purely imaginary value).
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveConversion {
    pub params: EffectiveParams,
    /// Set when some quantity had `|Im| / |Re| > IMAGINARY_RESIDUE_LIMIT`.
    pub warning: Option<ImaginaryResidue>,
}

/// Maps a classical fixed point onto the effective parameters of the
/// linearized model (rates normalized by `omega_m`).
///
/// The drift matrix is real, so each complex effective quantity contributes
/// its real part; the worst discarded imaginary part is reported.
pub fn effective_from_physical(p: &PhysicalParams, fp: &FixedPoint) -> Result<EffectiveConversion> {
    p.validate()?;
    let n = p.normalized();
    let two_beta = fp.beta_s * 2.0;
    let quantities = [
        ("omega_eff1", two_beta * n.eta1 - n.omega_c1),
        ("omega_eff2", two_beta * n.eta2 - n.omega_c2),
        ("chi1", fp.alpha1_s * n.eta1 - fp.alpha2_s * n.eta0),
        ("chi2", fp.alpha2_s * n.eta2 - fp.alpha1_s * n.eta0),
        ("eta", two_beta * n.eta0),
    ];

    let mut warning: Option<ImaginaryResidue> = None;
    for (quantity, z) in quantities {
        if z.im == 0.0 {
            continue;
        }
        let ratio = z.im.abs() / z.re.abs();
        if ratio > IMAGINARY_RESIDUE_LIMIT && warning.is_none_or(|w| ratio > w.ratio) {
            warning = Some(ImaginaryResidue { quantity, ratio });
        }
    }

    let params = EffectiveParams {
        omega_m: 1.0,
        gamma_m: n.gamma_m,
        kappa1: n.kappa1,
        kappa2: n.kappa2,
        omega_eff1: quantities[0].1.re,
        omega_eff2: quantities[1].1.re,
        chi1: quantities[2].1.re,
        chi2: quantities[3].1.re,
        eta: quantities[4].1.re,
        n_th: thermal_occupation(p.omega_m, p.temperature)?,
    };
    Ok(EffectiveConversion { params, warning })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix6<f64>);

impl DriftMatrix {
    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }
}

/// Diagonal noise-correlation matrix, stored as its diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(pub Vector6<f64>);

impl DiffusionMatrix {
    pub fn diagonal(&self) -> &Vector6<f64> {
        &self.0
    }

    pub fn to_matrix(&self) -> Matrix6<f64> {
        Matrix6::from_diagonal(&self.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }
}

pub fn build_drift(p: &EffectiveParams) -> DriftMatrix {
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
    #[rustfmt::skip]
    let m = Matrix6::new(
        0.0, wm,  0.0,      0.0,      0.0,      0.0,
        -wm, -g,  c1,       0.0,      c2,       0.0,
        0.0, 0.0, -k1 / 2.0, -o1,     0.0,      e,
        c1,  0.0, o1,       -k1 / 2.0, -e,      0.0,
        0.0, 0.0, 0.0,      e,        -k2 / 2.0, -o2,
        c2,  0.0, -e,       0.0,      o2,       -k2 / 2.0,
    );
    DriftMatrix(m)
}

pub fn build_diffusion(p: &EffectiveParams) -> DiffusionMatrix {
    DiffusionMatrix(Vector6::new(
        0.0,
        p.gamma_m * (2.0 * p.n_th + 1.0),
        p.kappa1 / 2.0,
        p.kappa1 / 2.0,
        p.kappa2 / 2.0,
        p.kappa2 / 2.0,
    ))
}

/// Permutation exchanging the quadrature pairs of the two optical modes.
pub fn mode_swap_permutation() -> Matrix6<f64> {
    let mut p = Matrix6::zeros();
    for (i, j) in [(0, 0), (1, 1), (2, 4), (3, 5), (4, 2), (5, 3)] {
        p[(i, j)] = 1.0;
    }
    p
}
