//! Built-in scans for the eight figure panels.
//!
//! Each preset is built from code and cross-checked against a plain
//! transcription table, so a typo in either place fails [`verify_presets`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{EffectiveParams, ParamField, OMEGA_M_DEFAULT_ABS};
use crate::sweep::{SweepAxis, SweepSpec, DEFAULT_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
}

impl Figure {
    pub const ALL: [Figure; 8] = [
        Figure::Fig2a,
        Figure::Fig2b,
        Figure::Fig2c,
        Figure::Fig2d,
        Figure::Fig3a,
        Figure::Fig3b,
        Figure::Fig4a,
        Figure::Fig4b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig2c => "fig2c",
            Figure::Fig2d => "fig2d",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
        }
    }

    /// The panel with the two optical modes exchanged.
    pub fn mirror(self) -> Figure {
        match self {
            Figure::Fig2a => Figure::Fig2c,
            Figure::Fig2b => Figure::Fig2d,
            Figure::Fig2c => Figure::Fig2a,
            Figure::Fig2d => Figure::Fig2b,
            Figure::Fig3a => Figure::Fig3b,
            Figure::Fig3b => Figure::Fig3a,
            Figure::Fig4a => Figure::Fig4b,
            Figure::Fig4b => Figure::Fig4a,
        }
    }

    pub fn spec(self) -> SweepSpec {
        let weak = EffectiveParams { gamma_m: 1e-5, n_th: 20.0, ..EffectiveParams::decoupled() };
        // strong coupling to mode 2
        let a = EffectiveParams {
            kappa1: 1.0,
            kappa2: 0.5,
            chi1: 0.1,
            chi2: 0.9,
            eta: 0.8,
            omega_eff1: -1.0,
            omega_eff2: -1.0,
            ..weak
        };
        let c = a.mode_swapped();
        let omega_axis = |base: EffectiveParams, field, n_th| SweepSpec {
            base: EffectiveParams { n_th, ..base },
            axis: SweepAxis::Field(field),
            start: -5.0,
            stop: 5.0,
            points: DEFAULT_POINTS,
        };
        let temperature = |base: EffectiveParams| SweepSpec {
            base,
            axis: SweepAxis::Temperature { omega_m_abs: OMEGA_M_DEFAULT_ABS },
            start: 0.0,
            stop: 5.0,
            points: DEFAULT_POINTS,
        };
        let f4 = EffectiveParams { eta: 0.01, ..EffectiveParams::figure4_base() };
        let chi_axis = |base, field| SweepSpec { base, axis: SweepAxis::Field(field), start: 0.0, stop: 1.0, points: DEFAULT_POINTS };
        match self {
            Figure::Fig2a => omega_axis(a, ParamField::OmegaEff1, 20.0),
            Figure::Fig2b => omega_axis(a, ParamField::OmegaEff1, 1250.0),
            Figure::Fig2c => omega_axis(c, ParamField::OmegaEff2, 20.0),
            Figure::Fig2d => omega_axis(c, ParamField::OmegaEff2, 1250.0),
            Figure::Fig3a => temperature(EffectiveParams { omega_eff2: 1.0, ..c }),
            Figure::Fig3b => temperature(EffectiveParams { omega_eff1: 1.0, ..a }),
            Figure::Fig4a => chi_axis(EffectiveParams { chi2: 0.01, ..f4 }, ParamField::Chi1),
            Figure::Fig4b => chi_axis(EffectiveParams { chi1: 0.01, ..f4 }, ParamField::Chi2),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Sweep(format!("unknown figure `{s}`; expected one of fig2a..fig2d, fig3a, fig3b, fig4a, fig4b")))
    }
}

/// One row of the reference table. `None` marks the swept quantity.
struct ReferenceRow {
    figure: Figure,
    axis: &'static str,
    range: (f64, f64),
    gamma_m: f64,
    kappa: (f64, f64),
    omega_eff: (Option<f64>, Option<f64>),
    chi: (Option<f64>, Option<f64>),
    eta: f64,
    n_th: Option<f64>,
}

#[rustfmt::skip]
const REFERENCE_TABLE: [ReferenceRow; 8] = [
    ReferenceRow { figure: Figure::Fig2a, axis: "omega_eff1", range: (-5.0, 5.0), gamma_m: 1e-5, kappa: (1.0, 0.5), omega_eff: (None, Some(-1.0)), chi: (Some(0.1), Some(0.9)), eta: 0.8, n_th: Some(20.0) },
    ReferenceRow { figure: Figure::Fig2b, axis: "omega_eff1", range: (-5.0, 5.0), gamma_m: 1e-5, kappa: (1.0, 0.5), omega_eff: (None, Some(-1.0)), chi: (Some(0.1), Some(0.9)), eta: 0.8, n_th: Some(1250.0) },
    ReferenceRow { figure: Figure::Fig2c, axis: "omega_eff2", range: (-5.0, 5.0), gamma_m: 1e-5, kappa: (0.5, 1.0), omega_eff: (Some(-1.0), None), chi: (Some(0.9), Some(0.1)), eta: 0.8, n_th: Some(20.0) },
    ReferenceRow { figure: Figure::Fig2d, axis: "omega_eff2", range: (-5.0, 5.0), gamma_m: 1e-5, kappa: (0.5, 1.0), omega_eff: (Some(-1.0), None), chi: (Some(0.9), Some(0.1)), eta: 0.8, n_th: Some(1250.0) },
    ReferenceRow { figure: Figure::Fig3a, axis: "temperature", range: (0.0, 5.0), gamma_m: 1e-5, kappa: (0.5, 1.0), omega_eff: (Some(-1.0), Some(1.0)), chi: (Some(0.9), Some(0.1)), eta: 0.8, n_th: None },
    ReferenceRow { figure: Figure::Fig3b, axis: "temperature", range: (0.0, 5.0), gamma_m: 1e-5, kappa: (1.0, 0.5), omega_eff: (Some(1.0), Some(-1.0)), chi: (Some(0.1), Some(0.9)), eta: 0.8, n_th: None },
    ReferenceRow { figure: Figure::Fig4a, axis: "chi1", range: (0.0, 1.0), gamma_m: 1e-5, kappa: (0.5, 0.5), omega_eff: (Some(-1.0), Some(-1.0)), chi: (None, Some(0.01)), eta: 0.01, n_th: Some(20.0) },
    ReferenceRow { figure: Figure::Fig4b, axis: "chi2", range: (0.0, 1.0), gamma_m: 1e-5, kappa: (0.5, 0.5), omega_eff: (Some(-1.0), Some(-1.0)), chi: (Some(0.01), None), eta: 0.01, n_th: Some(20.0) },
];

/// Checks every preset against the reference table.
pub fn verify_presets() -> Result<()> {
    for row in &REFERENCE_TABLE {
        let s = row.figure.spec();
        let b = &s.base;
        let mut bad = Vec::new();
        let check = |bad: &mut Vec<String>, what: &str, got: f64, want: f64| {
            if got != want {
                bad.push(format!("{what}={got} (table {want})"));
            }
        };
        check(&mut bad, "omega_m", b.omega_m, 1.0);
        check(&mut bad, "gamma_m", b.gamma_m, row.gamma_m);
        check(&mut bad, "kappa1", b.kappa1, row.kappa.0);
        check(&mut bad, "kappa2", b.kappa2, row.kappa.1);
        check(&mut bad, "eta", b.eta, row.eta);
        check(&mut bad, "start", s.start, row.range.0);
        check(&mut bad, "stop", s.stop, row.range.1);
        let fixed = [
            ("omega_eff1", b.omega_eff1, row.omega_eff.0),
            ("omega_eff2", b.omega_eff2, row.omega_eff.1),
            ("chi1", b.chi1, row.chi.0),
            ("chi2", b.chi2, row.chi.1),
            ("n_th", b.n_th, row.n_th),
        ];
        for (name, got, want) in fixed {
            if let Some(w) = want {
                check(&mut bad, name, got, w);
            } else if s.axis.name() != name && !(name == "n_th" && s.axis.name() == "temperature") {
                bad.push(format!("{name} is swept in the table but the axis is {}", s.axis));
            }
        }
        if s.axis.name() != row.axis {
            bad.push(format!("axis {} (table {})", s.axis, row.axis));
        }
        if s.points != DEFAULT_POINTS {
            bad.push(format!("points={}", s.points));
        }
        if !bad.is_empty() {
            return Err(Error::InvalidParameter { name: "preset", reason: format!("{}: {}", row.figure, bad.join(", ")) });
        }
        s.validate()?;
    }
    Ok(())
}
