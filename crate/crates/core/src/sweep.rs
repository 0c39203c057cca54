//! One-dimensional parameter scans.
//!
//! Every grid point is independent: build `M` and `D`, check stability, and
//! only for stable, non-marginal points solve for the covariance and the
//! three negativities. Rows come back in grid order whether or not the
//! points were evaluated in parallel.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::entanglement::all_negativities_with;
use crate::error::{Error, Result};
use crate::lyapunov::solve_lyapunov_with;
use crate::model::{build_diffusion, build_drift, thermal_occupation, EffectiveParams, ParamField};
use crate::stability::{check_stability_with, StabilityReport};
use crate::tolerances::Tolerances;

pub const DEFAULT_POINTS: usize = 501;

/// Exact CSV header of a sweep.
pub const CSV_HEADER: &str = "axis,axis_value,eigen_stable,s1,s2,en1,en2,en3,mu1,mu2,mu3,note";

/// Fields a sweep may scan, besides `temperature`.
pub const SWEEPABLE: [ParamField; 6] =
    [ParamField::OmegaEff1, ParamField::OmegaEff2, ParamField::NTh, ParamField::Chi1, ParamField::Chi2, ParamField::Eta];

fn sweepable_names() -> String {
    let mut names: Vec<&str> = SWEEPABLE.iter().map(|f| f.name()).collect();
    names.push("temperature");
    names.join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SweepAxis {
    Field(ParamField),
    /// Bath temperature in kelvin, converted to `n_th` with `omega_m_abs` (rad/s).
    Temperature { omega_m_abs: f64 },
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Field(f) => f.name(),
            SweepAxis::Temperature { .. } => "temperature",
        }
    }

    pub fn mode_swapped(&self) -> Self {
        match *self {
            SweepAxis::Field(f) => SweepAxis::Field(f.mode_swapped()),
            t => t,
        }
    }

    /// Parses an axis name; `temperature` takes `omega_m_abs` for the conversion.
    pub fn parse(name: &str, omega_m_abs: f64) -> Result<Self> {
        if name.trim().eq_ignore_ascii_case("temperature") {
            Ok(SweepAxis::Temperature { omega_m_abs })
        } else {
            ParamField::from_str(name)
                .map(SweepAxis::Field)
                .map_err(|_| Error::Sweep(format!("unknown axis `{name}`; choose one of {}", sweepable_names())))
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub base: EffectiveParams,
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::Sweep(format!("need finite start < stop, got [{}, {}]", self.start, self.stop)));
        }
        if self.points < 2 {
            return Err(Error::Sweep(format!("need at least 2 points, got {}", self.points)));
        }
        match self.axis {
            SweepAxis::Field(f) if !SWEEPABLE.contains(&f) => {
                return Err(Error::Sweep(format!("`{f}` cannot be swept; choose one of {}", sweepable_names())))
            }
            SweepAxis::Temperature { omega_m_abs } => {
                if !(omega_m_abs.is_finite() && omega_m_abs > 0.0) {
                    return Err(Error::Sweep(format!("temperature sweep needs omega_m_abs > 0, got {omega_m_abs}")));
                }
                if self.start < 0.0 {
                    return Err(Error::Sweep("temperature must be >= 0".into()));
                }
            }
            SweepAxis::Field(_) => {}
        }
        // endpoints must give valid parameters
        for x in [self.start, self.stop] {
            self.params_at(x)?.validate()?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        let span = self.stop - self.start;
        (0..n)
            .map(|i| if i + 1 == n { self.stop } else { self.start + span * i as f64 / (n - 1) as f64 })
            .collect()
    }

    /// Parameters at one axis value.
    pub fn params_at(&self, x: f64) -> Result<EffectiveParams> {
        Ok(match self.axis {
            SweepAxis::Field(f) => self.base.with(f, x),
            SweepAxis::Temperature { omega_m_abs } => self.base.with(ParamField::NTh, thermal_occupation(omega_m_abs, x)?),
        })
    }

    /// The same scan with the two optical modes exchanged.
    pub fn mode_swapped(&self) -> Self {
        Self { base: self.base.mode_swapped(), axis: self.axis.mode_swapped(), ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PointOutcome {
    /// Negativities and `μ⁻` for `[MechOpt1, MechOpt2, Opt1Opt2]`.
    Computed { e_n: [f64; 3], mu_minus: [f64; 3] },
    Unstable,
    Marginal,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub n_th: f64,
    pub eigen_stable: bool,
    pub s1: f64,
    pub s2: f64,
    pub max_real_part: f64,
    pub outcome: PointOutcome,
}

impl SweepRow {
    pub fn e_n(&self) -> Option<[f64; 3]> {
        match self.outcome {
            PointOutcome::Computed { e_n, .. } => Some(e_n),
            _ => None,
        }
    }

    pub fn mu_minus(&self) -> Option<[f64; 3]> {
        match self.outcome {
            PointOutcome::Computed { mu_minus, .. } => Some(mu_minus),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub tolerances: Tolerances,
    pub rows: Vec<SweepRow>,
    /// Seconds since the Unix epoch when the sweep finished.
    pub generated_at: u64,
    pub version: &'static str,
}

/// Evaluates one parameter point. Numeric failures end up in the row.
pub fn evaluate_point(p: &EffectiveParams, axis_value: f64, tol: &Tolerances) -> SweepRow {
    let mut row = SweepRow {
        axis_value,
        n_th: p.n_th,
        eigen_stable: false,
        s1: f64::NAN,
        s2: f64::NAN,
        max_real_part: f64::NAN,
        outcome: PointOutcome::Failed(String::new()),
    };
    if let Err(e) = p.validate() {
        row.outcome = PointOutcome::Failed(e.to_string());
        return row;
    }
    let report: StabilityReport = match check_stability_with(p, tol) {
        Ok(r) => r,
        Err(e) => {
            let coeffs = crate::stability::routh_hurwitz_coeffs(p);
            (row.s1, row.s2) = crate::stability::routh_hurwitz_conditions(&coeffs);
            row.outcome = PointOutcome::Failed(e.to_string());
            return row;
        }
    };
    row.eigen_stable = report.eigen_stable;
    row.s1 = report.s1;
    row.s2 = report.s2;
    row.max_real_part = report.max_real_part;
    if report.marginal {
        row.outcome = PointOutcome::Marginal;
        return row;
    }
    if !report.eigen_stable {
        row.outcome = PointOutcome::Unstable;
        return row;
    }
    row.outcome = match solve_lyapunov_with(&build_drift(p), &build_diffusion(p), tol)
        .and_then(|sol| all_negativities_with(&sol.covariance, tol))
    {
        Ok(n) => PointOutcome::Computed { e_n: n.map(|x| x.e_n), mu_minus: n.map(|x| x.mu_minus) },
        Err(e) => PointOutcome::Failed(e.to_string()),
    };
    row
}

fn evaluate_at(spec: &SweepSpec, x: f64, tol: &Tolerances) -> SweepRow {
    match spec.params_at(x) {
        Ok(p) => evaluate_point(&p, x, tol),
        Err(e) => SweepRow {
            axis_value: x,
            n_th: f64::NAN,
            eigen_stable: false,
            s1: f64::NAN,
            s2: f64::NAN,
            max_real_part: f64::NAN,
            outcome: PointOutcome::Failed(e.to_string()),
        },
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, &Tolerances::default())
}

/// Runs the scan, in parallel when the `parallel` feature is on.
pub fn run_sweep_with(spec: &SweepSpec, tol: &Tolerances) -> Result<SweepResult> {
    spec.validate()?;
    let grid = spec.grid();
    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        grid.par_iter().map(|&x| evaluate_at(spec, x, tol)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows = grid.iter().map(|&x| evaluate_at(spec, x, tol)).collect();
    Ok(finish(spec, tol, rows))
}

pub fn run_sweep_serial(spec: &SweepSpec, tol: &Tolerances) -> Result<SweepResult> {
    spec.validate()?;
    let rows = spec.grid().iter().map(|&x| evaluate_at(spec, x, tol)).collect();
    Ok(finish(spec, tol, rows))
}

fn finish(spec: &SweepSpec, tol: &Tolerances, rows: Vec<SweepRow>) -> SweepResult {
    SweepResult { spec: *spec, tolerances: *tol, rows, generated_at: unix_now(), version: crate::VERSION }
}

fn unix_now() -> u64 {
    #[cfg(not(target_arch = "wasm32"))]
    {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
    #[cfg(target_arch = "wasm32")]
    {
        0
    }
}

/// Runs `spec` and its optical-mode mirror, and checks that
/// `(E1, E2, E3)` of one equals `(E2, E1, E3)` of the other pointwise.
pub fn swap_symmetry_check(spec: &SweepSpec) -> Result<bool> {
    swap_symmetry_check_with(spec, &Tolerances::default())
}

pub fn swap_symmetry_check_with(spec: &SweepSpec, tol: &Tolerances) -> Result<bool> {
    let a = run_sweep_with(spec, tol)?;
    let b = run_sweep_with(&spec.mode_swapped(), tol)?;
    Ok(rows_are_mirrors(&a.rows, &b.rows, tol.swap))
}

/// `true` when `b` is the optical-mode mirror of `a` within `tol`.
pub fn rows_are_mirrors(a: &[SweepRow], b: &[SweepRow], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(ra, rb)| {
            ra.eigen_stable == rb.eigen_stable
                && match (ra.e_n(), rb.e_n()) {
                    (Some(ea), Some(eb)) => {
                        (ea[0] - eb[1]).abs() <= tol && (ea[1] - eb[0]).abs() <= tol && (ea[2] - eb[2]).abs() <= tol
                    }
                    (None, None) => true,
                    _ => false,
                }
        })
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NA".to_string()
    }
}

impl SweepResult {
    /// Header line plus one line per grid point.
    pub fn csv_body(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 256);
        out.push_str(CSV_HEADER);
        out.push('\n');
        let axis = self.spec.axis.name();
        for row in &self.rows {
            let (en, mu) = match row.outcome {
                PointOutcome::Computed { e_n, mu_minus } => (e_n.map(fmt_num), mu_minus.map(fmt_num)),
                _ => (["NA", "NA", "NA"].map(String::from), ["NA", "NA", "NA"].map(String::from)),
            };
            let mut note = match &row.outcome {
                PointOutcome::Computed { .. } => String::new(),
                PointOutcome::Unstable => "unstable".to_string(),
                PointOutcome::Marginal => "marginal".to_string(),
                PointOutcome::Failed(msg) => format!("error: {}", sanitize(msg)),
            };
            if matches!(self.spec.axis, SweepAxis::Temperature { .. }) {
                if !note.is_empty() {
                    note.push_str("; ");
                }
                let _ = write!(note, "n_th={}", fmt_num(row.n_th));
            }
            let _ = writeln!(
                out,
                "{axis},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_num(row.axis_value),
                row.eigen_stable,
                fmt_num(row.s1),
                fmt_num(row.s2),
                en[0],
                en[1],
                en[2],
                mu[0],
                mu[1],
                mu[2],
                note
            );
        }
        out
    }

    /// `#`-prefixed metadata lines followed by [`csv_body`](Self::csv_body).
    pub fn to_csv(&self) -> String {
        let s = &self.spec;
        let b = &s.base;
        let t = &self.tolerances;
        let mut out = String::new();
        let _ = writeln!(out, "# optomech {}", self.version);
        let _ = writeln!(out, "# generated_unix={}", self.generated_at);
        let _ = writeln!(out, "# axis={} start={:?} stop={:?} points={}", s.axis, s.start, s.stop, s.points);
        if let SweepAxis::Temperature { omega_m_abs } = s.axis {
            let _ = writeln!(out, "# omega_m_abs={omega_m_abs:?}");
        }
        let base: Vec<String> = ParamField::ALL.iter().map(|&f| format!("{f}={:?}", b.get(f))).collect();
        let _ = writeln!(out, "# base {}", base.join(" "));
        let _ = writeln!(
            out,
            "# tolerances lyapunov_residual={:?} marginal={:?} discriminant_clamp={:?} discriminant_error={:?}",
            t.lyapunov_residual, t.marginal, t.discriminant_clamp, t.discriminant_error
        );
        out.push_str(&self.csv_body());
        out
    }
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], " ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(axis: ParamField, base: EffectiveParams, start: f64, stop: f64, points: usize) -> SweepSpec {
        SweepSpec { base, axis: SweepAxis::Field(axis), start, stop, points }
    }

    fn fig2a_base() -> EffectiveParams {
        EffectiveParams {
            omega_m: 1.0,
            gamma_m: 1e-5,
            kappa1: 1.0,
            kappa2: 0.5,
            omega_eff1: 0.0,
            omega_eff2: -1.0,
            chi1: 0.1,
            chi2: 0.9,
            eta: 0.8,
            n_th: 20.0,
        }
    }

    #[test]
    fn grid_hits_endpoints() {
        let s = spec(ParamField::OmegaEff1, fig2a_base(), -5.0, 5.0, 501);
        let g = s.grid();
        assert_eq!(g.len(), 501);
        assert_eq!(g[0], -5.0);
        assert_eq!(g[500], 5.0);
        assert!((g[250]).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = fig2a_base();
        assert!(spec(ParamField::Chi1, base, 1.0, 0.0, 10).validate().is_err());
        assert!(spec(ParamField::Chi1, base, 0.0, 1.0, 1).validate().is_err());
        assert!(spec(ParamField::Kappa1, base, -1.0, 1.0, 10).validate().is_err());
        assert!(spec(ParamField::OmegaM, base, 0.5, 1.0, 10).validate().is_err());
        let t = SweepSpec { base, axis: SweepAxis::Temperature { omega_m_abs: 0.0 }, start: 0.0, stop: 1.0, points: 3 };
        assert!(t.validate().is_err());
        assert!(SweepAxis::parse("bogus", 1.0).is_err());
        assert_eq!(SweepAxis::parse("n-th", 1.0).unwrap(), SweepAxis::Field(ParamField::NTh));
    }

    #[test]
    fn unstable_rows_carry_no_negativity() {
        let base = EffectiveParams { chi2: 0.01, eta: 0.01, ..EffectiveParams::figure4_base() };
        let s = spec(ParamField::Chi1, base, 0.0, 2.0, 41);
        let r = run_sweep(&s).unwrap();
        assert!(r.rows.iter().any(|row| !row.eigen_stable));
        for row in &r.rows {
            assert_eq!(row.e_n().is_some(), row.eigen_stable, "{row:?}");
        }
        let csv = r.csv_body();
        for line in csv.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 12);
            if cols[2] == "false" {
                assert!(cols[5..11].iter().all(|c| *c == "NA"), "{line}");
                assert_eq!(cols[11], "unstable");
            }
        }
    }

    #[test]
    fn csv_format() {
        let s = spec(ParamField::OmegaEff1, fig2a_base(), -1.0, 1.0, 3);
        let r = run_sweep(&s).unwrap();
        let body = r.csv_body();
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let first = lines.next().unwrap();
        assert!(first.starts_with("omega_eff1,-1.0000000000000000e0,true,"), "{first}");
        assert_eq!(body.lines().count(), 4);
        let csv = r.to_csv();
        assert!(csv.lines().take_while(|l| l.starts_with('#')).count() >= 4);
        assert!(csv.ends_with(&body));
    }

    #[test]
    fn temperature_rows_echo_occupation() {
        let s = SweepSpec {
            base: fig2a_base(),
            axis: SweepAxis::Temperature { omega_m_abs: crate::model::OMEGA_M_DEFAULT_ABS },
            start: 0.0,
            stop: 0.6,
            points: 3,
        };
        let r = run_sweep(&s).unwrap();
        assert_eq!(r.rows[0].n_th, 0.0);
        assert!((r.rows[2].n_th - 1250.0).abs() < 12.5);
        for line in r.csv_body().lines().skip(1) {
            assert!(line.split(',').nth(11).unwrap().contains("n_th="), "{line}");
        }
    }

    #[test]
    fn parallel_and_serial_agree_bitwise() {
        let s = spec(ParamField::OmegaEff1, fig2a_base(), -5.0, 5.0, 61);
        let tol = Tolerances::default();
        let a = run_sweep_with(&s, &tol).unwrap();
        let b = run_sweep_serial(&s, &tol).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.csv_body(), b.csv_body());
    }

    #[test]
    fn symmetric_base_gives_equal_optomechanical_negativities() {
        let base = EffectiveParams {
            kappa1: 0.7,
            kappa2: 0.7,
            chi1: 0.4,
            chi2: 0.4,
            omega_eff1: -1.0,
            omega_eff2: -1.0,
            ..fig2a_base()
        };
        let r = run_sweep(&spec(ParamField::Eta, base, 0.0, 1.0, 21)).unwrap();
        for row in &r.rows {
            if let Some(e) = row.e_n() {
                assert!((e[0] - e[1]).abs() < 1e-9, "{row:?}");
            }
        }
        assert!(swap_symmetry_check(&spec(ParamField::Eta, base, 0.0, 1.0, 21)).unwrap());
    }

    #[test]
    fn random_asymmetric_spec_is_swap_symmetric() {
        let base = EffectiveParams {
            gamma_m: 0.013,
            kappa1: 0.37,
            kappa2: 1.21,
            omega_eff1: -0.6,
            omega_eff2: 1.4,
            chi1: 0.33,
            chi2: 0.52,
            eta: 0.27,
            n_th: 4.0,
            ..fig2a_base()
        };
        assert!(swap_symmetry_check(&spec(ParamField::OmegaEff2, base, -3.0, 3.0, 41)).unwrap());
        assert!(swap_symmetry_check(&spec(ParamField::Chi1, base, 0.0, 1.5, 41)).unwrap());
    }
}
