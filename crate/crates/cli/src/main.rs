use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use optomech::entanglement::{all_negativities_with, BipartitePair};
use optomech::lyapunov::solve_lyapunov_with;
use optomech::model::{build_diffusion, build_drift, EffectiveParams, ParamField};
use optomech::plot::render_svg;
use optomech::presets::{verify_presets, Figure};
use optomech::selfcheck::{self, SelfcheckConfig};
use optomech::stability::check_stability_with;
use optomech::sweep::{run_sweep_with, PointOutcome, SweepAxis, SweepResult, SweepSpec, DEFAULT_POINTS};
use serde_json::json;

mod config;

use config::{tolerance_override, RunConfig};

/// Steady-state entanglement of a two-cavity optomechanical system.
#[derive(Parser, Debug)]
#[command(name = "optomech", version)]
struct Cli {
    /// INI config file with [system], [sweep], [output] and [tolerances] sections
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print machine-readable JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Override a tolerance, e.g. --tol lyapunov_residual=1e-10
    #[arg(long = "tol", value_name = "KEY=VALUE", value_parser = tolerance_override, global = true)]
    tol: Vec<(String, f64)>,
    /// More log output (repeat for more)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stability, covariance diagnostics and negativities at one parameter point
    Point {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Scan one parameter and write CSV
    Sweep {
        #[command(flatten)]
        system: SystemArgs,
        /// omega_eff1, omega_eff2, n_th, temperature, chi1, chi2 or eta
        #[arg(long)]
        axis: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        start: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        stop: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one built-in figure preset
    Figure {
        /// fig2a, fig2b, fig2c, fig2d, fig3a, fig3b, fig4a or fig4b
        name: String,
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the oracle and invariant suites
    Selfcheck {
        #[arg(long, default_value_t = selfcheck::DEFAULT_SEED)]
        seed: u64,
        /// Random draws for the cheap suites
        #[arg(long, default_value_t = 500)]
        draws: usize,
        /// Random draws for the time-integration suite
        #[arg(long, default_value_t = 12)]
        integration_draws: usize,
        /// Flip the sign of one drift-matrix entry (mutation test)
        #[arg(long, hide = true)]
        inject_drift_sign_error: bool,
    },
}

#[derive(Args, Debug, Default)]
struct SystemArgs {
    /// Start from a figure preset (or `decoupled`) before applying overrides
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    gamma_m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_eff1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_eff2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    chi1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    chi2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Mean thermal phonon number
    #[arg(long, allow_negative_numbers = true)]
    n_th: Option<f64>,
    /// Bath temperature in kelvin, converted to n_th
    #[arg(long, allow_negative_numbers = true, conflicts_with = "n_th")]
    temperature: Option<f64>,
    /// Mechanical frequency in rad/s, used for kelvin conversions
    #[arg(long, allow_negative_numbers = true)]
    omega_m_abs: Option<f64>,
}

impl SystemArgs {
    fn to_config(&self) -> RunConfig {
        let fields = [
            (ParamField::GammaM, self.gamma_m),
            (ParamField::Kappa1, self.kappa1),
            (ParamField::Kappa2, self.kappa2),
            (ParamField::OmegaEff1, self.omega_eff1),
            (ParamField::OmegaEff2, self.omega_eff2),
            (ParamField::Chi1, self.chi1),
            (ParamField::Chi2, self.chi2),
            (ParamField::Eta, self.eta),
            (ParamField::NTh, self.n_th),
        ];
        RunConfig {
            preset: self.preset.clone(),
            fields: fields.into_iter().filter_map(|(f, v)| v.map(|v| (f, v))).collect(),
            temperature: self.temperature,
            omega_m_abs: self.omega_m_abs,
            ..Default::default()
        }
    }
}

#[derive(Args, Debug, Default)]
struct OutputArgs {
    /// CSV destination (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG chart next to the CSV
    #[arg(long)]
    plot: bool,
}

impl OutputArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig { out: self.out.clone(), plot: self.plot.then_some(true), ..Default::default() }
    }
}

#[derive(Debug)]
pub enum CliError {
    Numeric(String),
    Usage(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numeric(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("optomech: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    verify_presets().map_err(|e| CliError::Numeric(format!("preset table mismatch: {e}")))?;
    configure_threads()?;

    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let global = RunConfig { tolerances: cli.tol.clone(), json: cli.json.then_some(true), ..Default::default() };

    match &cli.command {
        Command::Point { system } => cmd_point(&file.overlay(system.to_config()).overlay(global)),
        Command::Sweep { system, axis, start, stop, points, output } => {
            let flags = RunConfig { axis: axis.clone(), start: *start, stop: *stop, points: *points, ..system.to_config() };
            cmd_sweep(&file.overlay(flags).overlay(output.to_config()).overlay(global))
        }
        Command::Figure { name, points, output } => {
            let figure: Figure = name.parse().map_err(|e: optomech::Error| CliError::Usage(e.to_string()))?;
            let flags = RunConfig { points: *points, ..output.to_config() };
            cmd_figure(figure, &file.overlay(flags).overlay(global))
        }
        Command::Selfcheck { seed, draws, integration_draws, inject_drift_sign_error } => {
            let cfg = file.overlay(global);
            let sc = SelfcheckConfig {
                seed: *seed,
                draws: *draws,
                integration_draws: *integration_draws,
                tolerances: cfg.tolerances()?,
                drift: if *inject_drift_sign_error { selfcheck::drift_with_sign_error } else { build_drift },
            };
            cmd_selfcheck(&sc, cfg.json.unwrap_or(false))
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("OPTOMECH_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("OPTOMECH_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn cmd_point(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let p = cfg.params()?;
    let tol = cfg.tolerances()?;
    let report = check_stability_with(&p, &tol).map_err(|e| CliError::Numeric(e.to_string()))?;

    let mut record = json!({
        "params": p,
        "stability": {
            "eigen_stable": report.eigen_stable,
            "marginal": report.marginal,
            "max_real_part": report.max_real_part,
            "s1": report.s1,
            "s2": report.s2,
            "rh_pass": report.rh_pass,
        },
    });
    let mut text = format_params(&p);
    let verdict = if report.marginal {
        "marginal"
    } else if report.eigen_stable {
        "stable"
    } else {
        "unstable"
    };
    text.push_str(&format!(
        "stability   {verdict} (max Re lambda = {:.6e})\n  S1 = {:.6e}\n  S2 = {:.6e}\n",
        report.max_real_part, report.s1, report.s2
    ));
    if report.rh_disagrees() {
        text.push_str("  note: Routh-Hurwitz conditions pass but an eigenvalue is not in the left half-plane\n");
    }

    let mut outcome = Ok(ExitCode::SUCCESS);
    if report.usable() {
        match solve_lyapunov_with(&build_drift(&p), &build_diffusion(&p), &tol) {
            Ok(sol) => {
                let v = &sol.covariance;
                let nu = v.min_symplectic_eigenvalue();
                text.push_str(&format!(
                    "covariance  residual {:.3e}, asymmetry {:.3e}, min eigenvalue {:.6e}, min symplectic eigenvalue {:.12}\n",
                    sol.residual,
                    sol.asymmetry,
                    v.min_eigenvalue(),
                    nu
                ));
                if !v.is_physical(tol.symplectic_slack) {
                    text.push_str("  warning: covariance violates the uncertainty bound\n");
                }
                record["covariance"] = json!({
                    "matrix": v.matrix().row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
                    "residual": sol.residual,
                    "asymmetry": sol.asymmetry,
                    "min_symplectic_eigenvalue": nu,
                    "physical": v.is_physical(tol.symplectic_slack),
                });
                match all_negativities_with(v, &tol) {
                    Ok(ns) => {
                        for (pair, n) in BipartitePair::ALL.iter().zip(&ns) {
                            text.push_str(&format!("E_N {:<10} {:.12}   (mu- = {:.12})\n", pair.to_string(), n.e_n, n.mu_minus));
                        }
                        record["negativity"] = json!(BipartitePair::ALL
                            .iter()
                            .zip(&ns)
                            .map(|(pair, n)| json!({"pair": pair.to_string(), "e_n": n.e_n, "mu_minus": n.mu_minus}))
                            .collect::<Vec<_>>());
                    }
                    Err(e) => outcome = Err(CliError::Numeric(e.to_string())),
                }
            }
            Err(e) => outcome = Err(CliError::Numeric(e.to_string())),
        }
    } else {
        text.push_str("E_N         not computed at a non-stable point\n");
    }

    if let Err(e) = &outcome {
        record["error"] = json!(e.to_string());
    }
    if cfg.json.unwrap_or(false) {
        println!("{}", serde_json::to_string_pretty(&record).expect("json"));
    } else {
        print!("{text}");
    }
    outcome
}

fn format_params(p: &EffectiveParams) -> String {
    let mut s = String::from("parameters ");
    for f in ParamField::ALL {
        s.push_str(&format!(" {}={}", f, p.get(f)));
    }
    s.push('\n');
    s
}

fn cmd_sweep(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let base = cfg.params()?;
    let axis_name = cfg.axis.as_deref().ok_or_else(|| CliError::Usage("sweep needs --axis".into()))?;
    let axis = SweepAxis::parse(axis_name, cfg.omega_m_abs()).map_err(|e| CliError::Usage(e.to_string()))?;
    let (Some(start), Some(stop)) = (cfg.start, cfg.stop) else {
        return Err(CliError::Usage("sweep needs --start and --stop".into()));
    };
    let spec = SweepSpec { base, axis, start, stop, points: cfg.points.unwrap_or(DEFAULT_POINTS) };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let title = format!("sweep over {axis}");
    execute_sweep(&spec, cfg, &title, "sweep")
}

fn cmd_figure(figure: Figure, cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let mut spec = figure.spec();
    if let Some(points) = cfg.points {
        spec.points = points;
    }
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    execute_sweep(&spec, cfg, figure.name(), figure.name())
}

fn execute_sweep(spec: &SweepSpec, cfg: &RunConfig, title: &str, stem: &str) -> Result<ExitCode, CliError> {
    let tol = cfg.tolerances()?;
    let result = run_sweep_with(spec, &tol).map_err(|e| CliError::Usage(e.to_string()))?;
    let csv = result.to_csv();
    match &cfg.out {
        Some(path) => fs::write(path, &csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(csv.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
    }
    if cfg.plot.unwrap_or(false) {
        let svg_path = cfg.out.as_ref().map_or_else(|| PathBuf::from(format!("{stem}.svg")), |p| p.with_extension("svg"));
        write_plot(&result, title, &svg_path);
    }
    summarize(&result)
}

fn write_plot(result: &SweepResult, title: &str, path: &Path) {
    match fs::write(path, render_svg(result, title)) {
        Ok(()) => log::info!("wrote {}", path.display()),
        Err(e) => log::warn!("could not write plot {}: {e}", path.display()),
    }
}

fn summarize(result: &SweepResult) -> Result<ExitCode, CliError> {
    let count = |pred: fn(&PointOutcome) -> bool| result.rows.iter().filter(|r| pred(&r.outcome)).count();
    let failed = count(|o| matches!(o, PointOutcome::Failed(_)));
    log::info!(
        "{} points: {} computed, {} unstable, {} marginal, {} failed",
        result.rows.len(),
        count(|o| matches!(o, PointOutcome::Computed { .. })),
        count(|o| matches!(o, PointOutcome::Unstable)),
        count(|o| matches!(o, PointOutcome::Marginal)),
        failed
    );
    if failed > 0 {
        return Err(CliError::Numeric(format!("{failed} of {} grid points failed; see the note column", result.rows.len())));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_selfcheck(cfg: &SelfcheckConfig, json_out: bool) -> Result<ExitCode, CliError> {
    let outcomes = selfcheck::run_all(cfg);
    if json_out {
        println!("{}", serde_json::to_string_pretty(&outcomes).expect("json"));
    } else {
        for o in &outcomes {
            println!("{o}");
        }
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(CliError::Numeric(format!("failed suites: {}", failed.join(", "))))
    }
}
