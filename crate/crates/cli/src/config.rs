//! INI config files merged with command-line overrides.

use std::path::{Path, PathBuf};

use ini::Ini;
use optomech::model::{thermal_occupation, EffectiveParams, ParamField, OMEGA_M_DEFAULT_ABS};
use optomech::presets::Figure;
use optomech::Tolerances;

use crate::CliError;

/// Everything a subcommand needs, after file values and flags are merged.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub fields: Vec<(ParamField, f64)>,
    pub temperature: Option<f64>,
    pub omega_m_abs: Option<f64>,
    pub axis: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub out: Option<PathBuf>,
    pub plot: Option<bool>,
    pub json: Option<bool>,
    pub tolerances: Vec<(String, f64)>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Usage(format!("malformed config: {e}")))?;
        let mut cfg = RunConfig::default();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, value) in props.iter() {
                let key = key.trim().replace('-', "_").to_ascii_lowercase();
                cfg.set(section, &key, strip_inline_comment(value))?;
            }
        }
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), CliError> {
        let unknown = || CliError::Usage(format!("unknown key `{key}` in [{section}]"));
        match section {
            "system" => match key {
                "preset" => self.preset = Some(value.to_string()),
                "temperature" => self.temperature = Some(number(key, value)?),
                "omega_m_abs" => self.omega_m_abs = Some(number(key, value)?),
                _ => {
                    let field: ParamField = key.parse().map_err(|_| unknown())?;
                    self.fields.push((field, number(key, value)?));
                }
            },
            "sweep" => match key {
                "axis" => self.axis = Some(value.to_string()),
                "start" => self.start = Some(number(key, value)?),
                "stop" => self.stop = Some(number(key, value)?),
                "points" => {
                    self.points = Some(value.parse().map_err(|_| CliError::Usage(format!("points: not a count: `{value}`")))?)
                }
                _ => return Err(unknown()),
            },
            "output" => match key {
                "out" => self.out = Some(PathBuf::from(value)),
                "plot" => self.plot = Some(boolean(key, value)?),
                "json" => self.json = Some(boolean(key, value)?),
                _ => return Err(unknown()),
            },
            "tolerances" => self.tolerances.push((key.to_string(), number(key, value)?)),
            "" => return Err(CliError::Usage(format!("key `{key}` outside of a section"))),
            _ => return Err(CliError::Usage(format!("unknown section [{section}]"))),
        }
        Ok(())
    }

    /// Applies `other` on top of `self`; set values in `other` win.
    pub fn overlay(mut self, other: RunConfig) -> Self {
        self.preset = other.preset.or(self.preset);
        if other.temperature.is_some() || other.fields.iter().any(|(f, _)| *f == ParamField::NTh) {
            // the later layer decides how the bath is specified
            self.temperature = other.temperature;
            self.fields.retain(|(f, _)| *f != ParamField::NTh);
        }
        self.fields.extend(other.fields);
        self.omega_m_abs = other.omega_m_abs.or(self.omega_m_abs);
        self.axis = other.axis.or(self.axis);
        self.start = other.start.or(self.start);
        self.stop = other.stop.or(self.stop);
        self.points = other.points.or(self.points);
        self.out = other.out.or(self.out);
        self.plot = other.plot.or(self.plot);
        self.json = other.json.or(self.json);
        self.tolerances.extend(other.tolerances);
        self
    }

    pub fn omega_m_abs(&self) -> f64 {
        self.omega_m_abs.unwrap_or(OMEGA_M_DEFAULT_ABS)
    }

    /// Base parameters: the preset (or the decoupled system), then field overrides.
    pub fn params(&self) -> Result<EffectiveParams, CliError> {
        let mut p = match self.preset.as_deref() {
            None | Some("decoupled") => EffectiveParams::decoupled(),
            Some(name) => name.parse::<Figure>().map_err(|e| CliError::Usage(e.to_string()))?.spec().base,
        };
        for &(field, value) in &self.fields {
            if field == ParamField::OmegaM && value != 1.0 {
                return Err(CliError::Usage("omega_m is the unit of all rates and must be 1; use omega_m_abs for kelvin conversions".into()));
            }
            p.set(field, value);
        }
        if let Some(t) = self.temperature {
            p.n_th = thermal_occupation(self.omega_m_abs(), t).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }

    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut value = serde_json::to_value(Tolerances::default()).expect("tolerances serialize");
        let map = value.as_object_mut().expect("tolerances are a struct");
        for (key, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(CliError::Usage(format!("tolerance {key} must be finite and >= 0, got {v}")));
            }
            if !map.contains_key(key.as_str()) {
                let known: Vec<&str> = map.keys().map(String::as_str).collect();
                return Err(CliError::Usage(format!("unknown tolerance `{key}`; known: {}", known.join(", "))));
            }
            map.insert(key.clone(), serde_json::json!(v));
        }
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("tolerances: {e}")))
    }
}

/// Drops a trailing `; ...` or `# ...` that follows whitespace.
fn strip_inline_comment(value: &str) -> &str {
    let cut = value
        .char_indices()
        .zip(value.chars().skip(1))
        .find(|((_, c), next)| c.is_whitespace() && matches!(next, ';' | '#'))
        .map_or(value.len(), |((i, _), _)| i);
    value[..cut].trim()
}

fn number(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("{key}: not a finite number: `{value}`")))
}

fn boolean(key: &str, value: &str) -> Result<bool, CliError> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(CliError::Usage(format!("{key}: not a boolean: `{value}`"))),
    }
}

/// Parses `KEY=VALUE` for `--tol`.
pub fn tolerance_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().replace('-', "_"), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
; comment
[system]
preset = fig4a
chi1 = 0.4
n-th = 5   ; phonons

[sweep]
axis = chi1
start = 0
stop = 0.9
points = 10

[output]
out = a;b.csv
plot = yes

[tolerances]
lyapunov_residual = 1e-10
";

    #[test]
    fn parses_all_sections() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        let p = cfg.params().unwrap();
        assert_eq!((p.chi1, p.chi2, p.n_th), (0.4, 0.01, 5.0));
        assert_eq!(cfg.points, Some(10));
        assert_eq!(cfg.plot, Some(true));
        assert_eq!(cfg.out, Some(PathBuf::from("a;b.csv")));
        assert_eq!(cfg.tolerances().unwrap().lyapunov_residual, 1e-10);
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::parse(SAMPLE).unwrap();
        let flags = RunConfig { fields: vec![(ParamField::Chi1, 0.7)], temperature: Some(0.0), ..Default::default() };
        let p = file.overlay(flags).params().unwrap();
        assert_eq!(p.chi1, 0.7);
        assert_eq!(p.n_th, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "[system]\nchi3 = 1",
            "[system]\nchi1 = abc",
            "[sweep]\npoints = -3",
            "[output]\nplot = maybe",
            "[nonsense]\na = 1",
            "chi1 = 1",
        ] {
            assert!(matches!(RunConfig::parse(bad), Err(CliError::Usage(_))), "{bad}");
        }
        let cfg = RunConfig::parse("[tolerances]\nbogus = 1").unwrap();
        assert!(cfg.tolerances().is_err());
        let cfg = RunConfig::parse("[system]\nkappa1 = -1").unwrap();
        assert!(cfg.params().is_err());
    }

    #[test]
    fn tolerance_flag_syntax() {
        assert_eq!(tolerance_override("swap=0").unwrap(), ("swap".to_string(), 0.0));
        assert!(tolerance_override("swap").is_err());
    }
}
