//! TOML scenario files.
//!
//! Every frequency accepts a number in rad/s or an expression such as
//! `"4.20*gamma13"`. `gamma13` itself must be absolute.

use std::f64::consts::PI;

use biphoton_core::biphoton::{GridOverrides, Scenario};
use biphoton_core::medium::Geometry;
use biphoton_core::phasematch::PhiVariant;
use biphoton_core::{DriveParams, MediumParams, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::freq::Freq;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub medium: MediumConfig,
    pub drive: DriveConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub histogram: HistogramConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_name() -> String {
    "scenario".into()
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub gamma13: Freq,
    pub gamma12: Freq,
    pub gamma14: Freq,
    /// Give exactly one of `optical_depth` and `density` (1/m³).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optical_depth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    /// m²
    pub sigma13: f64,
    /// m
    pub length: f64,
    #[serde(default = "one")]
    pub dipole_scale: f64,
    #[serde(default = "one")]
    pub stokes_dipole_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub omega_c: Freq,
    pub omega_p: Freq,
    pub delta_p: Freq,
    /// Vacuum wavelength of the anti-Stokes line (m).
    pub anti_stokes_wavelength: f64,
    /// ϖas − ϖs (rad/s), the ground-state splitting for the double-Λ scheme.
    pub stokes_shift: Freq,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub phi_variant: PhiVariant,
    #[serde(default = "yes")]
    pub conjugate_stokes: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            phi_variant: PhiVariant::Exact,
            conjugate_stokes: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Full ω span.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Freq>,
}

/// Coincidence binning; unset fields follow the scenario's time scales.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    /// s
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
    /// Accidental-coincidence rate added to every bin.
    #[serde(default)]
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted key, e.g. `medium.optical_depth` or `drive.omega_c`.
    pub parameter: String,
    #[serde(default)]
    pub values: Vec<toml::Value>,
}

pub fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Deserializes with the failing field path in the message.
pub fn from_table(table: toml::Table) -> Result<ScenarioConfig> {
    serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })
}

pub fn to_table(cfg: &ScenarioConfig) -> Result<toml::Table> {
    toml::Table::try_from(cfg).map_err(|e| CliError::Config(e.to_string()))
}

pub fn to_toml_string(cfg: &ScenarioConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_str(text: &str) -> Result<ScenarioConfig> {
    from_table(parse_table(text)?)
}

pub fn load_file(path: &std::path::Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    load_str(&text)
}

/// `key.path=value`; the value is read as TOML, falling back to a bare string.
pub fn apply_assignment(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got '{assignment}'")))?;
    set_path(table, key.trim(), parse_value(raw.trim()))
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

pub fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad key '{key}'")));
    }
    let (last, parents) = parts.split_last().unwrap();
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("'{p}' in '{key}' is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

pub fn get_path<'a>(table: &'a toml::Table, key: &str) -> Option<&'a toml::Value> {
    let mut parts = key.split('.');
    let mut cur = table.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

impl ScenarioConfig {
    fn gamma13(&self) -> Result<f64> {
        match self.medium.gamma13 {
            Freq::RadPerSec(v) if v > 0.0 => Ok(v),
            Freq::RadPerSec(v) => Err(CliError::Config(format!("medium.gamma13: {v} must be > 0"))),
            Freq::Gamma13(_) => Err(CliError::Config(
                "medium.gamma13: must be given in rad/s, not relative to itself".into(),
            )),
        }
    }

    pub fn medium_params(&self) -> Result<MediumParams> {
        let g13 = self.gamma13()?;
        let m = &self.medium;
        let density = match (m.optical_depth, m.density) {
            (Some(od), None) => od / (m.sigma13 * m.length),
            (None, Some(n)) => n,
            _ => {
                return Err(CliError::Config(
                    "medium: give exactly one of optical_depth and density".into(),
                ))
            }
        };
        let p = MediumParams {
            gamma12: m.gamma12.to_rad(g13),
            gamma13: g13,
            gamma14: m.gamma14.to_rad(g13),
            density,
            sigma13: m.sigma13,
            length: m.length,
            dipole_scale: m.dipole_scale,
            stokes_dipole_ratio: m.stokes_dipole_ratio,
        };
        p.validate()
            .map_err(|e| CliError::Config(format!("medium: {e}")))?;
        Ok(p)
    }

    pub fn drive_params(&self) -> Result<DriveParams> {
        let g13 = self.gamma13()?;
        let d = &self.drive;
        if !(d.anti_stokes_wavelength > 0.0 && d.anti_stokes_wavelength.is_finite()) {
            return Err(CliError::Config(format!(
                "drive.anti_stokes_wavelength: {} must be > 0",
                d.anti_stokes_wavelength
            )));
        }
        let w_as = 2.0 * PI * SPEED_OF_LIGHT / d.anti_stokes_wavelength;
        let p = DriveParams {
            omega_c: d.omega_c.to_rad(g13),
            omega_p: d.omega_p.to_rad(g13),
            delta_p: d.delta_p.to_rad(g13),
            omega_as_central: w_as,
            omega_s_central: w_as - d.stokes_shift.to_rad(g13),
            geometry: d.geometry,
            stokes_transition: None,
        };
        p.validate()
            .map_err(|e| CliError::Config(format!("drive: {e}")))?;
        Ok(p)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Ok(Scenario {
            medium: self.medium_params()?,
            drive: self.drive_params()?,
            variant: self.model.phi_variant,
            conjugate_stokes: self.model.conjugate_stokes,
        })
    }

    pub fn grid_overrides(&self) -> Result<GridOverrides> {
        let g13 = self.gamma13()?;
        if let Some(n) = self.grid.samples {
            if n < 4 || !n.is_power_of_two() {
                return Err(CliError::Config(format!(
                    "grid.samples: {n} must be a power of two >= 4"
                )));
            }
        }
        let span = self.grid.span.map(|f| f.to_rad(g13));
        if let Some(s) = span {
            if !(s > 0.0 && s.is_finite()) {
                return Err(CliError::Config(format!("grid.span: {s} must be > 0")));
            }
        }
        Ok(GridOverrides {
            samples: self.grid.samples,
            span,
        })
    }
}

/// Built-in scenarios. `fig2` runs without phase matching (Φ ≡ 1), which is
/// the setting its damped-Rabi shape assumes; `fig3` uses the exact Φ.
pub fn preset(name: &str) -> Result<toml::Table> {
    let text = match name {
        "fig2" => FIG2,
        "fig3" => FIG3,
        other => {
            return Err(CliError::Config(format!(
                "unknown preset '{other}' (expected fig2 or fig3)"
            )))
        }
    };
    parse_table(text)
}

const FIG2: &str = r#"
name = "fig2"

[medium]
gamma13 = "2pi*3e6"
gamma14 = "1*gamma13"
gamma12 = "0.6*gamma13"
optical_depth = 11.0
sigma13 = 3e-13
length = 0.015

[drive]
omega_c = "4*gamma13"
omega_p = "0.8*gamma13"
delta_p = "-7.5*gamma13"
anti_stokes_wavelength = 795e-9
stokes_shift = "2pi*6.834e9"
geometry = "backward"

[model]
phi_variant = "unity"
conjugate_stokes = true
"#;

const FIG3: &str = r#"
name = "fig3"

[medium]
gamma13 = "2pi*3e6"
gamma14 = "1*gamma13"
gamma12 = "0.02*gamma13"
optical_depth = 53.0
sigma13 = 3e-13
length = 0.015

[drive]
omega_c = "4.20*gamma13"
omega_p = "1.16*gamma13"
delta_p = "48.67*gamma13"
anti_stokes_wavelength = 795e-9
stokes_shift = "2pi*6.834e9"
geometry = "backward"

[model]
phi_variant = "exact"
conjugate_stokes = true
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load_and_round_trip() {
        for name in ["fig2", "fig3"] {
            let cfg = from_table(preset(name).unwrap()).unwrap();
            let again = load_str(&to_toml_string(&cfg).unwrap()).unwrap();
            assert_eq!(cfg, again);
            cfg.scenario().unwrap();
        }
    }

    #[test]
    fn fig3_rates() {
        let cfg = from_table(preset("fig3").unwrap()).unwrap();
        let s = cfg.scenario().unwrap();
        let g = 2.0 * PI * 3e6;
        assert!((s.medium.gamma12 - 0.02 * g).abs() < 1e-9 * g);
        assert!((s.drive.omega_c - 4.2 * g).abs() < 1e-9 * g);
        assert!((s.medium.optical_depth() - 53.0).abs() < 1e-9);
        assert_eq!(s.variant, PhiVariant::Exact);
    }

    #[test]
    fn assignments_and_paths() {
        let mut t = preset("fig2").unwrap();
        apply_assignment(&mut t, "drive.omega_c=9*gamma13").unwrap();
        apply_assignment(&mut t, "medium.optical_depth = 20").unwrap();
        apply_assignment(&mut t, "model.phi_variant=exact").unwrap();
        let cfg = from_table(t).unwrap();
        assert_eq!(cfg.drive.omega_c, Freq::Gamma13(9.0));
        assert_eq!(cfg.medium.optical_depth, Some(20.0));
        assert_eq!(cfg.model.phi_variant, PhiVariant::Exact);

        let mut t = preset("fig2").unwrap();
        apply_assignment(&mut t, "drive.omega_c=fast").unwrap();
        let msg = from_table(t).unwrap_err().to_string();
        assert!(msg.contains("drive.omega_c"), "{msg}");

        let mut t = preset("fig2").unwrap();
        apply_assignment(&mut t, "medium.colour=3").unwrap();
        assert!(from_table(t).unwrap_err().to_string().contains("colour"));

        let mut t = preset("fig2").unwrap();
        assert!(apply_assignment(&mut t, "name.x=1").is_err());
        assert!(apply_assignment(&mut t, "noequals").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let cases = [
            "medium.gamma13=\"2*gamma13\"",
            "medium.density=1e17",
            "medium.gamma12=-1.0",
            "grid.samples=1000",
            "drive.anti_stokes_wavelength=0.0",
        ];
        for c in cases {
            let mut t = preset("fig3").unwrap();
            apply_assignment(&mut t, c).unwrap();
            let cfg = from_table(t).unwrap();
            let err = cfg.scenario().and_then(|_| cfg.grid_overrides()).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{c}");
        }
    }
}
