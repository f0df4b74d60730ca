//! Run configuration: a nested key/value (TOML) schema, parsed in two stages.
//!
//! `parse_raw` keeps every field optional so callers (e.g. the experiment
//! harness) can layer scenario presets over what the file actually says;
//! `resolve` then fills documented defaults, validates, and produces a
//! [`Config`] ready to run. Any validation failure names the offending field.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::gait::{FootGeometry, GainSet, GaitParams, LeakyGains, Limits, Side, ZmpComGains};
use crate::plant::{PlantParams, TerrainPatch};

/// Fully resolved, validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Scenario label; carried into telemetry metadata.
    pub scenario: String,
    pub gait: GaitParams,
    pub foot: FootGeometry,
    pub gains: GainSet,
    pub limits: Limits,
    pub plant: PlantParams,
    pub enables: LayerEnables,
    pub run: RunSettings,
    pub terrain: Vec<TerrainPatch>,
}

/// Per-layer enable flags for ablation studies.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerEnables {
    pub force_layer: bool,
    pub bump_layer: bool,
    pub orientation: bool,
    pub zmp_com: bool,
}

impl Default for LayerEnables {
    fn default() -> LayerEnables {
        LayerEnables {
            force_layer: true,
            bump_layer: true,
            orientation: true,
            zmp_com: true,
        }
    }
}

/// Loop timing and reproducibility settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    /// Control loop rate in Hz.
    pub control_rate: f64,
    /// Plant substeps per control tick.
    pub substeps: usize,
    /// RNG seed for sensor noise.
    pub seed: u64,
    /// Standing time appended after the final step, seconds.
    pub tail_time: f64,
}

impl RunSettings {
    pub fn dt(&self) -> f64 {
        1.0 / self.control_rate
    }

    pub fn dt_sub(&self) -> f64 {
        self.dt() / self.substeps as f64
    }
}

impl Default for RunSettings {
    fn default() -> RunSettings {
        RunSettings {
            control_rate: 200.0,
            substeps: 5,
            seed: 0,
            tail_time: 1.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Raw config as written in the file: every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Option<String>,
    pub gait: RawGait,
    pub foot: Option<FootGeometry>,
    pub gains: RawGains,
    pub limits: Option<Limits>,
    pub plant: RawPlant,
    pub controllers: Option<LayerEnables>,
    pub run: RawRun,
    pub terrain: Option<RawTerrain>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawGait {
    pub step_length: Option<f64>,
    pub step_time: Option<f64>,
    pub double_support_fraction: Option<f64>,
    pub com_height: Option<f64>,
    pub gravity: Option<f64>,
    pub swing_apex_height: Option<f64>,
    pub n_steps: Option<usize>,
    pub first_swing: Option<Side>,
    pub hip_width: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawGains {
    pub force: Option<LeakyGains>,
    pub bump: Option<LeakyGains>,
    pub orientation: Option<LeakyGains>,
    pub zmp_com: Option<ZmpComGains>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawPlant {
    pub total_mass: Option<f64>,
    pub actuator_time_constant: Option<f64>,
    pub contact_stiffness: Option<f64>,
    pub contact_damping: Option<f64>,
    pub deflection_bias: Option<f64>,
    pub bump_noise: Option<f64>,
    pub force_noise: Option<f64>,
    pub sensor_sole_offset: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawRun {
    pub control_rate: Option<f64>,
    pub substeps: Option<usize>,
    pub seed: Option<u64>,
    pub tail_time: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawTerrain {
    pub patches: Vec<TerrainPatch>,
}

/// Parse the raw (all-optional) config from TOML text. Parse errors carry
/// line/column information.
pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    Ok(toml::from_str(text)?)
}

/// Fill defaults and validate. Universal defaults: the documented gait table,
/// the stock gain set, a 200 Hz loop with 5 substeps.
pub fn resolve(raw: RawConfig) -> Result<Config, ConfigError> {
    let d = GaitParams::default();
    let gait = GaitParams {
        step_length: raw.gait.step_length.unwrap_or(d.step_length),
        step_time: raw.gait.step_time.unwrap_or(d.step_time),
        double_support_fraction: raw
            .gait
            .double_support_fraction
            .unwrap_or(d.double_support_fraction),
        com_height: raw.gait.com_height.unwrap_or(d.com_height),
        gravity: raw.gait.gravity.unwrap_or(d.gravity),
        swing_apex_height: raw.gait.swing_apex_height.unwrap_or(d.swing_apex_height),
        n_steps: raw.gait.n_steps.unwrap_or(d.n_steps),
        first_swing: raw.gait.first_swing.unwrap_or(d.first_swing),
        hip_width: raw.gait.hip_width.unwrap_or(d.hip_width),
    };

    let foot = raw.foot.unwrap_or_default();
    let limits = raw.limits.unwrap_or_default();
    let enables = raw.controllers.unwrap_or_default();

    let run_d = RunSettings::default();
    let run = RunSettings {
        control_rate: raw.run.control_rate.unwrap_or(run_d.control_rate),
        substeps: raw.run.substeps.unwrap_or(run_d.substeps),
        seed: raw.run.seed.unwrap_or(run_d.seed),
        tail_time: raw.run.tail_time.unwrap_or(run_d.tail_time),
    };

    let plant_d = PlantParams::default();
    let plant = PlantParams {
        total_mass: raw.plant.total_mass.unwrap_or(plant_d.total_mass),
        actuator_time_constant: raw
            .plant
            .actuator_time_constant
            .unwrap_or(plant_d.actuator_time_constant),
        contact_stiffness: raw
            .plant
            .contact_stiffness
            .unwrap_or(plant_d.contact_stiffness),
        contact_damping: raw
            .plant
            .contact_damping
            .unwrap_or(plant_d.contact_damping),
        deflection_bias: raw.plant.deflection_bias.unwrap_or(plant_d.deflection_bias),
        bump_noise: raw.plant.bump_noise.unwrap_or(plant_d.bump_noise),
        force_noise: raw.plant.force_noise.unwrap_or(plant_d.force_noise),
        sensor_sole_offset: raw
            .plant
            .sensor_sole_offset
            .unwrap_or(plant_d.sensor_sole_offset),
    };

    validate_gait(&gait)?;
    validate_foot(&foot)?;
    validate_limits(&limits)?;
    validate_plant(&plant)?;
    validate_run(&run)?;

    // Gains default to the stock set; the ZMP-CoM pair defaults
    // to (2w, 0.5w), which needs the resolved gait for w.
    let gain_d = GainSet::defaults(gait.omega());
    let gains = GainSet {
        force: raw.gains.force.unwrap_or(gain_d.force),
        bump: raw.gains.bump.unwrap_or(gain_d.bump),
        orientation: raw.gains.orientation.unwrap_or(gain_d.orientation),
        zmp_com: raw.gains.zmp_com.unwrap_or(gain_d.zmp_com),
    };
    validate_gains(&gains)?;

    let mut terrain = raw.terrain.map(|t| t.patches).unwrap_or_default();
    terrain.sort_by(|a, b| a.x_start.partial_cmp(&b.x_start).unwrap());
    validate_terrain(&terrain)?;

    Ok(Config {
        scenario: raw.scenario.unwrap_or_else(|| "custom".to_string()),
        gait,
        foot,
        gains,
        limits,
        plant,
        enables,
        run,
        terrain,
    })
}

/// Load and resolve a config file.
pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    resolve(parse_raw(&text)?)
}

fn require(ok: bool, field: &str, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(invalid(field, message))
    }
}

fn finite(v: f64, field: &str) -> Result<(), ConfigError> {
    require(v.is_finite(), field, "must be finite")
}

fn validate_gait(g: &GaitParams) -> Result<(), ConfigError> {
    finite(g.step_length, "gait.step_length")?;
    require(g.step_length >= 0.0, "gait.step_length", "must be >= 0")?;
    require(
        g.step_time.is_finite() && g.step_time > 0.0,
        "gait.step_time",
        "must be > 0",
    )?;
    require(
        g.double_support_fraction > 0.0 && g.double_support_fraction < 1.0,
        "gait.double_support_fraction",
        "must be in (0, 1)",
    )?;
    require(
        g.com_height.is_finite() && g.com_height > 0.0,
        "gait.com_height",
        "must be > 0",
    )?;
    require(
        g.gravity.is_finite() && g.gravity > 0.0,
        "gait.gravity",
        "must be > 0",
    )?;
    require(
        g.swing_apex_height.is_finite() && g.swing_apex_height > 0.0,
        "gait.swing_apex_height",
        "must be > 0",
    )?;
    require(g.n_steps >= 1, "gait.n_steps", "must be >= 1")?;
    require(
        g.hip_width.is_finite() && g.hip_width > 0.0,
        "gait.hip_width",
        "must be > 0",
    )?;
    Ok(())
}

fn validate_foot(f: &FootGeometry) -> Result<(), ConfigError> {
    require(
        f.sensor_length.is_finite() && f.sensor_length > 0.0,
        "foot.sensor_length",
        "must be > 0",
    )?;
    require(
        f.sensor_width.is_finite() && f.sensor_width > 0.0,
        "foot.sensor_width",
        "must be > 0",
    )?;
    require(
        f.sole_half_length >= 0.5 * f.sensor_length,
        "foot.sole_half_length",
        "sole outline must cover the sensor rectangle",
    )?;
    require(
        f.sole_half_width >= 0.5 * f.sensor_width,
        "foot.sole_half_width",
        "sole outline must cover the sensor rectangle",
    )?;
    Ok(())
}

fn validate_gains(g: &GainSet) -> Result<(), ConfigError> {
    let pairs = [
        (g.force.kp, "gains.force.kp"),
        (g.force.kr, "gains.force.kr"),
        (g.bump.kp, "gains.bump.kp"),
        (g.bump.kr, "gains.bump.kr"),
        (g.orientation.kp, "gains.orientation.kp"),
        (g.orientation.kr, "gains.orientation.kr"),
        (g.zmp_com.kp, "gains.zmp_com.kp"),
        (g.zmp_com.kc, "gains.zmp_com.kc"),
    ];
    for (v, field) in pairs {
        require(v.is_finite() && v >= 0.0, field, "must be >= 0")?;
    }
    Ok(())
}

fn validate_limits(l: &Limits) -> Result<(), ConfigError> {
    require(
        l.dz_clamp.is_finite() && l.dz_clamp > 0.0,
        "limits.dz_clamp",
        "must be > 0",
    )?;
    require(
        l.du_clamp.is_finite() && l.du_clamp > 0.0,
        "limits.du_clamp",
        "must be > 0",
    )?;
    require(
        l.dtheta_clamp.is_finite() && l.dtheta_clamp > 0.0,
        "limits.dtheta_clamp",
        "must be > 0",
    )?;
    require(
        l.bump_window[0] >= 0.0 && l.bump_window[0] < l.bump_window[1] && l.bump_window[1] <= 1.0,
        "limits.bump_window",
        "must satisfy 0 <= on < off <= 1",
    )?;
    Ok(())
}

fn validate_plant(p: &PlantParams) -> Result<(), ConfigError> {
    require(
        p.total_mass.is_finite() && p.total_mass > 0.0,
        "plant.total_mass",
        "must be > 0",
    )?;
    require(
        p.actuator_time_constant.is_finite() && p.actuator_time_constant > 0.0,
        "plant.actuator_time_constant",
        "must be > 0",
    )?;
    require(
        p.contact_stiffness.is_finite() && p.contact_stiffness > 0.0,
        "plant.contact_stiffness",
        "must be > 0",
    )?;
    require(
        p.contact_damping.is_finite() && p.contact_damping >= 0.0,
        "plant.contact_damping",
        "must be >= 0",
    )?;
    finite(p.deflection_bias, "plant.deflection_bias")?;
    require(
        p.bump_noise.is_finite() && p.bump_noise >= 0.0,
        "plant.bump_noise",
        "must be >= 0",
    )?;
    require(
        p.force_noise.is_finite() && p.force_noise >= 0.0,
        "plant.force_noise",
        "must be >= 0",
    )?;
    finite(p.sensor_sole_offset, "plant.sensor_sole_offset")?;
    Ok(())
}

fn validate_run(r: &RunSettings) -> Result<(), ConfigError> {
    require(
        r.control_rate.is_finite() && r.control_rate > 0.0,
        "run.control_rate",
        "must be > 0",
    )?;
    require(r.substeps >= 1, "run.substeps", "must be >= 1")?;
    require(
        r.tail_time.is_finite() && r.tail_time >= 0.0,
        "run.tail_time",
        "must be >= 0",
    )?;
    Ok(())
}

fn validate_terrain(patches: &[TerrainPatch]) -> Result<(), ConfigError> {
    for (i, p) in patches.iter().enumerate() {
        let field = format!("terrain.patches[{i}]");
        require(
            p.x_end > p.x_start,
            &field,
            "x_end must be greater than x_start",
        )?;
        require(
            p.base_height.is_finite() && p.base_height >= 0.0,
            &field,
            "base_height must be >= 0",
        )?;
        require(
            p.max_height.is_finite() && p.max_height >= 0.0,
            &field,
            "max_height must be >= 0",
        )?;
        require(
            p.pitch_slope_deg.abs() < 45.0 && p.roll_slope_deg.abs() < 45.0,
            &field,
            "slopes must be in (-45, 45) degrees",
        )?;
        if i + 1 < patches.len() {
            require(
                p.x_end <= patches[i + 1].x_start,
                &field,
                "patches must not overlap in x",
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_resolves_with_documented_defaults() {
        let cfg = resolve(parse_raw("scenario = \"flat_1kmh\"").unwrap()).unwrap();
        assert_eq!(cfg.scenario, "flat_1kmh");
        assert_eq!(cfg.gait, GaitParams::default());
        // stock gain set
        assert_eq!(cfg.gains.force, LeakyGains { kp: 5.0e-5, kr: 1.0 });
        assert_eq!(cfg.gains.bump, LeakyGains { kp: 5.0e-3, kr: 1.0 });
        assert_eq!(
            cfg.gains.orientation,
            LeakyGains {
                kp: 1.58e-2,
                kr: 6.0
            }
        );
        // ZMP-CoM pair derived from omega
        let w = cfg.gait.omega();
        assert!((cfg.gains.zmp_com.kp - 2.0 * w).abs() < 1e-12);
        assert!((cfg.gains.zmp_com.kc - 0.5 * w).abs() < 1e-12);
        assert_eq!(cfg.run.control_rate, 200.0);
        assert_eq!(cfg.run.substeps, 5);
        assert!(cfg.terrain.is_empty());
        assert!(cfg.enables.force_layer && cfg.enables.bump_layer);
    }

    #[test]
    fn validation_error_names_the_field() {
        let raw = parse_raw("[gait]\ndouble_support_fraction = 1.2").unwrap();
        let err = resolve(raw).unwrap_err();
        match err {
            ConfigError::Invalid { field, .. } => {
                assert_eq!(field, "gait.double_support_fraction")
            }
            other => panic!("expected Invalid, got {other}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_raw("[gait]\nstep_lenght = 0.3").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("step_lenght"), "message was: {msg}");
    }

    #[test]
    fn parse_error_reports_location() {
        let err = parse_raw("[gait\nstep_length = 0.3").unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("line 1"),
            "expected line info in parse error, got: {msg}"
        );
    }

    #[test]
    fn explicit_values_override_defaults() {
        let text = r#"
scenario = "custom"
[gait]
step_length = 0.2
n_steps = 4
[gains.bump]
kp = 60.0
kr = 1.0
[controllers]
bump_layer = false
[run]
seed = 7
"#;
        let cfg = resolve(parse_raw(text).unwrap()).unwrap();
        assert_eq!(cfg.gait.step_length, 0.2);
        assert_eq!(cfg.gait.n_steps, 4);
        assert_eq!(cfg.gains.bump.kp, 60.0);
        assert!(!cfg.enables.bump_layer);
        assert!(cfg.enables.force_layer);
        assert_eq!(cfg.run.seed, 7);
        // untouched fields keep defaults
        assert_eq!(cfg.gait.step_time, 0.9);
    }

    #[test]
    fn overlapping_patches_are_rejected() {
        let text = r#"
[[terrain.patches]]
x_start = 0.5
x_end = 0.8
pitch_slope_deg = 7.0
[[terrain.patches]]
x_start = 0.7
x_end = 1.0
pitch_slope_deg = 12.0
"#;
        let err = resolve(parse_raw(text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("overlap"));
    }

    #[test]
    fn negative_gains_are_rejected() {
        let text = "[gains.force]\nkp = -1e-5\nkr = 1.0";
        let err = resolve(parse_raw(text).unwrap()).unwrap_err();
        match err {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "gains.force.kp"),
            other => panic!("expected Invalid, got {other}"),
        }
    }
}
