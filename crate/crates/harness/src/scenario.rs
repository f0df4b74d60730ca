//! Named experiment scenarios.
//!
//! A scenario id resolves to a complete configuration: the preset fills any
//! field the config file leaves unset, so a file can be as short as
//! `scenario = "flat_1kmh"` yet still explicit overrides win. Presets never
//! touch controller gains — those come from the file or the documented
//! defaults, so gain studies stay orthogonal to scenario selection.

use std::fs;
use std::path::Path;

use biped_core::config::{parse_raw, resolve, Config, ConfigError, RawConfig};
use biped_core::TerrainPatch;

/// Scenario ids the harness knows how to set up.
pub const SCENARIO_IDS: [&str; 3] = ["flat_1kmh", "inclined_obstacles", "step_in_place"];

/// Fill scenario-specific defaults into a raw config. Fields already present
/// in the file are left alone. Unknown ids are rejected.
pub fn apply_scenario(raw: &mut RawConfig) -> Result<(), ConfigError> {
    let id = raw
        .scenario
        .clone()
        .unwrap_or_else(|| "flat_1kmh".to_string());
    raw.scenario = Some(id.clone());
    match id.as_str() {
        "flat_1kmh" => {
            // 0.25 m steps at 0.9 s per step: 1 km/h forward progress.
            raw.gait.step_length.get_or_insert(0.25);
            raw.gait.step_time.get_or_insert(0.9);
            raw.gait.n_steps.get_or_insert(10);
        }
        "inclined_obstacles" => {
            raw.gait.step_length.get_or_insert(0.25);
            raw.gait.step_time.get_or_insert(0.9);
            raw.gait.n_steps.get_or_insert(8);
            if raw.terrain.is_none() {
                raw.terrain = Some(biped_core::config::RawTerrain {
                    patches: obstacle_patches(),
                });
            }
        }
        "step_in_place" => {
            raw.gait.step_length.get_or_insert(0.0);
            raw.gait.step_time.get_or_insert(0.9);
            raw.gait.n_steps.get_or_insert(6);
            // Stepping in place exercises pure timing: no sole deflection bias.
            raw.plant.deflection_bias.get_or_insert(0.0);
        }
        other => {
            return Err(ConfigError::Invalid {
                field: "scenario".to_string(),
                message: format!(
                    "unknown scenario `{other}` (expected one of {})",
                    SCENARIO_IDS.join(", ")
                ),
            });
        }
    }
    Ok(())
}

/// The two raised inclined patches crossed by the `inclined_obstacles` walk.
///
/// With 0.25 m steps starting on the right foot, footholds land at
/// x = 0.25·k; the patches are centered under the third (x = 0.75) and fifth
/// (x = 1.25) footholds, both right-foot placements. Extents leave the whole
/// sensor quad (+-0.05 m) on the unclamped part of the slope.
fn obstacle_patches() -> Vec<TerrainPatch> {
    vec![
        // 7 degree pitch and roll. The base height keeps the slope positive
        // under the right foot (y ~ -0.115 m) despite the roll term.
        TerrainPatch {
            x_start: 0.6482,
            x_end: 0.8518,
            base_height: 0.015,
            pitch_slope_deg: 7.0,
            roll_slope_deg: 7.0,
            max_height: 0.025,
        },
        // 12 degree pitch, no roll: the slope reaches the height cap exactly
        // at the far edge, so the whole span under the foot is unclamped.
        TerrainPatch {
            x_start: 1.1912,
            x_end: 1.3088,
            base_height: 0.0,
            pitch_slope_deg: 12.0,
            roll_slope_deg: 0.0,
            max_height: 0.025,
        },
    ]
}

/// Read a config file, apply its scenario preset, and resolve.
pub fn load_scenario_config(path: &Path) -> Result<Config, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut raw = parse_raw(&text)?;
    apply_scenario(&mut raw)?;
    resolve(raw)
}
