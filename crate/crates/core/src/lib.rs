//! Walking-control stack for a small bipedal robot: gait phasing, footstep
//! and CoM trajectory planning, vertical-force distribution, four online
//! adaptation layers driven by foot bump (proximity) and force sensors, and a
//! deterministic physics plant to close the loop against.
//!
//! Layout:
//! - [`gait`]: shared domain types (sides, poses, phases, parameters, gains).
//! - [`config`]: TOML run configuration with validation and defaults.
//! - [`planner`]: offline footstep/ZMP/DCM/CoM/swing trajectory generation.
//! - [`distributor`]: desired vertical foot-force split.
//! - [`controllers`]: the four leaky-integrator adaptation layers.
//! - [`plant`]: terrain, contact, sensor and body physics simulation.

pub mod config;
pub mod controllers;
pub mod distributor;
pub mod gait;
pub mod planner;
pub mod plant;

pub use config::{load_config, Config, ConfigError, LayerEnables, RunSettings};
pub use controllers::{
    compose_commands, estimate_sole_angles, AdaptationState, ControllerError, FootCommand,
    ModifiedCommand, SoleAngles,
};
pub use distributor::{distribute_vertical_force, DesiredFootForces, DistributorError};
pub use gait::{
    advance_phase, FootGeometry, FootPose, GaitParams, GaitPhase, GainSet, LeakyGains, Limits,
    Side, Support, ZmpComGains,
};
pub use planner::{Plan, TrajectorySample};
pub use plant::{
    terrain_height, BumpReadings, FootWrench, Plant, PlantFault, PlantParams, TerrainPatch,
};
