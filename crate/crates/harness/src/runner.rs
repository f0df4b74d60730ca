//! The closed-loop experiment runner.
//!
//! Per control tick, in order: sample the planner, read sensors (which still
//! reflect the previous tick — one tick of latency), distribute the desired
//! vertical forces, run the four adaptation updates, compose the command, and
//! advance the plant through its substeps. Every tick appends one telemetry
//! row.
//!
//! Row semantics: `*_des` and `*_cmd` columns are this tick's planner output
//! and final command; sensor columns (`d_*`, `alpha_*`, `zmp_meas_*`, `fz`,
//! `fz_peak`) are what the controller consumed this tick, i.e. the previous
//! tick's physics; `*_act` columns are the plant state after this tick's
//! substeps.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use biped_core::config::Config;
use biped_core::controllers::{
    ankle_orientation_update, bump_proximity_update, compose_commands, estimate_sole_angles,
    force_difference_update, zmp_com_update, AdaptationState, ControllerError, SoleAngles,
};
use biped_core::distributor::{distribute_vertical_force, DistributorError};
use biped_core::gait::{GaitPhase, Side, Support};
use biped_core::planner::Plan;
use biped_core::plant::{measured_zmp, terrain_height, Plant, PlantFault, BUMP_TRAVEL};

use crate::telemetry::{CsvWriter, Field, RunHeader};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("plant fault at tick {tick}: {fault}")]
    Plant { tick: usize, fault: PlantFault },
    #[error("controller fault at tick {tick}: {source}")]
    Controller {
        tick: usize,
        source: ControllerError,
    },
    #[error("force distribution fault at tick {tick}: {source}")]
    Distribution {
        tick: usize,
        source: DistributorError,
    },
    #[error("telemetry i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Summary returned by a completed run.
#[derive(Debug, Clone, Copy)]
pub struct RunResult {
    pub ticks: usize,
    pub wall_seconds: f64,
}

/// Layer summary string recorded in the telemetry header.
pub fn layer_summary(config: &Config) -> String {
    let onoff = |b: bool| if b { "on" } else { "off" };
    format!(
        "force:{},bump:{},orientation:{},zmp_com:{}",
        onoff(config.enables.force_layer),
        onoff(config.enables.bump_layer),
        onoff(config.enables.orientation),
        onoff(config.enables.zmp_com)
    )
}

pub fn run_header(config: &Config) -> RunHeader {
    RunHeader {
        scenario: config.scenario.clone(),
        seed: config.run.seed,
        control_rate: config.run.control_rate,
        layers: layer_summary(config),
    }
}

fn phase_mode_code(phase: &GaitPhase) -> i64 {
    match phase.mode {
        Support::DoubleSupport => 0,
        Support::SingleSupport(Side::Left) => 1,
        Support::SingleSupport(Side::Right) => 2,
    }
}

fn swing_code(phase: &GaitPhase) -> i64 {
    match phase.swing_side() {
        None => -1,
        Some(Side::Left) => 0,
        Some(Side::Right) => 1,
    }
}

/// Whether every contact corner of a foot sits over raised terrain.
fn foot_on_patch(plant: &Plant, side: Side, terrain: &[biped_core::TerrainPatch]) -> bool {
    plant
        .corner_positions(side)
        .iter()
        .all(|c| terrain_height(terrain, c[0], c[1]) > 1e-9)
}

/// Run the configured scenario, streaming telemetry to `out`.
pub fn run_to_writer<W: Write>(config: &Config, out: W) -> Result<RunResult, RunError> {
    let start = Instant::now();
    let plan = Plan::new(&config.gait, &config.run);
    let dt = config.run.dt();
    let dt_sub = config.run.dt_sub();
    let first = plan.sample(0);

    let mut plant = Plant::new(
        config.plant.clone(),
        config.foot.clone(),
        config.terrain.clone(),
        config.gait.com_height,
        config.gait.gravity,
        first.feet,
        first.com_pos,
        config.run.seed,
    );

    let mut writer = CsvWriter::new(out, &run_header(config))?;
    let mut adaptation = AdaptationState::default();
    let mut prev_phase = first.phase;
    let mut held_zmp = first.zmp;

    let total = plan.total_ticks();
    for tick in 0..=total {
        let sample = plan.sample(tick);

        // The swing foot's height offset resets the moment it lands (single
        // support ending in double support).
        if let Some(landed) = prev_phase.swing_side() {
            if sample.phase.is_double_support() {
                adaptation.reset_du_on_touchdown(landed.idx());
            }
        }
        prev_phase = sample.phase;

        // --- sensing (previous tick's physics) ---
        let wrench = [
            plant.read_ft_sensor(Side::Left),
            plant.read_ft_sensor(Side::Right),
        ];
        let bumps = [
            plant.read_bump_sensors(Side::Left),
            plant.read_bump_sensors(Side::Right),
        ];
        let actual_poses = [plant.foot_pose(Side::Left), plant.foot_pose(Side::Right)];
        let zmp_now = measured_zmp(&wrench[0], &wrench[1], &actual_poses[0], &actual_poses[1]);
        if let Some(z) = zmp_now {
            held_zmp = z;
        }
        let com_act = plant.com();
        let fz_peak = [plant.fz_peak(Side::Left), plant.fz_peak(Side::Right)];

        // --- force distribution ---
        let forces = distribute_vertical_force(
            sample.zmp,
            [sample.feet[0].x, sample.feet[0].y],
            [sample.feet[1].x, sample.feet[1].y],
            plant.weight(),
            &sample.phase,
        )
        .map_err(|source| RunError::Distribution { tick, source })?;

        // --- adaptation layers ---
        let ctl = |source| RunError::Controller { tick, source };
        let p_z_desired = [sample.feet[0].z, sample.feet[1].z];
        let measured_fz = [wrench[0].force[2], wrench[1].force[2]];
        let p_mod = if config.enables.force_layer {
            force_difference_update(
                &mut adaptation,
                &forces,
                measured_fz,
                p_z_desired,
                &config.gains.force,
                &config.limits,
                dt,
            )
            .map_err(ctl)?
        } else {
            p_z_desired
        };

        let d_avg = [bumps[0].average(), bumps[1].average()];
        let p_star = if config.enables.bump_layer {
            bump_proximity_update(
                &mut adaptation,
                d_avg,
                p_mod,
                &sample.phase,
                &config.gains.bump,
                &config.limits,
                config.plant.sensor_sole_offset,
                dt,
            )
            .map_err(ctl)?
        } else {
            p_mod
        };

        let alpha = [
            estimate_sole_angles(&bumps[0], &config.foot).map_err(ctl)?,
            estimate_sole_angles(&bumps[1], &config.foot).map_err(ctl)?,
        ];
        let theta_desired = [
            [sample.feet[0].pitch, sample.feet[0].roll],
            [sample.feet[1].pitch, sample.feet[1].roll],
        ];
        let theta_mod = if config.enables.orientation {
            ankle_orientation_update(
                &mut adaptation,
                alpha,
                [SoleAngles::default(); 2],
                theta_desired,
                [d_avg[0] < BUMP_TRAVEL, d_avg[1] < BUMP_TRAVEL],
                &config.gains.orientation,
                &config.limits,
                dt,
            )
            .map_err(ctl)?
        } else {
            theta_desired
        };

        let com_mod = if config.enables.zmp_com {
            zmp_com_update(
                &mut adaptation,
                sample.zmp,
                held_zmp,
                sample.com_pos,
                [com_act[0], com_act[1]],
                &config.gains.zmp_com,
                dt,
            )
            .map_err(ctl)?
        } else {
            sample.com_pos
        };

        // --- actuate ---
        let cmd = compose_commands(&sample.feet, p_star, theta_mod, com_mod);
        plant
            .step_tick(&cmd, sample.phase.swing_side(), config.run.substeps, dt_sub)
            .map_err(|fault| RunError::Plant { tick, fault })?;

        // --- log ---
        let com_post = plant.com();
        let mut row: Vec<Field> = Vec::with_capacity(73);
        row.push(Field::Int(tick as i64));
        row.push(Field::Float(sample.t));
        row.push(Field::Int(phase_mode_code(&sample.phase)));
        row.push(Field::Float(sample.phase.s));
        row.push(Field::Int(sample.phase.step_index as i64));
        row.push(Field::Int(swing_code(&sample.phase)));
        row.push(Field::Float(sample.zmp[0]));
        row.push(Field::Float(sample.zmp[1]));
        row.push(Field::Float(held_zmp[0]));
        row.push(Field::Float(held_zmp[1]));
        row.push(Field::Int(zmp_now.is_some() as i64));
        row.push(Field::Float(sample.com_pos[0]));
        row.push(Field::Float(sample.com_pos[1]));
        row.push(Field::Float(com_mod[0]));
        row.push(Field::Float(com_mod[1]));
        row.push(Field::Float(com_post[0]));
        row.push(Field::Float(com_post[1]));
        row.push(Field::Float(com_post[2]));
        row.push(Field::Float(adaptation.dz));
        row.push(Field::Float(adaptation.com_correction[0]));
        row.push(Field::Float(adaptation.com_correction[1]));
        for side in Side::BOTH {
            let i = side.idx();
            let post = plant.foot_pose(side);
            row.push(Field::Float(sample.feet[i].x));
            row.push(Field::Float(sample.feet[i].y));
            row.push(Field::Float(sample.feet[i].z));
            row.push(Field::Float(sample.feet[i].pitch));
            row.push(Field::Float(sample.feet[i].roll));
            row.push(Field::Float(cmd.feet[i].z));
            row.push(Field::Float(cmd.feet[i].pitch));
            row.push(Field::Float(cmd.feet[i].roll));
            row.push(Field::Float(post.x));
            row.push(Field::Float(post.z));
            row.push(Field::Float(post.pitch));
            row.push(Field::Float(post.roll));
            row.push(Field::Float(adaptation.du[i]));
            row.push(Field::Float(adaptation.dtheta[i][0]));
            row.push(Field::Float(adaptation.dtheta[i][1]));
            for k in 0..4 {
                row.push(Field::Float(bumps[i].d[k]));
            }
            row.push(Field::Float(d_avg[i]));
            row.push(Field::Float(alpha[i].pitch));
            row.push(Field::Float(alpha[i].roll));
            row.push(Field::Float(forces.of(side)));
            row.push(Field::Float(wrench[i].force[2]));
            row.push(Field::Float(fz_peak[i]));
            row.push(Field::Int(foot_on_patch(&plant, side, &config.terrain) as i64));
        }
        writer.write_row(&row)?;
    }
    writer.finish()?;

    Ok(RunResult {
        ticks: total + 1,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run a scenario and write the telemetry CSV to `path`.
pub fn run_to_file(config: &Config, path: &Path) -> Result<RunResult, RunError> {
    let file = File::create(path)?;
    run_to_writer(config, file)
}
