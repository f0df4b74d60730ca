//! The four online adaptation layers that sit between the trajectory planner
//! and the plant, each a leaky-integrator admittance law updated with explicit
//! Euler at the control rate:
//!
//! 1. Force-difference layer: shifts the two foot heights apart
//!    (left -0.5 dz, right +0.5 dz) until the measured left/right vertical
//!    force difference matches the desired one.
//! 2. Bump-proximity layer: during the descending half of swing, offsets the
//!    swing-foot height command until the sensed height (average bump reading)
//!    tracks the desired height, absorbing unseen terrain and link deflection
//!    before touchdown.
//! 3. Ankle-orientation layer: drives each ankle's pitch/roll toward the
//!    sole-ground angles estimated from the four bump readings, aligning the
//!    sole with inclined ground.
//! 4. ZMP-CoM layer: nudges the CoM command to track the planned ZMP/CoM pair
//!    using the measured ZMP (u = -kp e_zmp + kc e_com, integrated).
//!
//! Every state update validates its inputs first and leaves the state
//! untouched on error. All states are clamped to configured limits.

use crate::distributor::DesiredFootForces;
use crate::gait::{FootGeometry, FootPose, GaitPhase, LeakyGains, Limits, ZmpComGains};
use crate::plant::{BumpReadings, BUMP_TRAVEL};

/// Integrator states of all four layers. Defaults to all zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptationState {
    /// Force-layer height shift (m): left foot gets -dz/2, right +dz/2.
    pub dz: f64,
    /// Bump-layer height offset per foot (m), added to the height command.
    pub du: [f64; 2],
    /// Ankle-angle offsets per foot, [pitch, roll] (rad).
    pub dtheta: [[f64; 2]; 2],
    /// Integrated CoM command correction (m), x and y.
    pub com_correction: [f64; 2],
}

impl AdaptationState {
    /// The bump-layer offset of a foot is zeroed when that foot lands: its job
    /// (absorbing the approach error) is done once contact is made. The other
    /// states persist across steps.
    pub fn reset_du_on_touchdown(&mut self, foot: usize) {
        self.du[foot] = 0.0;
    }
}

/// Final per-tick command to the plant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FootCommand {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModifiedCommand {
    /// Indexed by Side::idx(): [left, right].
    pub feet: [FootCommand; 2],
    /// Horizontal CoM command (height is held constant by the gait).
    pub com: [f64; 2],
}

/// Sole-ground relative angles estimated from bump readings (rad).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SoleAngles {
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ControllerError {
    #[error("non-finite input to {op}")]
    NonFiniteInput { op: &'static str },
    #[error("bump distance out of range in {op}: {value}")]
    SensorOutOfRange { op: &'static str, value: f64 },
}

fn clamp_sym(v: f64, limit: f64) -> f64 {
    v.clamp(-limit, limit)
}

/// One explicit-Euler step of the leaky law: state += dt (kp e - kr state).
fn leaky_step(state: f64, e: f64, g: &LeakyGains, dt: f64) -> f64 {
    state + dt * (g.kp * e - g.kr * state)
}

/// Force-difference layer. Error is desired minus measured left/right force
/// difference; the shift lowers the under-loaded side.
/// Returns the per-foot modified heights [left, right] from the desired
/// heights `p_z_desired`.
pub fn force_difference_update(
    state: &mut AdaptationState,
    desired: &DesiredFootForces,
    measured_fz: [f64; 2],
    p_z_desired: [f64; 2],
    gains: &LeakyGains,
    limits: &Limits,
    dt: f64,
) -> Result<[f64; 2], ControllerError> {
    let inputs = [
        desired.left,
        desired.right,
        measured_fz[0],
        measured_fz[1],
        p_z_desired[0],
        p_z_desired[1],
    ];
    if !inputs.iter().all(|v| v.is_finite()) {
        return Err(ControllerError::NonFiniteInput {
            op: "force_difference_update",
        });
    }
    let e = (desired.left - desired.right) - (measured_fz[0] - measured_fz[1]);
    state.dz = clamp_sym(leaky_step(state.dz, e, gains, dt), limits.dz_clamp);
    Ok([
        p_z_desired[0] - 0.5 * state.dz,
        p_z_desired[1] + 0.5 * state.dz,
    ])
}

/// Bump-proximity layer. For each foot: active only while that foot is the
/// swing foot, the swing phase is inside the window, and the averaged reading
/// is below the probe travel (i.e. the ground is actually in view); otherwise
/// the offset only decays. The error is the desired height minus the sensed
/// height (average reading plus the fixed sensor-to-sole offset), so a
/// closer-than-planned ground raises the command.
/// Returns the per-foot height targets p_z* = p_z_mod + du.
#[allow(clippy::too_many_arguments)]
pub fn bump_proximity_update(
    state: &mut AdaptationState,
    d_avg: [f64; 2],
    p_z_mod: [f64; 2],
    phase: &GaitPhase,
    gains: &LeakyGains,
    limits: &Limits,
    sensor_sole_offset: f64,
    dt: f64,
) -> Result<[f64; 2], ControllerError> {
    for foot in 0..2 {
        if !d_avg[foot].is_finite() || !p_z_mod[foot].is_finite() {
            return Err(ControllerError::NonFiniteInput {
                op: "bump_proximity_update",
            });
        }
        if !(0.0..=BUMP_TRAVEL + 1e-12).contains(&d_avg[foot]) {
            return Err(ControllerError::SensorOutOfRange {
                op: "bump_proximity_update",
                value: d_avg[foot],
            });
        }
    }
    let swing = phase.swing_side();
    let [s_on, s_off] = limits.bump_window;
    let mut p_star = [0.0; 2];
    for foot in 0..2 {
        let is_swing = swing.map(|s| s.idx() == foot).unwrap_or(false);
        let active =
            is_swing && phase.s >= s_on && phase.s <= s_off && d_avg[foot] < BUMP_TRAVEL;
        let du = if active {
            let sensed = d_avg[foot] + sensor_sole_offset;
            let e = p_z_mod[foot] - sensed;
            leaky_step(state.du[foot], e, gains, dt)
        } else {
            leaky_step(state.du[foot], 0.0, gains, dt)
        };
        state.du[foot] = clamp_sym(du, limits.du_clamp);
        p_star[foot] = p_z_mod[foot] + state.du[foot];
    }
    Ok(p_star)
}

/// Sole-ground angles from the four corner readings: pitch from the back-row
/// minus front-row average over the sensor length, roll from the left-column
/// minus right-column average over the sensor width. Positive pitch means the
/// toe is closer to the ground than the heel.
pub fn estimate_sole_angles(
    readings: &BumpReadings,
    geom: &FootGeometry,
) -> Result<SoleAngles, ControllerError> {
    let [a, b, c, d] = readings.d;
    if !readings.d.iter().all(|v| v.is_finite()) {
        return Err(ControllerError::NonFiniteInput {
            op: "estimate_sole_angles",
        });
    }
    let pitch = ((0.5 * (b + c) - 0.5 * (a + d)) / geom.sensor_length).atan();
    let roll = ((0.5 * (a + b) - 0.5 * (c + d)) / geom.sensor_width).atan();
    Ok(SoleAngles { pitch, roll })
}

/// Ankle-orientation layer for both feet. `active[foot]` is true when that
/// foot is in contact or descending close to the ground (averaged reading
/// below the probe travel); otherwise the offsets only decay.
/// Returns the modified ankle angles [[pitch, roll]; 2] from the desired
/// angles `theta_desired`.
#[allow(clippy::too_many_arguments)]
pub fn ankle_orientation_update(
    state: &mut AdaptationState,
    measured: [SoleAngles; 2],
    desired: [SoleAngles; 2],
    theta_desired: [[f64; 2]; 2],
    active: [bool; 2],
    gains: &LeakyGains,
    limits: &Limits,
    dt: f64,
) -> Result<[[f64; 2]; 2], ControllerError> {
    for foot in 0..2 {
        let vals = [
            measured[foot].pitch,
            measured[foot].roll,
            desired[foot].pitch,
            desired[foot].roll,
            theta_desired[foot][0],
            theta_desired[foot][1],
        ];
        if !vals.iter().all(|v| v.is_finite()) {
            return Err(ControllerError::NonFiniteInput {
                op: "ankle_orientation_update",
            });
        }
    }
    let mut theta_mod = [[0.0; 2]; 2];
    for foot in 0..2 {
        let errors = if active[foot] {
            [
                measured[foot].pitch - desired[foot].pitch,
                measured[foot].roll - desired[foot].roll,
            ]
        } else {
            [0.0, 0.0]
        };
        for axis in 0..2 {
            state.dtheta[foot][axis] = clamp_sym(
                leaky_step(state.dtheta[foot][axis], errors[axis], gains, dt),
                limits.dtheta_clamp,
            );
            theta_mod[foot][axis] = theta_desired[foot][axis] + state.dtheta[foot][axis];
        }
    }
    Ok(theta_mod)
}

/// ZMP-CoM layer: u = -kp (zmp_d - zmp_m) + kc (com_d - com_m), integrated
/// into the CoM command correction, per horizontal axis.
/// Returns the modified CoM command com_d + correction.
pub fn zmp_com_update(
    state: &mut AdaptationState,
    zmp_desired: [f64; 2],
    zmp_measured: [f64; 2],
    com_desired: [f64; 2],
    com_measured: [f64; 2],
    gains: &ZmpComGains,
    dt: f64,
) -> Result<[f64; 2], ControllerError> {
    let inputs = [zmp_desired, zmp_measured, com_desired, com_measured];
    if !inputs.iter().flatten().all(|v| v.is_finite()) {
        return Err(ControllerError::NonFiniteInput {
            op: "zmp_com_update",
        });
    }
    let mut com_mod = [0.0; 2];
    for axis in 0..2 {
        let e_zmp = zmp_desired[axis] - zmp_measured[axis];
        let e_com = com_desired[axis] - com_measured[axis];
        let u = -gains.kp * e_zmp + gains.kc * e_com;
        state.com_correction[axis] += u * dt;
        com_mod[axis] = com_desired[axis] + state.com_correction[axis];
    }
    Ok(com_mod)
}

/// Assemble the final plant command: planner poses with the vertical targets,
/// ankle angles and CoM replaced by the adaptation outputs. With all states
/// zero this is a field-for-field passthrough of the desired motion.
pub fn compose_commands(
    feet_desired: &[FootPose; 2],
    p_z_star: [f64; 2],
    theta_mod: [[f64; 2]; 2],
    com_mod: [f64; 2],
) -> ModifiedCommand {
    let mut feet = [FootCommand::default(); 2];
    for foot in 0..2 {
        feet[foot] = FootCommand {
            x: feet_desired[foot].x,
            y: feet_desired[foot].y,
            z: p_z_star[foot],
            pitch: theta_mod[foot][0],
            roll: theta_mod[foot][1],
        };
    }
    ModifiedCommand {
        feet,
        com: com_mod,
    }
}
