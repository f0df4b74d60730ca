//! Desk-scale walking plant: rigid feet tracking commanded poses through a
//! first-order actuator lag, hanging from a body with one vertical dynamic
//! degree of freedom, over a terrain heightmap with spring-damper corner
//! contact.
//!
//! The body DoF is what lets contact forces carry body weight: feet are
//! positioned by leg kinematics relative to the body, the body sinks until the
//! corner springs support W = m g, so a single flat foot at rest penetrates by
//! exactly W / (4 k) and the F/T traces are at body-weight scale.
//!
//! Sensor models:
//! - Bump sensors: four sprung probes per foot, one per sole corner. A reading
//!   is the remaining probe travel = vertical gap from the sole corner to the
//!   terrain, clamped to [0, 0.02] m; exactly 0 once the corner touches.
//! - F/T sensor: per-foot vertical force and the contact-moment numerators,
//!   averaged over the substeps of one control tick (so readers see the
//!   previous tick: one tick of latency).
//! - Measured ZMP: force-weighted combination of the per-foot centers of
//!   pressure; invalid below a 1 N total load ("airborne").

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controllers::ModifiedCommand;
use crate::gait::{FootGeometry, FootPose, Side};

/// Maximum travel of a bump-sensor probe (m); readings saturate here.
pub const BUMP_TRAVEL: f64 = 0.02;

/// Total vertical load below which the measured ZMP is undefined.
pub const ZMP_FORCE_THRESHOLD: f64 = 1.0;

/// A ramp patch: height rises from `base_height` at `x_start` with the pitch
/// slope (and laterally with the roll slope), clamped to [0, max_height].
/// Outside all patches the ground is the z = 0 plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainPatch {
    pub x_start: f64,
    pub x_end: f64,
    /// Height at x_start (m).
    #[serde(default)]
    pub base_height: f64,
    /// Upward grade along +x, degrees.
    #[serde(default)]
    pub pitch_slope_deg: f64,
    /// Upward grade along +y, degrees.
    #[serde(default)]
    pub roll_slope_deg: f64,
    /// Height cap of the obstacle (m).
    #[serde(default = "default_max_height")]
    pub max_height: f64,
}

fn default_max_height() -> f64 {
    0.025
}

/// Terrain height at a world (x, y) point.
pub fn terrain_height(patches: &[TerrainPatch], x: f64, y: f64) -> f64 {
    for p in patches {
        if x >= p.x_start && x < p.x_end {
            let h = p.base_height
                + (x - p.x_start) * p.pitch_slope_deg.to_radians().tan()
                + y * p.roll_slope_deg.to_radians().tan();
            return h.clamp(0.0, p.max_height);
        }
    }
    0.0
}

/// One foot's four bump-sensor readings, ordered [A, B, C, D] =
/// [front-left, back-left, back-right, front-right]. Each is in
/// [0, BUMP_TRAVEL].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpReadings {
    pub d: [f64; 4],
}

impl BumpReadings {
    pub fn average(&self) -> f64 {
        0.25 * (self.d[0] + self.d[1] + self.d[2] + self.d[3])
    }
}

/// Per-foot contact wrench as reported by the ankle F/T sensor.
///
/// `force[2]` is the vertical load. The torque components are the
/// center-of-pressure numerators of the vertical corner forces:
/// `torque[1] = sum f * x_corner` (positive = load toward the toe) and
/// `torque[0] = sum f * y_corner`, so CoP = foot center +
/// (torque[1], torque[0]) / force[2]. Tangential forces are zero in this
/// plant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FootWrench {
    pub force: [f64; 3],
    pub torque: [f64; 3],
}

/// Plant parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// Robot mass carried by the legs (kg).
    pub total_mass: f64,
    /// First-order tracking lag of every actuated pose component (s).
    pub actuator_time_constant: f64,
    /// Ground spring per corner (N/m).
    pub contact_stiffness: f64,
    /// Ground damper per corner (N s/m).
    pub contact_damping: f64,
    /// Constant downward position error of the swing foot (m): the
    /// link-deflection error the bump layer exists to absorb.
    pub deflection_bias: f64,
    /// Half-width of uniform noise added to bump readings (m).
    pub bump_noise: f64,
    /// Half-width of uniform noise added to measured vertical force (N).
    pub force_noise: f64,
    /// Fixed offset from sensed probe height to sole height (m).
    pub sensor_sole_offset: f64,
}

impl Default for PlantParams {
    fn default() -> PlantParams {
        PlantParams {
            total_mass: 50.0,
            actuator_time_constant: 0.02,
            contact_stiffness: 2.0e5,
            contact_damping: 500.0,
            deflection_bias: 0.005,
            bump_noise: 0.0,
            force_noise: 0.0,
            sensor_sole_offset: 0.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlantFault {
    #[error("non-finite command to plant: {what}")]
    NonFiniteCommand { what: &'static str },
    #[error("plant state diverged (non-finite {what})")]
    NonFiniteState { what: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct FootState {
    pose: FootPose,
    /// Vertical force of each corner at the end of the last substep.
    corner_f: [f64; 4],
}

/// Full plant: tracked state plus sensor accumulators for the tick that just
/// completed.
#[derive(Debug, Clone)]
pub struct Plant {
    pub params: PlantParams,
    geom: FootGeometry,
    terrain: Vec<TerrainPatch>,
    /// Nominal body height; the body DoF is referenced to it.
    com_height: f64,
    gravity: f64,
    feet: [FootState; 2],
    body_z: f64,
    body_vz: f64,
    com_xy: [f64; 2],
    /// Tick-averaged wrench per foot (what the F/T sensor reports).
    tick_wrench: [FootWrench; 2],
    /// Peak substep vertical force per foot within the last tick.
    tick_fz_peak: [f64; 2],
    rng: ChaCha8Rng,
}

impl Plant {
    /// Create a plant settled at the initial commanded poses. The body starts
    /// at the static equilibrium for both feet resting on flat ground.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: PlantParams,
        geom: FootGeometry,
        terrain: Vec<TerrainPatch>,
        com_height: f64,
        gravity: f64,
        initial_feet: [FootPose; 2],
        initial_com: [f64; 2],
        seed: u64,
    ) -> Plant {
        let weight = params.total_mass * gravity;
        // Equilibrium penetration with all 8 corners sharing the weight.
        let settle = weight / (8.0 * params.contact_stiffness);
        let mut plant = Plant {
            params,
            geom,
            terrain,
            com_height,
            gravity,
            feet: [
                FootState {
                    pose: initial_feet[0],
                    corner_f: [0.0; 4],
                },
                FootState {
                    pose: initial_feet[1],
                    corner_f: [0.0; 4],
                },
            ],
            body_z: com_height - settle,
            body_vz: 0.0,
            com_xy: initial_com,
            tick_wrench: [FootWrench::default(); 2],
            tick_fz_peak: [0.0; 2],
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        // Prime the sensor accumulators with the static contact state so the
        // first tick reads consistent forces.
        let mut wrenches = [FootWrench::default(); 2];
        for side in Side::BOTH {
            let i = side.idx();
            let (w, forces, _) = plant.corner_contact(i, [0.0; 5], 0.0);
            wrenches[i] = w;
            plant.feet[i].corner_f = forces;
            plant.tick_fz_peak[i] = w.force[2];
        }
        plant.tick_wrench = wrenches;
        plant
    }

    /// Weight carried by the legs (N).
    pub fn weight(&self) -> f64 {
        self.params.total_mass * self.gravity
    }

    /// Actual pose of a foot (leg-kinematic pose; add `body_offset` for the
    /// world-frame sole height).
    pub fn foot_pose(&self, side: Side) -> FootPose {
        self.feet[side.idx()].pose
    }

    /// Vertical offset of the body from its nominal height: world sole height
    /// = tracked foot z + body_offset.
    pub fn body_offset(&self) -> f64 {
        self.body_z - self.com_height
    }

    /// Actual CoM position (x, y lag-tracked; z is the body DoF).
    pub fn com(&self) -> [f64; 3] {
        [self.com_xy[0], self.com_xy[1], self.body_z]
    }

    /// Corner vertical forces of a foot at the end of the last substep.
    pub fn corner_forces(&self, side: Side) -> [f64; 4] {
        self.feet[side.idx()].corner_f
    }

    /// World (x, y) of a foot's four contact corners.
    pub fn corner_positions(&self, side: Side) -> [[f64; 2]; 4] {
        let pose = self.feet[side.idx()].pose;
        self.geom
            .corner_offsets()
            .map(|o| [pose.x + o[0], pose.y + o[1]])
    }

    /// Peak substep vertical force on a foot during the last tick.
    pub fn fz_peak(&self, side: Side) -> f64 {
        self.tick_fz_peak[side.idx()]
    }

    /// Bump-sensor readings for one foot, from the current state: per-corner
    /// vertical gap from the sole corner to the terrain, clamped to the probe
    /// travel. Optional uniform noise is applied before re-clamping.
    pub fn read_bump_sensors(&mut self, side: Side) -> BumpReadings {
        let pose = self.feet[side.idx()].pose;
        let offsets = self.geom.corner_offsets();
        let body = self.body_offset();
        let mut d = [0.0; 4];
        for (k, off) in offsets.iter().enumerate() {
            let corner_z = pose.sole_height_at(*off) + body;
            let ground = terrain_height(&self.terrain, pose.x + off[0], pose.y + off[1]);
            let mut gap = corner_z - ground;
            if self.params.bump_noise > 0.0 {
                gap += self
                    .rng
                    .gen_range(-self.params.bump_noise..=self.params.bump_noise);
            }
            d[k] = gap.clamp(0.0, BUMP_TRAVEL);
        }
        BumpReadings { d }
    }

    /// F/T sensor for one foot: the wrench averaged over the substeps of the
    /// last completed control tick. Call once per tick per foot when noise is
    /// enabled.
    pub fn read_ft_sensor(&mut self, side: Side) -> FootWrench {
        let mut w = self.tick_wrench[side.idx()];
        if self.params.force_noise > 0.0 {
            w.force[2] = (w.force[2]
                + self
                    .rng
                    .gen_range(-self.params.force_noise..=self.params.force_noise))
            .max(0.0);
        }
        w
    }

    /// Advance one control tick: `substeps` integration substeps of the
    /// actuator lag, contact forces and the body DoF, tracking `cmd` with the
    /// deflection bias applied to the swing foot's height target.
    pub fn step_tick(
        &mut self,
        cmd: &ModifiedCommand,
        swing: Option<Side>,
        substeps: usize,
        dt_sub: f64,
    ) -> Result<(), PlantFault> {
        for side in Side::BOTH {
            let f = &cmd.feet[side.idx()];
            if ![f.x, f.y, f.z, f.pitch, f.roll].iter().all(|v| v.is_finite()) {
                return Err(PlantFault::NonFiniteCommand {
                    what: "foot pose command",
                });
            }
        }
        if !cmd.com[0].is_finite() || !cmd.com[1].is_finite() {
            return Err(PlantFault::NonFiniteCommand {
                what: "CoM command",
            });
        }

        let tau = self.params.actuator_time_constant;
        let decay = (-dt_sub / tau).exp();
        let mut wrench_sum = [FootWrench::default(); 2];
        let mut fz_peak = [0.0_f64; 2];

        for _ in 0..substeps {
            // Per-foot targets; the swing foot's realized height carries the
            // deflection bias.
            let mut targets = [[0.0; 5]; 2];
            for side in Side::BOTH {
                let i = side.idx();
                let c = &cmd.feet[i];
                let bias = if swing == Some(side) {
                    self.params.deflection_bias
                } else {
                    0.0
                };
                targets[i] = [c.x, c.y, c.z - bias, c.pitch, c.roll];
            }

            // Contact forces from the current state (tracking rates give the
            // penetration rate without finite-difference spikes).
            let mut total_fz = 0.0;
            for side in Side::BOTH {
                let i = side.idx();
                let (w, forces, _) = self.corner_contact(i, targets[i], tau);
                self.feet[i].corner_f = forces;
                total_fz += w.force[2];
                wrench_sum[i].force[2] += w.force[2];
                wrench_sum[i].torque[0] += w.torque[0];
                wrench_sum[i].torque[1] += w.torque[1];
                fz_peak[i] = fz_peak[i].max(w.force[2]);
            }

            // Body vertical DoF, semi-implicit Euler.
            let accel = (total_fz - self.weight()) / self.params.total_mass;
            self.body_vz += dt_sub * accel;
            self.body_z += dt_sub * self.body_vz;

            // Exact exponential update of every lag-tracked component.
            for side in Side::BOTH {
                let i = side.idx();
                let t = targets[i];
                let p = &mut self.feet[i].pose;
                p.x = t[0] + (p.x - t[0]) * decay;
                p.y = t[1] + (p.y - t[1]) * decay;
                p.z = t[2] + (p.z - t[2]) * decay;
                p.pitch = t[3] + (p.pitch - t[3]) * decay;
                p.roll = t[4] + (p.roll - t[4]) * decay;
            }
            self.com_xy[0] = cmd.com[0] + (self.com_xy[0] - cmd.com[0]) * decay;
            self.com_xy[1] = cmd.com[1] + (self.com_xy[1] - cmd.com[1]) * decay;
        }

        let n = substeps as f64;
        for i in 0..2 {
            self.tick_wrench[i] = FootWrench {
                force: [0.0, 0.0, wrench_sum[i].force[2] / n],
                torque: [
                    wrench_sum[i].torque[0] / n,
                    wrench_sum[i].torque[1] / n,
                    0.0,
                ],
            };
            self.tick_fz_peak[i] = fz_peak[i];
        }

        if !self.body_z.is_finite() || !self.body_vz.is_finite() {
            return Err(PlantFault::NonFiniteState { what: "body height" });
        }
        Ok(())
    }

    /// Corner contact for one foot in its current state. `targets`/`tau`
    /// provide the tracking rates for the damping term; pass tau = 0 for a
    /// static evaluation (zero rates). Returns (wrench, per-corner forces,
    /// total Fz).
    fn corner_contact(
        &self,
        foot: usize,
        targets: [f64; 5],
        tau: f64,
    ) -> (FootWrench, [f64; 4], f64) {
        let pose = self.feet[foot].pose;
        let k = self.params.contact_stiffness;
        let c = self.params.contact_damping;
        let body = self.body_offset();

        let (z_rate, pitch_rate, roll_rate, body_vz) = if tau > 0.0 {
            (
                (targets[2] - pose.z) / tau,
                (targets[3] - pose.pitch) / tau,
                (targets[4] - pose.roll) / tau,
                self.body_vz,
            )
        } else {
            (0.0, 0.0, 0.0, 0.0)
        };
        let sec2_pitch = 1.0 / (pose.pitch.cos() * pose.pitch.cos());
        let sec2_roll = 1.0 / (pose.roll.cos() * pose.roll.cos());

        let mut w = FootWrench::default();
        let mut forces = [0.0; 4];
        let mut total = 0.0;
        for (i, off) in self.geom.corner_offsets().iter().enumerate() {
            let corner_z = pose.sole_height_at(*off) + body;
            let ground = terrain_height(&self.terrain, pose.x + off[0], pose.y + off[1]);
            let pen = ground - corner_z;
            if pen > 0.0 {
                let corner_vz =
                    z_rate + off[0] * sec2_pitch * pitch_rate - off[1] * sec2_roll * roll_rate
                        + body_vz;
                let pen_rate = -corner_vz;
                let f = (k * pen + c * pen_rate).max(0.0);
                forces[i] = f;
                total += f;
                w.torque[0] += f * off[1];
                w.torque[1] += f * off[0];
            }
        }
        w.force[2] = total;
        (w, forces, total)
    }
}

/// Measured ZMP: force-weighted combination of the per-foot centers of
/// pressure, in world coordinates. `None` when the total vertical load is
/// below 1 N (airborne); callers hold the last valid value.
pub fn measured_zmp(
    left: &FootWrench,
    right: &FootWrench,
    left_pose: &FootPose,
    right_pose: &FootPose,
) -> Option<[f64; 2]> {
    let total = left.force[2] + right.force[2];
    if total < ZMP_FORCE_THRESHOLD {
        return None;
    }
    let mut x = 0.0;
    let mut y = 0.0;
    for (w, pose) in [(left, left_pose), (right, right_pose)] {
        if w.force[2] > 0.0 {
            let cop_x = pose.x + w.torque[1] / w.force[2];
            let cop_y = pose.y + w.torque[0] / w.force[2];
            x += w.force[2] * cop_x;
            y += w.force[2] * cop_y;
        }
    }
    Some([x / total, y / total])
}
