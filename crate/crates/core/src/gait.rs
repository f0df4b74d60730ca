//! Gait domain types and the walking phase machine.
//!
//! Conventions used across the whole stack:
//! - World axes: x forward, y left, z up. SI units everywhere, angles in radians.
//! - `SingleSupport(Left)` means the LEFT foot is the stance foot and the RIGHT
//!   foot swings.
//! - Foot-frame sole corners are labelled A front-left, B back-left, C back-right,
//!   D front-right, so `(d_B + d_C) - (d_A + d_D)` reads "back minus front".
//! - Foot pitch is positive toe-up (sole height grows with +x), foot roll is
//!   positive when the left (+y) edge drops. Both are chosen so the bump-sensor
//!   angle estimates feed back negatively onto the ankle command.

use serde::{Deserialize, Serialize};

/// Which leg. Also used to tag stance/swing roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// +1 for left, -1 for right: the sign of the foot's y offset from the
    /// body centerline.
    pub fn y_sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    /// Index into per-foot arrays: left 0, right 1.
    pub fn idx(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];
}

/// Pose of one foot sole center: world position plus pitch (positive toe-up)
/// and roll (positive left-edge-down). Yaw is always zero (straight walk).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FootPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl FootPose {
    /// Sole-plane height at a foot-frame (x, y) offset: the sole is the plane
    /// z(ox, oy) = z + ox*tan(pitch) - oy*tan(roll), exact for a rigid planar
    /// sole parametrized by its two slopes.
    pub fn sole_height_at(&self, offset: [f64; 2]) -> f64 {
        self.z + offset[0] * self.pitch.tan() - offset[1] * self.roll.tan()
    }
}

/// Support mode of the gait.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Both feet on the ground (weight transfer).
    DoubleSupport,
    /// One stance foot; the argument is the STANCE side, the other foot swings.
    SingleSupport(Side),
}

/// Phase of the walk: support mode, normalized progress through that mode, and
/// how many single-support phases have completed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitPhase {
    pub mode: Support,
    /// Normalized phase time in [0, 1] within the current mode.
    pub s: f64,
    /// Number of completed single-support (swing) phases.
    pub step_index: usize,
}

impl GaitPhase {
    /// Walk starts in double support, before any step.
    pub fn initial() -> GaitPhase {
        GaitPhase {
            mode: Support::DoubleSupport,
            s: 0.0,
            step_index: 0,
        }
    }

    /// The swinging side, if any. Exactly one foot swings during single
    /// support and none during double support.
    pub fn swing_side(&self) -> Option<Side> {
        match self.mode {
            Support::DoubleSupport => None,
            Support::SingleSupport(stance) => Some(stance.opposite()),
        }
    }

    pub fn stance_side(&self) -> Option<Side> {
        match self.mode {
            Support::DoubleSupport => None,
            Support::SingleSupport(stance) => Some(stance),
        }
    }

    pub fn is_double_support(&self) -> bool {
        matches!(self.mode, Support::DoubleSupport)
    }
}

/// Core gait parameters. All lengths in meters, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitParams {
    /// Forward distance gained per step (per single-support phase).
    pub step_length: f64,
    /// Duration of one full step = single support + double support.
    pub step_time: f64,
    /// Fraction of `step_time` spent in double support, in (0, 1).
    pub double_support_fraction: f64,
    /// Constant CoM height above the ground plane.
    pub com_height: f64,
    pub gravity: f64,
    /// Peak swing-foot sole height at mid-swing.
    pub swing_apex_height: f64,
    /// Number of steps in the walk.
    pub n_steps: usize,
    /// Which foot swings first.
    pub first_swing: Side,
    /// Lateral distance between the two foot centerlines.
    pub hip_width: f64,
}

impl Default for GaitParams {
    fn default() -> GaitParams {
        GaitParams {
            step_length: 0.25,
            step_time: 0.9,
            double_support_fraction: 0.2,
            com_height: 0.68,
            gravity: 9.81,
            swing_apex_height: 0.04,
            n_steps: 10,
            first_swing: Side::Right,
            hip_width: 0.23,
        }
    }
}

impl GaitParams {
    /// Natural frequency of the linear inverted pendulum, sqrt(g / z_c).
    /// Always recomputed from the current fields, never cached.
    pub fn omega(&self) -> f64 {
        (self.gravity / self.com_height).sqrt()
    }

    /// Duration of one single-support phase.
    pub fn single_support_duration(&self) -> f64 {
        self.step_time * (1.0 - self.double_support_fraction)
    }

    /// Duration of one double-support phase.
    pub fn double_support_duration(&self) -> f64 {
        self.step_time * self.double_support_fraction
    }

    /// Swing side of step `k` (1-based): the first swing side alternates.
    pub fn swing_side_of_step(&self, k: usize) -> Side {
        if k % 2 == 1 {
            self.first_swing
        } else {
            self.first_swing.opposite()
        }
    }

    /// Initial y offset of a foot center from the body centerline.
    pub fn foot_y(&self, side: Side) -> f64 {
        side.y_sign() * 0.5 * self.hip_width
    }
}

/// Foot geometry. The four bump-sensor probes sit at the corners of an
/// `sensor_length` x `sensor_width` rectangle centered on the ankle; those same
/// four points are the ground-contact corners. The sole outline is a slightly
/// larger rectangle used for support-polygon checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FootGeometry {
    /// Fore-aft spacing between the front and back sensor rows (L_s).
    pub sensor_length: f64,
    /// Lateral spacing between the left and right sensor columns (W_s).
    pub sensor_width: f64,
    /// Sole outline half-extent along x.
    pub sole_half_length: f64,
    /// Sole outline half-extent along y.
    pub sole_half_width: f64,
}

impl Default for FootGeometry {
    fn default() -> FootGeometry {
        FootGeometry {
            sensor_length: 0.10,
            sensor_width: 0.06,
            sole_half_length: 0.07,
            sole_half_width: 0.04,
        }
    }
}

impl FootGeometry {
    /// Foot-frame (x, y) offsets of the four sensor/contact corners in the
    /// fixed order [A, B, C, D] = [front-left, back-left, back-right,
    /// front-right].
    pub fn corner_offsets(&self) -> [[f64; 2]; 4] {
        let hx = 0.5 * self.sensor_length;
        let hy = 0.5 * self.sensor_width;
        [[hx, hy], [-hx, hy], [-hx, -hy], [hx, -hy]]
    }
}

/// Gains of one leaky-integrator admittance layer:
/// state' = kp * error - kr * state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakyGains {
    pub kp: f64,
    pub kr: f64,
}

/// Gains of the ZMP-CoM tracking layer: u = -kp * e_zmp + kc * e_com.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZmpComGains {
    pub kp: f64,
    pub kc: f64,
}

/// Full gain set for the four adaptation layers.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub force: LeakyGains,
    pub bump: LeakyGains,
    pub orientation: LeakyGains,
    pub zmp_com: ZmpComGains,
}

impl GainSet {
    /// Stock defaults: conservative hardware-style tuning for the three
    /// leaky layers, and (2w, 0.5w) for the ZMP-CoM layer, which satisfies the
    /// stability ordering kp > w > kc > 0.
    pub fn defaults(omega: f64) -> GainSet {
        GainSet {
            force: LeakyGains { kp: 5.0e-5, kr: 1.0 },
            bump: LeakyGains { kp: 5.0e-3, kr: 1.0 },
            orientation: LeakyGains { kp: 1.58e-2, kr: 6.0 },
            zmp_com: ZmpComGains {
                kp: 2.0 * omega,
                kc: 0.5 * omega,
            },
        }
    }
}

/// Saturation limits on the adaptation states, plus the swing-phase window in
/// which the bump layer is allowed to act.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    /// |dz| clamp on the force-layer height shift (m).
    pub dz_clamp: f64,
    /// |du| clamp on the bump-layer height offset (m).
    pub du_clamp: f64,
    /// |dtheta| clamp on each ankle-angle offset (rad).
    pub dtheta_clamp: f64,
    /// Swing-phase window [on, off] within which the bump layer is active.
    pub bump_window: [f64; 2],
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            dz_clamp: 0.03,
            du_clamp: 0.02,
            dtheta_clamp: 0.25,
            bump_window: [0.5, 1.0],
        }
    }
}

/// Advance the phase machine by `dt`, carrying leftover time across mode
/// boundaries. After the final step's single support completes, the walk
/// saturates in terminal double support (s pegged at 1).
pub fn advance_phase(phase: GaitPhase, params: &GaitParams, dt: f64) -> GaitPhase {
    // Absorbs float accumulation error when s lands on a boundary.
    const BOUNDARY_EPS: f64 = 1e-9;

    let mut mode = phase.mode;
    let mut step_index = phase.step_index;
    let mut remaining = dt;
    let mut s = phase.s;

    loop {
        let terminal = matches!(mode, Support::DoubleSupport) && step_index >= params.n_steps;
        if terminal {
            return GaitPhase {
                mode,
                s: 1.0,
                step_index,
            };
        }
        let duration = match mode {
            Support::DoubleSupport => params.double_support_duration(),
            Support::SingleSupport(_) => params.single_support_duration(),
        };
        let advanced = s + remaining / duration;
        if advanced < 1.0 - BOUNDARY_EPS {
            return GaitPhase {
                mode,
                s: advanced,
                step_index,
            };
        }
        remaining = (advanced - 1.0).max(0.0) * duration;
        s = 0.0;
        match mode {
            Support::DoubleSupport => {
                let swing = params.swing_side_of_step(step_index + 1);
                mode = Support::SingleSupport(swing.opposite());
            }
            Support::SingleSupport(_) => {
                step_index += 1;
                mode = Support::DoubleSupport;
            }
        }
    }
}
