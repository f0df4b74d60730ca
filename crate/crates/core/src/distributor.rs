//! Splits the body weight into desired vertical foot forces.
//!
//! In single support the stance foot carries everything. In double support
//! the reference ZMP is projected onto the segment joining the two foot
//! centers; the barycentric coordinate of the projection decides the split,
//! so the force shifts linearly from the trailing to the leading foot as the
//! ZMP travels across the double-support phase. The projection parameter is
//! clamped to [0, 1], which keeps both forces non-negative and their sum
//! exactly equal to the weight.

use crate::gait::{GaitPhase, Side, Support};

/// Desired vertical ground-reaction force per foot (N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredFootForces {
    pub left: f64,
    pub right: f64,
}

impl DesiredFootForces {
    pub fn of(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DistributorError {
    #[error("foot centers coincide in double support; cannot place the load")]
    DegenerateSupportSegment,
    #[error("non-finite input to the force distributor")]
    NonFinite,
}

/// Minimum foot-center separation (m) below which the double-support
/// projection is ill-conditioned.
pub const MIN_SUPPORT_SEPARATION: f64 = 1e-6;

pub fn distribute_vertical_force(
    zmp_ref: [f64; 2],
    left_center: [f64; 2],
    right_center: [f64; 2],
    weight: f64,
    phase: &GaitPhase,
) -> Result<DesiredFootForces, DistributorError> {
    let finite = zmp_ref.iter().all(|v| v.is_finite())
        && left_center.iter().all(|v| v.is_finite())
        && right_center.iter().all(|v| v.is_finite())
        && weight.is_finite();
    if !finite {
        return Err(DistributorError::NonFinite);
    }
    match phase.mode {
        Support::SingleSupport(Side::Left) => Ok(DesiredFootForces {
            left: weight,
            right: 0.0,
        }),
        Support::SingleSupport(Side::Right) => Ok(DesiredFootForces {
            left: 0.0,
            right: weight,
        }),
        Support::DoubleSupport => {
            let seg = [
                right_center[0] - left_center[0],
                right_center[1] - left_center[1],
            ];
            let len_sq = seg[0] * seg[0] + seg[1] * seg[1];
            if len_sq < MIN_SUPPORT_SEPARATION * MIN_SUPPORT_SEPARATION {
                return Err(DistributorError::DegenerateSupportSegment);
            }
            let rel = [zmp_ref[0] - left_center[0], zmp_ref[1] - left_center[1]];
            let lambda = ((rel[0] * seg[0] + rel[1] * seg[1]) / len_sq).clamp(0.0, 1.0);
            let left = (1.0 - lambda) * weight;
            Ok(DesiredFootForces {
                left,
                right: weight - left,
            })
        }
    }
}
