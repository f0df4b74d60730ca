//! Offline trajectory planner: footsteps, support timeline, ZMP reference,
//! divergent-component (DCM) recursion and the CoM trajectory.
//!
//! The plan is laid out on the control-tick grid so phase boundaries are exact
//! tick indices. The ZMP reference is piecewise linear: constant over each
//! single-support phase at the stance-foot center, and ramping linearly across
//! each double-support phase to the next stance center (the initial ramp
//! leaves the midpoint between the feet; the final ramp returns to it). The
//! DCM is integrated backward over those segments in closed form, so the
//! terminal condition (DCM ends exactly on the final ZMP point) holds to
//! machine precision; the CoM is then integrated forward, also in closed
//! form, which makes the cart-table identity x - x''/w^2 = p hold exactly on
//! segment interiors rather than only approximately.

use crate::config::RunSettings;
use crate::gait::{FootPose, GaitParams, GaitPhase, Side, Support};

/// One planned foothold: where the swing foot of that step lands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footstep {
    pub side: Side,
    pub x: f64,
    pub y: f64,
}

/// The full footstep sequence plus the initial and final stance geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FootstepPlan {
    /// Starting foot centers, indexed by Side::idx().
    pub initial: [[f64; 2]; 2],
    /// Foothold of step k at index k - 1.
    pub steps: Vec<Footstep>,
    /// Midpoint between the feet once the walk has finished.
    pub final_midpoint: [f64; 2],
}

/// Footholds advance one step length per step and alternate sides, so
/// consecutive same-side footholds are two step lengths apart.
pub fn plan_footsteps(gait: &GaitParams) -> FootstepPlan {
    let steps = (1..=gait.n_steps)
        .map(|k| {
            let side = gait.swing_side_of_step(k);
            Footstep {
                side,
                x: k as f64 * gait.step_length,
                y: gait.foot_y(side),
            }
        })
        .collect();
    let initial = [
        [0.0, gait.foot_y(Side::Left)],
        [0.0, gait.foot_y(Side::Right)],
    ];
    // The last foot to move is at n*L, the other at (n-1)*L.
    let final_midpoint = [(gait.n_steps as f64 - 0.5) * gait.step_length, 0.0];
    FootstepPlan {
        initial,
        steps,
        final_midpoint,
    }
}

/// Support-phase schedule quantized to control ticks. Durations are rounded
/// to whole ticks once, so every phase boundary is an exact tick index and
/// sampling never flaps across a float boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTimeline {
    pub dt: f64,
    pub ds_ticks: usize,
    pub ss_ticks: usize,
    pub tail_ticks: usize,
    pub n_steps: usize,
}

impl PhaseTimeline {
    pub fn new(gait: &GaitParams, run: &RunSettings) -> PhaseTimeline {
        let dt = run.dt();
        let to_ticks = |duration: f64| (duration / dt).round().max(1.0) as usize;
        PhaseTimeline {
            dt,
            ds_ticks: to_ticks(gait.double_support_duration()),
            ss_ticks: to_ticks(gait.single_support_duration()),
            tail_ticks: (run.tail_time / dt).round() as usize,
            n_steps: gait.n_steps,
        }
    }

    fn cycle_ticks(&self) -> usize {
        self.ss_ticks + self.ds_ticks
    }

    /// Last tick index of the plan (the plan spans ticks 0..=total_ticks).
    pub fn total_ticks(&self) -> usize {
        self.ds_ticks + self.n_steps * self.cycle_ticks() + self.tail_ticks
    }

    /// Tick at which step k's single-support phase begins (k is 1-based).
    pub fn ss_start_tick(&self, k: usize) -> usize {
        self.ds_ticks + (k - 1) * self.cycle_ticks()
    }

    /// Tick at which step k's trailing double support begins, i.e. the swing
    /// foot of step k is planted from this tick on.
    pub fn ds_start_tick(&self, k: usize) -> usize {
        self.ss_start_tick(k) + self.ss_ticks
    }

    pub fn phase_at(&self, tick: usize, gait: &GaitParams) -> GaitPhase {
        if tick < self.ds_ticks {
            return GaitPhase {
                mode: Support::DoubleSupport,
                s: tick as f64 / self.ds_ticks as f64,
                step_index: 0,
            };
        }
        let rel = tick - self.ds_ticks;
        let cycle = self.cycle_ticks();
        let completed = rel / cycle;
        if completed >= self.n_steps {
            // terminal double support: the walk is over
            return GaitPhase {
                mode: Support::DoubleSupport,
                s: 1.0,
                step_index: self.n_steps,
            };
        }
        let within = rel % cycle;
        let step = completed + 1;
        if within < self.ss_ticks {
            GaitPhase {
                mode: Support::SingleSupport(gait.swing_side_of_step(step).opposite()),
                s: within as f64 / self.ss_ticks as f64,
                step_index: completed,
            }
        } else {
            GaitPhase {
                mode: Support::DoubleSupport,
                s: (within - self.ss_ticks) as f64 / self.ds_ticks as f64,
                step_index: step,
            }
        }
    }
}

/// One linear piece of the ZMP reference between two tick indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZmpSegment {
    pub tick0: usize,
    pub tick1: usize,
    pub p0: [f64; 2],
    pub p1: [f64; 2],
}

impl ZmpSegment {
    fn value_at(&self, tick: usize) -> [f64; 2] {
        let a = (tick - self.tick0) as f64 / (self.tick1 - self.tick0) as f64;
        [
            self.p0[0] + (self.p1[0] - self.p0[0]) * a,
            self.p0[1] + (self.p1[1] - self.p0[1]) * a,
        ]
    }

    /// Time derivative of the reference on this segment (constant).
    fn slope(&self, dt: f64) -> [f64; 2] {
        let span = (self.tick1 - self.tick0) as f64 * dt;
        [
            (self.p1[0] - self.p0[0]) / span,
            (self.p1[1] - self.p0[1]) / span,
        ]
    }
}

/// Piecewise-linear ZMP reference over the whole plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ZmpReference {
    pub segments: Vec<ZmpSegment>,
}

impl ZmpReference {
    pub fn sample(&self, tick: usize) -> [f64; 2] {
        let last = self.segments.last().expect("reference has segments");
        if tick >= last.tick1 {
            return last.p1;
        }
        // segments are contiguous and sorted; find the one containing `tick`
        let idx = self
            .segments
            .partition_point(|seg| seg.tick1 <= tick)
            .min(self.segments.len() - 1);
        self.segments[idx].value_at(tick)
    }

    pub fn end_tick(&self) -> usize {
        self.segments.last().expect("reference has segments").tick1
    }
}

/// Stance-foot center during step k (1-based): the foot that does NOT swing
/// in step k, standing where it last landed.
fn stance_center(footsteps: &FootstepPlan, gait: &GaitParams, k: usize) -> [f64; 2] {
    let stance = gait.swing_side_of_step(k).opposite();
    if k >= 2 {
        let prev = &footsteps.steps[k - 2];
        debug_assert_eq!(prev.side, stance);
        [prev.x, prev.y]
    } else {
        footsteps.initial[stance.idx()]
    }
}

pub fn build_zmp_reference(
    footsteps: &FootstepPlan,
    timeline: &PhaseTimeline,
    gait: &GaitParams,
) -> ZmpReference {
    let start_mid = [
        0.5 * (footsteps.initial[0][0] + footsteps.initial[1][0]),
        0.5 * (footsteps.initial[0][1] + footsteps.initial[1][1]),
    ];
    let mut segments = Vec::with_capacity(2 * timeline.n_steps + 2);
    // initial weight transfer onto the first stance foot
    let mut t = timeline.ds_ticks;
    segments.push(ZmpSegment {
        tick0: 0,
        tick1: t,
        p0: start_mid,
        p1: stance_center(footsteps, gait, 1),
    });
    for k in 1..=timeline.n_steps {
        let here = stance_center(footsteps, gait, k);
        let next = if k < timeline.n_steps {
            stance_center(footsteps, gait, k + 1)
        } else {
            footsteps.final_midpoint
        };
        segments.push(ZmpSegment {
            tick0: t,
            tick1: t + timeline.ss_ticks,
            p0: here,
            p1: here,
        });
        segments.push(ZmpSegment {
            tick0: t + timeline.ss_ticks,
            tick1: t + timeline.ss_ticks + timeline.ds_ticks,
            p0: here,
            p1: next,
        });
        t += timeline.ss_ticks + timeline.ds_ticks;
    }
    if timeline.tail_ticks > 0 {
        segments.push(ZmpSegment {
            tick0: t,
            tick1: t + timeline.tail_ticks,
            p0: footsteps.final_midpoint,
            p1: footsteps.final_midpoint,
        });
    }
    ZmpReference { segments }
}

/// Backward closed-form DCM recursion over the piecewise-linear reference.
///
/// On a segment with reference p(t) = p1 + pdot (t - t1) the DCM solution of
/// xi' = w (xi - p) through xi(t1) is
///   xi(t) = p(t) + pdot / w + (xi(t1) - p1 - pdot / w) e^{w (t - t1)},
/// which covers constant segments as the pdot = 0 special case. The terminal
/// condition is xi(T) = p(T): the DCM comes to rest on the final ZMP point.
#[allow(clippy::needless_range_loop)] // tick drives the decay term, not just the index
pub fn dcm_backward(zmp: &ZmpReference, omega: f64, dt: f64) -> Vec<[f64; 2]> {
    let total = zmp.end_tick();
    let mut xi = vec![[0.0; 2]; total + 1];
    let mut xi_end = zmp.segments.last().expect("reference has segments").p1;
    xi[total] = xi_end;
    for seg in zmp.segments.iter().rev() {
        let pdot = seg.slope(dt);
        let b = [
            xi_end[0] - seg.p1[0] - pdot[0] / omega,
            xi_end[1] - seg.p1[1] - pdot[1] / omega,
        ];
        for tick in seg.tick0..seg.tick1 {
            let p = seg.value_at(tick);
            let decay = (omega * dt * (tick as f64 - seg.tick1 as f64)).exp();
            xi[tick] = [
                p[0] + pdot[0] / omega + b[0] * decay,
                p[1] + pdot[1] / omega + b[1] * decay,
            ];
        }
        xi_end = xi[seg.tick0];
    }
    xi
}

/// Forward closed-form CoM integration of x' = w (xi - x) given the DCM
/// samples. On each segment the solution through x(t0) is
///   x(t) = p(t) + E(t)/2 + C e^{-w (t - t0)},
/// where E(t) = xi(t) - p(t) - pdot/w is the (exponentially growing) DCM
/// offset and C = x(t0) - p(t0) - E(t0)/2. Returns positions and the emitted
/// velocities w (xi - x), which satisfy the CoM dynamics identically.
pub fn com_forward(
    zmp: &ZmpReference,
    dcm: &[[f64; 2]],
    omega: f64,
    dt: f64,
    start: [f64; 2],
) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let total = zmp.end_tick();
    let mut com = vec![[0.0; 2]; total + 1];
    let mut x = start;
    com[0] = x;
    for seg in &zmp.segments {
        let pdot = seg.slope(dt);
        let p0 = seg.value_at(seg.tick0);
        let mut c = [0.0; 2];
        for axis in 0..2 {
            let e0 = dcm[seg.tick0][axis] - p0[axis] - pdot[axis] / omega;
            c[axis] = x[axis] - p0[axis] - 0.5 * e0;
        }
        for tick in seg.tick0 + 1..=seg.tick1 {
            let p = seg.value_at(tick);
            let decay = (-omega * dt * (tick - seg.tick0) as f64).exp();
            for axis in 0..2 {
                let e = dcm[tick][axis] - p[axis] - pdot[axis] / omega;
                com[tick][axis] = p[axis] + 0.5 * e + c[axis] * decay;
            }
        }
        x = com[seg.tick1];
    }
    let vel = com
        .iter()
        .zip(dcm.iter())
        .map(|(x, xi)| [omega * (xi[0] - x[0]), omega * (xi[1] - x[1])])
        .collect();
    (com, vel)
}

/// Smoothstep with zero velocity and acceleration at both ends.
pub fn quintic_blend(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 + s * (6.0 * s - 15.0))
}

/// Swing-foot pose at normalized swing time s in [0, 1]: horizontal motion
/// follows the quintic blend, height follows a raised-cosine bell that peaks
/// at the apex mid-swing and lands flat (zero vertical rate at both ends).
pub fn swing_pose(from: [f64; 2], to: [f64; 2], apex: f64, s: f64) -> FootPose {
    let s = s.clamp(0.0, 1.0);
    let q = quintic_blend(s);
    FootPose {
        x: from[0] + (to[0] - from[0]) * q,
        y: from[1] + (to[1] - from[1]) * q,
        z: apex * 0.5 * (1.0 - (2.0 * std::f64::consts::PI * s).cos()),
        pitch: 0.0,
        roll: 0.0,
    }
}

/// Everything the controller needs from the planner at one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub tick: usize,
    pub t: f64,
    pub phase: GaitPhase,
    pub zmp: [f64; 2],
    pub dcm: [f64; 2],
    pub com_pos: [f64; 2],
    pub com_vel: [f64; 2],
    /// Desired foot poses, indexed by Side::idx().
    pub feet: [FootPose; 2],
}

/// Precomputed walking plan, sampled per control tick.
#[derive(Debug, Clone)]
pub struct Plan {
    pub gait: GaitParams,
    pub timeline: PhaseTimeline,
    pub footsteps: FootstepPlan,
    pub zmp: ZmpReference,
    dcm: Vec<[f64; 2]>,
    com: Vec<[f64; 2]>,
    com_vel: Vec<[f64; 2]>,
    /// foot_at_start[k] = both foot centers when step k begins (k = 1..=n);
    /// foot_at_start[n + 1] = final stance. Index 0 is unused padding.
    foot_at_start: Vec<[[f64; 2]; 2]>,
}

impl Plan {
    pub fn new(gait: &GaitParams, run: &RunSettings) -> Plan {
        let timeline = PhaseTimeline::new(gait, run);
        let footsteps = plan_footsteps(gait);
        let zmp = build_zmp_reference(&footsteps, &timeline, gait);
        let omega = gait.omega();
        let dcm = dcm_backward(&zmp, omega, timeline.dt);
        let start_mid = [
            0.5 * (footsteps.initial[0][0] + footsteps.initial[1][0]),
            0.5 * (footsteps.initial[0][1] + footsteps.initial[1][1]),
        ];
        let (com, com_vel) = com_forward(&zmp, &dcm, omega, timeline.dt, start_mid);

        let mut foot_at_start = vec![footsteps.initial; gait.n_steps + 2];
        for k in 1..=gait.n_steps {
            let mut next = foot_at_start[k];
            let step = &footsteps.steps[k - 1];
            next[step.side.idx()] = [step.x, step.y];
            foot_at_start[k + 1] = next;
        }

        Plan {
            gait: gait.clone(),
            timeline,
            footsteps,
            zmp,
            dcm,
            com,
            com_vel,
            foot_at_start,
        }
    }

    pub fn total_ticks(&self) -> usize {
        self.timeline.total_ticks()
    }

    fn planted(centers: [[f64; 2]; 2]) -> [FootPose; 2] {
        let mut feet = [FootPose::default(); 2];
        for (foot, c) in feet.iter_mut().zip(centers.iter()) {
            foot.x = c[0];
            foot.y = c[1];
        }
        feet
    }

    pub fn sample(&self, tick: usize) -> TrajectorySample {
        let tick = tick.min(self.total_ticks());
        let phase = self.timeline.phase_at(tick, &self.gait);
        let feet = match phase.mode {
            Support::DoubleSupport => {
                // step_index counts completed swings: feet are where step
                // (step_index + 1) will find them
                let k = (phase.step_index + 1).min(self.gait.n_steps + 1);
                Self::planted(self.foot_at_start[k])
            }
            Support::SingleSupport(stance) => {
                let k = phase.step_index + 1;
                let starts = self.foot_at_start[k];
                let swing = stance.opposite();
                let target = &self.footsteps.steps[k - 1];
                let mut feet = Self::planted(starts);
                feet[swing.idx()] = swing_pose(
                    starts[swing.idx()],
                    [target.x, target.y],
                    self.gait.swing_apex_height,
                    phase.s,
                );
                feet
            }
        };
        TrajectorySample {
            tick,
            t: tick as f64 * self.timeline.dt,
            phase,
            zmp: self.zmp.sample(tick),
            dcm: self.dcm[tick],
            com_pos: self.com[tick],
            com_vel: self.com_vel[tick],
            feet,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_run() -> RunSettings {
        RunSettings::default()
    }

    #[test]
    fn footsteps_alternate_and_advance_one_step_length() {
        let gait = GaitParams {
            n_steps: 4,
            ..GaitParams::default()
        };
        let plan = plan_footsteps(&gait);
        let sides: Vec<Side> = plan.steps.iter().map(|s| s.side).collect();
        assert_eq!(sides, vec![Side::Right, Side::Left, Side::Right, Side::Left]);
        let xs: Vec<f64> = plan.steps.iter().map(|s| s.x).collect();
        assert_eq!(xs, vec![0.25, 0.5, 0.75, 1.0]);
        assert!((plan.steps[0].y - (-0.115)).abs() < 1e-15);
        assert!((plan.steps[1].y - 0.115).abs() < 1e-15);
        // consecutive same-side footholds are two step lengths apart
        assert!((plan.steps[2].x - plan.steps[0].x - 0.5).abs() < 1e-15);
        assert_eq!(plan.final_midpoint, [0.875, 0.0]);
    }

    #[test]
    fn a_single_step_lands_one_step_length_out() {
        let gait = GaitParams {
            n_steps: 1,
            ..GaitParams::default()
        };
        let plan = plan_footsteps(&gait);
        assert_eq!(plan.steps.len(), 1);
        assert_eq!(plan.steps[0].side, Side::Right);
        assert!((plan.steps[0].x - 0.25).abs() < 1e-15);
        assert_eq!(plan.final_midpoint, [0.125, 0.0]);
    }

    #[test]
    fn zero_step_length_stacks_footholds_in_place() {
        let gait = GaitParams {
            n_steps: 6,
            step_length: 0.0,
            ..GaitParams::default()
        };
        let plan = plan_footsteps(&gait);
        assert!(plan.steps.iter().all(|s| s.x == 0.0));
        assert_eq!(plan.final_midpoint, [0.0, 0.0]);
    }

    #[test]
    fn timeline_matches_the_declared_durations() {
        let gait = GaitParams::default();
        let run = default_run();
        let tl = PhaseTimeline::new(&gait, &run);
        assert_eq!(tl.ds_ticks, 36); // 0.18 s at 200 Hz
        assert_eq!(tl.ss_ticks, 144); // 0.72 s
        assert_eq!(tl.tail_ticks, 200); // 1.0 s
        assert_eq!(
            tl.total_ticks(),
            36 + gait.n_steps * 180 + 200
        );
        assert_eq!(tl.ss_start_tick(1), 36);
        assert_eq!(tl.ds_start_tick(1), 180);
    }

    #[test]
    fn phase_at_agrees_with_the_incremental_phase_machine() {
        let gait = GaitParams {
            n_steps: 3,
            ..GaitParams::default()
        };
        let run = default_run();
        let tl = PhaseTimeline::new(&gait, &run);
        let dt = run.dt();
        let mut incremental = GaitPhase::initial();
        // the two machines agree tick for tick until the last swing ends;
        // from there the incremental machine saturates immediately while the
        // timeline still ramps through the final weight transfer
        let cutoff = tl.ds_start_tick(gait.n_steps);
        for tick in 0..=tl.total_ticks() {
            let tabulated = tl.phase_at(tick, &gait);
            assert_eq!(tabulated.mode, incremental.mode, "tick {tick}");
            assert_eq!(tabulated.step_index, incremental.step_index, "tick {tick}");
            if tick < cutoff {
                assert!(
                    (tabulated.s - incremental.s).abs() < 1e-6,
                    "tick {tick}: {} vs {}",
                    tabulated.s,
                    incremental.s
                );
            }
            incremental = crate::gait::advance_phase(incremental, &gait, dt);
        }
    }

    #[test]
    fn zmp_reference_visits_the_stance_centers() {
        let gait = GaitParams {
            n_steps: 3,
            ..GaitParams::default()
        };
        let run = default_run();
        let tl = PhaseTimeline::new(&gait, &run);
        let fs = plan_footsteps(&gait);
        let zmp = build_zmp_reference(&fs, &tl, &gait);
        // starts between the feet
        assert_eq!(zmp.sample(0), [0.0, 0.0]);
        // constant at the left foot through the first single support
        assert_eq!(zmp.sample(tl.ss_start_tick(1)), [0.0, 0.115]);
        assert_eq!(zmp.sample(tl.ds_start_tick(1)), [0.0, 0.115]);
        // transferred to the first foothold when step 2 starts
        let s2 = zmp.sample(tl.ss_start_tick(2));
        assert!((s2[0] - 0.25).abs() < 1e-12 && (s2[1] - (-0.115)).abs() < 1e-12);
        // ends at the final midpoint and stays there through the tail
        assert_eq!(zmp.sample(zmp.end_tick()), [0.625, 0.0]);
        assert_eq!(zmp.sample(zmp.end_tick() - tl.tail_ticks), [0.625, 0.0]);
    }

    #[test]
    fn zmp_reference_rate_is_bounded_by_the_transfer_speed() {
        let gait = GaitParams::default();
        let run = default_run();
        let tl = PhaseTimeline::new(&gait, &run);
        let zmp = build_zmp_reference(&plan_footsteps(&gait), &tl, &gait);
        let ds = gait.double_support_duration();
        let max_dx = gait.step_length * tl.dt / ds + 1e-12;
        let max_dy = gait.hip_width * tl.dt / ds + 1e-12;
        let mut prev = zmp.sample(0);
        for tick in 1..=zmp.end_tick() {
            let p = zmp.sample(tick);
            assert!((p[0] - prev[0]).abs() <= max_dx, "tick {tick}");
            assert!((p[1] - prev[1]).abs() <= max_dy, "tick {tick}");
            prev = p;
        }
    }

    #[test]
    fn dcm_ends_exactly_on_the_final_zmp_point() {
        let gait = GaitParams {
            n_steps: 4,
            ..GaitParams::default()
        };
        let run = default_run();
        let tl = PhaseTimeline::new(&gait, &run);
        let fs = plan_footsteps(&gait);
        let zmp = build_zmp_reference(&fs, &tl, &gait);
        let dcm = dcm_backward(&zmp, gait.omega(), tl.dt);
        let last = dcm[zmp.end_tick()];
        assert!((last[0] - fs.final_midpoint[0]).abs() < 1e-12);
        assert!((last[1] - fs.final_midpoint[1]).abs() < 1e-12);
    }

    #[test]
    fn dcm_offset_contracts_backward_by_the_segment_exponential() {
        // constant segment of 0.9 s at p = 0.1 followed by a jump to 0.2:
        // going backward over the first segment the DCM offset from its
        // reference shrinks by e^{-w T}, so xi(0) = 0.1 + 0.1 e^{-0.9 w}
        let omega = 3.8;
        let dt = 0.005;
        let zmp = ZmpReference {
            segments: vec![
                ZmpSegment {
                    tick0: 0,
                    tick1: 180,
                    p0: [0.1, 0.0],
                    p1: [0.1, 0.0],
                },
                ZmpSegment {
                    tick0: 180,
                    tick1: 181,
                    p0: [0.2, 0.0],
                    p1: [0.2, 0.0],
                },
            ],
        };
        let dcm = dcm_backward(&zmp, omega, dt);
        assert!((dcm[180][0] - 0.2).abs() < 1e-15);
        let expected0 = 0.1 + 0.1 * (-omega * 0.9).exp(); // 0.1 + 0.1 e^{-3.42}
        assert!((dcm[0][0] - expected0).abs() < 1e-12, "{}", dcm[0][0]);
        // a DCM that starts ON the reference of a constant segment stays there
        let pinned = ZmpReference {
            segments: vec![zmp.segments[0]],
        };
        let dcm = dcm_backward(&pinned, omega, dt);
        for xi in &dcm {
            assert!((xi[0] - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn dcm_matches_the_analytic_solution_on_a_ramp() {
        // linear reference from (0,0) to (0.3,0) over 0.18 s; terminal DCM
        // chosen freely; compare against the textbook solution
        let omega = 3.8;
        let dt = 0.005;
        let zmp = ZmpReference {
            segments: vec![ZmpSegment {
                tick0: 0,
                tick1: 36,
                p0: [0.0, 0.0],
                p1: [0.3, 0.0],
            }],
        };
        let dcm = dcm_backward(&zmp, omega, dt);
        let pdot = 0.3 / 0.18;
        let xi_end = 0.3; // terminal condition = p1
        let b = xi_end - 0.3 - pdot / omega;
        for (tick, xi) in dcm.iter().enumerate() {
            let t = tick as f64 * dt;
            let p = pdot * t;
            let expected = p + pdot / omega + b * (omega * (t - 0.18)).exp();
            assert!(
                (xi[0] - expected).abs() < 1e-9,
                "tick {tick}: {} vs {expected}",
                xi[0]
            );
        }
    }

    #[test]
    fn com_relaxes_to_a_constant_zmp_with_the_pendulum_time_constant() {
        // constant reference, DCM pinned on it; x(t) = p + (x0 - p) e^{-w t}
        let omega = 3.8;
        let dt = 0.005;
        let zmp = ZmpReference {
            segments: vec![ZmpSegment {
                tick0: 0,
                tick1: 180,
                p0: [0.1, 0.0],
                p1: [0.1, 0.0],
            }],
        };
        let dcm = dcm_backward(&zmp, omega, dt);
        let (com, vel) = com_forward(&zmp, &dcm, omega, dt, [0.0, 0.0]);
        for tick in (0..=180).step_by(20) {
            let t = tick as f64 * dt;
            let expected = 0.1 - 0.1 * (-omega * t).exp();
            assert!((com[tick][0] - expected).abs() < 1e-12, "tick {tick}");
        }
        // emitted velocity is w (xi - x) by construction
        for tick in 0..=180 {
            let v = omega * (dcm[tick][0] - com[tick][0]);
            assert!((vel[tick][0] - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cart_table_identity_recovers_the_reference_between_knots() {
        // finite-difference the planned CoM and re-derive the ZMP:
        // p = x - x''/w^2 must match the ramped reference away from the
        // segment switches (the FD stencil is invalid across a knot)
        let gait = GaitParams {
            n_steps: 5,
            ..GaitParams::default()
        };
        let run = default_run();
        let plan = Plan::new(&gait, &run);
        let dt = plan.timeline.dt;
        let w2 = gait.omega() * gait.omega();
        let knots: Vec<usize> = plan.zmp.segments.iter().map(|s| s.tick0).collect();
        let total = plan.total_ticks();
        let mut checked = 0;
        for tick in 2..total - 1 {
            if knots.iter().any(|&k| tick + 2 > k && tick < k + 2) {
                continue;
            }
            let xm = plan.sample(tick - 1).com_pos;
            let x0 = plan.sample(tick).com_pos;
            let xp = plan.sample(tick + 1).com_pos;
            let p_ref = plan.zmp.sample(tick);
            for axis in 0..2 {
                let acc = (xp[axis] - 2.0 * x0[axis] + xm[axis]) / (dt * dt);
                let p = x0[axis] - acc / w2;
                assert!(
                    (p - p_ref[axis]).abs() < 5e-3,
                    "tick {tick} axis {axis}: {p} vs {}",
                    p_ref[axis]
                );
            }
            checked += 1;
        }
        assert!(checked > 500);
    }

    #[test]
    fn com_velocity_is_continuous_with_bounded_acceleration() {
        let gait = GaitParams {
            n_steps: 4,
            ..GaitParams::default()
        };
        let plan = Plan::new(&gait, &default_run());
        let dt = plan.timeline.dt;
        let w2 = gait.omega() * gait.omega();
        // the cart-table acceleration is w^2 (x - p); bound the velocity jumps
        // by the largest such acceleration seen anywhere in the plan
        let mut max_dev: f64 = 0.0;
        for tick in 0..=plan.total_ticks() {
            let s = plan.sample(tick);
            let p = s.zmp;
            max_dev = max_dev
                .max((s.com_pos[0] - p[0]).abs())
                .max((s.com_pos[1] - p[1]).abs());
        }
        let acc_bound = w2 * max_dev * 1.05 + 1e-9;
        for tick in 1..=plan.total_ticks() {
            let v0 = plan.sample(tick - 1).com_vel;
            let v1 = plan.sample(tick).com_vel;
            for axis in 0..2 {
                assert!(
                    ((v1[axis] - v0[axis]) / dt).abs() <= acc_bound,
                    "tick {tick} axis {axis}"
                );
            }
        }
    }

    #[test]
    fn swing_interpolation_hits_its_boundary_conditions() {
        let from = [0.0, -0.115];
        let to = [0.5, -0.115];
        let apex = 0.04;
        let p0 = swing_pose(from, to, apex, 0.0);
        let p1 = swing_pose(from, to, apex, 1.0);
        let mid = swing_pose(from, to, apex, 0.5);
        assert!((p0.x - from[0]).abs() < 1e-15 && p0.z.abs() < 1e-15);
        assert!((p1.x - to[0]).abs() < 1e-15 && p1.z.abs() < 1e-12);
        assert!((mid.x - 0.25).abs() < 1e-12);
        assert!((mid.z - apex).abs() < 1e-12);
        // zero velocity at lift-off and touchdown (quintic + raised cosine)
        let eps = 1e-4;
        let near0 = swing_pose(from, to, apex, eps);
        let near1 = swing_pose(from, to, apex, 1.0 - eps);
        assert!((near0.x - from[0]).abs() / eps < 1e-6);
        assert!((near1.x - to[0]).abs() / eps < 1e-6);
        assert!(near0.z / eps < apex * 1e-2);
        assert!(near1.z / eps < apex * 1e-2);
    }

    #[test]
    fn sampled_feet_are_planted_in_double_support_and_land_on_target() {
        let gait = GaitParams {
            n_steps: 3,
            ..GaitParams::default()
        };
        let plan = Plan::new(&gait, &default_run());
        let tl = &plan.timeline;
        // during the initial double support both feet stay at the origin line
        let s = plan.sample(tl.ds_ticks / 2);
        assert_eq!(s.feet[0].z, 0.0);
        assert_eq!(s.feet[1].z, 0.0);
        assert_eq!(s.feet[0].x, 0.0);
        // right after step 1's swing, the right foot is planted on foothold 1
        let s = plan.sample(tl.ds_start_tick(1));
        assert!((s.feet[Side::Right.idx()].x - 0.25).abs() < 1e-12);
        assert_eq!(s.feet[Side::Right.idx()].z, 0.0);
        // mid-swing of step 2 the left foot is airborne, right planted
        let s = plan.sample(tl.ss_start_tick(2) + tl.ss_ticks / 2);
        assert!(s.feet[Side::Left.idx()].z > 0.01);
        assert_eq!(s.feet[Side::Right.idx()].z, 0.0);
        // foot targets are never exceeded vertically
        for tick in 0..=plan.total_ticks() {
            let s = plan.sample(tick);
            for foot in &s.feet {
                assert!(foot.z >= 0.0 && foot.z <= gait.swing_apex_height + 1e-12);
            }
        }
    }

    #[test]
    fn foot_paths_are_continuous() {
        let gait = GaitParams {
            n_steps: 4,
            ..GaitParams::default()
        };
        let plan = Plan::new(&gait, &default_run());
        let mut prev = plan.sample(0).feet;
        for tick in 1..=plan.total_ticks() {
            let feet = plan.sample(tick).feet;
            for i in 0..2 {
                let dx = (feet[i].x - prev[i].x).abs();
                let dz = (feet[i].z - prev[i].z).abs();
                assert!(dx < 0.01, "tick {tick} foot {i} dx {dx}");
                assert!(dz < 0.005, "tick {tick} foot {i} dz {dz}");
            }
            prev = feet;
        }
    }
}
