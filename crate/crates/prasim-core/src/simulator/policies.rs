//! Per-frame runtime policies: the median-threshold heuristic and the
//! non-predictive baseline. Both solve the per-frame allocation problem
//! with the current frame's (estimated, i.e. true) gains, shed or degrade
//! deliveries when it is infeasible, and lock segment quality levels as
//! segments are first scheduled.

use crate::planner::{
    heuristic_segment_decision, plan_frame, HeuristicState, PlanError, PlanningInputs,
};
use crate::simulator::engine::{FrameContext, FrameDecision, FramePolicy};
use crate::simulator::queues::VoDQueue;
use crate::traffic::{VideoTrace, ENHANCEMENT_LAYERS};

/// One scheduled delivery for a VoD user in a frame.
#[derive(Debug, Clone, Copy)]
struct Schedule {
    first: usize,
    count: usize,
    /// Needed by the next playback boundary (cannot be shed).
    urgent: bool,
}

fn floor_for(
    q: &VoDQueue,
    video: &VideoTrace,
    sched: &Schedule,
    level: usize,
    frame_s: f64,
) -> f64 {
    let mut bits = 0.0;
    for seg in sched.first..sched.first + sched.count {
        bits += if q.is_locked(seg) {
            q.remaining_bits(seg)
        } else {
            video.segment_bits(seg - 1, level)
        };
    }
    bits / frame_s
}

fn locks_for(
    queues: &[VoDQueue],
    schedules: &[Schedule],
    level: usize,
) -> Vec<(usize, usize, usize)> {
    let mut locks = Vec::new();
    for (m, s) in schedules.iter().enumerate() {
        for seg in s.first..s.first + s.count {
            if !queues[m].is_locked(seg) {
                locks.push((m, seg, level));
            }
        }
    }
    locks
}

/// Solve the frame program for a schedule set at a quality level; `Ok(None)`
/// means infeasible (try the next rung of the ladder).
#[allow(clippy::too_many_arguments)]
fn try_schedules(
    planning: &PlanningInputs,
    videos: &[VideoTrace],
    ctx: &FrameContext,
    schedules: &[Schedule],
    level: usize,
    floor_margin: f64,
) -> Result<Option<FrameDecision>, PlanError> {
    let floors: Vec<f64> = schedules
        .iter()
        .enumerate()
        .map(|(m, s)| {
            floor_for(&ctx.queues[m], &videos[m], s, level, planning.frame_s) * (1.0 + floor_margin)
        })
        .collect();
    match plan_frame(planning, ctx.frame, &floors) {
        Ok(plan) => {
            let cap_segment: Vec<usize> = schedules
                .iter()
                .map(|s| if s.count == 0 { 1 } else { s.first + s.count - 1 })
                .collect();
            Ok(Some(FrameDecision {
                power_w: plan.power_w,
                subcarriers: plan.subcarriers,
                cap_segment,
                locks: locks_for(ctx.queues, schedules, level),
                objective_w: plan.objective_w,
            }))
        }
        Err(PlanError::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Median-threshold heuristic policy (three-timescale: the median is fixed
/// per window, allocations per frame, power per slot).
pub struct HeuristicPolicy {
    /// Per-frame planning inputs carrying the true (frame-start estimated)
    /// gains; `demand_bits` is unused here.
    pub planning: PlanningInputs,
    pub videos: Vec<VideoTrace>,
    /// Good/bad channel threshold per VoD user (median of predicted gains).
    pub alpha_med: Vec<f64>,
    pub floor_margin: f64,
}

impl FramePolicy for HeuristicPolicy {
    fn plan_frame(&mut self, ctx: &FrameContext) -> Result<FrameDecision, PlanError> {
        let playing = ctx.frame + 1; // 1-based segment on air
        let mut schedules = Vec::with_capacity(self.planning.vod.len());
        for (m, q) in ctx.queues.iter().enumerate() {
            let state = HeuristicState {
                alpha_med: self.alpha_med[m],
                last_tx_segment: q.last_complete_segment(),
                buffer_bits: q.buffer_bits(),
                q_max_bits: q.q_max_bits.unwrap_or(f64::INFINITY),
            };
            let d = heuristic_segment_decision(
                &state,
                self.planning.vod[m].gains[ctx.frame],
                playing,
                self.planning.frame_s,
                |s| q.segment_target_bits(s),
                |s| q.remaining_bits(s),
            );
            schedules.push(Schedule {
                first: d.first_segment,
                count: d.count,
                urgent: d.count > 0 && d.first_segment <= playing + 1,
            });
        }

        // Feasibility ladder: full decisions, then two -> one for good
        // channels, then shed the purely-ahead deliveries, then reduce the
        // quality of what is left.
        if let Some(d) = try_schedules(
            &self.planning,
            &self.videos,
            ctx,
            &schedules,
            ENHANCEMENT_LAYERS,
            self.floor_margin,
        )? {
            return Ok(d);
        }
        let mut shed_one: Vec<Schedule> = schedules
            .iter()
            .map(|s| Schedule {
                count: s.count.min(1),
                ..*s
            })
            .collect();
        // Catch-up deliveries must keep every overdue segment.
        for (s, orig) in shed_one.iter_mut().zip(&schedules) {
            if orig.urgent && orig.first + orig.count - 1 <= ctx.frame + 2 {
                s.count = orig.count;
            }
        }
        if let Some(d) = try_schedules(
            &self.planning,
            &self.videos,
            ctx,
            &shed_one,
            ENHANCEMENT_LAYERS,
            self.floor_margin,
        )? {
            return Ok(d);
        }
        let urgent_only: Vec<Schedule> = shed_one
            .iter()
            .map(|s| Schedule {
                count: if s.urgent { s.count } else { 0 },
                ..*s
            })
            .collect();
        for level in (0..=ENHANCEMENT_LAYERS).rev() {
            if let Some(d) = try_schedules(
                &self.planning,
                &self.videos,
                ctx,
                &urgent_only,
                level,
                self.floor_margin,
            )? {
                return Ok(d);
            }
        }
        Err(PlanError::Infeasible { slack: f64::NAN })
    }
}

/// Non-predictive baseline: every frame delivers exactly the segment played
/// next frame (plus any overdue remainder), at the lowest feasible quality.
pub struct Baseline1Policy {
    pub planning: PlanningInputs,
    pub videos: Vec<VideoTrace>,
    pub floor_margin: f64,
}

impl FramePolicy for Baseline1Policy {
    fn plan_frame(&mut self, ctx: &FrameContext) -> Result<FrameDecision, PlanError> {
        let playing = ctx.frame + 1;
        let schedules: Vec<Schedule> = ctx
            .queues
            .iter()
            .map(|q| {
                let it = q.last_complete_segment();
                let due = (playing + 1).min(q.n_segments());
                Schedule {
                    first: it + 1,
                    count: due.saturating_sub(it),
                    urgent: true,
                }
            })
            .collect();
        for level in (0..=ENHANCEMENT_LAYERS).rev() {
            if let Some(d) = try_schedules(
                &self.planning,
                &self.videos,
                ctx,
                &schedules,
                level,
                self.floor_margin,
            )? {
                return Ok(d);
            }
        }
        Err(PlanError::Infeasible { slack: f64::NAN })
    }
}
