//! Planning policies: the jointly optimal window plan, per-frame plans, the
//! median-threshold heuristic, the three baselines, and quality degradation.

mod heuristic;
mod inputs;
mod program;
mod window;

pub use heuristic::{heuristic_segment_decision, HeuristicState, SegmentDecision};
pub use inputs::{
    FramePlan, PlanError, PlanningInputs, RadioParams, RtUserInput, VodUserInput, WindowPlan,
};
pub use program::{
    apply_multicell_constraints, linear_floor, rt_capacity_constraint, vod_rate_constraint,
    PerspectiveTerm,
};
pub use window::{
    baseline2_plan, baseline3_plan, degrade_until_feasible, plan_frame, plan_optimal_window,
    plan_rt_per_frame, plan_violation,
};

use std::io::Write;

/// Export plans as `policy<TAB>user<TAB>frame<TAB>power_w<TAB>subcarriers<TAB>quality`.
pub fn export_plan<W: Write>(
    out: &mut W,
    policy: &str,
    plan: &WindowPlan,
    quality_level: Option<usize>,
) -> std::io::Result<()> {
    writeln!(out, "policy\tuser\tframe\tpower_w\tsubcarriers\tquality")?;
    let q = quality_level.map_or("NA".to_string(), |l| l.to_string());
    for (m, (pw, kw)) in plan.power_w.iter().zip(&plan.subcarriers).enumerate() {
        for (i, (&p, &k)) in pw.iter().zip(kw).enumerate() {
            writeln!(out, "{policy}\t{m}\t{i}\t{p:.9e}\t{k:.9e}\t{q}")?;
        }
    }
    Ok(())
}
