//! Two-timescale slot-level Monte Carlo engine and QoS auditing.

mod engine;
mod policies;
mod queues;

pub use engine::{
    adjust_plan_runtime, compute_ee, run_window, EnergyLedger, FrameContext, FrameDecision,
    FramePolicy, Runtime, SimError, SimParams, SimRtUser, SimVodUser, WindowOutcome,
};
pub use policies::{Baseline1Policy, HeuristicPolicy};
pub use queues::{RTQueue, VoDQueue};

/// Minimum slot count for a fully trusted RT delay statistic.
pub const RT_AUDIT_MIN_SLOTS: u64 = 1_000_000;

/// Per-user QoS verdicts over an aggregated run.
#[derive(Debug, Clone)]
pub struct QosAudit {
    pub vod_stalls: u64,
    pub stall_time_s: f64,
    /// `(violation_fraction, meets_bound)` per RT user.
    pub rt: Vec<(f64, bool)>,
    /// True when fewer slots than [`RT_AUDIT_MIN_SLOTS`] back the estimate.
    pub low_confidence: bool,
}

/// Compare empirical delay-violation fractions against the target and flag
/// runs too short for tight statistics.
pub fn audit_qos(
    stalls: u64,
    stall_time_s: f64,
    per_rt_violation: &[f64],
    epsilon: f64,
    slots: u64,
) -> QosAudit {
    QosAudit {
        vod_stalls: stalls,
        stall_time_s,
        rt: per_rt_violation
            .iter()
            .map(|&v| (v, v <= epsilon))
            .collect(),
        low_confidence: slots < RT_AUDIT_MIN_SLOTS,
    }
}
