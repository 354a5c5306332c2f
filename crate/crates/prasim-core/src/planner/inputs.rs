//! Planner-facing descriptions of users, radio limits, and plans.

use crate::linkmodel::LinkParams;

/// Radio resource limits shared by all planning problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// Per-BS per-frame average transmit power cap (W).
    pub p_ave_w: f64,
    /// Per-BS subcarrier budget.
    pub k_max: f64,
    /// Circuit power per occupied subcarrier (W).
    pub p_c_w: f64,
    /// Power amplifier efficiency `rho` in (0, 1].
    pub amp_eff: f64,
    pub subcarrier_hz: f64,
    /// Noise power per subcarrier (W).
    pub noise_w: f64,
    /// Capacity gap `phi >= 1`.
    pub capacity_gap: f64,
}

impl RadioParams {
    pub fn link(&self, alpha: f64) -> LinkParams {
        LinkParams {
            alpha,
            capacity_gap: self.capacity_gap,
            noise_w: self.noise_w,
            subcarrier_hz: self.subcarrier_hz,
        }
    }
}

/// A VoD user as the planner sees it: per-frame gains/associations and the
/// bits that must be delivered during each frame (the segment played in the
/// next frame, so entry `i` holds `R_{i+2}` in playback numbering).
#[derive(Debug, Clone)]
pub struct VodUserInput {
    pub gains: Vec<f64>,
    pub bs: Vec<usize>,
    pub demand_bits: Vec<f64>,
}

/// An RT user: per-frame gains/associations and the QoS floor.
#[derive(Debug, Clone)]
pub struct RtUserInput {
    pub gains: Vec<f64>,
    pub bs: Vec<usize>,
    /// Effective bandwidth of the arrival process at the QoS exponent (bits/s).
    pub eb_bps: f64,
    pub theta: f64,
    pub beta: f64,
}

/// Everything a window or per-frame planner needs.
#[derive(Debug, Clone)]
pub struct PlanningInputs {
    pub vod: Vec<VodUserInput>,
    pub rt: Vec<RtUserInput>,
    pub n_frames: usize,
    pub frame_s: f64,
    pub slot_s: f64,
    pub n_bs: usize,
    pub radio: RadioParams,
}

impl PlanningInputs {
    pub fn n_users(&self) -> usize {
        self.vod.len() + self.rt.len()
    }

    /// Gain of user `m` (VoD users first, then RT) in frame `i`.
    pub fn gain(&self, m: usize, i: usize) -> f64 {
        if m < self.vod.len() {
            self.vod[m].gains[i]
        } else {
            self.rt[m - self.vod.len()].gains[i]
        }
    }

    pub fn bs_of(&self, m: usize, i: usize) -> usize {
        if m < self.vod.len() {
            self.vod[m].bs[i]
        } else {
            self.rt[m - self.vod.len()].bs[i]
        }
    }
}

/// A resource allocation plan over a window: average power and subcarrier
/// count per user per frame (both continuous).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    /// `power_w[m][i]` in W.
    pub power_w: Vec<Vec<f64>>,
    /// `subcarriers[m][i]`, continuous.
    pub subcarriers: Vec<Vec<f64>>,
    /// Planned energy rate `sum (P/rho + P_c·K)` in W.
    pub objective_w: f64,
}

impl WindowPlan {
    pub fn n_frames(&self) -> usize {
        self.power_w.first().map_or(0, |v| v.len())
    }
}

/// Allocation for a single frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FramePlan {
    pub power_w: Vec<f64>,
    pub subcarriers: Vec<f64>,
    pub objective_w: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("planning problem is infeasible (phase-I slack {slack:.3e})")]
    Infeasible { slack: f64 },
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("inconsistent inputs: {0}")]
    BadInputs(String),
}
