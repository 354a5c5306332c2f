//! Slot-level Monte Carlo engine: applies a plan (or a per-frame policy),
//! samples fading and arrivals, updates queues, and accounts energy.

use crate::channel::{derived_rng, FadingSampler, StreamKind};
use crate::linkmodel::{allocate_slot_power, rt_water_level, vod_water_level, ServiceKind};
use crate::planner::{PlanError, WindowPlan};
use crate::simulator::queues::{RTQueue, VoDQueue};
use crate::traffic::{sample_arrivals, RTArrivalSpec, VideoTrace};

/// Physical and timing parameters of one simulated window.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub n_frames: usize,
    pub n_slots_per_frame: usize,
    pub frame_s: f64,
    pub slot_s: f64,
    pub n_bs: usize,
    /// Circuit power per occupied subcarrier (W).
    pub p_c_w: f64,
    /// Fixed circuit power per BS (W).
    pub p_0_w: f64,
    /// Amplifier efficiency.
    pub amp_eff: f64,
    pub subcarrier_hz: f64,
    pub noise_w: f64,
    pub capacity_gap: f64,
    /// RT delay bound for the audit (s).
    pub d_max_s: f64,
}

impl SimParams {
    pub fn link(&self, alpha: f64) -> crate::linkmodel::LinkParams {
        crate::linkmodel::LinkParams {
            alpha,
            capacity_gap: self.capacity_gap,
            noise_w: self.noise_w,
            subcarrier_hz: self.subcarrier_hz,
        }
    }
}

/// A VoD user at simulation time: its video, true gains, and buffer bound.
#[derive(Debug, Clone)]
pub struct SimVodUser {
    pub video: VideoTrace,
    pub gains: Vec<f64>,
    pub q_max_bits: Option<f64>,
}

/// An RT user at simulation time.
#[derive(Debug, Clone)]
pub struct SimRtUser {
    pub spec: RTArrivalSpec,
    pub beta: f64,
    pub gains: Vec<f64>,
}

/// Energy spent over a window, split by source.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyLedger {
    pub transmit_j: f64,
    pub circuit_j: f64,
    pub fixed_j: f64,
}

impl EnergyLedger {
    pub fn total_j(&self) -> f64 {
        self.transmit_j + self.circuit_j + self.fixed_j
    }

    pub fn add(&mut self, other: &EnergyLedger) {
        self.transmit_j += other.transmit_j;
        self.circuit_j += other.circuit_j;
        self.fixed_j += other.fixed_j;
    }
}

/// Result of simulating one window.
#[derive(Debug, Clone)]
pub struct WindowOutcome {
    pub vod_delivered_bits: f64,
    pub rt_departed_bits: f64,
    pub rt_arrived_bits: f64,
    pub ledger: EnergyLedger,
    pub stalls: u64,
    pub stall_time_s: f64,
    /// Violating-bit fraction per RT user.
    pub per_rt_violation: Vec<f64>,
    /// Departed and violating bits per RT user (for exact aggregation
    /// across windows).
    pub per_rt_departed: Vec<f64>,
    pub per_rt_violating: Vec<f64>,
    /// Mean delivered quality level across VoD users (None without VoD).
    pub mean_quality: Option<f64>,
    pub slots: u64,
    /// Untruncated water-filling power averaged per (user, frame); a
    /// diagnostic for the law's power budget, not an energy term.
    pub law_avg_power_w: Vec<Vec<f64>>,
}

/// What drives the per-frame allocations.
pub enum Runtime<'a> {
    /// A window plan made at the window start. With `adjust`, transmit
    /// power is rescaled each frame by `alpha_hat/alpha` (the water level
    /// then matches the planned one exactly); without it the planned power
    /// is spent as-is against the true gains.
    Window {
        plan: &'a WindowPlan,
        /// Predicted gains per user per frame (needed when `adjust`).
        predicted_gains: Option<&'a [Vec<f64>]>,
        adjust: bool,
        quality_level: usize,
    },
    /// A policy invoked at each frame start (heuristic, non-predictive).
    PerFrame(&'a mut dyn FramePolicy),
}

/// Frame-start view offered to per-frame policies.
pub struct FrameContext<'a> {
    /// 0-based frame index; the segment playing is `frame + 1` (1-based).
    pub frame: usize,
    pub queues: &'a [VoDQueue],
}

/// Allocations and scheduling decisions for one frame.
#[derive(Debug, Clone, Default)]
pub struct FrameDecision {
    /// Per user (VoD then RT), average power (W).
    pub power_w: Vec<f64>,
    /// Per user, planned subcarrier count (continuous).
    pub subcarriers: Vec<f64>,
    /// Per VoD user: deliver bits only up through this segment (1-based).
    pub cap_segment: Vec<usize>,
    /// Quality locks to apply before the frame: (vod user, segment, level).
    pub locks: Vec<(usize, usize, usize)>,
    /// Planned energy rate of this frame's allocation (W).
    pub objective_w: f64,
}

pub trait FramePolicy {
    fn plan_frame(&mut self, ctx: &FrameContext) -> Result<FrameDecision, PlanError>;
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("plan does not cover the window: {0}")]
    ShapeMismatch(String),
    #[error("frame {frame}: admission failure: {source}")]
    Admission { frame: usize, source: PlanError },
    #[error("frame {frame}: planner error: {source}")]
    Planner { frame: usize, source: PlanError },
}

/// Runtime power adjustment under imperfect prediction: spend
/// `alpha_hat·p_hat/alpha` so the gain-power product the plan assumed is
/// preserved (and with it the planned water level at unchanged bandwidth).
pub fn adjust_plan_runtime(planned_power_w: f64, predicted_alpha: f64, true_alpha: f64) -> f64 {
    planned_power_w * predicted_alpha / true_alpha
}

/// Energy efficiency in bits per Joule; zero when no energy was spent.
pub fn compute_ee(ledger: &EnergyLedger, useful_bits: f64) -> f64 {
    let e = ledger.total_j();
    if e <= 0.0 {
        0.0
    } else {
        useful_bits / e
    }
}

struct ActiveLink {
    k_int: usize,
    nu: f64,
    kind: ServiceKind,
    link: crate::linkmodel::LinkParams,
}

/// Simulate one window. Fading is drawn from `fading` (counter-based, so
/// identical seeds replay identical channels across policies); arrivals come
/// from ChaCha streams derived from `arrivals_seed`.
pub fn run_window(
    params: &SimParams,
    vod: &[SimVodUser],
    rt: &[SimRtUser],
    mut runtime: Runtime,
    fading: &FadingSampler,
    arrivals_seed: u64,
) -> Result<WindowOutcome, SimError> {
    let nf = params.n_frames;
    let ns = params.n_slots_per_frame;
    let n_users = vod.len() + rt.len();

    for (m, u) in vod.iter().enumerate() {
        if u.gains.len() != nf {
            return Err(SimError::ShapeMismatch(format!("VoD user {m} gains")));
        }
        if u.video.n_segments() < nf + 1 {
            return Err(SimError::ShapeMismatch(format!(
                "VoD user {m} video must span the window plus one segment"
            )));
        }
    }
    for (r, u) in rt.iter().enumerate() {
        if u.gains.len() != nf {
            return Err(SimError::ShapeMismatch(format!("RT user {r} gains")));
        }
    }
    if let Runtime::Window { plan, .. } = &runtime {
        if plan.power_w.len() != n_users || plan.power_w.iter().any(|p| p.len() != nf) {
            return Err(SimError::ShapeMismatch("plan shape".into()));
        }
    }

    let base_level = match &runtime {
        Runtime::Window { quality_level, .. } => *quality_level,
        Runtime::PerFrame(_) => crate::traffic::ENHANCEMENT_LAYERS,
    };
    let mut queues: Vec<VoDQueue> = vod
        .iter()
        .map(|u| VoDQueue::new(&u.video, base_level, params.frame_s, u.q_max_bits))
        .collect();
    let mut rt_queues: Vec<RTQueue> = rt.iter().map(|_| RTQueue::new()).collect();
    let mut ledger = EnergyLedger::default();
    let mut law_power = vec![vec![0.0; nf]; n_users];

    for frame in 0..nf {
        // Resolve this frame's allocations.
        let decision = match &mut runtime {
            Runtime::Window {
                plan,
                predicted_gains,
                adjust,
                ..
            } => {
                let mut power = Vec::with_capacity(n_users);
                let mut subc = Vec::with_capacity(n_users);
                for m in 0..n_users {
                    let mut p = plan.power_w[m][frame];
                    let k = plan.subcarriers[m][frame];
                    if *adjust {
                        let alpha_hat = predicted_gains
                            .expect("adjusted runtime needs predicted gains")[m][frame];
                        let alpha = if m < vod.len() {
                            vod[m].gains[frame]
                        } else {
                            rt[m - vod.len()].gains[frame]
                        };
                        p = adjust_plan_runtime(p, alpha_hat, alpha);
                    }
                    power.push(p);
                    subc.push(k);
                }
                FrameDecision {
                    power_w: power,
                    subcarriers: subc,
                    cap_segment: vod.iter().map(|u| u.video.n_segments()).collect(),
                    locks: Vec::new(),
                    objective_w: 0.0,
                }
            }
            Runtime::PerFrame(policy) => {
                let ctx = FrameContext {
                    frame,
                    queues: &queues,
                };
                match policy.plan_frame(&ctx) {
                    Ok(d) => d,
                    Err(e @ PlanError::Infeasible { .. }) => {
                        return Err(SimError::Admission { frame, source: e })
                    }
                    Err(e) => return Err(SimError::Planner { frame, source: e }),
                }
            }
        };

        for &(user, seg, level) in &decision.locks {
            queues[user].lock_level(&vod[user].video, seg, level);
        }

        // Fixed and circuit energy follow the planned (continuous) counts.
        ledger.fixed_j += params.frame_s * params.p_0_w * params.n_bs as f64;
        ledger.circuit_j +=
            params.frame_s * params.p_c_w * decision.subcarriers.iter().sum::<f64>();

        // Water levels for the frame, from the true gains.
        let mut links: Vec<Option<ActiveLink>> = Vec::with_capacity(n_users);
        for m in 0..n_users {
            let p = decision.power_w[m];
            let k = decision.subcarriers[m];
            if p <= 1e-15 || k <= 1e-6 {
                links.push(None);
                continue;
            }
            let alpha = if m < vod.len() {
                vod[m].gains[frame]
            } else {
                rt[m - vod.len()].gains[frame]
            };
            let link = params.link(alpha);
            // Continuous counts are floored for the slot simulator; the
            // fractional remainder's power rides on the integer subcarriers.
            let k_int = (k.floor() as usize).max(1);
            let pbar_s = p / k_int as f64;
            let (nu, kind) = if m < vod.len() {
                (
                    vod_water_level(pbar_s, &link).expect("positive power"),
                    ServiceKind::Vod,
                )
            } else {
                let beta = rt[m - vod.len()].beta;
                (
                    rt_water_level(pbar_s, beta, &link).expect("positive power"),
                    ServiceKind::Rt { beta },
                )
            };
            links.push(Some(ActiveLink {
                k_int,
                nu,
                kind,
                link,
            }));
        }

        let mut gains_buf: Vec<f64> = Vec::new();
        for slot in 0..ns {
            let slot_start = (frame * ns + slot) as f64 * params.slot_s;
            for m in 0..n_users {
                let Some(active) = &links[m] else {
                    if m >= vod.len() {
                        // Arrivals keep flowing even when nothing is scheduled.
                        let r = m - vod.len();
                        let mut rng =
                            derived_rng(arrivals_seed, StreamKind::Arrivals, m as u64, (frame * ns + slot) as u64);
                        let arr = sample_arrivals(&rt[r].spec, params.slot_s, &mut rng);
                        let abs: Vec<(f64, f64)> = arr
                            .packets
                            .iter()
                            .map(|&(off, bits)| (slot_start + off, bits))
                            .collect();
                        rt_queues[r].push_arrivals(&abs);
                    }
                    continue;
                };
                gains_buf.clear();
                gains_buf.extend(
                    (0..active.k_int).map(|k| fading.sample(m, frame, slot, k)),
                );
                let alloc = allocate_slot_power(active.nu, active.kind, &gains_buf, &active.link);
                law_power[m][frame] += alloc.total_power_w;

                if m < vod.len() {
                    let offered = alloc.rate_bps * params.slot_s;
                    let deliverable = queues[m].deliverable_now(decision.cap_segment[m]);
                    let sent = offered.min(deliverable);
                    if offered > 0.0 {
                        let busy_frac = sent / offered;
                        ledger.transmit_j +=
                            params.slot_s * busy_frac * alloc.total_power_w / params.amp_eff;
                    }
                    queues[m].deliver(sent);
                } else {
                    let r = m - vod.len();
                    let mut rng =
                        derived_rng(arrivals_seed, StreamKind::Arrivals, m as u64, (frame * ns + slot) as u64);
                    let arr = sample_arrivals(&rt[r].spec, params.slot_s, &mut rng);
                    let abs: Vec<(f64, f64)> = arr
                        .packets
                        .iter()
                        .map(|&(off, bits)| (slot_start + off, bits))
                        .collect();
                    rt_queues[r].push_arrivals(&abs);
                    let (_, busy) =
                        rt_queues[r].serve(alloc.rate_bps, slot_start, params.slot_s, params.d_max_s);
                    ledger.transmit_j += busy * alloc.total_power_w / params.amp_eff;
                }
            }
            for q in &mut queues {
                q.advance_playback(params.slot_s);
            }
        }
    }

    for row in &mut law_power {
        for v in row.iter_mut() {
            *v /= ns as f64;
        }
    }

    let mean_quality = if queues.is_empty() {
        None
    } else {
        Some(queues.iter().map(|q| q.mean_level()).sum::<f64>() / queues.len() as f64)
    };
    Ok(WindowOutcome {
        vod_delivered_bits: queues.iter().map(|q| q.delivered_bits()).sum(),
        rt_departed_bits: rt_queues.iter().map(|q| q.departed_bits).sum(),
        rt_arrived_bits: rt_queues.iter().map(|q| q.arrived_bits).sum(),
        ledger,
        stalls: queues.iter().map(|q| q.stalls).sum(),
        stall_time_s: queues.iter().map(|q| q.stall_time_s).sum(),
        per_rt_violation: rt_queues.iter().map(|q| q.violation_fraction()).collect(),
        per_rt_departed: rt_queues.iter().map(|q| q.departed_bits).collect(),
        per_rt_violating: rt_queues.iter().map(|q| q.violating_bits).collect(),
        mean_quality,
        slots: (nf * ns) as u64,
        law_avg_power_w: law_power,
    })
}
