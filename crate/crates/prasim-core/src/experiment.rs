//! Experiment orchestration: scenario assembly, paired-seed policy runs,
//! sweeps, result tables, and summaries.
//!
//! Pairing: every random stream (placement, mobility, video, fading,
//! arrivals) is keyed by `(seed, window, user, ...)` and never by policy, so
//! policies compared at the same seed face identical worlds and channel
//! realizations.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{
    derived_rng, large_scale_trace, median_gain, mix_key, predict_trace, sample_mobility,
    FadingSampler, Geometry, LargeScaleTrace, StreamKind, VelocityChain,
};
use crate::config::{ConfigError, InitialPosition, Policy, ScenarioConfig, SweepSpec};
use crate::planner::{
    baseline2_plan, baseline3_plan, degrade_until_feasible, plan_optimal_window, PlanError,
    PlanningInputs, RadioParams, RtUserInput, VodUserInput, WindowPlan,
};
use crate::simulator::{
    compute_ee, run_window, Baseline1Policy, EnergyLedger, HeuristicPolicy, Runtime, SimError,
    SimParams, SimRtUser, SimVodUser, WindowOutcome,
};
use crate::traffic::{
    effective_bandwidth, import_video_trace, solve_qos_exponent, QoSSpec, RTArrivalSpec,
    VideoGenerator, VideoTrace, ENHANCEMENT_LAYERS,
};

/// One line of the result table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub policy: Policy,
    pub seed: u64,
    pub m_d: usize,
    pub m_r: usize,
    pub q: f64,
    /// Mean delivered quality level; `None` renders as NA (admission failed
    /// or no VoD users).
    pub quality: Option<f64>,
    pub bits: f64,
    pub energy_j: f64,
    pub ee_bits_per_j: f64,
    pub stalls: u64,
    pub max_rt_violation: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("planning failed: {0}")]
    Plan(String),
    #[error("simulation failed: {0}")]
    Sim(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("result table: {0}")]
    Table(String),
}

/// Scenario constants derived once from a config.
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub geometry: Geometry,
    pub chain: VelocityChain,
    pub rt_spec: RTArrivalSpec,
    pub theta: f64,
    pub beta: f64,
    pub eb_bps: f64,
    pub radio: RadioParams,
    pub sim: SimParams,
    pub video: VideoSource,
}

pub enum VideoSource {
    Synthetic(VideoGenerator),
    File(VideoTrace),
}

impl Scenario {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let geometry = Geometry::new(
            cfg.geometry.bs_spacing_m,
            cfg.geometry.road_offset_m,
            cfg.bs_count(),
        );
        let chain = VelocityChain::new(
            cfg.mobility.q,
            cfg.mobility.v_min_mps,
            cfg.mobility.v_max_mps,
            cfg.mobility.dv_mps,
            cfg.window.frame_s,
        )
        .map_err(|e| ExperimentError::Plan(e.to_string()))?;
        let rt_spec = RTArrivalSpec::new(
            cfg.traffic.rt_packets_per_s,
            1.0 / (cfg.traffic.rt_mean_packet_kbits * 1e3),
        )
        .map_err(|e| ExperimentError::Plan(e.to_string()))?;
        let qos = QoSSpec::new(
            cfg.traffic.delay_bound_ms * 1e-3,
            cfg.traffic.delay_violation_prob,
        )
        .map_err(|e| ExperimentError::Plan(e.to_string()))?;
        let exponent =
            solve_qos_exponent(&rt_spec, &qos).map_err(|e| ExperimentError::Plan(e.to_string()))?;
        let theta = exponent.theta;
        let beta = exponent.beta(cfg.window.slot_s, cfg.radio.subcarrier_hz);
        let eb_bps = effective_bandwidth(&rt_spec, theta)
            .map_err(|e| ExperimentError::Plan(e.to_string()))?;

        let radio = RadioParams {
            p_ave_w: cfg.radio.p_max_w,
            k_max: cfg.radio.k_max as f64,
            p_c_w: cfg.p_c_w(),
            amp_eff: cfg.radio.amp_eff,
            subcarrier_hz: cfg.radio.subcarrier_hz,
            noise_w: cfg.noise_w(),
            capacity_gap: cfg.radio.capacity_gap,
        };
        let sim = SimParams {
            n_frames: cfg.window.n_frames,
            n_slots_per_frame: cfg.n_slots(),
            frame_s: cfg.window.frame_s,
            slot_s: cfg.window.slot_s,
            n_bs: geometry.bs_count,
            p_c_w: cfg.p_c_w(),
            p_0_w: cfg.p_0_w(),
            amp_eff: cfg.radio.amp_eff,
            subcarrier_hz: cfg.radio.subcarrier_hz,
            noise_w: cfg.noise_w(),
            capacity_gap: cfg.radio.capacity_gap,
            d_max_s: cfg.traffic.delay_bound_ms * 1e-3,
        };
        let video = if cfg.traffic.video_trace_file.is_empty() {
            VideoSource::Synthetic(VideoGenerator {
                base_rate_bps: cfg.traffic.video_base_kbps * 1e3,
                enh_rate_bps: cfg.traffic.video_enh_kbps * 1e3,
                jitter: cfg.traffic.video_jitter,
                segment_s: cfg.window.frame_s,
            })
        } else {
            let file = std::fs::File::open(&cfg.traffic.video_trace_file)?;
            let trace = import_video_trace(std::io::BufReader::new(file))
                .map_err(|e| ExperimentError::Plan(e.to_string()))?;
            if trace.n_segments() < cfg.window.n_frames + 1 {
                return Err(ExperimentError::Plan(format!(
                    "video trace has {} segments, window needs {}",
                    trace.n_segments(),
                    cfg.window.n_frames + 1
                )));
            }
            VideoSource::File(trace)
        };
        Ok(Self {
            cfg: cfg.clone(),
            geometry,
            chain,
            rt_spec,
            theta,
            beta,
            eb_bps,
            radio,
            sim,
            video,
        })
    }

    fn n_users(&self) -> usize {
        self.cfg.users.vod_count + self.cfg.users.rt_count
    }
}

/// One window's realized world: true and predicted traces plus the videos.
pub struct World {
    pub true_traces: Vec<LargeScaleTrace>,
    pub pred_traces: Vec<LargeScaleTrace>,
    pub videos: Vec<VideoTrace>,
}

impl World {
    pub fn generate(scen: &Scenario, seed: u64, window: u64) -> World {
        let rep_key = mix_key(seed, window);
        let cfg = &scen.cfg;
        let nf = cfg.window.n_frames;
        let n = scen.n_users();
        let mut true_traces = Vec::with_capacity(n);
        let mut pred_traces = Vec::with_capacity(n);
        for u in 0..n {
            let x0 = match &cfg.users.initial_position {
                InitialPosition::UniformFirstCell => {
                    let mut rng = derived_rng(rep_key, StreamKind::Placement, u as u64, 0);
                    rng.gen::<f64>() * scen.geometry.bs_spacing_m
                }
                InitialPosition::Uniform { lo_m, hi_m } => {
                    let mut rng = derived_rng(rep_key, StreamKind::Placement, u as u64, 0);
                    lo_m + rng.gen::<f64>() * (hi_m - lo_m)
                }
                InitialPosition::Fixed { at_m } => at_m[u],
            };
            let v0 = cfg.users.initial_velocity_mps;
            let mut rng = derived_rng(rep_key, StreamKind::Mobility, u as u64, 0);
            let mobility = sample_mobility(&scen.chain, x0, v0, nf, &mut rng)
                .expect("validated initial velocity");
            true_traces.push(large_scale_trace(&scen.geometry, &mobility));
            pred_traces.push(predict_trace(&scen.geometry, x0, v0, nf, cfg.window.frame_s));
        }
        let videos = (0..cfg.users.vod_count)
            .map(|u| match &scen.video {
                VideoSource::Synthetic(generator) => {
                    let mut rng = derived_rng(rep_key, StreamKind::Video, u as u64, 0);
                    generator.generate(nf + 1, &mut rng)
                }
                VideoSource::File(trace) => VideoTrace {
                    layers: trace.layers[..nf + 1].to_vec(),
                },
            })
            .collect();
        World {
            true_traces,
            pred_traces,
            videos,
        }
    }
}

/// Per-user demand vectors at a quality level: entry `i` is the segment
/// played in frame `i+1` (1-based segment `i+2`), inflated by the margin.
pub fn demands_at(scen: &Scenario, world: &World, level: usize) -> Vec<Vec<f64>> {
    let nf = scen.cfg.window.n_frames;
    let margin = 1.0 + scen.cfg.run.vod_margin;
    world
        .videos
        .iter()
        .map(|v| {
            (0..nf)
                .map(|i| v.segment_bits(i + 1, level) * margin)
                .collect()
        })
        .collect()
}

/// Planner-facing inputs built from a world (predicted or true gains).
pub fn planning_inputs(scen: &Scenario, world: &World, use_true_gains: bool) -> PlanningInputs {
    let cfg = &scen.cfg;
    let nf = cfg.window.n_frames;
    let traces = if use_true_gains {
        &world.true_traces
    } else {
        &world.pred_traces
    };
    let vod = (0..cfg.users.vod_count)
        .map(|m| VodUserInput {
            gains: traces[m].gains.clone(),
            bs: traces[m].bs_index.clone(),
            demand_bits: vec![0.0; nf],
        })
        .collect();
    let rt = (0..cfg.users.rt_count)
        .map(|r| {
            let m = cfg.users.vod_count + r;
            RtUserInput {
                gains: traces[m].gains.clone(),
                bs: traces[m].bs_index.clone(),
                eb_bps: scen.eb_bps * (1.0 + cfg.run.rt_margin),
                theta: scen.theta,
                beta: scen.beta,
            }
        })
        .collect();
    PlanningInputs {
        vod,
        rt,
        n_frames: nf,
        frame_s: cfg.window.frame_s,
        slot_s: cfg.window.slot_s,
        n_bs: scen.geometry.bs_count,
        radio: scen.radio,
    }
}

fn q_max_bits(scen: &Scenario, video: &VideoTrace) -> f64 {
    let mean_full: f64 =
        video.sizes_at(ENHANCEMENT_LAYERS).iter().sum::<f64>() / video.n_segments() as f64;
    scen.cfg.users.buffer_segments * mean_full
}

/// Plan (for window policies) and simulate one window under one policy.
/// `Ok(None)` means the load was not admissible (an NA outcome).
pub fn simulate_window(
    scen: &Scenario,
    world: &World,
    policy: Policy,
    seed: u64,
    window: u64,
) -> Result<Option<(WindowOutcome, Option<f64>)>, ExperimentError> {
    let cfg = &scen.cfg;
    let rep_key = mix_key(seed, window);
    let fading = FadingSampler::new(mix_key(rep_key, StreamKind::Fading as u64));
    let arrivals_seed = rep_key;

    let vod_users: Vec<SimVodUser> = (0..cfg.users.vod_count)
        .map(|m| SimVodUser {
            video: world.videos[m].clone(),
            gains: world.true_traces[m].gains.clone(),
            q_max_bits: if policy == Policy::Heuristic {
                Some(q_max_bits(scen, &world.videos[m]))
            } else {
                None
            },
        })
        .collect();
    let rt_users: Vec<SimRtUser> = (0..cfg.users.rt_count)
        .map(|r| SimRtUser {
            spec: scen.rt_spec,
            beta: scen.beta,
            gains: world.true_traces[cfg.users.vod_count + r].gains.clone(),
        })
        .collect();

    let window_plan = |planner: &dyn Fn(&PlanningInputs) -> Result<WindowPlan, PlanError>|
     -> Result<Option<(WindowPlan, usize)>, ExperimentError> {
        let inputs = planning_inputs(scen, world, false);
        match degrade_until_feasible(&inputs, |level| demands_at(scen, world, level), planner) {
            Ok((plan, level)) => Ok(Some((plan, level))),
            Err(PlanError::Infeasible { .. }) => Ok(None),
            Err(e) => Err(ExperimentError::Plan(e.to_string())),
        }
    };

    let outcome = match policy {
        Policy::Optimal | Policy::OptimalAdjusted | Policy::Baseline2 | Policy::Baseline3 => {
            let edge = scen.geometry.cell_edge_gain();
            let planned = match policy {
                Policy::Baseline2 => window_plan(&|inp| baseline2_plan(inp, edge))?,
                Policy::Baseline3 => window_plan(&baseline3_plan)?,
                _ => window_plan(&plan_optimal_window)?,
            };
            let Some((plan, level)) = planned else {
                return Ok(None);
            };
            let predicted: Vec<Vec<f64>> = world.pred_traces.iter().map(|t| t.gains.clone()).collect();
            let runtime = Runtime::Window {
                plan: &plan,
                predicted_gains: Some(&predicted),
                adjust: policy == Policy::OptimalAdjusted,
                quality_level: level,
            };
            let out = run_window(&scen.sim, &vod_users, &rt_users, runtime, &fading, arrivals_seed)
                .map_err(|e| ExperimentError::Sim(e.to_string()))?;
            let quality = (!vod_users.is_empty()).then_some(level as f64);
            (out, quality)
        }
        Policy::Heuristic => {
            let planning = planning_inputs(scen, world, true);
            let alpha_med: Vec<f64> = (0..cfg.users.vod_count)
                .map(|m| median_gain(&world.pred_traces[m]))
                .collect();
            let mut policy_state = HeuristicPolicy {
                planning,
                videos: world.videos.clone(),
                alpha_med,
                floor_margin: cfg.run.vod_margin,
            };
            match run_window(
                &scen.sim,
                &vod_users,
                &rt_users,
                Runtime::PerFrame(&mut policy_state),
                &fading,
                arrivals_seed,
            ) {
                Ok(out) => {
                    let quality = out.mean_quality;
                    (out, quality)
                }
                Err(SimError::Admission { .. }) => return Ok(None),
                Err(e) => return Err(ExperimentError::Sim(e.to_string())),
            }
        }
        Policy::Baseline1 => {
            let planning = planning_inputs(scen, world, true);
            let mut policy_state = Baseline1Policy {
                planning,
                videos: world.videos.clone(),
                floor_margin: cfg.run.vod_margin,
            };
            match run_window(
                &scen.sim,
                &vod_users,
                &rt_users,
                Runtime::PerFrame(&mut policy_state),
                &fading,
                arrivals_seed,
            ) {
                Ok(out) => {
                    let quality = out.mean_quality;
                    (out, quality)
                }
                Err(SimError::Admission { .. }) => return Ok(None),
                Err(e) => return Err(ExperimentError::Sim(e.to_string())),
            }
        }
    };
    Ok(Some(outcome))
}

/// Window plan a policy would make for this world, for export tooling.
/// Per-frame policies return `Ok(None)`: their allocations only exist
/// against live queue state.
pub fn plan_window_for_export(
    scen: &Scenario,
    world: &World,
    policy: Policy,
) -> Result<Option<(WindowPlan, usize)>, ExperimentError> {
    let planner: &dyn Fn(&PlanningInputs) -> Result<WindowPlan, PlanError> = match policy {
        Policy::Optimal | Policy::OptimalAdjusted => &plan_optimal_window,
        Policy::Baseline3 => &baseline3_plan,
        Policy::Baseline2 => {
            let edge = scen.geometry.cell_edge_gain();
            let inputs = planning_inputs(scen, world, false);
            return match degrade_until_feasible(
                &inputs,
                |level| demands_at(scen, world, level),
                |inp| baseline2_plan(inp, edge),
            ) {
                Ok(found) => Ok(Some(found)),
                Err(PlanError::Infeasible { .. }) => Ok(None),
                Err(e) => Err(ExperimentError::Plan(e.to_string())),
            };
        }
        Policy::Heuristic | Policy::Baseline1 => return Ok(None),
    };
    let inputs = planning_inputs(scen, world, false);
    match degrade_until_feasible(&inputs, |level| demands_at(scen, world, level), planner) {
        Ok(found) => Ok(Some(found)),
        Err(PlanError::Infeasible { .. }) => Ok(None),
        Err(e) => Err(ExperimentError::Plan(e.to_string())),
    }
}

/// Run one (config, policy, seed) cell: all windows, aggregated.
pub fn run_one(scen: &Scenario, policy: Policy, seed: u64) -> Result<RunRecord, ExperimentError> {
    let cfg = &scen.cfg;
    let mut ledger = EnergyLedger::default();
    let mut bits = 0.0;
    let mut stalls = 0u64;
    let mut departed = vec![0.0; cfg.users.rt_count];
    let mut violating = vec![0.0; cfg.users.rt_count];
    let mut quality_sum = 0.0;
    let mut quality_n = 0usize;
    let mut admissible = true;

    for window in 0..cfg.run.windows as u64 {
        let world = World::generate(scen, seed, window);
        match simulate_window(scen, &world, policy, seed, window)? {
            Some((out, quality)) => {
                bits += out.vod_delivered_bits + out.rt_departed_bits;
                ledger.add(&out.ledger);
                stalls += out.stalls;
                for r in 0..cfg.users.rt_count {
                    departed[r] += out.per_rt_departed[r];
                    violating[r] += out.per_rt_violating[r];
                }
                if let Some(q) = quality {
                    quality_sum += q;
                    quality_n += 1;
                }
            }
            None => {
                admissible = false;
                break;
            }
        }
    }

    let max_rt_violation = departed
        .iter()
        .zip(&violating)
        .map(|(&d, &v)| if d > 0.0 { v / d } else { 0.0 })
        .fold(0.0, f64::max);
    let quality = if !admissible {
        None
    } else if quality_n > 0 {
        Some(quality_sum / quality_n as f64)
    } else {
        None
    };
    let (bits, energy_j, ee, stalls) = if admissible {
        (bits, ledger.total_j(), compute_ee(&ledger, bits), stalls)
    } else {
        (0.0, 0.0, 0.0, 0)
    };
    Ok(RunRecord {
        policy,
        seed,
        m_d: cfg.users.vod_count,
        m_r: cfg.users.rt_count,
        q: cfg.mobility.q,
        quality,
        bits,
        energy_j: energy_j,
        ee_bits_per_j: ee,
        stalls,
        max_rt_violation: if admissible { max_rt_violation } else { 0.0 },
    })
}

/// Run the whole experiment matrix: sweep points x seeds x policies,
/// deterministically ordered, windows paired across policies by seed.
pub fn run_experiment(
    cfg: &ScenarioConfig,
    sweep: Option<&SweepSpec>,
) -> Result<Vec<RunRecord>, ExperimentError> {
    let configs: Vec<ScenarioConfig> = match sweep {
        None => vec![cfg.clone()],
        Some(spec) => (0..spec.values.len())
            .map(|i| spec.apply(cfg, i))
            .collect::<Result<_, _>>()?,
    };
    let mut cells = Vec::new();
    for (ci, c) in configs.iter().enumerate() {
        for s in 0..c.run.num_seeds as u64 {
            for &p in &c.policies() {
                cells.push((ci, c.run.seed + s, p));
            }
        }
    }
    let scenarios: Vec<Scenario> = configs
        .iter()
        .map(Scenario::build)
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<(usize, Result<RunRecord, ExperimentError>)> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(ci, seed, policy))| (idx, run_one(&scenarios[ci], policy, seed)))
        .collect();
    rows.sort_by_key(|(idx, _)| *idx);
    rows.into_iter().map(|(_, r)| r).collect()
}

pub const RESULT_HEADER: &str =
    "policy\tseed\tm_d\tm_r\tq\tquality_level\tbits\tenergy_j\tee_bits_per_j\tstalls\tmax_rt_violation";

pub fn write_results<W: Write>(out: &mut W, records: &[RunRecord], header: bool) -> std::io::Result<()> {
    if header {
        writeln!(out, "{RESULT_HEADER}")?;
    }
    for r in records {
        let q = r
            .quality
            .map_or("NA".to_string(), |v| format!("{v:.4}"));
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.4}\t{}\t{:.6e}\t{:.6e}\t{:.6e}\t{}\t{:.6e}",
            r.policy.name(),
            r.seed,
            r.m_d,
            r.m_r,
            r.q,
            q,
            r.bits,
            r.energy_j,
            r.ee_bits_per_j,
            r.stalls,
            r.max_rt_violation
        )?;
    }
    Ok(())
}

pub fn read_results<R: BufRead>(input: R) -> Result<Vec<RunRecord>, ExperimentError> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with("policy\t") {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 11 {
            return Err(ExperimentError::Table(format!(
                "line {}: expected 11 fields, got {}",
                lineno + 1,
                f.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64, ExperimentError> {
            s.parse()
                .map_err(|_| ExperimentError::Table(format!("line {}: bad number '{s}'", lineno + 1)))
        };
        out.push(RunRecord {
            policy: Policy::parse(f[0]).ok_or_else(|| {
                ExperimentError::Table(format!("line {}: unknown policy '{}'", lineno + 1, f[0]))
            })?,
            seed: f[1]
                .parse()
                .map_err(|_| ExperimentError::Table(format!("line {}: bad seed", lineno + 1)))?,
            m_d: f[2]
                .parse()
                .map_err(|_| ExperimentError::Table(format!("line {}: bad m_d", lineno + 1)))?,
            m_r: f[3]
                .parse()
                .map_err(|_| ExperimentError::Table(format!("line {}: bad m_r", lineno + 1)))?,
            q: parse_f(f[4])?,
            quality: if f[5] == "NA" { None } else { Some(parse_f(f[5])?) },
            bits: parse_f(f[6])?,
            energy_j: parse_f(f[7])?,
            ee_bits_per_j: parse_f(f[8])?,
            stalls: f[9]
                .parse()
                .map_err(|_| ExperimentError::Table(format!("line {}: bad stalls", lineno + 1)))?,
            max_rt_violation: parse_f(f[10])?,
        });
    }
    Ok(out)
}

/// Per-(policy, load, q) aggregate of the run records.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: Policy,
    pub m_d: usize,
    pub m_r: usize,
    pub q: f64,
    pub runs: usize,
    pub mean_ee: f64,
    /// 95 % normal-approximation half width of the EE mean.
    pub ee_half_width: f64,
    /// Mean quality; NA if any contributing run was NA.
    pub quality: Option<f64>,
    pub total_stalls: u64,
    pub max_rt_violation: f64,
}

/// Group records by (policy, m_d, m_r, q) preserving first-seen order.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Policy, usize, usize, u64)> = Vec::new();
    let mut rows: Vec<SummaryRow> = Vec::new();
    for r in records {
        let key = (r.policy, r.m_d, r.m_r, r.q.to_bits());
        let idx = match keys.iter().position(|&k| k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                rows.push(SummaryRow {
                    policy: r.policy,
                    m_d: r.m_d,
                    m_r: r.m_r,
                    q: r.q,
                    runs: 0,
                    mean_ee: 0.0,
                    ee_half_width: 0.0,
                    quality: Some(0.0),
                    total_stalls: 0,
                    max_rt_violation: 0.0,
                });
                rows.len() - 1
            }
        };
        let row = &mut rows[idx];
        row.runs += 1;
        row.mean_ee += r.ee_bits_per_j;
        row.ee_half_width += r.ee_bits_per_j * r.ee_bits_per_j;
        row.total_stalls += r.stalls;
        row.max_rt_violation = row.max_rt_violation.max(r.max_rt_violation);
        row.quality = match (row.quality, r.quality) {
            (Some(acc), Some(q)) => Some(acc + q),
            _ => None,
        };
    }
    for row in &mut rows {
        let n = row.runs as f64;
        let mean = row.mean_ee / n;
        let var = (row.ee_half_width / n - mean * mean).max(0.0);
        row.mean_ee = mean;
        row.ee_half_width = if row.runs > 1 {
            1.96 * (var / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        row.quality = row.quality.map(|s| s / n);
    }
    rows
}

pub const SUMMARY_HEADER: &str =
    "policy\tm_d\tm_r\tq\truns\tmean_ee\tee_half_width\tquality\ttotal_stalls\tmax_rt_violation";

pub fn write_summary<W: Write>(out: &mut W, rows: &[SummaryRow]) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        let q = r.quality.map_or("NA".to_string(), |v| format!("{v:.4}"));
        writeln!(
            out,
            "{}\t{}\t{}\t{:.4}\t{}\t{:.6e}\t{:.6e}\t{}\t{}\t{:.6e}",
            r.policy.name(),
            r.m_d,
            r.m_r,
            r.q,
            r.runs,
            r.mean_ee,
            r.ee_half_width,
            q,
            r.total_stalls,
            r.max_rt_violation
        )?;
    }
    Ok(())
}
