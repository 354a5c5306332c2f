//! Scenario configuration: a nested key-value (TOML) file with defaults
//! drawn from the experiment parameter table. Unknown keys are rejected and
//! every field is range-checked before a scenario is built.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub bs_spacing_m: f64,
    pub road_offset_m: f64,
    /// 0 auto-sizes the deployment to cover the window's maximum reach.
    pub bs_count: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            bs_spacing_m: 500.0,
            road_offset_m: 100.0,
            bs_count: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    /// Frames per prediction window.
    pub n_frames: usize,
    pub frame_s: f64,
    pub slot_s: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            n_frames: 60,
            frame_s: 1.0,
            slot_s: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub p_max_w: f64,
    pub k_max: usize,
    pub subcarrier_hz: f64,
    /// Amplifier efficiency rho.
    pub amp_eff: f64,
    /// Per-subcarrier circuit power density (mW/MHz of subcarrier spacing).
    pub p_c_mw_per_mhz: f64,
    /// Fixed circuit power density (mW/MHz of system bandwidth).
    pub p_0_mw_per_mhz: f64,
    pub noise_dbm_per_hz: f64,
    pub capacity_gap: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            p_max_w: 40.0,
            k_max: 512,
            subcarrier_hz: 15_000.0,
            amp_eff: 0.388,
            p_c_mw_per_mhz: 72.0,
            p_0_mw_per_mhz: 136.0,
            noise_dbm_per_hz: -173.0,
            capacity_gap: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialPosition {
    /// Uniform over the first cell's road interval.
    UniformFirstCell,
    Uniform {
        lo_m: f64,
        hi_m: f64,
    },
    Fixed {
        at_m: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsersConfig {
    pub vod_count: usize,
    pub rt_count: usize,
    pub initial_position: InitialPosition,
    pub initial_velocity_mps: f64,
    /// Playout buffer size in full-quality segments (heuristic policy only).
    pub buffer_segments: f64,
}

impl Default for UsersConfig {
    fn default() -> Self {
        Self {
            vod_count: 1,
            rt_count: 1,
            initial_position: InitialPosition::UniformFirstCell,
            initial_velocity_mps: 20.0,
            buffer_segments: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub video_base_kbps: f64,
    pub video_enh_kbps: f64,
    pub video_jitter: f64,
    /// Optional delimited trace file; empty uses the synthetic generator.
    pub video_trace_file: String,
    pub rt_packets_per_s: f64,
    pub rt_mean_packet_kbits: f64,
    pub delay_bound_ms: f64,
    pub delay_violation_prob: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            video_base_kbps: 800.0,
            video_enh_kbps: 240.0,
            video_jitter: 0.2,
            video_trace_file: String::new(),
            rt_packets_per_s: 500.0,
            rt_mean_packet_kbits: 4.0,
            delay_bound_ms: 50.0,
            delay_violation_prob: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityConfig {
    /// Velocity-transition probability of the Markov chain, in [0, 0.5].
    pub q: f64,
    pub v_min_mps: f64,
    pub v_max_mps: f64,
    pub dv_mps: f64,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            q: 0.0,
            v_min_mps: 0.0,
            v_max_mps: 30.0,
            dv_mps: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Optimal,
    OptimalAdjusted,
    Heuristic,
    Baseline1,
    Baseline2,
    Baseline3,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Optimal => "optimal",
            Policy::OptimalAdjusted => "optimal-adjusted",
            Policy::Heuristic => "heuristic",
            Policy::Baseline1 => "baseline1",
            Policy::Baseline2 => "baseline2",
            Policy::Baseline3 => "baseline3",
        }
    }

    pub fn parse(s: &str) -> Option<Policy> {
        Some(match s {
            "optimal" => Policy::Optimal,
            "optimal-adjusted" => Policy::OptimalAdjusted,
            "heuristic" => Policy::Heuristic,
            "baseline1" => Policy::Baseline1,
            "baseline2" => Policy::Baseline2,
            "baseline3" => Policy::Baseline3,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub name: Policy,
    /// Additional policies run against the same seeds (paired channels).
    pub also: Vec<Policy>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            name: Policy::Optimal,
            also: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub num_seeds: usize,
    /// Prediction-window replications per run; total simulated time is
    /// `windows · n_frames · frame_s`.
    pub windows: usize,
    /// Safety factor on planned VoD delivery floors, so realized slot rates
    /// cover the playback constraint despite fading noise and subcarrier
    /// integerization.
    pub vod_margin: f64,
    /// Safety factor on the planned effective-bandwidth floors.
    pub rt_margin: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            num_seeds: 1,
            windows: 10,
            vod_margin: 0.03,
            rt_margin: 0.03,
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub window: WindowConfig,
    pub radio: RadioConfig,
    pub users: UsersConfig,
    pub traffic: TrafficConfig,
    pub mobility: MobilityConfig,
    pub policy: PolicyConfig,
    pub run: RunConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid value for {field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioConfig {
    pub fn from_str_validated(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_validated(&text)
    }

    pub fn dump(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// All policies to run (primary plus comparisons), de-duplicated in
    /// declaration order.
    pub fn policies(&self) -> Vec<Policy> {
        let mut out = vec![self.policy.name];
        for &p in &self.policy.also {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn bad(field: &'static str, message: String) -> ConfigError {
            ConfigError::Invalid { field, message }
        }
        let g = &self.geometry;
        if !(g.bs_spacing_m > 0.0) {
            return Err(bad("geometry.bs_spacing_m", "must be positive".into()));
        }
        if !(g.road_offset_m > 0.0) {
            return Err(bad("geometry.road_offset_m", "must be positive".into()));
        }
        let w = &self.window;
        if w.n_frames == 0 {
            return Err(bad("window.n_frames", "must be at least 1".into()));
        }
        if !(w.frame_s > 0.0 && w.slot_s > 0.0) {
            return Err(bad("window.frame_s", "durations must be positive".into()));
        }
        let ratio = w.frame_s / w.slot_s;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return Err(bad(
                "window.slot_s",
                format!("frame_s must be an integer multiple of slot_s (got ratio {ratio})"),
            ));
        }
        let r = &self.radio;
        if !(r.p_max_w > 0.0) {
            return Err(bad("radio.p_max_w", "must be positive".into()));
        }
        if r.k_max == 0 {
            return Err(bad("radio.k_max", "must be at least 1".into()));
        }
        if !(r.subcarrier_hz > 0.0) {
            return Err(bad("radio.subcarrier_hz", "must be positive".into()));
        }
        if !(r.amp_eff > 0.0 && r.amp_eff <= 1.0) {
            return Err(bad("radio.amp_eff", "must lie in (0, 1]".into()));
        }
        if r.p_c_mw_per_mhz < 0.0 || r.p_0_mw_per_mhz < 0.0 {
            return Err(bad("radio.p_c_mw_per_mhz", "must be nonnegative".into()));
        }
        if !(r.capacity_gap >= 1.0) {
            return Err(bad("radio.capacity_gap", "must be at least 1".into()));
        }
        let u = &self.users;
        if u.vod_count + u.rt_count == 0 && self.run.windows > 0 {
            // Zero users is allowed (energy baseline), nothing to check.
        }
        if let InitialPosition::Uniform { lo_m, hi_m } = u.initial_position {
            if !(hi_m >= lo_m && lo_m >= 0.0) {
                return Err(bad("users.initial_position", "need 0 <= lo_m <= hi_m".into()));
            }
        }
        if let InitialPosition::Fixed { at_m } = &u.initial_position {
            if at_m.len() != u.vod_count + u.rt_count {
                return Err(bad(
                    "users.initial_position",
                    format!("need {} positions, got {}", u.vod_count + u.rt_count, at_m.len()),
                ));
            }
            if at_m.iter().any(|&x| x < 0.0) {
                return Err(bad("users.initial_position", "positions must be >= 0".into()));
            }
        }
        if !(u.buffer_segments > 0.0) {
            return Err(bad("users.buffer_segments", "must be positive".into()));
        }
        let t = &self.traffic;
        if !(t.delay_violation_prob > 0.0 && t.delay_violation_prob < 1.0) {
            return Err(bad(
                "traffic.delay_violation_prob",
                format!("must lie in (0, 1), got {}", t.delay_violation_prob),
            ));
        }
        if !(t.delay_bound_ms > 0.0) {
            return Err(bad("traffic.delay_bound_ms", "must be positive".into()));
        }
        if !(t.rt_packets_per_s > 0.0 && t.rt_mean_packet_kbits > 0.0) {
            return Err(bad("traffic.rt_packets_per_s", "must be positive".into()));
        }
        if !(t.video_base_kbps > 0.0 && t.video_enh_kbps >= 0.0) {
            return Err(bad("traffic.video_base_kbps", "must be positive".into()));
        }
        if !(0.0..1.0).contains(&t.video_jitter) {
            return Err(bad("traffic.video_jitter", "must lie in [0, 1)".into()));
        }
        let m = &self.mobility;
        if !(0.0..=0.5).contains(&m.q) {
            return Err(bad("mobility.q", format!("must lie in [0, 0.5], got {}", m.q)));
        }
        if !(m.dv_mps > 0.0 && m.v_max_mps >= m.v_min_mps) {
            return Err(bad("mobility.dv_mps", "need dv > 0 and v_max >= v_min".into()));
        }
        let steps = (u.initial_velocity_mps - m.v_min_mps) / m.dv_mps;
        if u.initial_velocity_mps < m.v_min_mps
            || u.initial_velocity_mps > m.v_max_mps
            || (steps - steps.round()).abs() > 1e-9
        {
            return Err(bad(
                "users.initial_velocity_mps",
                "must be a state of the velocity chain".into(),
            ));
        }
        if self.run.num_seeds == 0 {
            return Err(bad("run.num_seeds", "must be at least 1".into()));
        }
        if self.run.windows == 0 {
            return Err(bad("run.windows", "must be at least 1".into()));
        }
        if self.run.vod_margin < 0.0 || self.run.rt_margin < 0.0 {
            return Err(bad("run.vod_margin", "margins must be nonnegative".into()));
        }
        Ok(())
    }

    /// Slots per frame.
    pub fn n_slots(&self) -> usize {
        (self.window.frame_s / self.window.slot_s).round() as usize
    }

    /// Noise power per subcarrier (W).
    pub fn noise_w(&self) -> f64 {
        10f64.powf((self.radio.noise_dbm_per_hz - 30.0) / 10.0) * self.radio.subcarrier_hz
    }

    /// Circuit power per subcarrier (W): density times subcarrier spacing.
    pub fn p_c_w(&self) -> f64 {
        self.radio.p_c_mw_per_mhz * 1e-3 * (self.radio.subcarrier_hz / 1e6)
    }

    /// Fixed circuit power per BS (W): density times system bandwidth.
    pub fn p_0_w(&self) -> f64 {
        self.radio.p_0_mw_per_mhz * 1e-3 * (self.radio.k_max as f64 * self.radio.subcarrier_hz / 1e6)
    }

    /// Number of BSs: configured, or enough to cover the initial spread plus
    /// the window's travel at the chain's top speed.
    pub fn bs_count(&self) -> usize {
        if self.geometry.bs_count > 0 {
            return self.geometry.bs_count;
        }
        let max_start = match &self.users.initial_position {
            InitialPosition::UniformFirstCell => self.geometry.bs_spacing_m,
            InitialPosition::Uniform { hi_m, .. } => *hi_m,
            InitialPosition::Fixed { at_m } => at_m.iter().cloned().fold(0.0, f64::max),
        };
        let reach = max_start
            + self.window.n_frames as f64 * self.window.frame_s * self.mobility.v_max_mps;
        ((reach / self.geometry.bs_spacing_m).ceil() as usize).max(1)
    }
}

/// A one-parameter sweep with optional linked parameters and fixed overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path into [`ScenarioConfig`], e.g. `users.vod_count`.
    pub parameter: String,
    pub values: Vec<toml::Value>,
    /// Parameters varied in lockstep with the main one.
    #[serde(default)]
    pub linked: Vec<LinkedSweep>,
    /// Fixed overrides applied to the base config before sweeping.
    #[serde(default)]
    pub overrides: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkedSweep {
    pub parameter: String,
    pub values: Vec<toml::Value>,
}

impl SweepSpec {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let spec: SweepSpec = toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for l in &spec.linked {
            if l.values.len() != spec.values.len() {
                return Err(ConfigError::Invalid {
                    field: "linked.values",
                    message: "linked value lists must match the main list length".into(),
                });
            }
        }
        Ok(spec)
    }

    /// Materialize the config at sweep point `idx`.
    pub fn apply(&self, base: &ScenarioConfig, idx: usize) -> Result<ScenarioConfig, ConfigError> {
        let mut value = toml::Value::try_from(base).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if let Some(ov) = &self.overrides {
            merge_tables(&mut value, &toml::Value::Table(ov.clone()));
        }
        set_path(&mut value, &self.parameter, self.values[idx].clone())?;
        for l in &self.linked {
            set_path(&mut value, &l.parameter, l.values[idx].clone())?;
        }
        let cfg: ScenarioConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn merge_tables(base: &mut toml::Value, overlay: &toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) if slot.is_table() && v.is_table() => merge_tables(slot, v),
                    Some(slot) => *slot = v.clone(),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

fn set_path(root: &mut toml::Value, path: &str, value: toml::Value) -> Result<(), ConfigError> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = cur.as_table_mut().ok_or(ConfigError::Invalid {
            field: "parameter",
            message: format!("'{path}' does not name a config field"),
        })?;
        if i + 1 == parts.len() {
            if !table.contains_key(*part) {
                return Err(ConfigError::Invalid {
                    field: "parameter",
                    message: format!("'{path}' does not exist in ScenarioConfig"),
                });
            }
            table.insert((*part).to_string(), value);
            return Ok(());
        }
        cur = table.get_mut(*part).ok_or(ConfigError::Invalid {
            field: "parameter",
            message: format!("'{path}' does not exist in ScenarioConfig"),
        })?;
    }
    Ok(())
}
