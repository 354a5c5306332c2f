//! Markov velocity chain and per-frame mobility traces.

use rand::Rng;

use crate::channel::ChannelError;

/// Birth-death Markov chain over equally spaced velocity states.
///
/// The velocity moves to an adjacent state with probability `q` on each side
/// (reflecting at the ends) and otherwise stays, so every row of the
/// transition matrix sums to one and the chain is doubly stochastic.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityChain {
    pub q: f64,
    pub states_mps: Vec<f64>,
    pub frame_s: f64,
}

impl VelocityChain {
    /// Uniformly spaced states `v_min, v_min + dv, ..., v_max`.
    pub fn new(q: f64, v_min: f64, v_max: f64, dv: f64, frame_s: f64) -> Result<Self, ChannelError> {
        if !(0.0..=0.5).contains(&q) {
            return Err(ChannelError::InvalidChain(format!(
                "q must lie in [0, 0.5], got {q}"
            )));
        }
        if !(dv > 0.0 && v_max >= v_min && frame_s > 0.0) {
            return Err(ChannelError::InvalidChain(
                "need dv > 0, v_max >= v_min, frame_s > 0".into(),
            ));
        }
        let n = ((v_max - v_min) / dv).round() as usize + 1;
        let states_mps = (0..n).map(|i| v_min + dv * i as f64).collect();
        Ok(Self { q, states_mps, frame_s })
    }

    pub fn state_count(&self) -> usize {
        self.states_mps.len()
    }

    /// Index of the chain state equal to `v` (within spacing tolerance).
    pub fn state_index(&self, v: f64) -> Result<usize, ChannelError> {
        let dv = if self.states_mps.len() > 1 {
            self.states_mps[1] - self.states_mps[0]
        } else {
            1.0
        };
        self.states_mps
            .iter()
            .position(|&s| (s - v).abs() < 1e-9 * dv.max(1.0))
            .ok_or_else(|| ChannelError::InvalidChain(format!("velocity {v} is not a chain state")))
    }

    /// Draw the next state index given the current one.
    pub fn step<R: Rng>(&self, state: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let n = self.state_count();
        let down = state > 0;
        let up = state + 1 < n;
        // Interior rows: (q, 1-2q, q). Edge rows fold the missing move into
        // the stay probability exactly as the tridiagonal matrix does.
        if down && u < self.q {
            return state - 1;
        }
        if up && u >= 1.0 - self.q {
            return state + 1;
        }
        state
    }
}

/// Row-stochastic tridiagonal transition matrix over `u` states.
pub fn build_transition_matrix(q: f64, u: usize) -> Result<Vec<Vec<f64>>, ChannelError> {
    if !(0.0..=0.5).contains(&q) {
        return Err(ChannelError::InvalidChain(format!(
            "q must lie in [0, 0.5], got {q} (the diagonal 1-2q would go negative)"
        )));
    }
    if u == 0 {
        return Err(ChannelError::InvalidChain("need at least one state".into()));
    }
    let mut m = vec![vec![0.0; u]; u];
    for i in 0..u {
        if u == 1 {
            m[i][i] = 1.0;
            continue;
        }
        if i == 0 {
            m[i][0] = 1.0 - q;
            m[i][1] = q;
        } else if i == u - 1 {
            m[i][u - 2] = q;
            m[i][u - 1] = 1.0 - q;
        } else {
            m[i][i - 1] = q;
            m[i][i] = 1.0 - 2.0 * q;
            m[i][i + 1] = q;
        }
    }
    Ok(m)
}

/// Per-frame positions and velocities for one user over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityTrace {
    /// Road position at the start of each frame (m).
    pub positions_m: Vec<f64>,
    /// Velocity held during each frame (m/s).
    pub velocities_mps: Vec<f64>,
}

/// Sample a Markov velocity trajectory and integrate positions over frames.
pub fn sample_mobility<R: Rng>(
    chain: &VelocityChain,
    initial_position_m: f64,
    initial_velocity_mps: f64,
    n_frames: usize,
    rng: &mut R,
) -> Result<MobilityTrace, ChannelError> {
    let mut state = chain.state_index(initial_velocity_mps)?;
    let mut positions = Vec::with_capacity(n_frames);
    let mut velocities = Vec::with_capacity(n_frames);
    let mut x = initial_position_m;
    for i in 0..n_frames {
        positions.push(x);
        velocities.push(chain.states_mps[state]);
        x += chain.states_mps[state] * chain.frame_s;
        if i + 1 < n_frames {
            state = chain.step(state, rng);
        }
    }
    Ok(MobilityTrace {
        positions_m: positions,
        velocities_mps: velocities,
    })
}

/// Constant-velocity extrapolation from the window-start state.
pub fn extrapolate_mobility(
    initial_position_m: f64,
    initial_velocity_mps: f64,
    n_frames: usize,
    frame_s: f64,
) -> MobilityTrace {
    let positions = (0..n_frames)
        .map(|i| initial_position_m + initial_velocity_mps * frame_s * i as f64)
        .collect();
    MobilityTrace {
        positions_m: positions,
        velocities_mps: vec![initial_velocity_mps; n_frames],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn q_zero_gives_identity_matrix() {
        let m = build_transition_matrix(0.0, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(m[i][j], expect);
            }
        }
    }

    #[test]
    fn quarter_q_three_states_matches_pattern() {
        let m = build_transition_matrix(0.25, 3).unwrap();
        assert_eq!(m[0], vec![0.75, 0.25, 0.0]);
        assert_eq!(m[1], vec![0.25, 0.5, 0.25]);
        assert_eq!(m[2], vec![0.0, 0.25, 0.75]);
    }

    #[test]
    fn rows_sum_to_one_for_many_q() {
        for k in 0..=50 {
            let q = 0.01 * k as f64;
            let m = build_transition_matrix(q, 31).unwrap();
            for row in &m {
                let s: f64 = row.iter().sum();
                assert!((s - 1.0).abs() < 1e-15, "row sum {s} at q = {q}");
                assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
            }
        }
    }

    #[test]
    fn rejects_q_above_half() {
        assert!(build_transition_matrix(0.51, 5).is_err());
        assert!(VelocityChain::new(0.6, 0.0, 30.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn q_zero_mobility_is_linear() {
        let chain = VelocityChain::new(0.0, 0.0, 30.0, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = sample_mobility(&chain, 100.0, 20.0, 5, &mut rng).unwrap();
        assert_eq!(t.positions_m, vec![100.0, 120.0, 140.0, 160.0, 180.0]);
        assert!(t.velocities_mps.iter().all(|&v| v == 20.0));
    }

    #[test]
    fn velocity_never_jumps_more_than_one_step() {
        let chain = VelocityChain::new(0.5, 0.0, 30.0, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let t = sample_mobility(&chain, 0.0, 20.0, 500, &mut rng).unwrap();
        for w in t.velocities_mps.windows(2) {
            assert!((w[1] - w[0]).abs() <= 1.0 + 1e-12, "jump {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn positions_integrate_velocities() {
        let chain = VelocityChain::new(0.3, 0.0, 30.0, 1.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = sample_mobility(&chain, 50.0, 10.0, 100, &mut rng).unwrap();
        for i in 0..99 {
            let expect = t.positions_m[i] + t.velocities_mps[i] * 2.0;
            assert!((t.positions_m[i + 1] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_initial_velocity_off_grid() {
        let chain = VelocityChain::new(0.2, 0.0, 30.0, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(sample_mobility(&chain, 0.0, 20.5, 10, &mut rng).is_err());
    }
}
