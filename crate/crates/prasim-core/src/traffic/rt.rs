//! Real-time traffic: compound-Poisson arrivals, effective bandwidth, and
//! the QoS exponent linking a delay bound to the bandwidth requirement.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::numerics::{find_root, Bracket};
use crate::traffic::TrafficError;

/// Poisson packet arrivals with exponentially distributed sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RTArrivalSpec {
    /// Packet arrival rate (packets/s).
    pub lambda_a: f64,
    /// Inverse mean packet size (1/bits); mean size is `1/lambda_u`.
    pub lambda_u: f64,
}

impl RTArrivalSpec {
    pub fn new(lambda_a: f64, lambda_u: f64) -> Result<Self, TrafficError> {
        if !(lambda_a > 0.0 && lambda_u > 0.0) {
            return Err(TrafficError::InvalidSpec(
                "arrival rates must be positive".into(),
            ));
        }
        Ok(Self { lambda_a, lambda_u })
    }

    /// Mean arrival rate in bits/s.
    pub fn mean_rate_bps(&self) -> f64 {
        self.lambda_a / self.lambda_u
    }
}

/// Statistical delay requirement: `P(delay > d_max) <= epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QoSSpec {
    pub d_max_s: f64,
    pub epsilon: f64,
}

impl QoSSpec {
    pub fn new(d_max_s: f64, epsilon: f64) -> Result<Self, TrafficError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(TrafficError::InvalidSpec(format!(
                "delay violation probability must lie in (0,1), got {epsilon}"
            )));
        }
        if !(d_max_s > 0.0) {
            return Err(TrafficError::InvalidSpec("delay bound must be positive".into()));
        }
        Ok(Self { d_max_s, epsilon })
    }
}

/// QoS exponent `theta` (1/bits) and the shape `beta = theta·tau·B/ln 2`
/// derived from it for the effective-capacity map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QoSExponent {
    pub theta: f64,
}

impl QoSExponent {
    pub fn beta(&self, slot_s: f64, subcarrier_hz: f64) -> f64 {
        self.theta * slot_s * subcarrier_hz / std::f64::consts::LN_2
    }
}

/// Effective bandwidth of the compound-Poisson source at exponent `theta`.
///
/// The closed form is `lambda_a / (lambda_u - theta)`; the log-MGF route it
/// reduces from is exercised as a Monte Carlo oracle in the tests.
pub fn effective_bandwidth(spec: &RTArrivalSpec, theta: f64) -> Result<f64, TrafficError> {
    if !(theta > 0.0) {
        return Err(TrafficError::InvalidSpec(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if theta >= spec.lambda_u {
        return Err(TrafficError::MgfDiverges {
            theta,
            lambda_u: spec.lambda_u,
        });
    }
    Ok(spec.lambda_a / (spec.lambda_u - theta))
}

/// Solve `theta · E_B(theta) · d_max = ln(1/epsilon)` for the QoS exponent.
///
/// The left side grows from 0 to infinity on `(0, lambda_u)`, so the root is
/// unique. The residual of the returned root is below 1e-10 relative.
pub fn solve_qos_exponent(spec: &RTArrivalSpec, qos: &QoSSpec) -> Result<QoSExponent, TrafficError> {
    let target = (1.0 / qos.epsilon).ln();
    if target == 0.0 {
        return Ok(QoSExponent { theta: 0.0 });
    }
    let g = |theta: f64| theta * spec.lambda_a / (spec.lambda_u - theta) * qos.d_max_s - target;
    let hi = spec.lambda_u * (1.0 - 1e-12);
    if g(hi) < 0.0 {
        return Err(TrafficError::QosInfeasible {
            lambda_u: spec.lambda_u,
        });
    }
    let theta = find_root(g, Bracket::new(0.0, hi), 1e-14 * target)
        .map_err(|e| TrafficError::InvalidSpec(format!("exponent solve failed: {e}")))?;
    Ok(QoSExponent { theta })
}

/// Bits arriving in one slot together with per-packet arrival offsets.
#[derive(Debug, Clone, Default)]
pub struct SlotArrivals {
    /// `(offset_within_slot_s, size_bits)`, sorted by offset.
    pub packets: Vec<(f64, f64)>,
}

impl SlotArrivals {
    pub fn total_bits(&self) -> f64 {
        self.packets.iter().map(|p| p.1).sum()
    }
}

/// Draw `N ~ Poisson(lambda_a · tau)` packets with i.i.d. exponential sizes
/// and uniform arrival offsets within the slot.
pub fn sample_arrivals<R: Rng>(spec: &RTArrivalSpec, slot_s: f64, rng: &mut R) -> SlotArrivals {
    let poisson = Poisson::new(spec.lambda_a * slot_s).expect("positive rate");
    let exp = Exp::new(spec.lambda_u).expect("positive rate");
    let n = poisson.sample(rng) as usize;
    let mut packets: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen::<f64>() * slot_s, exp.sample(rng)))
        .collect();
    packets.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    SlotArrivals { packets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table_spec() -> RTArrivalSpec {
        // 500 packets/s, 4 kbit mean packet size -> 2 Mbit/s.
        RTArrivalSpec::new(500.0, 1.0 / 4000.0).unwrap()
    }

    #[test]
    fn effective_bandwidth_closed_form_values() {
        let spec = table_spec();
        // theta -> 0 recovers the mean arrival rate.
        let near_zero = effective_bandwidth(&spec, 1e-12).unwrap();
        assert!((near_zero / 2e6 - 1.0).abs() < 1e-6);
        // Halfway to the divergence point doubles it.
        let mid = effective_bandwidth(&spec, 1.25e-4).unwrap();
        assert!((mid - 4e6).abs() < 1e-6 * 4e6);
    }

    #[test]
    fn effective_bandwidth_increases_in_theta() {
        let spec = table_spec();
        let mut prev = 0.0;
        for k in 1..100 {
            let theta = spec.lambda_u * k as f64 / 100.0;
            let eb = effective_bandwidth(&spec, theta).unwrap();
            assert!(eb > prev, "E_B not increasing at theta = {theta}");
            prev = eb;
        }
    }

    #[test]
    fn effective_bandwidth_rejects_divergent_theta() {
        let spec = table_spec();
        assert!(matches!(
            effective_bandwidth(&spec, spec.lambda_u),
            Err(TrafficError::MgfDiverges { .. })
        ));
    }

    #[test]
    fn qos_exponent_residual_is_tiny() {
        let spec = table_spec();
        let qos = QoSSpec::new(0.05, 0.02).unwrap();
        let theta = solve_qos_exponent(&spec, &qos).unwrap().theta;
        let eb = effective_bandwidth(&spec, theta).unwrap();
        let residual = (theta * eb * qos.d_max_s - (1.0f64 / 0.02).ln()).abs() / (1.0f64 / 0.02).ln();
        assert!(residual <= 1e-10, "residual {residual}");
        // Same root as solving 500·theta/(2.5e-4 - theta) = ln(50)/0.05.
        let direct = (1.0f64 / 0.02).ln() / 0.05;
        assert!((500.0 * theta / (2.5e-4 - theta) - direct).abs() / direct < 1e-9);
    }

    #[test]
    fn qos_exponent_limits_and_monotonicity() {
        let spec = table_spec();
        let loose = solve_qos_exponent(&spec, &QoSSpec::new(0.05, 0.999_999).unwrap()).unwrap();
        assert!(loose.theta < 1e-9, "theta {} should vanish", loose.theta);
        let mut prev = 0.0;
        for eps in [0.5, 0.1, 0.02, 0.001] {
            let t = solve_qos_exponent(&spec, &QoSSpec::new(0.05, eps).unwrap()).unwrap();
            assert!(t.theta > prev, "tighter epsilon must raise theta");
            prev = t.theta;
        }
    }

    #[test]
    fn arrival_moments_match_compound_poisson() {
        let spec = table_spec();
        let slot = 0.005;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut packets = 0usize;
        for _ in 0..n {
            let a = sample_arrivals(&spec, slot, &mut rng);
            let b = a.total_bits();
            packets += a.packets.len();
            sum += b;
            sumsq += b * b;
        }
        let mean = sum / n as f64;
        let expect_mean = spec.lambda_a * slot / spec.lambda_u;
        assert!((mean / expect_mean - 1.0).abs() < 0.005, "mean {mean}");
        // 2.5 packets per slot on average for the Table parameters.
        assert!((packets as f64 / n as f64 - 2.5).abs() < 0.01);
        let var = sumsq / n as f64 - mean * mean;
        let expect_var = spec.lambda_a * slot * 2.0 / (spec.lambda_u * spec.lambda_u);
        assert!((var / expect_var - 1.0).abs() < 0.01, "variance {var} vs {expect_var}");
    }

    #[test]
    fn beta_matches_definition() {
        let theta = QoSExponent { theta: 3.3827e-5 };
        let beta = theta.beta(0.005, 15_000.0);
        let expect = 3.3827e-5 * 0.005 * 15_000.0 / std::f64::consts::LN_2;
        assert!((beta - expect).abs() < 1e-12);
    }
}
