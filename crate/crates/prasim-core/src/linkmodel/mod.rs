//! Water-filling power allocation and the closed-form per-subcarrier maps.
//!
//! For unit-mean exponential fading the two slot-level policies and their
//! frame-level averages reduce to closed forms in the water level `nu`:
//!
//! - VoD: slot power `(1/c)(1/nu - 1/g)` above the threshold, average
//!   per-subcarrier power `(1/c)(e^{-nu}/nu - E1(nu))`, average rate map
//!   `F_D = (B/ln 2)·E1(nu)`.
//! - RT (QoS exponent `theta`, shape `beta = theta·tau·B/ln 2`): slot power
//!   `(1/c)(nu^{-s} g^{s-1} - 1/g)` with `s = 1/(beta+1)`, average power
//!   `(1/c)(nu^{-s}·Gamma(s, nu) - E1(nu))`, Laplace-type map
//!   `F_R = 1 - e^{-nu} + nu^{1-s}·Gamma(s, nu)`.
//!
//! Here `c = alpha / (phi·sigma0^2)` is the SNR per watt. Derivatives used
//! by the planner are also closed-form: `dF_D/dp = c·(B/ln 2)·nu` and
//! `dF_R/dp = -c·beta·nu`, with the second derivatives following from
//! `dnu/dp = -c·nu^2·e^{nu}` (VoD) and the analogous RT expression.
//!
//! Raw quadrature of the defining integrals lives only in the test oracles.

use crate::numerics::{e1_scaled, find_root, upper_gamma_scaled, Bracket};

/// Link-budget constants for one (user, frame) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Large-scale channel gain (linear power ratio).
    pub alpha: f64,
    /// Capacity gap `phi >= 1` of the practical modulation/coding.
    pub capacity_gap: f64,
    /// Noise power per subcarrier (W), `N0·B`.
    pub noise_w: f64,
    /// Subcarrier spacing (Hz).
    pub subcarrier_hz: f64,
}

impl LinkParams {
    /// Received SNR per transmitted watt: `alpha / (phi·sigma0²)`.
    #[inline]
    pub fn snr_per_watt(&self) -> f64 {
        self.alpha / (self.capacity_gap * self.noise_w)
    }

    /// `B / ln 2`, the rate unit of the closed forms.
    #[inline]
    pub fn rate_unit(&self) -> f64 {
        self.subcarrier_hz / std::f64::consts::LN_2
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LinkError {
    #[error("per-subcarrier power must be positive, got {0}")]
    NonPositivePower(f64),
}

/// Water levels are clamped to this range. Above the upper end the residual
/// rate is ~e^-40 of a bit; below the lower end the per-subcarrier SNR
/// budget exceeds 1e12, far outside any operating point of the model.
pub const NU_MIN: f64 = 1e-12;
pub const NU_MAX: f64 = 40.0;

/// Curvature evaluations clamp `nu` here: the `e^{nu}` factor in the second
/// derivatives would otherwise destroy the Newton system's conditioning in
/// the near-zero-rate region that line searches may briefly visit.
const NU_HESS_MAX: f64 = 10.0;

/// Normalized VoD water-level equation left side:
/// `integral_nu^inf (1/nu - 1/g) e^{-g} dg = e^{-nu}/nu - E1(nu)`.
#[inline]
pub fn vod_power_integral(nu: f64) -> f64 {
    (-nu).exp() * (1.0 / nu - e1_scaled(nu))
}

/// Normalized RT water-level equation left side:
/// `nu^{-s}·Gamma(s, nu) - E1(nu)` with `s = 1/(beta+1)`.
#[inline]
pub fn rt_power_integral(nu: f64, beta: f64) -> f64 {
    let s = 1.0 / (beta + 1.0);
    (-nu).exp() * (nu.powf(-s) * upper_gamma_scaled(s, nu) - e1_scaled(nu))
}

fn solve_water_level(u: f64, h: impl Fn(f64) -> f64) -> f64 {
    if u >= h(NU_MIN) {
        return NU_MIN;
    }
    if u <= h(NU_MAX) {
        return NU_MAX;
    }
    // Geometric walk to a bracket, then Brent on the relative residual.
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    if h(1.0) > u {
        while h(hi) > u {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        while h(lo) < u {
            hi = lo;
            lo *= 0.25;
        }
    }
    find_root(|nu| h(nu) / u - 1.0, Bracket::new(lo, hi), 1e-12)
        .expect("monotone water-level equation must bracket")
}

/// Water level of the VoD water-filling law at per-subcarrier average power
/// `pbar_s` (W).
pub fn vod_water_level(pbar_s: f64, p: &LinkParams) -> Result<f64, LinkError> {
    if !(pbar_s > 0.0) {
        return Err(LinkError::NonPositivePower(pbar_s));
    }
    Ok(solve_water_level(pbar_s * p.snr_per_watt(), vod_power_integral))
}

/// Water level of the RT water-filling law.
pub fn rt_water_level(pbar_s: f64, beta: f64, p: &LinkParams) -> Result<f64, LinkError> {
    if !(pbar_s > 0.0) {
        return Err(LinkError::NonPositivePower(pbar_s));
    }
    Ok(solve_water_level(pbar_s * p.snr_per_watt(), |nu| {
        rt_power_integral(nu, beta)
    }))
}

/// Average per-subcarrier power spent by the VoD law at water level `nu`
/// (the inverse of [`vod_water_level`]).
pub fn vod_avg_power_per_sc(nu: f64, p: &LinkParams) -> f64 {
    vod_power_integral(nu) / p.snr_per_watt()
}

/// Average per-subcarrier power spent by the RT law at water level `nu`.
pub fn rt_avg_power_per_sc(nu: f64, beta: f64, p: &LinkParams) -> f64 {
    rt_power_integral(nu, beta) / p.snr_per_watt()
}

/// Instantaneous VoD water-filling power on one subcarrier.
#[inline]
pub fn vod_slot_power(nu: f64, g: f64, p: &LinkParams) -> f64 {
    if g <= nu {
        return 0.0;
    }
    (1.0 / nu - 1.0 / g) / p.snr_per_watt()
}

/// Instantaneous RT water-filling power on one subcarrier.
#[inline]
pub fn rt_slot_power(nu: f64, g: f64, beta: f64, p: &LinkParams) -> f64 {
    if g <= nu {
        return 0.0;
    }
    let s = 1.0 / (beta + 1.0);
    (nu.powf(-s) * g.powf(s - 1.0) - 1.0 / g) / p.snr_per_watt()
}

/// `F_D(pbar_s)`: expected rate of one subcarrier under VoD water-filling
/// (bits/s), together with its first two derivatives in `pbar_s`.
#[derive(Debug, Clone, Copy)]
pub struct MapEval {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub nu: f64,
}

pub fn f_d_eval(pbar_s: f64, p: &LinkParams) -> MapEval {
    let c = p.snr_per_watt();
    let nu = solve_water_level(pbar_s.max(f64::MIN_POSITIVE) * c, vod_power_integral);
    let ru = p.rate_unit();
    let value = ru * (-nu).exp() * e1_scaled(nu);
    let d1 = c * ru * nu;
    let nu_h = nu.min(NU_HESS_MAX);
    let d2 = -c * c * ru * nu_h * nu_h * nu_h.exp();
    MapEval { value, d1, d2, nu }
}

/// `F_D(pbar_s)` in bits/s.
pub fn f_d(pbar_s: f64, p: &LinkParams) -> f64 {
    f_d_eval(pbar_s, p).value
}

/// Average service rate `K·F_D(P̄/K)` in bits/s; zero when either resource
/// is zero (the perspective limit).
pub fn vod_avg_rate(pbar_w: f64, k: f64, p: &LinkParams) -> f64 {
    if pbar_w <= 0.0 || k <= 0.0 {
        return 0.0;
    }
    k * f_d(pbar_w / k, p)
}

/// `F_R(pbar_s)`: the fading Laplace-type map of the RT law, in (0, 1].
pub fn rt_f(pbar_s: f64, beta: f64, p: &LinkParams) -> f64 {
    if pbar_s <= 0.0 {
        return 1.0;
    }
    let nu = solve_water_level(pbar_s * p.snr_per_watt(), |v| rt_power_integral(v, beta));
    rt_f_at_nu(nu, beta)
}

fn rt_f_at_nu(nu: f64, beta: f64) -> f64 {
    let s = 1.0 / (beta + 1.0);
    1.0 - (-nu).exp() + nu.powf(1.0 - s) * (-nu).exp() * upper_gamma_scaled(s, nu)
}

/// `ln F_R` evaluated without cancellation: `ln(1 + delta)` with
/// `delta = e^{-nu}(nu^{1-s}·e^{nu}Gamma(s,nu) - 1) <= 0`.
fn rt_ln_f_at_nu(nu: f64, beta: f64) -> f64 {
    let s = 1.0 / (beta + 1.0);
    let delta = (-nu).exp() * (nu.powf(1.0 - s) * upper_gamma_scaled(s, nu) - 1.0);
    delta.ln_1p()
}

/// `dF_R/d pbar_s = -c·beta·nu`, always negative.
pub fn rt_f_derivative(pbar_s: f64, beta: f64, p: &LinkParams) -> Result<f64, LinkError> {
    let nu = rt_water_level(pbar_s, beta, p)?;
    Ok(-p.snr_per_watt() * beta * nu)
}

/// `F_R`, `ln F_R`, and derivatives of `F_R` at one per-subcarrier power.
#[derive(Debug, Clone, Copy)]
pub struct RtMapEval {
    pub f: f64,
    pub ln_f: f64,
    pub df: f64,
    pub d2f: f64,
    pub nu: f64,
}

pub fn rt_f_eval(pbar_s: f64, beta: f64, p: &LinkParams) -> RtMapEval {
    let c = p.snr_per_watt();
    let nu = solve_water_level(pbar_s.max(f64::MIN_POSITIVE) * c, |v| rt_power_integral(v, beta));
    let s = 1.0 / (beta + 1.0);
    let f = rt_f_at_nu(nu, beta);
    let ln_f = rt_ln_f_at_nu(nu, beta);
    let df = -c * beta * nu;
    // d2F_R/dp² = c²·beta(beta+1)·nu^{1+s}/Gamma(s, nu); clamp as in f_d_eval.
    let nu_h = nu.min(NU_HESS_MAX);
    let gamma_tail = (-nu_h).exp() * upper_gamma_scaled(s, nu_h);
    let d2f = c * c * beta * (beta + 1.0) * nu_h.powf(1.0 + s) / gamma_tail;
    RtMapEval { f, ln_f, df, d2f, nu }
}

/// Effective capacity `-(K/(theta·tau))·ln F_R(P̄/K)` in bits/s; zero when
/// either resource is zero.
pub fn effective_capacity(
    pbar_w: f64,
    k: f64,
    beta: f64,
    theta: f64,
    slot_s: f64,
    p: &LinkParams,
) -> f64 {
    if pbar_w <= 0.0 || k <= 0.0 {
        return 0.0;
    }
    let eval = rt_f_eval(pbar_w / k, beta, p);
    -k / (theta * slot_s) * eval.ln_f
}

/// Which water-filling law a plan entry follows at slot time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceKind {
    Vod,
    /// Carries the QoS shape `beta` of the user.
    Rt { beta: f64 },
}

/// Per-slot outcome of applying a plan entry to one fading realization.
#[derive(Debug, Clone)]
pub struct SlotAllocation {
    pub powers_w: Vec<f64>,
    pub total_power_w: f64,
    /// Instantaneous rate over the active subcarriers (bits/s).
    pub rate_bps: f64,
}

/// Apply the water-filling law with level `nu` to a vector of per-subcarrier
/// fading gains. The instantaneous rate uses the algebraic reduction of the
/// rate formula under each law: `B·log2(g/nu)` per active subcarrier for
/// VoD and `B·s·log2(g/nu)` for RT.
pub fn allocate_slot_power(
    nu: f64,
    kind: ServiceKind,
    gains: &[f64],
    p: &LinkParams,
) -> SlotAllocation {
    let mut powers = Vec::with_capacity(gains.len());
    let mut total = 0.0;
    let mut rate = 0.0;
    let b = p.subcarrier_hz;
    match kind {
        ServiceKind::Vod => {
            for &g in gains {
                let pw = vod_slot_power(nu, g, p);
                if pw > 0.0 {
                    rate += b * (g / nu).log2();
                }
                total += pw;
                powers.push(pw);
            }
        }
        ServiceKind::Rt { beta } => {
            let s = 1.0 / (beta + 1.0);
            for &g in gains {
                let pw = rt_slot_power(nu, g, beta, p);
                if pw > 0.0 {
                    rate += b * s * (g / nu).log2();
                }
                total += pw;
                powers.push(pw);
            }
        }
    }
    SlotAllocation {
        powers_w: powers,
        total_power_w: total,
        rate_bps: rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> LinkParams {
        LinkParams {
            alpha: 1.0,
            capacity_gap: 1.0,
            noise_w: 1.0,
            subcarrier_hz: 15_000.0,
        }
    }

    fn table_params() -> LinkParams {
        LinkParams {
            alpha: 10f64.powf(-12.0),
            capacity_gap: 1.0,
            noise_w: 7.5e-17,
            subcarrier_hz: 15_000.0,
        }
    }

    #[test]
    fn vod_slot_power_branches() {
        let p = unit_params();
        assert_eq!(vod_slot_power(0.5, 0.3, &p), 0.0);
        assert_eq!(vod_slot_power(0.5, 0.5, &p), 0.0);
        let pw = vod_slot_power(0.5, 1.0, &p);
        assert!((pw - 1.0).abs() < 1e-12, "power {pw}");
    }

    #[test]
    fn rt_slot_power_branches_and_continuity() {
        let p = unit_params();
        let beta = 0.4;
        assert_eq!(rt_slot_power(0.7, 0.5, beta, &p), 0.0);
        // Continuity at the threshold: nu^{-s} nu^{s-1} = 1/nu.
        let eps = 1e-9;
        let just_above = rt_slot_power(0.7, 0.7 + eps, beta, &p);
        assert!(just_above.abs() < 1e-7, "discontinuous at threshold: {just_above}");
    }

    #[test]
    fn rt_slot_power_reduces_to_vod_as_beta_vanishes() {
        let p = unit_params();
        for &g in &[0.6, 1.0, 2.5, 7.0] {
            let rt = rt_slot_power(0.5, g, 1e-6, &p);
            let vod = vod_slot_power(0.5, g, &p);
            assert!((rt - vod).abs() < 1e-5 * (1.0 + vod), "g = {g}: {rt} vs {vod}");
        }
    }

    #[test]
    fn water_level_round_trip() {
        let p = table_params();
        for &pbar_s in &[1e-6, 1e-4, 1e-3, 1e-2] {
            let nu = vod_water_level(pbar_s, &p).unwrap();
            let back = vod_avg_power_per_sc(nu, &p);
            assert!((back / pbar_s - 1.0).abs() < 1e-8, "round trip at {pbar_s}: {back}");
        }
    }

    #[test]
    fn water_level_monotone_limits() {
        let p = table_params();
        let lo = vod_water_level(1e-9, &p).unwrap();
        let mid = vod_water_level(1e-4, &p).unwrap();
        let hi = vod_water_level(1.0, &p).unwrap();
        assert!(lo > mid && mid > hi, "nu must fall as power rises: {lo}, {mid}, {hi}");
        assert!(vod_water_level(0.0, &p).is_err());
        assert!(vod_water_level(-1.0, &p).is_err());
    }

    #[test]
    fn rt_water_level_matches_vod_at_small_beta() {
        let p = table_params();
        for &pbar_s in &[1e-5, 1e-3] {
            let nu_rt = rt_water_level(pbar_s, 1e-8, &p).unwrap();
            let nu_vod = vod_water_level(pbar_s, &p).unwrap();
            assert!((nu_rt / nu_vod - 1.0).abs() < 1e-5, "{nu_rt} vs {nu_vod}");
        }
    }

    #[test]
    fn rt_water_level_residual_is_tiny() {
        let p = table_params();
        let beta = 3.66e-3;
        for &pbar_s in &[1e-5, 1e-4, 1e-3] {
            let nu = rt_water_level(pbar_s, beta, &p).unwrap();
            let residual = (rt_power_integral(nu, beta) / (pbar_s * p.snr_per_watt()) - 1.0).abs();
            assert!(residual <= 1e-10, "residual {residual} at {pbar_s}");
        }
    }

    #[test]
    fn f_r_limits_and_monotonicity() {
        let p = table_params();
        let beta = 0.01;
        assert_eq!(rt_f(0.0, beta, &p), 1.0);
        let mut prev = 1.0;
        for k in 1..=40 {
            let pbar_s = 1e-5 * k as f64;
            let f = rt_f(pbar_s, beta, &p);
            assert!(f > 0.0 && f < prev, "F_R not strictly decreasing at {pbar_s}");
            prev = f;
        }
    }

    #[test]
    fn rt_f_derivative_sign_and_magnitude_trend() {
        let p = table_params();
        let beta = 0.02;
        let d1 = rt_f_derivative(1e-5, beta, &p).unwrap();
        let d2 = rt_f_derivative(1e-3, beta, &p).unwrap();
        assert!(d1 < 0.0 && d2 < 0.0);
        assert!(d1.abs() > d2.abs(), "magnitude must shrink with power");
    }

    #[test]
    fn effective_capacity_perspective_properties() {
        let p = table_params();
        let theta = 3.38e-5;
        let beta = 3.66e-3;
        let tau = 0.005;
        assert_eq!(effective_capacity(0.0, 10.0, beta, theta, tau, &p), 0.0);
        let base = effective_capacity(0.02, 50.0, beta, theta, tau, &p);
        let doubled = effective_capacity(0.04, 100.0, beta, theta, tau, &p);
        assert!((doubled / base - 2.0).abs() < 1e-9, "not 1-homogeneous: {doubled} vs {base}");
    }

    #[test]
    fn effective_capacity_theta_to_zero_is_average_rate() {
        let p = table_params();
        let tau = 0.005;
        let (pbar, k) = (0.02, 60.0);
        let avg = vod_avg_rate(pbar, k, &p);
        let theta = 1e-9;
        let beta = theta * tau * p.subcarrier_hz / std::f64::consts::LN_2;
        let ec = effective_capacity(pbar, k, beta, theta, tau, &p);
        assert!((ec / avg - 1.0).abs() < 1e-4, "EC {ec} vs avg rate {avg}");
    }

    #[test]
    fn avg_rate_perspective_homogeneity_and_zero_edges() {
        let p = table_params();
        assert_eq!(vod_avg_rate(0.0, 10.0, &p), 0.0);
        assert_eq!(vod_avg_rate(1.0, 0.0, &p), 0.0);
        let r = vod_avg_rate(0.05, 80.0, &p);
        let r2 = vod_avg_rate(0.10, 160.0, &p);
        assert!((r2 / r - 2.0).abs() < 1e-9);
    }

    #[test]
    fn silent_slot_when_all_gains_below_level() {
        let p = table_params();
        let out = allocate_slot_power(1.5, ServiceKind::Vod, &[0.1, 0.5, 1.4], &p);
        assert_eq!(out.total_power_w, 0.0);
        assert_eq!(out.rate_bps, 0.0);
        assert!(out.powers_w.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn slot_rate_matches_general_formula() {
        // B·log2(1 + c·p·g) must reduce to B·log2(g/nu) under the VoD law
        // and to B·s·log2(g/nu) under the RT law.
        let p = table_params();
        let c = p.snr_per_watt();
        let nu = 0.35;
        let gains = [0.1, 0.4, 1.0, 3.0, 8.0];
        let vod = allocate_slot_power(nu, ServiceKind::Vod, &gains, &p);
        let mut direct = 0.0;
        for (i, &g) in gains.iter().enumerate() {
            direct += p.subcarrier_hz * (1.0 + c * vod.powers_w[i] * g).log2();
        }
        assert!((vod.rate_bps - direct).abs() < 1e-6 * direct.max(1.0));

        let beta = 0.05;
        let rt = allocate_slot_power(nu, ServiceKind::Rt { beta }, &gains, &p);
        let mut direct_rt = 0.0;
        for (i, &g) in gains.iter().enumerate() {
            direct_rt += p.subcarrier_hz * (1.0 + c * rt.powers_w[i] * g).log2();
        }
        assert!((rt.rate_bps - direct_rt).abs() < 1e-6 * direct_rt.max(1.0));
    }
}
