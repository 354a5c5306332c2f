//! Finite-difference validation of analytic gradients.

/// Compare an analytic gradient `g` against central finite differences of
/// `f` at `x`, coordinate by coordinate.
///
/// The step adapts to the coordinate magnitude (`cbrt(eps) · (1 + |x_j|)`),
/// which balances truncation against rounding for smooth functions. Returns
/// the maximum over coordinates of `|g_j - fd_j| / max(|fd_j|, floor)`.
pub fn check_gradient<F, G>(f: F, g: G, x: &[f64]) -> f64
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let analytic = g(x);
    assert_eq!(analytic.len(), x.len(), "gradient dimension mismatch");
    let mut worst = 0.0f64;
    let mut xp = x.to_vec();
    let step_scale = f64::EPSILON.cbrt();
    for j in 0..x.len() {
        let h = step_scale * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        let fd = (fp - fm) / (2.0 * h);
        let denom = fd.abs().max(1e-12);
        worst = worst.max((analytic[j] - fd).abs() / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_correct_gradient() {
        let dev = check_gradient(|x| x[0] * x[0], |x| vec![2.0 * x[0]], &[3.0]);
        assert!(dev <= 1e-6, "deviation {dev}");
    }

    #[test]
    fn flags_wrong_gradient() {
        let dev = check_gradient(|x| x[0] * x[0], |x| vec![3.0 * x[0]], &[3.0]);
        assert!((dev - 0.5).abs() < 1e-3, "deviation {dev}");
    }

    #[test]
    fn handles_multivariate_case() {
        let f = |x: &[f64]| x[0].sin() * x[1] + x[1].powi(3);
        let g = |x: &[f64]| vec![x[0].cos() * x[1], x[0].sin() + 3.0 * x[1] * x[1]];
        let dev = check_gradient(f, g, &[0.7, -1.3]);
        assert!(dev <= 1e-7, "deviation {dev}");
    }
}
