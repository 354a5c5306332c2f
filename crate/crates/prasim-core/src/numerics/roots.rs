//! Bracketed scalar root finding (Brent's method).

use super::NumericsError;

/// A bracket `[lo, hi]` known to contain a sign change of the target function.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

/// Find a root of `f` inside `bracket` with Brent's method.
///
/// Returns `x*` with `|f(x*)| <= tol` or with the bracket narrowed below
/// `tol` (plus a machine-precision floor scaled by `|x|`). The returned
/// point always lies inside the initial bracket, and identical inputs give
/// identical results.
pub fn find_root<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: f64) -> Result<f64, NumericsError> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    if !(a < b) {
        return Err(NumericsError::Domain(format!(
            "invalid bracket [{a}, {b}]"
        )));
    }
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange { lo: a, hi: b });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = b - a;

    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation (secant when a == c).
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0));
                q = (q0 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
    }
    Err(NumericsError::MaxIterations("find_root".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = find_root(|x| x * x - 2.0, Bracket::new(1.0, 2.0), 1e-12).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-10, "got {r}");
    }

    #[test]
    fn finds_ln_two() {
        let r = find_root(|x| (-x).exp() - 0.5, Bracket::new(0.0, 2.0), 1e-12).unwrap();
        assert!((r - std::f64::consts::LN_2).abs() < 1e-10, "got {r}");
    }

    #[test]
    fn inverts_e1_reference_value() {
        let r = find_root(
            |x| crate::numerics::exp_integral_e1(x).unwrap() - 0.219_383_934_395_520_3,
            Bracket::new(0.5, 2.0),
            1e-13,
        )
        .unwrap();
        assert!((r - 1.0).abs() < 1e-9, "E1 inverse gave {r}");
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let err = find_root(|x| x * x + 1.0, Bracket::new(-1.0, 1.0), 1e-12);
        assert!(matches!(err, Err(NumericsError::NoSignChange { .. })));
    }

    #[test]
    fn root_stays_inside_bracket_and_is_deterministic() {
        // A batch of randomized cubic brackets with a fixed cheap generator.
        let mut state = 0x1234_5678_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let root = 4.0 * next() - 2.0;
            let shift = 2.0 + 3.0 * next();
            let f = move |x: f64| (x - root) * ((x - root).powi(2) + shift);
            let lo = root - 1.0 - next();
            let hi = root + 1.0 + next();
            let r1 = find_root(f, Bracket::new(lo, hi), 1e-12).unwrap();
            let r2 = find_root(f, Bracket::new(lo, hi), 1e-12).unwrap();
            assert!(r1 >= lo && r1 <= hi, "root {r1} escaped [{lo}, {hi}]");
            assert_eq!(r1.to_bits(), r2.to_bits(), "nondeterministic result");
            assert!((r1 - root).abs() < 1e-8);
        }
    }
}
