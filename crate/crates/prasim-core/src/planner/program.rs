//! Assembly of the planning programs: perspective-function constraints for
//! rate floors and effective-capacity floors, plus per-BS per-frame caps.
//!
//! All constraints are expressed as `value(x) >= 0`, normalized by their
//! floor or cap so the solver sees O(1) quantities, and carry analytic
//! Hessians. The perspective structure `K·F(P/K)` keeps every block jointly
//! concave; its Hessian is the rank-one matrix `(F''(r)/K)·[1, -r; -r, r²]`.

use nalgebra::DMatrix;

use crate::linkmodel::{f_d_eval, rt_f_eval, LinkParams};
use crate::numerics::{Constraint, ConvexProgram};

/// One `(P̄, K)` pair inside a constraint, with its link constants.
#[derive(Debug, Clone, Copy)]
pub struct PerspectiveTerm {
    /// Variable index of the average power.
    pub ip: usize,
    /// Variable index of the subcarrier count.
    pub ik: usize,
    pub link: LinkParams,
}

#[derive(Debug, Clone, Copy)]
enum MapKind {
    VodRate,
    RtCapacity { beta: f64, theta: f64, slot_s: f64 },
}

/// Evaluate one term's value/gradient/curvature contribution.
#[derive(Debug, Clone, Copy)]
struct TermEval {
    value: f64,
    dp: f64,
    dk: f64,
    /// Second derivative of the scalar map at the ratio, divided by K.
    curv: f64,
    r: f64,
}

fn eval_term(term: &PerspectiveTerm, kind: MapKind, x: &[f64]) -> TermEval {
    let p = x[term.ip];
    let k = x[term.ik];
    debug_assert!(k > 0.0, "perspective term evaluated at K <= 0");
    let r = p / k;
    match kind {
        MapKind::VodRate => {
            let m = f_d_eval(r, &term.link);
            TermEval {
                value: k * m.value,
                dp: m.d1,
                dk: m.value - r * m.d1,
                curv: m.d2 / k,
                r,
            }
        }
        MapKind::RtCapacity { beta, theta, slot_s } => {
            let m = rt_f_eval(r, beta, &term.link);
            let inv = 1.0 / (theta * slot_s);
            let g = -m.ln_f * inv;
            let g1 = -m.df / m.f * inv;
            let g2 = -(m.d2f / m.f - (m.df / m.f).powi(2)) * inv;
            TermEval {
                value: k * g,
                dp: g1,
                dk: g - r * g1,
                curv: g2 / k,
                r,
            }
        }
    }
}

fn make_perspective_constraint(
    terms: Vec<PerspectiveTerm>,
    kind: MapKind,
    floor: f64,
) -> Constraint {
    assert!(floor > 0.0, "constraint floors must be positive");
    let t_val = terms.clone();
    let t_grad = terms.clone();
    let t_hess = terms;
    Constraint::new(
        move |x: &[f64]| {
            let mut s = 0.0;
            for t in &t_val {
                s += eval_term(t, kind, x).value;
            }
            s / floor - 1.0
        },
        move |x: &[f64], out: &mut [f64]| {
            out.fill(0.0);
            for t in &t_grad {
                let e = eval_term(t, kind, x);
                out[t.ip] += e.dp / floor;
                out[t.ik] += e.dk / floor;
            }
        },
    )
    .with_hessian(move |x: &[f64], w: f64, out: &mut DMatrix<f64>| {
        for t in &t_hess {
            let e = eval_term(t, kind, x);
            let c = w * e.curv / floor;
            out[(t.ip, t.ip)] += c;
            out[(t.ip, t.ik)] += -e.r * c;
            out[(t.ik, t.ip)] += -e.r * c;
            out[(t.ik, t.ik)] += e.r * e.r * c;
        }
    })
}

/// Cumulative VoD rate-floor constraint:
/// `sum_i K_i F_D(P_i/K_i) >= floor_bps` over the given frame terms.
pub fn vod_rate_constraint(terms: Vec<PerspectiveTerm>, floor_bps: f64) -> Constraint {
    make_perspective_constraint(terms, MapKind::VodRate, floor_bps)
}

/// Per-frame effective-capacity floor:
/// `-(K/(theta·tau))·ln F_R(P/K) >= eb_bps`.
pub fn rt_capacity_constraint(
    term: PerspectiveTerm,
    beta: f64,
    theta: f64,
    slot_s: f64,
    eb_bps: f64,
) -> Constraint {
    make_perspective_constraint(
        vec![term],
        MapKind::RtCapacity { beta, theta, slot_s },
        eb_bps,
    )
}

/// Append per-group power and bandwidth caps to a program: for each group
/// (one per BS and frame), `sum P <= p_ave` and `sum K <= k_max`. With a
/// single BS this reduces to the global per-frame caps.
pub fn apply_multicell_constraints(
    program: &mut ConvexProgram,
    groups: &[(Vec<usize>, Vec<usize>)],
    p_ave_w: f64,
    k_max: f64,
) {
    for (p_idx, k_idx) in groups {
        if !p_idx.is_empty() {
            program.constraints.push(linear_cap(p_idx.clone(), p_ave_w));
        }
        if !k_idx.is_empty() {
            program.constraints.push(linear_cap(k_idx.clone(), k_max));
        }
    }
}

fn linear_cap(idx: Vec<usize>, cap: f64) -> Constraint {
    assert!(cap > 0.0);
    let i_val = idx.clone();
    let i_grad = idx;
    Constraint::new(
        move |x: &[f64]| 1.0 - i_val.iter().map(|&j| x[j]).sum::<f64>() / cap,
        move |_x: &[f64], out: &mut [f64]| {
            out.fill(0.0);
            for &j in &i_grad {
                out[j] = -1.0 / cap;
            }
        },
    )
    .with_hessian(|_, _, _| {})
}

/// Simple linear floor `sum_j coef_j·x_j >= floor` (used by the
/// bandwidth-only baseline where the rate maps are frozen scalars).
pub fn linear_floor(idx_coef: Vec<(usize, f64)>, floor: f64) -> Constraint {
    assert!(floor > 0.0);
    let v = idx_coef.clone();
    let g = idx_coef;
    Constraint::new(
        move |x: &[f64]| v.iter().map(|&(j, c)| c * x[j]).sum::<f64>() / floor - 1.0,
        move |_x: &[f64], out: &mut [f64]| {
            out.fill(0.0);
            for &(j, c) in &g {
                out[j] = c / floor;
            }
        },
    )
    .with_hessian(|_, _, _| {})
}
