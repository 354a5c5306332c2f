//! Log-barrier interior-point solver for linear objectives over concave
//! inequality constraints.
//!
//! Programs have the form
//!
//! ```text
//! minimize    cᵀx
//! subject to  g_i(x) >= 0        (each g_i concave)
//!             x_j >= l_j         (optional per-coordinate lower bounds)
//! ```
//!
//! A phase-I pass minimizes the worst constraint violation to find a strictly
//! feasible start (or certify infeasibility), then the central path is
//! followed with damped Newton steps. Constraints supply values and
//! gradients; Hessians are optional and fall back to central differences of
//! the gradient. Everything is sequential, so identical inputs produce
//! bitwise-identical results.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::NumericsError;

/// One concave inequality constraint `value(x) >= 0`.
pub struct Constraint {
    pub value: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub gradient: Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    /// Accumulates `weight · ∇²g(x)` into `out`. When absent the solver
    /// differentiates the gradient numerically.
    pub hessian: Option<Box<dyn Fn(&[f64], f64, &mut DMatrix<f64>) + Send + Sync>>,
}

impl Constraint {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Box::new(value),
            gradient: Box::new(gradient),
            hessian: None,
        }
    }

    pub fn with_hessian(
        mut self,
        hessian: impl Fn(&[f64], f64, &mut DMatrix<f64>) + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Box::new(hessian));
        self
    }
}

/// Convex program with a linear objective; see the module docs for the form.
pub struct ConvexProgram {
    pub dimension: usize,
    pub objective_gradient: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Lower bound per coordinate; `f64::NEG_INFINITY` disables the bound.
    pub box_lower: Vec<f64>,
}

impl ConvexProgram {
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.objective_gradient
            .iter()
            .zip(x)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Worst constraint violation at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            worst = worst.max(-(c.value)(x));
        }
        for (j, &l) in self.box_lower.iter().enumerate() {
            if l.is_finite() {
                worst = worst.max(l - x[j]);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub status: SolverStatus,
    pub point: Vec<f64>,
    pub objective: f64,
    /// Duality-gap bound at termination (number of barrier terms over `t`).
    pub kkt_residual: f64,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Relative objective accuracy target.
    pub rel_tol: f64,
    /// Tolerance used when certifying feasibility.
    pub feas_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Barrier parameter growth factor per outer iteration.
    pub mu: f64,
    /// Strictly feasible (or at least domain-valid) starting point.
    pub initial_point: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            feas_tol: 1e-9,
            max_outer: 80,
            max_inner: 200,
            mu: 20.0,
            initial_point: None,
        }
    }
}

/// Internal view the barrier core works against, so the phase-I problem can
/// borrow the original program and append a slack variable without copies.
trait BarrierProblem {
    fn dim(&self) -> usize;
    fn objective(&self, x: &[f64]) -> f64;
    fn objective_gradient(&self, out: &mut [f64]);
    fn n_constraints(&self) -> usize;
    fn c_value(&self, i: usize, x: &[f64]) -> f64;
    fn c_gradient(&self, i: usize, x: &[f64], out: &mut [f64]);
    fn c_hessian(&self, i: usize, x: &[f64], weight: f64, out: &mut DMatrix<f64>);
    fn lower(&self, j: usize) -> f64;
}

fn fd_hessian_of_gradient(
    grad: &dyn Fn(&[f64], &mut [f64]),
    x: &[f64],
    weight: f64,
    out: &mut DMatrix<f64>,
) {
    let n = x.len();
    let mut xp = x.to_vec();
    let mut gp = vec![0.0; n];
    let mut gm = vec![0.0; n];
    for j in 0..n {
        let h = 1e-6 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        grad(&xp, &mut gp);
        xp[j] = x[j] - h;
        grad(&xp, &mut gm);
        xp[j] = x[j];
        for i in 0..n {
            let d = weight * (gp[i] - gm[i]) / (2.0 * h);
            out[(i, j)] += 0.5 * d;
            out[(j, i)] += 0.5 * d;
        }
    }
}

impl BarrierProblem for ConvexProgram {
    fn dim(&self) -> usize {
        self.dimension
    }
    fn objective(&self, x: &[f64]) -> f64 {
        ConvexProgram::objective(self, x)
    }
    fn objective_gradient(&self, out: &mut [f64]) {
        out.copy_from_slice(&self.objective_gradient);
    }
    fn n_constraints(&self) -> usize {
        self.constraints.len()
    }
    fn c_value(&self, i: usize, x: &[f64]) -> f64 {
        (self.constraints[i].value)(x)
    }
    fn c_gradient(&self, i: usize, x: &[f64], out: &mut [f64]) {
        (self.constraints[i].gradient)(x, out)
    }
    fn c_hessian(&self, i: usize, x: &[f64], weight: f64, out: &mut DMatrix<f64>) {
        match &self.constraints[i].hessian {
            Some(h) => h(x, weight, out),
            None => fd_hessian_of_gradient(&self.constraints[i].gradient, x, weight, out),
        }
    }
    fn lower(&self, j: usize) -> f64 {
        self.box_lower[j]
    }
}

/// Phase-I problem: minimize s subject to g_i(x) + s >= 0 over (x, s).
struct PhaseOne<'a> {
    inner: &'a ConvexProgram,
}

impl BarrierProblem for PhaseOne<'_> {
    fn dim(&self) -> usize {
        self.inner.dimension + 1
    }
    fn objective(&self, x: &[f64]) -> f64 {
        x[self.inner.dimension]
    }
    fn objective_gradient(&self, out: &mut [f64]) {
        out.fill(0.0);
        out[self.inner.dimension] = 1.0;
    }
    fn n_constraints(&self) -> usize {
        self.inner.constraints.len()
    }
    fn c_value(&self, i: usize, x: &[f64]) -> f64 {
        (self.inner.constraints[i].value)(&x[..self.inner.dimension]) + x[self.inner.dimension]
    }
    fn c_gradient(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let n = self.inner.dimension;
        (self.inner.constraints[i].gradient)(&x[..n], &mut out[..n]);
        out[n] = 1.0;
    }
    fn c_hessian(&self, i: usize, x: &[f64], weight: f64, out: &mut DMatrix<f64>) {
        let n = self.inner.dimension;
        let mut sub = DMatrix::zeros(n, n);
        match &self.inner.constraints[i].hessian {
            Some(h) => h(&x[..n], weight, &mut sub),
            None => fd_hessian_of_gradient(&self.inner.constraints[i].gradient, &x[..n], weight, &mut sub),
        }
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += sub[(r, c)];
            }
        }
    }
    fn lower(&self, j: usize) -> f64 {
        if j < self.inner.dimension {
            self.inner.box_lower[j]
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Minimize the program with a log-barrier method.
///
/// `Optimal` results satisfy every constraint up to `feas_tol` and carry a
/// duality-gap bound in `kkt_residual`. `Infeasible` is certified by a
/// phase-I optimum that stays positive.
pub fn minimize_convex(
    program: &ConvexProgram,
    opts: &SolverOptions,
) -> Result<SolverResult, NumericsError> {
    let n = program.dimension;
    if program.objective_gradient.len() != n || program.box_lower.len() != n {
        return Err(NumericsError::Domain("program dimension mismatch".into()));
    }

    let x0 = starting_point(program, opts);
    let worst = (0..program.constraints.len())
        .map(|i| -program.c_value(i, &x0))
        .fold(f64::NEG_INFINITY, f64::max);

    let x_feas = if program.constraints.is_empty() || worst < 0.0 {
        x0
    } else {
        // Phase I.
        let phase = PhaseOne { inner: program };
        let mut start = x0.clone();
        start.push(worst + 1.0);
        let stop = |xs: &[f64]| xs[n] < -1e-12;
        let res = run_central_path(&phase, start, opts, &stop)?;
        let s = res.point[n];
        if s < 0.0 {
            res.point[..n].to_vec()
        } else {
            let status = if s > opts.feas_tol || res.status == SolverStatus::Optimal {
                SolverStatus::Infeasible
            } else {
                SolverStatus::MaxIterations
            };
            return Ok(SolverResult {
                status,
                point: x0,
                objective: f64::NAN,
                kkt_residual: s.max(0.0),
                newton_iterations: res.newton_iterations,
            });
        }
    };

    run_central_path(program, x_feas, opts, &|_| false)
}

/// Returns a domain-valid start: strictly above the box bounds.
fn starting_point(program: &ConvexProgram, opts: &SolverOptions) -> Vec<f64> {
    if let Some(x) = &opts.initial_point {
        let mut x = x.clone();
        for (j, &l) in program.box_lower.iter().enumerate() {
            if l.is_finite() && x[j] <= l {
                x[j] = l + 1.0;
            }
        }
        return x;
    }
    program
        .box_lower
        .iter()
        .map(|&l| if l.is_finite() { l + 1.0 } else { 0.0 })
        .collect()
}

fn run_central_path(
    problem: &dyn BarrierProblem,
    mut x: Vec<f64>,
    opts: &SolverOptions,
    early_stop: &dyn Fn(&[f64]) -> bool,
) -> Result<SolverResult, NumericsError> {
    let n = problem.dim();
    let bounded: Vec<usize> = (0..n).filter(|&j| problem.lower(j).is_finite()).collect();
    let m_terms = (problem.n_constraints() + bounded.len()) as f64;
    if m_terms == 0.0 {
        return Err(NumericsError::Domain(
            "unbounded program: no constraints or box bounds".into(),
        ));
    }

    let mut t = 1.0;
    let mut newton_total = 0usize;
    let mut status = SolverStatus::MaxIterations;

    'outer: for _ in 0..opts.max_outer {
        for _ in 0..opts.max_inner {
            if early_stop(&x) {
                status = SolverStatus::Optimal;
                break 'outer;
            }
            newton_total += 1;
            let (phi, grad, hess) = barrier_eval(problem, &bounded, &x, t);
            if !phi.is_finite() {
                return Err(NumericsError::Domain(
                    "barrier evaluated outside its domain".into(),
                ));
            }

            let step = match newton_step(&hess, &grad) {
                Some(s) => s,
                None => break,
            };
            let decrement = -grad.dot(&step);
            if decrement <= 0.0 {
                break;
            }

            // Backtracking: stay strictly inside the domain, then Armijo.
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..70 {
                let xn: Vec<f64> = x
                    .iter()
                    .zip(step.iter())
                    .map(|(xi, di)| xi + alpha * di)
                    .collect();
                let phi_n = barrier_value(problem, &bounded, &xn, t);
                if phi_n.is_finite() && phi_n <= phi - 0.25 * alpha * decrement {
                    x = xn;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted || 0.5 * decrement < 1e-9 {
                break;
            }
        }

        let gap = m_terms / t;
        let obj = problem.objective(&x);
        if gap <= (opts.rel_tol * obj.abs()).max(1e-12) {
            status = SolverStatus::Optimal;
            break;
        }
        t *= opts.mu;
    }

    let objective = problem.objective(&x);
    let gap = m_terms / t.max(1.0);
    Ok(SolverResult {
        status,
        point: x,
        objective,
        kkt_residual: gap,
        newton_iterations: newton_total,
    })
}

fn barrier_value(problem: &dyn BarrierProblem, bounded: &[usize], x: &[f64], t: f64) -> f64 {
    // Bounds first: constraint closures may assume the box holds.
    let mut phi = t * problem.objective(x);
    for &j in bounded {
        let s = x[j] - problem.lower(j);
        if !(s > 0.0) {
            return f64::INFINITY;
        }
        phi -= s.ln();
    }
    for i in 0..problem.n_constraints() {
        let v = problem.c_value(i, x);
        if !(v > 0.0) {
            return f64::INFINITY;
        }
        phi -= v.ln();
    }
    phi
}

fn barrier_eval(
    problem: &dyn BarrierProblem,
    bounded: &[usize],
    x: &[f64],
    t: f64,
) -> (f64, DVector<f64>, DMatrix<f64>) {
    let n = x.len();
    let mut phi = t * problem.objective(x);
    let mut obj_grad = vec![0.0; n];
    problem.objective_gradient(&mut obj_grad);
    let mut grad = DVector::from_iterator(n, obj_grad.iter().map(|c| t * c));
    let mut hess = DMatrix::zeros(n, n);
    let mut cg = vec![0.0; n];

    // Bounds first: constraint closures may assume the box holds.
    for &j in bounded {
        let s = x[j] - problem.lower(j);
        if !(s > 0.0) {
            return (f64::INFINITY, grad, hess);
        }
        phi -= s.ln();
        grad[j] -= 1.0 / s;
        hess[(j, j)] += 1.0 / (s * s);
    }

    for i in 0..problem.n_constraints() {
        let v = problem.c_value(i, x);
        if !(v > 0.0) {
            return (f64::INFINITY, grad, hess);
        }
        phi -= v.ln();
        cg.fill(0.0);
        problem.c_gradient(i, x, &mut cg);
        for r in 0..n {
            grad[r] -= cg[r] / v;
        }
        // ∇c ∇cᵀ / c²  −  ∇²c / c
        for r in 0..n {
            if cg[r] == 0.0 {
                continue;
            }
            let gr = cg[r] / v;
            for c in 0..n {
                if cg[c] != 0.0 {
                    hess[(r, c)] += gr * cg[c] / v;
                }
            }
        }
        problem.c_hessian(i, x, -1.0 / v, &mut hess);
    }
    (phi, grad, hess)
}

fn newton_step(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let n = grad.len();
    let mut ridge = 0.0;
    let scale = hess.diagonal().amax().max(1e-30);
    for _ in 0..8 {
        let mut h = hess.clone();
        if ridge > 0.0 {
            for i in 0..n {
                h[(i, i)] += ridge * scale;
            }
        }
        if let Some(chol) = Cholesky::new(h) {
            let step = chol.solve(&(-grad));
            if step.iter().all(|v| v.is_finite()) {
                return Some(step);
            }
        }
        ridge = if ridge == 0.0 { 1e-12 } else { ridge * 100.0 };
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_lp() -> ConvexProgram {
        // minimize x1 + x2  s.t.  x1 >= 1, x2 >= 2 (as general constraints)
        ConvexProgram {
            dimension: 2,
            objective_gradient: vec![1.0, 1.0],
            constraints: vec![
                Constraint::new(
                    |x| x[0] - 1.0,
                    |_, g| {
                        g[0] = 1.0;
                        g[1] = 0.0;
                    },
                ),
                Constraint::new(
                    |x| x[1] - 2.0,
                    |_, g| {
                        g[0] = 0.0;
                        g[1] = 1.0;
                    },
                ),
            ],
            box_lower: vec![0.0, 0.0],
        }
    }

    #[test]
    fn solves_box_constrained_lp() {
        let res = minimize_convex(&box_lp(), &SolverOptions::default()).unwrap();
        assert_eq!(res.status, SolverStatus::Optimal);
        assert!((res.objective - 3.0).abs() < 1e-6, "objective {}", res.objective);
        assert!((res.point[0] - 1.0).abs() < 1e-5);
        assert!((res.point[1] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn solves_log_constraint_at_boundary() {
        // minimize x s.t. ln(x) >= 0, x >= 0  ->  x = 1
        let program = ConvexProgram {
            dimension: 1,
            objective_gradient: vec![1.0],
            constraints: vec![Constraint::new(|x| x[0].ln(), |x, g| g[0] = 1.0 / x[0])
                .with_hessian(|x, w, out| out[(0, 0)] += w * (-1.0 / (x[0] * x[0])))],
            box_lower: vec![0.0],
        };
        let opts = SolverOptions {
            initial_point: Some(vec![3.0]),
            ..Default::default()
        };
        let res = minimize_convex(&program, &opts).unwrap();
        assert_eq!(res.status, SolverStatus::Optimal);
        assert!((res.point[0] - 1.0).abs() < 1e-6, "x = {}", res.point[0]);
    }

    #[test]
    fn solves_product_floor_problem() {
        // minimize x + y s.t. ln x + ln y >= 0  ->  x = y = 1, objective 2.
        let program = ConvexProgram {
            dimension: 2,
            objective_gradient: vec![1.0, 1.0],
            constraints: vec![Constraint::new(
                |x| x[0].ln() + x[1].ln(),
                |x, g| {
                    g[0] = 1.0 / x[0];
                    g[1] = 1.0 / x[1];
                },
            )],
            box_lower: vec![0.0, 0.0],
        };
        let opts = SolverOptions {
            initial_point: Some(vec![4.0, 0.9]),
            ..Default::default()
        };
        let res = minimize_convex(&program, &opts).unwrap();
        assert_eq!(res.status, SolverStatus::Optimal);
        assert!((res.objective - 2.0).abs() < 2e-6, "objective {}", res.objective);
    }

    #[test]
    fn certifies_infeasibility() {
        // x >= 2 and 1 - x >= 0 cannot hold together.
        let program = ConvexProgram {
            dimension: 1,
            objective_gradient: vec![1.0],
            constraints: vec![
                Constraint::new(|x| x[0] - 2.0, |_, g| g[0] = 1.0),
                Constraint::new(|x| 1.0 - x[0], |_, g| g[0] = -1.0),
            ],
            box_lower: vec![0.0],
        };
        let res = minimize_convex(&program, &SolverOptions::default()).unwrap();
        assert_eq!(res.status, SolverStatus::Infeasible);
        assert!(res.kkt_residual > 0.0);
    }

    #[test]
    fn optimal_point_respects_feasibility_contract() {
        let program = box_lp();
        let res = minimize_convex(&program, &SolverOptions::default()).unwrap();
        assert!(program.max_violation(&res.point) <= 1e-9);
        assert!(res.kkt_residual <= 1e-6);
    }

    #[test]
    fn phase_one_recovers_from_infeasible_start() {
        // Start far outside the feasible region of the product-floor problem.
        let program = ConvexProgram {
            dimension: 2,
            objective_gradient: vec![1.0, 1.0],
            constraints: vec![Constraint::new(
                |x| x[0].ln() + x[1].ln(),
                |x, g| {
                    g[0] = 1.0 / x[0];
                    g[1] = 1.0 / x[1];
                },
            )],
            box_lower: vec![0.0, 0.0],
        };
        let opts = SolverOptions {
            initial_point: Some(vec![0.05, 0.05]),
            ..Default::default()
        };
        let res = minimize_convex(&program, &opts).unwrap();
        assert_eq!(res.status, SolverStatus::Optimal);
        assert!((res.objective - 2.0).abs() < 2e-6, "objective {}", res.objective);
    }
}
