//! Max-min mutual information over an energy polytope.
//!
//! The feasible set is `{q ∈ simplex : a_k·q ≥ B_k}` and the objective is
//! `F(q) = min_ℓ I(q; P_ℓ)`, a concave function. The engine runs in stages:
//!
//! 1. projected supergradient ascent (Dykstra projection onto the simplex and
//!    the half-spaces, step `c/√t`, iterate averaging),
//! 2. coordinate-pair refinement with golden-section line searches,
//! 3. a log-barrier Newton polish on the epigraph form
//!    `max t s.t. I_ℓ(q) ≥ t`, which also yields a duality-gap certificate.
//!
//! The best feasible candidate is returned with a gap estimate: the smaller
//! of the tangent-plane LP bound and the barrier certificate.

use crate::channel::{dot, mi_bits, mi_gradient, mi_second_order, Dmc};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// Slack below which an iterate counts as satisfying a constraint.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Certified optimality gap, in bits, below which a solve counts as converged.
pub const GAP_TOLERANCE: f64 = 1e-7;
/// Channels within this distance of the minimum share the supergradient tie-break.
const TIE_TOL: f64 = 1e-9;
/// Constraints are relaxed by this much when the polytope has no interior.
const RELAXATION: f64 = 1e-10;

/// `coeffs · q ≥ bound`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

impl LinearConstraint {
    fn slack(&self, q: &[f64]) -> f64 {
        dot(&self.coeffs, q) - self.bound
    }

    /// Holds for every point of the simplex.
    fn is_redundant(&self) -> bool {
        let min = self.coeffs.iter().copied().fold(f64::INFINITY, f64::min);
        min >= self.bound
    }
}

#[derive(Debug, Clone)]
pub(crate) struct MaxMinProgram<'a> {
    pub objectives: Vec<&'a Dmc>,
    pub constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone)]
pub(crate) struct SolverOptions {
    pub max_iterations: usize,
    pub stall_window: usize,
    pub stall_tol: f64,
    pub step_scale: f64,
    pub pair_refinement: bool,
    pub barrier: bool,
    pub gap_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            stall_window: 200,
            stall_tol: 1e-9,
            step_scale: 0.3,
            pair_refinement: true,
            barrier: true,
            gap_tolerance: GAP_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RawSolution {
    pub q: Vec<f64>,
    pub value: f64,
    pub per_objective: Vec<f64>,
    pub gap_estimate: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum Feasibility {
    /// `witness` maximizes the smallest slack `min_k (a_k·q − B_k)`.
    Feasible { witness: Vec<f64> },
    /// Constraints attaining the (negative) best slack.
    Infeasible { slack: f64, binding: Vec<usize> },
}

/// Solves `max s s.t. a_k·q − B_k ≥ s, q ∈ simplex`.
pub(crate) fn feasibility(n: usize, constraints: &[LinearConstraint]) -> Feasibility {
    if constraints.is_empty() {
        return Feasibility::Feasible {
            witness: vec![1.0 / n as f64; n],
        };
    }
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    lp.set_free(n);
    let mut ones = vec![1.0; n + 1];
    ones[n] = 0.0;
    lp.constrain(ones, Relation::Eq, 1.0);
    for c in constraints {
        let mut row = c.coeffs.clone();
        row.push(-1.0);
        lp.constrain(row, Relation::Ge, c.bound);
    }
    match lp.solve() {
        LpOutcome::Optimal { x, value } => {
            let q = normalize(&x[..n]);
            if value >= -1e-12 {
                Feasibility::Feasible { witness: q }
            } else {
                let binding = constraints
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.slack(&q) <= value + 1e-9)
                    .map(|(k, _)| k)
                    .collect();
                Feasibility::Infeasible {
                    slack: value,
                    binding,
                }
            }
        }
        // Both outcomes are impossible for a bounded nonempty simplex program.
        LpOutcome::Infeasible | LpOutcome::Unbounded => Feasibility::Infeasible {
            slack: f64::NEG_INFINITY,
            binding: (0..constraints.len()).collect(),
        },
    }
}

/// `max_q min_k a_k·q` over the simplex, solved exactly as an LP.
pub(crate) fn max_min_linear(n: usize, rows: &[Vec<f64>]) -> f64 {
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    lp.set_free(n);
    let mut ones = vec![1.0; n + 1];
    ones[n] = 0.0;
    lp.constrain(ones, Relation::Eq, 1.0);
    for a in rows {
        let mut row = a.clone();
        row.push(-1.0);
        lp.constrain(row, Relation::Ge, 0.0);
    }
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => value,
        // Unreachable for nonempty rows over the simplex.
        _ => rows
            .iter()
            .map(|a| a.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Maximizes `min` over `objectives` subject to `rows[k]·q ≥ bounds[k]`,
/// reporting infeasibility with the binding receivers and the common B_max.
pub(crate) fn solve_energy_constrained(
    objectives: Vec<&Dmc>,
    rows: &[Vec<f64>],
    bounds: &[f64],
    opts: &SolverOptions,
) -> crate::Result<RawSolution> {
    let n = objectives[0].input_size();
    let constraints: Vec<LinearConstraint> = rows
        .iter()
        .zip(bounds)
        .map(|(a, b)| LinearConstraint {
            coeffs: a.clone(),
            bound: *b,
        })
        .collect();
    let witness = match feasibility(n, &constraints) {
        Feasibility::Feasible { witness, .. } => witness,
        Feasibility::Infeasible { binding, .. } => {
            return Err(crate::Error::Infeasible {
                receivers: binding,
                b_max: max_min_linear(n, rows),
            })
        }
    };
    let program = MaxMinProgram {
        objectives,
        constraints,
    };
    Ok(program.solve(&witness, opts))
}

fn normalize(q: &[f64]) -> Vec<f64> {
    let clamped: Vec<f64> = q.iter().map(|v| v.max(0.0)).collect();
    let s: f64 = clamped.iter().sum();
    clamped.into_iter().map(|v| v / s).collect()
}

impl<'a> MaxMinProgram<'a> {
    fn n(&self) -> usize {
        self.objectives[0].input_size()
    }

    pub(crate) fn per_objective(&self, q: &[f64]) -> Vec<f64> {
        self.objectives.iter().map(|ch| mi_bits(q, ch)).collect()
    }

    /// `F(q)` and the lowest-index channel attaining the minimum.
    fn evaluate(&self, q: &[f64]) -> (f64, usize) {
        let values = self.per_objective(q);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let arg = values.iter().position(|v| *v <= min + TIE_TOL).unwrap_or(0);
        (min, arg)
    }

    fn value(&self, q: &[f64]) -> f64 {
        self.objectives
            .iter()
            .map(|ch| mi_bits(q, ch))
            .fold(f64::INFINITY, f64::min)
    }

    fn max_violation(&self, q: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| -c.slack(q))
            .fold(0.0, f64::max)
    }

    /// Runs all stages. The caller must have checked feasibility; `witness`
    /// is a feasible point.
    pub(crate) fn solve(&self, witness: &[f64], opts: &SolverOptions) -> RawSolution {
        let n = self.n();
        let active: Vec<LinearConstraint> = self
            .constraints
            .iter()
            .filter(|c| !c.is_redundant())
            .cloned()
            .collect();

        if n == 1 {
            return self.finish(vec![1.0], 0, None, &active, opts);
        }
        if let Some(keep) = forced_support(n, &active) {
            return self.solve_on_support(&keep, witness, opts);
        }

        let (mut q, mut iterations) = self.supergradient(witness, &active, opts);
        if opts.pair_refinement {
            self.pair_refine(&mut q, &active);
        }
        let mut certificate = None;
        if opts.barrier {
            if let Some(b) = self.barrier(&active) {
                iterations += b.newton_steps;
                if self.max_violation(&b.q) <= FEASIBILITY_TOL && self.value(&b.q) > self.value(&q)
                {
                    q = b.q.clone();
                }
                certificate = b.upper_bound;
            }
        }
        self.finish(q, iterations, certificate, &active, opts)
    }

    /// Solves the program with every input outside `keep` pinned to zero.
    fn solve_on_support(
        &self,
        keep: &[usize],
        witness: &[f64],
        opts: &SolverOptions,
    ) -> RawSolution {
        let channels: Vec<Dmc> = self
            .objectives
            .iter()
            .map(|ch| {
                Dmc::new(keep.iter().map(|&x| ch.row(x).to_vec()).collect())
                    .expect("rows of a valid channel")
            })
            .collect();
        let reduced = MaxMinProgram {
            objectives: channels.iter().collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| LinearConstraint {
                    coeffs: keep.iter().map(|&x| c.coeffs[x]).collect(),
                    bound: c.bound,
                })
                .collect(),
        };
        let w = normalize(&keep.iter().map(|&x| witness[x]).collect::<Vec<_>>());
        let sub = reduced.solve(&w, opts);
        let mut q = vec![0.0; self.n()];
        for (&x, v) in keep.iter().zip(&sub.q) {
            q[x] = *v;
        }
        RawSolution {
            per_objective: self.per_objective(&q),
            q,
            ..sub
        }
    }

    fn finish(
        &self,
        q: Vec<f64>,
        iterations: usize,
        certificate: Option<f64>,
        active: &[LinearConstraint],
        opts: &SolverOptions,
    ) -> RawSolution {
        let per_objective = self.per_objective(&q);
        let value = per_objective.iter().copied().fold(f64::INFINITY, f64::min);
        let tangent = self.tangent_gap(&q, value, active);
        let mut gap = tangent;
        if let Some(upper) = certificate {
            gap = gap.min((upper - value).max(0.0));
        }
        RawSolution {
            q,
            value,
            per_objective,
            gap_estimate: gap,
            converged: gap <= opts.gap_tolerance,
            iterations,
        }
    }

    /// Upper bound on the optimum minus `value`, from the LP over the polytope
    /// of the pointwise-min of tangent planes at `q`.
    fn tangent_gap(&self, q: &[f64], value: f64, active: &[LinearConstraint]) -> f64 {
        let n = q.len();
        if n == 1 {
            return 0.0;
        }
        let mut obj = vec![0.0; n + 1];
        obj[n] = 1.0;
        let mut lp = LinearProgram::maximize(obj);
        lp.set_free(n);
        let mut ones = vec![1.0; n + 1];
        ones[n] = 0.0;
        lp.constrain(ones, Relation::Eq, 1.0);
        for c in active {
            let mut row = c.coeffs.clone();
            row.push(0.0);
            lp.constrain(row, Relation::Ge, c.bound);
        }
        let mut grad = vec![0.0; n];
        for ch in &self.objectives {
            mi_gradient(q, ch, &mut grad);
            let at = mi_bits(q, ch);
            // t ≤ I(q) + g·(v − q)
            let mut row: Vec<f64> = grad.iter().map(|g| -g).collect();
            row.push(1.0);
            lp.constrain(row, Relation::Le, at - dot(&grad, q));
        }
        match lp.solve() {
            LpOutcome::Optimal { value: bound, .. } => (bound - value).max(0.0),
            _ => f64::INFINITY,
        }
    }

    fn supergradient(
        &self,
        witness: &[f64],
        active: &[LinearConstraint],
        opts: &SolverOptions,
    ) -> (Vec<f64>, usize) {
        let n = self.n();
        let uniform = vec![1.0 / n as f64; n];
        let start = if active.iter().all(|c| c.slack(&uniform) >= 0.0) {
            uniform
        } else {
            repair(&dykstra(&uniform, active), witness, active)
        };

        let mut x = start;
        let mut avg = x.clone();
        let mut best_q = x.clone();
        let mut best = self.value(&x);
        let mut history = Vec::with_capacity(opts.max_iterations.min(1 << 16));
        history.push(best);
        let mut grad = vec![0.0; n];
        let mut iterations = 0;

        for t in 1..=opts.max_iterations {
            iterations = t;
            let (_, arg) = self.evaluate(&x);
            mi_gradient(&x, self.objectives[arg], &mut grad);
            let mean = grad.iter().sum::<f64>() / n as f64;
            grad.iter_mut().for_each(|g| *g -= mean);
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !norm.is_finite() || norm < 1e-15 {
                break;
            }
            let step = opts.step_scale / (t as f64).sqrt() / norm;
            let y: Vec<f64> = x.iter().zip(&grad).map(|(xi, g)| xi + step * g).collect();
            x = repair(&dykstra(&y, active), witness, active);
            for (a, xi) in avg.iter_mut().zip(&x) {
                *a += (xi - *a) / (t as f64 + 1.0);
            }
            for cand in [&x, &avg] {
                let v = self.value(cand);
                if v > best {
                    best = v;
                    best_q = cand.clone();
                }
            }
            history.push(best);
            if t >= opts.stall_window && best - history[t - opts.stall_window] < opts.stall_tol {
                break;
            }
        }
        (best_q, iterations)
    }

    /// Moves mass between coordinate pairs while `F` improves.
    fn pair_refine(&self, q: &mut [f64], active: &[LinearConstraint]) {
        let n = q.len();
        let mut current = self.value(q);
        for _sweep in 0..100 {
            let before = current;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    // Transfer δ from i to j.
                    let mut lo = -q[j];
                    let mut hi = q[i];
                    for c in active {
                        let d = c.coeffs[j] - c.coeffs[i];
                        let s = c.slack(q).max(0.0);
                        if d > 0.0 {
                            lo = lo.max(-s / d);
                        } else if d < 0.0 {
                            hi = hi.min(s / -d);
                        }
                    }
                    if !(hi - lo > 1e-15) {
                        continue;
                    }
                    let base = q.to_vec();
                    let eval = |delta: f64| {
                        let mut p = base.clone();
                        p[i] -= delta;
                        p[j] += delta;
                        if p[i] < 0.0 {
                            p[i] = 0.0;
                        }
                        self.value(&p)
                    };
                    let (delta, v) = golden_max(eval, lo, hi);
                    if v > current + 1e-15 {
                        q[i] = (q[i] - delta).max(0.0);
                        q[j] += delta;
                        current = self.value(q);
                    }
                }
            }
            if current - before < 1e-14 {
                break;
            }
        }
    }

    fn barrier(&self, active: &[LinearConstraint]) -> Option<BarrierResult> {
        let n = self.n();
        let (start, constraints) = match interior_point(n, active) {
            Some(p) if p.1 > 1e-9 => (p.0, active.to_vec()),
            _ => {
                let relaxed: Vec<LinearConstraint> = active
                    .iter()
                    .map(|c| LinearConstraint {
                        coeffs: c.coeffs.clone(),
                        bound: c.bound - RELAXATION,
                    })
                    .collect();
                let (q, s) = interior_point(n, &relaxed)?;
                if s <= 0.0 {
                    return None;
                }
                (q, relaxed)
            }
        };
        Barrier {
            program: self,
            constraints: &constraints,
        }
        .run(start)
    }
}

/// When the polytope has no interior because some inputs can carry no mass
/// at all, returns the inputs that can.
fn forced_support(n: usize, constraints: &[LinearConstraint]) -> Option<Vec<usize>> {
    match interior_point(n, constraints) {
        Some((_, s)) if s > 1e-9 => return None,
        None => return None,
        _ => {}
    }
    let keep: Vec<usize> = (0..n)
        .filter(|&x| {
            let mut obj = vec![0.0; n];
            obj[x] = 1.0;
            let mut lp = LinearProgram::maximize(obj);
            lp.constrain(vec![1.0; n], Relation::Eq, 1.0);
            for c in constraints {
                lp.constrain(c.coeffs.clone(), Relation::Ge, c.bound);
            }
            matches!(lp.solve(), LpOutcome::Optimal { value, .. } if value > 1e-10)
        })
        .collect();
    (!keep.is_empty() && keep.len() < n).then_some(keep)
}

/// Strictly interior point maximizing the smallest slack (capped at 1/n).
fn interior_point(n: usize, constraints: &[LinearConstraint]) -> Option<(Vec<f64>, f64)> {
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    let mut ones = vec![1.0; n + 1];
    ones[n] = 0.0;
    lp.constrain(ones, Relation::Eq, 1.0);
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    lp.constrain(cap, Relation::Le, 1.0 / n as f64);
    for x in 0..n {
        let mut row = vec![0.0; n + 1];
        row[x] = 1.0;
        row[n] = -1.0;
        lp.constrain(row, Relation::Ge, 0.0);
    }
    for c in constraints {
        let mut row = c.coeffs.clone();
        row.push(-1.0);
        lp.constrain(row, Relation::Ge, c.bound);
    }
    match lp.solve() {
        LpOutcome::Optimal { x, value } => {
            let q = x[..n].to_vec();
            let s: f64 = q.iter().sum();
            Some((q.iter().map(|v| v / s).collect(), value))
        }
        _ => None,
    }
}

struct BarrierResult {
    q: Vec<f64>,
    /// Upper bound on the optimum from the final duality gap.
    upper_bound: Option<f64>,
    newton_steps: usize,
}

struct Barrier<'p, 'a> {
    program: &'p MaxMinProgram<'a>,
    constraints: &'p [LinearConstraint],
}

impl Barrier<'_, '_> {
    fn constraint_count(&self) -> usize {
        self.program.objectives.len() + self.constraints.len() + self.program.n()
    }

    /// Barrier objective `τt + Σ ln(I_ℓ − t) + Σ ln(a·q − B) + Σ ln q`.
    fn phi(&self, z: &[f64], tau: f64) -> Option<f64> {
        let n = self.program.n();
        let (q, t) = (&z[..n], z[n]);
        let mut acc = tau * t;
        for &qx in q {
            if qx <= 0.0 {
                return None;
            }
            acc += qx.ln();
        }
        for c in self.constraints {
            let s = c.slack(q);
            if s <= 0.0 {
                return None;
            }
            acc += s.ln();
        }
        for ch in &self.program.objectives {
            let g = mi_bits(q, ch) - t;
            if g <= 0.0 {
                return None;
            }
            acc += g.ln();
        }
        Some(acc)
    }

    /// Gradient and Hessian of `phi` over `(q, t)`.
    fn derivatives(&self, z: &[f64], tau: f64, grad: &mut [f64], hess: &mut [f64]) {
        let n = self.program.n();
        let dim = n + 1;
        let (q, t) = (&z[..n], z[n]);
        grad.iter_mut().for_each(|v| *v = 0.0);
        hess.iter_mut().for_each(|v| *v = 0.0);
        grad[n] = tau;
        let mut g_i = vec![0.0; n];
        let mut h_i = vec![0.0; n * n];
        for ch in &self.program.objectives {
            let value = mi_second_order(q, ch, &mut g_i, &mut h_i);
            let g = value - t;
            let inv = 1.0 / g;
            let inv2 = inv * inv;
            for a in 0..n {
                grad[a] += g_i[a] * inv;
                for b in 0..n {
                    hess[a * dim + b] += h_i[a * n + b] * inv - g_i[a] * g_i[b] * inv2;
                }
                hess[a * dim + n] += g_i[a] * inv2;
                hess[n * dim + a] += g_i[a] * inv2;
            }
            grad[n] -= inv;
            hess[n * dim + n] -= inv2;
        }
        for c in self.constraints {
            let inv = 1.0 / c.slack(q);
            let inv2 = inv * inv;
            for a in 0..n {
                grad[a] += c.coeffs[a] * inv;
                for b in 0..n {
                    hess[a * dim + b] -= c.coeffs[a] * c.coeffs[b] * inv2;
                }
            }
        }
        for a in 0..n {
            grad[a] += 1.0 / q[a];
            hess[a * dim + a] -= 1.0 / (q[a] * q[a]);
        }
    }

    fn run(&self, start: Vec<f64>) -> Option<BarrierResult> {
        let n = self.program.n();
        let dim = n + 1;
        let m = self.constraint_count() as f64;
        let mut z = start;
        let t0 = self.program.value(&z) - 1.0;
        z.push(t0);

        let target_gap = 1e-10;
        let mut tau = 1.0;
        let mut steps = 0;
        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        let mut centered;
        loop {
            centered = false;
            for _ in 0..200 {
                steps += 1;
                self.derivatives(&z, tau, &mut grad, &mut hess);
                let Some(dz) = newton_direction(&grad, &hess, n) else {
                    break;
                };
                let dec2 = dot(&grad, &dz);
                if !dec2.is_finite() {
                    break;
                }
                if dec2 < 1e-12 {
                    centered = true;
                    break;
                }
                let phi0 = self.phi(&z, tau)?;
                let mut alpha = 1.0;
                let mut accepted = false;
                while alpha > 1e-20 {
                    let cand: Vec<f64> = z.iter().zip(&dz).map(|(a, d)| a + alpha * d).collect();
                    if let Some(p) = self.phi(&cand, tau) {
                        if p >= phi0 + 0.01 * alpha * dec2 {
                            z = cand;
                            accepted = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    // No further progress at machine precision.
                    centered = dec2 < 1e-8;
                    break;
                }
            }
            if !centered || m / tau < target_gap {
                break;
            }
            tau *= 8.0;
        }
        let q = normalize(&z[..n]);
        let upper_bound = centered.then(|| z[n] + m / tau);
        Some(BarrierResult {
            q,
            upper_bound,
            newton_steps: steps,
        })
    }
}

/// Newton step for maximizing a concave quadratic model subject to
/// `Σ dq = 0` (the `t` coordinate is unconstrained).
fn newton_direction(grad: &[f64], hess: &[f64], n: usize) -> Option<Vec<f64>> {
    let dim = n + 1;
    let size = dim + 1;
    let mut a = vec![0.0; size * size];
    let mut b = vec![0.0; size];
    for r in 0..dim {
        for c in 0..dim {
            a[r * size + c] = hess[r * dim + c];
        }
        b[r] = -grad[r];
    }
    for x in 0..n {
        a[x * size + dim] = 1.0;
        a[dim * size + x] = 1.0;
    }
    if !solve_dense(&mut a, &mut b, size) {
        return None;
    }
    b.truncate(dim);
    Some(b)
}

/// Gaussian elimination with partial pivoting; the solution overwrites `b`.
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col].abs() == 0.0 || !a[pivot * n + col].is_finite() {
            return false;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..n).rev() {
        let mut acc = b[r];
        for k in r + 1..n {
            acc -= a[r * n + k] * b[k];
        }
        b[r] = acc / a[r * n + r];
    }
    b.iter().all(|v| v.is_finite())
}

/// Maximizes a unimodal function on `[lo, hi]`; returns the argmax and value,
/// comparing against both endpoints.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..100 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for e in [lo, hi] {
        let fe = f(e);
        if fe > best.1 {
            best = (e, fe);
        }
    }
    best
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (k as f64 + 1.0);
        if v - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

fn project_halfspace(y: &[f64], c: &LinearConstraint) -> Vec<f64> {
    let s = c.slack(y);
    if s >= 0.0 {
        return y.to_vec();
    }
    let norm2 = dot(&c.coeffs, &c.coeffs);
    if norm2 == 0.0 {
        return y.to_vec();
    }
    let f = -s / norm2;
    y.iter().zip(&c.coeffs).map(|(v, a)| v + f * a).collect()
}

/// Dykstra's alternating projections onto the half-spaces and the simplex;
/// the result lies exactly on the simplex.
pub(crate) fn dykstra(y: &[f64], constraints: &[LinearConstraint]) -> Vec<f64> {
    let first = project_simplex(y);
    if constraints.iter().all(|c| c.slack(&first) >= 0.0) {
        return first;
    }
    let sets = constraints.len() + 1;
    let mut increments = vec![vec![0.0; y.len()]; sets];
    let mut x = y.to_vec();
    for _ in 0..2000 {
        let prev = x.clone();
        for (k, inc) in increments.iter_mut().enumerate() {
            let z: Vec<f64> = x.iter().zip(inc.iter()).map(|(a, b)| a + b).collect();
            let p = if k < constraints.len() {
                project_halfspace(&z, &constraints[k])
            } else {
                project_simplex(&z)
            };
            for ((i, zi), pi) in inc.iter_mut().zip(&z).zip(&p) {
                *i = zi - pi;
            }
            x = p;
        }
        let change = x
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change < 1e-15 {
            break;
        }
    }
    x
}

/// Moves `x` toward the feasible `witness` just far enough to satisfy every
/// constraint.
pub(crate) fn repair(x: &[f64], witness: &[f64], constraints: &[LinearConstraint]) -> Vec<f64> {
    let mut theta: f64 = 0.0;
    for c in constraints {
        let sx = c.slack(x);
        if sx < 0.0 {
            let sw = c.slack(witness);
            theta = theta.max(if sw > sx { -sx / (sw - sx) } else { 1.0 });
        }
    }
    let theta = theta.min(1.0);
    if theta == 0.0 {
        return x.to_vec();
    }
    x.iter()
        .zip(witness)
        .map(|(a, w)| (1.0 - theta) * a + theta * w)
        .collect()
}
