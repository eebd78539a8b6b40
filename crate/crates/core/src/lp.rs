//! Dense two-phase simplex method with Bland's rule, sized for the handful of
//! variables and constraints that appear in energy-feasibility programs.

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// `maximize c·x` subject to linear rows, with `x ≥ 0` unless a variable is
/// marked free.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    objective: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl LinearProgram {
    pub(crate) fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            free: vec![false; n],
            rows: Vec::new(),
        }
    }

    pub(crate) fn set_free(&mut self, var: usize) -> &mut Self {
        self.free[var] = true;
        self
    }

    pub(crate) fn constrain(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> &mut Self {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        self.rows.push((coeffs, rel, rhs));
        self
    }

    pub(crate) fn solve(&self) -> LpOutcome {
        // Free variables are split as x = x⁺ − x⁻.
        let mut column_of = Vec::with_capacity(self.objective.len());
        let mut ncols = 0;
        for &f in &self.free {
            column_of.push(ncols);
            ncols += if f { 2 } else { 1 };
        }
        let expand = |coeffs: &[f64]| {
            let mut out = vec![0.0; ncols];
            for (j, &c) in coeffs.iter().enumerate() {
                out[column_of[j]] = c;
                if self.free[j] {
                    out[column_of[j] + 1] = -c;
                }
            }
            out
        };
        let c = expand(&self.objective);
        let rows: Vec<(Vec<f64>, Relation, f64)> = self
            .rows
            .iter()
            .map(|(a, rel, b)| (expand(a), *rel, *b))
            .collect();

        match solve_standard(&c, &rows) {
            LpOutcome::Optimal { x, value } => {
                let x = (0..self.objective.len())
                    .map(|j| {
                        let k = column_of[j];
                        if self.free[j] {
                            x[k] - x[k + 1]
                        } else {
                            x[k]
                        }
                    })
                    .collect();
                LpOutcome::Optimal { x, value }
            }
            other => other,
        }
    }
}

struct Tableau {
    /// Constraint rows, last entry is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = cost[c];
        if f != 0.0 {
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for maximizing `obj` (length `width`), consistent with
    /// the current basis.
    fn cost_row(&self, obj: &[f64]) -> Vec<f64> {
        let mut cost: Vec<f64> = obj.iter().map(|v| -v).collect();
        cost.push(0.0);
        for (r, &b) in self.basis.iter().enumerate() {
            let f = cost[b];
            if f != 0.0 {
                for (v, rv) in cost.iter_mut().zip(&self.rows[r]) {
                    *v -= f * rv;
                }
            }
        }
        cost
    }

    /// Primal simplex with Bland's rule over the allowed columns.
    /// Returns false if unbounded.
    fn optimize(&mut self, cost: &mut [f64], allowed: usize) -> bool {
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..allowed).find(|&j| cost[j] < -COST_TOL) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOL {
                    let ratio = row[self.width] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-15
                                || (ratio <= lratio + 1e-15 && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, enter, cost),
            }
        }
        true
    }
}

fn solve_standard(c: &[f64], rows: &[(Vec<f64>, Relation, f64)]) -> LpOutcome {
    let n = c.len();
    let m = rows.len();
    // Column layout: originals | slack/surplus per inequality | artificials.
    let n_slack = rows.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
    let width = n + n_slack + m;
    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
    };
    let mut slack_col = n;
    for (i, (a, rel, b)) in rows.iter().enumerate() {
        let mut row = vec![0.0; width + 1];
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for (j, v) in a.iter().enumerate() {
            row[j] = sign * v;
        }
        let rel = match (rel, sign < 0.0) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => *r,
        };
        match rel {
            Relation::Le => {
                row[slack_col] = 1.0;
                slack_col += 1;
            }
            Relation::Ge => {
                row[slack_col] = -1.0;
                slack_col += 1;
            }
            Relation::Eq => {}
        }
        row[n + n_slack + i] = 1.0;
        row[width] = sign * b;
        tab.rows.push(row);
        tab.basis.push(n + n_slack + i);
    }

    // Phase 1: maximize −Σ artificials.
    let mut phase1 = vec![0.0; width];
    for v in phase1.iter_mut().skip(n + n_slack) {
        *v = -1.0;
    }
    let mut cost = tab.cost_row(&phase1);
    tab.optimize(&mut cost, width);
    if cost[width] < -FEAS_TOL {
        return LpOutcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= n + n_slack {
            if let Some(j) = (0..n + n_slack).find(|&j| tab.rows[r][j].abs() > PIVOT_TOL) {
                tab.pivot(r, j, &mut cost);
            }
        }
    }

    // Phase 2 over non-artificial columns.
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(c);
    let mut cost = tab.cost_row(&obj);
    if !tab.optimize(&mut cost, n + n_slack) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rows[r][width].max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram) -> (Vec<f64>, f64) {
        match lp.solve() {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 4.0)
            .constrain(vec![0.0, 2.0], Relation::Le, 12.0)
            .constrain(vec![3.0, 2.0], Relation::Le, 18.0);
        let (x, v) = optimal(&lp);
        assert!((v - 36.0).abs() < 1e-12);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max t s.t. q·a1 ≥ t, q·a2 ≥ t, q on the simplex (max-min of lines)
        // a1 = [0.12, 0.88], a2 = [0, 0.7] → t = 0.7 at q = [0, 1]
        let mut lp = LinearProgram::maximize(vec![0.0, 0.0, 1.0]);
        lp.constrain(vec![1.0, 1.0, 0.0], Relation::Eq, 1.0)
            .constrain(vec![0.12, 0.88, -1.0], Relation::Ge, 0.0)
            .constrain(vec![0.0, 0.7, -1.0], Relation::Ge, 0.0);
        let (x, v) = optimal(&lp);
        assert!((v - 0.7).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_lines_max_min() {
        // min{0.2 + 0.6p, 1 − p} peaks where the lines cross: p = 0.5, value 0.5
        let mut lp = LinearProgram::maximize(vec![0.0, 0.0, 1.0]);
        lp.constrain(vec![1.0, 1.0, 0.0], Relation::Eq, 1.0)
            .constrain(vec![0.2, 0.8, -1.0], Relation::Ge, 0.0)
            .constrain(vec![1.0, 0.0, -1.0], Relation::Ge, 0.0);
        let (x, v) = optimal(&lp);
        assert!((v - 0.5).abs() < 1e-12, "{v}");
        assert!((x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn free_variable_can_go_negative() {
        // max s s.t. s ≤ −0.25 + q0, s ≤ −0.25 + q1... with q0 + q1 = 0.2
        let mut lp = LinearProgram::maximize(vec![0.0, 0.0, 1.0]);
        lp.set_free(2)
            .constrain(vec![1.0, 1.0, 0.0], Relation::Eq, 0.2)
            .constrain(vec![1.0, 0.0, -1.0], Relation::Ge, 0.25)
            .constrain(vec![0.0, 1.0, -1.0], Relation::Ge, 0.25);
        let (x, v) = optimal(&lp);
        assert!((v + 0.15).abs() < 1e-12, "{v}");
        assert!((x[2] + 0.15).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0)
            .constrain(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.constrain(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::maximize(vec![1.0, 2.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0).constrain(
            vec![2.0, 2.0],
            Relation::Eq,
            2.0,
        );
        let (x, v) = optimal(&lp);
        assert!((v - 2.0).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
    }
}
