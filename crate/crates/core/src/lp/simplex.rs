//! Dense two-phase primal simplex with Bland's rule.
//!
//! This is the built-in correctness oracle for small problems: it trades
//! speed for transparency (full tableau, explicit artificial columns) and
//! returns primal values, row duals and reduced costs. Production solves go
//! through [`crate::lp::backend`].

use super::{LpProblem, LpSolution, RowSense, SolveStatus};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
enum ColKind {
    /// x = l + x', with an optional explicit row x' <= u - l.
    Shift(f64),
    /// x = u - x' (lower bound is -inf).
    Mirror(f64),
    /// x = x_pos - x_neg (free variable); value is the index of x_neg.
    Split(usize),
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    obj: Vec<f64>,
    obj_rhs: f64,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        let inv = 1.0 / piv;
        for v in &mut self.rows[r] {
            *v *= inv;
        }
        self.rhs[r] *= inv;
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][c];
            if factor == 0.0 {
                continue;
            }
            let (head, tail) = self.rows.split_at_mut(r.max(i));
            let (src, dst) = if r < i {
                (&head[r], &mut tail[0])
            } else {
                (&tail[0], &mut head[i])
            };
            for j in 0..self.ncols {
                dst[j] -= factor * src[j];
            }
            self.rhs[i] -= factor * self.rhs[r];
        }
        let factor = self.obj[c];
        if factor != 0.0 {
            for j in 0..self.ncols {
                self.obj[j] -= factor * self.rows[r][j];
            }
            self.obj_rhs -= factor * self.rhs[r];
        }
        self.basis[r] = c;
    }

    /// Bland's rule: entering = lowest-index column with negative reduced
    /// cost; leaving = min-ratio row, ties broken by lowest basis index.
    fn bland_step(&mut self, allowed: &dyn Fn(usize) -> bool) -> StepResult {
        let mut entering = None;
        for j in 0..self.ncols {
            if allowed(j) && self.obj[j] < -PIVOT_TOL {
                entering = Some(j);
                break;
            }
        }
        let Some(c) = entering else {
            return StepResult::Optimal;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..self.rows.len() {
            let a = self.rows[i][c];
            if a > PIVOT_TOL {
                let ratio = self.rhs[i] / a;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((best_i, best)) => {
                        if ratio < best - PIVOT_TOL
                            || (ratio < best + PIVOT_TOL && self.basis[i] < self.basis[best_i])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        match leave {
            Some((r, _)) => {
                self.pivot(r, c);
                StepResult::Pivoted
            }
            None => StepResult::Unbounded,
        }
    }

    fn rebuild_objective(&mut self, costs: &[f64]) {
        self.obj = costs.to_vec();
        self.obj_rhs = 0.0;
        for r in 0..self.rows.len() {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                for j in 0..self.ncols {
                    self.obj[j] -= cb * self.rows[r][j];
                }
                self.obj_rhs -= cb * self.rhs[r];
            }
        }
    }
}

enum StepResult {
    Optimal,
    Pivoted,
    Unbounded,
}

/// Solve a problem with the dense oracle. Intended for small instances;
/// see [`super::backend::SimplexBackend`] for the capped adapter.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    let n = p.num_cols();
    if n == 0 {
        return Ok(LpSolution {
            status: SolveStatus::Optimal,
            primal: Vec::new(),
            duals: vec![0.0; p.num_rows()],
            reduced_costs: Vec::new(),
            objective: 0.0,
        });
    }

    // Map original columns onto nonnegative structural columns.
    let mut kinds = Vec::with_capacity(n);
    let mut col_of = Vec::with_capacity(n);
    let mut ns = 0usize;
    let mut ub_rows: Vec<(usize, f64)> = Vec::new(); // (structural col, u - l)
    for j in 0..n {
        let (l, u) = (p.lower_bounds()[j], p.upper_bounds()[j]);
        col_of.push(ns);
        if l.is_finite() {
            kinds.push(ColKind::Shift(l));
            if u.is_finite() {
                ub_rows.push((ns, u - l));
            }
            ns += 1;
        } else if u.is_finite() {
            kinds.push(ColKind::Mirror(u));
            ns += 1;
        } else {
            kinds.push(ColKind::Split(ns + 1));
            ns += 2;
        }
    }

    let m0 = p.num_rows();
    let m = m0 + ub_rows.len();

    // Dense standard-form rows over structural columns.
    let mut a = vec![vec![0.0; ns]; m];
    let mut b = vec![0.0; m];
    let mut senses = Vec::with_capacity(m);
    for (i, row) in p.rows().iter().enumerate() {
        let mut rhs = row.rhs;
        for &(j, v) in &row.coeffs {
            let sc = col_of[j];
            match kinds[j] {
                ColKind::Shift(l) => {
                    a[i][sc] += v;
                    rhs -= v * l;
                }
                ColKind::Mirror(u) => {
                    a[i][sc] -= v;
                    rhs -= v * u;
                }
                ColKind::Split(neg) => {
                    a[i][sc] += v;
                    a[i][neg] -= v;
                }
            }
        }
        b[i] = rhs;
        senses.push(row.sense);
    }
    for (k, &(sc, ub)) in ub_rows.iter().enumerate() {
        a[m0 + k][sc] = 1.0;
        b[m0 + k] = ub;
        senses.push(RowSense::Le);
    }

    // Normalize to b >= 0, remembering flips for dual signs.
    let mut flipped = vec![false; m];
    for i in 0..m {
        if b[i] < 0.0 {
            for v in &mut a[i] {
                *v = -*v;
            }
            b[i] = -b[i];
            flipped[i] = true;
            senses[i] = match senses[i] {
                RowSense::Le => RowSense::Ge,
                RowSense::Ge => RowSense::Le,
                RowSense::Eq => RowSense::Eq,
            };
        }
    }

    // Column layout: structural | slacks | artificials.
    let n_slack = senses.iter().filter(|s| **s != RowSense::Eq).count();
    let ncols = ns + n_slack + m;
    let art0 = ns + n_slack;
    let mut rows_t = vec![vec![0.0; ncols]; m];
    let mut basis = vec![0usize; m];
    let mut slack_idx = ns;
    for i in 0..m {
        rows_t[i][..ns].copy_from_slice(&a[i]);
        match senses[i] {
            RowSense::Le => {
                rows_t[i][slack_idx] = 1.0;
                basis[i] = slack_idx;
                slack_idx += 1;
            }
            RowSense::Ge => {
                rows_t[i][slack_idx] = -1.0;
                basis[i] = art0 + i;
                slack_idx += 1;
            }
            RowSense::Eq => {
                basis[i] = art0 + i;
            }
        }
        rows_t[i][art0 + i] = 1.0;
    }

    let mut t = Tableau {
        rows: rows_t,
        rhs: b,
        basis,
        obj: Vec::new(),
        obj_rhs: 0.0,
        ncols,
    };

    let max_iter = 10_000 + 50 * (m + ncols);
    let mut iters = 0usize;

    // Phase 1: minimize the sum of artificials.
    let mut phase1 = vec![0.0; ncols];
    for j in art0..ncols {
        phase1[j] = 1.0;
    }
    t.rebuild_objective(&phase1);
    loop {
        match t.bland_step(&|_| true) {
            StepResult::Optimal => break,
            StepResult::Pivoted => {
                iters += 1;
                if iters > max_iter {
                    return Err(Error::CyclingGuard(iters));
                }
            }
            StepResult::Unbounded => unreachable!("phase-1 objective is bounded below by 0"),
        }
    }
    let scale = 1.0 + t.rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if -t.obj_rhs > FEAS_TOL * scale {
        return Ok(LpSolution::not_optimal(SolveStatus::Infeasible));
    }

    // Drive zero-valued artificials out of the basis where possible;
    // rows where that fails are redundant and stay inert.
    for i in 0..m {
        if t.basis[i] >= art0 {
            if let Some(j) = (0..art0).find(|&j| t.rows[i][j].abs() > PIVOT_TOL) {
                t.pivot(i, j);
            }
        }
    }

    // Phase 2 over the real costs.
    let mut phase2 = vec![0.0; ncols];
    for j in 0..n {
        let c = p.objective_coeffs()[j];
        let sc = col_of[j];
        match kinds[j] {
            ColKind::Shift(_) => phase2[sc] += c,
            ColKind::Mirror(_) => phase2[sc] -= c,
            ColKind::Split(neg) => {
                phase2[sc] += c;
                phase2[neg] -= c;
            }
        }
    }
    t.rebuild_objective(&phase2);
    loop {
        match t.bland_step(&|j| j < art0) {
            StepResult::Optimal => break,
            StepResult::Pivoted => {
                iters += 1;
                if iters > max_iter {
                    return Err(Error::CyclingGuard(iters));
                }
            }
            StepResult::Unbounded => {
                return Ok(LpSolution::not_optimal(SolveStatus::Unbounded));
            }
        }
    }

    // Structural values, then map back to the original variable space.
    let mut xs = vec![0.0; ncols];
    for i in 0..m {
        xs[t.basis[i]] = t.rhs[i];
    }
    let mut primal = vec![0.0; n];
    for j in 0..n {
        let sc = col_of[j];
        primal[j] = match kinds[j] {
            ColKind::Shift(l) => l + xs[sc],
            ColKind::Mirror(u) => u - xs[sc],
            ColKind::Split(neg) => xs[sc] - xs[neg],
        };
    }

    // Duals sit under the artificial columns: obj[art_i] = -y_i.
    let mut duals = vec![0.0; m0];
    for i in 0..m0 {
        let y = -t.obj[art0 + i];
        duals[i] = if flipped[i] { -y } else { y };
    }
    let mut reduced = p.objective_coeffs().to_vec();
    for (i, row) in p.rows().iter().enumerate() {
        let y = duals[i];
        if y != 0.0 {
            for &(j, v) in &row.coeffs {
                reduced[j] -= v * y;
            }
        }
    }

    let objective = p.objective_value(&primal);
    Ok(LpSolution {
        status: SolveStatus::Optimal,
        primal,
        duals,
        reduced_costs: reduced,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{dual_objective, ColId};
    use approx::assert_relative_eq;

    fn toy(
        bounds: &[(f64, f64)],
        obj: &[f64],
        rows: &[(RowSense, f64, Vec<(usize, f64)>)],
    ) -> LpProblem {
        let mut p = LpProblem::new("toy");
        for (j, &(l, u)) in bounds.iter().enumerate() {
            p.add_col(format!("x{j}"), l, u, obj[j]).unwrap();
        }
        for (i, (sense, rhs, coeffs)) in rows.iter().enumerate() {
            let cols: Vec<(ColId, f64)> = coeffs.iter().map(|&(j, v)| (ColId(j), v)).collect();
            p.add_row(format!("r{i}"), *sense, *rhs, &cols).unwrap();
        }
        p
    }

    #[test]
    fn textbook_box() {
        // min -x-y s.t. x+y <= 1, x,y in [0,1] -> objective -1
        let p = toy(
            &[(0.0, 1.0), (0.0, 1.0)],
            &[-1.0, -1.0],
            &[(RowSense::Le, 1.0, vec![(0, 1.0), (1, 1.0)])],
        );
        let s = solve(&p).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_relative_eq!(s.objective, -1.0, max_relative = 1e-9);
        // Binding <= row in a minimization carries a nonpositive dual.
        assert!(s.duals[0] <= 1e-9);
        assert_relative_eq!(s.duals[0], -1.0, max_relative = 1e-9);
    }

    #[test]
    fn equality_dual_is_cost() {
        // min 30x s.t. x = 2 -> dual on the row = 30
        let p = toy(
            &[(0.0, f64::INFINITY)],
            &[30.0],
            &[(RowSense::Eq, 2.0, vec![(0, 1.0)])],
        );
        let s = solve(&p).unwrap();
        assert_relative_eq!(s.objective, 60.0, max_relative = 1e-9);
        assert_relative_eq!(s.duals[0], 30.0, max_relative = 1e-9);
    }

    #[test]
    fn min_x_ge_one() {
        let p = toy(
            &[(0.0, f64::INFINITY)],
            &[1.0],
            &[(RowSense::Ge, 1.0, vec![(0, 1.0)])],
        );
        let s = solve(&p).unwrap();
        assert_relative_eq!(s.objective, 1.0, max_relative = 1e-9);
        assert_relative_eq!(s.duals[0], 1.0, max_relative = 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        let p = toy(
            &[(0.0, 1.0)],
            &[1.0],
            &[(RowSense::Ge, 2.0, vec![(0, 1.0)])],
        );
        let s = solve(&p).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let p = toy(&[(0.0, f64::INFINITY)], &[-1.0], &[]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, SolveStatus::Unbounded);
    }

    #[test]
    fn free_variable_split() {
        // min x s.t. x >= -5 via row (x free) -> objective -5
        let p = toy(
            &[(f64::NEG_INFINITY, f64::INFINITY)],
            &[1.0],
            &[(RowSense::Ge, -5.0, vec![(0, 1.0)])],
        );
        let s = solve(&p).unwrap();
        assert_relative_eq!(s.objective, -5.0, max_relative = 1e-9);
    }

    #[test]
    fn mirror_variable() {
        // min -x, x <= 3, lower unbounded, plus row x >= 1 to stay feasible
        let p = toy(
            &[(f64::NEG_INFINITY, 3.0)],
            &[-1.0],
            &[(RowSense::Ge, 1.0, vec![(0, 1.0)])],
        );
        let s = solve(&p).unwrap();
        assert_relative_eq!(s.objective, -3.0, max_relative = 1e-9);
        assert_relative_eq!(s.primal[0], 3.0, max_relative = 1e-9);
    }

    #[test]
    fn strong_duality_on_small_instances() {
        let p = toy(
            &[(0.0, 4.0), (0.0, 4.0), (0.0, 4.0)],
            &[2.0, 3.0, 1.5],
            &[
                (RowSense::Ge, 5.0, vec![(0, 1.0), (1, 1.0), (2, 1.0)]),
                (RowSense::Le, 6.0, vec![(0, 2.0), (1, 1.0)]),
                (RowSense::Ge, 2.0, vec![(1, 1.0), (2, -1.0)]),
            ],
        );
        let s = solve(&p).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        let gap = (s.objective - dual_objective(&p, &s)).abs();
        assert!(gap <= 1e-8 * (1.0 + s.objective.abs()), "gap {gap}");
    }

    /// Brute-force vertex enumeration: every basis of n active constraints
    /// drawn from rows-at-equality and bounds. Independent of the simplex.
    fn enumerate_vertices(p: &LpProblem) -> Option<f64> {
        let n = p.num_cols();
        // Candidate active sets: (normal, rhs) pairs.
        let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
        for row in p.rows() {
            let mut normal = vec![0.0; n];
            for &(j, v) in &row.coeffs {
                normal[j] += v;
            }
            cons.push((normal, row.rhs));
        }
        for j in 0..n {
            let (l, u) = (p.lower_bounds()[j], p.upper_bounds()[j]);
            if l.is_finite() {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                cons.push((e, l));
            }
            if u.is_finite() {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                cons.push((e, u));
            }
        }
        let k = cons.len();
        let mut best: Option<f64> = None;
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            // Solve the n x n system for this subset.
            let mut mat: Vec<Vec<f64>> = idx.iter().map(|&i| cons[i].0.clone()).collect();
            let mut rhs: Vec<f64> = idx.iter().map(|&i| cons[i].1).collect();
            if let Some(x) = gauss_solve(&mut mat, &mut rhs) {
                if p.primal_infeasibility(&x) <= 1e-7 {
                    let v = p.objective_value(&x);
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
            // Next combination of size n out of k.
            let mut pos = n;
            loop {
                if pos == 0 {
                    return best;
                }
                pos -= 1;
                if idx[pos] + (n - pos) < k {
                    idx[pos] += 1;
                    for q in pos + 1..n {
                        idx[q] = idx[q - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn gauss_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
            if a[piv][col].abs() < 1e-10 {
                return None;
            }
            a.swap(col, piv);
            b.swap(col, piv);
            for i in 0..n {
                if i != col {
                    let f = a[i][col] / a[col][col];
                    for j in col..n {
                        a[i][j] -= f * a[col][j];
                    }
                    b[i] -= f * b[col];
                }
            }
        }
        Some((0..n).map(|i| b[i] / a[i][i]).collect())
    }

    #[test]
    fn matches_vertex_enumeration() {
        // A handful of <= 4 variable instances with assorted senses.
        let cases = vec![
            toy(
                &[(0.0, 10.0), (0.0, 10.0)],
                &[1.0, 2.0],
                &[
                    (RowSense::Ge, 3.0, vec![(0, 1.0), (1, 1.0)]),
                    (RowSense::Le, 8.0, vec![(0, 2.0), (1, 1.0)]),
                ],
            ),
            toy(
                &[(0.0, 5.0), (1.0, 4.0), (0.0, 2.0)],
                &[-1.0, 1.0, -0.5],
                &[
                    (RowSense::Le, 6.0, vec![(0, 1.0), (1, 1.0), (2, 1.0)]),
                    (RowSense::Ge, 2.0, vec![(0, 1.0), (2, -1.0)]),
                ],
            ),
            toy(
                &[(0.0, 3.0), (0.0, 3.0), (0.0, 3.0), (0.0, 3.0)],
                &[4.0, 1.0, 3.0, 2.0],
                &[
                    (RowSense::Ge, 4.0, vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)]),
                    (RowSense::Ge, 2.0, vec![(0, 1.0), (2, 1.0)]),
                    (RowSense::Le, 5.0, vec![(1, 1.0), (3, 2.0)]),
                ],
            ),
        ];
        for p in cases {
            let s = solve(&p).unwrap();
            assert_eq!(s.status, SolveStatus::Optimal);
            let brute = enumerate_vertices(&p).expect("bounded feasible case");
            assert_relative_eq!(s.objective, brute, max_relative = 1e-7);
        }
    }
}
