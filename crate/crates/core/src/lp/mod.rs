//! Standard-form linear programs: representation, MPS export, a dense
//! simplex oracle and pluggable solver backends.

pub mod backend;
pub mod mps;
pub mod simplex;

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Index of a column (variable) in an [`LpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ColId(pub usize);

/// Index of a constraint row in an [`LpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub sense: RowSense,
    pub rhs: f64,
    /// Sparse coefficients, column index -> value. Kept in insertion order.
    pub coeffs: Vec<(usize, f64)>,
}

impl Row {
    /// Row activity a'x for a primal vector.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// A minimization LP with named variables, bounds and sparse rows.
///
/// Immutable once built and handed to a solver; building is purely
/// sequential so column and row ordering is deterministic.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub name: String,
    col_names: Vec<String>,
    col_lower: Vec<f64>,
    col_upper: Vec<f64>,
    objective: Vec<f64>,
    rows: Vec<Row>,
    col_index: HashMap<String, usize>,
    row_index: HashMap<String, usize>,
}

impl LpProblem {
    pub fn new(name: impl Into<String>) -> Self {
        LpProblem {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn num_cols(&self) -> usize {
        self.col_names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_col(&mut self, name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> Result<ColId> {
        let name = name.into();
        if lower > upper {
            return Err(Error::BoundsOrder { name, lower, upper });
        }
        if self.col_index.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let id = self.col_names.len();
        self.col_index.insert(name.clone(), id);
        self.col_names.push(name);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.objective.push(obj);
        Ok(ColId(id))
    }

    /// Add a row with an initial (possibly empty) coefficient list.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: RowSense,
        rhs: f64,
        coeffs: &[(ColId, f64)],
    ) -> Result<RowId> {
        let name = name.into();
        if self.row_index.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let id = self.rows.len();
        self.row_index.insert(name.clone(), id);
        self.rows.push(Row {
            name,
            sense,
            rhs,
            coeffs: coeffs.iter().map(|&(c, v)| (c.0, v)).collect(),
        });
        Ok(RowId(id))
    }

    /// Accumulate a coefficient onto an existing row (repeated terms add up).
    pub fn add_term(&mut self, row: RowId, col: ColId, value: f64) {
        if value == 0.0 {
            return;
        }
        let coeffs = &mut self.rows[row.0].coeffs;
        if let Some(slot) = coeffs.iter_mut().find(|(j, _)| *j == col.0) {
            slot.1 += value;
        } else {
            coeffs.push((col.0, value));
        }
    }

    pub fn set_objective(&mut self, col: ColId, value: f64) {
        self.objective[col.0] = value;
    }

    pub fn add_objective(&mut self, col: ColId, value: f64) {
        self.objective[col.0] += value;
    }

    pub fn col_name(&self, col: ColId) -> &str {
        &self.col_names[col.0]
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn col_by_name(&self, name: &str) -> Option<ColId> {
        self.col_index.get(name).copied().map(ColId)
    }

    pub fn row_by_name(&self, name: &str) -> Option<RowId> {
        self.row_index.get(name).copied().map(RowId)
    }

    pub fn bounds(&self, col: ColId) -> (f64, f64) {
        (self.col_lower[col.0], self.col_upper[col.0])
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.col_lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.col_upper
    }

    pub fn objective_coeffs(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_coeff(&self, col: ColId) -> f64 {
        self.objective[col.0]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub(crate) fn rows_mut(&mut self) -> &mut Vec<Row> {
        &mut self.rows
    }

    pub(crate) fn set_bounds_unchecked(&mut self, col: usize, lower: f64, upper: f64) {
        self.col_lower[col] = lower;
        self.col_upper[col] = upper;
    }

    pub fn row(&self, id: RowId) -> &Row {
        &self.rows[id.0]
    }

    /// Objective value c'x of a primal vector.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest primal feasibility violation (rows and bounds) of `x`.
    pub fn primal_infeasibility(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.col_lower[j] - v).max(v - self.col_upper[j]);
        }
        for row in &self.rows {
            let a = row.activity(x);
            let viol = match row.sense {
                RowSense::Le => a - row.rhs,
                RowSense::Ge => row.rhs - a,
                RowSense::Eq => (a - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration or time limit hit before convergence.
    Limit,
}

/// Primal/dual solution of an [`LpProblem`].
///
/// Dual sign convention: `duals[i]` is the marginal change of the optimal
/// objective per unit increase of row i's right-hand side (so >= rows carry
/// nonnegative duals and <= rows nonpositive duals in a minimization).
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    pub fn not_optimal(status: SolveStatus) -> Self {
        LpSolution {
            status,
            primal: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: f64::NAN,
        }
    }

    /// Map a non-optimal status onto the matching typed error.
    pub fn require_optimal(&self) -> Result<()> {
        match self.status {
            SolveStatus::Optimal => Ok(()),
            SolveStatus::Infeasible => Err(Error::Infeasible),
            SolveStatus::Unbounded => Err(Error::Unbounded),
            SolveStatus::Limit => Err(Error::SolverLimit),
        }
    }
}

/// Dual objective b'y plus bound terms, for the strong-duality check.
///
/// With reduced costs d = c - A'y, finite lower bounds contribute
/// l_j * max(d_j, 0) and finite upper bounds u_j * min(d_j, 0).
pub fn dual_objective(p: &LpProblem, sol: &LpSolution) -> f64 {
    let mut v: f64 = p
        .rows()
        .iter()
        .zip(&sol.duals)
        .map(|(row, y)| row.rhs * y)
        .sum();
    for j in 0..p.num_cols() {
        let d = sol.reduced_costs[j];
        let l = p.lower_bounds()[j];
        let u = p.upper_bounds()[j];
        if d > 0.0 && l.is_finite() {
            v += l * d;
        } else if d < 0.0 && u.is_finite() {
            v += u * d;
        }
    }
    v
}

/// |primal objective - dual objective| scaled by 1 + |primal objective|.
pub fn duality_gap(p: &LpProblem, sol: &LpSolution) -> f64 {
    (sol.objective - dual_objective(p, sol)).abs() / (1.0 + sol.objective.abs())
}

/// Worst complementary-slackness product slack_i * y_i over all rows.
pub fn complementary_slackness(p: &LpProblem, sol: &LpSolution) -> f64 {
    p.rows()
        .iter()
        .zip(&sol.duals)
        .map(|(row, y)| {
            let slack = row.rhs - row.activity(&sol.primal);
            (slack * y).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_column_rejected() {
        let mut p = LpProblem::new("t");
        p.add_col("x", 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            p.add_col("x", 0.0, 1.0, 1.0),
            Err(Error::DuplicateName(_))
        ));
    }

    #[test]
    fn bad_bounds_rejected() {
        let mut p = LpProblem::new("t");
        assert!(matches!(
            p.add_col("x", 2.0, 1.0, 0.0),
            Err(Error::BoundsOrder { .. })
        ));
    }

    #[test]
    fn terms_accumulate() {
        let mut p = LpProblem::new("t");
        let x = p.add_col("x", 0.0, f64::INFINITY, 1.0).unwrap();
        let r = p.add_row("r", RowSense::Le, 4.0, &[]).unwrap();
        p.add_term(r, x, 1.0);
        p.add_term(r, x, 2.0);
        assert_eq!(p.row(r).coeffs, vec![(0, 3.0)]);
    }
}
