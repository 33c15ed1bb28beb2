//! Pluggable solver backends behind a load / solve / fetch adapter contract.

use super::{simplex, LpProblem, LpSolution, RowSense, SolveStatus};
use crate::error::{Error, Result};
use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus,
    SupportedConeT::{NonnegativeConeT, ZeroConeT},
};

/// Environment variable naming the default backend.
pub const BACKEND_ENV: &str = "PROSUMAGE_BACKEND";

pub const DEFAULT_BACKEND: &str = "clarabel";

/// Default size cap for the dense simplex oracle.
pub const SIMPLEX_CAP: usize = 500;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Feasibility / optimality-gap tolerance passed to the backend.
    pub tolerance: f64,
    pub time_limit_secs: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-8,
            time_limit_secs: None,
        }
    }
}

/// The per-solve adapter contract: load a problem, solve it, fetch results.
///
/// Adapters are cheap to construct and single-use by convention; concurrent
/// solves each build their own instance via [`make_adapter`].
pub trait SolverAdapter {
    fn backend_id(&self) -> &'static str;
    fn load(&mut self, problem: &LpProblem) -> Result<()>;
    fn solve(&mut self, options: &SolveOptions) -> Result<()>;
    fn fetch(&self) -> Result<LpSolution>;
}

/// Construct a named adapter: `clarabel` (default) or `simplex` (oracle).
pub fn make_adapter(name: &str) -> Result<Box<dyn SolverAdapter>> {
    match name {
        "clarabel" => Ok(Box::new(ClarabelAdapter::default())),
        "simplex" => Ok(Box::new(SimplexAdapter::new(SIMPLEX_CAP))),
        other => Err(Error::Backend {
            backend: other.to_string(),
            msg: "unknown backend (available: clarabel, simplex)".into(),
        }),
    }
}

/// Backend chosen by `PROSUMAGE_BACKEND`, falling back to clarabel.
pub fn default_backend_name() -> String {
    std::env::var(BACKEND_ENV).unwrap_or_else(|_| DEFAULT_BACKEND.to_string())
}

/// One-shot convenience over the adapter contract.
pub fn solve_with(backend: &str, problem: &LpProblem, options: &SolveOptions) -> Result<LpSolution> {
    let mut adapter = make_adapter(backend)?;
    adapter.load(problem)?;
    adapter.solve(options)?;
    adapter.fetch()
}

// ---------------------------------------------------------------------------
// Built-in simplex oracle behind the adapter contract.
// ---------------------------------------------------------------------------

pub struct SimplexAdapter {
    cap: usize,
    problem: Option<LpProblem>,
    solution: Option<LpSolution>,
}

impl SimplexAdapter {
    pub fn new(cap: usize) -> Self {
        SimplexAdapter {
            cap,
            problem: None,
            solution: None,
        }
    }
}

impl SolverAdapter for SimplexAdapter {
    fn backend_id(&self) -> &'static str {
        "simplex"
    }

    fn load(&mut self, problem: &LpProblem) -> Result<()> {
        if problem.num_cols() > self.cap {
            return Err(Error::DimensionCap {
                vars: problem.num_cols(),
                cap: self.cap,
            });
        }
        self.problem = Some(problem.clone());
        self.solution = None;
        Ok(())
    }

    fn solve(&mut self, _options: &SolveOptions) -> Result<()> {
        let p = self
            .problem
            .as_ref()
            .ok_or_else(|| backend_err("simplex", "solve() before load()"))?;
        self.solution = Some(simplex::solve(p)?);
        Ok(())
    }

    fn fetch(&self) -> Result<LpSolution> {
        self.solution
            .clone()
            .ok_or_else(|| backend_err("simplex", "fetch() before solve()"))
    }
}

// ---------------------------------------------------------------------------
// Clarabel (interior point) backend.
// ---------------------------------------------------------------------------

#[derive(Default)]
pub struct ClarabelAdapter {
    problem: Option<LpProblem>,
    solution: Option<LpSolution>,
}

impl SolverAdapter for ClarabelAdapter {
    fn backend_id(&self) -> &'static str {
        "clarabel"
    }

    fn load(&mut self, problem: &LpProblem) -> Result<()> {
        self.problem = Some(problem.clone());
        self.solution = None;
        Ok(())
    }

    fn solve(&mut self, options: &SolveOptions) -> Result<()> {
        let p = self
            .problem
            .as_ref()
            .ok_or_else(|| backend_err("clarabel", "solve() before load()"))?;
        self.solution = Some(solve_clarabel(p, options)?);
        Ok(())
    }

    fn fetch(&self) -> Result<LpSolution> {
        self.solution
            .clone()
            .ok_or_else(|| backend_err("clarabel", "fetch() before solve()"))
    }
}

fn backend_err(backend: &str, msg: impl Into<String>) -> Error {
    Error::Backend {
        backend: backend.to_string(),
        msg: msg.into(),
    }
}

fn solve_clarabel(p: &LpProblem, options: &SolveOptions) -> Result<LpSolution> {
    let n = p.num_cols();
    if n == 0 {
        // Degenerate: feasibility of constant rows decides the status.
        let feasible = p.rows().iter().all(|r| match r.sense {
            RowSense::Le => 0.0 <= r.rhs + 1e-12,
            RowSense::Ge => 0.0 >= r.rhs - 1e-12,
            RowSense::Eq => r.rhs.abs() <= 1e-12,
        });
        return Ok(if feasible {
            LpSolution {
                status: SolveStatus::Optimal,
                primal: Vec::new(),
                duals: vec![0.0; p.num_rows()],
                reduced_costs: Vec::new(),
                objective: 0.0,
            }
        } else {
            LpSolution::not_optimal(SolveStatus::Infeasible)
        });
    }

    // Encoded rows: equalities first (zero cone), then inequalities and
    // finite bounds (nonnegative cone). `Ge` rows are negated into `Le`.
    struct Enc {
        coeffs: Vec<(usize, f64)>,
        rhs: f64,
        orig: Option<(usize, bool)>, // (row index, negated)
    }
    let mut eq_rows: Vec<Enc> = Vec::new();
    let mut ineq_rows: Vec<Enc> = Vec::new();
    for (i, row) in p.rows().iter().enumerate() {
        match row.sense {
            RowSense::Eq => eq_rows.push(Enc {
                coeffs: row.coeffs.clone(),
                rhs: row.rhs,
                orig: Some((i, false)),
            }),
            RowSense::Le => ineq_rows.push(Enc {
                coeffs: row.coeffs.clone(),
                rhs: row.rhs,
                orig: Some((i, false)),
            }),
            RowSense::Ge => ineq_rows.push(Enc {
                coeffs: row.coeffs.iter().map(|&(j, v)| (j, -v)).collect(),
                rhs: -row.rhs,
                orig: Some((i, true)),
            }),
        }
    }
    for j in 0..n {
        let (l, u) = (p.lower_bounds()[j], p.upper_bounds()[j]);
        if u.is_finite() {
            ineq_rows.push(Enc {
                coeffs: vec![(j, 1.0)],
                rhs: u,
                orig: None,
            });
        }
        if l.is_finite() {
            ineq_rows.push(Enc {
                coeffs: vec![(j, -1.0)],
                rhs: -l,
                orig: None,
            });
        }
    }

    let n_eq = eq_rows.len();
    let n_ineq = ineq_rows.len();
    let m = n_eq + n_ineq;
    if m == 0 {
        // No constraints at all: optimal iff the objective is identically zero.
        return Ok(if p.objective_coeffs().iter().all(|&c| c == 0.0) {
            LpSolution {
                status: SolveStatus::Optimal,
                primal: vec![0.0; n],
                duals: Vec::new(),
                reduced_costs: vec![0.0; n],
                objective: 0.0,
            }
        } else {
            LpSolution::not_optimal(SolveStatus::Unbounded)
        });
    }

    // Triplets -> CSC.
    let all = eq_rows.iter().chain(ineq_rows.iter());
    let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut b = Vec::with_capacity(m);
    for (r, enc) in all.enumerate() {
        for &(j, v) in &enc.coeffs {
            per_col[j].push((r, v));
        }
        b.push(enc.rhs);
    }
    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for col in &mut per_col {
        col.sort_by_key(|&(r, _)| r);
        for &(r, v) in col.iter() {
            rowval.push(r);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(m, n, colptr, rowval, nzval);
    let quad = CscMatrix::zeros((n, n));
    let q = p.objective_coeffs().to_vec();
    let mut cones = Vec::new();
    if n_eq > 0 {
        cones.push(ZeroConeT(n_eq));
    }
    if n_ineq > 0 {
        cones.push(NonnegativeConeT(n_ineq));
    }

    let mut builder = DefaultSettingsBuilder::default();
    builder
        .verbose(false)
        .tol_gap_abs(options.tolerance)
        .tol_gap_rel(options.tolerance)
        .tol_feas(options.tolerance);
    if let Some(t) = options.time_limit_secs {
        builder.time_limit(t);
    }
    let settings = builder
        .build()
        .map_err(|e| backend_err("clarabel", format!("settings: {e}")))?;
    let mut solver = DefaultSolver::new(&quad, &q, &a, &b, &cones, settings)
        .map_err(|e| backend_err("clarabel", format!("{e:?}")))?;
    solver.solve();

    let status = match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => SolveStatus::Limit,
        other => {
            return Err(backend_err("clarabel", format!("solver status {other:?}")));
        }
    };
    if status != SolveStatus::Optimal {
        return Ok(LpSolution::not_optimal(status));
    }

    let x = solver.solution.x.clone();
    // Map cone duals back to signed row duals: for `a.x <= b` rows the
    // marginal cost of rhs is -z; negated (>=) rows flip back to +z.
    let mut duals = vec![0.0; p.num_rows()];
    for (r, enc) in eq_rows.iter().chain(ineq_rows.iter()).enumerate() {
        if let Some((orig, negated)) = enc.orig {
            let z = solver.solution.z[r];
            duals[orig] = if negated { z } else { -z };
        }
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
    let objective = p.objective_value(&x);
    Ok(LpSolution {
        status,
        primal: x,
        duals,
        reduced_costs: reduced,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{duality_gap, ColId};
    use approx::assert_relative_eq;

    fn simple_problem() -> LpProblem {
        let mut p = LpProblem::new("t");
        let x = p.add_col("x", 0.0, 1.0, -1.0).unwrap();
        let y = p.add_col("y", 0.0, 1.0, -1.0).unwrap();
        p.add_row("cap", RowSense::Le, 1.0, &[(x, 1.0), (y, 1.0)])
            .unwrap();
        p
    }

    #[test]
    fn clarabel_textbook() {
        let s = solve_with("clarabel", &simple_problem(), &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_relative_eq!(s.objective, -1.0, max_relative = 1e-6);
    }

    #[test]
    fn clarabel_equality_dual() {
        let mut p = LpProblem::new("t");
        let x = p.add_col("x", 0.0, f64::INFINITY, 30.0).unwrap();
        p.add_row("fix", RowSense::Eq, 2.0, &[(x, 1.0)]).unwrap();
        let s = solve_with("clarabel", &p, &SolveOptions::default()).unwrap();
        assert_relative_eq!(s.duals[0], 30.0, max_relative = 1e-6);
        assert!(duality_gap(&p, &s) < 1e-6);
    }

    #[test]
    fn clarabel_infeasible() {
        let mut p = LpProblem::new("t");
        let x = p.add_col("x", 0.0, 1.0, 1.0).unwrap();
        p.add_row("too_much", RowSense::Ge, 2.0, &[(x, 1.0)]).unwrap();
        let s = solve_with("clarabel", &p, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn clarabel_unbounded() {
        let mut p = LpProblem::new("t");
        p.add_col("x", 0.0, f64::INFINITY, -1.0).unwrap();
        let s = solve_with("clarabel", &p, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Unbounded);
    }

    #[test]
    fn simplex_cap_enforced() {
        let mut p = LpProblem::new("big");
        for j in 0..(SIMPLEX_CAP + 1) {
            p.add_col(format!("x{j}"), 0.0, 1.0, 1.0).unwrap();
        }
        let mut a = make_adapter("simplex").unwrap();
        assert!(matches!(a.load(&p), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn unknown_backend_rejected() {
        assert!(make_adapter("gurobi").is_err());
    }

    #[test]
    fn backends_agree_on_small_problem() {
        let p = simple_problem();
        let a = solve_with("clarabel", &p, &SolveOptions::default()).unwrap();
        let b = solve_with("simplex", &p, &SolveOptions::default()).unwrap();
        assert_relative_eq!(a.objective, b.objective, max_relative = 1e-6);
        let _ = ColId(0);
    }
}
