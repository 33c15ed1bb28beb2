//! Post-solve invariant checks and structural checks on the LP matrix.

use super::build::CentralPlannerModel;
use crate::lp::{LpSolution, SolveStatus};
use std::collections::HashSet;

const REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub violations: Vec<String>,
    pub max_balance_residual_mwh: f64,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check energy balances, prosumer balance, SOC bounds and general primal
/// feasibility of a solved model.
pub fn verify_solution(model: &CentralPlannerModel, raw: &LpSolution) -> VerifyReport {
    let mut violations = Vec::new();
    let mut max_balance = 0.0f64;
    if raw.status != SolveStatus::Optimal {
        violations.push(format!("solution status is {:?}, not optimal", raw.status));
        return VerifyReport {
            violations,
            max_balance_residual_mwh: f64::NAN,
        };
    }
    let p = &model.problem;
    let idx = &model.index;
    let x = &raw.primal;

    // Hourly demand scale: fixed demand plus endogenous demand-side flows.
    let mut max_demand = 0.0f64;
    for (h, &bal) in idx.balance_rows.iter().enumerate() {
        let mut demand = p.row(bal).rhs;
        for s in &idx.storages {
            demand += x[s.charge[h].0];
        }
        if let Some(h2) = &idx.hydrogen {
            demand += x[h2.electrolyzer_in[h].0];
        }
        if let Some(pv) = &idx.prosumer {
            demand += x[pv.grid_imports[h].0];
        }
        for b in &idx.bev {
            demand += x[b.charge_home_grid[h].0] + x[b.charge_away_grid[h].0];
        }
        max_demand = max_demand.max(demand);
    }
    let balance_tol = REL_TOL * max_demand.max(1.0);

    for &bal in &idx.balance_rows {
        let row = p.row(bal);
        let residual = (row.activity(x) - row.rhs).abs();
        max_balance = max_balance.max(residual);
        if residual > balance_tol {
            violations.push(format!(
                "grid balance {} residual {residual:.3e} exceeds {balance_tol:.3e}",
                row.name
            ));
        }
    }

    for &pb in &idx.prosumer_balance_rows {
        let row = p.row(pb);
        let residual = (row.activity(x) - row.rhs).abs();
        if residual > REL_TOL * row.rhs.abs().max(1.0) {
            violations.push(format!(
                "prosumer balance {} residual {residual:.3e}",
                row.name
            ));
        }
    }

    // SOC within the built energy capacity, hour by hour.
    for s in &idx.storages {
        let cap = x[s.cap_energy.0];
        for (h, soc) in s.soc.iter().enumerate() {
            let v = x[soc.0];
            if v < -balance_tol || v > cap + balance_tol {
                violations.push(format!(
                    "storage {} SOC out of [0, {cap:.6}] at hour {h}: {v:.6}",
                    s.name
                ));
            }
        }
    }
    if let Some(pv) = &idx.prosumer {
        let cap = x[pv.cap_battery_energy.0];
        for (h, soc) in pv.battery_soc.iter().enumerate() {
            let v = x[soc.0];
            if v < -balance_tol || v > cap + balance_tol {
                violations.push(format!(
                    "home battery SOC out of [0, {cap:.6}] at hour {h}: {v:.6}"
                ));
            }
        }
    }

    // Everything else (cyclic closure, BEV pools, bound constraints) is a
    // row or bound of the LP itself.
    let infeas = p.primal_infeasibility(x);
    if infeas > balance_tol {
        violations.push(format!(
            "primal infeasibility {infeas:.3e} exceeds {balance_tol:.3e}"
        ));
    }

    VerifyReport {
        violations,
        max_balance_residual_mwh: max_balance,
    }
}

/// Structural checks on the constraint matrix, independent of any solution:
/// the home battery never touches the grid, BEVs never discharge to the grid
/// or into the home battery, and behind-the-meter flows only reach the grid
/// balance through the metered import/export columns.
pub fn structural_report(model: &CentralPlannerModel) -> Vec<String> {
    let mut violations = Vec::new();
    let p = &model.problem;
    let idx = &model.index;
    let Some(pv) = &idx.prosumer else {
        return violations;
    };

    // Columns that must never appear in a grid balance row.
    let mut behind_meter: HashSet<usize> = HashSet::new();
    for cols in [
        &pv.pv_to_load,
        &pv.pv_to_battery,
        &pv.pv_curtailed,
        &pv.battery_to_load,
        &pv.battery_soc,
    ] {
        behind_meter.extend(cols.iter().map(|c| c.0));
    }
    for b in &idx.bev {
        for cols in [
            b.charge_pv.as_ref(),
            b.charge_battery.as_ref(),
            b.v2h_self.as_ref(),
            b.v2h_grid.as_ref(),
            b.soc_self.as_ref(),
            b.drive_self.as_ref(),
            b.drive_grid.as_ref(),
        ]
        .into_iter()
        .flatten()
        {
            behind_meter.extend(cols.iter().map(|c| c.0));
        }
        behind_meter.extend(b.soc_grid.iter().map(|c| c.0));
    }
    for &bal in &idx.balance_rows {
        for &(j, _) in &p.row(bal).coeffs {
            if behind_meter.contains(&j) {
                violations.push(format!(
                    "behind-the-meter column `{}` appears in grid balance `{}`",
                    p.col_names()[j],
                    p.row(bal).name
                ));
            }
        }
    }

    // Home battery state rows may only reference its own SOC, PV charging
    // and discharge to household or BEV; grid or EV inflows would show up
    // as extra columns here.
    let mut hb_allowed: HashSet<usize> = HashSet::new();
    for cols in [&pv.battery_soc, &pv.pv_to_battery, &pv.battery_to_load] {
        hb_allowed.extend(cols.iter().map(|c| c.0));
    }
    for b in &idx.bev {
        if let Some(cols) = &b.charge_battery {
            hb_allowed.extend(cols.iter().map(|c| c.0));
        }
    }
    for &row in &pv.battery_dyn_rows {
        for &(j, v) in &p.row(row).coeffs {
            if !hb_allowed.contains(&j) {
                violations.push(format!(
                    "unexpected column `{}` (coeff {v}) in home battery state row `{}`",
                    p.col_names()[j],
                    p.row(row).name
                ));
            }
        }
    }

    // BEV discharge reaches only the prosumer balance: V2H columns must not
    // appear in any home-battery state row (that would be EV-to-battery).
    let mut v2h: HashSet<usize> = HashSet::new();
    for b in &idx.bev {
        for cols in [b.v2h_self.as_ref(), b.v2h_grid.as_ref()].into_iter().flatten() {
            v2h.extend(cols.iter().map(|c| c.0));
        }
    }
    for &row in &pv.battery_dyn_rows {
        for &(j, _) in &p.row(row).coeffs {
            if v2h.contains(&j) {
                violations.push(format!(
                    "V2H column `{}` feeds the home battery in `{}`",
                    p.col_names()[j],
                    p.row(row).name
                ));
            }
        }
    }
    violations
}
