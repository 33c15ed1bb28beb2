//! Structured extraction of a solved central-planner LP.

use super::build::CentralPlannerModel;
use super::Setup;
use crate::error::{Error, Result};
use crate::lp::{ColId, LpSolution, SolveStatus};
use crate::series::HourlySeries;
use serde::Serialize;

fn series_of(sol: &LpSolution, cols: &[ColId]) -> HourlySeries {
    HourlySeries::new(cols.iter().map(|c| sol.primal[c.0]).collect())
}

fn sum_profiles(sol: &LpSolution, horizon: usize, per_profile: Vec<&Vec<ColId>>) -> HourlySeries {
    let mut out = vec![0.0; horizon];
    for cols in per_profile {
        for (h, c) in cols.iter().enumerate() {
            out[h] += sol.primal[c.0];
        }
    }
    HourlySeries::new(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct StorageCaps {
    pub name: String,
    pub energy_mwh: f64,
    pub power_in_mw: f64,
    pub power_out_mw: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HydrogenCaps {
    pub electrolyzer_mw: f64,
    pub compressor_mwh_per_h: f64,
    pub cavern_mwh: f64,
    pub reconversion_mw: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProsumerCaps {
    pub rooftop_mw: f64,
    pub battery_energy_mwh: f64,
    pub battery_power_in_mw: f64,
    pub battery_power_out_mw: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityReport {
    pub gen_mw: Vec<(String, f64)>,
    pub storage: Vec<StorageCaps>,
    pub hydrogen: Option<HydrogenCaps>,
    pub prosumer: Option<ProsumerCaps>,
}

impl CapacityReport {
    pub fn gen(&self, name: &str) -> Option<f64> {
        self.gen_mw.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn storage(&self, name: &str) -> Option<&StorageCaps> {
        self.storage.iter().find(|s| s.name == name)
    }

    /// Grid-coupled battery energy plus the prosumer home battery, MWh.
    pub fn total_battery_energy_mwh(&self) -> f64 {
        let utility: f64 = self.storage.iter().map(|s| s.energy_mwh).sum();
        utility + self.prosumer.as_ref().map_or(0.0, |p| p.battery_energy_mwh)
    }
}

#[derive(Debug, Clone)]
pub struct StorageFlows {
    pub charge: HourlySeries,
    pub discharge: HourlySeries,
    pub soc: HourlySeries,
}

/// Hourly behind-the-meter flows of the aggregate prosumer.
#[derive(Debug, Clone)]
pub struct ProsumerDispatch {
    pub rooftop_to_load: HourlySeries,
    pub rooftop_to_battery: HourlySeries,
    pub rooftop_to_ev: HourlySeries,
    pub rooftop_to_grid: HourlySeries,
    pub rooftop_curtailed: HourlySeries,
    /// Delivered home-battery discharge to the household (net of losses).
    pub battery_out_to_load: HourlySeries,
    pub battery_out_to_ev: HourlySeries,
    pub battery_soc: HourlySeries,
    pub ev_soc: HourlySeries,
    pub ev_charge_home_grid: HourlySeries,
    pub ev_charge_away_grid: HourlySeries,
    /// Total delivered V2H discharge.
    pub v2h_discharge: HourlySeries,
    /// Share of V2H drawn from the self-generated pool (loss accounting).
    pub v2h_from_self: HourlySeries,
    pub grid_imports: HourlySeries,
    /// Conversion losses of self-generated electricity, L_h.
    pub losses: HourlySeries,
    pub prosumer_load_total_mwh: f64,
    pub ev_driving_total_mwh: f64,
}

impl ProsumerDispatch {
    pub fn total_self_supply_mwh(&self) -> f64 {
        self.rooftop_to_load.sum() + self.battery_out_to_load.sum()
    }
}

#[derive(Debug, Clone)]
pub struct CpSolution {
    pub objective_eur: f64,
    pub status: SolveStatus,
    pub capacities: CapacityReport,
    pub gen_dispatch: Vec<(String, HourlySeries)>,
    pub storage_flows: Vec<(String, StorageFlows)>,
    pub prosumer: Option<ProsumerDispatch>,
    /// Duals of the hourly energy balance, EUR/MWh.
    pub wholesale_prices: HourlySeries,
}

/// Turn a raw LP solution into a structured central-planner result.
///
/// Non-optimal statuses surface as the matching typed error.
pub fn extract_solution(model: &CentralPlannerModel, raw: &LpSolution) -> Result<CpSolution> {
    raw.require_optimal()?;
    let idx = &model.index;
    let horizon = idx.horizon;
    let value = |c: ColId| raw.primal[c.0];

    let gen_mw = idx.gens.iter().map(|g| (g.name.clone(), value(g.cap))).collect();
    let storage_caps = idx
        .storages
        .iter()
        .map(|s| StorageCaps {
            name: s.name.clone(),
            energy_mwh: value(s.cap_energy),
            power_in_mw: value(s.cap_power_in),
            power_out_mw: value(s.cap_power_out),
        })
        .collect();
    let hydrogen = idx.hydrogen.as_ref().map(|h| HydrogenCaps {
        electrolyzer_mw: value(h.cap_electrolyzer),
        compressor_mwh_per_h: value(h.cap_compressor),
        cavern_mwh: value(h.cap_cavern),
        reconversion_mw: value(h.cap_reconversion),
    });

    let prosumer = idx.prosumer.as_ref().map(|pv| {
        let meta = idx.prosumer_meta.as_ref().unwrap();
        let pv2l = series_of(raw, &pv.pv_to_load);
        let pv2b = series_of(raw, &pv.pv_to_battery);
        let hb2l = series_of(raw, &pv.battery_to_load);

        let collect = |pick: fn(&super::build::BevProfileVars) -> Option<&Vec<ColId>>| {
            sum_profiles(raw, horizon, idx.bev.iter().filter_map(pick).collect())
        };
        let pv2ev = collect(|b| b.charge_pv.as_ref());
        let hb2ev = collect(|b| b.charge_battery.as_ref());
        let v2h_self = collect(|b| b.v2h_self.as_ref());
        let v2h_grid = collect(|b| b.v2h_grid.as_ref());
        let ev_home = sum_profiles(
            raw,
            horizon,
            idx.bev.iter().map(|b| &b.charge_home_grid).collect(),
        );
        let ev_away = sum_profiles(
            raw,
            horizon,
            idx.bev.iter().map(|b| &b.charge_away_grid).collect(),
        );
        let mut ev_soc = sum_profiles(raw, horizon, idx.bev.iter().map(|b| &b.soc_grid).collect());
        let soc_self = collect(|b| b.soc_self.as_ref());
        ev_soc = HourlySeries::new(
            ev_soc
                .iter()
                .zip(soc_self.iter())
                .map(|(g, s)| g + s)
                .collect(),
        );

        let hb_cl = 1.0 - meta.hb_eta_charge;
        let hb_dl = 1.0 / meta.hb_eta_discharge - 1.0;
        let ev_cl = 1.0 - meta.ev_eta_charge;
        let ev_dl = 1.0 / meta.ev_eta_discharge - 1.0;
        let losses: Vec<f64> = (0..horizon)
            .map(|h| {
                hb_cl * pv2b[h]
                    + hb_dl * (hb2l[h] + hb2ev[h])
                    + ev_cl * (pv2ev[h] + hb2ev[h])
                    + ev_dl * v2h_self[h]
            })
            .collect();

        let v2h_total =
            HourlySeries::new(v2h_self.iter().zip(v2h_grid.iter()).map(|(a, b)| a + b).collect());
        ProsumerDispatch {
            rooftop_to_load: pv2l,
            rooftop_to_battery: pv2b,
            rooftop_to_ev: pv2ev,
            rooftop_to_grid: series_of(raw, &pv.pv_to_grid),
            rooftop_curtailed: series_of(raw, &pv.pv_curtailed),
            battery_out_to_load: hb2l,
            battery_out_to_ev: hb2ev,
            battery_soc: series_of(raw, &pv.battery_soc),
            ev_soc,
            ev_charge_home_grid: ev_home,
            ev_charge_away_grid: ev_away,
            v2h_discharge: v2h_total,
            v2h_from_self: v2h_self,
            grid_imports: series_of(raw, &pv.grid_imports),
            losses: HourlySeries::new(losses),
            prosumer_load_total_mwh: meta.prosumer_load_total_mwh,
            ev_driving_total_mwh: meta.ev_driving_total_mwh,
        }
    });

    let prosumer_caps = idx.prosumer.as_ref().map(|pv| ProsumerCaps {
        rooftop_mw: value(pv.cap_rooftop),
        battery_energy_mwh: value(pv.cap_battery_energy),
        battery_power_in_mw: value(pv.cap_battery_power_in),
        battery_power_out_mw: value(pv.cap_battery_power_out),
    });

    let wholesale =
        HourlySeries::new(idx.balance_rows.iter().map(|r| raw.duals[r.0]).collect());

    Ok(CpSolution {
        objective_eur: raw.objective,
        status: raw.status,
        capacities: CapacityReport {
            gen_mw,
            storage: storage_caps,
            hydrogen,
            prosumer: prosumer_caps,
        },
        gen_dispatch: idx
            .gens
            .iter()
            .map(|g| (g.name.clone(), series_of(raw, &g.dispatch)))
            .collect(),
        storage_flows: idx
            .storages
            .iter()
            .map(|s| {
                (
                    s.name.clone(),
                    StorageFlows {
                        charge: series_of(raw, &s.charge),
                        discharge: series_of(raw, &s.discharge),
                        soc: series_of(raw, &s.soc),
                    },
                )
            })
            .collect(),
        prosumer,
        wholesale_prices: wholesale,
    })
}

/// Realized self-generation rate: constraint LHS over RHS demand.
pub fn realized_self_generation_rate(p: &ProsumerDispatch, setup: Setup) -> Result<f64> {
    match setup {
        Setup::NoBevs => self_generation_rate_from_totals(
            p.rooftop_to_load.sum(),
            p.battery_out_to_load.sum(),
            0.0,
            0.0,
            p.prosumer_load_total_mwh,
            0.0,
            Setup::NoBevs,
        ),
        Setup::WithBevs => self_generation_rate_from_totals(
            p.rooftop_to_load.sum(),
            p.battery_out_to_load.sum(),
            p.rooftop_to_ev.sum(),
            p.losses.sum(),
            p.prosumer_load_total_mwh,
            p.ev_driving_total_mwh,
            Setup::WithBevs,
        ),
    }
}

/// Rate arithmetic on aggregate totals (MWh).
pub fn self_generation_rate_from_totals(
    rooftop_to_load: f64,
    battery_out: f64,
    rooftop_to_ev: f64,
    losses: f64,
    prosumer_load: f64,
    ev_driving: f64,
    setup: Setup,
) -> Result<f64> {
    let (lhs, rhs) = match setup {
        Setup::NoBevs => (rooftop_to_load + battery_out, prosumer_load),
        Setup::WithBevs => (
            rooftop_to_load + battery_out + rooftop_to_ev - losses,
            prosumer_load + ev_driving,
        ),
    };
    if rhs <= 0.0 {
        return Err(Error::UndefinedRate);
    }
    Ok(lhs / rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rate_no_bevs() {
        let r = self_generation_rate_from_totals(2.0, 1.0, 0.0, 0.0, 5.0, 0.0, Setup::NoBevs)
            .unwrap();
        assert_relative_eq!(r, 0.6);
    }

    #[test]
    fn rate_zero_dispatch() {
        let r = self_generation_rate_from_totals(0.0, 0.0, 0.0, 0.0, 5.0, 0.0, Setup::NoBevs)
            .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn rate_with_bevs() {
        let r = self_generation_rate_from_totals(2.0, 1.0, 1.0, 0.5, 5.0, 1.0, Setup::WithBevs)
            .unwrap();
        assert_relative_eq!(r, 3.5 / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn rate_undefined_without_load() {
        assert!(matches!(
            self_generation_rate_from_totals(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, Setup::NoBevs),
            Err(Error::UndefinedRate)
        ));
    }
}
