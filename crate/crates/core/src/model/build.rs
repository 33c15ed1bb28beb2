//! Assembly of the central-planner LP.
//!
//! Hourly grid balance, generation and storage capacity/dispatch, the
//! hydrogen chain, BEV fleet state dynamics, and the behind-the-meter
//! prosumer block tied together by the self-generation constraint.
//!
//! Flow topology of the prosumer block: rooftop generation splits into
//! direct consumption, home-battery charge, BEV charge, grid feed-in and
//! curtailment. The home battery charges from rooftop PV only and discharges
//! to the household or the BEV; it never touches the grid. The BEV charges
//! from the grid (home or away), from rooftop PV or from the home battery,
//! and discharges only to the household (V2H). The BEV battery is tracked as
//! two pools (self-generated vs grid energy) so conversion losses of
//! self-generated electricity are attributable by source.

use super::{
    BevFleetSpec, DemandBundle, GenTechSpec, HydrogenChainSpec, ScenarioConfig, Setup,
    StorageTechSpec,
};
use crate::error::{Error, Result};
use crate::lp::{ColId, LpProblem, RowId, RowSense};

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone)]
pub struct GenVars {
    pub name: String,
    pub cap: ColId,
    pub dispatch: Vec<ColId>,
}

#[derive(Debug, Clone)]
pub struct StorageVars {
    pub name: String,
    pub cap_energy: ColId,
    pub cap_power_in: ColId,
    pub cap_power_out: ColId,
    pub charge: Vec<ColId>,
    pub discharge: Vec<ColId>,
    pub soc: Vec<ColId>,
    pub spill: Option<Vec<ColId>>,
}

#[derive(Debug, Clone)]
pub struct HydrogenVars {
    pub cap_electrolyzer: ColId,
    pub cap_compressor: ColId,
    pub cap_cavern: ColId,
    pub cap_reconversion: ColId,
    pub electrolyzer_in: Vec<ColId>,
    pub reconversion_out: Vec<ColId>,
    pub cavern_soc: Vec<ColId>,
}

#[derive(Debug, Clone)]
pub struct ProsumerVars {
    pub cap_rooftop: ColId,
    pub cap_battery_energy: ColId,
    pub cap_battery_power_in: ColId,
    pub cap_battery_power_out: ColId,
    pub pv_to_load: Vec<ColId>,
    pub pv_to_battery: Vec<ColId>,
    pub pv_to_grid: Vec<ColId>,
    pub pv_curtailed: Vec<ColId>,
    pub battery_to_load: Vec<ColId>,
    pub battery_soc: Vec<ColId>,
    pub grid_imports: Vec<ColId>,
    /// Home battery state-equation rows (for structural checks).
    pub battery_dyn_rows: Vec<RowId>,
    /// Rooftop generation split rows.
    pub pv_split_rows: Vec<RowId>,
    /// Home battery discharge capacity rows (BEV charging couples in).
    pub battery_out_rows: Vec<RowId>,
}

#[derive(Debug, Clone)]
pub struct BevProfileVars {
    pub name: String,
    pub charge_home_grid: Vec<ColId>,
    pub charge_away_grid: Vec<ColId>,
    pub soc_grid: Vec<ColId>,
    // Present only when the prosumer block exists:
    pub charge_pv: Option<Vec<ColId>>,
    pub charge_battery: Option<Vec<ColId>>,
    pub soc_self: Option<Vec<ColId>>,
    pub drive_self: Option<Vec<ColId>>,
    pub drive_grid: Option<Vec<ColId>>,
    pub v2h_self: Option<Vec<ColId>>,
    pub v2h_grid: Option<Vec<ColId>>,
    pub soc_dyn_rows: Vec<RowId>,
}

/// Conversion efficiencies and demand totals the extractor needs; captured
/// at build time so downstream code cannot drift from the built LP.
#[derive(Debug, Clone)]
pub struct ProsumerMeta {
    pub hb_eta_charge: f64,
    pub hb_eta_discharge: f64,
    pub ev_eta_charge: f64,
    pub ev_eta_discharge: f64,
    pub prosumer_load_total_mwh: f64,
    pub ev_driving_total_mwh: f64,
    pub household_count: f64,
}

#[derive(Debug, Clone)]
pub struct VariableIndex {
    pub horizon: usize,
    pub setup: Setup,
    pub gens: Vec<GenVars>,
    pub storages: Vec<StorageVars>,
    pub hydrogen: Option<HydrogenVars>,
    pub prosumer: Option<ProsumerVars>,
    pub bev: Vec<BevProfileVars>,
    pub balance_rows: Vec<RowId>,
    pub prosumer_balance_rows: Vec<RowId>,
    pub self_generation_row: Option<RowId>,
    pub prosumer_meta: Option<ProsumerMeta>,
}

pub struct CentralPlannerModel {
    pub problem: LpProblem,
    pub index: VariableIndex,
}

/// Costs and conversion factors the BEV block inherits from the prosumer
/// technologies.
struct ProsumerCoupling {
    pv_variable: f64,
    hb_var_discharge: f64,
    hb_eta_discharge: f64,
}

/// Build the central-planner LP for a scenario.
///
/// With `config.omega` absent this is a reference run: no prosumer block,
/// prosumer household load added to grid demand, distributed technologies
/// excluded, BEVs (if any) grid-charging only.
pub fn build_central_planner(
    cfg: &ScenarioConfig,
    gens: &[GenTechSpec],
    storages: &[StorageTechSpec],
    hydrogen: Option<&HydrogenChainSpec>,
    bev: Option<&BevFleetSpec>,
    demand: &DemandBundle,
) -> Result<CentralPlannerModel> {
    cfg.validate()?;
    demand.validate(cfg)?;
    for g in gens {
        g.validate(cfg.horizon)?;
    }
    for s in storages {
        s.validate(cfg.horizon)?;
    }
    if let Some(fleet) = bev {
        fleet.validate(cfg.horizon)?;
    }
    if cfg.setup == Setup::WithBevs && bev.is_none() {
        return Err(Error::Config(
            "setup is with_bevs but no BEV fleet was provided".into(),
        ));
    }
    if demand.hydrogen_offtake_mwh_per_h > 0.0 && hydrogen.is_none() {
        return Err(Error::Config(
            "hydrogen demand is positive but no hydrogen chain is configured".into(),
        ));
    }

    let h_count = cfg.horizon;
    let yf = cfg.year_fraction();
    let with_prosumer = cfg.omega.is_some();
    let with_bevs = cfg.setup == Setup::WithBevs;

    // Prosumer technologies, required only when omega is present.
    let rooftop = gens.iter().find(|g| g.distributed);
    let home_battery = storages.iter().find(|s| !s.grid_coupled);
    if with_prosumer && (rooftop.is_none() || home_battery.is_none()) {
        return Err(Error::Config(
            "omega is set but the technology tables have no distributed rooftop PV \
             and grid-decoupled home battery"
                .into(),
        ));
    }
    if gens.iter().filter(|g| g.distributed).count() > 1
        || storages.iter().filter(|s| !s.grid_coupled).count() > 1
    {
        return Err(Error::Config(
            "expected at most one distributed generation tech and one home battery".into(),
        ));
    }

    let mut p = LpProblem::new(cfg.id.clone());
    let prosumer_load = demand.prosumer_load(cfg.prosumer_count);

    // Hourly grid balance: supply - demand variables = fixed demand.
    let mut balance_rows = Vec::with_capacity(h_count);
    for h in 0..h_count {
        let mut rhs = demand.base_load[h] + demand.heat_load[h];
        if !with_prosumer {
            rhs += prosumer_load[h];
        }
        balance_rows.push(p.add_row(format!("bal_{h:04}"), RowSense::Eq, rhs, &[])?);
    }

    // Utility-scale generation.
    let mut gen_vars = Vec::new();
    for g in gens.iter().filter(|g| !g.distributed) {
        gen_vars.push(add_generator(&mut p, g, cfg, &balance_rows, yf)?);
    }

    // Grid-coupled storage.
    let mut sto_vars = Vec::new();
    for s in storages.iter().filter(|s| s.grid_coupled) {
        sto_vars.push(add_storage(&mut p, s, h_count, &balance_rows, yf)?);
    }

    // Hydrogen chain and flat offtake.
    let h2_vars = match hydrogen {
        Some(chain) => Some(add_hydrogen(&mut p, chain, demand, h_count, &balance_rows, yf)?),
        None => None,
    };

    // Prosumer block.
    let mut prosumer_balance_rows = Vec::new();
    let prosumer_vars = if with_prosumer {
        let (vars, pbal) = add_prosumer_block(
            &mut p,
            cfg,
            rooftop.unwrap(),
            home_battery.unwrap(),
            &prosumer_load,
            &balance_rows,
            yf,
            with_bevs,
        )?;
        prosumer_balance_rows = pbal;
        Some(vars)
    } else {
        None
    };

    // BEV fleet.
    let mut bev_vars = Vec::new();
    if with_bevs {
        let fleet = bev.unwrap();
        let coupling = prosumer_vars.as_ref().map(|_| ProsumerCoupling {
            pv_variable: rooftop.unwrap().variable_cost_eur_per_mwh,
            hb_var_discharge: home_battery.unwrap().var_cost_discharge_eur_per_mwh,
            hb_eta_discharge: home_battery.unwrap().eta_discharge,
        });
        for (pi, profile) in fleet.profiles.iter().enumerate() {
            bev_vars.push(add_bev_profile(
                &mut p,
                cfg,
                fleet,
                pi,
                profile,
                &balance_rows,
                prosumer_vars.as_ref(),
                &prosumer_balance_rows,
                coupling.as_ref(),
            )?);
        }
    }

    let prosumer_meta = if with_prosumer {
        let hb = home_battery.unwrap();
        Some(ProsumerMeta {
            hb_eta_charge: hb.eta_charge,
            hb_eta_discharge: hb.eta_discharge,
            ev_eta_charge: bev.map_or(1.0, |f| f.eta_charge),
            ev_eta_discharge: bev.map_or(1.0, |f| f.eta_discharge),
            prosumer_load_total_mwh: prosumer_load.sum(),
            ev_driving_total_mwh: bev.map_or(0.0, |f| f.total_driving_mwh()),
            household_count: cfg.prosumer_count,
        })
    } else {
        None
    };

    let mut index = VariableIndex {
        horizon: h_count,
        setup: cfg.setup,
        gens: gen_vars,
        storages: sto_vars,
        hydrogen: h2_vars,
        prosumer: prosumer_vars,
        bev: bev_vars,
        balance_rows,
        prosumer_balance_rows,
        self_generation_row: None,
        prosumer_meta,
    };

    if let Some(omega) = cfg.omega {
        let row = self_generation_constraint(&mut p, &index, cfg.setup, omega)?;
        index.self_generation_row = Some(row);
    }

    Ok(CentralPlannerModel { problem: p, index })
}

/// Append the self-generation constraint row for the given rate.
///
/// NoBEVs: sum_h (pv_to_load + battery_to_load) >= omega * sum_h d^p.
/// WithBEVs both sides extend with BEV terms and subtract conversion losses
/// of self-generated electricity (home battery charge/discharge, BEV charge
/// from PV or battery, V2H discharge from the self pool).
pub fn self_generation_constraint(
    p: &mut LpProblem,
    index: &VariableIndex,
    setup: Setup,
    omega: f64,
) -> Result<RowId> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::InvalidParameter(format!(
            "omega must lie in [0, 1], got {omega}"
        )));
    }
    let pro = index.prosumer.as_ref().ok_or(Error::Config(
        "self-generation constraint requires prosumer variables".into(),
    ))?;
    let meta = index.prosumer_meta.as_ref().unwrap();

    let rhs_demand = match setup {
        Setup::NoBevs => meta.prosumer_load_total_mwh,
        Setup::WithBevs => meta.prosumer_load_total_mwh + meta.ev_driving_total_mwh,
    };
    let row = p.add_row("sgc", RowSense::Ge, omega * rhs_demand, &[])?;

    let hb_charge_loss = 1.0 - meta.hb_eta_charge;
    let hb_discharge_loss = 1.0 / meta.hb_eta_discharge - 1.0;
    for h in 0..index.horizon {
        p.add_term(row, pro.pv_to_load[h], 1.0);
        match setup {
            Setup::NoBevs => {
                p.add_term(row, pro.battery_to_load[h], 1.0);
            }
            Setup::WithBevs => {
                let ev_charge_loss = 1.0 - meta.ev_eta_charge;
                let ev_discharge_loss = 1.0 / meta.ev_eta_discharge - 1.0;
                p.add_term(row, pro.battery_to_load[h], 1.0 - hb_discharge_loss);
                p.add_term(row, pro.pv_to_battery[h], -hb_charge_loss);
                for b in &index.bev {
                    p.add_term(row, b.charge_pv.as_ref().unwrap()[h], 1.0 - ev_charge_loss);
                    p.add_term(
                        row,
                        b.charge_battery.as_ref().unwrap()[h],
                        -hb_discharge_loss - ev_charge_loss,
                    );
                    p.add_term(row, b.v2h_self.as_ref().unwrap()[h], -ev_discharge_loss);
                }
            }
        }
    }
    Ok(row)
}

fn add_generator(
    p: &mut LpProblem,
    g: &GenTechSpec,
    cfg: &ScenarioConfig,
    balance: &[RowId],
    yf: f64,
) -> Result<GenVars> {
    let annual_eur = g.annual_capacity_cost_keur()? * 1000.0;
    let cap = p.add_col(
        format!("cap_g_{}", g.name),
        g.cap_lower_mw,
        g.cap_upper_mw,
        annual_eur * yf,
    )?;
    let mc = g.marginal_cost_eur_per_mwh(cfg.carbon_price_eur_per_t);
    let mut dispatch = Vec::with_capacity(balance.len());
    for (h, &bal) in balance.iter().enumerate() {
        let col = p.add_col(format!("g_{}_{h:04}", g.name), 0.0, INF, mc)?;
        let af = g.availability.as_ref().map_or(1.0, |s| s[h]);
        p.add_row(
            format!("gcap_{}_{h:04}", g.name),
            RowSense::Le,
            0.0,
            &[(col, 1.0), (cap, -af)],
        )?;
        p.add_term(bal, col, 1.0);
        dispatch.push(col);
    }
    Ok(GenVars {
        name: g.name.clone(),
        cap,
        dispatch,
    })
}

fn add_storage(
    p: &mut LpProblem,
    s: &StorageTechSpec,
    h_count: usize,
    balance: &[RowId],
    yf: f64,
) -> Result<StorageVars> {
    let caps = add_storage_caps(p, s, yf)?;
    let (cap_energy, cap_power_in, cap_power_out) = caps;
    let mut charge = Vec::with_capacity(h_count);
    let mut discharge = Vec::with_capacity(h_count);
    let mut soc = Vec::with_capacity(h_count);
    let mut spill = if s.inflow.is_some() {
        Some(Vec::with_capacity(h_count))
    } else {
        None
    };
    for h in 0..h_count {
        let c = p.add_col(
            format!("stc_{}_{h:04}", s.name),
            0.0,
            INF,
            s.var_cost_charge_eur_per_mwh,
        )?;
        let d = p.add_col(
            format!("std_{}_{h:04}", s.name),
            0.0,
            INF,
            s.var_cost_discharge_eur_per_mwh,
        )?;
        let sc = p.add_col(format!("sts_{}_{h:04}", s.name), 0.0, INF, 0.0)?;
        p.add_row(
            format!("scap_c_{}_{h:04}", s.name),
            RowSense::Le,
            0.0,
            &[(c, 1.0), (cap_power_in, -s.availability)],
        )?;
        p.add_row(
            format!("scap_d_{}_{h:04}", s.name),
            RowSense::Le,
            0.0,
            &[(d, 1.0), (cap_power_out, -s.availability)],
        )?;
        p.add_row(
            format!("scap_e_{}_{h:04}", s.name),
            RowSense::Le,
            0.0,
            &[(sc, 1.0), (cap_energy, -1.0)],
        )?;
        p.add_term(balance[h], d, 1.0);
        p.add_term(balance[h], c, -1.0);
        charge.push(c);
        discharge.push(d);
        soc.push(sc);
        if let Some(sp) = spill.as_mut() {
            sp.push(p.add_col(format!("stw_{}_{h:04}", s.name), 0.0, INF, 0.0)?);
        }
    }
    // Cyclic state equations: soc_h = soc_{h-1} + eta_c charge - discharge/eta_d + inflow - spill.
    for h in 0..h_count {
        let prev = (h + h_count - 1) % h_count;
        let inflow = s.inflow.as_ref().map_or(0.0, |f| f[h]);
        let row = p.add_row(format!("sdyn_{}_{h:04}", s.name), RowSense::Eq, inflow, &[])?;
        p.add_term(row, soc[h], 1.0);
        p.add_term(row, soc[prev], -1.0);
        p.add_term(row, charge[h], -s.eta_charge);
        p.add_term(row, discharge[h], 1.0 / s.eta_discharge);
        if let Some(sp) = &spill {
            p.add_term(row, sp[h], 1.0);
        }
    }
    Ok(StorageVars {
        name: s.name.clone(),
        cap_energy,
        cap_power_in,
        cap_power_out,
        charge,
        discharge,
        soc,
        spill,
    })
}

fn add_storage_caps(
    p: &mut LpProblem,
    s: &StorageTechSpec,
    yf: f64,
) -> Result<(ColId, ColId, ColId)> {
    let e_cost = super::annuitize(s.overnight_energy_keur_per_mwh, s.interest_rate, s.lifetime_yr)?
        * 1000.0
        * yf;
    let pi_cost =
        super::annuitize(s.overnight_power_in_keur_per_mw, s.interest_rate, s.lifetime_yr)?
            * 1000.0
            * yf;
    let po_cost =
        super::annuitize(s.overnight_power_out_keur_per_mw, s.interest_rate, s.lifetime_yr)?
            * 1000.0
            * yf;
    let e = p.add_col(
        format!("cap_e_{}", s.name),
        s.energy_lower_mwh,
        s.energy_upper_mwh,
        e_cost,
    )?;
    let pi = p.add_col(
        format!("cap_pi_{}", s.name),
        s.power_in_lower_mw,
        s.power_in_upper_mw,
        pi_cost,
    )?;
    let po = p.add_col(
        format!("cap_po_{}", s.name),
        s.power_out_lower_mw,
        s.power_out_upper_mw,
        po_cost,
    )?;
    Ok((e, pi, po))
}

fn add_hydrogen(
    p: &mut LpProblem,
    chain: &HydrogenChainSpec,
    demand: &DemandBundle,
    h_count: usize,
    balance: &[RowId],
    yf: f64,
) -> Result<HydrogenVars> {
    let stage_col = |p: &mut LpProblem, stage: &super::H2Stage, tag: &str| -> Result<ColId> {
        let cost = stage.annual_cost_keur()? * 1000.0 * yf;
        p.add_col(format!("cap_{tag}"), stage.cap_lower, stage.cap_upper, cost)
    };
    let cap_el = stage_col(p, &chain.electrolyzer, "h2el")?;
    let cap_comp = stage_col(p, &chain.compressor, "h2cp")?;
    let cap_cav = stage_col(p, &chain.cavern, "h2cv")?;
    let cap_rec = stage_col(p, &chain.reconversion, "h2rc")?;

    let eta_el = chain.electrolyzer.efficiency;
    let eta_rec = chain.reconversion.efficiency;
    let mut el_in = Vec::with_capacity(h_count);
    let mut rec_out = Vec::with_capacity(h_count);
    let mut cav_soc = Vec::with_capacity(h_count);
    for h in 0..h_count {
        let e = p.add_col(
            format!("h2e_{h:04}"),
            0.0,
            INF,
            chain.electrolyzer.var_cost_eur_per_mwh,
        )?;
        let r = p.add_col(
            format!("h2r_{h:04}"),
            0.0,
            INF,
            chain.reconversion.var_cost_eur_per_mwh,
        )?;
        let sc = p.add_col(format!("h2s_{h:04}"), 0.0, INF, 0.0)?;
        p.add_row(
            format!("h2cap_e_{h:04}"),
            RowSense::Le,
            0.0,
            &[(e, 1.0), (cap_el, -chain.electrolyzer.availability)],
        )?;
        p.add_row(
            format!("h2cap_r_{h:04}"),
            RowSense::Le,
            0.0,
            &[(r, 1.0), (cap_rec, -chain.reconversion.availability)],
        )?;
        p.add_row(
            format!("h2cap_s_{h:04}"),
            RowSense::Le,
            0.0,
            &[(sc, 1.0), (cap_cav, -chain.cavern.availability)],
        )?;
        // Compressor throughput caps the hydrogen flow into the cavern.
        p.add_row(
            format!("h2cap_c_{h:04}"),
            RowSense::Le,
            0.0,
            &[(e, eta_el), (cap_comp, -1.0)],
        )?;
        p.add_term(balance[h], e, -1.0);
        p.add_term(balance[h], r, 1.0);
        el_in.push(e);
        rec_out.push(r);
        cav_soc.push(sc);
    }
    for h in 0..h_count {
        let prev = (h + h_count - 1) % h_count;
        let row = p.add_row(
            format!("h2dyn_{h:04}"),
            RowSense::Eq,
            -demand.hydrogen_offtake_mwh_per_h,
            &[],
        )?;
        p.add_term(row, cav_soc[h], 1.0);
        p.add_term(row, cav_soc[prev], -1.0);
        p.add_term(row, el_in[h], -eta_el);
        p.add_term(row, rec_out[h], 1.0 / eta_rec);
    }
    Ok(HydrogenVars {
        cap_electrolyzer: cap_el,
        cap_compressor: cap_comp,
        cap_cavern: cap_cav,
        cap_reconversion: cap_rec,
        electrolyzer_in: el_in,
        reconversion_out: rec_out,
        cavern_soc: cav_soc,
    })
}

#[allow(clippy::too_many_arguments)]
fn add_prosumer_block(
    p: &mut LpProblem,
    cfg: &ScenarioConfig,
    rooftop: &GenTechSpec,
    hb: &StorageTechSpec,
    prosumer_load: &crate::series::HourlySeries,
    balance: &[RowId],
    yf: f64,
    with_bevs: bool,
) -> Result<(ProsumerVars, Vec<RowId>)> {
    let h_count = balance.len();
    let pv_annual = rooftop.annual_capacity_cost_keur()? * 1000.0 * yf;
    let cap_upper = rooftop.cap_upper_mw.min(cfg.rooftop_cap_mw());
    let cap_rooftop = p.add_col("cap_pv", rooftop.cap_lower_mw, cap_upper, pv_annual)?;
    let (cap_battery_energy, cap_battery_power_in, cap_battery_power_out) =
        add_storage_caps(p, hb, yf)?;

    let pv_var = rooftop.variable_cost_eur_per_mwh;
    let mut vars = ProsumerVars {
        cap_rooftop,
        cap_battery_energy,
        cap_battery_power_in,
        cap_battery_power_out,
        pv_to_load: Vec::new(),
        pv_to_battery: Vec::new(),
        pv_to_grid: Vec::new(),
        pv_curtailed: Vec::new(),
        battery_to_load: Vec::new(),
        battery_soc: Vec::new(),
        grid_imports: Vec::new(),
        battery_dyn_rows: Vec::new(),
        pv_split_rows: Vec::new(),
        battery_out_rows: Vec::new(),
    };
    let mut pbal_rows = Vec::with_capacity(h_count);

    for h in 0..h_count {
        let pvl = p.add_col(format!("pvl_{h:04}"), 0.0, INF, pv_var)?;
        let pvb = p.add_col(
            format!("pvb_{h:04}"),
            0.0,
            INF,
            pv_var + hb.var_cost_charge_eur_per_mwh,
        )?;
        let pvg = p.add_col(format!("pvg_{h:04}"), 0.0, INF, pv_var)?;
        let pvc = p.add_col(format!("pvc_{h:04}"), 0.0, INF, 0.0)?;
        let hbl = p.add_col(
            format!("hbl_{h:04}"),
            0.0,
            INF,
            hb.var_cost_discharge_eur_per_mwh,
        )?;
        let hbs = p.add_col(format!("hbs_{h:04}"), 0.0, INF, 0.0)?;
        let imp = p.add_col(
            format!("imp_{h:04}"),
            0.0,
            INF,
            cfg.self_consumption_tiebreak_eur_per_mwh,
        )?;

        let af = rooftop.availability.as_ref().map_or(1.0, |s| s[h]);
        let split = p.add_row(
            format!("pv_split_{h:04}"),
            RowSense::Eq,
            0.0,
            &[
                (pvl, 1.0),
                (pvb, 1.0),
                (pvg, 1.0),
                (pvc, 1.0),
                (cap_rooftop, -af),
            ],
        )?;
        let pbal = p.add_row(
            format!("pbal_{h:04}"),
            RowSense::Eq,
            prosumer_load[h],
            &[(pvl, 1.0), (hbl, 1.0), (imp, 1.0)],
        )?;
        p.add_row(
            format!("hbcap_c_{h:04}"),
            RowSense::Le,
            0.0,
            &[(pvb, 1.0), (cap_battery_power_in, -hb.availability)],
        )?;
        let out_row = p.add_row(
            format!("hbcap_d_{h:04}"),
            RowSense::Le,
            0.0,
            &[(hbl, 1.0), (cap_battery_power_out, -hb.availability)],
        )?;
        p.add_row(
            format!("hbcap_e_{h:04}"),
            RowSense::Le,
            0.0,
            &[(hbs, 1.0), (cap_battery_energy, -1.0)],
        )?;
        p.add_term(balance[h], pvg, 1.0);
        p.add_term(balance[h], imp, -1.0);

        vars.pv_to_load.push(pvl);
        vars.pv_to_battery.push(pvb);
        vars.pv_to_grid.push(pvg);
        vars.pv_curtailed.push(pvc);
        vars.battery_to_load.push(hbl);
        vars.battery_soc.push(hbs);
        vars.grid_imports.push(imp);
        vars.pv_split_rows.push(split);
        vars.battery_out_rows.push(out_row);
        pbal_rows.push(pbal);
    }
    for h in 0..h_count {
        let prev = (h + h_count - 1) % h_count;
        let row = p.add_row(format!("hbdyn_{h:04}"), RowSense::Eq, 0.0, &[])?;
        p.add_term(row, vars.battery_soc[h], 1.0);
        p.add_term(row, vars.battery_soc[prev], -1.0);
        p.add_term(row, vars.pv_to_battery[h], -hb.eta_charge);
        p.add_term(row, vars.battery_to_load[h], 1.0 / hb.eta_discharge);
        vars.battery_dyn_rows.push(row);
    }
    let _ = with_bevs; // BEV coupling terms are appended by add_bev_profile.
    Ok((vars, pbal_rows))
}

#[allow(clippy::too_many_arguments)]
fn add_bev_profile(
    p: &mut LpProblem,
    cfg: &ScenarioConfig,
    fleet: &BevFleetSpec,
    pi: usize,
    profile: &super::BevProfile,
    balance: &[RowId],
    prosumer: Option<&ProsumerVars>,
    prosumer_balance: &[RowId],
    coupling: Option<&ProsumerCoupling>,
) -> Result<BevProfileVars> {
    let h_count = balance.len();
    let cap_mwh = fleet.battery_capacity_mwh(profile);
    let eta_c = fleet.eta_charge;
    let eta_d = fleet.eta_discharge;
    let v2h_cost = cfg.v2h_degradation_eur_per_mwh;
    let away_adder = if cfg.cp_away_charging_adder {
        cfg.tariff.adder_eur_per_mwh
    } else {
        0.0
    };

    let coupled = prosumer.is_some();
    let mut vars = BevProfileVars {
        name: profile.name.clone(),
        charge_home_grid: Vec::new(),
        charge_away_grid: Vec::new(),
        soc_grid: Vec::new(),
        charge_pv: coupled.then(Vec::new),
        charge_battery: coupled.then(Vec::new),
        soc_self: coupled.then(Vec::new),
        drive_self: coupled.then(Vec::new),
        drive_grid: coupled.then(Vec::new),
        v2h_self: coupled.then(Vec::new),
        v2h_grid: coupled.then(Vec::new),
        soc_dyn_rows: Vec::new(),
    };

    for h in 0..h_count {
        let home_cap = profile.avail_home_mw[h];
        let away_cap = profile.avail_away_mw[h];
        // Away charging is capped by the column bound directly.
        let cha = p.add_col(format!("eva_{pi}_{h:04}"), 0.0, away_cap, away_adder)?;
        p.add_term(balance[h], cha, -1.0);
        vars.charge_away_grid.push(cha);

        if coupled {
            let couple = coupling.unwrap();
            let chh = p.add_col(format!("evh_{pi}_{h:04}"), 0.0, INF, 0.0)?;
            let chp = p.add_col(format!("evp_{pi}_{h:04}"), 0.0, INF, couple.pv_variable)?;
            let chb = p.add_col(format!("evb_{pi}_{h:04}"), 0.0, INF, couple.hb_var_discharge)?;
            let v2hs = p.add_col(format!("vhs_{pi}_{h:04}"), 0.0, INF, v2h_cost)?;
            let v2hg = p.add_col(format!("vhg_{pi}_{h:04}"), 0.0, INF, v2h_cost)?;
            let socs = p.add_col(format!("scs_{pi}_{h:04}"), 0.0, INF, 0.0)?;
            let socg = p.add_col(format!("scg_{pi}_{h:04}"), 0.0, INF, 0.0)?;
            let drs = p.add_col(format!("drs_{pi}_{h:04}"), 0.0, INF, 0.0)?;
            let drg = p.add_col(format!("drg_{pi}_{h:04}"), 0.0, INF, 0.0)?;

            // One home plug: charging and V2H share the connectable power.
            p.add_row(
                format!("evplug_{pi}_{h:04}"),
                RowSense::Le,
                home_cap,
                &[
                    (chh, 1.0),
                    (chp, 1.0),
                    (chb, 1.0),
                    (v2hs, 1.0),
                    (v2hg, 1.0),
                ],
            )?;
            // Both pools share the physical battery.
            p.add_row(
                format!("evcap_{pi}_{h:04}"),
                RowSense::Le,
                cap_mwh,
                &[(socs, 1.0), (socg, 1.0)],
            )?;
            p.add_row(
                format!("drv_{pi}_{h:04}"),
                RowSense::Eq,
                profile.driving_demand[h],
                &[(drs, 1.0), (drg, 1.0)],
            )?;
            p.add_term(balance[h], chh, -1.0);

            let pro = prosumer.unwrap();
            p.add_term(pro.pv_split_rows[h], chp, 1.0);
            p.add_term(pro.battery_out_rows[h], chb, 1.0);
            p.add_term(pro.battery_dyn_rows[h], chb, 1.0 / couple.hb_eta_discharge);
            p.add_term(prosumer_balance[h], v2hs, 1.0);
            p.add_term(prosumer_balance[h], v2hg, 1.0);

            vars.charge_home_grid.push(chh);
            vars.charge_pv.as_mut().unwrap().push(chp);
            vars.charge_battery.as_mut().unwrap().push(chb);
            vars.v2h_self.as_mut().unwrap().push(v2hs);
            vars.v2h_grid.as_mut().unwrap().push(v2hg);
            vars.soc_self.as_mut().unwrap().push(socs);
            vars.soc_grid.push(socg);
            vars.drive_self.as_mut().unwrap().push(drs);
            vars.drive_grid.as_mut().unwrap().push(drg);
        } else {
            let chh = p.add_col(format!("evh_{pi}_{h:04}"), 0.0, home_cap, 0.0)?;
            let socg = p.add_col(format!("scg_{pi}_{h:04}"), 0.0, cap_mwh, 0.0)?;
            p.add_term(balance[h], chh, -1.0);
            vars.charge_home_grid.push(chh);
            vars.soc_grid.push(socg);
        }
    }

    // State equations (cyclic).
    for h in 0..h_count {
        let prev = (h + h_count - 1) % h_count;
        if coupled {
            let rs = p.add_row(format!("evdyn_s_{pi}_{h:04}"), RowSense::Eq, 0.0, &[])?;
            let socs = vars.soc_self.as_ref().unwrap();
            p.add_term(rs, socs[h], 1.0);
            p.add_term(rs, socs[prev], -1.0);
            p.add_term(rs, vars.charge_pv.as_ref().unwrap()[h], -eta_c);
            p.add_term(rs, vars.charge_battery.as_ref().unwrap()[h], -eta_c);
            p.add_term(rs, vars.drive_self.as_ref().unwrap()[h], 1.0);
            p.add_term(rs, vars.v2h_self.as_ref().unwrap()[h], 1.0 / eta_d);
            vars.soc_dyn_rows.push(rs);

            let rg = p.add_row(format!("evdyn_g_{pi}_{h:04}"), RowSense::Eq, 0.0, &[])?;
            p.add_term(rg, vars.soc_grid[h], 1.0);
            p.add_term(rg, vars.soc_grid[prev], -1.0);
            p.add_term(rg, vars.charge_home_grid[h], -eta_c);
            p.add_term(rg, vars.charge_away_grid[h], -eta_c);
            p.add_term(rg, vars.drive_grid.as_ref().unwrap()[h], 1.0);
            p.add_term(rg, vars.v2h_grid.as_ref().unwrap()[h], 1.0 / eta_d);
            vars.soc_dyn_rows.push(rg);
        } else {
            let rg = p.add_row(
                format!("evdyn_g_{pi}_{h:04}"),
                RowSense::Eq,
                -profile.driving_demand[h],
                &[],
            )?;
            p.add_term(rg, vars.soc_grid[h], 1.0);
            p.add_term(rg, vars.soc_grid[prev], -1.0);
            p.add_term(rg, vars.charge_home_grid[h], -eta_c);
            p.add_term(rg, vars.charge_away_grid[h], -eta_c);
            vars.soc_dyn_rows.push(rg);
        }
    }
    Ok(vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::backend::{solve_with, SolveOptions};
    use crate::lp::simplex;
    use crate::model::extract_solution;
    use crate::series::HourlySeries;
    use crate::tariff::TariffScheme;
    use approx::assert_relative_eq;

    fn config(setup: Setup, horizon: usize, omega: Option<f64>) -> ScenarioConfig {
        ScenarioConfig {
            id: "unit".into(),
            setup,
            horizon,
            prosumer_count: 1.0,
            per_household_load_mwh: 0.0,
            rooftop_cap_per_household_kw: 15.0,
            omega,
            tariff: TariffScheme::fixed(200.0),
            feed_in_tariff_eur_per_mwh: 80.0,
            carbon_price_eur_per_t: 0.0,
            v2h_degradation_eur_per_mwh: 10.0,
            self_consumption_tiebreak_eur_per_mwh: 1e-3,
            cp_away_charging_adder: false,
        }
    }

    /// Demand with a constant per-household profile of `w` MWh/h, keeping
    /// the per-household annual figure consistent with the horizon.
    fn demand(cfg: &mut ScenarioConfig, base: f64, w: f64) -> DemandBundle {
        cfg.per_household_load_mwh = w * super::super::HOURS_PER_YEAR;
        DemandBundle {
            horizon: cfg.horizon,
            base_load: HourlySeries::constant(cfg.horizon, base),
            heat_load: HourlySeries::zeros(cfg.horizon),
            hydrogen_offtake_mwh_per_h: 0.0,
            prosumer_profile: HourlySeries::constant(cfg.horizon, w),
        }
    }

    fn gas(cap: f64, var_cost: f64) -> GenTechSpec {
        GenTechSpec {
            name: "gas".into(),
            cap_lower_mw: cap,
            cap_upper_mw: cap,
            interest_rate: 0.0,
            lifetime_yr: 25,
            overnight_cost_keur_per_mw: 0.0,
            fixed_cost_keur_per_mw_yr: 0.0,
            variable_cost_eur_per_mwh: var_cost,
            efficiency: 1.0,
            carbon_content_t_per_mwh_fuel: 0.0,
            fuel_cost_eur_per_mwh_fuel: 0.0,
            availability: None,
            distributed: false,
        }
    }

    fn rooftop(horizon: usize) -> GenTechSpec {
        let cf: Vec<f64> = (0..horizon)
            .map(|h| if (8..16).contains(&(h % 24)) { 0.7 } else { 0.0 })
            .collect();
        GenTechSpec {
            name: "rooftop".into(),
            cap_lower_mw: 0.0,
            cap_upper_mw: f64::INFINITY,
            interest_rate: 0.04,
            lifetime_yr: 40,
            overnight_cost_keur_per_mw: 943.774,
            fixed_cost_keur_per_mw_yr: 12.022,
            variable_cost_eur_per_mwh: 0.0,
            efficiency: 1.0,
            carbon_content_t_per_mwh_fuel: 0.0,
            fuel_cost_eur_per_mwh_fuel: 0.0,
            availability: Some(HourlySeries::new(cf)),
            distributed: true,
        }
    }

    fn home_battery(eta_c: f64, eta_d: f64) -> StorageTechSpec {
        StorageTechSpec {
            name: "home_battery".into(),
            energy_lower_mwh: 0.0,
            energy_upper_mwh: f64::INFINITY,
            power_in_lower_mw: 0.0,
            power_in_upper_mw: f64::INFINITY,
            power_out_lower_mw: 0.0,
            power_out_upper_mw: f64::INFINITY,
            interest_rate: 0.04,
            lifetime_yr: 25,
            availability: 1.0,
            overnight_energy_keur_per_mwh: 169.658,
            overnight_power_in_keur_per_mw: 191.164,
            overnight_power_out_keur_per_mw: 0.011,
            eta_charge: eta_c,
            eta_discharge: eta_d,
            var_cost_charge_eur_per_mwh: 0.0,
            var_cost_discharge_eur_per_mwh: 0.0,
            inflow: None,
            grid_coupled: false,
        }
    }

    fn bev_fleet(horizon: usize, eta: f64, daily_kwh: f64) -> BevFleetSpec {
        let mut drive = vec![0.0; horizon];
        let mut home = vec![0.0; horizon];
        for h in 0..horizon {
            match h % 24 {
                8 => drive[h] = daily_kwh / 1000.0,
                9..=16 => {} // parked away, no charger
                _ => home[h] = 0.011,
            }
        }
        BevFleetSpec {
            battery_kwh_per_vehicle: 45.0,
            charger_home_kw: 11.0,
            charger_work_kw: 11.0,
            charger_public_kw: 22.0,
            eta_charge: eta,
            eta_discharge: eta,
            profiles: vec![BevProfile {
                name: "p0".into(),
                vehicles: 1.0,
                driving_demand: drive.into(),
                avail_home_mw: home.into(),
                avail_away_mw: HourlySeries::zeros(horizon),
            }],
        }
    }

    #[test]
    fn structural_counts_single_tech() {
        // 24 h, one gas tech, no prosumers: 24 balance rows, 24 dispatch
        // caps, one capacity variable plus 24 dispatch columns.
        let mut cfg = config(Setup::NoBevs, 24, None);
        let d = demand(&mut cfg, 10.0, 0.0);
        let model =
            build_central_planner(&cfg, &[gas(100.0, 30.0)], &[], None, None, &d).unwrap();
        assert_eq!(model.problem.num_rows(), 48);
        assert_eq!(model.problem.num_cols(), 25);
        assert_eq!(model.index.balance_rows.len(), 24);
    }

    #[test]
    fn single_tech_duals_equal_marginal_cost() {
        // Slack capacity, inelastic 10 MWh demand, 30 EUR/MWh variable cost:
        // the balance dual is 30 in every hour (textbook LP duality).
        let mut cfg = config(Setup::NoBevs, 24, None);
        let d = demand(&mut cfg, 10.0, 0.0);
        let model =
            build_central_planner(&cfg, &[gas(100.0, 30.0)], &[], None, None, &d).unwrap();
        let sol = simplex::solve(&model.problem).unwrap();
        let cp = extract_solution(&model, &sol).unwrap();
        for h in 0..24 {
            assert_relative_eq!(cp.wholesale_prices[h], 30.0, max_relative = 1e-9);
        }
        assert_relative_eq!(cp.objective_eur, 24.0 * 10.0 * 30.0, max_relative = 1e-9);
        assert!(cp.prosumer.is_none());
        assert!(cp.capacities.prosumer.is_none());
    }

    #[test]
    fn infeasible_when_capacity_zero() {
        let mut cfg = config(Setup::NoBevs, 24, None);
        let d = demand(&mut cfg, 10.0, 0.0);
        let model = build_central_planner(&cfg, &[gas(0.0, 30.0)], &[], None, None, &d).unwrap();
        let sol = simplex::solve(&model.problem).unwrap();
        assert!(matches!(
            extract_solution(&model, &sol),
            Err(crate::error::Error::Infeasible)
        ));
    }

    #[test]
    fn omega_without_prosumer_techs_is_an_error() {
        let mut cfg = config(Setup::NoBevs, 24, Some(0.5));
        let d = demand(&mut cfg, 10.0, 0.1);
        let err = build_central_planner(&cfg, &[gas(100.0, 30.0)], &[], None, None, &d);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn sgc_rhs_no_bevs() {
        // Constant 10/24 MWh household load over 24 h sums to 10 MWh;
        // omega = 0.6 puts the requirement at 6 MWh.
        let mut cfg = config(Setup::NoBevs, 24, Some(0.6));
        let d = demand(&mut cfg, 10.0, 10.0 / 24.0);
        let model = build_central_planner(
            &cfg,
            &[gas(100.0, 30.0), rooftop(24)],
            &[home_battery(0.9, 0.9)],
            None,
            None,
            &d,
        )
        .unwrap();
        let row = model.index.self_generation_row.unwrap();
        assert_relative_eq!(model.problem.row(row).rhs, 6.0, max_relative = 1e-12);
        assert_eq!(model.problem.row(row).sense, RowSense::Ge);
    }

    #[test]
    fn sgc_rhs_with_bevs() {
        // d^p totals 5, EV driving totals 1, omega = 0.5 -> RHS = 3.
        let mut cfg = config(Setup::WithBevs, 24, Some(0.5));
        let d = demand(&mut cfg, 10.0, 5.0 / 24.0);
        let fleet = bev_fleet(24, 0.9, 1000.0); // one 1 MWh trip per day
        let model = build_central_planner(
            &cfg,
            &[gas(100.0, 30.0), rooftop(24)],
            &[home_battery(0.9, 0.9)],
            None,
            Some(&fleet),
            &d,
        )
        .unwrap();
        let row = model.index.self_generation_row.unwrap();
        assert_relative_eq!(model.problem.row(row).rhs, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn sgc_with_bevs_loss_coefficients() {
        // eta_c = eta_d = 0.9 for both the home battery and the BEV.
        let mut cfg = config(Setup::WithBevs, 24, Some(0.5));
        let d = demand(&mut cfg, 10.0, 5.0 / 24.0);
        let fleet = bev_fleet(24, 0.9, 1000.0);
        let model = build_central_planner(
            &cfg,
            &[gas(100.0, 30.0), rooftop(24)],
            &[home_battery(0.9, 0.9)],
            None,
            Some(&fleet),
            &d,
        )
        .unwrap();
        let idx = &model.index;
        let row = model.problem.row(idx.self_generation_row.unwrap());
        let coeff = |col: crate::lp::ColId| {
            row.coeffs
                .iter()
                .find(|(j, _)| *j == col.0)
                .map(|(_, v)| *v)
                .unwrap_or(0.0)
        };
        let pro = idx.prosumer.as_ref().unwrap();
        let bev = &idx.bev[0];
        let h = 3;
        assert_relative_eq!(coeff(pro.pv_to_load[h]), 1.0);
        // Delivered battery output minus its own discharge loss.
        assert_relative_eq!(
            coeff(pro.battery_to_load[h]),
            1.0 - (1.0 / 0.9 - 1.0),
            max_relative = 1e-12
        );
        assert_relative_eq!(coeff(pro.pv_to_battery[h]), -(1.0 - 0.9), max_relative = 1e-12);
        assert_relative_eq!(
            coeff(bev.charge_pv.as_ref().unwrap()[h]),
            0.9,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            coeff(bev.charge_battery.as_ref().unwrap()[h]),
            -(1.0 / 0.9 - 1.0) - (1.0 - 0.9),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            coeff(bev.v2h_self.as_ref().unwrap()[h]),
            -(1.0 / 0.9 - 1.0),
            max_relative = 1e-12
        );
        // Grid-pool flows never enter the self-generation row.
        assert_eq!(coeff(bev.charge_home_grid[h]), 0.0);
        assert_eq!(coeff(bev.v2h_grid.as_ref().unwrap()[h]), 0.0);
    }

    #[test]
    fn omega_zero_builds_no_distributed_capacity() {
        // Rooftop PV costs twice utility solar; with omega = 0 nothing
        // behind the meter is worth building.
        let mut cfg = config(Setup::NoBevs, 48, Some(0.0));
        cfg.prosumer_count = 100.0;
        let d = demand(&mut cfg, 5.0, 0.002);
        let mut utility_solar = rooftop(48);
        utility_solar.name = "solar".into();
        utility_solar.distributed = false;
        utility_solar.overnight_cost_keur_per_mw = 426.945;
        utility_solar.fixed_cost_keur_per_mw_yr = 10.674;
        let model = build_central_planner(
            &cfg,
            &[gas(100.0, 60.0), utility_solar, rooftop(48)],
            &[home_battery(0.985, 0.975)],
            None,
            None,
            &d,
        )
        .unwrap();
        let sol = solve_with("clarabel", &model.problem, &SolveOptions::default()).unwrap();
        let cp = extract_solution(&model, &sol).unwrap();
        let pro = cp.capacities.prosumer.unwrap();
        assert!(pro.rooftop_mw.abs() < 1e-6, "rooftop {}", pro.rooftop_mw);
        assert!(
            pro.battery_energy_mwh.abs() < 1e-6,
            "home battery {}",
            pro.battery_energy_mwh
        );
    }
}
