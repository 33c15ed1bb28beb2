//! Bundled desk-scale toy system.
//!
//! A deterministic one-to-four-week system with paper-grade technology
//! parameters scaled to about a thousand households: solar and wind with
//! intra-week lulls, a gas backstop, a utility battery, and the prosumer
//! pair (rooftop PV at roughly twice the utility PV cost, a grid-decoupled
//! home battery). Used by the test suite and handy for CLI experiments.

use super::Scenario;
use crate::model::{
    BevFleetSpec, BevProfile, DemandBundle, GenTechSpec, H2Stage, HydrogenChainSpec,
    ScenarioConfig, Setup, StorageTechSpec, HOURS_PER_YEAR,
};
use crate::series::HourlySeries;
use crate::tariff::TariffScheme;

#[derive(Debug, Clone)]
pub struct ToyOptions {
    pub horizon: usize,
    pub households: f64,
    pub setup: Setup,
    pub tariff: TariffScheme,
    pub feed_in_eur_per_mwh: f64,
    pub omega: Option<f64>,
    pub with_hydrogen: bool,
    pub bev_eta_charge: f64,
    pub bev_eta_discharge: f64,
}

impl Default for ToyOptions {
    fn default() -> Self {
        ToyOptions {
            horizon: 168,
            households: 1000.0,
            setup: Setup::NoBevs,
            tariff: TariffScheme::fixed(200.0),
            feed_in_eur_per_mwh: 80.0,
            omega: None,
            with_hydrogen: false,
            bev_eta_charge: 0.95,
            bev_eta_discharge: 0.95,
        }
    }
}

/// Solar capacity factor: a daytime bell with cloudy days 5 and 6 of each
/// week, so high self-generation rates need multi-day storage.
pub fn solar_cf(h: usize) -> f64 {
    let hod = h % 24;
    let day = (h / 24) % 7;
    let bell = if (6..18).contains(&hod) {
        (std::f64::consts::PI * (hod as f64 - 6.0) / 12.0).sin()
    } else {
        0.0
    };
    let day_factor = match day {
        4 => 0.30,
        5 => 0.20,
        6 => 0.85,
        _ => 1.0,
    };
    0.78 * bell * day_factor
}

/// Wind capacity factor: slow swells over the week plus a daily ripple.
pub fn wind_cf(h: usize) -> f64 {
    let t = h as f64;
    let v = 0.30 + 0.22 * (t / 168.0 * std::f64::consts::TAU * 1.5 + 1.0).sin()
        + 0.08 * (t / 24.0 * std::f64::consts::TAU + 0.5).sin();
    v.clamp(0.02, 0.85)
}

/// Household load shape over a day (relative weights, morning and evening
/// peaks), from a standard-load-profile silhouette.
const DAY_SHAPE: [f64; 24] = [
    0.55, 0.48, 0.45, 0.44, 0.46, 0.55, 0.75, 1.00, 1.05, 0.95, 0.90, 0.92, 0.98, 0.92, 0.85,
    0.88, 1.00, 1.25, 1.45, 1.50, 1.35, 1.10, 0.85, 0.65,
];

fn base_load(h: usize, scale: f64) -> f64 {
    let hod = h % 24;
    let day = (h / 24) % 7;
    let weekend = if day >= 5 { 0.93 } else { 1.0 };
    scale * DAY_SHAPE[hod] * weekend
}

pub fn toy_system(opts: &ToyOptions) -> Scenario {
    let horizon = opts.horizon;
    let yf = horizon as f64 / HOURS_PER_YEAR;
    let per_household_load_mwh = 5.0;

    let solar: HourlySeries = (0..horizon).map(solar_cf).collect::<Vec<_>>().into();
    let wind: HourlySeries = (0..horizon).map(wind_cf).collect::<Vec<_>>().into();

    // Base (non-prosumer) load of roughly the same magnitude as the
    // prosumer block, so behind-the-meter shifts are visible system-wide.
    let base: HourlySeries = (0..horizon)
        .map(|h| base_load(h, 1.3))
        .collect::<Vec<_>>()
        .into();

    let mut prosumer_profile: HourlySeries = (0..horizon)
        .map(|h| DAY_SHAPE[h % 24])
        .collect::<Vec<_>>()
        .into();
    prosumer_profile
        .normalize_sum(per_household_load_mwh * yf)
        .expect("nonzero profile");

    let gens = vec![
        GenTechSpec {
            name: "solar".into(),
            cap_lower_mw: 0.0,
            cap_upper_mw: f64::INFINITY,
            interest_rate: 0.04,
            lifetime_yr: 40,
            overnight_cost_keur_per_mw: 426.945,
            fixed_cost_keur_per_mw_yr: 10.674,
            variable_cost_eur_per_mwh: 0.0,
            efficiency: 1.0,
            carbon_content_t_per_mwh_fuel: 0.0,
            fuel_cost_eur_per_mwh_fuel: 0.0,
            availability: Some(solar.clone()),
            distributed: false,
        },
        GenTechSpec {
            name: "wind".into(),
            cap_lower_mw: 0.0,
            cap_upper_mw: f64::INFINITY,
            interest_rate: 0.04,
            lifetime_yr: 30,
            overnight_cost_keur_per_mw: 1288.302,
            fixed_cost_keur_per_mw_yr: 18.722,
            variable_cost_eur_per_mwh: 2.225,
            efficiency: 1.0,
            carbon_content_t_per_mwh_fuel: 0.0,
            fuel_cost_eur_per_mwh_fuel: 0.0,
            availability: Some(wind),
            distributed: false,
        },
        GenTechSpec {
            name: "ocgt".into(),
            cap_lower_mw: 0.0,
            cap_upper_mw: f64::INFINITY,
            interest_rate: 0.04,
            lifetime_yr: 25,
            overnight_cost_keur_per_mw: 525.687,
            fixed_cost_keur_per_mw_yr: 9.253,
            variable_cost_eur_per_mwh: 5.618,
            efficiency: 0.41,
            carbon_content_t_per_mwh_fuel: 0.201,
            fuel_cost_eur_per_mwh_fuel: 21.06,
            availability: None,
            distributed: false,
        },
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
            availability: Some(solar),
            distributed: true,
        },
    ];

    let lithium = |name: &str, grid_coupled: bool| StorageTechSpec {
        name: name.into(),
        energy_lower_mwh: 0.0,
        energy_upper_mwh: f64::INFINITY,
        power_in_lower_mw: 0.0,
        power_in_upper_mw: f64::INFINITY,
        power_out_lower_mw: 0.0,
        power_out_upper_mw: f64::INFINITY,
        interest_rate: 0.04,
        lifetime_yr: 25,
        availability: 0.99,
        overnight_energy_keur_per_mwh: 169.658,
        overnight_power_in_keur_per_mw: 191.164,
        overnight_power_out_keur_per_mw: 0.011,
        eta_charge: 0.985,
        eta_discharge: 0.975,
        var_cost_charge_eur_per_mwh: 1.075,
        var_cost_discharge_eur_per_mwh: 1.075,
        inflow: None,
        grid_coupled,
    };
    let storages = vec![lithium("battery", true), lithium("home_battery", false)];

    let hydrogen = opts.with_hydrogen.then(|| HydrogenChainSpec {
        electrolyzer: H2Stage {
            name: "electrolyzer".into(),
            cap_lower: 0.0,
            cap_upper: f64::INFINITY,
            interest_rate: 0.04,
            lifetime_yr: 25,
            availability: 0.97,
            overnight_keur: 730.301,
            efficiency: 0.585,
            var_cost_eur_per_mwh: 0.0,
        },
        compressor: H2Stage {
            name: "compressor".into(),
            cap_lower: 0.0,
            cap_upper: f64::INFINITY,
            interest_rate: 0.04,
            lifetime_yr: 15,
            availability: 1.0,
            overnight_keur: 95.656,
            efficiency: 1.0,
            var_cost_eur_per_mwh: 0.0,
        },
        cavern: H2Stage {
            name: "cavern".into(),
            cap_lower: 0.0,
            cap_upper: f64::INFINITY,
            interest_rate: 0.04,
            lifetime_yr: 100,
            availability: 1.0,
            overnight_keur: 2.390,
            efficiency: 1.0,
            var_cost_eur_per_mwh: 0.0,
        },
        reconversion: H2Stage {
            name: "reconversion".into(),
            cap_lower: 0.0,
            cap_upper: f64::INFINITY,
            interest_rate: 0.04,
            lifetime_yr: 25,
            availability: 0.98,
            overnight_keur: 538.067,
            efficiency: 0.41,
            var_cost_eur_per_mwh: 5.0,
        },
    });
    // 42 TWh/yr at national scale is far beyond the toy; use a small flat
    // draw sized to the toy system when the chain is enabled.
    let hydrogen_offtake = if opts.with_hydrogen { 0.15 } else { 0.0 };

    let bev = (opts.setup == Setup::WithBevs).then(|| toy_bev_fleet(opts));

    let demand = DemandBundle {
        horizon,
        base_load: base,
        heat_load: HourlySeries::zeros(horizon),
        hydrogen_offtake_mwh_per_h: hydrogen_offtake,
        prosumer_profile,
    };

    let config = ScenarioConfig {
        id: "toy".into(),
        setup: opts.setup,
        horizon,
        prosumer_count: opts.households,
        per_household_load_mwh,
        rooftop_cap_per_household_kw: 15.0,
        omega: opts.omega,
        tariff: opts.tariff.clone(),
        feed_in_tariff_eur_per_mwh: opts.feed_in_eur_per_mwh,
        carbon_price_eur_per_t: 0.0,
        v2h_degradation_eur_per_mwh: 20.0,
        self_consumption_tiebreak_eur_per_mwh: 1e-3,
        cp_away_charging_adder: false,
    };

    Scenario {
        config,
        gens,
        storages,
        hydrogen,
        bev,
        demand,
    }
}

/// Two deterministic usage patterns: weekday commuters (away at work during
/// the day) and homebodies (short midday errands).
fn toy_bev_fleet(opts: &ToyOptions) -> BevFleetSpec {
    let horizon = opts.horizon;
    let half = opts.households / 2.0;
    let charger_mw = 11.0 / 1000.0;
    let public_mw = 22.0 / 1000.0;

    let mut commuter_drive = vec![0.0; horizon];
    let mut commuter_home = vec![0.0; horizon];
    let mut commuter_away = vec![0.0; horizon];
    let mut homebody_drive = vec![0.0; horizon];
    let mut homebody_home = vec![0.0; horizon];
    let mut homebody_away = vec![0.0; horizon];

    for h in 0..horizon {
        let hod = h % 24;
        let day = (h / 24) % 7;
        let weekday = day < 5;

        // Commuters: to work at 8, back at 18 on weekdays; leisure trip on
        // day 5 with a 50% public-charger hit rate while parked.
        if weekday {
            match hod {
                8 | 18 => commuter_drive[h] = half * 4.0 / 1000.0, // 4 kWh per leg
                9..=17 => commuter_away[h] = half * charger_mw,
                _ => commuter_home[h] = half * charger_mw,
            }
        } else if day == 5 {
            match hod {
                11 | 15 => commuter_drive[h] = half * 3.0 / 1000.0,
                12..=14 => commuter_away[h] = half * public_mw * 0.5,
                _ => commuter_home[h] = half * charger_mw,
            }
        } else {
            commuter_home[h] = half * charger_mw;
        }

        // Homebodies: one midday errand every day.
        match hod {
            10 | 13 => homebody_drive[h] = half * 2.0 / 1000.0,
            11..=12 => {
                homebody_away[h] = half * public_mw * 0.5;
            }
            _ => homebody_home[h] = half * charger_mw,
        }
    }

    BevFleetSpec {
        battery_kwh_per_vehicle: 45.0,
        charger_home_kw: 11.0,
        charger_work_kw: 11.0,
        charger_public_kw: 22.0,
        eta_charge: opts.bev_eta_charge,
        eta_discharge: opts.bev_eta_discharge,
        profiles: vec![
            BevProfile {
                name: "commuter".into(),
                vehicles: half,
                driving_demand: commuter_drive.into(),
                avail_home_mw: commuter_home.into(),
                avail_away_mw: commuter_away.into(),
            },
            BevProfile {
                name: "homebody".into(),
                vehicles: half,
                driving_demand: homebody_drive.into(),
                avail_home_mw: homebody_home.into(),
                avail_away_mw: homebody_away.into(),
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_builds_and_validates() {
        let scn = toy_system(&ToyOptions::default());
        let model = scn.build_reference().unwrap();
        assert_eq!(model.index.balance_rows.len(), 168);
        assert!(model.index.prosumer.is_none());
    }

    #[test]
    fn toy_with_bevs_and_omega_builds() {
        let scn = toy_system(&ToyOptions {
            setup: Setup::WithBevs,
            omega: Some(0.5),
            horizon: 48,
            ..ToyOptions::default()
        });
        let model = scn.build_cp(None).unwrap();
        assert!(model.index.prosumer.is_some());
        assert_eq!(model.index.bev.len(), 2);
        assert!(model.index.self_generation_row.is_some());
    }
}
