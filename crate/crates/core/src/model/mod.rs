//! Central-planner model: technology specs, scenario configuration, the LP
//! builder and solution extraction.

mod build;
mod extract;
mod verify;

pub use build::{
    build_central_planner, self_generation_constraint, BevProfileVars, CentralPlannerModel,
    GenVars, HydrogenVars, ProsumerVars, StorageVars, VariableIndex,
};
pub use extract::{
    extract_solution, realized_self_generation_rate, self_generation_rate_from_totals,
    CapacityReport, CpSolution, ProsumerCaps, ProsumerDispatch, StorageCaps, StorageFlows,
};
pub use verify::{structural_report, verify_solution, VerifyReport};

use crate::error::{Error, Result};
use crate::series::HourlySeries;
use crate::tariff::TariffScheme;
use serde::{Deserialize, Serialize};

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Annualized cost of one unit of overnight investment.
///
/// Standard annuity factor `r (1+r)^L / ((1+r)^L - 1)`; a zero rate
/// degenerates to straight-line `overnight / lifetime`.
pub fn annuitize(overnight: f64, rate: f64, lifetime_yr: u32) -> Result<f64> {
    if lifetime_yr == 0 {
        return Err(Error::InvalidParameter(
            "annuity lifetime must be at least 1 year".into(),
        ));
    }
    if rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "negative interest rate {rate}"
        )));
    }
    if rate == 0.0 {
        return Ok(overnight / lifetime_yr as f64);
    }
    let growth = (1.0 + rate).powi(lifetime_yr as i32);
    Ok(overnight * rate * growth / (growth - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setup {
    NoBevs,
    WithBevs,
}

/// Scenario-level knobs for a single model run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub id: String,
    pub setup: Setup,
    pub horizon: usize,
    /// Number of prosumer households represented by the aggregate block.
    pub prosumer_count: f64,
    /// Annual load per household, MWh/yr (scaled by horizon/8760 internally).
    pub per_household_load_mwh: f64,
    pub rooftop_cap_per_household_kw: f64,
    /// Self-generation rate; absent means a reference run without the
    /// prosumer block.
    pub omega: Option<f64>,
    pub tariff: TariffScheme,
    pub feed_in_tariff_eur_per_mwh: f64,
    pub carbon_price_eur_per_t: f64,
    /// Linear BEV battery wear cost per MWh discharged via V2H.
    pub v2h_degradation_eur_per_mwh: f64,
    /// Tiny cost on prosumer grid imports in the CP objective. The CP is
    /// tariff-blind, so without this the import/self-consumption split is
    /// degenerate; the tie-break pins it deterministically.
    pub self_consumption_tiebreak_eur_per_mwh: f64,
    /// Price away-charging at demand cost plus the tariff adder inside the
    /// CP objective (off by default: away charging is ordinary grid demand).
    pub cp_away_charging_adder: bool,
}

impl ScenarioConfig {
    /// Fraction of a year covered by the horizon.
    pub fn year_fraction(&self) -> f64 {
        self.horizon as f64 / HOURS_PER_YEAR
    }

    /// Aggregate rooftop capacity cap in MW.
    pub fn rooftop_cap_mw(&self) -> f64 {
        self.prosumer_count * self.rooftop_cap_per_household_kw / 1000.0
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.omega {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidParameter(format!(
                    "omega must lie in [0, 1], got {w}"
                )));
            }
            if self.prosumer_count <= 0.0 {
                return Err(Error::InvalidParameter(
                    "prosumer_count must be positive when omega is set".into(),
                ));
            }
        }
        if self.horizon < 24 || self.horizon % 24 != 0 {
            return Err(Error::InvalidParameter(format!(
                "horizon must be >= 24 and a whole number of days, got {}",
                self.horizon
            )));
        }
        Ok(())
    }
}

/// Generation technology parameters (one table row).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenTechSpec {
    pub name: String,
    pub cap_lower_mw: f64,
    pub cap_upper_mw: f64,
    pub interest_rate: f64,
    pub lifetime_yr: u32,
    pub overnight_cost_keur_per_mw: f64,
    pub fixed_cost_keur_per_mw_yr: f64,
    pub variable_cost_eur_per_mwh: f64,
    pub efficiency: f64,
    pub carbon_content_t_per_mwh_fuel: f64,
    pub fuel_cost_eur_per_mwh_fuel: f64,
    /// Hourly capacity factor in [0, 1]; absent means firm capacity.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub availability: Option<HourlySeries>,
    /// Behind-the-meter technology (rooftop PV); excluded from reference
    /// runs and owned by the prosumer block otherwise.
    #[serde(default)]
    pub distributed: bool,
}

impl GenTechSpec {
    /// Annualized capex + fixed O&M, kEUR/MW/yr.
    pub fn annual_capacity_cost_keur(&self) -> Result<f64> {
        Ok(annuitize(self.overnight_cost_keur_per_mw, self.interest_rate, self.lifetime_yr)?
            + self.fixed_cost_keur_per_mw_yr)
    }

    /// Marginal dispatch cost in EUR per MWh of electricity generated.
    pub fn marginal_cost_eur_per_mwh(&self, carbon_price: f64) -> f64 {
        self.variable_cost_eur_per_mwh
            + self.fuel_cost_eur_per_mwh_fuel / self.efficiency
            + carbon_price * self.carbon_content_t_per_mwh_fuel / self.efficiency
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.cap_lower_mw > self.cap_upper_mw {
            return Err(Error::BoundsOrder {
                name: self.name.clone(),
                lower: self.cap_lower_mw,
                upper: self.cap_upper_mw,
            });
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: efficiency must lie in (0, 1], got {}",
                self.name, self.efficiency
            )));
        }
        for (label, v) in [
            ("overnight cost", self.overnight_cost_keur_per_mw),
            ("fixed cost", self.fixed_cost_keur_per_mw_yr),
            ("variable cost", self.variable_cost_eur_per_mwh),
            ("fuel cost", self.fuel_cost_eur_per_mwh_fuel),
            ("carbon content", self.carbon_content_t_per_mwh_fuel),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{}: {label} must be nonnegative, got {v}",
                    self.name
                )));
            }
        }
        if let Some(af) = &self.availability {
            af.expect_len(&format!("{} availability", self.name), horizon)?;
            if let Err((i, v)) = af.check_range(0.0, 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{}: availability[{i}] = {v} outside [0, 1]",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Storage technology parameters (one table row).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StorageTechSpec {
    pub name: String,
    pub energy_lower_mwh: f64,
    pub energy_upper_mwh: f64,
    pub power_in_lower_mw: f64,
    pub power_in_upper_mw: f64,
    pub power_out_lower_mw: f64,
    pub power_out_upper_mw: f64,
    pub interest_rate: f64,
    pub lifetime_yr: u32,
    pub availability: f64,
    pub overnight_energy_keur_per_mwh: f64,
    pub overnight_power_in_keur_per_mw: f64,
    pub overnight_power_out_keur_per_mw: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub var_cost_charge_eur_per_mwh: f64,
    pub var_cost_discharge_eur_per_mwh: f64,
    /// Natural inflow in MWh per hour (hydro reservoirs).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inflow: Option<HourlySeries>,
    /// False marks the behind-the-meter home battery.
    pub grid_coupled: bool,
}

impl StorageTechSpec {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        for (label, l, u) in [
            ("energy", self.energy_lower_mwh, self.energy_upper_mwh),
            ("power in", self.power_in_lower_mw, self.power_in_upper_mw),
            ("power out", self.power_out_lower_mw, self.power_out_upper_mw),
        ] {
            if l > u {
                return Err(Error::BoundsOrder {
                    name: format!("{} {label}", self.name),
                    lower: l,
                    upper: u,
                });
            }
        }
        for (label, eta) in [("charge", self.eta_charge), ("discharge", self.eta_discharge)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{}: eta_{label} must lie in (0, 1], got {eta}",
                    self.name
                )));
            }
        }
        if !(self.availability > 0.0 && self.availability <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: availability must lie in (0, 1], got {}",
                self.name, self.availability
            )));
        }
        if let Some(inflow) = &self.inflow {
            inflow.expect_len(&format!("{} inflow", self.name), horizon)?;
        }
        Ok(())
    }
}

/// One stage of the electrolysis / compression / cavern / reconversion chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct H2Stage {
    pub name: String,
    pub cap_lower: f64,
    pub cap_upper: f64,
    pub interest_rate: f64,
    pub lifetime_yr: u32,
    pub availability: f64,
    /// kEUR per MW (per MWh for the cavern).
    pub overnight_keur: f64,
    pub efficiency: f64,
    pub var_cost_eur_per_mwh: f64,
}

impl H2Stage {
    pub fn annual_cost_keur(&self) -> Result<f64> {
        annuitize(self.overnight_keur, self.interest_rate, self.lifetime_yr)
    }
}

/// Long-duration storage: electricity -> hydrogen -> cavern -> electricity,
/// plus a flat exogenous hydrogen offtake.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HydrogenChainSpec {
    pub electrolyzer: H2Stage,
    pub compressor: H2Stage,
    pub cavern: H2Stage,
    pub reconversion: H2Stage,
}

/// One synthetic or ingested BEV usage profile, aggregated over the
/// vehicles it represents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BevProfile {
    pub name: String,
    pub vehicles: f64,
    /// Electricity drawn from the vehicle battery while driving, MWh/h.
    pub driving_demand: HourlySeries,
    /// Connectable charger power while parked at home, MW.
    pub avail_home_mw: HourlySeries,
    /// Connectable charger power while parked away, MW.
    pub avail_away_mw: HourlySeries,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BevFleetSpec {
    pub battery_kwh_per_vehicle: f64,
    pub charger_home_kw: f64,
    pub charger_work_kw: f64,
    pub charger_public_kw: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub profiles: Vec<BevProfile>,
}

impl BevFleetSpec {
    pub fn battery_capacity_mwh(&self, profile: &BevProfile) -> f64 {
        profile.vehicles * self.battery_kwh_per_vehicle / 1000.0
    }

    pub fn total_driving_mwh(&self) -> f64 {
        self.profiles.iter().map(|p| p.driving_demand.sum()).sum()
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        for (label, eta) in [("charge", self.eta_charge), ("discharge", self.eta_discharge)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "BEV eta_{label} must lie in (0, 1], got {eta}"
                )));
            }
        }
        for p in &self.profiles {
            for (what, s) in [
                ("driving demand", &p.driving_demand),
                ("home availability", &p.avail_home_mw),
                ("away availability", &p.avail_away_mw),
            ] {
                s.expect_len(&format!("BEV profile {} {what}", p.name), horizon)?;
                if let Err((i, v)) = s.check_range(0.0, f64::INFINITY) {
                    return Err(Error::InvalidParameter(format!(
                        "BEV profile {}: {what}[{i}] = {v} is negative",
                        p.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Exogenous demand series consumed by the builder.
///
/// `prosumer_profile` is a single household's hourly load, normalized so it
/// sums to `per_household_load_mwh x horizon/8760`. Base load excludes
/// prosumer households; reference runs add their load to the grid balance
/// directly so total system demand matches prosumer runs.
#[derive(Debug, Clone)]
pub struct DemandBundle {
    pub horizon: usize,
    pub base_load: HourlySeries,
    pub heat_load: HourlySeries,
    pub hydrogen_offtake_mwh_per_h: f64,
    pub prosumer_profile: HourlySeries,
}

impl DemandBundle {
    pub fn validate(&self, cfg: &ScenarioConfig) -> Result<()> {
        self.base_load.expect_len("base load", self.horizon)?;
        self.heat_load.expect_len("heat load", self.horizon)?;
        self.prosumer_profile
            .expect_len("prosumer profile", self.horizon)?;
        for (what, s) in [("base load", &self.base_load), ("heat load", &self.heat_load)] {
            if let Err((i, v)) = s.check_range(0.0, f64::INFINITY) {
                return Err(Error::InvalidParameter(format!(
                    "{what}[{i}] = {v} is negative"
                )));
            }
        }
        let target = cfg.per_household_load_mwh * cfg.year_fraction();
        let sum = self.prosumer_profile.sum();
        if target > 0.0 && ((sum - target) / target).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "prosumer profile sums to {sum} MWh, expected {target} (per-household load x horizon/8760)"
            )));
        }
        Ok(())
    }

    /// Aggregate prosumer load d^p in MWh per hour.
    pub fn prosumer_load(&self, count: f64) -> HourlySeries {
        self.prosumer_profile.scaled(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn annuity_reference_values() {
        // r (1+r)^L / ((1+r)^L - 1) with 1.04^25 = 2.6658363314874200,
        // evaluated independently with 40-digit arithmetic.
        assert_relative_eq!(
            annuitize(1000.0, 0.04, 25).unwrap(),
            64.01196278645461,
            max_relative = 1e-12
        );
        assert_relative_eq!(annuitize(1000.0, 0.0, 25).unwrap(), 40.0);
        assert_relative_eq!(annuitize(500.0, 0.04, 1).unwrap(), 520.0, max_relative = 1e-12);
    }

    #[test]
    fn annuity_zero_lifetime_rejected() {
        assert!(annuitize(1000.0, 0.04, 0).is_err());
    }

    #[test]
    fn marginal_cost_stacks_fuel_and_carbon() {
        let spec = GenTechSpec {
            name: "coal".into(),
            cap_lower_mw: 0.0,
            cap_upper_mw: 100.0,
            interest_rate: 0.04,
            lifetime_yr: 40,
            overnight_cost_keur_per_mw: 4302.034,
            fixed_cost_keur_per_mw_yr: 56.39,
            variable_cost_eur_per_mwh: 3.667,
            efficiency: 0.405,
            carbon_content_t_per_mwh_fuel: 0.337,
            fuel_cost_eur_per_mwh_fuel: 9.25,
            availability: None,
            distributed: false,
        };
        let mc0 = spec.marginal_cost_eur_per_mwh(0.0);
        assert_relative_eq!(mc0, 3.667 + 9.25 / 0.405, max_relative = 1e-12);
        let mc100 = spec.marginal_cost_eur_per_mwh(100.0);
        assert_relative_eq!(mc100, mc0 + 100.0 * 0.337 / 0.405, max_relative = 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = test_config();
        cfg.omega = Some(1.2);
        assert!(cfg.validate().is_err());
        cfg.omega = Some(0.5);
        cfg.prosumer_count = 0.0;
        assert!(cfg.validate().is_err());
        cfg.prosumer_count = 10.0;
        cfg.horizon = 30;
        assert!(cfg.validate().is_err());
    }

    pub(crate) fn test_config() -> ScenarioConfig {
        ScenarioConfig {
            id: "test".into(),
            setup: Setup::NoBevs,
            horizon: 48,
            prosumer_count: 10.0,
            per_household_load_mwh: 5.0,
            rooftop_cap_per_household_kw: 15.0,
            omega: None,
            tariff: TariffScheme::fixed(200.0),
            feed_in_tariff_eur_per_mwh: 80.0,
            carbon_price_eur_per_t: 0.0,
            v2h_degradation_eur_per_mwh: 10.0,
            self_consumption_tiebreak_eur_per_mwh: 1e-3,
            cp_away_charging_adder: false,
        }
    }
}
