//! Scenario assembly: configuration files, CSV ingestion, synthetic BEV
//! profiles, result persistence and the bundled toy system.

pub mod bev;
pub mod config;
pub mod store;
pub mod tables;
pub mod timeseries;
pub mod toy;

pub use crate::model::DemandBundle;

use crate::error::Result;
use crate::lp::backend::{solve_with, SolveOptions};
use crate::lp::LpSolution;
use crate::model::{
    build_central_planner, BevFleetSpec, CentralPlannerModel, GenTechSpec, HydrogenChainSpec,
    ScenarioConfig, StorageTechSpec,
};

/// Everything needed to build and evaluate one scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub gens: Vec<GenTechSpec>,
    pub storages: Vec<StorageTechSpec>,
    pub hydrogen: Option<HydrogenChainSpec>,
    pub bev: Option<BevFleetSpec>,
    pub demand: DemandBundle,
}

impl Scenario {
    /// Build the central-planner LP, optionally overriding the configured
    /// self-generation rate (`Some(None)` is not representable here: pass
    /// `None` to keep the config value).
    pub fn build_cp(&self, omega: Option<f64>) -> Result<CentralPlannerModel> {
        let mut cfg = self.config.clone();
        if omega.is_some() {
            cfg.omega = omega;
        }
        build_central_planner(
            &cfg,
            &self.gens,
            &self.storages,
            self.hydrogen.as_ref(),
            self.bev.as_ref(),
            &self.demand,
        )
    }

    /// Build a reference run (no prosumer block) regardless of the config.
    pub fn build_reference(&self) -> Result<CentralPlannerModel> {
        let mut cfg = self.config.clone();
        cfg.omega = None;
        build_central_planner(
            &cfg,
            &self.gens,
            &self.storages,
            self.hydrogen.as_ref(),
            self.bev.as_ref(),
            &self.demand,
        )
    }

    /// Build and solve in one step.
    pub fn solve_cp(
        &self,
        omega: Option<f64>,
        backend: &str,
        options: &SolveOptions,
    ) -> Result<(CentralPlannerModel, LpSolution)> {
        let model = self.build_cp(omega)?;
        let sol = solve_with(backend, &model.problem, options)?;
        Ok((model, sol))
    }

    pub fn rooftop(&self) -> Option<&GenTechSpec> {
        self.gens.iter().find(|g| g.distributed)
    }

    pub fn home_battery(&self) -> Option<&StorageTechSpec> {
        self.storages.iter().find(|s| !s.grid_coupled)
    }
}
