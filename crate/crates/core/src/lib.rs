//! Prosumer-aware power-system capacity expansion toolkit.
//!
//! Builds a central-planner investment and dispatch LP with an optional
//! behind-the-meter prosumer block governed by a self-generation constraint,
//! prices prosumer electricity bills under retail tariff schemes, searches
//! the self-generation rate that minimizes the bill, and validates the
//! approximation against an isolated prosumer bill-minimization LP.

pub mod error;
pub mod lp;
pub mod model;
pub mod series;
pub mod tariff;

pub use error::{Error, Result};
pub use series::HourlySeries;
