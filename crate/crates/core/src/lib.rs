//! Agent-based simulation of photovoltaic adoption among dairy farmers.
//!
//! Each simulated year, a farmer's economic utility of installing PV (the
//! discounted value of energy savings, minus the installation cost, plus any
//! subsidy) is mapped through a capped logistic curve to a yearly adoption
//! probability. The [`calibration`] module fits the two logistic parameters
//! to observed adoption counts.

pub mod calibration;
pub mod cli;
pub mod domain;
pub mod economics;
pub mod engine;
pub mod error;
pub mod io;

pub use calibration::{calibrate, evaluate_loss, CalibrationResult, CalibrationTarget, Loss};
pub use domain::{
    AdoptionSemantics, AgentState, Mode, MoneyEur, ScenarioParams, SimulationResult, YearRecord,
    YearSeries,
};
pub use engine::{
    adoption_probability, run_monte_carlo, run_simulation, step_year, MonteCarloSummary,
    SimulationState,
};
pub use error::{Error, Result};
