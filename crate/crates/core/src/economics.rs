//! Savings, discounting and economic utility of a PV installation.
//!
//! Yearly savings are the value of the generated energy at the decision-year
//! price minus yearly maintenance, held constant over the horizon. The utility
//! of installing is the discounted value of those savings, minus the upfront
//! cost, plus any subsidy.

use crate::domain::{AgentState, MoneyEur, ScenarioParams};
use crate::error::ValidationError;

/// Yearly savings `R_t` for `t = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SavingsSeries(Vec<MoneyEur>);

impl SavingsSeries {
    pub fn new(values: Vec<MoneyEur>) -> Result<Self, ValidationError> {
        if values.is_empty() {
            return Err(ValidationError::new(
                "savings",
                "needs at least the t = 0 term",
            ));
        }
        Ok(Self(values))
    }

    /// The same saving in every period `t = 0..=horizon_years`.
    pub fn constant(value: MoneyEur, horizon_years: u32) -> Self {
        Self(vec![value; horizon_years as usize + 1])
    }

    pub fn horizon_years(&self) -> u32 {
        (self.0.len() - 1) as u32
    }

    pub fn values(&self) -> &[MoneyEur] {
        &self.0
    }
}

/// Energy value minus maintenance for one year. Can be negative.
pub fn annual_savings(
    generation_kwh: f64,
    energy_price: MoneyEur,
    pv_cost: MoneyEur,
    maintenance_rate: f64,
) -> Result<MoneyEur, ValidationError> {
    if !(generation_kwh.is_finite() && generation_kwh >= 0.0) {
        return Err(ValidationError::new(
            "generation_kwh",
            "must be finite and >= 0",
        ));
    }
    if energy_price.value() < 0.0 {
        return Err(ValidationError::new("energy_price", "must be >= 0"));
    }
    if !(0.0..1.0).contains(&maintenance_rate) {
        return Err(ValidationError::new(
            "maintenance_rate",
            "must be in [0, 1)",
        ));
    }
    let energy = generation_kwh * energy_price.value();
    MoneyEur::new(energy - maintenance_rate * pv_cost.value())
}

/// Sum of `R_t / (1 + i)^t`, accumulated in ascending `t`.
pub fn net_present_value(
    savings: &SavingsSeries,
    discount_rate: f64,
) -> Result<MoneyEur, ValidationError> {
    if !(discount_rate.is_finite() && discount_rate > -1.0) {
        return Err(ValidationError::new(
            "discount_rate",
            "must be finite and > -1",
        ));
    }
    let base = 1.0 + discount_rate;
    let mut total = 0.0;
    for (t, r) in savings.values().iter().enumerate() {
        total += r.value() / base.powi(t as i32);
    }
    MoneyEur::new(total)
}

pub fn economic_utility(
    npv: MoneyEur,
    initial_investment: MoneyEur,
    subsidy: MoneyEur,
) -> MoneyEur {
    npv - initial_investment + subsidy
}

/// Utility of installing for one agent given this year's price and subsidy.
pub fn agent_utility(
    agent: &AgentState,
    params: &ScenarioParams,
    energy_price: MoneyEur,
    subsidy: MoneyEur,
) -> Result<MoneyEur, ValidationError> {
    cost_utility(agent.pv_cost, params, energy_price, subsidy)
}

pub(crate) fn cost_utility(
    pv_cost: MoneyEur,
    params: &ScenarioParams,
    energy_price: MoneyEur,
    subsidy: MoneyEur,
) -> Result<MoneyEur, ValidationError> {
    let saving = annual_savings(
        params.annual_generation_kwh,
        energy_price,
        pv_cost,
        params.maintenance_rate,
    )?;
    let npv = net_present_value(
        &SavingsSeries::constant(saving, params.horizon_years),
        params.discount_rate,
    )?;
    Ok(economic_utility(npv, pv_cost, subsidy))
}
