//! Logistic adoption probability and the yearly simulation loop.
//!
//! Deterministic mode follows one representative agent (midpoint PV cost) and
//! tracks expected adopter counts. Stochastic mode keeps one agent per farmer
//! and draws adoption decisions from a seeded ChaCha8 stream, so runs are
//! reproducible across platforms.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::domain::{
    AdoptionSemantics, AgentState, Mode, MoneyEur, ScenarioParams, SimulationResult, YearRecord,
    YearSeries,
};
use crate::economics::{agent_utility, cost_utility};
use crate::error::{Error, Result, ValidationError};

/// `beta / (1 + exp(-alpha * utility / total_farmers))`, evaluated without overflow.
///
/// The result lies in `[0, beta]`; it only touches the bounds when the
/// logistic saturates in double precision.
pub fn adoption_probability(
    economic_utility: MoneyEur,
    alpha: f64,
    beta: f64,
    total_farmers: u32,
) -> Result<f64, ValidationError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(ValidationError::new("alpha", "must be finite and > 0"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(ValidationError::new("beta", "must be in (0, 1]"));
    }
    if total_farmers < 1 {
        return Err(ValidationError::new("total_farmers", "must be >= 1"));
    }
    Ok(logistic(
        alpha * economic_utility.value() / f64::from(total_farmers),
        beta,
    ))
}

fn logistic(x: f64, beta: f64) -> f64 {
    if x >= 0.0 {
        beta / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        beta * e / (1.0 + e)
    }
}

/// Uniform draw in `[0, 1)` from the top 53 bits of the next output word.
fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone)]
enum Population {
    Expected {
        cumulative: f64,
    },
    Agents {
        agents: Vec<AgentState>,
        rng: Box<ChaCha8Rng>,
    },
}

/// Loop state carried from one simulated year to the next.
#[derive(Debug, Clone)]
pub struct SimulationState {
    year: i32,
    population: Population,
}

impl SimulationState {
    /// State before the first year. Stochastic mode samples every agent's
    /// PV cost uniformly from the scenario range using the scenario seed.
    pub fn initial(params: &ScenarioParams) -> Result<Self> {
        params.validate()?;
        let population = match params.mode {
            Mode::Deterministic => Population::Expected { cumulative: 0.0 },
            Mode::Stochastic => {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                let min = params.pv_cost_min.value();
                let max = params.pv_cost_max.value();
                let agents = (0..params.total_farmers)
                    .map(|id| {
                        let cost = (min + (max - min) * unit_f64(&mut rng)).min(max);
                        AgentState::new(id, MoneyEur::new(cost)?, params)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Population::Agents {
                    agents,
                    rng: Box::new(rng),
                }
            }
        };
        Ok(Self {
            year: params.start_year,
            population,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn cumulative_adopters(&self) -> f64 {
        match &self.population {
            Population::Expected { cumulative } => *cumulative,
            Population::Agents { agents, .. } => {
                agents.iter().filter(|a| a.adopted()).count() as f64
            }
        }
    }

    /// Agents of a stochastic run; empty in deterministic mode.
    pub fn agents(&self) -> &[AgentState] {
        match &self.population {
            Population::Expected { .. } => &[],
            Population::Agents { agents, .. } => agents,
        }
    }
}

/// Advances the simulation by one year.
pub fn step_year(
    state: SimulationState,
    params: &ScenarioParams,
    prices: &YearSeries,
    subsidies: &YearSeries,
) -> Result<(SimulationState, YearRecord)> {
    let year = state.year;
    if !params.years().contains(&year) {
        return Err(ValidationError::new(
            "year",
            format!(
                "{year} is outside [{}, {}]",
                params.start_year, params.end_year
            ),
        )
        .into());
    }
    let price = prices.require(year)?;
    let subsidy = subsidies.require(year)?;
    let n = params.total_farmers;
    let total = f64::from(n);

    let (population, utility, probability, new, cumulative) = match state.population {
        Population::Expected { cumulative } => {
            let utility = cost_utility(params.midpoint_pv_cost(), params, price, subsidy)?;
            let p = adoption_probability(utility, params.alpha, params.beta, n)?;
            let (new, cumulative) = match params.adoption_semantics {
                AdoptionSemantics::Hazard => {
                    let new = p * (total - cumulative).max(0.0);
                    (new, (cumulative + new).min(total))
                }
                AdoptionSemantics::Literal => {
                    let level = p * total;
                    ((level - cumulative).max(0.0), level)
                }
            };
            (
                Population::Expected { cumulative },
                utility,
                p,
                new,
                cumulative,
            )
        }
        Population::Agents {
            mut agents,
            mut rng,
        } => {
            let mut utility_sum = 0.0;
            let mut prob_sum = 0.0;
            let mut new = 0u32;
            let mut cumulative = 0u32;
            for agent in agents.iter_mut() {
                let utility = agent_utility(agent, params, price, subsidy)?;
                let p = adoption_probability(utility, params.alpha, params.beta, n)?;
                utility_sum += utility.value();
                prob_sum += p;
                if !agent.adopted() && unit_f64(&mut rng) < p {
                    agent.adopt(year);
                    new += 1;
                }
                if agent.adopted() {
                    cumulative += 1;
                }
            }
            let count = agents.len().max(1) as f64;
            (
                Population::Agents { agents, rng },
                MoneyEur::new(utility_sum / count)?,
                // summing many saturated values can overshoot beta by an ulp
                (prob_sum / count).min(params.beta),
                f64::from(new),
                f64::from(cumulative),
            )
        }
    };

    let record = YearRecord {
        year,
        energy_price: price,
        subsidy,
        economic_utility: utility,
        probability,
        new_adopters: new,
        cumulative_adopters: cumulative,
    };
    Ok((
        SimulationState {
            year: year + 1,
            population,
        },
        record,
    ))
}

/// Runs every year from `start_year` to `end_year` inclusive.
pub fn run_simulation(
    params: &ScenarioParams,
    prices: &YearSeries,
    subsidies: &YearSeries,
) -> Result<SimulationResult> {
    let records = simulate_records(params, prices, subsidies)?;
    Ok(SimulationResult {
        params_digest: scenario_digest(params, prices, subsidies),
        records,
    })
}

pub(crate) fn simulate_records(
    params: &ScenarioParams,
    prices: &YearSeries,
    subsidies: &YearSeries,
) -> Result<Vec<YearRecord>> {
    params.validate()?;
    prices.check_coverage("price", params.start_year, params.end_year)?;
    subsidies.check_coverage("subsidy", params.start_year, params.end_year)?;
    let mut state = SimulationState::initial(params)?;
    let mut records = Vec::with_capacity(params.year_count());
    for _ in params.years() {
        let (next, record) = step_year(state, params, prices, subsidies)?;
        records.push(record);
        state = next;
    }
    Ok(records)
}

/// Short hex identifier of a scenario and its input series.
pub fn scenario_digest(
    params: &ScenarioParams,
    prices: &YearSeries,
    subsidies: &YearSeries,
) -> String {
    #[derive(Serialize)]
    struct Inputs<'a> {
        params: &'a ScenarioParams,
        prices: &'a YearSeries,
        subsidies: &'a YearSeries,
    }
    let bytes = serde_json::to_vec(&Inputs {
        params,
        prices,
        subsidies,
    })
    .expect("scenario inputs always serialize");
    let digest = Sha256::digest(&bytes);
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearStats {
    pub year: i32,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-year distribution of cumulative adopters over stochastic replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub replications: u32,
    pub base_seed: u64,
    pub years: Vec<YearStats>,
}

/// Runs `replications` stochastic simulations with seeds `base_seed + k`.
///
/// Replications run in parallel; statistics are reduced in replication order
/// so the summary does not depend on scheduling.
pub fn run_monte_carlo(
    params: &ScenarioParams,
    prices: &YearSeries,
    subsidies: &YearSeries,
    replications: u32,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    if replications < 1 {
        return Err(ValidationError::new("replications", "must be >= 1").into());
    }
    if params.mode != Mode::Stochastic {
        return Err(ValidationError::new("mode", "monte carlo requires stochastic mode").into());
    }
    params.validate()?;
    prices.check_coverage("price", params.start_year, params.end_year)?;
    subsidies.check_coverage("subsidy", params.start_year, params.end_year)?;

    let runs: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed.wrapping_add(u64::from(k));
            let run_params = ScenarioParams {
                seed,
                ..params.clone()
            };
            simulate_records(&run_params, prices, subsidies)
                .map(|records| records.iter().map(|r| r.cumulative_adopters).collect())
                .map_err(|e| Error::Replication {
                    seed,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let count = f64::from(replications);
    let years = params
        .years()
        .enumerate()
        .map(|(i, year)| {
            let values = runs.iter().map(|r| r[i]);
            let mean = values.clone().sum::<f64>() / count;
            let std_dev = if replications > 1 {
                (values.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
            } else {
                0.0
            };
            YearStats {
                year,
                mean,
                std_dev,
                min: values.clone().fold(f64::INFINITY, f64::min),
                max: values.fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();

    Ok(MonteCarloSummary {
        replications,
        base_seed,
        years,
    })
}
