//! Fitting `alpha` and `beta` to observed cumulative adoption.
//!
//! A log-spaced grid over the parameter bounds picks a starting cell, then a
//! compass search in log-parameter space polishes it. Everything runs the
//! deterministic hazard simulation, so the objective is a pure function.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{AdoptionSemantics, Mode, ScenarioParams, YearSeries};
use crate::engine::simulate_records;
use crate::error::{Error, Result, ValidationError};

pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    SquaredError,
    AbsoluteError,
}

impl Loss {
    fn apply(self, residual: f64) -> f64 {
        match self {
            Loss::SquaredError => residual * residual,
            Loss::AbsoluteError => residual.abs(),
        }
    }
}

/// Observed `(year, cumulative_adopters)` pairs and how to score misses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationTarget {
    observations: Vec<(i32, f64)>,
    pub loss: Loss,
}

impl CalibrationTarget {
    pub fn new(observations: Vec<(i32, f64)>, loss: Loss) -> Result<Self, ValidationError> {
        if observations.is_empty() {
            return Err(ValidationError::new(
                "target",
                "needs at least one observation",
            ));
        }
        if let Some((year, v)) = observations
            .iter()
            .find(|(_, v)| !(v.is_finite() && *v >= 0.0))
        {
            return Err(ValidationError::new(
                "target",
                format!("adopters for {year} must be finite and >= 0, got {v}"),
            ));
        }
        Ok(Self { observations, loss })
    }

    pub fn observations(&self) -> &[(i32, f64)] {
        &self.observations
    }

    /// Checks observation years and values against a scenario.
    pub fn validate_for(&self, params: &ScenarioParams) -> Result<(), ValidationError> {
        let total = f64::from(params.total_farmers);
        for &(year, v) in &self.observations {
            if !params.years().contains(&year) {
                return Err(ValidationError::new(
                    "target",
                    format!(
                        "year {year} is outside [{}, {}]",
                        params.start_year, params.end_year
                    ),
                ));
            }
            if v > total {
                return Err(ValidationError::new(
                    "target",
                    format!("{v} adopters in {year} exceeds total_farmers {total}"),
                ));
            }
        }
        Ok(())
    }

    /// Loss of a perfect miss: every simulated value at zero.
    pub fn scale(&self) -> f64 {
        self.observations
            .iter()
            .map(|(_, v)| self.loss.apply(*v))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            alpha: (1e-3, 100.0),
            beta: (1e-5, 1.0),
        }
    }
}

impl Bounds {
    fn check(&self, alpha: f64, beta: f64) -> Result<(), ValidationError> {
        if !(alpha >= self.alpha.0 && alpha <= self.alpha.1) {
            return Err(ValidationError::new(
                "alpha",
                format!("{alpha} is outside [{}, {}]", self.alpha.0, self.alpha.1),
            ));
        }
        if !(beta >= self.beta.0 && beta <= self.beta.1) {
            return Err(ValidationError::new(
                "beta",
                format!("{beta} is outside [{}, {}]", self.beta.0, self.beta.1),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub bounds: Bounds,
    /// Points per parameter axis.
    pub grid_size: usize,
    /// Final compass step, in natural-log units of each parameter.
    pub tolerance: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            bounds: Bounds::default(),
            grid_size: 20,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub alpha: f64,
    pub beta: f64,
    pub achieved_loss: f64,
    /// Best loss on the starting grid.
    pub grid_loss: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Loss of the deterministic hazard run at `(alpha, beta)`.
pub fn evaluate_loss(
    candidate: (f64, f64),
    params: &ScenarioParams,
    prices: &YearSeries,
    subsidies: &YearSeries,
    target: &CalibrationTarget,
) -> Result<f64> {
    Bounds::default().check(candidate.0, candidate.1)?;
    target.validate_for(params)?;
    loss_at(candidate, params, prices, subsidies, target)
}

fn loss_at(
    (alpha, beta): (f64, f64),
    params: &ScenarioParams,
    prices: &YearSeries,
    subsidies: &YearSeries,
    target: &CalibrationTarget,
) -> Result<f64> {
    let run = ScenarioParams {
        alpha,
        beta,
        mode: Mode::Deterministic,
        adoption_semantics: AdoptionSemantics::Hazard,
        ..params.clone()
    };
    let records = simulate_records(&run, prices, subsidies)?;
    let start = params.start_year;
    Ok(target
        .observations
        .iter()
        .map(|&(year, observed)| {
            let simulated = records[(year - start) as usize].cumulative_adopters;
            target.loss.apply(simulated - observed)
        })
        .sum())
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    alpha: f64,
    beta: f64,
    loss: f64,
}

impl Candidate {
    fn key(&self) -> f64 {
        if self.loss.is_nan() {
            f64::INFINITY
        } else {
            self.loss
        }
    }

    /// Lowest loss, then smallest alpha, then smallest beta.
    fn order(&self, other: &Candidate) -> Ordering {
        self.key()
            .total_cmp(&other.key())
            .then(self.alpha.total_cmp(&other.alpha))
            .then(self.beta.total_cmp(&other.beta))
    }
}

fn log_grid((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

pub fn calibrate(
    params: &ScenarioParams,
    prices: &YearSeries,
    subsidies: &YearSeries,
    target: &CalibrationTarget,
    budget: usize,
) -> Result<CalibrationResult> {
    calibrate_with(
        params,
        prices,
        subsidies,
        target,
        budget,
        &CalibrationOptions::default(),
    )
}

pub fn calibrate_with(
    params: &ScenarioParams,
    prices: &YearSeries,
    subsidies: &YearSeries,
    target: &CalibrationTarget,
    budget: usize,
    options: &CalibrationOptions,
) -> Result<CalibrationResult> {
    params.validate()?;
    target.validate_for(params)?;
    prices.check_coverage("price", params.start_year, params.end_year)?;
    subsidies.check_coverage("subsidy", params.start_year, params.end_year)?;
    let bounds = options.bounds;
    if !(bounds.alpha.0 > 0.0
        && bounds.alpha.0 <= bounds.alpha.1
        && bounds.beta.0 > 0.0
        && bounds.beta.0 <= bounds.beta.1
        && bounds.beta.1 <= 1.0)
    {
        return Err(ValidationError::new("bounds", "need 0 < lo <= hi, beta hi <= 1").into());
    }
    if options.grid_size < 1 {
        return Err(ValidationError::new("grid_size", "must be >= 1").into());
    }
    let grid_points = options.grid_size * options.grid_size;
    if budget < grid_points {
        return Err(ValidationError::new(
            "budget",
            format!("{budget} is smaller than the {grid_points} grid points"),
        )
        .into());
    }

    let alphas = log_grid(bounds.alpha, options.grid_size);
    let betas = log_grid(bounds.beta, options.grid_size);
    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|a| betas.iter().map(move |b| (*a, *b)))
        .collect();
    let scored = cells
        .par_iter()
        .map(|&(alpha, beta)| {
            loss_at((alpha, beta), params, prices, subsidies, target).map(|loss| Candidate {
                alpha,
                beta,
                loss,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if scored.iter().all(|c| !c.loss.is_finite()) {
        return Err(Error::Calibration(
            "loss is not finite at any grid point".to_string(),
        ));
    }
    let mut best = *scored
        .iter()
        .min_by(|a, b| a.order(b))
        .expect("grid is never empty");
    let grid_loss = best.loss;
    let mut evaluations = grid_points;

    let spacing = |(lo, hi): (f64, f64)| {
        if options.grid_size > 1 && hi > lo {
            (hi.ln() - lo.ln()) / (options.grid_size - 1) as f64
        } else {
            1.0
        }
    };
    let mut step = [spacing(bounds.alpha), spacing(bounds.beta)];
    let mut converged = false;

    'search: loop {
        if step[0].max(step[1]) < options.tolerance {
            converged = true;
            break;
        }
        let (la, lb) = (best.alpha.ln(), best.beta.ln());
        let probes = [
            (la + step[0], lb),
            (la - step[0], lb),
            (la, lb + step[1]),
            (la, lb - step[1]),
        ];
        let mut improved: Option<Candidate> = None;
        for (pa, pb) in probes {
            let alpha = pa.exp().clamp(bounds.alpha.0, bounds.alpha.1);
            let beta = pb.exp().clamp(bounds.beta.0, bounds.beta.1);
            if alpha == best.alpha && beta == best.beta {
                continue;
            }
            if evaluations >= budget {
                break 'search;
            }
            evaluations += 1;
            let loss = loss_at((alpha, beta), params, prices, subsidies, target)?;
            let probe = Candidate { alpha, beta, loss };
            if probe.key() < best.key()
                && improved.is_none_or(|c| probe.order(&c) == Ordering::Less)
            {
                improved = Some(probe);
            }
        }
        match improved {
            Some(c) => best = c,
            None => {
                step[0] *= 0.5;
                step[1] *= 0.5;
            }
        }
    }

    Ok(CalibrationResult {
        alpha: best.alpha,
        beta: best.beta,
        achieved_loss: best.loss,
        grid_loss,
        evaluations,
        converged,
    })
}
