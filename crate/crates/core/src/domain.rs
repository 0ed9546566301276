//! Shared domain types: money, year-indexed series, scenario parameters,
//! agents and per-year simulation records.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Position, SeriesError, ValidationError};

/// A finite amount of euros. Also used for per-kWh prices.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MoneyEur(f64);

impl MoneyEur {
    pub const ZERO: MoneyEur = MoneyEur(0.0);

    pub fn new(value: f64) -> Result<Self, ValidationError> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(ValidationError::new(
                "money",
                format!("{value} is not finite"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MoneyEur {
    type Error = ValidationError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<MoneyEur> for f64 {
    fn from(m: MoneyEur) -> f64 {
        m.0
    }
}

impl fmt::Display for MoneyEur {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} EUR", self.0)
    }
}

impl Add for MoneyEur {
    type Output = MoneyEur;
    fn add(self, rhs: MoneyEur) -> MoneyEur {
        MoneyEur(self.0 + rhs.0)
    }
}

impl Sub for MoneyEur {
    type Output = MoneyEur;
    fn sub(self, rhs: MoneyEur) -> MoneyEur {
        MoneyEur(self.0 - rhs.0)
    }
}

impl Neg for MoneyEur {
    type Output = MoneyEur;
    fn neg(self) -> MoneyEur {
        MoneyEur(-self.0)
    }
}

impl Mul<f64> for MoneyEur {
    type Output = MoneyEur;
    fn mul(self, rhs: f64) -> MoneyEur {
        MoneyEur(self.0 * rhs)
    }
}

/// Money values keyed by calendar year over a contiguous, gap-free range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearSeries {
    entries: BTreeMap<i32, MoneyEur>,
}

impl YearSeries {
    /// Builds a series from `(year, value)` pairs given in strictly increasing,
    /// contiguous year order.
    pub fn from_entries<I>(entries: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (i32, f64)>,
    {
        let mut map = BTreeMap::new();
        let mut prev: Option<i32> = None;
        for (idx, (year, value)) in entries.into_iter().enumerate() {
            let at = Position::Entry(idx);
            if !value.is_finite() {
                return Err(SeriesError::BadNumber {
                    at,
                    value: value.to_string(),
                });
            }
            if let Some(p) = prev {
                if year == p {
                    return Err(SeriesError::DuplicateYear { at, year });
                }
                if year < p {
                    return Err(SeriesError::OutOfOrder { at, year });
                }
                if year > p + 1 {
                    return Err(SeriesError::YearGap { at, missing: p + 1 });
                }
            }
            map.insert(year, MoneyEur(value));
            prev = Some(year);
        }
        if map.is_empty() {
            return Err(SeriesError::Empty);
        }
        Ok(Self { entries: map })
    }

    /// A series holding the same value for every year in `[first, last]`.
    pub fn constant(first: i32, last: i32, value: f64) -> Result<Self, SeriesError> {
        Self::from_entries((first..=last).map(|y| (y, value)))
    }

    pub fn first_year(&self) -> i32 {
        *self.entries.keys().next().expect("series is never empty")
    }

    pub fn last_year(&self) -> i32 {
        *self
            .entries
            .keys()
            .next_back()
            .expect("series is never empty")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, year: i32) -> Option<MoneyEur> {
        self.entries.get(&year).copied()
    }

    pub fn require(&self, year: i32) -> Result<MoneyEur, SeriesError> {
        self.get(year).ok_or(SeriesError::MissingYear { year })
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, MoneyEur)> + '_ {
        self.entries.iter().map(|(y, v)| (*y, *v))
    }

    /// Checks that every year in `[start, end]` has a value.
    pub fn check_coverage(&self, name: &str, start: i32, end: i32) -> Result<(), SeriesError> {
        let missing: Vec<i32> = (start..=end).filter(|y| self.get(*y).is_none()).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(SeriesError::CoverageGap {
                series: name.to_string(),
                missing,
            })
        }
    }

    /// A copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(y, v)| (*y, *v * factor))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AdoptionSemantics {
    /// The yearly probability applies to farmers who have not adopted yet.
    #[default]
    Hazard,
    /// The yearly probability times the population is the cumulative level.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One representative agent, expected adopter counts.
    #[default]
    Deterministic,
    /// One agent per farmer with seeded Bernoulli adoption draws.
    Stochastic,
}

/// Every input of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub pv_cost_min: MoneyEur,
    pub pv_cost_max: MoneyEur,
    /// Yearly maintenance as a fraction of PV cost.
    pub maintenance_rate: f64,
    pub discount_rate: f64,
    pub total_farmers: u32,
    pub start_year: i32,
    pub end_year: i32,
    /// Last discounting period; savings run over `t = 0..=horizon_years`.
    pub horizon_years: u32,
    pub annual_generation_kwh: f64,
    pub alpha: f64,
    pub beta: f64,
    pub adoption_semantics: AdoptionSemantics,
    pub mode: Mode,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            pv_cost_min: MoneyEur(5_000.0),
            pv_cost_max: MoneyEur(15_000.0),
            maintenance_rate: 0.02,
            discount_rate: 0.04,
            total_farmers: 18_000,
            start_year: 2005,
            end_year: 2022,
            horizon_years: 20,
            annual_generation_kwh: 6_000.0,
            alpha: 1.0,
            beta: 0.01,
            adoption_semantics: AdoptionSemantics::Hazard,
            mode: Mode::Deterministic,
            seed: 0,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let min = self.pv_cost_min.value();
        let max = self.pv_cost_max.value();
        if min < 0.0 {
            return Err(ValidationError::new("pv_cost_min", "must be >= 0"));
        }
        if max < min {
            return Err(ValidationError::new(
                "pv_cost_max",
                format!("must be >= pv_cost_min ({min})"),
            ));
        }
        if !(0.0..1.0).contains(&self.maintenance_rate) {
            return Err(ValidationError::new(
                "maintenance_rate",
                format!("{} is outside [0, 1)", self.maintenance_rate),
            ));
        }
        if !(self.discount_rate.is_finite() && self.discount_rate > -1.0) {
            return Err(ValidationError::new(
                "discount_rate",
                format!("{} must be finite and > -1", self.discount_rate),
            ));
        }
        if self.total_farmers < 1 {
            return Err(ValidationError::new("total_farmers", "must be >= 1"));
        }
        if self.start_year > self.end_year {
            return Err(ValidationError::new(
                "end_year",
                format!("{} is before start_year {}", self.end_year, self.start_year),
            ));
        }
        if !(self.annual_generation_kwh.is_finite() && self.annual_generation_kwh >= 0.0) {
            return Err(ValidationError::new(
                "annual_generation_kwh",
                format!("{} must be finite and >= 0", self.annual_generation_kwh),
            ));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ValidationError::new(
                "alpha",
                format!("{} must be finite and > 0", self.alpha),
            ));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(ValidationError::new(
                "beta",
                format!("{} is outside the bound (0, 1]", self.beta),
            ));
        }
        if self.mode == Mode::Stochastic && self.adoption_semantics == AdoptionSemantics::Literal {
            return Err(ValidationError::new(
                "adoption_semantics",
                "literal semantics is only defined for deterministic mode",
            ));
        }
        Ok(())
    }

    /// Cost of the representative agent used in deterministic mode.
    pub fn midpoint_pv_cost(&self) -> MoneyEur {
        MoneyEur(0.5 * (self.pv_cost_min.value() + self.pv_cost_max.value()))
    }

    pub fn years(&self) -> std::ops::RangeInclusive<i32> {
        self.start_year..=self.end_year
    }

    pub fn year_count(&self) -> usize {
        (self.end_year - self.start_year + 1) as usize
    }
}

/// One farmer.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: u32,
    pub pv_cost: MoneyEur,
    adoption_year: Option<i32>,
}

impl AgentState {
    pub fn new(
        id: u32,
        pv_cost: MoneyEur,
        params: &ScenarioParams,
    ) -> Result<Self, ValidationError> {
        if pv_cost < params.pv_cost_min || pv_cost > params.pv_cost_max {
            return Err(ValidationError::new(
                "pv_cost",
                format!(
                    "{} is outside [{}, {}]",
                    pv_cost.value(),
                    params.pv_cost_min.value(),
                    params.pv_cost_max.value()
                ),
            ));
        }
        Ok(Self {
            id,
            pv_cost,
            adoption_year: None,
        })
    }

    pub fn adopted(&self) -> bool {
        self.adoption_year.is_some()
    }

    pub fn adoption_year(&self) -> Option<i32> {
        self.adoption_year
    }

    pub(crate) fn adopt(&mut self, year: i32) {
        debug_assert!(self.adoption_year.is_none());
        self.adoption_year = Some(year);
    }
}

/// Outcome of one simulated year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearRecord {
    pub year: i32,
    /// EUR per kWh.
    pub energy_price: MoneyEur,
    pub subsidy: MoneyEur,
    pub economic_utility: MoneyEur,
    pub probability: f64,
    pub new_adopters: f64,
    pub cumulative_adopters: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub params_digest: String,
    pub records: Vec<YearRecord>,
}

impl SimulationResult {
    pub fn final_record(&self) -> Option<&YearRecord> {
        self.records.last()
    }

    /// Final-year cumulative adopters, rounded half-up to a whole farmer count.
    pub fn final_adopters_rounded(&self) -> Option<u64> {
        self.final_record()
            .map(|r| round_half_up(r.cumulative_adopters) as u64)
    }

    pub fn cumulative(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.records.iter().map(|r| (r.year, r.cumulative_adopters))
    }
}

pub fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// Difference between two adopter counts as percentage points of the population.
///
/// ```
/// use pv_adoption::domain::percentage_point_gap;
/// let gap = percentage_point_gap(441.0, 360.0, 18_000);
/// assert!((gap - 0.45).abs() < 1e-12);
/// assert!((percentage_point_gap(441.0, 0.0, 18_000) - 2.45).abs() < 1e-12);
/// ```
pub fn percentage_point_gap(modelled: f64, observed: f64, population: u32) -> f64 {
    (modelled - observed).abs() / f64::from(population) * 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn money_rejects_non_finite() {
        assert!(MoneyEur::new(f64::NAN).is_err());
        assert!(MoneyEur::new(f64::INFINITY).is_err());
        assert_eq!(MoneyEur::new(-3.5).unwrap().value(), -3.5);
    }

    #[test]
    fn series_lookup_inside_and_outside_range() {
        let s = YearSeries::from_entries([(2005, 0.14), (2006, 0.15), (2007, 0.16)]).unwrap();
        for y in 2005..=2007 {
            assert!(s.require(y).is_ok());
        }
        assert_eq!(
            s.require(2004),
            Err(SeriesError::MissingYear { year: 2004 })
        );
        assert_eq!(
            s.require(2008),
            Err(SeriesError::MissingYear { year: 2008 })
        );
        assert_eq!((s.first_year(), s.last_year(), s.len()), (2005, 2007, 3));
    }

    #[test]
    fn series_rejects_duplicates_gaps_and_disorder() {
        assert_eq!(
            YearSeries::from_entries([(2005, 1.0), (2005, 2.0)]),
            Err(SeriesError::DuplicateYear {
                at: Position::Entry(1),
                year: 2005
            })
        );
        assert_eq!(
            YearSeries::from_entries([(2005, 1.0), (2007, 2.0)]),
            Err(SeriesError::YearGap {
                at: Position::Entry(1),
                missing: 2006
            })
        );
        assert!(matches!(
            YearSeries::from_entries([(2006, 1.0), (2005, 2.0)]),
            Err(SeriesError::OutOfOrder { year: 2005, .. })
        ));
        assert_eq!(
            YearSeries::from_entries(Vec::<(i32, f64)>::new()),
            Err(SeriesError::Empty)
        );
    }

    #[test]
    fn coverage_lists_every_missing_year() {
        let s = YearSeries::constant(2010, 2022, 0.2).unwrap();
        match s.check_coverage("price", 2005, 2022) {
            Err(SeriesError::CoverageGap { missing, .. }) => {
                assert_eq!(missing, (2005..=2009).collect::<Vec<_>>())
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn defaults_are_valid() {
        let p = ScenarioParams::default();
        p.validate().unwrap();
        assert_eq!(p.midpoint_pv_cost().value(), 10_000.0);
        assert_eq!(p.year_count(), 18);
    }

    #[test]
    fn validation_names_offending_field() {
        let cases: Vec<(ScenarioParams, &str)> = vec![
            (
                ScenarioParams {
                    beta: 0.0,
                    ..Default::default()
                },
                "beta",
            ),
            (
                ScenarioParams {
                    beta: 1.5,
                    ..Default::default()
                },
                "beta",
            ),
            (
                ScenarioParams {
                    alpha: 0.0,
                    ..Default::default()
                },
                "alpha",
            ),
            (
                ScenarioParams {
                    total_farmers: 0,
                    ..Default::default()
                },
                "total_farmers",
            ),
            (
                ScenarioParams {
                    maintenance_rate: 1.0,
                    ..Default::default()
                },
                "maintenance_rate",
            ),
            (
                ScenarioParams {
                    discount_rate: -1.0,
                    ..Default::default()
                },
                "discount_rate",
            ),
            (
                ScenarioParams {
                    end_year: 2000,
                    ..Default::default()
                },
                "end_year",
            ),
            (
                ScenarioParams {
                    pv_cost_max: MoneyEur(4_000.0),
                    ..Default::default()
                },
                "pv_cost_max",
            ),
            (
                ScenarioParams {
                    pv_cost_min: MoneyEur(-1.0),
                    ..Default::default()
                },
                "pv_cost_min",
            ),
            (
                ScenarioParams {
                    annual_generation_kwh: -1.0,
                    ..Default::default()
                },
                "annual_generation_kwh",
            ),
        ];
        for (params, field) in cases {
            assert_eq!(params.validate().unwrap_err().field, field);
        }
        let err = ScenarioParams {
            beta: 1.5,
            ..Default::default()
        }
        .validate()
        .unwrap_err();
        assert!(err.to_string().contains("(0, 1]"));
    }

    #[test]
    fn agent_cost_must_be_in_range_and_adoption_year_tracks_status() {
        let p = ScenarioParams::default();
        assert!(AgentState::new(0, MoneyEur(4_999.0), &p).is_err());
        let mut a = AgentState::new(1, MoneyEur(7_500.0), &p).unwrap();
        assert!(!a.adopted());
        a.adopt(2010);
        assert!(a.adopted());
        assert_eq!(a.adoption_year(), Some(2010));
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_half_up(440.5), 441.0);
        assert_eq!(round_half_up(440.49), 440.0);
        assert_eq!(round_half_up(441.0), 441.0);
    }
}
