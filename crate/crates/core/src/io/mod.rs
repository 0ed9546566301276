//! Scenario files, CSV series and result serialization.

pub mod config;
pub mod output;
pub mod series;

pub use config::{load_scenario, LoadedScenario};
pub use output::{format_sig6, render, write_result, Format, ResultRef};
pub use series::{parse_target, parse_year_series, write_year_series};
