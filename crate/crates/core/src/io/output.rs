//! CSV and JSON rendering of results. Reals carry six significant digits so
//! identical inputs always produce identical bytes.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::calibration::CalibrationResult;
use crate::domain::SimulationResult;
use crate::engine::MonteCarloSummary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy)]
pub enum ResultRef<'a> {
    Simulation(&'a SimulationResult),
    MonteCarlo(&'a MonteCarloSummary),
    Calibration(&'a CalibrationResult),
}

impl<'a> From<&'a SimulationResult> for ResultRef<'a> {
    fn from(r: &'a SimulationResult) -> Self {
        ResultRef::Simulation(r)
    }
}

impl<'a> From<&'a MonteCarloSummary> for ResultRef<'a> {
    fn from(r: &'a MonteCarloSummary) -> Self {
        ResultRef::MonteCarlo(r)
    }
}

impl<'a> From<&'a CalibrationResult> for ResultRef<'a> {
    fn from(r: &'a CalibrationResult) -> Self {
        ResultRef::Calibration(r)
    }
}

/// Shortest decimal text holding `x` to six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn sig6(x: f64) -> f64 {
    format_sig6(x).parse().expect("formatted number parses")
}

pub const SIMULATION_COLUMNS: [&str; 7] = [
    "year",
    "energy_price",
    "subsidy",
    "economic_utility",
    "probability",
    "new_adopters",
    "cumulative_adopters",
];

pub fn render(result: ResultRef<'_>, format: Format) -> String {
    match format {
        Format::Csv => render_csv(result),
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&to_json(result))
                .expect("json values always serialize");
            text.push('\n');
            text
        }
    }
}

fn render_csv(result: ResultRef<'_>) -> String {
    let mut out = String::new();
    match result {
        ResultRef::Simulation(r) => {
            out.push_str(&SIMULATION_COLUMNS.join(","));
            out.push('\n');
            for rec in &r.records {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    rec.year,
                    format_sig6(rec.energy_price.value()),
                    format_sig6(rec.subsidy.value()),
                    format_sig6(rec.economic_utility.value()),
                    format_sig6(rec.probability),
                    format_sig6(rec.new_adopters),
                    format_sig6(rec.cumulative_adopters),
                ));
            }
        }
        ResultRef::MonteCarlo(s) => {
            out.push_str("year,mean,std_dev,min,max\n");
            for y in &s.years {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    y.year,
                    format_sig6(y.mean),
                    format_sig6(y.std_dev),
                    format_sig6(y.min),
                    format_sig6(y.max),
                ));
            }
        }
        ResultRef::Calibration(c) => {
            out.push_str("alpha,beta,achieved_loss,grid_loss,evaluations,converged\n");
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                format_sig6(c.alpha),
                format_sig6(c.beta),
                format_sig6(c.achieved_loss),
                format_sig6(c.grid_loss),
                c.evaluations,
                c.converged,
            ));
        }
    }
    out
}

fn to_json(result: ResultRef<'_>) -> Value {
    match result {
        ResultRef::Simulation(r) => json!({
            "params_digest": r.params_digest,
            "records": r.records.iter().map(|rec| json!({
                "year": rec.year,
                "energy_price": sig6(rec.energy_price.value()),
                "subsidy": sig6(rec.subsidy.value()),
                "economic_utility": sig6(rec.economic_utility.value()),
                "probability": sig6(rec.probability),
                "new_adopters": sig6(rec.new_adopters),
                "cumulative_adopters": sig6(rec.cumulative_adopters),
            })).collect::<Vec<_>>(),
        }),
        ResultRef::MonteCarlo(s) => json!({
            "replications": s.replications,
            "base_seed": s.base_seed,
            "years": s.years.iter().map(|y| json!({
                "year": y.year,
                "mean": sig6(y.mean),
                "std_dev": sig6(y.std_dev),
                "min": sig6(y.min),
                "max": sig6(y.max),
            })).collect::<Vec<_>>(),
        }),
        // The fitted parameters are written at full precision so a follow-up
        // run reproduces the calibrated curve exactly.
        ResultRef::Calibration(c) => json!({
            "alpha": c.alpha,
            "beta": c.beta,
            "achieved_loss": sig6(c.achieved_loss),
            "grid_loss": sig6(c.grid_loss),
            "evaluations": c.evaluations,
            "converged": c.converged,
        }),
    }
}

/// Writes a rendered result to `path`, or to stdout when `path` is `None`.
/// Files are written to a temporary sibling first and renamed into place.
pub fn write_result<'a>(
    result: impl Into<ResultRef<'a>>,
    format: Format,
    path: Option<&Path>,
) -> Result<()> {
    let text = render(result.into(), format);
    match path {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|source| Error::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.flush().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}
