//! Scenario files: a flat TOML table of [`ScenarioParams`] fields plus the
//! paths of the input series. Paths are resolved against the config file's
//! directory.
//!
//! ```toml
//! total_farmers = 18000
//! alpha = 1.0
//! beta = 0.01
//! prices = "data/prices.csv"
//! subsidies = "data/subsidies.csv"
//! target = "data/target.csv"   # optional
//! ```

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::calibration::{CalibrationTarget, Loss};
use crate::domain::{ScenarioParams, YearSeries};
use crate::error::{Error, Result};
use crate::io::series::{parse_target, parse_year_series, PRICE_COLUMN, SUBSIDY_COLUMN};

/// Subsidy range observed over the study period; values outside it only warn.
pub const SUBSIDY_RANGE: (f64, f64) = (1_000.0, 3_500.0);

#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub params: ScenarioParams,
    pub prices: YearSeries,
    pub subsidies: YearSeries,
    pub target: Option<CalibrationTarget>,
    pub warnings: Vec<String>,
}

const PATH_KEYS: [&str; 3] = ["prices", "subsidies", "target"];

pub fn load_scenario(config_path: &Path) -> Result<LoadedScenario> {
    let text = std::fs::read_to_string(config_path).map_err(|source| Error::Read {
        path: config_path.to_path_buf(),
        source,
    })?;
    let config_err = |message: String| Error::Config {
        path: config_path.to_path_buf(),
        message,
    };
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| config_err(e.to_string()))?;

    let mut paths: [Option<PathBuf>; 3] = Default::default();
    for (slot, key) in paths.iter_mut().zip(PATH_KEYS) {
        if let Some(value) = table.remove(key) {
            let s = value
                .as_str()
                .ok_or_else(|| config_err(format!("`{key}` must be a string path")))?;
            *slot = Some(resolve(config_path, s));
        }
    }
    let [prices_path, subsidies_path, target_path] = paths;
    let prices_path = prices_path.ok_or_else(|| config_err("missing key `prices`".into()))?;
    let subsidies_path =
        subsidies_path.ok_or_else(|| config_err("missing key `subsidies`".into()))?;

    let params: ScenarioParams = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| config_err(e.message().to_string()))?;
    params.validate().map_err(|e| config_err(e.to_string()))?;

    let prices = read_series(&prices_path, PRICE_COLUMN)?;
    let subsidies = read_series(&subsidies_path, SUBSIDY_COLUMN)?;
    for (path, series, name) in [
        (&prices_path, &prices, "price"),
        (&subsidies_path, &subsidies, "subsidy"),
    ] {
        series
            .check_coverage(name, params.start_year, params.end_year)
            .map_err(|source| Error::SeriesFile {
                path: path.clone(),
                source,
            })?;
    }
    let target = target_path.map(|p| read_target(&p, &params)).transpose()?;

    let warnings = subsidy_warnings(&subsidies, &params);
    Ok(LoadedScenario {
        params,
        prices,
        subsidies,
        target,
        warnings,
    })
}

fn resolve(config_path: &Path, relative: &str) -> PathBuf {
    let p = Path::new(relative);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config_path
            .parent()
            .unwrap_or_else(|| Path::new(""))
            .join(p)
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_series(path: &Path, column: &str) -> Result<YearSeries> {
    parse_year_series(open(path)?, column).map_err(|source| Error::SeriesFile {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a target file and checks it against the scenario.
pub fn read_target(path: &Path, params: &ScenarioParams) -> Result<CalibrationTarget> {
    let target = parse_target(open(path)?, Loss::SquaredError).map_err(|e| match e {
        Error::Series(source) => Error::SeriesFile {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Config {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    target.validate_for(params).map_err(|e| Error::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(target)
}

fn subsidy_warnings(subsidies: &YearSeries, params: &ScenarioParams) -> Vec<String> {
    let (lo, hi) = SUBSIDY_RANGE;
    params
        .years()
        .filter_map(|y| subsidies.get(y).map(|v| (y, v.value())))
        .filter(|(_, v)| *v < lo || *v > hi)
        .map(|(y, v)| format!("subsidy {v} EUR in {y} is outside the usual {lo}-{hi} EUR range"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::SeriesError;
    use std::fs;

    fn write_fixture(dir: &Path, config: &str) -> PathBuf {
        let data = dir.join("data");
        fs::create_dir_all(&data).unwrap();
        let mut prices = String::from("year,price_eur_per_kwh\n");
        let mut subs = String::from("year,subsidy_eur\n");
        for y in 2005..=2022 {
            prices.push_str(&format!("{y},0.15\n"));
            subs.push_str(&format!("{y},2000\n"));
        }
        fs::write(data.join("prices.csv"), prices).unwrap();
        fs::write(data.join("subsidies.csv"), subs).unwrap();
        fs::write(
            data.join("target.csv"),
            "year,cumulative_adopters\n2022,441\n",
        )
        .unwrap();
        let path = dir.join("scenario.toml");
        fs::write(&path, config).unwrap();
        path
    }

    const BASE: &str = "prices = \"data/prices.csv\"\nsubsidies = \"data/subsidies.csv\"\n";

    #[test]
    fn loads_with_defaults_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_fixture(
            dir.path(),
            &format!("{BASE}target = \"data/target.csv\"\nalpha = 2.5\n"),
        );
        let s = load_scenario(&path).unwrap();
        assert_eq!(s.params.alpha, 2.5);
        assert_eq!(s.params.total_farmers, 18_000);
        assert_eq!(s.prices.len(), 18);
        assert_eq!(s.target.unwrap().observations(), &[(2022, 441.0)]);
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_fixture(dir.path(), &format!("{BASE}bta = 0.1\n"));
        let err = load_scenario(&path).unwrap_err().to_string();
        assert!(err.contains("bta"), "{err}");
    }

    #[test]
    fn invalid_beta_names_field_and_bound() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_fixture(dir.path(), &format!("{BASE}beta = 1.5\n"));
        let err = load_scenario(&path).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let msg = err.to_string();
        assert!(msg.contains("beta") && msg.contains("(0, 1]"), "{msg}");
        assert!(msg.contains("scenario.toml"), "{msg}");
    }

    #[test]
    fn wrong_type_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_fixture(dir.path(), &format!("{BASE}total_farmers = \"many\"\n"));
        assert!(matches!(load_scenario(&path), Err(Error::Config { .. })));
    }

    #[test]
    fn coverage_gap_lists_missing_years() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_fixture(dir.path(), &format!("{BASE}start_year = 2000\n"));
        match load_scenario(&path) {
            Err(Error::SeriesFile {
                path,
                source: SeriesError::CoverageGap { missing, .. },
            }) => {
                assert!(path.ends_with("prices.csv"));
                assert_eq!(missing, (2000..=2004).collect::<Vec<_>>());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_files_name_the_path() {
        let err = load_scenario(Path::new("/nonexistent/missing.toml")).unwrap_err();
        assert!(err.to_string().contains("missing.toml"));
        assert_eq!(err.exit_code(), 1);

        let dir = tempfile::tempdir().unwrap();
        let path = write_fixture(
            dir.path(),
            "prices = \"nope.csv\"\nsubsidies = \"data/subsidies.csv\"\n",
        );
        let err = load_scenario(&path).unwrap_err();
        assert!(err.to_string().contains("nope.csv"));
        let path = write_fixture(dir.path(), "prices = \"data/prices.csv\"\n");
        assert!(load_scenario(&path)
            .unwrap_err()
            .to_string()
            .contains("subsidies"));
    }

    #[test]
    fn out_of_range_subsidy_only_warns() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_fixture(dir.path(), BASE);
        fs::write(
            dir.path().join("data/subsidies.csv"),
            (2005..=2022).fold(String::from("year,subsidy_eur\n"), |mut s, y| {
                s.push_str(&format!("{y},{}\n", if y == 2020 { 5000 } else { 2000 }));
                s
            }),
        )
        .unwrap();
        let s = load_scenario(&path).unwrap();
        assert_eq!(s.warnings.len(), 1);
        assert!(s.warnings[0].contains("2020"));
    }
}
