//! Year-indexed CSV files: `year,<value_column>` with a header row.

use std::io::Read;

use crate::calibration::{CalibrationTarget, Loss};
use crate::domain::YearSeries;
use crate::error::{Error, Position, SeriesError};

pub const PRICE_COLUMN: &str = "price_eur_per_kwh";
pub const SUBSIDY_COLUMN: &str = "subsidy_eur";
pub const TARGET_COLUMN: &str = "cumulative_adopters";

/// `(year, value)` rows plus the line number of each row.
type Rows = (Vec<(i32, f64)>, Vec<usize>);

/// Reads rows in strictly increasing year order.
fn parse_rows<R: Read>(input: R, value_column: &str) -> Result<Rows, SeriesError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| SeriesError::Malformed {
            at: Position::Line(1),
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(SeriesError::MissingHeader);
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| SeriesError::MissingColumn {
                column: name.to_string(),
            })
    };
    let year_idx = column("year")?;
    let value_idx = column(value_column)?;

    let mut rows: Vec<(i32, f64)> = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| SeriesError::Malformed {
            at: Position::Line(e.position().map_or(0, |p| p.line() as usize)),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let at = Position::Line(line);
        let year_text = record.get(year_idx).unwrap_or("");
        let year: i32 = year_text.parse().map_err(|_| SeriesError::BadYear {
            at,
            value: year_text.to_string(),
        })?;
        let value_text = record.get(value_idx).unwrap_or("");
        let value = value_text
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| SeriesError::BadNumber {
                at,
                value: value_text.to_string(),
            })?;
        if let Some(&(prev, _)) = rows.last() {
            if year == prev {
                return Err(SeriesError::DuplicateYear { at, year });
            }
            if year < prev {
                // an earlier duplicate is the more useful diagnosis
                if rows.iter().any(|(y, _)| *y == year) {
                    return Err(SeriesError::DuplicateYear { at, year });
                }
                return Err(SeriesError::OutOfOrder { at, year });
            }
        }
        rows.push((year, value));
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(SeriesError::Empty);
    }
    Ok((rows, lines))
}

/// Parses a contiguous year series from CSV text.
pub fn parse_year_series<R: Read>(input: R, value_column: &str) -> Result<YearSeries, SeriesError> {
    let (rows, lines) = parse_rows(input, value_column)?;
    if let Some(i) = rows.windows(2).position(|w| w[1].0 != w[0].0 + 1) {
        return Err(SeriesError::YearGap {
            at: Position::Line(lines[i + 1]),
            missing: rows[i].0 + 1,
        });
    }
    YearSeries::from_entries(rows)
}

/// Parses `year,cumulative_adopters` observations. Years need not be contiguous.
pub fn parse_target<R: Read>(input: R, loss: Loss) -> Result<CalibrationTarget, Error> {
    let (rows, _) = parse_rows(input, TARGET_COLUMN)?;
    Ok(CalibrationTarget::new(rows, loss)?)
}

/// Renders a series back to CSV using six significant digits.
pub fn write_year_series(series: &YearSeries, value_column: &str) -> String {
    let mut out = format!("year,{value_column}\n");
    for (year, value) in series.iter() {
        out.push_str(&format!(
            "{year},{}\n",
            super::output::format_sig6(value.value())
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<YearSeries, SeriesError> {
        parse_year_series(text.as_bytes(), PRICE_COLUMN)
    }

    #[test]
    fn parses_minimal_series() {
        let s = parse("year,price_eur_per_kwh\n2005,0.14\n2006,0.15").unwrap();
        assert_eq!(s.get(2005).unwrap().value(), 0.14);
        assert_eq!(s.get(2006).unwrap().value(), 0.15);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn gap_names_missing_year_and_line() {
        let err = parse("year,price_eur_per_kwh\n2005,0.14\n2007,0.15\n").unwrap_err();
        assert_eq!(
            err,
            SeriesError::YearGap {
                at: Position::Line(3),
                missing: 2006
            }
        );
        assert!(err.to_string().contains("2006"));
    }

    #[test]
    fn empty_input_has_no_header() {
        assert_eq!(parse(""), Err(SeriesError::MissingHeader));
        assert_eq!(parse("year,price_eur_per_kwh\n"), Err(SeriesError::Empty));
    }

    #[test]
    fn duplicate_and_bad_values_name_their_line() {
        assert_eq!(
            parse("year,price_eur_per_kwh\n2005,0.1\n2006,0.2\n2006,0.3\n"),
            Err(SeriesError::DuplicateYear {
                at: Position::Line(4),
                year: 2006
            })
        );
        assert!(matches!(
            parse("year,price_eur_per_kwh\n2005,0.1\n2006,0,2\n"),
            Err(SeriesError::Malformed {
                at: Position::Line(3),
                ..
            })
        ));
        assert_eq!(
            parse("year,price_eur_per_kwh\n2005,0.1\n2006,abc\n"),
            Err(SeriesError::BadNumber {
                at: Position::Line(3),
                value: "abc".into()
            })
        );
        assert!(matches!(
            parse("year,price_eur_per_kwh\n2005,NaN\n"),
            Err(SeriesError::BadNumber { .. })
        ));
        assert_eq!(
            parse("year,price_eur_per_kwh\n20x5,0.1\n"),
            Err(SeriesError::BadYear {
                at: Position::Line(2),
                value: "20x5".into()
            })
        );
    }

    #[test]
    fn wrong_column_is_reported() {
        assert_eq!(
            parse_year_series("year,subsidy_eur\n2005,1000\n".as_bytes(), PRICE_COLUMN),
            Err(SeriesError::MissingColumn {
                column: PRICE_COLUMN.into()
            })
        );
    }

    #[test]
    fn target_allows_sparse_years() {
        let t = parse_target(
            "year,cumulative_adopters\n2010,12\n2022,441\n".as_bytes(),
            Loss::SquaredError,
        )
        .unwrap();
        assert_eq!(t.observations(), &[(2010, 12.0), (2022, 441.0)]);
    }

    proptest! {
        #[test]
        fn write_then_parse_keeps_six_digits(
            start in 1950i32..2050,
            values in prop::collection::vec(-1e7f64..1e7, 1..30),
        ) {
            let series = YearSeries::from_entries(
                values.iter().enumerate().map(|(i, v)| (start + i as i32, *v)),
            ).unwrap();
            let text = write_year_series(&series, SUBSIDY_COLUMN);
            let back = parse_year_series(text.as_bytes(), SUBSIDY_COLUMN).unwrap();
            prop_assert_eq!(back.len(), series.len());
            for ((y1, v1), (y2, v2)) in series.iter().zip(back.iter()) {
                prop_assert_eq!(y1, y2);
                let (a, b) = (v1.value(), v2.value());
                prop_assert!((a - b).abs() <= 5e-6 * a.abs());
            }
            // a second pass is exact
            let again = parse_year_series(write_year_series(&back, SUBSIDY_COLUMN).as_bytes(), SUBSIDY_COLUMN).unwrap();
            prop_assert_eq!(again, back);
        }
    }
}
