//! Delimited score tables.
//!
//! A header row is required and must name `student_id`, `cohort`, `initial`
//! and `final`; column order is free and extra columns are ignored with a
//! warning. Every rejected row yields exactly one located [`RowError`].

use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result, RowError};
use crate::gain::{ScoreRecord, UnitScore};

pub const REQUIRED_COLUMNS: [&str; 4] = ["student_id", "cohort", "initial", "final"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    /// Scores in `[0, 100]`, divided by 100 on ingestion.
    #[default]
    Percent,
    /// Scores already in `[0, 1]`.
    Unit,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Percent => "percent",
            Scale::Unit => "unit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<ScoreRecord<f64>>,
    pub scale: Scale,
    pub source: String,
    pub warnings: Vec<String>,
}

/// Reads a score table from `path`.
pub fn ingest(path: impl AsRef<Path>, scale: Scale, delimiter: u8) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    ingest_reader(file, &path.display().to_string(), scale, delimiter)
}

/// Reads a score table from any reader; `source` names it in the dataset.
pub fn ingest_reader<R: Read>(reader: R, source: &str, scale: Scale, delimiter: u8) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = csv.headers().map_err(|e| csv_failure(e, source))?.clone();
    let mut warnings = Vec::new();
    let mut positions = [usize::MAX; 4];
    for (i, name) in header.iter().enumerate() {
        match REQUIRED_COLUMNS.iter().position(|c| c.eq_ignore_ascii_case(name)) {
            Some(k) if positions[k] == usize::MAX => positions[k] = i,
            Some(_) => {
                return Err(Error::InvalidRows(vec![RowError::Parse {
                    line: 1,
                    message: format!("column {name:?} appears more than once"),
                }]))
            }
            None => warnings.push(format!("ignoring unknown column {name:?}")),
        }
    }
    let missing: Vec<&str> = REQUIRED_COLUMNS
        .iter()
        .zip(positions)
        .filter(|(_, p)| *p == usize::MAX)
        .map(|(c, _)| *c)
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidRows(vec![RowError::Parse {
            line: 1,
            message: format!("header is missing column(s): {}", missing.join(", ")),
        }]));
    }

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for row in csv.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => match e.position() {
                Some(pos) => {
                    errors.push(RowError::Parse { line: pos.line(), message: e.to_string() });
                    continue;
                }
                None => return Err(csv_failure(e, source)),
            },
        };
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, &positions, line, scale) {
            Ok(record) => {
                if seen.insert((record.cohort.clone(), record.student_id.clone())) {
                    records.push(record);
                } else {
                    errors.push(RowError::DuplicateId { line, cohort: record.cohort, student_id: record.student_id });
                }
            }
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(Error::InvalidRows(errors));
    }
    Ok(Dataset { records, scale, source: source.to_string(), warnings })
}

fn csv_failure(e: csv::Error, source: &str) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io { path: source.into(), source: io },
        other => Error::InvalidRows(vec![RowError::Parse { line: 1, message: format!("{other:?}") }]),
    }
}

fn parse_row(row: &csv::StringRecord, positions: &[usize; 4], line: u64, scale: Scale) -> std::result::Result<ScoreRecord<f64>, RowError> {
    let field = |k: usize| -> std::result::Result<&str, RowError> {
        match row.get(positions[k]) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(RowError::Parse { line, message: format!("missing value for {}", REQUIRED_COLUMNS[k]) }),
        }
    };
    let student_id = field(0)?;
    let cohort = field(1)?;
    let initial = parse_score(field(2)?, REQUIRED_COLUMNS[2], line, scale)?;
    let final_score = parse_score(field(3)?, REQUIRED_COLUMNS[3], line, scale)?;
    ScoreRecord::new(student_id, cohort, initial, final_score)
        .map_err(|e| RowError::Parse { line, message: e.to_string() })
}

fn parse_score(text: &str, column: &str, line: u64, scale: Scale) -> std::result::Result<UnitScore<f64>, RowError> {
    let parsed = match scale {
        Scale::Unit => text.parse::<f64>().ok(),
        Scale::Percent => percent_to_unit(text),
    };
    let value = match parsed {
        Some(v) if v.is_finite() => v,
        _ => {
            return Err(RowError::Parse { line, message: format!("{column} value {text:?} is not a number") });
        }
    };
    UnitScore::new(value).map_err(|_| RowError::Range {
        line,
        column: column.to_string(),
        value: text.to_string(),
        scale: scale.name(),
    })
}

/// Parses a percentage and divides it by 100 by shifting its decimal
/// exponent, so `"73.3"` yields exactly the same `f64` as `"0.733"`.
pub fn percent_to_unit(text: &str) -> Option<f64> {
    let text = text.trim();
    if text.is_empty() || text.contains(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
        return None;
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    mantissa.parse::<f64>().ok()?;
    let shifted = exponent.checked_sub(2)?;
    format!("{mantissa}e{shifted}").parse().ok()
}
