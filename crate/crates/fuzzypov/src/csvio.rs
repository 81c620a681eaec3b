//! Microdata CSV ingestion and export.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use fuzzypov_core::survey_data::{DesignInfo, DesignKind, Observation, SurveyDataset};
use serde::{Deserialize, Serialize};

/// Maps logical fields to header names. `unit_id` and `hh_id` are optional
/// in the file; missing ids default to the 1-based row number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schema {
    pub unit_id: String,
    pub hh_id: String,
    pub stratum: String,
    pub psu: String,
    pub area: String,
    pub weight: String,
    pub income: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            unit_id: "unit_id".into(),
            hh_id: "hh_id".into(),
            stratum: "stratum".into(),
            psu: "psu".into(),
            area: "area".into(),
            weight: "weight".into(),
            income: "income".into(),
        }
    }
}

/// One problem found while loading; `row` is the 1-based data row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub row: usize,
    pub error: fuzzypov_core::Error,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.error)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(fuzzypov_core::Error),
    #[error("{} invalid row(s)", .0.len())]
    Rows(Vec<RowError>),
}

impl LoadError {
    /// One line per problem.
    pub fn diagnostics(&self) -> Vec<String> {
        match self {
            LoadError::Rows(rows) => rows.iter().map(ToString::to_string).collect(),
            other => vec![other.to_string()],
        }
    }
}

pub fn load_csv(path: &Path, schema: &Schema, design: DesignInfo) -> Result<SurveyDataset, LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    read_csv(file, schema, design)
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

/// Reads and validates microdata, collecting every row-level problem before
/// failing.
pub fn read_csv<R: Read>(reader: R, schema: &Schema, design: DesignInfo) -> Result<SurveyDataset, LoadError> {
    use fuzzypov_core::Error as E;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let required = |name: &str| column(&headers, name).ok_or_else(|| LoadError::Invalid(E::MissingColumn(name.to_string())));
    let weight = required(&schema.weight)?;
    let income = required(&schema.income)?;
    let area = required(&schema.area)?;
    let (stratum, psu) = if design.kind == DesignKind::Complex {
        (Some(required(&schema.stratum)?), Some(required(&schema.psu)?))
    } else {
        (column(&headers, &schema.stratum), column(&headers, &schema.psu))
    };
    let unit_id = column(&headers, &schema.unit_id);
    let hh_id = column(&headers, &schema.hh_id);

    let mut obs = Vec::new();
    let mut problems = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let text = |c: Option<usize>| c.and_then(|c| record.get(c)).unwrap_or("").to_string();
        let number = |c: usize| record.get(c).and_then(|v| v.parse::<f64>().ok()).filter(|v| v.is_finite());
        let (w, y) = match (number(weight), number(income)) {
            (Some(w), Some(y)) => (w, y),
            _ => {
                problems.push(RowError { row, error: E::NonNumericField(row) });
                continue;
            }
        };
        let o = Observation {
            unit_id: unit_id.map_or_else(|| row.to_string(), |c| text(Some(c))),
            household_id: hh_id.map_or_else(|| row.to_string(), |c| text(Some(c))),
            stratum: text(stratum),
            psu: psu.map_or_else(|| row.to_string(), |c| text(Some(c))),
            area: text(Some(area)),
            weight: w,
            income: y,
        };
        let error = if y < 0.0 {
            Some(E::NegativeIncome(row))
        } else if w < 0.0 {
            Some(E::NegativeWeight(row))
        } else if o.area.is_empty() {
            Some(E::MissingArea(row))
        } else if design.kind == DesignKind::Complex && (o.stratum.is_empty() || o.psu.is_empty()) {
            Some(E::MissingDesignLabel(row))
        } else {
            None
        };
        match error {
            Some(error) => problems.push(RowError { row, error }),
            None => obs.push(o),
        }
    }
    if !problems.is_empty() {
        return Err(LoadError::Rows(problems));
    }
    SurveyDataset::new(obs, design).map_err(LoadError::Invalid)
}

/// Writes the dataset with the default header. Numbers use the shortest
/// representation that reads back to the same value.
pub fn write_csv<W: Write>(writer: W, dataset: &SurveyDataset) -> csv::Result<()> {
    let s = Schema::default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([&s.unit_id, &s.hh_id, &s.stratum, &s.psu, &s.area, &s.weight, &s.income])?;
    for o in dataset.observations() {
        w.write_record([
            o.unit_id.as_str(),
            o.household_id.as_str(),
            o.stratum.as_str(),
            o.psu.as_str(),
            o.area.as_str(),
            &o.weight.to_string(),
            &o.income.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
