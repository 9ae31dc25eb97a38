//! Bivariate datasets: in-memory representation, CSV round-trip, and the
//! descriptive-statistics block used by the goodness-of-fit report.
//!
//! CSV schema: header `r,s,is_singular` (the flag column is optional on
//! input and carried through when present), one row per observation, floats
//! written in shortest round-trip form. Files written by this module
//! re-parse to bit-identical datasets.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observation. The flag records whether the *sampler* placed the pair on
/// the singular curve; data from outside sources usually has no flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateSample {
    pub r: f64,
    pub s: f64,
    pub is_singular: Option<bool>,
}

impl BivariateSample {
    pub fn new(r: f64, s: f64, is_singular: Option<bool>) -> Result<Self> {
        for (name, v) in [("r", r), ("s", s)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        Ok(Self { r, s, is_singular })
    }
}

/// A validated collection of observations (at least one row, all coordinates
/// non-negative and finite).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<BivariateSample>,
}

impl Dataset {
    pub fn new(rows: Vec<BivariateSample>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Domain("a dataset needs at least one row".into()));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[BivariateSample] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one row
    }

    /// Whether any row carries a singular flag.
    pub fn has_flags(&self) -> bool {
        self.rows.iter().any(|row| row.is_singular.is_some())
    }

    /// A copy with all flags removed, as if the data had come from a plain
    /// two-column file. Used to put bootstrap resamples on the same footing
    /// as unflagged real data.
    pub fn without_flags(&self) -> Dataset {
        Dataset {
            rows: self
                .rows
                .iter()
                .map(|row| BivariateSample { is_singular: None, ..*row })
                .collect(),
        }
    }

    pub fn r_column(&self) -> Vec<f64> {
        self.rows.iter().map(|row| row.r).collect()
    }

    pub fn s_column(&self) -> Vec<f64> {
        self.rows.iter().map(|row| row.s).collect()
    }

    /// Parse from CSV. The header must start with `r,s`; a third
    /// `is_singular` column is accepted and preserved. Parse failures carry
    /// the 1-based line number (header included).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(csv_error)?.clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        let with_flag = match cols.as_slice() {
            ["r", "s"] => false,
            ["r", "s", "is_singular"] => true,
            other => {
                return Err(Error::CsvParse {
                    line: 1,
                    message: format!(
                        "expected header 'r,s' or 'r,s,is_singular', got '{}'",
                        other.join(",")
                    ),
                })
            }
        };

        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(csv_error)?;
            let line = record
                .position()
                .map(|pos| pos.line())
                .unwrap_or(rows.len() as u64 + 2);
            if record.len() != cols.len() {
                return Err(Error::CsvParse {
                    line,
                    message: format!("expected {} fields, got {}", cols.len(), record.len()),
                });
            }
            let parse_f64 = |field: &str, name: &str| -> Result<f64> {
                field.trim().parse::<f64>().map_err(|_| Error::CsvParse {
                    line,
                    message: format!("cannot parse {name} value '{field}' as a number"),
                })
            };
            let r = parse_f64(&record[0], "r")?;
            let s = parse_f64(&record[1], "s")?;
            let is_singular = if with_flag {
                Some(parse_flag(record[2].trim()).ok_or_else(|| Error::CsvParse {
                    line,
                    message: format!("cannot parse is_singular value '{}'", &record[2]),
                })?)
            } else {
                None
            };
            let sample = BivariateSample::new(r, s, is_singular).map_err(|e| Error::CsvParse {
                line,
                message: e.to_string(),
            })?;
            rows.push(sample);
        }
        Dataset::new(rows)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Dataset> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Write as CSV. The `is_singular` column is emitted only when every row
    /// carries a flag (sampler output); mixed or absent flags write the plain
    /// two-column schema.
    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let all_flagged = self.rows.iter().all(|row| row.is_singular.is_some());
        let mut wtr = csv::Writer::from_writer(writer);
        if all_flagged {
            wtr.write_record(["r", "s", "is_singular"]).map_err(csv_error)?;
            for row in &self.rows {
                wtr.write_record([
                    format_float(row.r),
                    format_float(row.s),
                    row.is_singular.unwrap().to_string(),
                ])
                .map_err(csv_error)?;
            }
        } else {
            wtr.write_record(["r", "s"]).map_err(csv_error)?;
            for row in &self.rows {
                wtr.write_record([format_float(row.r), format_float(row.s)])
                    .map_err(csv_error)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.to_csv_writer(std::io::BufWriter::new(file))
    }
}

/// Shortest decimal representation that round-trips to the same f64; Rust's
/// default float formatting provides exactly that guarantee.
pub(crate) fn format_float(x: f64) -> String {
    format!("{x}")
}

fn parse_flag(s: &str) -> Option<bool> {
    match s {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = match e.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    Error::CsvParse { line, message: e.to_string() }
}

/// Five-number summary plus mean and standard deviation for one variable.
/// Quartiles use linear interpolation between order statistics (the R
/// type-7 convention): at probability p the value is
/// `x[(n-1)p]` interpolated between neighbors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VariableSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    pub sd: f64,
}

/// Compute the summary of one column.
pub fn summarize(values: &[f64]) -> Result<VariableSummary> {
    if values.is_empty() {
        return Err(Error::Domain("cannot summarize an empty column".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("summaries require finite values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Ok(VariableSummary {
        n,
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        mean,
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        sd: var.sqrt(),
    })
}

/// Type-7 quantile of an ascending slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}
