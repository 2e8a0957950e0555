//! File formats and deterministic serialization.
//!
//! * model file: `{"n": int, "s": int, "mu": [n^(s+1) floats]}` in
//!   lexicographic tuple order; loading validates stationarity and reports
//!   the violation on rejection.
//! * path file: one path per line, symbols as space-separated integers.
//! * census file: array of `{"counts": [...], "cardinality": int}` sorted
//!   lexicographically by counts.
//!
//! JSON emitted here prints every float with 17 significant digits
//! (scientific form), so equal runs produce byte-identical output.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::KTupleDistribution;
use crate::error::{Error, Result};
use crate::ldp::EventSet;
use crate::model::{MarkovModel, SamplePath};
use crate::type_classes::TypeCensus;

/// serde_json formatter printing floats as `d.dddddddddddddddde[+-]d`
/// (17 significant digits).
struct SciFloatFormatter;

impl serde_json::ser::Formatter for SciFloatFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.8e}")
    }
}

/// Serializes with the 17-significant-digit float formatter.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut out, SciFloatFormatter);
    value.serialize(&mut serializer)?;
    Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
}

/// One float with 17 significant digits, with explicit infinities (for CSV
/// cells and log columns).
pub fn format_float(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else if value > 0.0 {
        "inf".to_string()
    } else if value < 0.0 {
        "-inf".to_string()
    } else {
        "nan".to_string()
    }
}

/// Serializer helper for fields that may legitimately be infinite: finite
/// values stay numbers, infinities become the strings "inf" / "-inf".
pub mod maybe_infinite {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(
        value: &f64,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        if value.is_finite() {
            serializer.serialize_f64(*value)
        } else if *value > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: usize,
    pub s: usize,
    pub mu: Vec<f64>,
}

/// Parses and validates a model description; stationarity violations are
/// rejected with the measured violation in the error.
pub fn model_from_json(text: &str) -> Result<MarkovModel<f64>> {
    model_from_json_with(text, None)
}

/// Same with an optional validation-tolerance override (applied to both the
/// sum-to-one and stationarity checks).
pub fn model_from_json_with(text: &str, tolerance: Option<f64>) -> Result<MarkovModel<f64>> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.s == 0 {
        return Err(Error::InvalidInput(
            "model memory s must be at least 1".into(),
        ));
    }
    match tolerance {
        None => {
            let mu = KTupleDistribution::new(file.n, file.s + 1, file.mu)?;
            MarkovModel::from_distribution(mu)
        }
        Some(tolerance) => {
            let mu =
                KTupleDistribution::with_sum_tolerance(file.n, file.s + 1, file.mu, tolerance)?;
            MarkovModel::from_distribution_with_tolerance(mu, tolerance)
        }
    }
}

pub fn model_to_json(model: &MarkovModel<f64>) -> Result<String> {
    let file = ModelFile {
        n: model.n(),
        s: model.s(),
        mu: model.mu().as_slice().to_vec(),
    };
    to_json(&file)
}

pub fn load_model(path: &Path) -> Result<MarkovModel<f64>> {
    model_from_json(&std::fs::read_to_string(path)?)
}

/// Parses a path file (one path per line, space-separated symbols). The
/// alphabet size is explicit or inferred as max symbol + 1 over the file.
pub fn paths_from_text(text: &str, n: Option<usize>) -> Result<Vec<SamplePath>> {
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut symbols = Vec::new();
        for token in trimmed.split_whitespace() {
            let symbol: usize = token.parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "line {}: '{token}' is not a nonnegative integer",
                    line_no + 1
                ))
            })?;
            symbols.push(symbol);
        }
        rows.push(symbols);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("path file contains no paths".into()));
    }
    let alphabet = match n {
        Some(n) => n,
        None => rows.iter().flatten().max().copied().unwrap_or(0) + 1,
    };
    rows.into_iter()
        .map(|symbols| SamplePath::new(alphabet, symbols))
        .collect()
}

pub fn path_to_line(path: &SamplePath) -> String {
    path.symbols()
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CensusEntry {
    counts: Vec<u64>,
    cardinality: u64,
}

/// Census as the documented array schema, already sorted by counts.
pub fn census_to_json(census: &TypeCensus) -> Result<String> {
    let entries: Vec<CensusEntry> = census
        .iter()
        .map(|(counts, cardinality)| CensusEntry {
            counts: counts.to_vec(),
            cardinality,
        })
        .collect();
    to_json(&entries)
}

/// Reads a census array back; `s` disambiguates the tuple order and the
/// alphabet size is recovered from the vector length.
pub fn census_from_json(text: &str, s: usize) -> Result<TypeCensus> {
    let entries: Vec<CensusEntry> = serde_json::from_str(text)?;
    let first = entries
        .first()
        .ok_or_else(|| Error::InvalidInput("census file has no classes".into()))?;
    let len = first.counts.len();
    let n = integer_root(len, s + 1).ok_or_else(|| {
        Error::InvalidInput(format!(
            "census entries have {len} cells, which is not an integer power n^{}",
            s + 1
        ))
    })?;
    let l: u64 = first.counts.iter().sum();
    TypeCensus::from_entries(
        n,
        s,
        l,
        entries.into_iter().map(|e| (e.counts, e.cardinality)),
    )
}

fn integer_root(value: usize, degree: usize) -> Option<usize> {
    for root in 1..=value {
        let mut power = 1usize;
        for _ in 0..degree {
            power = power.checked_mul(root)?;
            if power > value {
                break;
            }
        }
        if power == value {
            return Some(root);
        }
        if power > value {
            return None;
        }
    }
    None
}

pub fn event_from_json(text: &str) -> Result<EventSet> {
    Ok(serde_json::from_str(text)?)
}
