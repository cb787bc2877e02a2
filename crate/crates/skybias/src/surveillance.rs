//! File-backed surveillance store and per-utterance context retrieval.
//!
//! Aircraft transponders broadcast callsign, position, and time; an offline
//! dump of those sightings stands in for a live surveillance query service,
//! which keeps batch runs hermetic and reproducible. A [`ContextQuery`] asks
//! "which callsigns were near this recording around this moment": a time
//! window plus a degree box around the receiver, matching the bounding-box
//! style of public surveillance APIs.

use std::collections::HashSet;
use std::io::{BufRead, Read, Write};

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::callsign::{
    build_context_phrases, parse_icao, AirlineTable, IcaoCallsign, VerbalizeOptions,
    VerbalizedPhrase,
};

#[derive(Debug, Error)]
pub enum SurveillanceError {
    #[error("missing or invalid CSV header: expected {expected:?}, found {found:?}")]
    MissingHeader {
        expected: &'static str,
        found: String,
    },
    #[error("row {row}: invalid {field} value {value:?}")]
    InvalidField {
        row: usize,
        field: &'static str,
        value: String,
    },
    #[error("row {row}: {field} value {value} out of range")]
    OutOfRange {
        row: usize,
        field: &'static str,
        value: f64,
    },
    #[error("row {row}: empty callsign")]
    EmptyCallsign { row: usize },
    #[error("row {row}: duplicate utterance id {utt_id:?}")]
    DuplicateUttId { row: usize, utt_id: String },
    #[error("line {line}: invalid context record: {source}")]
    InvalidContext {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: duplicate context for utterance {utt_id:?}")]
    DuplicateContext { line: usize, utt_id: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One transponder sighting.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveillanceRecord {
    pub callsign: String,
    /// Unix seconds.
    pub time: i64,
    pub lat: f64,
    pub lon: f64,
}

/// Time-sorted sightings supporting window scans. Duplicates are allowed.
#[derive(Debug, Clone, Default)]
pub struct SurveillanceStore {
    records: Vec<SurveillanceRecord>,
}

/// Time window and degree box around an utterance.
#[derive(Debug, Clone, Copy)]
pub struct ContextQuery {
    /// Unix seconds.
    pub center_time: i64,
    /// Window half-width in seconds (> 0).
    pub half_window: i64,
    pub center_lat: f64,
    pub center_lon: f64,
    /// Box half-width in degrees (> 0), applied to both axes.
    pub radius_deg: f64,
}

fn check_range(
    row: usize,
    field: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
) -> Result<f64, SurveillanceError> {
    if !value.is_finite() || value < lo || value > hi {
        return Err(SurveillanceError::OutOfRange { row, field, value });
    }
    Ok(value)
}

fn expect_header(
    headers: &csv::StringRecord,
    expected: &'static str,
) -> Result<(), SurveillanceError> {
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    let wanted: Vec<&str> = expected.split(',').collect();
    if found != wanted {
        return Err(SurveillanceError::MissingHeader {
            expected,
            found: found.join(","),
        });
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    raw: &str,
    row: usize,
    field: &'static str,
) -> Result<T, SurveillanceError> {
    raw.trim()
        .parse::<T>()
        .map_err(|_| SurveillanceError::InvalidField {
            row,
            field,
            value: raw.to_string(),
        })
}

impl SurveillanceStore {
    /// Reads `callsign,time,lat,lon` CSV, validating every row. Rows are
    /// sorted by time; input order is kept among equal timestamps.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, SurveillanceError> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        expect_header(csv_reader.headers()?, "callsign,time,lat,lon")?;
        let mut records = Vec::new();
        for (idx, result) in csv_reader.records().enumerate() {
            let row = idx + 2;
            let record = result?;
            let callsign = record.get(0).unwrap_or("").trim().to_string();
            if callsign.is_empty() {
                return Err(SurveillanceError::EmptyCallsign { row });
            }
            let time: i64 = parse_field(record.get(1).unwrap_or(""), row, "time")?;
            let lat: f64 = parse_field(record.get(2).unwrap_or(""), row, "lat")?;
            let lon: f64 = parse_field(record.get(3).unwrap_or(""), row, "lon")?;
            records.push(SurveillanceRecord {
                callsign,
                time,
                lat: check_range(row, "lat", lat, -90.0, 90.0)?,
                lon: check_range(row, "lon", lon, -180.0, 180.0)?,
            });
        }
        Ok(Self::from_records(records))
    }

    /// Builds a store from in-memory records (sorted by time, stably).
    pub fn from_records(mut records: Vec<SurveillanceRecord>) -> Self {
        records.sort_by_key(|r| r.time);
        SurveillanceStore { records }
    }

    pub fn records(&self) -> &[SurveillanceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Callsigns sighted within the query window and box, deduplicated,
    /// ordered by first sighting time. Sightings whose callsign is not a
    /// usable ICAO string are skipped.
    pub fn query(&self, query: &ContextQuery) -> Vec<IcaoCallsign> {
        let lo = query.center_time.saturating_sub(query.half_window);
        let hi = query.center_time.saturating_add(query.half_window);
        let start = self.records.partition_point(|r| r.time < lo);
        let end = self.records.partition_point(|r| r.time <= hi);

        let mut seen: IndexSet<String> = IndexSet::new();
        let mut out = Vec::new();
        for record in &self.records[start..end] {
            if (record.lat - query.center_lat).abs() > query.radius_deg
                || (record.lon - query.center_lon).abs() > query.radius_deg
            {
                continue;
            }
            let Ok(callsign) = parse_icao(&record.callsign) else {
                continue;
            };
            if seen.insert(callsign.raw().to_string()) {
                out.push(callsign);
            }
        }
        out
    }
}

/// One row of the utterance metadata CSV: where and when it was recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceMeta {
    pub utt_id: String,
    pub time: i64,
    pub lat: f64,
    pub lon: f64,
}

/// Reads `utt_id,time,lat,lon` CSV, in file order. Duplicate ids are errors.
pub fn load_utterance_meta<R: Read>(reader: R) -> Result<Vec<UtteranceMeta>, SurveillanceError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    expect_header(csv_reader.headers()?, "utt_id,time,lat,lon")?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, result) in csv_reader.records().enumerate() {
        let row = idx + 2;
        let record = result?;
        let utt_id = record.get(0).unwrap_or("").trim().to_string();
        if utt_id.is_empty() {
            return Err(SurveillanceError::InvalidField {
                row,
                field: "utt_id",
                value: String::new(),
            });
        }
        if !seen.insert(utt_id.clone()) {
            return Err(SurveillanceError::DuplicateUttId { row, utt_id });
        }
        let time: i64 = parse_field(record.get(1).unwrap_or(""), row, "time")?;
        let lat: f64 = parse_field(record.get(2).unwrap_or(""), row, "lat")?;
        let lon: f64 = parse_field(record.get(3).unwrap_or(""), row, "lon")?;
        out.push(UtteranceMeta {
            utt_id,
            time,
            lat: check_range(row, "lat", lat, -90.0, 90.0)?,
            lon: check_range(row, "lon", lon, -180.0, 180.0)?,
        });
    }
    Ok(out)
}

/// Knobs for context retrieval.
#[derive(Debug, Clone, Copy)]
pub struct ContextOptions {
    pub half_window_s: i64,
    pub radius_deg: f64,
    pub verbalize: VerbalizeOptions,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            half_window_s: 60,
            radius_deg: 0.5,
            verbalize: VerbalizeOptions::default(),
        }
    }
}

/// Retrieved context for one utterance: candidate callsigns and their
/// verbalized phrases.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceContext {
    pub utt_id: String,
    pub callsigns: Vec<IcaoCallsign>,
    pub phrases: Vec<VerbalizedPhrase>,
}

impl UtteranceContext {
    /// True when surveillance produced no candidates for this utterance.
    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

/// Runs the context query for every utterance in `meta` and expands the
/// retrieved callsigns into phrases. Output order follows `meta`.
pub fn build_utterance_contexts(
    store: &SurveillanceStore,
    meta: &[UtteranceMeta],
    table: &AirlineTable,
    options: &ContextOptions,
) -> Vec<UtteranceContext> {
    meta.iter()
        .map(|m| {
            let callsigns = store.query(&ContextQuery {
                center_time: m.time,
                half_window: options.half_window_s,
                center_lat: m.lat,
                center_lon: m.lon,
                radius_deg: options.radius_deg,
            });
            let phrases = build_context_phrases(&callsigns, table, &options.verbalize);
            UtteranceContext {
                utt_id: m.utt_id.clone(),
                callsigns,
                phrases,
            }
        })
        .collect()
}

/// Line-delimited JSON form of an utterance context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRecord {
    pub utt_id: String,
    pub callsigns: Vec<String>,
    pub phrases: Vec<Vec<String>>,
}

impl From<&UtteranceContext> for ContextRecord {
    fn from(ctx: &UtteranceContext) -> Self {
        ContextRecord {
            utt_id: ctx.utt_id.clone(),
            callsigns: ctx.callsigns.iter().map(|c| c.raw().to_string()).collect(),
            phrases: ctx.phrases.iter().map(|p| p.words().to_vec()).collect(),
        }
    }
}

/// Writes contexts as line-delimited JSON, one record per utterance.
pub fn write_contexts<'a, W: Write + ?Sized>(
    contexts: impl IntoIterator<Item = &'a UtteranceContext>,
    writer: &mut W,
) -> Result<(), SurveillanceError> {
    for context in contexts {
        let record = ContextRecord::from(context);
        serde_json::to_writer(&mut *writer, &record)
            .map_err(|e| SurveillanceError::Io(e.into()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads line-delimited JSON contexts, keyed by utterance id in file order.
pub fn read_contexts<R: BufRead>(
    reader: R,
) -> Result<IndexMap<String, ContextRecord>, SurveillanceError> {
    let mut out = IndexMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ContextRecord =
            serde_json::from_str(&line).map_err(|source| SurveillanceError::InvalidContext {
                line: line_no,
                source,
            })?;
        let utt_id = record.utt_id.clone();
        if out.insert(utt_id.clone(), record).is_some() {
            return Err(SurveillanceError::DuplicateContext {
                line: line_no,
                utt_id,
            });
        }
    }
    Ok(out)
}
