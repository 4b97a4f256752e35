// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Project record ingestion.
//!
//! Records arrive as canonical CSV (`project_id,firm_id,org_id,start_year`
//! with a header row) or JSON Lines carrying the same four keys. Malformed
//! rows do not abort parsing; they are reported as [`RecordError`] values
//! next to the records that parsed. Row numbers count data rows from 1 (the
//! CSV header is not counted).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::graph::{BipartiteGraph, GraphBuilder, NodeRef};

pub const CSV_HEADER: [&str; 4] = ["project_id", "firm_id", "org_id", "start_year"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub project_id: String,
    pub firm_id: String,
    pub org_id: String,
    pub start_year: i32,
}

impl ProjectRecord {
    pub fn new(project_id: &str, firm_id: &str, org_id: &str, start_year: i32) -> Self {
        ProjectRecord {
            project_id: project_id.to_owned(),
            firm_id: firm_id.to_owned(),
            org_id: org_id.to_owned(),
            start_year,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    #[default]
    Csv,
    JsonLines,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" | "json-lines" | "ndjson" => Ok(InputFormat::JsonLines),
            other => Err(format!("unknown input format '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordErrorKind {
    EmptyField(&'static str),
    MissingField(&'static str),
    BadYear(String),
    YearOutOfRange(i32),
    FieldCount(usize),
    DuplicateId(String),
    Malformed(String),
}

impl fmt::Display for RecordErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordErrorKind::EmptyField(name) => write!(f, "empty field {name}"),
            RecordErrorKind::MissingField(name) => write!(f, "missing field {name}"),
            RecordErrorKind::BadYear(raw) => write!(f, "bad year '{raw}'"),
            RecordErrorKind::YearOutOfRange(y) => write!(f, "year {y} out of range"),
            RecordErrorKind::FieldCount(n) => write!(f, "expected 4 fields, found {n}"),
            RecordErrorKind::DuplicateId(id) => write!(f, "duplicate project id {id}"),
            RecordErrorKind::Malformed(msg) => write!(f, "malformed row: {msg}"),
        }
    }
}

/// A rejected input row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordError {
    pub line: usize,
    pub kind: RecordErrorKind,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {}", self.line, self.kind)
    }
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub valid_years: RangeInclusive<i32>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            valid_years: 1900..=2100,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutcome {
    pub records: Vec<ProjectRecord>,
    pub errors: Vec<RecordError>,
    /// JSON Lines rows that carried keys beyond the four known ones.
    pub unknown_key_rows: usize,
}

impl ParseOutcome {
    /// Number of data rows seen, good or bad.
    pub fn rows(&self) -> usize {
        self.records.len() + self.errors.len()
    }

    pub fn error_fraction(&self) -> f64 {
        match self.rows() {
            0 => 0.0,
            n => self.errors.len() as f64 / n as f64,
        }
    }
}

pub fn parse_records<R: Read>(
    mut input: R,
    format: InputFormat,
    opts: &ParseOptions,
) -> Result<ParseOutcome, IngestError> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| IngestError::UnreadableInput(e.to_string()))?;
    match format {
        InputFormat::Csv => parse_csv(&text, opts),
        InputFormat::JsonLines => Ok(parse_jsonl(&text, opts)),
    }
}

struct Dedup {
    seen: HashSet<String>,
    out: ParseOutcome,
}

impl Dedup {
    fn new() -> Self {
        Dedup {
            seen: HashSet::new(),
            out: ParseOutcome::default(),
        }
    }

    fn push(&mut self, line: usize, row: Result<ProjectRecord, RecordErrorKind>) {
        match row {
            Ok(rec) => {
                if self.seen.insert(rec.project_id.clone()) {
                    self.out.records.push(rec);
                } else {
                    self.out.errors.push(RecordError {
                        line,
                        kind: RecordErrorKind::DuplicateId(rec.project_id),
                    });
                }
            }
            Err(kind) => self.out.errors.push(RecordError { line, kind }),
        }
    }
}

fn validate(
    fields: [Option<&str>; 4],
    opts: &ParseOptions,
) -> Result<ProjectRecord, RecordErrorKind> {
    let mut trimmed = [""; 4];
    for (i, (field, name)) in fields.iter().zip(CSV_HEADER).enumerate() {
        let value = field.ok_or(RecordErrorKind::MissingField(name))?.trim();
        if value.is_empty() {
            return Err(RecordErrorKind::EmptyField(name));
        }
        trimmed[i] = value;
    }
    let year: i32 = trimmed[3]
        .parse()
        .map_err(|_| RecordErrorKind::BadYear(trimmed[3].to_owned()))?;
    if !opts.valid_years.contains(&year) {
        return Err(RecordErrorKind::YearOutOfRange(year));
    }
    Ok(ProjectRecord::new(trimmed[0], trimmed[1], trimmed[2], year))
}

fn parse_csv(text: &str, opts: &ParseOptions) -> Result<ParseOutcome, IngestError> {
    if text.trim().is_empty() {
        return Ok(ParseOutcome::default());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| IngestError::UnreadableInput(e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CSV_HEADER {
        return Err(IngestError::UnreadableInput(format!(
            "expected header '{}', found '{}'",
            CSV_HEADER.join(","),
            names.join(",")
        )));
    }

    let mut dedup = Dedup::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                dedup.push(line, Err(RecordErrorKind::Malformed(e.to_string())));
                continue;
            }
        };
        let parsed = if row.len() != 4 {
            Err(RecordErrorKind::FieldCount(row.len()))
        } else {
            validate([row.get(0), row.get(1), row.get(2), row.get(3)], opts)
        };
        dedup.push(line, parsed);
    }
    Ok(dedup.out)
}

fn parse_jsonl(text: &str, opts: &ParseOptions) -> ParseOutcome {
    let mut dedup = Dedup::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line = i + 1;
        let obj: serde_json::Map<String, serde_json::Value> = match serde_json::from_str(raw) {
            Ok(o) => o,
            Err(e) => {
                dedup.push(line, Err(RecordErrorKind::Malformed(e.to_string())));
                continue;
            }
        };
        if obj.keys().any(|k| !CSV_HEADER.contains(&k.as_str())) {
            dedup.out.unknown_key_rows += 1;
        }
        let texts: Vec<Option<String>> = CSV_HEADER
            .iter()
            .map(|k| match obj.get(*k) {
                None | Some(serde_json::Value::Null) => None,
                Some(serde_json::Value::String(s)) => Some(s.clone()),
                Some(other) => Some(other.to_string()),
            })
            .collect();
        let fields = [
            texts[0].as_deref(),
            texts[1].as_deref(),
            texts[2].as_deref(),
            texts[3].as_deref(),
        ];
        dedup.push(line, validate(fields, opts));
    }
    dedup.out
}

/// Writes records as canonical CSV with LF line endings.
pub fn write_records_csv<W: Write>(records: &[ProjectRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.project_id.as_str(),
            r.firm_id.as_str(),
            r.org_id.as_str(),
            &r.start_year.to_string(),
        ])?;
    }
    w.flush()
}

/// The ever-cooperated graph: one edge per firm/org pair that shares at
/// least one project, whatever its year.
pub fn build_static_graph(records: &[ProjectRecord]) -> Result<BipartiteGraph, IngestError> {
    let mut b = GraphBuilder::new();
    for r in records {
        b.add_edge(&NodeRef::firm(&r.firm_id), &NodeRef::org(&r.org_id))?;
    }
    Ok(b.freeze())
}

/// Per firm/org pair, the start years of all projects joining them.
///
/// Firm and org ids are interned in ascending order; pairs are sorted by
/// `(firm, org)` index. The node universe is every id seen in the records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TimedEdgeStore {
    firm_ids: Vec<String>,
    org_ids: Vec<String>,
    pairs: Vec<(u32, u32)>,
    pair_years: Vec<Vec<i32>>,
    year_index: BTreeMap<i32, Vec<u32>>,
}

impl TimedEdgeStore {
    pub fn from_records(records: &[ProjectRecord]) -> Self {
        let firm_ids = sorted_unique(records.iter().map(|r| r.firm_id.as_str()));
        let org_ids = sorted_unique(records.iter().map(|r| r.org_id.as_str()));
        let firm_ix = index_map(&firm_ids);
        let org_ix = index_map(&org_ids);

        let mut by_pair: BTreeMap<(u32, u32), Vec<i32>> = BTreeMap::new();
        for r in records {
            let key = (firm_ix[r.firm_id.as_str()], org_ix[r.org_id.as_str()]);
            by_pair.entry(key).or_default().push(r.start_year);
        }

        let mut pairs = Vec::with_capacity(by_pair.len());
        let mut pair_years = Vec::with_capacity(by_pair.len());
        let mut year_index: BTreeMap<i32, Vec<u32>> = BTreeMap::new();
        for (p, (key, mut years)) in by_pair.into_iter().enumerate() {
            years.sort_unstable();
            let mut last = None;
            for &y in &years {
                if last != Some(y) {
                    year_index.entry(y).or_default().push(p as u32);
                    last = Some(y);
                }
            }
            pairs.push(key);
            pair_years.push(years);
        }

        TimedEdgeStore {
            firm_ids: firm_ids.into_iter().map(str::to_owned).collect(),
            org_ids: org_ids.into_iter().map(str::to_owned).collect(),
            pairs,
            pair_years,
            year_index,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(min, max)` start year, or `None` for an empty store.
    pub fn year_range(&self) -> Option<(i32, i32)> {
        let min = *self.year_index.keys().next()?;
        let max = *self.year_index.keys().next_back()?;
        Some((min, max))
    }

    pub fn firm_ids(&self) -> &[String] {
        &self.firm_ids
    }

    pub fn org_ids(&self) -> &[String] {
        &self.org_ids
    }

    /// Distinct `(firm_index, org_index)` pairs, sorted.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn pair_ids(&self, pair: u32) -> (&str, &str) {
        let (f, o) = self.pairs[pair as usize];
        (&self.firm_ids[f as usize], &self.org_ids[o as usize])
    }

    /// Sorted start years (with multiplicity) of the given pair index.
    pub fn years_of(&self, pair: u32) -> &[i32] {
        &self.pair_years[pair as usize]
    }

    /// Start years for a pair looked up by id.
    pub fn pair_years(&self, firm_id: &str, org_id: &str) -> Option<&[i32]> {
        let f = self.firm_ids.binary_search_by(|p| p.as_str().cmp(firm_id)).ok()? as u32;
        let o = self.org_ids.binary_search_by(|p| p.as_str().cmp(org_id)).ok()? as u32;
        let p = self.pairs.binary_search(&(f, o)).ok()?;
        Some(&self.pair_years[p])
    }

    /// Pair indices with at least one project starting in `year`, ascending.
    pub fn pairs_in_year(&self, year: i32) -> &[u32] {
        self.year_index.get(&year).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Years with at least one project, ascending.
    pub fn active_years(&self) -> impl Iterator<Item = i32> + '_ {
        self.year_index.keys().copied()
    }

    /// Total number of stored year occurrences (one per project).
    pub fn project_count(&self) -> usize {
        self.pair_years.iter().map(Vec::len).sum()
    }

    /// Copy of the store without any project starting in `year`. The node
    /// universe shrinks to the ids that still have projects.
    pub fn without_year(&self, year: i32) -> TimedEdgeStore {
        let mut records = Vec::new();
        for (p, years) in self.pair_years.iter().enumerate() {
            let (f, o) = self.pair_ids(p as u32);
            for &y in years.iter().filter(|&&y| y != year) {
                records.push(ProjectRecord::new("", f, o, y));
            }
        }
        TimedEdgeStore::from_records(&records)
    }
}

fn sorted_unique<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut v: Vec<&str> = ids.collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn index_map<'a>(ids: &[&'a str]) -> HashMap<&'a str, u32> {
    ids.iter().enumerate().map(|(i, &id)| (id, i as u32)).collect()
}

pub fn build_timed_store(records: &[ProjectRecord]) -> TimedEdgeStore {
    TimedEdgeStore::from_records(records)
}
