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

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use bipartite_lens::degree_stats::{fit_power_law, mode_summary, rank_size};
use bipartite_lens::ingest::{
    build_static_graph, parse_records, write_records_csv, ParseOptions, ParseOutcome,
};
use bipartite_lens::synth::{
    edge_list_records, gen_er_bipartite, gen_pa_stream, gen_regime_shift_stream, GeneratorConfig,
    RegimeShift,
};
use bipartite_lens::temporal::{scan_all_windows, window_graph, write_matrix_csv, ScanOptions};
use bipartite_lens::{
    clustering_census, FitError, GenError, InputFormat, Mode, ProjectRecord, ScanError,
    TimedEdgeStore, WindowSpec,
};
use log::{info, warn};
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::{
    ErArgs, FormatArg, InputArgs, ModeArg, PaArgs, RaArgs, RanksizeArgs, ScanArgs, ShiftArgs,
    SummaryArgs,
};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn io(context: &str, e: io::Error) -> Self {
        CliError::new(2, format!("{context}: {e}"))
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::new(6, e.to_string())
    }
}

type CliResult = Result<(), CliError>;

/// Raw input bytes plus the parse outcome.
struct Loaded {
    bytes: Vec<u8>,
    parsed: ParseOutcome,
}

fn detect_format(path: &Path, flag: Option<FormatArg>) -> InputFormat {
    match flag {
        Some(FormatArg::Csv) => InputFormat::Csv,
        Some(FormatArg::Jsonl) => InputFormat::JsonLines,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => InputFormat::JsonLines,
            _ => InputFormat::Csv,
        },
    }
}

fn load(args: &InputArgs) -> Result<Loaded, CliError> {
    let bytes = fs::read(&args.input)
        .map_err(|e| CliError::io(&format!("cannot read {}", args.input.display()), e))?;
    let format = detect_format(&args.input, args.format);
    let parsed = parse_records(&bytes[..], format, &ParseOptions::default())
        .map_err(|e| CliError::new(2, format!("{}: {e}", args.input.display())))?;

    for err in parsed.errors.iter().take(20) {
        warn!("{}: {err}", args.input.display());
    }
    if parsed.errors.len() > 20 {
        warn!("... {} more malformed rows", parsed.errors.len() - 20);
    }
    if parsed.unknown_key_rows > 0 {
        warn!("{} rows carried unknown keys", parsed.unknown_key_rows);
    }
    let fraction = parsed.error_fraction();
    if fraction > args.max_error_fraction {
        return Err(CliError::new(
            3,
            format!(
                "{} of {} rows malformed ({:.1}% > {:.1}%)",
                parsed.errors.len(),
                parsed.rows(),
                100.0 * fraction,
                100.0 * args.max_error_fraction
            ),
        ));
    }
    info!("loaded {} records from {}", parsed.records.len(), args.input.display());
    Ok(Loaded { bytes, parsed })
}

fn write_manifest<P: Serialize>(
    args: &InputArgs,
    command: &'static str,
    params: &P,
    input: &[u8],
) -> CliResult {
    let Some(path) = &args.manifest else {
        return Ok(());
    };
    let manifest = RunManifest::new(command, params, input);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(&format!("cannot write {}", path.display()), e))
}

/// Opens `path` for writing, or stdout.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).map_err(|e| CliError::io(&format!("cannot create {}", p.display()), e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult {
    let mut out = sink(path)?;
    f(&mut out).and_then(|_| out.flush()).map_err(|e| CliError::io("write failed", e))
}

#[derive(Serialize)]
struct Summary {
    records: usize,
    row_errors: usize,
    firms: usize,
    orgs: usize,
    edges: usize,
    max_firm_degree: usize,
    max_org_degree: usize,
}

pub fn summary(args: &SummaryArgs) -> CliResult {
    let loaded = load(&args.input)?;
    let graph = build_static_graph(&loaded.parsed.records).map_err(|e| CliError::new(2, e.to_string()))?;
    let s = mode_summary(&graph);
    let out = Summary {
        records: loaded.parsed.records.len(),
        row_errors: loaded.parsed.errors.len(),
        firms: s.firm_count,
        orgs: s.org_count,
        edges: s.edge_count,
        max_firm_degree: s.max_firm_degree,
        max_org_degree: s.max_org_degree,
    };
    emit(None, |w| {
        if args.json {
            writeln!(w, "{}", serde_json::to_string(&out).expect("summary serializes"))
        } else {
            let rows = [
                ("records", out.records),
                ("row_errors", out.row_errors),
                ("firms", out.firms),
                ("orgs", out.orgs),
                ("edges", out.edges),
                ("max_firm_degree", out.max_firm_degree),
                ("max_org_degree", out.max_org_degree),
            ];
            for (k, v) in rows {
                writeln!(w, "{k:<16} {v:>10}")?;
            }
            Ok(())
        }
    })?;
    write_manifest(&args.input, "summary", args, &loaded.bytes)
}

pub fn ranksize(args: &RanksizeArgs) -> CliResult {
    let loaded = load(&args.input)?;
    let graph = build_static_graph(&loaded.parsed.records).map_err(|e| CliError::new(2, e.to_string()))?;
    let mode = match args.mode {
        ModeArg::Firm => Mode::Firm,
        ModeArg::Org => Mode::ResearchOrg,
    };
    let dist = rank_size(&graph, mode);
    emit(args.output.as_deref(), |w| dist.write_csv(w))?;

    if args.fit {
        let degrees: Vec<u64> = dist.degrees().into_iter().map(|d| d as u64).collect();
        let json = match fit_power_law(&degrees, args.x_min) {
            Ok(fit) => serde_json::to_string(&fit).expect("fit serializes"),
            Err(FitError::InsufficientData) => {
                warn!("fewer than two tail observations, no fit");
                r#"{"error":"insufficient_data"}"#.to_owned()
            }
            Err(FitError::InvalidXMin) => return Err(CliError::new(1, "--x-min must be at least 1")),
        };
        emit(args.fit_output.as_deref(), |w| writeln!(w, "{json}"))?;
    }
    write_manifest(&args.input, "ranksize", args, &loaded.bytes)
}

fn scan_error(e: ScanError) -> CliError {
    match e {
        ScanError::WindowOutOfRange { .. } | ScanError::InvertedWindow { .. } => {
            CliError::new(4, e.to_string())
        }
        ScanError::EmptyStore => CliError::new(5, e.to_string()),
        ScanError::Census(c) => CliError::new(2, c.to_string()),
    }
}

pub fn ra(args: &RaArgs) -> CliResult {
    let loaded = load(&args.input)?;
    let records = &loaded.parsed.records;
    let census = if args.from.is_none() && args.to.is_none() {
        let graph = build_static_graph(records).map_err(|e| CliError::new(2, e.to_string()))?;
        clustering_census(&graph).map_err(|e| CliError::new(2, e.to_string()))?
    } else {
        let store = TimedEdgeStore::from_records(records);
        let Some((min, max)) = store.year_range() else {
            return Err(CliError::new(4, "input holds no projects, no window fits"));
        };
        let window = WindowSpec::new(args.from.unwrap_or(min), args.to.unwrap_or(max));
        let graph = window_graph(&store, window).map_err(scan_error)?;
        clustering_census(&graph).map_err(|e| CliError::new(2, e.to_string()))?
    };
    emit(None, |w| {
        writeln!(w, "{}", serde_json::to_string(&census).expect("census serializes"))
    })?;
    write_manifest(&args.input, "ra", args, &loaded.bytes)
}

pub fn scan(args: &ScanArgs) -> CliResult {
    let loaded = load(&args.input)?;
    let store = TimedEdgeStore::from_records(&loaded.parsed.records);
    let opts = ScanOptions {
        exclude_year: if args.mask_only { None } else { args.exclude_year },
        jobs: args.jobs,
    };
    let started = Instant::now();
    let mut matrix = scan_all_windows(&store, opts).map_err(scan_error)?;
    if args.mask_only {
        if let Some(year) = args.exclude_year {
            matrix = matrix.mask_year(year);
        }
    }
    info!("scanned {} windows in {:.2?}", matrix.cells.len(), started.elapsed());
    emit(args.output.as_deref(), |w| write_matrix_csv(&matrix, w))?;
    write_manifest(&args.input, "scan", args, &loaded.bytes)
}

fn write_corpus(records: &[ProjectRecord], output: Option<&Path>) -> CliResult {
    emit(output, |w| write_records_csv(records, w))
}

fn announce<T: Serialize>(config: &T) {
    eprintln!("{}", serde_json::to_string(config).expect("config serializes"));
}

pub fn generate_er(args: &ErArgs) -> CliResult {
    announce(args);
    let graph = gen_er_bipartite(args.firms, args.orgs, args.p, args.seed)?;
    write_corpus(&edge_list_records(&graph, args.year), args.output.as_deref())
}

fn pa_config(args: &PaArgs) -> GeneratorConfig {
    GeneratorConfig {
        seed: args.seed,
        n_orgs: args.orgs,
        n_projects: args.projects,
        year_range: args.years,
        new_firm_prob: args.new_firm_prob,
        shift: None,
    }
}

pub fn generate_pa(args: &PaArgs) -> CliResult {
    let config = pa_config(args);
    announce(&config);
    let records = gen_pa_stream(&config)?;
    write_corpus(&records, args.output.as_deref())
}

pub fn generate_shift(args: &ShiftArgs) -> CliResult {
    let config = GeneratorConfig {
        seed: args.seed,
        n_orgs: args.orgs,
        n_projects: args.projects,
        year_range: args.years,
        new_firm_prob: args.new_firm_prob,
        shift: Some(RegimeShift {
            shift_year: args.shift_year,
            hot_firm_count: args.hot_firms,
            hot_org_count: args.hot_orgs,
            hot_prob: args.hot_prob,
        }),
    };
    announce(&config);
    let records = gen_regime_shift_stream(&config)?;
    write_corpus(&records, args.output.as_deref())
}
