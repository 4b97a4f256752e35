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

//! `bipartite-lens` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | usage error                               |
//! | 2    | unreadable input or output failure        |
//! | 3    | too many malformed rows                   |
//! | 4    | window outside the data's year range      |
//! | 5    | no projects to scan                       |
//! | 6    | invalid generator configuration           |

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "bipartite-lens", version, about = "Two-mode collaboration network statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Node, edge and record counts with per-mode maximum degrees.
    Summary(SummaryArgs),
    /// Rank-size degree distribution of one mode, optionally with a power-law fit.
    Ranksize(RanksizeArgs),
    /// Robins-Alexander census of the static graph or of one year window.
    Ra(RaArgs),
    /// Clustering census of every (start, end) year window.
    Scan(ScanArgs),
    /// Write a synthetic project corpus.
    #[command(subcommand)]
    Generate(GenerateCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Project records (canonical CSV or JSON Lines).
    pub input: PathBuf,
    /// Input format; by default `.jsonl`/`.ndjson` files are JSON Lines, anything else CSV.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Fail with exit code 3 when more than this fraction of rows is malformed.
    #[arg(long, default_value_t = 0.1)]
    pub max_error_fraction: f64,
    /// Write a run manifest (command, parameters, input digest, version) to this path.
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SummaryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Print JSON instead of aligned text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Firm,
    Org,
}

#[derive(Debug, Args, Serialize)]
pub struct RanksizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Also fit a discrete power law to the mode's degrees.
    #[arg(long)]
    pub fit: bool,
    /// Fixed x_min for the fit; chosen by KS distance when absent.
    #[arg(long, requires = "fit")]
    pub x_min: Option<u64>,
    /// Rank-size CSV destination (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Fit JSON destination (stdout when absent).
    #[arg(long, requires = "fit")]
    pub fit_output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// First year of the window (inclusive); defaults to the earliest year.
    #[arg(long)]
    pub from: Option<i32>,
    /// Last year of the window (inclusive); defaults to the latest year.
    #[arg(long)]
    pub to: Option<i32>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Drop projects starting in this year and remove it from the axes.
    #[arg(long)]
    pub exclude_year: Option<i32>,
    /// Keep all projects; only blank windows containing --exclude-year.
    #[arg(long, requires = "exclude_year")]
    pub mask_only: bool,
    /// Matrix CSV destination (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Worker threads for start-year rows (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
enum GenerateCommand {
    /// Random bipartite graph as a single-year edge list.
    Er(ErArgs),
    /// Preferential-attachment project stream.
    Pa(PaArgs),
    /// Preferential-attachment stream with a dense block in one year.
    Shift(ShiftArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ErArgs {
    #[arg(long, default_value_t = 300)]
    pub firms: usize,
    #[arg(long, default_value_t = 300)]
    pub orgs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub p: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Year stamped on every edge.
    #[arg(long, default_value_t = 2000)]
    pub year: i32,
    #[arg(long, short)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PaArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 74)]
    pub orgs: usize,
    #[arg(long, default_value_t = 50_000)]
    pub projects: usize,
    /// Inclusive year range, `START-END`.
    #[arg(long, default_value = "1992-2018", value_parser = parse_years)]
    pub years: (i32, i32),
    #[arg(long, default_value_t = 0.4)]
    pub new_firm_prob: f64,
    #[arg(long, short)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ShiftArgs {
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    #[arg(long, default_value_t = 74)]
    pub orgs: usize,
    #[arg(long, default_value_t = 10_000)]
    pub projects: usize,
    /// Inclusive year range, `START-END`.
    #[arg(long, default_value = "2000-2014", value_parser = parse_years)]
    pub years: (i32, i32),
    #[arg(long, default_value_t = 0.5)]
    pub new_firm_prob: f64,
    #[arg(long, default_value_t = 2008)]
    pub shift_year: i32,
    #[arg(long, default_value_t = 8)]
    pub hot_firms: usize,
    #[arg(long, default_value_t = 4)]
    pub hot_orgs: usize,
    #[arg(long, default_value_t = 0.8)]
    pub hot_prob: f64,
    #[arg(long, short)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

fn parse_years(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s
        .split_once('-')
        .ok_or_else(|| format!("expected START-END, got '{s}'"))?;
    let start = a.trim().parse().map_err(|_| format!("bad start year '{a}'"))?;
    let end = b.trim().parse().map_err(|_| format!("bad end year '{b}'"))?;
    Ok((start, end))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BIPARTITE_LENS_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };

    let result = match &cli.command {
        Command::Summary(args) => commands::summary(args),
        Command::Ranksize(args) => commands::ranksize(args),
        Command::Ra(args) => commands::ra(args),
        Command::Scan(args) => commands::scan(args),
        Command::Generate(GenerateCommand::Er(args)) => commands::generate_er(args),
        Command::Generate(GenerateCommand::Pa(args)) => commands::generate_pa(args),
        Command::Generate(GenerateCommand::Shift(args)) => commands::generate_shift(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
