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

//! Window scans of the clustering coefficient.
//!
//! A window `[start, end]` (inclusive calendar years) holds an edge for every
//! firm/org pair with at least one project starting inside it. The scan
//! covers every window over the year axis and is organised by start-year
//! rows: within a row the window only grows, so the census is updated edge
//! by edge instead of being recomputed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use rayon::prelude::*;

use crate::clustering::{clustering_census, ClusteringCensus, Coefficient};
use crate::error::{CensusError, ScanError};
use crate::graph::{BipartiteGraph, GraphBuilder, Mode, NodeRef};
use crate::ingest::TimedEdgeStore;

pub const MATRIX_CSV_HEADER: [&str; 6] = [
    "start_year",
    "end_year",
    "coefficient",
    "squares",
    "three_paths",
    "edge_count",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WindowSpec {
    pub start_year: i32,
    pub end_year: i32,
}

impl WindowSpec {
    pub fn new(start_year: i32, end_year: i32) -> Self {
        WindowSpec {
            start_year,
            end_year,
        }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start_year <= year && year <= self.end_year
    }

    fn check(&self, store: &TimedEdgeStore) -> Result<(), ScanError> {
        if self.start_year > self.end_year {
            return Err(ScanError::InvertedWindow {
                start: self.start_year,
                end: self.end_year,
            });
        }
        let (min, max) = store.year_range().ok_or(ScanError::EmptyStore)?;
        if self.start_year < min || self.end_year > max {
            return Err(ScanError::WindowOutOfRange {
                start: self.start_year,
                end: self.end_year,
                min,
                max,
            });
        }
        Ok(())
    }
}

/// Pair indices active in the window, ascending.
pub fn window_pairs(store: &TimedEdgeStore, window: WindowSpec) -> Result<Vec<u32>, ScanError> {
    window.check(store)?;
    Ok((0..store.pairs().len() as u32)
        .filter(|&p| {
            let years = store.years_of(p);
            let i = years.partition_point(|&y| y < window.start_year);
            i < years.len() && years[i] <= window.end_year
        })
        .collect())
}

/// `(firm_id, org_id)` pairs with a project starting inside the window.
pub fn window_edges(
    store: &TimedEdgeStore,
    window: WindowSpec,
) -> Result<BTreeSet<(&str, &str)>, ScanError> {
    Ok(window_pairs(store, window)?
        .into_iter()
        .map(|p| store.pair_ids(p))
        .collect())
}

/// The window's graph over the store's full node universe.
pub fn window_graph(store: &TimedEdgeStore, window: WindowSpec) -> Result<BipartiteGraph, ScanError> {
    let edges = window_edges(store, window)?;
    let mut b = GraphBuilder::new();
    for id in store.firm_ids() {
        b.add_node(&NodeRef::firm(id.as_str())).expect("store ids are non-empty");
    }
    for id in store.org_ids() {
        b.add_node(&NodeRef::org(id.as_str())).expect("store ids are non-empty");
    }
    for (f, o) in edges {
        b.add_pair(f, o).expect("store pairs are cross-mode");
    }
    Ok(b.freeze())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowCell {
    pub census: ClusteringCensus,
    pub edge_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowMatrix {
    pub years: Vec<i32>,
    pub cells: BTreeMap<WindowSpec, WindowCell>,
    /// Year whose projects were dropped before scanning.
    pub excluded_year: Option<i32>,
    /// Year whose windows are blanked on output only.
    pub masked_year: Option<i32>,
}

impl WindowMatrix {
    pub fn cell(&self, start_year: i32, end_year: i32) -> Option<&WindowCell> {
        self.cells.get(&WindowSpec::new(start_year, end_year))
    }

    /// Display-only masking: windows containing `year` report an undefined
    /// coefficient, all other values stay as scanned.
    pub fn mask_year(mut self, year: i32) -> Self {
        self.masked_year = Some(year);
        self
    }

    pub fn coefficient(&self, window: WindowSpec) -> Option<Coefficient> {
        let cell = self.cells.get(&window)?;
        if self.masked_year.is_some_and(|y| window.contains(y)) {
            return Some(Coefficient::Undefined);
        }
        Some(cell.census.coefficient())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub start_year: i32,
    pub end_year: i32,
    pub coefficient: Coefficient,
    pub squares: u64,
    pub three_paths: u64,
    pub edge_count: usize,
}

pub fn matrix_to_rows(matrix: &WindowMatrix) -> Vec<MatrixRow> {
    matrix
        .cells
        .iter()
        .map(|(&w, cell)| MatrixRow {
            start_year: w.start_year,
            end_year: w.end_year,
            coefficient: matrix.coefficient(w).expect("cell exists"),
            squares: cell.census.squares,
            three_paths: cell.census.three_paths,
            edge_count: cell.edge_count,
        })
        .collect()
}

/// Writes the matrix as CSV, rows ordered by `(start_year, end_year)`.
pub fn write_matrix_csv<W: Write>(matrix: &WindowMatrix, out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(MATRIX_CSV_HEADER)?;
    for r in matrix_to_rows(matrix) {
        w.write_record([
            r.start_year.to_string(),
            r.end_year.to_string(),
            r.coefficient.to_csv_field(),
            r.squares.to_string(),
            r.three_paths.to_string(),
            r.edge_count.to_string(),
        ])?;
    }
    w.flush()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScanOptions {
    /// Drop every project starting in this year and remove it from the axis.
    pub exclude_year: Option<i32>,
    /// Worker threads for row parallelism; 0 picks the rayon default.
    pub jobs: usize,
}

/// Scans every window over the store's year axis.
pub fn scan_all_windows(store: &TimedEdgeStore, opts: ScanOptions) -> Result<WindowMatrix, ScanError> {
    scan_with(store, opts, |store, start, ends| {
        let engine = IncrementalEngine::new(store);
        engine.row(start, ends)
    })
}

/// Same contract as [`scan_all_windows`], recomputing each cell from scratch
/// via [`window_graph`] and [`clustering_census`].
pub fn scan_all_windows_naive(
    store: &TimedEdgeStore,
    opts: ScanOptions,
) -> Result<WindowMatrix, ScanError> {
    scan_with(store, opts, |store, start, ends| {
        ends.iter()
            .map(|&end| {
                let g = window_graph(store, WindowSpec::new(start, end))?;
                Ok(WindowCell {
                    census: clustering_census(&g)?,
                    edge_count: g.edge_count(),
                })
            })
            .collect()
    })
}

fn scan_with<F>(store: &TimedEdgeStore, opts: ScanOptions, row: F) -> Result<WindowMatrix, ScanError>
where
    F: Fn(&TimedEdgeStore, i32, &[i32]) -> Result<Vec<WindowCell>, ScanError> + Sync,
{
    let filtered;
    let store = match opts.exclude_year {
        Some(y) => {
            filtered = store.without_year(y);
            &filtered
        }
        None => store,
    };
    let (min, max) = store.year_range().ok_or(ScanError::EmptyStore)?;
    let years: Vec<i32> = (min..=max).filter(|&y| Some(y) != opts.exclude_year).collect();

    let run = || -> Result<Vec<Vec<WindowCell>>, ScanError> {
        years
            .par_iter()
            .enumerate()
            .map(|(i, &start)| row(store, start, &years[i..]))
            .collect()
    };
    let rows = if opts.jobs == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .expect("thread pool")
            .install(run)?
    };

    let mut cells = BTreeMap::new();
    for (i, row) in rows.into_iter().enumerate() {
        for (cell, &end) in row.into_iter().zip(&years[i..]) {
            cells.insert(WindowSpec::new(years[i], end), cell);
        }
    }
    Ok(WindowMatrix {
        years,
        cells,
        excluded_year: opts.exclude_year,
        masked_year: None,
    })
}

/// Censuses of `[start_year, e]` for each `e` in `end_years`, computed by
/// growing one window.
pub fn incremental_row_scan(
    store: &TimedEdgeStore,
    start_year: i32,
    end_years: &[i32],
) -> Result<Vec<ClusteringCensus>, ScanError> {
    Ok(IncrementalEngine::new(store)
        .row(start_year, end_years)?
        .into_iter()
        .map(|c| c.census)
        .collect())
}

/// Read-only setup shared by all rows of a scan.
///
/// Nodes of the smaller mode are *hubs*, the others *leaves*. Each insertion
/// costs O(degree of the leaf endpoint).
struct IncrementalEngine<'a> {
    store: &'a TimedEdgeStore,
    hub_mode: Mode,
    hubs: usize,
    leaves: usize,
}

impl<'a> IncrementalEngine<'a> {
    fn new(store: &'a TimedEdgeStore) -> Self {
        let firms = store.firm_ids().len();
        let orgs = store.org_ids().len();
        let hub_mode = if orgs <= firms { Mode::ResearchOrg } else { Mode::Firm };
        let (hubs, leaves) = match hub_mode {
            Mode::ResearchOrg => (orgs, firms),
            Mode::Firm => (firms, orgs),
        };
        IncrementalEngine {
            store,
            hub_mode,
            hubs,
            leaves,
        }
    }

    fn row(&self, start_year: i32, end_years: &[i32]) -> Result<Vec<WindowCell>, ScanError> {
        let mut state = RowState::new(self.hubs, self.leaves);
        let mut present = vec![false; self.store.pairs().len()];
        let mut edge_count = 0;
        let mut next_year = start_year;
        let mut out = Vec::with_capacity(end_years.len());
        for &end in end_years {
            if end < next_year {
                return Err(ScanError::InvertedWindow {
                    start: next_year,
                    end,
                });
            }
            for year in next_year..=end {
                for &p in self.store.pairs_in_year(year) {
                    if present[p as usize] {
                        continue;
                    }
                    present[p as usize] = true;
                    edge_count += 1;
                    let (f, o) = self.store.pairs()[p as usize];
                    let (leaf, hub) = match self.hub_mode {
                        Mode::ResearchOrg => (f, o),
                        Mode::Firm => (o, f),
                    };
                    state.insert(leaf, hub)?;
                }
            }
            next_year = end + 1;
            out.push(WindowCell {
                census: state.census,
                edge_count,
            });
        }
        Ok(out)
    }
}

/// Pair counters `|N(h) ∩ N(h')|` over hub pairs.
enum CoNeighbors {
    Dense { n: usize, counts: Vec<u32> },
    Sparse(HashMap<(u32, u32), u32>),
}

const DENSE_HUB_LIMIT: usize = 2048;

impl CoNeighbors {
    fn new(hubs: usize) -> Self {
        if hubs <= DENSE_HUB_LIMIT {
            CoNeighbors::Dense {
                n: hubs,
                counts: vec![0; hubs * hubs],
            }
        } else {
            CoNeighbors::Sparse(HashMap::new())
        }
    }

    fn get(&self, a: u32, b: u32) -> u32 {
        match self {
            CoNeighbors::Dense { n, counts } => counts[a as usize * n + b as usize],
            CoNeighbors::Sparse(map) => map.get(&(a.min(b), a.max(b))).copied().unwrap_or(0),
        }
    }

    fn bump(&mut self, a: u32, b: u32) {
        match self {
            CoNeighbors::Dense { n, counts } => {
                counts[a as usize * *n + b as usize] += 1;
                counts[b as usize * *n + a as usize] += 1;
            }
            CoNeighbors::Sparse(map) => *map.entry((a.min(b), a.max(b))).or_insert(0) += 1,
        }
    }
}

/// Mutable state of one growing window.
struct RowState {
    leaf_adj: Vec<Vec<u32>>,
    hub_degree: Vec<u64>,
    /// Σ of current leaf-neighbor degrees, per hub.
    hub_neighbor_degree_sum: Vec<u64>,
    co: CoNeighbors,
    census: ClusteringCensus,
}

impl RowState {
    fn new(hubs: usize, leaves: usize) -> Self {
        RowState {
            leaf_adj: vec![Vec::new(); leaves],
            hub_degree: vec![0; hubs],
            hub_neighbor_degree_sum: vec![0; hubs],
            co: CoNeighbors::new(hubs),
            census: ClusteringCensus::default(),
        }
    }

    /// Adds edge `leaf - hub`, which must be new.
    ///
    /// With degrees taken before insertion, the new 3-paths are those with
    /// the edge in the middle, `d(leaf)·d(hub)`, plus those with it at an
    /// end: Σ over hubs `h'` adjacent to the leaf of `d(h') − 1`, and Σ over
    /// leaves `l'` adjacent to the hub of `d(l') − 1`. The new squares are
    /// Σ over `h'` adjacent to the leaf of `|N(h') ∩ N(hub)|`.
    fn insert(&mut self, leaf: u32, hub: u32) -> Result<(), CensusError> {
        let hub_ix = hub as usize;
        let leaf_nbrs = &self.leaf_adj[leaf as usize];
        let leaf_deg = leaf_nbrs.len() as u64;
        let hub_deg = self.hub_degree[hub_ix];

        let mut leaf_side = 0u64;
        let mut squares = 0u64;
        for &h in leaf_nbrs {
            leaf_side += self.hub_degree[h as usize] - 1;
            squares += self.co.get(hub, h) as u64;
        }
        let hub_side = self.hub_neighbor_degree_sum[hub_ix] - hub_deg;
        let paths = leaf_deg
            .checked_mul(hub_deg)
            .and_then(|m| m.checked_add(leaf_side))
            .and_then(|m| m.checked_add(hub_side))
            .ok_or(CensusError::Overflow)?;

        for &h in leaf_nbrs {
            self.co.bump(hub, h);
            self.hub_neighbor_degree_sum[h as usize] += 1;
        }
        self.leaf_adj[leaf as usize].push(hub);
        self.hub_degree[hub_ix] += 1;
        self.hub_neighbor_degree_sum[hub_ix] += leaf_deg + 1;

        self.census.three_paths = self
            .census
            .three_paths
            .checked_add(paths)
            .ok_or(CensusError::Overflow)?;
        self.census.squares = self
            .census
            .squares
            .checked_add(squares)
            .ok_or(CensusError::Overflow)?;
        Ok(())
    }
}
