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

use std::collections::BTreeSet;

use bipartite_lens::clustering::{
    brute_force_census, clustering_census, count_squares, count_squares_from, count_three_paths,
    Coefficient,
};
use bipartite_lens::ingest::{
    build_static_graph, build_timed_store, parse_records, write_records_csv, InputFormat,
    ParseOptions,
};
use bipartite_lens::synth::{gen_er_bipartite, gen_pa_stream, rng_from_seed, GeneratorConfig};
use bipartite_lens::temporal::{
    incremental_row_scan, scan_all_windows, window_edges, window_graph, ScanOptions,
};
use bipartite_lens::{BipartiteGraph, Mode, NodeRef, ProjectRecord, TimedEdgeStore, WindowSpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn edge_list() -> impl Strategy<Value = Vec<(u8, u8)>> {
    prop::collection::vec((0u8..9, 0u8..7), 0..40)
}

fn graph_of(edges: &[(u8, u8)]) -> BipartiteGraph {
    let named: Vec<(String, String)> = edges
        .iter()
        .map(|(f, o)| (format!("f{f}"), format!("o{o}")))
        .collect();
    BipartiteGraph::from_pairs(named.iter().map(|(f, o)| (f.as_str(), o.as_str()))).unwrap()
}

fn records_of(rows: &[(u8, u8, i32)]) -> Vec<ProjectRecord> {
    rows.iter()
        .enumerate()
        .map(|(i, &(f, o, y))| ProjectRecord::new(&format!("P{i}"), &format!("f{f}"), &format!("o{o}"), y))
        .collect()
}

proptest! {
    #[test]
    fn degree_sums_match_edge_count(edges in edge_list()) {
        let g = graph_of(&edges);
        let firm: usize = g.degree_sequence(Mode::Firm).iter().map(|(_, d)| d).sum();
        let org: usize = g.degree_sequence(Mode::ResearchOrg).iter().map(|(_, d)| d).sum();
        prop_assert_eq!(firm, g.edge_count());
        prop_assert_eq!(org, g.edge_count());
    }

    #[test]
    fn insertion_order_and_repeats_do_not_matter(edges in edge_list(), seed in any::<u64>()) {
        let mut shuffled = edges.clone();
        shuffled.extend(edges.iter().take(5).copied());
        shuffled.shuffle(&mut rng_from_seed(seed));
        let a = graph_of(&edges);
        let b = graph_of(&shuffled);
        prop_assert_eq!(a.canonical_form(), b.canonical_form());
        prop_assert_eq!(clustering_census(&a).unwrap(), clustering_census(&b).unwrap());
    }

    #[test]
    fn adjacency_is_symmetric(edges in edge_list()) {
        let g = graph_of(&edges);
        for (f, _) in g.degree_sequence(Mode::Firm) {
            for o in g.neighbors(&f).unwrap() {
                prop_assert_eq!(o.mode, Mode::ResearchOrg);
                prop_assert!(g.neighbors(&o).unwrap().contains(&f));
            }
        }
    }

    #[test]
    fn square_bound_and_side_independence(edges in edge_list()) {
        let g = graph_of(&edges);
        let c = clustering_census(&g).unwrap();
        prop_assert!(4 * c.squares <= c.three_paths);
        if c.three_paths == 0 {
            prop_assert_eq!(c.squares, 0);
        }
        prop_assert_eq!(
            count_squares_from(&g, Mode::Firm).unwrap(),
            count_squares_from(&g, Mode::ResearchOrg).unwrap()
        );
    }

    #[test]
    fn static_graph_ignores_record_order(rows in prop::collection::vec((0u8..8, 0u8..5, 1990i32..1996), 0..40), seed in any::<u64>()) {
        let recs = records_of(&rows);
        let mut shuffled = recs.clone();
        shuffled.shuffle(&mut rng_from_seed(seed));
        prop_assert_eq!(build_static_graph(&recs).unwrap(), build_static_graph(&shuffled).unwrap());
        prop_assert_eq!(build_timed_store(&recs), build_timed_store(&shuffled));
    }

    #[test]
    fn static_edges_equal_store_pairs(rows in prop::collection::vec((0u8..8, 0u8..5, 1990i32..1996), 0..40)) {
        let recs = records_of(&rows);
        let g = build_static_graph(&recs).unwrap();
        let store = build_timed_store(&recs);
        let graph_edges: BTreeSet<(&str, &str)> = g.edge_ids().collect();
        let store_edges: BTreeSet<(&str, &str)> =
            (0..store.pairs().len() as u32).map(|p| store.pair_ids(p)).collect();
        prop_assert_eq!(graph_edges, store_edges);
        // year index and pair lists agree
        for p in 0..store.pairs().len() as u32 {
            for &y in store.years_of(p) {
                prop_assert!(store.pairs_in_year(y).contains(&p));
            }
        }
        prop_assert_eq!(store.project_count(), recs.len());
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(("[a-z ,\"]{1,6}", "[A-Z0-9]{1,4}", 1900i32..2100), 0..20)) {
        let recs: Vec<ProjectRecord> = rows
            .iter()
            .enumerate()
            .filter(|(_, (f, _, _))| !f.trim().is_empty())
            .map(|(i, (f, o, y))| ProjectRecord::new(&format!("P{i}"), f.trim(), o, *y))
            .collect();
        let mut buf = Vec::new();
        write_records_csv(&recs, &mut buf).unwrap();
        let back = parse_records(&buf[..], InputFormat::Csv, &ParseOptions::default()).unwrap();
        prop_assert!(back.errors.is_empty());
        prop_assert_eq!(back.records, recs);
    }
}

fn random_graph(rng: &mut impl Rng, max_side: usize, p: f64) -> BipartiteGraph {
    let nf = rng.gen_range(1..=max_side);
    let no = rng.gen_range(1..=max_side);
    let firms: Vec<String> = (0..nf).map(|i| format!("f{i}")).collect();
    let orgs: Vec<String> = (0..no).map(|i| format!("o{i}")).collect();
    let mut b = bipartite_lens::GraphBuilder::new();
    for f in &firms {
        b.add_node(&NodeRef::firm(f.as_str())).unwrap();
    }
    for o in &orgs {
        b.add_node(&NodeRef::org(o.as_str())).unwrap();
    }
    for f in &firms {
        for o in &orgs {
            if rng.gen::<f64>() < p {
                b.add_pair(f, o).unwrap();
            }
        }
    }
    b.freeze()
}

#[test]
fn census_matches_enumeration_on_random_graphs() {
    let mut rng = rng_from_seed(2024);
    for i in 0..300 {
        let p = 0.1 * (1 + i % 9) as f64;
        let g = random_graph(&mut rng, 10, p);
        let fast = clustering_census(&g).unwrap();
        let slow = brute_force_census(&g).unwrap();
        assert_eq!(fast, slow, "graph {i}");
    }
}

#[test]
fn complete_bipartite_graphs_close_every_path() {
    for m in 2..=6 {
        for n in 2..=6 {
            let g = gen_er_bipartite(m, n, 1.0, 0).unwrap();
            assert_eq!(
                clustering_census(&g).unwrap().coefficient(),
                Coefficient::Defined(1.0)
            );
            // closed forms: C(m,2)·C(n,2) squares, m·n·(m−1)(n−1) paths
            let sq = (m * (m - 1) / 2 * n * (n - 1) / 2) as u64;
            assert_eq!(count_squares(&g).unwrap(), sq);
            assert_eq!(count_three_paths(&g).unwrap(), (m * n * (m - 1) * (n - 1)) as u64);
        }
    }
}

#[test]
fn trees_have_no_squares() {
    let mut rng = rng_from_seed(77);
    for _ in 0..100 {
        let size = rng.gen_range(2..40);
        let mut firms = vec!["f0".to_string()];
        let mut orgs: Vec<String> = Vec::new();
        let mut pairs = Vec::new();
        for i in 1..size {
            // alternate attaching a new org to a firm and a new firm to an org
            if orgs.is_empty() || rng.gen_bool(0.5) {
                let f = firms.choose(&mut rng).unwrap().clone();
                let o = format!("o{i}");
                pairs.push((f, o.clone()));
                orgs.push(o);
            } else {
                let o = orgs.choose(&mut rng).unwrap().clone();
                let f = format!("f{i}");
                pairs.push((f.clone(), o));
                firms.push(f);
            }
        }
        let g = BipartiteGraph::from_pairs(pairs.iter().map(|(f, o)| (f.as_str(), o.as_str()))).unwrap();
        let c = clustering_census(&g).unwrap();
        assert_eq!(c.squares, 0);
        if c.three_paths > 0 {
            assert_eq!(c.coefficient(), Coefficient::Defined(0.0));
        }
    }
}

fn small_stream(seed: u64, years: i32, projects: usize) -> TimedEdgeStore {
    let cfg = GeneratorConfig {
        seed,
        n_orgs: 12,
        n_projects: projects,
        year_range: (2000, 2000 + years - 1),
        new_firm_prob: 0.3,
        shift: None,
    };
    TimedEdgeStore::from_records(&gen_pa_stream(&cfg).unwrap())
}

#[test]
fn six_year_scan_matches_recomputation() {
    let store = small_stream(1, 6, 600);
    let m = scan_all_windows(&store, ScanOptions::default()).unwrap();
    assert_eq!(m.cells.len(), 21);
    for (w, cell) in &m.cells {
        let g = window_graph(&store, *w).unwrap();
        assert_eq!(cell.census, clustering_census(&g).unwrap(), "{w:?}");
        assert_eq!(cell.edge_count, window_edges(&store, *w).unwrap().len());
    }
}

#[test]
fn eight_year_rows_match_recomputation() {
    for seed in 0..5 {
        let store = small_stream(seed, 8, 800);
        let ends: Vec<i32> = (2002..2008).collect();
        let row = incremental_row_scan(&store, 2002, &ends).unwrap();
        for (c, &e) in row.iter().zip(&ends) {
            let g = window_graph(&store, WindowSpec::new(2002, e)).unwrap();
            assert_eq!(*c, clustering_census(&g).unwrap());
        }
    }
}

#[test]
fn window_edge_sets_nest() {
    let store = small_stream(3, 8, 500);
    for s in 2001..2006 {
        for e in s..2006 {
            let inner = window_edges(&store, WindowSpec::new(s, e)).unwrap();
            let longer = window_edges(&store, WindowSpec::new(s, e + 1)).unwrap();
            let wider = window_edges(&store, WindowSpec::new(s - 1, e + 1)).unwrap();
            assert!(inner.is_subset(&longer));
            assert!(longer.is_subset(&wider));
        }
    }
}

#[test]
fn diagonal_cells_use_one_year() {
    let cfg = GeneratorConfig {
        seed: 9,
        n_orgs: 10,
        n_projects: 700,
        year_range: (2010, 2015),
        new_firm_prob: 0.3,
        shift: None,
    };
    let recs = gen_pa_stream(&cfg).unwrap();
    let m = scan_all_windows(&TimedEdgeStore::from_records(&recs), ScanOptions::default()).unwrap();
    for y in 2010..=2015 {
        let year_only: Vec<_> = recs.iter().filter(|r| r.start_year == y).cloned().collect();
        let g = build_static_graph(&year_only).unwrap();
        assert_eq!(m.cell(y, y).unwrap().census, clustering_census(&g).unwrap());
    }
    let full = build_static_graph(&recs).unwrap();
    assert_eq!(m.cell(2010, 2015).unwrap().census, clustering_census(&full).unwrap());
}

#[test]
fn exclusion_equals_filtered_records() {
    let cfg = GeneratorConfig {
        seed: 12,
        n_orgs: 10,
        n_projects: 900,
        year_range: (2000, 2007),
        new_firm_prob: 0.3,
        shift: None,
    };
    let recs = gen_pa_stream(&cfg).unwrap();
    let store = TimedEdgeStore::from_records(&recs);
    for year in [2000, 2003, 2007] {
        let excluded = scan_all_windows(
            &store,
            ScanOptions {
                exclude_year: Some(year),
                jobs: 2,
            },
        )
        .unwrap();
        let kept: Vec<_> = recs.iter().filter(|r| r.start_year != year).cloned().collect();
        let mut rebuilt = scan_all_windows(&TimedEdgeStore::from_records(&kept), ScanOptions::default()).unwrap();
        // the rebuilt store still spans the hole year; drop its windows' axis entry
        rebuilt.years.retain(|&y| y != year);
        rebuilt.cells.retain(|w, _| w.start_year != year && w.end_year != year);
        assert_eq!(excluded.years, rebuilt.years);
        assert_eq!(excluded.cells, rebuilt.cells);
    }
}

#[test]
fn repeated_scans_are_identical() {
    let store = small_stream(4, 10, 1500);
    let a = scan_all_windows(&store, ScanOptions { exclude_year: None, jobs: 1 }).unwrap();
    let b = scan_all_windows(&store, ScanOptions { exclude_year: None, jobs: 3 }).unwrap();
    assert_eq!(a, b);
}
