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

//! Seeded synthetic corpora.
//!
//! All generators draw from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`), so a config and seed fully
//! determine the output on every platform.
//!
//! Id layout: firms `F<n>`, hot-block firms `H<n>`, organizations `O<n>`,
//! projects `P<n>` (or `E<n>` for edge lists), zero-padded so that
//! lexicographic order matches numeric order.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::GenError;
use crate::graph::{BipartiteGraph, GraphBuilder, NodeRef};
use crate::ingest::ProjectRecord;

pub type SynthRng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> SynthRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn width(n: usize) -> usize {
    n.max(1).to_string().len()
}

fn id(prefix: char, i: usize, w: usize) -> String {
    format!("{prefix}{i:0w$}")
}

/// Erdős–Rényi style bipartite graph: each firm/org pair is linked
/// independently with probability `p`. All nodes are registered, isolated or
/// not.
pub fn gen_er_bipartite(
    n_firms: usize,
    n_orgs: usize,
    p: f64,
    seed: u64,
) -> Result<BipartiteGraph, GenError> {
    if n_firms == 0 || n_orgs == 0 {
        return Err(GenError::InvalidConfig("node counts must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::InvalidConfig(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = rng_from_seed(seed);
    let (wf, wo) = (width(n_firms), width(n_orgs));
    let firms: Vec<NodeRef> = (0..n_firms).map(|i| NodeRef::firm(id('F', i, wf))).collect();
    let orgs: Vec<NodeRef> = (0..n_orgs).map(|i| NodeRef::org(id('O', i, wo))).collect();
    let mut b = GraphBuilder::new();
    for f in &firms {
        b.add_node(f).expect("generated ids are non-empty");
    }
    for o in &orgs {
        b.add_node(o).expect("generated ids are non-empty");
    }
    for f in &firms {
        for o in &orgs {
            if rng.gen::<f64>() < p {
                b.add_edge(f, o).expect("generated edges are cross-mode");
            }
        }
    }
    Ok(b.freeze())
}

/// One record per edge, all dated `year`.
pub fn edge_list_records(graph: &BipartiteGraph, year: i32) -> Vec<ProjectRecord> {
    let w = width(graph.edge_count());
    graph
        .edge_ids()
        .enumerate()
        .map(|(i, (f, o))| ProjectRecord::new(&id('E', i, w), f, o, year))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeShift {
    pub shift_year: i32,
    pub hot_firm_count: usize,
    pub hot_org_count: usize,
    pub hot_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_orgs: usize,
    pub n_projects: usize,
    pub year_range: (i32, i32),
    pub new_firm_prob: f64,
    pub shift: Option<RegimeShift>,
}

impl GeneratorConfig {
    /// Preferential-attachment reference corpus: 50,000 projects over 74
    /// organizations, 1992-2018.
    pub fn pa_reference() -> Self {
        GeneratorConfig {
            seed: 7,
            n_orgs: 74,
            n_projects: 50_000,
            year_range: (1992, 2018),
            new_firm_prob: 0.4,
            shift: None,
        }
    }

    /// Regime-shift demo corpus: 10,000 projects over 74 organizations,
    /// 2000-2014, with a dense 8 x 4 block switching on in 2008.
    pub fn regime_shift_demo() -> Self {
        GeneratorConfig {
            seed: 11,
            n_orgs: 74,
            n_projects: 10_000,
            year_range: (2000, 2014),
            new_firm_prob: 0.5,
            shift: Some(RegimeShift {
                shift_year: 2008,
                hot_firm_count: 8,
                hot_org_count: 4,
                hot_prob: 0.8,
            }),
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let (start, end) = self.year_range;
        if start > end {
            return Err(GenError::InvalidConfig(format!("year range {start}..{end} is inverted")));
        }
        if self.n_orgs == 0 {
            return Err(GenError::InvalidConfig("n_orgs must be at least 1".into()));
        }
        if self.n_projects == 0 {
            return Err(GenError::InvalidConfig("n_projects must be at least 1".into()));
        }
        if !(self.new_firm_prob > 0.0 && self.new_firm_prob <= 1.0) {
            return Err(GenError::InvalidConfig(format!(
                "new_firm_prob {} outside (0, 1]",
                self.new_firm_prob
            )));
        }
        if let Some(s) = &self.shift {
            if s.shift_year < start || s.shift_year > end {
                return Err(GenError::ShiftOutsideRange {
                    shift: s.shift_year,
                    start,
                    end,
                });
            }
            if !(0.0..=1.0).contains(&s.hot_prob) {
                return Err(GenError::InvalidConfig(format!(
                    "hot_prob {} outside [0, 1]",
                    s.hot_prob
                )));
            }
            if s.hot_org_count == 0 || s.hot_org_count > self.n_orgs {
                return Err(GenError::InvalidConfig(format!(
                    "hot_org_count {} must lie in 1..={}",
                    s.hot_org_count, self.n_orgs
                )));
            }
            if s.hot_firm_count == 0 || s.hot_firm_count > self.n_projects {
                return Err(GenError::InvalidConfig(format!(
                    "hot_firm_count {} must lie in 1..={}",
                    s.hot_firm_count, self.n_projects
                )));
            }
        }
        Ok(())
    }
}

/// Preferential-attachment project stream.
///
/// Each project gets a uniform year in `year_range`. Its firm is new with
/// probability `new_firm_prob`, otherwise an existing firm picked with
/// probability proportional to its project count so far. Its organization
/// is uniform over `n_orgs`.
pub fn gen_pa_stream(config: &GeneratorConfig) -> Result<Vec<ProjectRecord>, GenError> {
    if config.shift.is_some() {
        return Err(GenError::InvalidConfig(
            "preferential-attachment stream takes no shift; use the regime-shift generator".into(),
        ));
    }
    config.validate()?;
    Ok(generate(config))
}

/// As [`gen_pa_stream`], except that each project dated `shift_year` is,
/// with probability `hot_prob`, placed uniformly inside a fixed block of
/// `hot_firm_count` dedicated firms by the first `hot_org_count`
/// organizations.
pub fn gen_regime_shift_stream(config: &GeneratorConfig) -> Result<Vec<ProjectRecord>, GenError> {
    if config.shift.is_none() {
        return Err(GenError::InvalidConfig("regime-shift stream needs a shift".into()));
    }
    config.validate()?;
    Ok(generate(config))
}

fn generate(config: &GeneratorConfig) -> Vec<ProjectRecord> {
    let mut rng = rng_from_seed(config.seed);
    let (start, end) = config.year_range;
    let wp = width(config.n_projects);
    let wo = width(config.n_orgs);
    let org_ids: Vec<String> = (0..config.n_orgs).map(|i| id('O', i, wo)).collect();
    let hot_ids: Vec<String> = config
        .shift
        .map(|s| {
            let w = width(s.hot_firm_count);
            (0..s.hot_firm_count).map(|i| id('H', i, w)).collect()
        })
        .unwrap_or_default();

    // one entry per regular project, holding its firm index
    let mut urn: Vec<u32> = Vec::with_capacity(config.n_projects);
    let mut firm_count = 0u32;
    let mut records = Vec::with_capacity(config.n_projects);

    for i in 0..config.n_projects {
        let year = rng.gen_range(start..=end);
        let project_id = id('P', i, wp);

        if let Some(s) = config.shift.filter(|s| s.hot_prob > 0.0 && year == s.shift_year) {
            if rng.gen::<f64>() < s.hot_prob {
                let f = rng.gen_range(0..s.hot_firm_count);
                let o = rng.gen_range(0..s.hot_org_count);
                records.push(ProjectRecord {
                    project_id,
                    firm_id: hot_ids[f].clone(),
                    org_id: org_ids[o].clone(),
                    start_year: year,
                });
                continue;
            }
        }

        let firm = if urn.is_empty() || rng.gen::<f64>() < config.new_firm_prob {
            firm_count += 1;
            firm_count - 1
        } else {
            urn[rng.gen_range(0..urn.len())]
        };
        urn.push(firm);
        let org = rng.gen_range(0..config.n_orgs);
        records.push(ProjectRecord {
            project_id,
            firm_id: id('F', firm as usize, wp),
            org_id: org_ids[org].clone(),
            start_year: year,
        });
    }
    records
}
