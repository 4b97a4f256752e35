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

//! Robins-Alexander clustering by exact census.
//!
//! A *3-path* is a simple path with three edges (firm-org-firm-org); a
//! *square* is a 4-cycle. Both are counted once per subgraph. Every square
//! holds exactly four 3-paths, so
//!
//! ```text
//! coefficient = 4 * squares / three_paths
//! ```
//!
//! is the fraction of 3-paths whose closing edge exists. It is undefined when
//! the graph has no 3-paths.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::CensusError;
use crate::graph::{BipartiteGraph, Mode};

/// Node cap for [`brute_force_census`].
pub const BRUTE_FORCE_NODE_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Defined(f64),
    Undefined,
}

impl Coefficient {
    pub fn value(self) -> Option<f64> {
        match self {
            Coefficient::Defined(v) => Some(v),
            Coefficient::Undefined => None,
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, Coefficient::Undefined)
    }

    /// Six decimals, or `nan` when undefined.
    pub fn to_csv_field(self) -> String {
        match self {
            Coefficient::Defined(v) => format!("{v:.6}"),
            Coefficient::Undefined => "nan".to_owned(),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_field())
    }
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Coefficient::Defined(v) => s.serialize_f64(*v),
            Coefficient::Undefined => s.serialize_none(),
        }
    }
}

/// Square and 3-path counts with the coefficient derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ClusteringCensus {
    pub squares: u64,
    pub three_paths: u64,
}

impl ClusteringCensus {
    pub fn new(squares: u64, three_paths: u64) -> Self {
        ClusteringCensus {
            squares,
            three_paths,
        }
    }

    pub fn coefficient(&self) -> Coefficient {
        if self.three_paths == 0 {
            Coefficient::Undefined
        } else {
            Coefficient::Defined(4.0 * self.squares as f64 / self.three_paths as f64)
        }
    }
}

impl Serialize for ClusteringCensus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ClusteringCensus", 3)?;
        st.serialize_field("squares", &self.squares)?;
        st.serialize_field("three_paths", &self.three_paths)?;
        st.serialize_field("coefficient", &self.coefficient())?;
        st.end()
    }
}

/// Σ over edges (u, v) of (deg u − 1)(deg v − 1): each 3-path has a unique
/// middle edge.
pub fn count_three_paths(graph: &BipartiteGraph) -> Result<u64, CensusError> {
    let firm_adj = graph.adjacency(Mode::Firm);
    let org_adj = graph.adjacency(Mode::ResearchOrg);
    let mut total: u64 = 0;
    for adj in firm_adj {
        if adj.len() < 2 {
            continue;
        }
        let df = adj.len() as u64 - 1;
        for &o in adj {
            let dorg = org_adj[o as usize].len() as u64 - 1;
            let term = df.checked_mul(dorg).ok_or(CensusError::Overflow)?;
            total = total.checked_add(term).ok_or(CensusError::Overflow)?;
        }
    }
    Ok(total)
}

/// Counts 4-cycles, picking the pair side with the cheaper wedge expansion.
pub fn count_squares(graph: &BipartiteGraph) -> Result<u64, CensusError> {
    count_squares_from(graph, cheaper_pair_side(graph))
}

/// Side whose node pairs are cheapest to accumulate: wedges `u - x - w` are
/// expanded through the centers `x` on the opposite side, so the cost is
/// Σ deg(x)² over that opposite side.
pub fn cheaper_pair_side(graph: &BipartiteGraph) -> Mode {
    let wedge_cost = |centers: Mode| -> u128 {
        graph
            .adjacency(centers)
            .iter()
            .map(|a| (a.len() as u128).pow(2))
            .sum()
    };
    if wedge_cost(Mode::Firm) <= wedge_cost(Mode::ResearchOrg) {
        Mode::ResearchOrg
    } else {
        Mode::Firm
    }
}

/// Counts 4-cycles as Σ over unordered node pairs `{u, w}` of `side` of
/// C(|N(u) ∩ N(w)|, 2).
///
/// For each `u`, wedges `u - x - w` with `w > u` are tallied in a dense
/// counter indexed by `w`; only touched slots are read back and cleared.
pub fn count_squares_from(graph: &BipartiteGraph, side: Mode) -> Result<u64, CensusError> {
    let adj = graph.adjacency(side);
    let centers = graph.adjacency(side.other());
    let mut common = vec![0u32; adj.len()];
    let mut touched: Vec<u32> = Vec::new();
    let mut total: u64 = 0;

    for (u, nbrs) in adj.iter().enumerate() {
        let u = u as u32;
        for &x in nbrs {
            let around = &centers[x as usize];
            let start = around.partition_point(|&w| w <= u);
            for &w in &around[start..] {
                let c = &mut common[w as usize];
                if *c == 0 {
                    touched.push(w);
                }
                *c += 1;
            }
        }
        for &w in &touched {
            let c = common[w as usize] as u64;
            common[w as usize] = 0;
            total = total
                .checked_add(c * (c - 1) / 2)
                .ok_or(CensusError::Overflow)?;
        }
        touched.clear();
    }
    Ok(total)
}

pub fn robins_alexander(graph: &BipartiteGraph) -> Result<Coefficient, CensusError> {
    Ok(clustering_census(graph)?.coefficient())
}

pub fn clustering_census(graph: &BipartiteGraph) -> Result<ClusteringCensus, CensusError> {
    Ok(ClusteringCensus::new(
        count_squares(graph)?,
        count_three_paths(graph)?,
    ))
}

/// Enumeration oracle for small graphs.
///
/// Every 3-path and every square spans two firms and two orgs. For each such
/// node quadruple, with `k` of its four possible edges present, the quadruple
/// holds C(k, 3) 3-paths (any three edges of a 4-cycle form a path) and one
/// square iff `k = 4`.
pub fn brute_force_census(graph: &BipartiteGraph) -> Result<ClusteringCensus, CensusError> {
    let nf = graph.node_count(Mode::Firm);
    let no = graph.node_count(Mode::ResearchOrg);
    if nf + no > BRUTE_FORCE_NODE_CAP {
        return Err(CensusError::TooLarge {
            nodes: nf + no,
            cap: BRUTE_FORCE_NODE_CAP,
        });
    }
    let mut linked = vec![false; nf * no];
    for (f, o) in graph.edges() {
        linked[f as usize * no + o as usize] = true;
    }
    let has = |f: usize, o: usize| linked[f * no + o] as u64;

    let mut squares = 0;
    let mut paths = 0;
    for f1 in 0..nf {
        for f2 in f1 + 1..nf {
            for o1 in 0..no {
                for o2 in o1 + 1..no {
                    let k = has(f1, o1) + has(f1, o2) + has(f2, o1) + has(f2, o2);
                    match k {
                        4 => {
                            squares += 1;
                            paths += 4;
                        }
                        3 => paths += 1,
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(ClusteringCensus::new(squares, paths))
}
