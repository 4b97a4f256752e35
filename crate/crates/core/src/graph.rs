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

//! Two-mode graph model.
//!
//! Nodes belong to exactly one of two modes ([`Mode::Firm`] or
//! [`Mode::ResearchOrg`]) and edges only ever join a firm to a research
//! organization. Graphs are assembled with a [`GraphBuilder`] and then frozen
//! into an immutable [`BipartiteGraph`]. Freezing interns ids into dense
//! per-mode indices, ordered by ascending id, so two builders fed the same
//! edge set in any order freeze into identical graphs.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Firm,
    ResearchOrg,
}

impl Mode {
    pub fn other(self) -> Mode {
        match self {
            Mode::Firm => Mode::ResearchOrg,
            Mode::ResearchOrg => Mode::Firm,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Firm => f.write_str("firm"),
            Mode::ResearchOrg => f.write_str("org"),
        }
    }
}

/// A node identified by its external id and its mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub id: String,
    pub mode: Mode,
}

impl NodeRef {
    pub fn new(id: impl Into<String>, mode: Mode) -> Self {
        NodeRef { id: id.into(), mode }
    }

    pub fn firm(id: impl Into<String>) -> Self {
        Self::new(id, Mode::Firm)
    }

    pub fn org(id: impl Into<String>) -> Self {
        Self::new(id, Mode::ResearchOrg)
    }
}

/// Mutable, single-writer graph under construction.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    firms: Interner,
    orgs: Interner,
    edges: BTreeSet<(u32, u32)>,
}

#[derive(Debug, Default, Clone)]
struct Interner {
    index: HashMap<String, u32>,
    ids: Vec<String>,
}

impl Interner {
    fn intern(&mut self, id: &str) -> u32 {
        if let Some(&ix) = self.index.get(id) {
            return ix;
        }
        let ix = self.ids.len() as u32;
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), ix);
        ix
    }

    /// Permutation from insertion index to rank in ascending id order, plus
    /// the sorted ids.
    fn sorted(self) -> (Vec<u32>, Vec<String>) {
        let mut order: Vec<u32> = (0..self.ids.len() as u32).collect();
        order.sort_unstable_by(|&a, &b| self.ids[a as usize].cmp(&self.ids[b as usize]));
        let mut remap = vec![0u32; self.ids.len()];
        for (rank, &old) in order.iter().enumerate() {
            remap[old as usize] = rank as u32;
        }
        let mut ids = self.ids;
        let sorted_ids = order.iter().map(|&o| std::mem::take(&mut ids[o as usize])).collect();
        (remap, sorted_ids)
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a node without edges. Returns its provisional index.
    pub fn add_node(&mut self, node: &NodeRef) -> Result<u32, GraphError> {
        if node.id.is_empty() {
            return Err(GraphError::EmptyId);
        }
        Ok(match node.mode {
            Mode::Firm => self.firms.intern(&node.id),
            Mode::ResearchOrg => self.orgs.intern(&node.id),
        })
    }

    /// Adds the edge between a firm and a research organization. The two
    /// endpoints may be given in either order; repeats are no-ops.
    pub fn add_edge(&mut self, a: &NodeRef, b: &NodeRef) -> Result<(), GraphError> {
        if a.mode == b.mode {
            return Err(GraphError::ModeViolation {
                a: a.id.clone(),
                b: b.id.clone(),
                mode: a.mode,
            });
        }
        let (firm, org) = if a.mode == Mode::Firm { (a, b) } else { (b, a) };
        let f = self.add_node(firm)?;
        let o = self.add_node(org)?;
        self.edges.insert((f, o));
        Ok(())
    }

    /// Shorthand for [`add_edge`](Self::add_edge) with plain ids.
    pub fn add_pair(&mut self, firm_id: &str, org_id: &str) -> Result<(), GraphError> {
        self.add_edge(&NodeRef::firm(firm_id), &NodeRef::org(org_id))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn freeze(self) -> BipartiteGraph {
        let (firm_remap, firm_ids) = self.firms.sorted();
        let (org_remap, org_ids) = self.orgs.sorted();
        let mut firm_adj = vec![Vec::new(); firm_ids.len()];
        let mut org_adj = vec![Vec::new(); org_ids.len()];
        for (f, o) in self.edges {
            let f = firm_remap[f as usize];
            let o = org_remap[o as usize];
            firm_adj[f as usize].push(o);
            org_adj[o as usize].push(f);
        }
        firm_adj.iter_mut().for_each(|n| n.sort_unstable());
        org_adj.iter_mut().for_each(|n| n.sort_unstable());
        let edge_count = firm_adj.iter().map(Vec::len).sum();
        BipartiteGraph {
            firm_ids,
            org_ids,
            firm_adj,
            org_adj,
            edge_count,
        }
    }
}

/// Frozen, immutable two-mode graph.
///
/// Node indices are dense per mode and follow ascending id order. Neighbor
/// lists hold indices into the opposite mode and are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BipartiteGraph {
    firm_ids: Vec<String>,
    org_ids: Vec<String>,
    firm_adj: Vec<Vec<u32>>,
    org_adj: Vec<Vec<u32>>,
    edge_count: usize,
}

impl BipartiteGraph {
    /// Builds a frozen graph from `(firm_id, org_id)` pairs.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut b = GraphBuilder::new();
        for (f, o) in pairs {
            b.add_pair(f, o)?;
        }
        Ok(b.freeze())
    }

    pub fn node_count(&self, mode: Mode) -> usize {
        self.ids(mode).len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn ids(&self, mode: Mode) -> &[String] {
        match mode {
            Mode::Firm => &self.firm_ids,
            Mode::ResearchOrg => &self.org_ids,
        }
    }

    /// Neighbor index lists for every node of `mode`.
    pub fn adjacency(&self, mode: Mode) -> &[Vec<u32>] {
        match mode {
            Mode::Firm => &self.firm_adj,
            Mode::ResearchOrg => &self.org_adj,
        }
    }

    pub fn index_of(&self, node: &NodeRef) -> Option<u32> {
        self.ids(node.mode)
            .binary_search_by(|probe| probe.as_str().cmp(&node.id))
            .ok()
            .map(|ix| ix as u32)
    }

    pub fn degree(&self, mode: Mode, index: u32) -> usize {
        self.adjacency(mode)[index as usize].len()
    }

    /// Per-node degree for `mode`, ascending by id.
    pub fn degree_sequence(&self, mode: Mode) -> Vec<(NodeRef, usize)> {
        self.ids(mode)
            .iter()
            .zip(self.adjacency(mode))
            .map(|(id, adj)| (NodeRef::new(id.clone(), mode), adj.len()))
            .collect()
    }

    pub fn neighbors(&self, node: &NodeRef) -> Result<Vec<NodeRef>, GraphError> {
        let ix = self
            .index_of(node)
            .ok_or_else(|| GraphError::UnknownNode(node.clone()))?;
        let other = node.mode.other();
        let ids = self.ids(other);
        Ok(self.adjacency(node.mode)[ix as usize]
            .iter()
            .map(|&n| NodeRef::new(ids[n as usize].clone(), other))
            .collect())
    }

    /// Edges as `(firm_index, org_index)`, firm-major and sorted.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.firm_adj
            .iter()
            .enumerate()
            .flat_map(|(f, adj)| adj.iter().map(move |&o| (f as u32, o)))
    }

    /// Edges as `(firm_id, org_id)` string pairs.
    pub fn edge_ids(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges()
            .map(|(f, o)| (self.firm_ids[f as usize].as_str(), self.org_ids[o as usize].as_str()))
    }

    /// Canonical text form: one `firm,org` line per edge, followed by the
    /// isolated nodes of each mode.
    pub fn canonical_form(&self) -> String {
        let mut out = String::new();
        for (f, o) in self.edge_ids() {
            out.push_str(f);
            out.push(',');
            out.push_str(o);
            out.push('\n');
        }
        for mode in [Mode::Firm, Mode::ResearchOrg] {
            for (id, adj) in self.ids(mode).iter().zip(self.adjacency(mode)) {
                if adj.is_empty() {
                    out.push_str(&format!("{mode}:{id}\n"));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k22() -> BipartiteGraph {
        BipartiteGraph::from_pairs([("a1", "p1"), ("a1", "p2"), ("a2", "p1"), ("a2", "p2")]).unwrap()
    }

    #[test]
    fn single_edge() {
        let mut b = GraphBuilder::new();
        b.add_edge(&NodeRef::firm("f1"), &NodeRef::org("p1")).unwrap();
        let g = b.freeze();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(Mode::Firm, 0), 1);
        assert_eq!(g.degree(Mode::ResearchOrg, 0), 1);
    }

    #[test]
    fn repeated_edge_is_idempotent() {
        let mut b = GraphBuilder::new();
        b.add_pair("f1", "p1").unwrap();
        b.add_pair("f1", "p1").unwrap();
        assert_eq!(b.freeze().edge_count(), 1);
    }

    #[test]
    fn same_mode_edge_rejected() {
        let mut b = GraphBuilder::new();
        let err = b.add_edge(&NodeRef::firm("f1"), &NodeRef::firm("f2")).unwrap_err();
        assert!(matches!(err, GraphError::ModeViolation { .. }));
        assert_eq!(b.edge_count(), 0);
    }

    #[test]
    fn reversed_endpoints_accepted() {
        let mut b = GraphBuilder::new();
        b.add_edge(&NodeRef::org("p1"), &NodeRef::firm("f1")).unwrap();
        let g = b.freeze();
        assert_eq!(g.edge_ids().collect::<Vec<_>>(), vec![("f1", "p1")]);
    }

    #[test]
    fn empty_id_rejected() {
        let mut b = GraphBuilder::new();
        assert!(matches!(b.add_pair("", "p1"), Err(GraphError::EmptyId)));
    }

    #[test]
    fn degree_sequences() {
        let g = k22();
        let seq: Vec<_> = g
            .degree_sequence(Mode::Firm)
            .into_iter()
            .map(|(n, d)| (n.id, d))
            .collect();
        assert_eq!(seq, vec![("a1".to_string(), 2), ("a2".to_string(), 2)]);

        assert!(BipartiteGraph::default().degree_sequence(Mode::Firm).is_empty());

        let g = BipartiteGraph::from_pairs([
            ("a1", "p1"),
            ("a1", "p2"),
            ("a1", "p3"),
            ("a2", "p1"),
            ("a2", "p2"),
        ])
        .unwrap();
        let seq: Vec<_> = g
            .degree_sequence(Mode::Firm)
            .into_iter()
            .map(|(n, d)| (n.id, d))
            .collect();
        assert_eq!(seq, vec![("a1".to_string(), 3), ("a2".to_string(), 2)]);
    }

    #[test]
    fn degree_sequence_includes_isolated_nodes() {
        let mut b = GraphBuilder::new();
        b.add_pair("b", "p1").unwrap();
        b.add_node(&NodeRef::firm("a")).unwrap();
        let seq = b.freeze().degree_sequence(Mode::Firm);
        assert_eq!(seq[0], (NodeRef::firm("a"), 0));
        assert_eq!(seq[1], (NodeRef::firm("b"), 1));
    }

    #[test]
    fn neighbor_queries() {
        let g = k22();
        assert_eq!(
            g.neighbors(&NodeRef::firm("a1")).unwrap(),
            vec![NodeRef::org("p1"), NodeRef::org("p2")]
        );

        let mut b = GraphBuilder::new();
        b.add_node(&NodeRef::org("lonely")).unwrap();
        assert!(b.freeze().neighbors(&NodeRef::org("lonely")).unwrap().is_empty());

        assert!(matches!(
            g.neighbors(&NodeRef::firm("zz")),
            Err(GraphError::UnknownNode(_))
        ));
        // same id, wrong mode
        assert!(g.neighbors(&NodeRef::org("a1")).is_err());
    }
}
