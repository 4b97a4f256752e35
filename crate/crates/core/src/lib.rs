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

//! Analysis toolkit for two-mode (firm / research organization) collaboration
//! networks.
//!
//! The pipeline is:
//!
//! 1. [`ingest`] parses timestamped project records and builds both the
//!    static ever-cooperated [`BipartiteGraph`] and a [`TimedEdgeStore`].
//! 2. [`degree_stats`] produces per-mode rank-size distributions and a
//!    discrete power-law fit.
//! 3. [`clustering`] computes the Robins-Alexander coefficient from an exact
//!    census of 4-cycles and 3-edge paths.
//! 4. [`temporal`] scans the coefficient over every `[start, end]` year window.
//! 5. [`synth`] provides seeded generators standing in for real corpora.

pub mod clustering;
pub mod degree_stats;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod synth;
pub mod temporal;

pub use clustering::{clustering_census, ClusteringCensus, Coefficient};
pub use error::{CensusError, FitError, GenError, GraphError, IngestError, ScanError};
pub use graph::{BipartiteGraph, GraphBuilder, Mode, NodeRef};
pub use ingest::{InputFormat, ProjectRecord, RecordError, TimedEdgeStore};
pub use temporal::{WindowMatrix, WindowSpec};
