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

use thiserror::Error;

use crate::graph::{Mode, NodeRef};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {a} - {b} joins two nodes of mode {mode}")]
    ModeViolation { a: String, b: String, mode: Mode },
    #[error("node id must be non-empty")]
    EmptyId,
    #[error("unknown node {} ({})", .0.id, .0.mode)]
    UnknownNode(NodeRef),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unreadable input: {0}")]
    UnreadableInput(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error("count exceeds the 64-bit range")]
    Overflow,
    #[error("graph has {nodes} nodes, enumeration is capped at {cap}")]
    TooLarge { nodes: usize, cap: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("fewer than two observations at or above x_min")]
    InsufficientData,
    #[error("x_min must be at least 1")]
    InvalidXMin,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScanError {
    #[error("window {start}..={end} lies outside the data range {min}..={max}")]
    WindowOutOfRange { start: i32, end: i32, min: i32, max: i32 },
    #[error("window start {start} is after its end {end}")]
    InvertedWindow { start: i32, end: i32 },
    #[error("the edge store holds no projects")]
    EmptyStore,
    #[error(transparent)]
    Census(#[from] CensusError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("shift year {shift} outside {start}..={end}")]
    ShiftOutsideRange { shift: i32, start: i32, end: i32 },
}
