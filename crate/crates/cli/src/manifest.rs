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

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record written next to a command's output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub parameters: serde_json::Value,
    /// Hex SHA-256 of the raw input bytes.
    pub input_digest: String,
    pub version: &'static str,
}

impl RunManifest {
    pub fn new<P: Serialize>(command: &'static str, params: &P, input: &[u8]) -> Self {
        RunManifest {
            command,
            parameters: serde_json::to_value(params).expect("parameters serialize"),
            input_digest: digest(input),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
