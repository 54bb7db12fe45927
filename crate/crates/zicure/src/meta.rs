//! Provenance header carried by every output file.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = concat!("zicure ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub command: String,
    pub seed: Option<u64>,
    /// SHA-256 of the resolved configuration (output directory excluded).
    pub config_sha256: String,
}

impl Metadata {
    pub fn new(command: &str, seed: Option<u64>, resolved_config: &str) -> Self {
        Metadata {
            tool: TOOL.to_string(),
            command: command.to_string(),
            seed,
            config_sha256: sha256_hex(resolved_config.as_bytes()),
        }
    }

    /// `# key: value` lines for text and CSV outputs.
    pub fn comment_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# tool: {}", self.tool);
        let _ = writeln!(s, "# command: {}", self.command);
        match self.seed {
            Some(seed) => {
                let _ = writeln!(s, "# seed: {seed}");
            }
            None => s.push_str("# seed: none\n"),
        }
        let _ = writeln!(s, "# config_sha256: {}", self.config_sha256);
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}
