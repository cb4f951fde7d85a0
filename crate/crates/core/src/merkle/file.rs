//! JSON proof documents exchanged by the CLI and the C API.
//!
//! ```json
//! {
//!   "algorithm": "sha256",
//!   "m": 256,
//!   "leaf_encoding": "utf8",
//!   "leaf": "hello",
//!   "siblings": ["…"],
//!   "directions": ["R"],
//!   "root": "…"
//! }
//! ```

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::proof::{Direction, LeafData, MerklePath, MerkleProof};
use crate::digest::{Digest, HashAlgorithm, HashConfig};
use crate::error::{format_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafEncoding {
    Utf8,
    Base64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum DirectionTag {
    L,
    R,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofFile {
    pub algorithm: HashAlgorithm,
    pub m: u32,
    pub leaf_encoding: LeafEncoding,
    pub leaf: String,
    pub siblings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    directions: Option<Vec<DirectionTag>>,
    pub root: String,
}

impl ProofFile {
    /// Leaves that are valid UTF-8 are stored as text, everything else as base64.
    pub fn from_proof(proof: &MerkleProof) -> Self {
        let (leaf_encoding, leaf) = match std::str::from_utf8(proof.leaf.as_bytes()) {
            Ok(text) => (LeafEncoding::Utf8, text.to_owned()),
            Err(_) => (LeafEncoding::Base64, BASE64.encode(proof.leaf.as_bytes())),
        };
        Self {
            algorithm: proof.config.algorithm(),
            m: proof.config.bits(),
            leaf_encoding,
            leaf,
            siblings: proof.path.siblings().iter().map(Digest::to_hex).collect(),
            directions: proof.path.directions().map(|dirs| {
                dirs.iter()
                    .map(|d| match d {
                        Direction::Left => DirectionTag::L,
                        Direction::Right => DirectionTag::R,
                    })
                    .collect()
            }),
            root: proof.root.to_hex(),
        }
    }

    pub fn into_proof(self) -> Result<MerkleProof> {
        let config = HashConfig::new(self.algorithm, self.m)?;
        let leaf = match self.leaf_encoding {
            LeafEncoding::Utf8 => LeafData::from(self.leaf),
            LeafEncoding::Base64 => BASE64
                .decode(self.leaf.as_bytes())
                .map_err(|e| format_err!("leaf is not valid base64: {e}"))?
                .into(),
        };
        let siblings = self
            .siblings
            .iter()
            .map(|h| Digest::from_hex(h, self.m))
            .collect::<Result<Vec<_>>>()?;
        let path = match self.directions {
            None => MerklePath::new(siblings)?,
            Some(tags) => {
                let dirs = tags
                    .into_iter()
                    .map(|t| match t {
                        DirectionTag::L => Direction::Left,
                        DirectionTag::R => Direction::Right,
                    })
                    .collect();
                MerklePath::with_directions(siblings, dirs)
                    .map_err(|e| Error::Format(e.to_string()))?
            }
        };
        Ok(MerkleProof {
            leaf,
            path,
            root: Digest::from_hex(&self.root, self.m)?,
            config,
        })
    }
}

impl MerkleProof {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProofFile::from_proof(self)).expect("proof serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProofFile =
            serde_json::from_str(text).map_err(|e| format_err!("invalid proof file: {e}"))?;
        file.into_proof()
    }
}
