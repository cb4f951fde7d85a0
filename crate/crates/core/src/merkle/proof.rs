use std::fmt;

use crate::digest::{hash_pair, truncated_hash, Digest, HashConfig};
use crate::error::{domain_err, Result};

/// Raw bytes of one data block.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LeafData(Vec<u8>);

impl LeafData {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Self(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[u8]> for LeafData {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl From<Vec<u8>> for LeafData {
    fn from(v: Vec<u8>) -> Self {
        Self(v)
    }
}

impl From<&[u8]> for LeafData {
    fn from(v: &[u8]) -> Self {
        Self(v.to_vec())
    }
}

impl From<String> for LeafData {
    fn from(s: String) -> Self {
        Self(s.into_bytes())
    }
}

impl From<&str> for LeafData {
    fn from(s: &str) -> Self {
        Self(s.as_bytes().to_vec())
    }
}

impl fmt::Display for LeafData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from_utf8_lossy(&self.0))
    }
}

/// Which side of the running hash a sibling sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Sibling is hashed first: `H(sibling ‖ running)`.
    Left,
    /// Sibling is hashed second: `H(running ‖ sibling)`.
    Right,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

/// Sibling digests from a leaf up to the root, optionally with directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerklePath {
    siblings: Vec<Digest>,
    directions: Option<Vec<Direction>>,
}

impl MerklePath {
    /// A direction-less path; every sibling is appended on the right.
    pub fn new(siblings: Vec<Digest>) -> Result<Self> {
        check_uniform_bits(&siblings)?;
        Ok(Self {
            siblings,
            directions: None,
        })
    }

    pub fn with_directions(siblings: Vec<Digest>, directions: Vec<Direction>) -> Result<Self> {
        check_uniform_bits(&siblings)?;
        if siblings.len() != directions.len() {
            return Err(domain_err!(
                "path has {} siblings but {} directions",
                siblings.len(),
                directions.len()
            ));
        }
        Ok(Self {
            siblings,
            directions: Some(directions),
        })
    }

    pub fn empty() -> Self {
        Self {
            siblings: Vec::new(),
            directions: None,
        }
    }

    /// Path length `k`.
    pub fn len(&self) -> usize {
        self.siblings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.siblings.is_empty()
    }

    pub fn siblings(&self) -> &[Digest] {
        &self.siblings
    }

    pub fn directions(&self) -> Option<&[Direction]> {
        self.directions.as_deref()
    }

    /// Direction of step `i`, defaulting to [`Direction::Right`].
    pub fn direction(&self, i: usize) -> Direction {
        self.directions
            .as_ref()
            .map_or(Direction::Right, |dirs| dirs[i])
    }

    /// Mutable access for building tampered fixtures.
    pub fn directions_mut(&mut self) -> Option<&mut [Direction]> {
        self.directions.as_deref_mut()
    }

    pub fn siblings_mut(&mut self) -> &mut [Digest] {
        &mut self.siblings
    }

    /// Drops direction flags, leaving the chain form.
    pub fn without_directions(&self) -> Self {
        Self {
            siblings: self.siblings.clone(),
            directions: None,
        }
    }
}

fn check_uniform_bits(siblings: &[Digest]) -> Result<()> {
    if let Some(first) = siblings.first() {
        if let Some(bad) = siblings.iter().find(|d| d.bits() != first.bits()) {
            return Err(domain_err!(
                "path mixes digest lengths m={} and m={}",
                first.bits(),
                bad.bits()
            ));
        }
    }
    Ok(())
}

fn check_path_bits(path: &MerklePath, config: &HashConfig) -> Result<()> {
    if let Some(d) = path.siblings.first() {
        if d.bits() != config.bits() {
            return Err(domain_err!(
                "path digests have m={} but the hash config has m={}",
                d.bits(),
                config.bits()
            ));
        }
    }
    Ok(())
}

/// A leaf, its authentication path and the root it should reproduce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleProof {
    pub leaf: LeafData,
    pub path: MerklePath,
    pub root: Digest,
    pub config: HashConfig,
}

impl MerkleProof {
    /// Recomputes the root from the leaf and path, honouring direction flags.
    pub fn computed_root(&self) -> Result<Digest> {
        check_path_bits(&self.path, &self.config)?;
        if self.root.bits() != self.config.bits() {
            return Err(domain_err!(
                "proof root has m={} but the hash config has m={}",
                self.root.bits(),
                self.config.bits()
            ));
        }
        let start = truncated_hash(self.leaf.as_bytes(), &self.config);
        Ok(self
            .path
            .siblings
            .iter()
            .enumerate()
            .fold(start, |running, (i, sibling)| {
                match self.path.direction(i) {
                    Direction::Right => hash_pair(&running, sibling, &self.config),
                    Direction::Left => hash_pair(sibling, &running, &self.config),
                }
            }))
    }

    pub fn verify(&self) -> Result<bool> {
        Ok(self.computed_root()? == self.root)
    }
}

/// True iff the proof's leaf and path fold up to its root.
///
/// Digest-length mismatches are reported as errors rather than `false`.
pub fn verify_proof(proof: &MerkleProof) -> Result<bool> {
    proof.verify()
}

/// Direction-less chain root `H(…H(H(d) ‖ h_1)… ‖ h_k)`.
///
/// Any direction flags on `path` are ignored.
pub fn chain_root(data: &[u8], path: &MerklePath, config: &HashConfig) -> Result<Digest> {
    check_path_bits(path, config)?;
    Ok(fold_chain(
        truncated_hash(data, config),
        &path.siblings,
        config,
    ))
}

/// Unchecked chain fold used by the experiment hot loops.
pub(crate) fn fold_chain(start: Digest, siblings: &[Digest], config: &HashConfig) -> Digest {
    siblings.iter().fold(start, |running, sibling| {
        hash_pair(&running, sibling, config)
    })
}
