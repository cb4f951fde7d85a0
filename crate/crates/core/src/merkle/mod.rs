//! Binary Merkle trees over truncated digests.
//!
//! Internal nodes hash the concatenated *hex encodings* of their children,
//! `H(hex(left) ‖ hex(right))`. A level with an odd number of nodes pairs its
//! last node with a copy of itself, and a one-leaf tree's root is the leaf hash.

mod file;
mod proof;

pub use file::{LeafEncoding, ProofFile};
pub use proof::{chain_root, verify_proof, Direction, LeafData, MerklePath, MerkleProof};

pub(crate) use proof::fold_chain;

use crate::digest::{hash_pair, truncated_hash, Digest, HashConfig};
use crate::error::{domain_err, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    config: HashConfig,
    leaves: Vec<LeafData>,
    /// `levels[0]` holds leaf hashes, the last level holds only the root.
    levels: Vec<Vec<Digest>>,
}

impl MerkleTree {
    pub fn build<L: AsRef<[u8]>>(leaves: &[L], config: HashConfig) -> Result<Self> {
        if leaves.is_empty() {
            return Err(domain_err!("cannot build a Merkle tree with no leaves"));
        }
        let base: Vec<Digest> = leaves
            .iter()
            .map(|leaf| truncated_hash(leaf.as_ref(), &config))
            .collect();
        let mut levels = vec![base];
        while levels.last().is_some_and(|l| l.len() > 1) {
            let below = levels.last().expect("non-empty");
            let next = below
                .chunks(2)
                .map(|pair| match pair {
                    [left, right] => hash_pair(left, right, &config),
                    [only] => hash_pair(only, only, &config),
                    _ => unreachable!(),
                })
                .collect();
            levels.push(next);
        }
        Ok(Self {
            config,
            leaves: leaves.iter().map(|l| LeafData::from(l.as_ref())).collect(),
            levels,
        })
    }

    pub fn root(&self) -> Digest {
        self.levels.last().expect("at least one level")[0]
    }

    pub fn config(&self) -> &HashConfig {
        &self.config
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaves(&self) -> &[LeafData] {
        &self.leaves
    }

    pub fn levels(&self) -> &[Vec<Digest>] {
        &self.levels
    }

    /// Number of levels above the leaves; the proof length for every leaf.
    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn generate_proof(&self, index: usize) -> Result<MerkleProof> {
        if index >= self.leaf_count() {
            return Err(domain_err!(
                "leaf index {index} out of range for a tree with {} leaves",
                self.leaf_count()
            ));
        }
        let mut siblings = Vec::with_capacity(self.height());
        let mut directions = Vec::with_capacity(self.height());
        let mut i = index;
        for level in &self.levels[..self.height()] {
            let (sibling, direction) = if i.is_multiple_of(2) {
                // Duplicate-last: an unpaired node is its own right sibling.
                (*level.get(i + 1).unwrap_or(&level[i]), Direction::Right)
            } else {
                (level[i - 1], Direction::Left)
            };
            siblings.push(sibling);
            directions.push(direction);
            i /= 2;
        }
        Ok(MerkleProof {
            leaf: self.leaves[index].clone(),
            path: MerklePath::with_directions(siblings, directions)?,
            root: self.root(),
            config: self.config,
        })
    }
}

pub fn build_tree<L: AsRef<[u8]>>(leaves: &[L], config: HashConfig) -> Result<MerkleTree> {
    MerkleTree::build(leaves, config)
}

pub fn generate_proof(tree: &MerkleTree, index: usize) -> Result<MerkleProof> {
    tree.generate_proof(index)
}
