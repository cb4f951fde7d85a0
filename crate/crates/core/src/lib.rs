//! Merkle trees over truncated hashes, with closed-form and empirical
//! root-collision probabilities.
//!
//! - [`digest`]: SHA-256 / Keccak-256 truncated to `m` bits.
//! - [`merkle`]: tree construction, proofs, and the direction-less chain root.
//! - [`theory`]: exact and approximate collision probabilities, birthday bounds.
//! - [`montecarlo`]: seeded experiments estimating root-collision frequency.
//! - [`attack`]: birthday search for colliding inputs.
//! - [`report`]: CSV, JSON and SVG output.
//! - [`cli`]: the `merkle-collision` command line.

pub mod attack;
pub mod cli;
pub mod digest;
pub mod error;
pub mod merkle;
pub mod montecarlo;
pub mod report;
pub mod theory;

pub use digest::{truncated_hash, Digest, HashAlgorithm, HashConfig};
pub use error::{Error, Result};
pub use merkle::{
    build_tree, chain_root, generate_proof, verify_proof, Direction, LeafData, MerklePath,
    MerkleProof, MerkleTree,
};
