//! Truncated cryptographic digests.
//!
//! Every digest in the crate is the leading `m` bits of a 256-bit SHA-256 or
//! Keccak-256 output. Shorter digests make collisions observable with a
//! desk-scale number of hash evaluations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::Digest as _;

use crate::error::{format_err, Error, Result};

/// Width of the underlying hash output, in bits.
pub const FULL_BITS: u32 = 256;

const FULL_BYTES: usize = 32;
const HEX_CHARS: &[u8; 16] = b"0123456789abcdef";

/// Underlying 256-bit hash function.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashAlgorithm {
    #[default]
    Sha256,
    /// Original Keccak padding as used by Ethereum, not FIPS-202 SHA3-256.
    Keccak256,
}

impl HashAlgorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            HashAlgorithm::Sha256 => "sha256",
            HashAlgorithm::Keccak256 => "keccak256",
        }
    }

    fn digest(self, data: &[u8]) -> [u8; FULL_BYTES] {
        match self {
            HashAlgorithm::Sha256 => sha2::Sha256::digest(data).into(),
            HashAlgorithm::Keccak256 => sha3::Keccak256::digest(data).into(),
        }
    }
}

impl fmt::Display for HashAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HashAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sha256" => Ok(HashAlgorithm::Sha256),
            "keccak256" => Ok(HashAlgorithm::Keccak256),
            other => Err(Error::Config(format!(
                "unknown hash algorithm {other:?} (expected sha256 or keccak256)"
            ))),
        }
    }
}

/// Hash algorithm plus truncation length `m` in bits, `1 <= m <= 256`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashConfig {
    algorithm: HashAlgorithm,
    bits: u16,
}

impl HashConfig {
    pub fn new(algorithm: HashAlgorithm, bits: u32) -> Result<Self> {
        if bits == 0 || bits > FULL_BITS {
            return Err(Error::Config(format!(
                "truncation length m must be in 1..=256, got {bits}"
            )));
        }
        Ok(Self {
            algorithm,
            bits: bits as u16,
        })
    }

    pub fn sha256(bits: u32) -> Result<Self> {
        Self::new(HashAlgorithm::Sha256, bits)
    }

    pub fn algorithm(&self) -> HashAlgorithm {
        self.algorithm
    }

    pub fn bits(&self) -> u32 {
        u32::from(self.bits)
    }

    /// Length of the canonical hex encoding.
    pub fn hex_len(&self) -> usize {
        hex_len(self.bits())
    }

    /// Experiments only accept whole hex characters.
    pub fn require_hex_aligned(&self) -> Result<()> {
        if !self.bits.is_multiple_of(4) {
            return Err(Error::Config(format!(
                "m must be a multiple of 4 for experiments, got {}",
                self.bits
            )));
        }
        Ok(())
    }
}

impl Default for HashConfig {
    fn default() -> Self {
        Self {
            algorithm: HashAlgorithm::Sha256,
            bits: FULL_BITS as u16,
        }
    }
}

fn hex_len(bits: u32) -> usize {
    bits.div_ceil(4) as usize
}

/// The leading `m` bits of a hash output.
///
/// Bits past `m` are always zero, so equality on the whole buffer is equality
/// on the `m` retained bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest {
    bits: u16,
    bytes: [u8; FULL_BYTES],
}

impl Digest {
    fn truncate(mut bytes: [u8; FULL_BYTES], bits: u32) -> Self {
        let whole = (bits / 8) as usize;
        let rem = bits % 8;
        let mut keep = whole;
        if rem > 0 {
            bytes[whole] &= 0xffu8 << (8 - rem);
            keep += 1;
        }
        bytes[keep..].fill(0);
        Self {
            bits: bits as u16,
            bytes,
        }
    }

    pub fn bits(&self) -> u32 {
        u32::from(self.bits)
    }

    /// The `ceil(m / 8)` bytes holding the digest, most significant first.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes[..self.bits().div_ceil(8) as usize]
    }

    /// Value of bit `i` counted from the most significant end.
    pub fn bit(&self, i: u32) -> bool {
        assert!(
            i < self.bits(),
            "bit index {i} out of range for m={}",
            self.bits
        );
        self.bytes[(i / 8) as usize] & (0x80 >> (i % 8)) != 0
    }

    /// First 64 bits as a big-endian integer (zero-filled when `m < 64`).
    pub fn leading_u64(&self) -> u64 {
        let mut head = [0u8; 8];
        head.copy_from_slice(&self.bytes[..8]);
        u64::from_be_bytes(head)
    }

    /// Writes the canonical hex encoding into `out` and returns its length.
    fn write_hex(&self, out: &mut [u8]) -> usize {
        let n = hex_len(self.bits());
        for (i, slot) in out[..n].iter_mut().enumerate() {
            let byte = self.bytes[i / 2];
            let nibble = if i % 2 == 0 { byte >> 4 } else { byte & 0x0f };
            *slot = HEX_CHARS[nibble as usize];
        }
        n
    }

    /// Canonical lowercase hex of exactly `ceil(m / 4)` characters.
    pub fn to_hex(&self) -> String {
        let mut buf = [0u8; 2 * FULL_BYTES];
        let n = self.write_hex(&mut buf);
        // Only ASCII hex characters were written.
        String::from_utf8(buf[..n].to_vec()).expect("hex is ascii")
    }

    /// Parses a canonical encoding. Uppercase, wrong length, or non-zero
    /// padding bits are rejected so that every digest has exactly one text form.
    pub fn from_hex(s: &str, bits: u32) -> Result<Self> {
        if bits == 0 || bits > FULL_BITS {
            return Err(Error::Config(format!(
                "truncation length m must be in 1..=256, got {bits}"
            )));
        }
        let expected = hex_len(bits);
        if s.len() != expected {
            return Err(format_err!(
                "digest {s:?} has {} hex characters, expected {expected} for m={bits}",
                s.len()
            ));
        }
        let mut bytes = [0u8; FULL_BYTES];
        for (i, c) in s.bytes().enumerate() {
            let nibble = match c {
                b'0'..=b'9' => c - b'0',
                b'a'..=b'f' => c - b'a' + 10,
                _ => return Err(format_err!("digest {s:?} is not lowercase hex")),
            };
            bytes[i / 2] |= if i % 2 == 0 { nibble << 4 } else { nibble };
        }
        let digest = Self::truncate(bytes, bits);
        if digest.bytes != bytes {
            return Err(format_err!(
                "digest {s:?} has non-zero padding bits beyond m={bits}"
            ));
        }
        Ok(digest)
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest(m={}, {})", self.bits, self.to_hex())
    }
}

/// The leading `m` bits of `algorithm(data)`.
pub fn truncated_hash(data: &[u8], config: &HashConfig) -> Digest {
    #[cfg(test)]
    HASH_CALLS.with(|c| c.set(c.get() + 1));
    Digest::truncate(config.algorithm.digest(data), config.bits())
}

#[cfg(test)]
thread_local! {
    static HASH_CALLS: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

/// Number of `truncated_hash` calls made on this thread.
#[cfg(test)]
pub(crate) fn hash_calls() -> u64 {
    HASH_CALLS.with(|c| c.get())
}

/// `truncated_hash(hex(left) ‖ hex(right))`, the node-combining step.
///
/// Callers are responsible for `left` and `right` sharing the config's `m`.
pub(crate) fn hash_pair(left: &Digest, right: &Digest, config: &HashConfig) -> Digest {
    let mut buf = [0u8; 4 * FULL_BYTES];
    let n = left.write_hex(&mut buf);
    let n = n + right.write_hex(&mut buf[n..]);
    truncated_hash(&buf[..n], config)
}
