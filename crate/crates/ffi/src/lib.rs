//! C ABI over `merkle_collision`.
//!
//! Every fallible function returns an [`McStatus`] and writes results through
//! out-pointers, which are left untouched on failure. After a failure,
//! [`mc_last_error_message`] describes it. Strings handed to the caller are
//! owned by the caller and must be released with [`mc_string_free`]; trees
//! with [`mc_tree_free`]. Panics never cross the boundary.

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use merkle_collision::theory::{self, DomainSize};
use merkle_collision::{truncated_hash, Error, HashAlgorithm, HashConfig, MerkleProof, MerkleTree};

/// Hash selector for `algorithm` parameters.
pub const MC_HASH_SHA256: u32 = 0;
/// Original (pre-FIPS) Keccak-256.
pub const MC_HASH_KECCAK256: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid hash configuration, such as `bits` outside 1..=256.
    Config = 2,
    /// Arguments outside the operation's domain.
    Domain = 3,
    /// A document (proof JSON, string) could not be interpreted.
    Format = 4,
    /// An internal panic was caught; the library state is still usable.
    Panic = 5,
}

/// Opaque Merkle tree handle.
pub struct McTree(MerkleTree);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

struct Failure {
    status: McStatus,
    message: String,
}

impl Failure {
    fn new(status: McStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config(_) => McStatus::Config,
            Error::Domain(_) => McStatus::Domain,
            Error::Format(_) => McStatus::Format,
        };
        Failure::new(status, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn guard(f: impl FnOnce() -> Outcome) -> McStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => McStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            McStatus::Panic
        }
    }
}

fn require<T>(p: *const T, name: &str) -> Outcome {
    if p.is_null() {
        Err(Failure::new(
            McStatus::NullPointer,
            format!("`{name}` is null"),
        ))
    } else {
        Ok(())
    }
}

fn algorithm(code: u32) -> Result<HashAlgorithm, Failure> {
    match code {
        MC_HASH_SHA256 => Ok(HashAlgorithm::Sha256),
        MC_HASH_KECCAK256 => Ok(HashAlgorithm::Keccak256),
        other => Err(Failure::new(
            McStatus::Config,
            format!("unknown hash algorithm {other}"),
        )),
    }
}

fn into_c_string(text: String) -> Result<*mut c_char, Failure> {
    CString::new(text)
        .map(CString::into_raw)
        .map_err(|_| Failure::new(McStatus::Format, "output contains a NUL byte"))
}

/// Writes a probability computed by `f` to `out`.
///
/// # Safety
/// `out` must be null or valid for a write of one `f64`.
unsafe fn probability(
    out: *mut f64,
    f: impl FnOnce() -> merkle_collision::Result<f64>,
) -> McStatus {
    guard(|| {
        require(out, "out")?;
        let value = f()?;
        // SAFETY: checked non-null; caller guarantees it is writable.
        unsafe { *out = value };
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or null if the last
/// call succeeded. Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn mc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Exact root-collision probability for `m`-bit digests and path length `k`.
///
/// # Safety
/// `out` must be null or valid for a write of one `f64`.
#[no_mangle]
pub unsafe extern "C" fn mc_collision_prob_exact(m: u32, k: u64, out: *mut f64) -> McStatus {
    // SAFETY: forwarded caller contract.
    unsafe { probability(out, || theory::collision_prob_exact(m, k.into())) }
}

/// Exponential approximation of [`mc_collision_prob_exact`].
///
/// # Safety
/// `out` must be null or valid for a write of one `f64`.
#[no_mangle]
pub unsafe extern "C" fn mc_collision_prob_approx(m: u32, k: u64, out: *mut f64) -> McStatus {
    // SAFETY: forwarded caller contract.
    unsafe { probability(out, || theory::collision_prob_approx(m, k.into())) }
}

/// Root-collision probability when the attacker chooses both inputs (even `m`).
///
/// # Safety
/// `out` must be null or valid for a write of one `f64`.
#[no_mangle]
pub unsafe extern "C" fn mc_collision_prob_birthday_mode(
    m: u32,
    k: u64,
    out: *mut f64,
) -> McStatus {
    // SAFETY: forwarded caller contract.
    unsafe { probability(out, || theory::collision_prob_birthday_mode(m, k.into())) }
}

/// Probability that `samples` uniform draws from `domain` values are all distinct.
///
/// # Safety
/// `out` must be null or valid for a write of one `f64`.
#[no_mangle]
pub unsafe extern "C" fn mc_birthday_no_collision(
    samples: u64,
    domain: u64,
    out: *mut f64,
) -> McStatus {
    // SAFETY: forwarded caller contract.
    unsafe {
        probability(out, || {
            theory::birthday_no_collision(samples, DomainSize::Count(domain.into()))
        })
    }
}

/// Samples needed for collision probability `p` among `m`-bit digests.
///
/// # Safety
/// `out` must be null or valid for a write of one `f64`.
#[no_mangle]
pub unsafe extern "C" fn mc_birthday_bound(p: f64, m: u32, out: *mut f64) -> McStatus {
    // SAFETY: forwarded caller contract.
    unsafe { probability(out, || theory::birthday_bound(p, m)) }
}

/// Hashes `len` bytes at `data`, truncates to `bits`, and writes the
/// NUL-terminated lowercase hex into `out` (capacity `out_len`, at least
/// `ceil(bits / 4) + 1`). `data` may be null when `len` is 0.
///
/// # Safety
/// `data` must be readable for `len` bytes and `out` writable for `out_len`.
#[no_mangle]
pub unsafe extern "C" fn mc_truncated_hash_hex(
    data: *const u8,
    len: usize,
    algorithm_code: u32,
    bits: u32,
    out: *mut c_char,
    out_len: usize,
) -> McStatus {
    guard(|| {
        require(out, "out")?;
        if len > 0 {
            require(data, "data")?;
        }
        let config = HashConfig::new(algorithm(algorithm_code)?, bits)?;
        // SAFETY: non-null when len > 0; caller guarantees `len` readable bytes.
        let bytes = if len == 0 {
            &[][..]
        } else {
            unsafe { slice::from_raw_parts(data, len) }
        };
        let hex = truncated_hash(bytes, &config).to_hex();
        if out_len < hex.len() + 1 {
            return Err(Failure::new(
                McStatus::Domain,
                format!(
                    "output buffer holds {out_len} bytes, need {}",
                    hex.len() + 1
                ),
            ));
        }
        // SAFETY: capacity checked above.
        unsafe {
            ptr::copy_nonoverlapping(hex.as_ptr(), out.cast::<u8>(), hex.len());
            *out.add(hex.len()) = 0;
        }
        Ok(())
    })
}

/// Builds a tree over `count` leaves; leaf `i` is `lens[i]` bytes at `leaves[i]`.
/// On success `*out` owns the tree.
///
/// # Safety
/// `leaves` and `lens` must each hold `count` entries, and every `leaves[i]`
/// must be readable for `lens[i]` bytes. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mc_tree_build(
    leaves: *const *const u8,
    lens: *const usize,
    count: usize,
    algorithm_code: u32,
    bits: u32,
    out: *mut *mut McTree,
) -> McStatus {
    guard(|| {
        require(out, "out")?;
        let config = HashConfig::new(algorithm(algorithm_code)?, bits)?;
        let data: Vec<&[u8]> = if count == 0 {
            Vec::new()
        } else {
            require(leaves, "leaves")?;
            require(lens, "lens")?;
            // SAFETY: caller guarantees `count` entries in both arrays.
            let (ptrs, lens) = unsafe {
                (
                    slice::from_raw_parts(leaves, count),
                    slice::from_raw_parts(lens, count),
                )
            };
            ptrs.iter()
                .zip(lens)
                .map(|(&p, &n)| {
                    if n == 0 {
                        Ok(&[][..])
                    } else {
                        require(p, "leaves[i]")?;
                        // SAFETY: non-null with `n` readable bytes per the contract.
                        Ok(unsafe { slice::from_raw_parts(p, n) })
                    }
                })
                .collect::<Result<_, Failure>>()?
        };
        let tree = MerkleTree::build(&data, config)?;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(McTree(tree))) };
        Ok(())
    })
}

/// Releases a tree. Null is ignored.
///
/// # Safety
/// `tree` must be null or a handle from [`mc_tree_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mc_tree_free(tree: *mut McTree) {
    if !tree.is_null() {
        // SAFETY: pointer came from `mc_tree_build` and is freed once.
        drop(unsafe { Box::from_raw(tree) });
    }
}

/// Number of leaves in `tree`, or 0 if `tree` is null.
///
/// # Safety
/// `tree` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mc_tree_leaf_count(tree: *const McTree) -> usize {
    // SAFETY: null or a live tree handle.
    unsafe { tree.as_ref() }.map_or(0, |t| t.0.leaf_count())
}

/// Root as a newly allocated hex string.
///
/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mc_tree_root_hex(tree: *const McTree, out: *mut *mut c_char) -> McStatus {
    guard(|| {
        require(tree, "tree")?;
        require(out, "out")?;
        // SAFETY: checked non-null; caller passes a live handle.
        let hex = unsafe { &*tree }.0.root().to_hex();
        let s = into_c_string(hex)?;
        // SAFETY: checked non-null.
        unsafe { *out = s };
        Ok(())
    })
}

/// Inclusion proof for leaf `index` as a newly allocated JSON proof document.
///
/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mc_tree_proof_json(
    tree: *const McTree,
    index: usize,
    out: *mut *mut c_char,
) -> McStatus {
    guard(|| {
        require(tree, "tree")?;
        require(out, "out")?;
        // SAFETY: checked non-null; caller passes a live handle.
        let proof = unsafe { &*tree }.0.generate_proof(index)?;
        let s = into_c_string(proof.to_json())?;
        // SAFETY: checked non-null.
        unsafe { *out = s };
        Ok(())
    })
}

/// Parses a JSON proof document and sets `*valid` to whether it reaches its
/// stated root. A malformed document is a `Format` failure, not `false`.
///
/// # Safety
/// `json` must be null or NUL-terminated, and `valid` writable.
#[no_mangle]
pub unsafe extern "C" fn mc_verify_proof_json(json: *const c_char, valid: *mut bool) -> McStatus {
    guard(|| {
        require(json, "json")?;
        require(valid, "valid")?;
        // SAFETY: caller passes a NUL-terminated string.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|_| Failure::new(McStatus::Format, "proof is not UTF-8"))?;
        let ok = MerkleProof::from_json(text)?.verify()?;
        // SAFETY: checked non-null.
        unsafe { *valid = ok };
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: pointer came from `CString::into_raw` here and is freed once.
        drop(unsafe { CString::from_raw(s) });
    }
}
