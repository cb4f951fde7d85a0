#ifndef MERKLE_COLLISION_H
#define MERKLE_COLLISION_H

/* Generated by cbindgen from the merkle-collision-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Hash selector for `algorithm` parameters.
 */
#define MC_HASH_SHA256 0

/**
 * Original (pre-FIPS) Keccak-256.
 */
#define MC_HASH_KECCAK256 1

typedef enum McStatus {
  MC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MC_STATUS_NULL_POINTER = 1,
  /**
   * Invalid hash configuration, such as `bits` outside 1..=256.
   */
  MC_STATUS_CONFIG = 2,
  /**
   * Arguments outside the operation's domain.
   */
  MC_STATUS_DOMAIN = 3,
  /**
   * A document (proof JSON, string) could not be interpreted.
   */
  MC_STATUS_FORMAT = 4,
  /**
   * An internal panic was caught; the library state is still usable.
   */
  MC_STATUS_PANIC = 5,
} McStatus;

/**
 * Opaque Merkle tree handle.
 */
typedef struct McTree McTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mc_version(void);

/**
 * Message for the most recent failure on this thread, or null if the last
 * call succeeded. Valid until the next library call on the same thread.
 */
const char *mc_last_error_message(void);

/**
 * Exact root-collision probability for `m`-bit digests and path length `k`.
 *
 * # Safety
 * `out` must be null or valid for a write of one `f64`.
 */
enum McStatus mc_collision_prob_exact(uint32_t m, uint64_t k, double *out);

/**
 * Exponential approximation of [`mc_collision_prob_exact`].
 *
 * # Safety
 * `out` must be null or valid for a write of one `f64`.
 */
enum McStatus mc_collision_prob_approx(uint32_t m, uint64_t k, double *out);

/**
 * Root-collision probability when the attacker chooses both inputs (even `m`).
 *
 * # Safety
 * `out` must be null or valid for a write of one `f64`.
 */
enum McStatus mc_collision_prob_birthday_mode(uint32_t m, uint64_t k, double *out);

/**
 * Probability that `samples` uniform draws from `domain` values are all distinct.
 *
 * # Safety
 * `out` must be null or valid for a write of one `f64`.
 */
enum McStatus mc_birthday_no_collision(uint64_t samples, uint64_t domain, double *out);

/**
 * Samples needed for collision probability `p` among `m`-bit digests.
 *
 * # Safety
 * `out` must be null or valid for a write of one `f64`.
 */
enum McStatus mc_birthday_bound(double p, uint32_t m, double *out);

/**
 * Hashes `len` bytes at `data`, truncates to `bits`, and writes the
 * NUL-terminated lowercase hex into `out` (capacity `out_len`, at least
 * `ceil(bits / 4) + 1`). `data` may be null when `len` is 0.
 *
 * # Safety
 * `data` must be readable for `len` bytes and `out` writable for `out_len`.
 */
enum McStatus mc_truncated_hash_hex(const uint8_t *data,
                                    size_t len,
                                    uint32_t algorithm_code,
                                    uint32_t bits,
                                    char *out,
                                    size_t out_len);

/**
 * Builds a tree over `count` leaves; leaf `i` is `lens[i]` bytes at `leaves[i]`.
 * On success `*out` owns the tree.
 *
 * # Safety
 * `leaves` and `lens` must each hold `count` entries, and every `leaves[i]`
 * must be readable for `lens[i]` bytes. `out` must be writable.
 */
enum McStatus mc_tree_build(const uint8_t *const *leaves,
                            const size_t *lens,
                            size_t count,
                            uint32_t algorithm_code,
                            uint32_t bits,
                            struct McTree **out);

/**
 * Releases a tree. Null is ignored.
 *
 * # Safety
 * `tree` must be null or a handle from [`mc_tree_build`] not yet freed.
 */
void mc_tree_free(struct McTree *tree);

/**
 * Number of leaves in `tree`, or 0 if `tree` is null.
 *
 * # Safety
 * `tree` must be null or a live handle.
 */
size_t mc_tree_leaf_count(const struct McTree *tree);

/**
 * Root as a newly allocated hex string.
 *
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
enum McStatus mc_tree_root_hex(const struct McTree *tree, char **out);

/**
 * Inclusion proof for leaf `index` as a newly allocated JSON proof document.
 *
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
enum McStatus mc_tree_proof_json(const struct McTree *tree, size_t index, char **out);

/**
 * Parses a JSON proof document and sets `*valid` to whether it reaches its
 * stated root. A malformed document is a `Format` failure, not `false`.
 *
 * # Safety
 * `json` must be null or NUL-terminated, and `valid` writable.
 */
enum McStatus mc_verify_proof_json(const char *json, bool *valid);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void mc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MERKLE_COLLISION_H */
