//! Exact rational evaluation of the root-collision probability.
//!
//! Used as a reference for the floating-point formulas; sizes are capped so
//! the big integers stay small (at most `24 * 4097` bits).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{domain_err, Result};

pub const MAX_ORACLE_BITS: u32 = 24;
pub const MAX_ORACLE_PATH: u64 = 4096;

/// `P = 2^-m + (1 - 2^-m)(1 - (1 - 2^-m)^k)` as an exact fraction.
///
/// With `q = 2^m` and `a = q - 1` the numerator over `q^(k+1)` is
/// `q^k + a (q^k - a^k)`.
pub fn collision_prob_exact_rational(m: u32, k: u64) -> Result<BigRational> {
    if m == 0 || m > MAX_ORACLE_BITS || k > MAX_ORACLE_PATH {
        return Err(domain_err!(
            "rational oracle supports 1 <= m <= {MAX_ORACLE_BITS} and k <= {MAX_ORACLE_PATH}, got m={m}, k={k}"
        ));
    }
    let k = k as usize;
    let q: BigInt = BigInt::one() << m;
    let a: BigInt = &q - 1;
    let q_k = num_traits::pow(q.clone(), k);
    let a_k = num_traits::pow(a.clone(), k);
    let numer = &q_k + a * (&q_k - a_k);
    let denom = q_k * q;
    Ok(BigRational::new(numer, denom))
}

/// Nearest `f64` to an exact ratio.
pub fn rational_to_f64(value: &BigRational) -> f64 {
    value.to_f64().expect("probability is finite")
}
