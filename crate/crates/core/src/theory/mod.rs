//! Closed-form collision probabilities for Merkle roots and the birthday problem.
//!
//! All `m`-dependent formulas work with `x = 2^-m`. For `m > 53` the naive
//! `1 - x` rounds to `1`, so powers of `1 - x` go through `ln_1p`/`exp_m1`.

mod rational;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};

pub use rational::{
    collision_prob_exact_rational, rational_to_f64, MAX_ORACLE_BITS, MAX_ORACLE_PATH,
};

/// Whether the adversary picks only the data (standard) or both colliding inputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    #[serde(rename = "standard")]
    Standard,
    #[serde(rename = "birthday")]
    BirthdayAttack,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::BirthdayAttack => "birthday",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Mode::Standard),
            "birthday" => Ok(Mode::BirthdayAttack),
            other => Err(domain_err!(
                "unknown mode {other:?} (expected standard or birthday)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionQuery {
    pub m: u32,
    pub k: u128,
    pub mode: Mode,
}

impl CollisionQuery {
    pub fn new(m: u32, k: u128, mode: Mode) -> Result<Self> {
        check_m(m)?;
        if mode == Mode::BirthdayAttack && !m.is_multiple_of(2) {
            return Err(domain_err!("birthday-attack mode needs an even m, got {m}"));
        }
        Ok(Self { m, k, mode })
    }

    /// Bit length the formulas are evaluated at (`m/2` under a birthday attack).
    pub fn effective_bits(&self) -> u32 {
        match self.mode {
            Mode::Standard => self.m,
            Mode::BirthdayAttack => self.m / 2,
        }
    }

    pub fn estimate(&self) -> Result<CollisionEstimate> {
        let bits = self.effective_bits();
        Ok(CollisionEstimate {
            query: *self,
            exact: collision_prob_exact(bits, self.k)?,
            approx: collision_prob_approx(bits, self.k)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEstimate {
    #[serde(flatten)]
    pub query: CollisionQuery,
    pub exact: f64,
    pub approx: f64,
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 || m > 256 {
        return Err(domain_err!("hash length m must be in 1..=256, got {m}"));
    }
    Ok(())
}

fn inv_pow2(m: u32) -> f64 {
    // Exact for every m <= 1074.
    (-(m as f64)).exp2()
}

/// Probability that two different leaves reach the same root over a shared
/// path of length `k`, for an ideal `m`-bit hash:
/// `2^-m + (1 - 2^-m)(1 - (1 - 2^-m)^k)`.
pub fn collision_prob_exact(m: u32, k: u128) -> Result<f64> {
    check_m(m)?;
    let x = inv_pow2(m);
    // 1 - (1-x)^k = -expm1(k ln(1-x))
    let escaped = -((k as f64) * (-x).ln_1p()).exp_m1();
    Ok(x + (1.0 - x) * escaped)
}

/// Exponential approximation `2^-m + e^(-2^-m) - e^(-(k+1) 2^-m)`.
///
/// The expression tends to `2^-m + e^(-2^-m) > 1` as `k` grows, so the
/// result is capped at 1.
pub fn collision_prob_approx(m: u32, k: u128) -> Result<f64> {
    check_m(m)?;
    let x = inv_pow2(m);
    // e^-x - e^-(k+1)x = e^-x (1 - e^-kx)
    let value = x + (-x).exp() * -(-(k as f64) * x).exp_m1();
    Ok(value.min(1.0))
}

/// Root-collision probability when the attacker chooses both inputs: the
/// exact formula with `2^-m` replaced by `2^-(m/2)`.
pub fn collision_prob_birthday_mode(m: u32, k: u128) -> Result<f64> {
    CollisionQuery::new(m, k, Mode::BirthdayAttack)?;
    collision_prob_exact(m / 2, k)
}

/// Approximate form of [`collision_prob_birthday_mode`].
pub fn collision_prob_birthday_mode_approx(m: u32, k: u128) -> Result<f64> {
    CollisionQuery::new(m, k, Mode::BirthdayAttack)?;
    collision_prob_approx(m / 2, k)
}

/// Exact probability for a query in either mode.
pub fn collision_prob(query: &CollisionQuery) -> Result<f64> {
    collision_prob_exact(query.effective_bits(), query.k)
}

/// Size of the space that birthday samples are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainSize {
    Count(u128),
    /// `2^m` values, the output space of an `m`-bit digest.
    PowerOfTwo(u32),
}

impl DomainSize {
    fn as_f64(self) -> f64 {
        match self {
            DomainSize::Count(n) => n as f64,
            DomainSize::PowerOfTwo(m) => (m as f64).exp2(),
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            DomainSize::Count(0) => Err(domain_err!("domain size must be at least 1")),
            DomainSize::PowerOfTwo(m) if m > 1023 => {
                Err(domain_err!("domain 2^{m} is not representable"))
            }
            _ => Ok(()),
        }
    }

    /// True when `s` samples cannot all be distinct.
    fn exceeded_by(self, s: u64) -> bool {
        match self {
            DomainSize::Count(n) => u128::from(s) > n,
            DomainSize::PowerOfTwo(m) => m < 64 && s > (1u64 << m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BirthdayQuery {
    pub samples: u64,
    pub domain: DomainSize,
}

impl BirthdayQuery {
    pub fn from_bits(samples: u64, m: u32) -> Self {
        Self {
            samples,
            domain: DomainSize::PowerOfTwo(m),
        }
    }

    pub fn no_collision(&self) -> Result<f64> {
        birthday_no_collision(self.samples, self.domain)
    }
}

/// Above this many samples the log-product switches to an Euler–Maclaurin sum.
const DIRECT_PRODUCT_LIMIT: u64 = 1 << 20;

/// Probability that `s` uniform draws from `domain` are pairwise distinct,
/// `prod_{i<s} (1 - i/D)`.
pub fn birthday_no_collision(s: u64, domain: DomainSize) -> Result<f64> {
    domain.validate()?;
    if domain.exceeded_by(s) {
        return Ok(0.0);
    }
    if s <= 1 {
        return Ok(1.0);
    }
    let d = domain.as_f64();
    let log = if s <= DIRECT_PRODUCT_LIMIT {
        log_no_collision_direct(s, d)
    } else {
        log_no_collision_asymptotic(s, d)
    };
    Ok(log.exp())
}

/// Complement of [`birthday_no_collision`].
pub fn birthday_collision(s: u64, domain: DomainSize) -> Result<f64> {
    Ok(1.0 - birthday_no_collision(s, domain)?)
}

fn log_no_collision_direct(s: u64, d: f64) -> f64 {
    (1..s).map(|i| (-(i as f64) / d).ln_1p()).sum()
}

/// `sum_{i=0}^{s-1} ln(1 - i/d)` by Euler–Maclaurin with two correction terms.
fn log_no_collision_asymptotic(s: u64, d: f64) -> f64 {
    let f = |x: f64| (-x / d).ln_1p();
    let df = |x: f64| -1.0 / (d - x);
    let a = (s - 1) as f64;
    // integral_0^a ln(1 - x/d) dx
    let integral = -(d - a) * (-a / d).ln_1p() - a;
    integral + 0.5 * (f(0.0) + f(a)) + (df(a) - df(0.0)) / 12.0
}

/// Which exponent the birthday approximation uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BirthdayForm {
    /// `1 - e^(-s^2 / 2^(m+1))`.
    #[default]
    SSquared,
    /// `1 - e^(-s(s-1) / 2^(m+1))`.
    STimesSMinus1,
}

/// Approximate probability of at least one collision among `s` digests of `m` bits.
pub fn birthday_collision_approx(s: u64, m: u32, form: BirthdayForm) -> Result<f64> {
    if m == 0 || m > 256 {
        return Err(domain_err!("hash length m must be in 1..=256, got {m}"));
    }
    let s = s as f64;
    let pairs = match form {
        BirthdayForm::SSquared => s * s,
        BirthdayForm::STimesSMinus1 => s * (s - 1.0).max(0.0),
    };
    Ok(-(-pairs / (m as f64 + 1.0).exp2()).exp_m1())
}

/// Samples needed for collision probability `p` among `m`-bit digests,
/// `sqrt(-2 * 2^m * ln(1 - p))`, unrounded.
pub fn birthday_bound(p: f64, m: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain_err!("target probability must be in (0, 1), got {p}"));
    }
    if m == 0 || m > 256 {
        return Err(domain_err!("hash length m must be in 1..=256, got {m}"));
    }
    Ok((-2.0 * (-p).ln_1p()).sqrt() * (m as f64 / 2.0).exp2())
}
