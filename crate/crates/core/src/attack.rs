//! Birthday search for colliding inputs under a truncated hash.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::digest::{truncated_hash, Digest, HashConfig};
use crate::error::{domain_err, Result};
use crate::merkle::LeafData;
use crate::montecarlo::{derive_subseed, generate_random_data, ExperimentRng};
use crate::theory::birthday_bound;

pub const MIN_ATTACK_BITS: u32 = 4;
/// Keeps the digest table within a few hundred MB.
pub const MAX_ATTACK_BITS: u32 = 40;
/// Length of the random alphanumeric inputs.
pub const ATTACK_DATA_LENGTH: usize = 32;

/// Two distinct inputs with the same truncated digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionRecord {
    pub input_a: LeafData,
    pub input_b: LeafData,
    pub digest: Digest,
    /// Distinct inputs hashed up to and including the colliding one.
    pub trials: u64,
}

impl CollisionRecord {
    /// Re-hashes both inputs and checks the record's claims.
    pub fn verify(&self) -> bool {
        let Ok(config) = HashConfig::sha256(self.digest.bits()) else {
            return false;
        };
        self.input_a != self.input_b
            && truncated_hash(self.input_a.as_bytes(), &config) == self.digest
            && truncated_hash(self.input_b.as_bytes(), &config) == self.digest
    }
}

fn check_bits(m: u32) -> Result<HashConfig> {
    if !(MIN_ATTACK_BITS..=MAX_ATTACK_BITS).contains(&m) || !m.is_multiple_of(4) {
        return Err(domain_err!(
            "attack m must be a multiple of 4 in {MIN_ATTACK_BITS}..={MAX_ATTACK_BITS}, got {m}"
        ));
    }
    HashConfig::sha256(m)
}

/// Hashes random strings until two different ones share an `m`-bit digest.
pub fn find_collision(m: u32, subseed: u64) -> Result<CollisionRecord> {
    let config = check_bits(m)?;
    let mut rng = ExperimentRng::seed_from_u64(subseed);
    let mut seen: HashMap<u64, LeafData> = HashMap::new();
    let mut trials = 0u64;
    loop {
        let input = generate_random_data(ATTACK_DATA_LENGTH, &mut rng);
        let digest = truncated_hash(input.as_bytes(), &config);
        match seen.entry(digest.leading_u64()) {
            // A repeated draw of the same string is not a collision.
            Entry::Occupied(prior) if *prior.get() == input => continue,
            Entry::Occupied(prior) => {
                return Ok(CollisionRecord {
                    input_a: prior.remove(),
                    input_b: input,
                    digest,
                    trials: trials + 1,
                });
            }
            Entry::Vacant(slot) => {
                slot.insert(input);
                trials += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackStats {
    pub m: u32,
    pub runs: u32,
    pub seed: u64,
    pub trials_per_run: Vec<u64>,
    pub median_trials: f64,
    pub mean_trials: f64,
    /// `sqrt(2 ln 2) * 2^(m/2)`, about `1.1774 * 2^(m/2)`.
    pub predicted_median: f64,
}

impl AttackStats {
    /// Fraction of runs that found their collision within `s` trials.
    pub fn empirical_cdf(&self, s: u64) -> f64 {
        let hits = self.trials_per_run.iter().filter(|&&t| t <= s).count();
        hits as f64 / self.trials_per_run.len() as f64
    }
}

/// Repeats [`find_collision`] `runs` times with seeds derived from
/// `(master_seed, m, run index)`.
pub fn attack_stats(m: u32, runs: u32, master_seed: u64) -> Result<AttackStats> {
    check_bits(m)?;
    if runs == 0 {
        return Err(domain_err!("runs must be at least 1"));
    }
    let trials_per_run = (0..runs)
        .into_par_iter()
        .map(|run| {
            find_collision(m, derive_subseed(master_seed, u64::from(m), u64::from(run)))
                .map(|record| record.trials)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_trials = trials_per_run.iter().sum::<u64>() as f64 / f64::from(runs);
    Ok(AttackStats {
        m,
        runs,
        seed: master_seed,
        median_trials: median(&trials_per_run),
        mean_trials,
        predicted_median: birthday_bound(0.5, m)?,
        trials_per_run,
    })
}

/// Sample median; the mean of the two middle order statistics for even counts.
fn median(values: &[u64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_bit_collisions_arrive_by_pigeonhole() {
        for seed in 0..200 {
            let record = find_collision(4, seed).unwrap();
            assert!((2..=17).contains(&record.trials), "{}", record.trials);
            assert!(record.verify());
        }
    }

    #[test]
    fn records_re_verify() {
        for seed in 0..20 {
            let record = find_collision(16, seed).unwrap();
            assert!(record.verify());
            assert_eq!(record.digest.bits(), 16);
        }
    }

    #[test]
    fn tampered_record_fails_verification() {
        let mut record = find_collision(8, 1).unwrap();
        record.input_b = record.input_a.clone();
        assert!(!record.verify());
    }

    #[test]
    fn bad_parameters_are_rejected() {
        for m in [0, 2, 6, 44, 256] {
            assert!(find_collision(m, 0).is_err(), "m={m}");
        }
        assert!(attack_stats(8, 0, 0).is_err());
    }

    #[test]
    fn single_run_stats_degenerate() {
        let stats = attack_stats(12, 1, 5).unwrap();
        let t = stats.trials_per_run[0] as f64;
        assert_eq!(stats.median_trials, t);
        assert_eq!(stats.mean_trials, t);
        let direct = find_collision(12, derive_subseed(5, 12, 0)).unwrap();
        assert_eq!(direct.trials as f64, t);
    }

    #[test]
    fn median_order_statistic() {
        assert_eq!(median(&[5, 1, 3]), 3.0);
        assert_eq!(median(&[4, 1, 3, 2]), 2.5);
    }

    #[test]
    fn stats_are_deterministic() {
        assert_eq!(
            attack_stats(12, 20, 3).unwrap(),
            attack_stats(12, 20, 3).unwrap()
        );
    }
}
