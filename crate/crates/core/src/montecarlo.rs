//! Monte Carlo estimation of Merkle root-collision probability.
//!
//! Each trial builds a random reference leaf and a path of `k` siblings
//! (digests of fresh random strings), computes the chain root, then draws a
//! different random leaf and checks whether it reaches the same root over the
//! same path. Trials are grouped into repeats; a cell reports the mean and
//! spread of the per-repeat hit frequencies next to the closed-form value.

use std::time::{SystemTime, UNIX_EPOCH};

use rand::distr::{Alphanumeric, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digest::{hash_pair, truncated_hash, Digest, HashAlgorithm, HashConfig};
use crate::error::{domain_err, Error, Result};
use crate::merkle::{fold_chain, LeafData};
use crate::theory::collision_prob_exact;

/// Largest digest length the experiment accepts.
pub const MAX_EXPERIMENT_BITS: u32 = 32;
pub const MIN_DATA_LENGTH: usize = 8;

/// Deterministic generator used by every experiment.
pub type ExperimentRng = ChaCha8Rng;

/// A random string of `length` characters from `[0-9A-Za-z]`.
pub fn generate_random_data<R: Rng + ?Sized>(length: usize, rng: &mut R) -> LeafData {
    let mut buf = vec![0u8; length];
    fill_random_data(&mut buf, rng);
    LeafData::new(buf)
}

fn fill_random_data<R: Rng + ?Sized>(buf: &mut [u8], rng: &mut R) {
    for (slot, c) in buf.iter_mut().zip(Alphanumeric.sample_iter(&mut *rng)) {
        *slot = c;
    }
}

/// Derives an independent 64-bit seed from `(master, a, b)` as the leading
/// 64 bits of `SHA-256(master ‖ a ‖ b)`, each field big-endian `u64`.
pub fn derive_subseed(master_seed: u64, a: u64, b: u64) -> u64 {
    let mut msg = [0u8; 24];
    msg[..8].copy_from_slice(&master_seed.to_be_bytes());
    msg[8..16].copy_from_slice(&a.to_be_bytes());
    msg[16..].copy_from_slice(&b.to_be_bytes());
    let cfg = HashConfig::sha256(64).expect("64 is a valid length");
    truncated_hash(&msg, &cfg).leading_u64()
}

/// How often the reference leaf and sibling path are redrawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathSampling {
    /// Fresh reference and path for every trial; trials are independent.
    #[default]
    PerTrial,
    /// One reference and path shared by all trials of a repeat. Trials within
    /// a repeat are then correlated, so repeat-to-repeat spread is much wider
    /// than binomial for short digests.
    PerRepeat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m_values: Vec<u32>,
    pub k_values: Vec<u64>,
    pub trials: u32,
    pub repeats: u32,
    pub data_length: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub path_sampling: PathSampling,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m_values: vec![4, 8, 12, 16],
            k_values: (1..=16).collect(),
            trials: 1000,
            repeats: 100,
            data_length: 32,
            master_seed: 0,
            path_sampling: PathSampling::PerTrial,
        }
    }
}

impl ExperimentConfig {
    pub fn with_seed(master_seed: u64) -> Self {
        Self {
            master_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.k_values.is_empty() {
            return Err(domain_err!(
                "experiment grid needs at least one m and one k"
            ));
        }
        for &m in &self.m_values {
            check_experiment_bits(m)?;
        }
        if self.k_values.iter().any(|&k| k > u32::MAX as u64) {
            return Err(domain_err!("path lengths above 2^32 are not supported"));
        }
        self.cell(self.m_values[0], self.k_values[0]).validate()
    }

    fn cell(&self, m: u32, k: u64) -> CellSpec {
        CellSpec {
            m,
            k,
            trials: self.trials,
            repeats: self.repeats,
            data_length: self.data_length,
            path_sampling: self.path_sampling,
        }
    }
}

fn check_experiment_bits(m: u32) -> Result<()> {
    if m > MAX_EXPERIMENT_BITS {
        return Err(Error::Config(format!(
            "experiment m must be at most {MAX_EXPERIMENT_BITS}, got {m}"
        )));
    }
    HashConfig::sha256(m)?.require_hex_aligned()
}

/// Parameters of one `(m, k)` grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSpec {
    pub m: u32,
    pub k: u64,
    pub trials: u32,
    pub repeats: u32,
    pub data_length: usize,
    pub path_sampling: PathSampling,
}

impl CellSpec {
    pub fn new(m: u32, k: u64, trials: u32, repeats: u32, data_length: usize) -> Self {
        Self {
            m,
            k,
            trials,
            repeats,
            data_length,
            path_sampling: PathSampling::PerTrial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_experiment_bits(self.m)?;
        if self.trials == 0 {
            return Err(domain_err!("trials must be at least 1"));
        }
        if self.repeats == 0 {
            return Err(domain_err!("repeats must be at least 1"));
        }
        if self.data_length < MIN_DATA_LENGTH {
            return Err(domain_err!(
                "data length must be at least {MIN_DATA_LENGTH}, got {}",
                self.data_length
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub m: u32,
    pub k: u64,
    pub trials: u32,
    pub repeats: u32,
    pub subseed: u64,
    pub empirical_mean: f64,
    pub empirical_std: f64,
    pub total_hits: u64,
    pub theoretical: f64,
    pub per_repeat: Vec<f64>,
}

impl CellResult {
    /// Binomial standard error of the mean under the closed-form probability.
    pub fn standard_error(&self) -> f64 {
        let p = self.theoretical;
        (p * (1.0 - p) / (f64::from(self.trials) * f64::from(self.repeats))).sqrt()
    }

    /// Whether the empirical mean is within `sigmas` standard errors of theory.
    pub fn within(&self, sigmas: f64) -> bool {
        (self.empirical_mean - self.theoretical).abs() <= sigmas * self.standard_error()
    }
}

/// Scratch state reused across trials of one cell.
struct CellRunner {
    config: HashConfig,
    rng: ExperimentRng,
    reference: Vec<u8>,
    challenger: Vec<u8>,
    scratch: Vec<u8>,
    path: Vec<Digest>,
}

impl CellRunner {
    fn new(spec: &CellSpec, subseed: u64) -> Result<Self> {
        Ok(Self {
            config: HashConfig::sha256(spec.m)?,
            rng: ExperimentRng::seed_from_u64(subseed),
            reference: vec![0; spec.data_length],
            challenger: vec![0; spec.data_length],
            scratch: vec![0; spec.data_length],
            path: Vec::with_capacity(spec.k as usize),
        })
    }

    /// Draws a new reference leaf and path; returns the reference root.
    fn redraw(&mut self, k: u64) -> Digest {
        fill_random_data(&mut self.reference, &mut self.rng);
        self.path.clear();
        for _ in 0..k {
            fill_random_data(&mut self.scratch, &mut self.rng);
            self.path.push(truncated_hash(&self.scratch, &self.config));
        }
        self.chain(&self.reference)
    }

    fn chain(&self, data: &[u8]) -> Digest {
        fold_chain(truncated_hash(data, &self.config), &self.path, &self.config)
    }

    fn challenge(&mut self, reference_root: &Digest) -> bool {
        loop {
            fill_random_data(&mut self.challenger, &mut self.rng);
            if self.challenger != self.reference {
                break;
            }
        }
        self.chain(&self.challenger) == *reference_root
    }
}

/// Runs one grid cell with its own generator seeded from `subseed`.
pub fn run_cell(spec: &CellSpec, subseed: u64) -> Result<CellResult> {
    spec.validate()?;
    let mut runner = CellRunner::new(spec, subseed)?;
    let mut per_repeat = Vec::with_capacity(spec.repeats as usize);
    let mut total_hits = 0u64;
    for _ in 0..spec.repeats {
        let mut root = runner.redraw(spec.k);
        let mut hits = 0u32;
        for trial in 0..spec.trials {
            if spec.path_sampling == PathSampling::PerTrial && trial > 0 {
                root = runner.redraw(spec.k);
            }
            hits += runner.challenge(&root) as u32;
        }
        total_hits += u64::from(hits);
        per_repeat.push(f64::from(hits) / f64::from(spec.trials));
    }
    let (mean, std) = mean_and_std(&per_repeat);
    Ok(CellResult {
        m: spec.m,
        k: spec.k,
        trials: spec.trials,
        repeats: spec.repeats,
        subseed,
        empirical_mean: mean,
        empirical_std: std,
        total_hits,
        theoretical: collision_prob_exact(spec.m, spec.k.into())?,
        per_repeat,
    })
}

/// Mean and sample (n - 1) standard deviation; the deviation is 0 for one value.
fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn cell(&self, m: u32, k: u64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.m == m && c.k == k)
    }
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Runs every `(m, k)` cell of the grid, in parallel when a rayon pool is
/// available. Cells are seeded from `(master_seed, m, k)` only, so results do
/// not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let started = unix_ms();
    let grid: Vec<(u32, u64)> = config
        .m_values
        .iter()
        .flat_map(|&m| config.k_values.iter().map(move |&k| (m, k)))
        .collect();
    let cells = grid
        .into_par_iter()
        .map(|(m, k)| {
            let subseed = derive_subseed(config.master_seed, u64::from(m), k);
            run_cell(&config.cell(m, k), subseed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        config: config.clone(),
        seed: config.master_seed,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        cells,
    })
}

/// Largest `m` accepted by [`table_collision_prob`].
pub const MAX_TABLE_BITS: u32 = 8;

/// Exact expected hit frequency of the experiment for `k = 0..=k_max`,
/// treating leaf and sibling digests as uniform but using the real hash for
/// every internal node.
///
/// With `m` this small a node sees only `2^(2m)` distinct inputs, so the hash
/// acts as one fixed lookup table rather than a fresh random function per
/// level. The closed form assumes the latter; this function gives what a
/// correct simulation converges to instead. The state is the joint
/// distribution of the two running digests, propagated level by level.
pub fn table_collision_prob(m: u32, k_max: u32, algorithm: HashAlgorithm) -> Result<Vec<f64>> {
    let config = HashConfig::new(algorithm, m)?;
    config.require_hex_aligned()?;
    if m > MAX_TABLE_BITS {
        return Err(domain_err!(
            "lookup-table expectation supports m <= {MAX_TABLE_BITS}, got {m}"
        ));
    }
    let n = 1usize << m;
    let width = (m / 4) as usize;
    let digests: Vec<Digest> = (0..n)
        .map(|v| Digest::from_hex(&format!("{v:0width$x}"), m).expect("canonical hex"))
        .collect();
    let shift = 64 - m;
    // table[s * n + a] = node(a, s) with a on the left.
    let mut table = vec![0u32; n * n];
    for (s, sibling) in digests.iter().enumerate() {
        for (a, running) in digests.iter().enumerate() {
            table[s * n + a] = (hash_pair(running, sibling, &config).leading_u64() >> shift) as u32;
        }
    }
    let mut dist = vec![1.0 / (n * n) as f64; n * n];
    let mut next = vec![0.0; n * n];
    let mut out = Vec::with_capacity(k_max as usize + 1);
    let weight = 1.0 / n as f64;
    for level in 0..=k_max {
        out.push((0..n).map(|a| dist[a * n + a]).sum());
        if level == k_max {
            break;
        }
        next.fill(0.0);
        for row in table.chunks_exact(n) {
            for a in 0..n {
                let ta = row[a] as usize * n;
                for b in 0..n {
                    next[ta + row[b] as usize] += dist[a * n + b] * weight;
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn small(m: u32, k: u64) -> CellSpec {
        CellSpec::new(m, k, 200, 5, 32)
    }

    #[test]
    fn random_data_is_alphanumeric_and_deterministic() {
        let rng = ExperimentRng::seed_from_u64(9);
        let a = generate_random_data(32, &mut rng.clone());
        let b = generate_random_data(32, &mut rng.clone());
        assert_eq!(a, b);
        assert_eq!(a.len(), 32);
        assert!(a.as_bytes().iter().all(u8::is_ascii_alphanumeric));
        let one = generate_random_data(1, &mut rng.clone());
        assert!(one.as_bytes()[0].is_ascii_alphanumeric());
    }

    #[test]
    fn random_data_does_not_repeat() {
        let mut rng = ExperimentRng::seed_from_u64(10);
        let seen: HashSet<_> = (0..1000)
            .map(|_| generate_random_data(32, &mut rng))
            .collect();
        assert_eq!(seen.len(), 1000);
    }

    #[test]
    fn alphabet_is_fully_used() {
        let mut rng = ExperimentRng::seed_from_u64(12);
        let seen: HashSet<u8> = (0..200)
            .flat_map(|_| generate_random_data(32, &mut rng).into_bytes())
            .collect();
        assert_eq!(seen.len(), 62);
    }

    #[test]
    fn cell_rejects_bad_parameters() {
        assert!(run_cell(
            &CellSpec {
                trials: 0,
                ..small(4, 1)
            },
            1
        )
        .is_err());
        assert!(run_cell(
            &CellSpec {
                repeats: 0,
                ..small(4, 1)
            },
            1
        )
        .is_err());
        assert!(run_cell(
            &CellSpec {
                data_length: 4,
                ..small(4, 1)
            },
            1
        )
        .is_err());
        assert!(run_cell(&small(6, 1), 1).is_err());
        assert!(run_cell(&small(36, 1), 1).is_err());
    }

    #[test]
    fn cell_statistics_are_consistent() {
        let cell = run_cell(&small(4, 3), 77).unwrap();
        assert_eq!(cell.per_repeat.len(), 5);
        assert!(cell.per_repeat.iter().all(|f| (0.0..=1.0).contains(f)));
        let mean = cell.per_repeat.iter().sum::<f64>() / 5.0;
        assert!((cell.empirical_mean - mean).abs() < 1e-15);
        let hits: u64 = cell
            .per_repeat
            .iter()
            .map(|f| (f * 200.0).round() as u64)
            .sum();
        assert_eq!(hits, cell.total_hits);
        assert_eq!(cell.theoretical, collision_prob_exact(4, 3).unwrap());
    }

    #[test]
    fn std_is_zero_only_when_repeats_agree() {
        assert_eq!(mean_and_std(&[0.25, 0.25, 0.25]), (0.25, 0.0));
        assert!(mean_and_std(&[0.25, 0.5]).1 > 0.0);
        assert_eq!(mean_and_std(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn zero_length_path_measures_plain_digest_collisions() {
        let cell = run_cell(&CellSpec::new(8, 0, 2000, 10, 32), 5).unwrap();
        assert!(
            cell.within(4.0),
            "{} vs {}",
            cell.empirical_mean,
            cell.theoretical
        );
    }

    #[test]
    fn same_seed_same_cell() {
        let a = run_cell(&small(8, 4), 3).unwrap();
        let b = run_cell(&small(8, 4), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subseeds_depend_on_every_field() {
        let base = derive_subseed(1, 4, 16);
        assert_ne!(base, derive_subseed(2, 4, 16));
        assert_ne!(base, derive_subseed(1, 8, 16));
        assert_ne!(base, derive_subseed(1, 4, 15));
        assert_eq!(base, derive_subseed(1, 4, 16));
    }

    #[test]
    fn per_repeat_sampling_is_overdispersed() {
        // m=4, k=16 with a shared path: repeats scatter far beyond binomial noise.
        let spec = CellSpec {
            path_sampling: PathSampling::PerRepeat,
            ..CellSpec::new(4, 16, 200, 200, 32)
        };
        let cell = run_cell(&spec, 8).unwrap();
        let binomial_std = (cell.theoretical * (1.0 - cell.theoretical) / 200.0).sqrt();
        assert!(
            cell.empirical_std > 3.0 * binomial_std,
            "{}",
            cell.empirical_std
        );
        // Same target as per-trial sampling; a 200-repeat mean with per-repeat
        // std ~0.26 has spread ~0.019.
        let p = table_collision_prob(4, 16, HashAlgorithm::Sha256).unwrap()[16];
        assert!((cell.empirical_mean - p).abs() < 0.1);
    }

    #[test]
    fn experiment_grid_and_validation() {
        let config = ExperimentConfig {
            m_values: vec![4, 8],
            k_values: vec![1, 2, 3],
            trials: 50,
            repeats: 2,
            ..ExperimentConfig::with_seed(1)
        };
        let result = run_experiment(&config).unwrap();
        assert_eq!(result.cells.len(), 6);
        assert_eq!(
            result.cells.iter().map(|c| (c.m, c.k)).collect::<Vec<_>>(),
            [(4, 1), (4, 2), (4, 3), (8, 1), (8, 2), (8, 3)]
        );
        assert!(result.cell(8, 3).is_some());
        assert!(run_experiment(&ExperimentConfig {
            m_values: vec![],
            ..config.clone()
        })
        .is_err());
        assert!(run_experiment(&ExperimentConfig {
            m_values: vec![10],
            ..config.clone()
        })
        .is_err());
        assert!(run_experiment(&ExperimentConfig {
            m_values: vec![40],
            ..config
        })
        .is_err());
    }

    #[test]
    fn lookup_table_expectation_matches_reference() {
        let four = table_collision_prob(4, 16, HashAlgorithm::Sha256).unwrap();
        assert_eq!(four[0], 1.0 / 16.0);
        assert_eq!(four[1], 0.12353515625);
        assert!((four[8] - 0.45753500424143567).abs() < 1e-12);
        assert!((four[16] - 0.6865071637762264).abs() < 1e-12);
        let eight = table_collision_prob(8, 16, HashAlgorithm::Sha256).unwrap();
        assert!((eight[1] - 0.007778525352478027).abs() < 1e-12);
        assert!((eight[8] - 0.0344600139443923).abs() < 1e-12);
        assert!((eight[16] - 0.06407535938889494).abs() < 1e-12);
        assert!(table_collision_prob(12, 1, HashAlgorithm::Sha256).is_err());
        assert!(table_collision_prob(6, 1, HashAlgorithm::Sha256).is_err());
    }

    #[test]
    fn short_digests_follow_the_lookup_table() {
        let expected = table_collision_prob(4, 16, HashAlgorithm::Sha256).unwrap();
        for k in [6u64, 16] {
            let cell =
                run_cell(&CellSpec::new(4, k, 1000, 20, 32), derive_subseed(8, 4, k)).unwrap();
            let p = expected[k as usize];
            let se = (p * (1.0 - p) / 20_000.0).sqrt();
            assert!(
                (cell.empirical_mean - p).abs() < 4.0 * se,
                "k={k}: {} vs {p}",
                cell.empirical_mean
            );
        }
    }
}
