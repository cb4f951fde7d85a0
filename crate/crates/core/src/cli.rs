//! The `merkle-collision` command line.
//!
//! Exit codes: 0 on success, 1 when the request is invalid or an input cannot
//! be used (message on stderr prefixed with `error:`), 2 on usage errors.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::attack::attack_stats;
use crate::digest::{HashAlgorithm, HashConfig};
use crate::merkle::{MerkleProof, MerkleTree};
use crate::montecarlo::{run_experiment, ExperimentConfig, PathSampling};
use crate::report::{
    emit_experiment_report, emit_theory_grid, emit_theory_points, format_f64,
    parse_experiment_json, render_chart, FigureSpec, TheoryPoint,
};
use crate::theory::{birthday_bound, CollisionQuery, Mode};

/// Largest number of values a list or range argument may expand to.
const MAX_LIST_LEN: usize = 100_000;

/// Parsed command line: exactly one subcommand with its flags.
#[derive(Debug, Parser)]
#[command(
    name = "merkle-collision",
    version,
    about = "Merkle root-collision probability workbench"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form root-collision probabilities.
    Theory(TheoryArgs),
    /// Monte Carlo estimate of root-collision frequency over an (m, k) grid.
    Experiment(ExperimentArgs),
    /// Birthday search for colliding inputs under a truncated hash.
    Attack(AttackArgs),
    /// Emit figure data as CSV plus an SVG chart.
    Figures(FiguresArgs),
    /// Samples needed to reach a birthday-collision probability.
    Bound(BoundArgs),
    /// Build Merkle trees and verify proofs.
    #[command(subcommand)]
    Tree(TreeCommand),
}

/// A list of integers written as `5`, `1,2,8`, `0..64`, `128..256:8` or `2^40`,
/// or any comma-separated mix of those. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumList<T>(pub Vec<T>);

impl<T> FromStr for NumList<T>
where
    T: TryFrom<u128>,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for item in s.split(',') {
            let item = item.trim();
            let (lo, hi, step) = match item.split_once("..") {
                None => {
                    let v = parse_number(item)?;
                    (v, v, 1)
                }
                Some((lo, rest)) => {
                    let (hi, step) = match rest.split_once(':') {
                        Some((hi, step)) => (hi, parse_number(step)?),
                        None => (rest, 1),
                    };
                    (parse_number(lo)?, parse_number(hi)?, step)
                }
            };
            if lo > hi || step == 0 {
                return Err(format!("`{item}` is an empty range"));
            }
            let count = (hi - lo) / step + 1;
            if count > (MAX_LIST_LEN - out.len()) as u128 {
                return Err(format!("more than {MAX_LIST_LEN} values"));
            }
            let mut v = lo;
            loop {
                out.push(T::try_from(v).map_err(|_| format!("{v} is out of range"))?);
                match v.checked_add(step) {
                    Some(next) if next <= hi => v = next,
                    _ => break,
                }
            }
        }
        Ok(NumList(out))
    }
}

fn parse_number(s: &str) -> Result<u128, String> {
    let bad = || format!("`{s}` is not a non-negative integer");
    match s.split_once('^') {
        Some(("2", exp)) => {
            let exp: u32 = exp.parse().map_err(|_| bad())?;
            1u128.checked_shl(exp).filter(|_| exp < 128).ok_or_else(bad)
        }
        Some(_) => Err(bad()),
        None => s.parse().map_err(|_| bad()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoryFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackFormat {
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sampling {
    PerTrial,
    PerRepeat,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Hash lengths in bits.
    #[arg(long)]
    pub m: NumList<u32>,
    /// Path lengths.
    #[arg(long)]
    pub k: NumList<u128>,
    #[arg(long, default_value = "standard")]
    pub mode: Mode,
    /// Use the exponential approximation instead of the exact formula.
    #[arg(long)]
    pub approx: bool,
    #[arg(long, value_enum, default_value_t = TheoryFormat::Table)]
    pub format: TheoryFormat,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, default_value = "4,8,12,16")]
    pub m: NumList<u32>,
    #[arg(long, default_value = "1..16")]
    pub k: NumList<u64>,
    /// Trials per repeat.
    #[arg(long, default_value_t = 1000)]
    pub trials: u32,
    #[arg(long, default_value_t = 100)]
    pub repeats: u32,
    /// Length of the random alphanumeric leaf strings.
    #[arg(long, default_value_t = 32)]
    pub data_length: usize,
    /// Master seed; drawn from system entropy and reported when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Sampling::PerTrial)]
    pub path_sampling: Sampling,
    /// CSV summary destination (standard output when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full result as JSON, including per-repeat frequencies.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long, default_value_t = 400)]
    pub runs: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = AttackFormat::Table)]
    pub format: AttackFormat,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub which: u8,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Figure 4 from a saved experiment (JSON written by `experiment --json`).
    #[arg(long, conflicts_with = "seed")]
    pub from: Option<PathBuf>,
    /// Figure 4 seed when running the experiment inline.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Target collision probability in [0, 1).
    #[arg(long, allow_negative_numbers = true)]
    pub p: f64,
    #[arg(long)]
    pub m: u32,
}

#[derive(Debug, Subcommand)]
pub enum TreeCommand {
    /// Build a tree with one UTF-8 leaf per input line and print its root.
    Build(TreeBuildArgs),
    /// Check a proof file; exits 0 only if it verifies.
    Verify(TreeVerifyArgs),
}

#[derive(Debug, Args)]
pub struct TreeBuildArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "sha256")]
    pub hash: HashAlgorithm,
    #[arg(long, default_value_t = 256)]
    pub m: u32,
    /// Write the proof for this leaf instead of printing the root.
    #[arg(long)]
    pub proof_index: Option<usize>,
    /// Proof destination (standard output when omitted).
    #[arg(long, requires = "proof_index")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TreeVerifyArgs {
    #[arg(long)]
    pub proof: PathBuf,
}

/// A failure reported as `error: ...` with exit code 1.
#[derive(Debug)]
struct Failure(String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn print(text: &str) -> Outcome {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| Failure(format!("standard output: {e}")))
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let seed = rand::random();
        eprintln!("seed: {seed}");
        seed
    })
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(argv) {
        Ok(config) => config,
        Err(e) => {
            // Help and version land here too, with exit code 0.
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(config.command) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {failure}");
            1
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Theory(args) => theory(args),
        Command::Experiment(args) => experiment(args),
        Command::Attack(args) => attack(args),
        Command::Figures(args) => figures(args),
        Command::Bound(args) => bound(args),
        Command::Tree(TreeCommand::Build(args)) => tree_build(args),
        Command::Tree(TreeCommand::Verify(args)) => tree_verify(args),
    }
}

fn theory(args: TheoryArgs) -> Outcome {
    let mut estimates = Vec::new();
    for &m in &args.m.0 {
        for &k in &args.k.0 {
            estimates.push(CollisionQuery::new(m, k, args.mode)?.estimate()?);
        }
    }
    let pick = |e: &crate::theory::CollisionEstimate| if args.approx { e.approx } else { e.exact };
    let text = match args.format {
        TheoryFormat::Json => {
            serde_json::to_string_pretty(&estimates).expect("estimates serialize") + "\n"
        }
        TheoryFormat::Csv => {
            let points: Vec<TheoryPoint> = estimates
                .iter()
                .map(|e| TheoryPoint {
                    m: e.query.m,
                    k: e.query.k,
                    mode: e.query.mode,
                    p: pick(e),
                })
                .collect();
            emit_theory_points(&points)
        }
        TheoryFormat::Table => {
            let mut text = format!("{:>5} {:>12} {:>9}  p\n", "m", "k", "mode");
            for e in &estimates {
                text += &format!(
                    "{:>5} {:>12} {:>9}  {}\n",
                    e.query.m,
                    e.query.k,
                    e.query.mode,
                    format_f64(pick(e))
                );
            }
            text
        }
    };
    print(&text)
}

fn experiment(args: ExperimentArgs) -> Outcome {
    let mut config = ExperimentConfig {
        m_values: args.m.0,
        k_values: args.k.0,
        trials: args.trials,
        repeats: args.repeats,
        data_length: args.data_length,
        master_seed: 0,
        path_sampling: match args.path_sampling {
            Sampling::PerTrial => PathSampling::PerTrial,
            Sampling::PerRepeat => PathSampling::PerRepeat,
        },
    };
    // Reject bad flags before consuming entropy or starting work.
    config.validate()?;
    config.master_seed = seed_or_entropy(args.seed);
    let report = emit_experiment_report(&run_experiment(&config)?)?;
    if let Some(path) = &args.json {
        write_text(path, &report.json)?;
    }
    match &args.out {
        Some(path) => write_text(path, &report.csv),
        None => print(&report.csv),
    }
}

fn attack(args: AttackArgs) -> Outcome {
    let seed = seed_or_entropy(args.seed);
    let stats = attack_stats(args.m, args.runs, seed)?;
    let text = match args.format {
        AttackFormat::Csv => format!(
            "m,runs,seed,median_trials,mean_trials,predicted_median\n{},{},{},{},{},{}\n",
            stats.m,
            stats.runs,
            stats.seed,
            format_f64(stats.median_trials),
            format_f64(stats.mean_trials),
            format_f64(stats.predicted_median)
        ),
        AttackFormat::Table => format!(
            "m                 {}\nruns              {}\nseed              {}\nmedian trials     {}\nmean trials       {:.2}\npredicted median  {:.2}\n",
            stats.m, stats.runs, stats.seed, stats.median_trials, stats.mean_trials, stats.predicted_median
        ),
    };
    print(&text)
}

fn bound(args: BoundArgs) -> Outcome {
    print(&format!(
        "{}\n",
        format_f64(birthday_bound(args.p, args.m)?)
    ))
}

fn figures(args: FiguresArgs) -> Outcome {
    if args.which != 4 && (args.from.is_some() || args.seed.is_some()) {
        return Err(Failure("--from and --seed only apply to figure 4".into()));
    }
    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    let mut outputs: Vec<(String, String)> = Vec::new();
    let mut theory_figure = |name: &str, spec: FigureSpec| -> Outcome {
        let csv = emit_theory_grid(&spec)?;
        let svg = render_chart(&csv, &spec)?;
        outputs.push((format!("{name}.csv"), csv));
        outputs.push((format!("{name}.svg"), svg));
        Ok(())
    };
    match args.which {
        1 => theory_figure("figure1", FigureSpec::figure1())?,
        2 => theory_figure("figure2", FigureSpec::figure2())?,
        3 => {
            let [birthday, standard] = FigureSpec::figure3();
            theory_figure("figure3_birthday", birthday)?;
            theory_figure("figure3_standard", standard)?;
        }
        _ => {
            let result = match &args.from {
                Some(path) => parse_experiment_json(&read_text(path)?)?,
                None => run_experiment(&ExperimentConfig::with_seed(seed_or_entropy(args.seed)))?,
            };
            let report = emit_experiment_report(&result)?;
            let spec = FigureSpec::figure4(
                result.config.m_values.clone(),
                result.config.k_values.clone(),
            );
            let svg = render_chart(&report.csv, &spec)?;
            outputs.push(("figure4.csv".into(), report.csv));
            outputs.push(("figure4.svg".into(), svg));
            if args.from.is_none() {
                outputs.push(("figure4.json".into(), report.json));
            }
        }
    }
    for (name, text) in &outputs {
        let path = args.out.join(name);
        write_text(&path, text)?;
        print(&format!("{}\n", path.display()))?;
    }
    Ok(())
}

fn tree_build(args: TreeBuildArgs) -> Outcome {
    let config = HashConfig::new(args.hash, args.m)?;
    let text = read_text(&args.input)?;
    let leaves: Vec<&str> = text.lines().collect();
    let tree = MerkleTree::build(&leaves, config)?;
    let Some(index) = args.proof_index else {
        return print(&format!("{}\n", tree.root()));
    };
    let json = tree.generate_proof(index)?.to_json() + "\n";
    match &args.out {
        Some(path) => {
            write_text(path, &json)?;
            print(&format!("{}\n", tree.root()))
        }
        None => print(&json),
    }
}

fn tree_verify(args: TreeVerifyArgs) -> Outcome {
    let proof = MerkleProof::from_json(&read_text(&args.proof)?)?;
    if proof.verify()? {
        print("ok\n")
    } else {
        Err(Failure(format!(
            "{}: proof does not reach the stated root",
            args.proof.display()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list<T: TryFrom<u128>>(s: &str) -> Result<Vec<T>, String> {
        s.parse::<NumList<T>>().map(|l| l.0)
    }

    #[test]
    fn list_syntax() {
        assert_eq!(list::<u32>("5").unwrap(), [5]);
        assert_eq!(list::<u32>("4,8,12").unwrap(), [4, 8, 12]);
        assert_eq!(list::<u32>("1..4").unwrap(), [1, 2, 3, 4]);
        assert_eq!(list::<u32>("128..144:8").unwrap(), [128, 136, 144]);
        assert_eq!(list::<u32>("0..5:2,9").unwrap(), [0, 2, 4, 9]);
        assert_eq!(list::<u128>("2^64").unwrap(), [1u128 << 64]);
        assert_eq!(list::<u128>("2^127").unwrap(), [1u128 << 127]);
    }

    #[test]
    fn list_errors() {
        for bad in [
            "",
            "x",
            "4..2",
            "1..4:0",
            "3^2",
            "2^128",
            "-1",
            "0..1000000",
        ] {
            assert!(list::<u32>(bad).is_err(), "{bad:?}");
        }
        assert!(list::<u32>("4294967296").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(dispatch(["mc", "frobnicate"]), 2);
        assert_eq!(dispatch(["mc", "theory", "--m", "4"]), 2);
        assert_eq!(
            dispatch(["mc", "theory", "--m", "4", "--k", "1", "--bogus"]),
            2
        );
        assert_eq!(dispatch(["mc", "figures", "--which", "5"]), 2);
        assert_eq!(dispatch(["mc"]), 2);
    }

    #[test]
    fn domain_errors_exit_1() {
        assert_eq!(dispatch(["mc", "theory", "--m", "0", "--k", "1"]), 1);
        assert_eq!(
            dispatch(["mc", "theory", "--m", "5", "--k", "1", "--mode", "birthday"]),
            1
        );
        assert_eq!(dispatch(["mc", "bound", "--p", "1.5", "--m", "16"]), 1);
        assert_eq!(dispatch(["mc", "attack", "--m", "6", "--seed", "1"]), 1);
        assert_eq!(dispatch(["mc", "experiment", "--m", "5", "--seed", "1"]), 1);
    }

    #[test]
    fn help_and_version_exit_0() {
        assert_eq!(dispatch(["mc", "--help"]), 0);
        assert_eq!(dispatch(["mc", "--version"]), 0);
    }

    #[test]
    fn successful_commands_exit_0() {
        assert_eq!(dispatch(["mc", "theory", "--m", "4", "--k", "16"]), 0);
        assert_eq!(
            dispatch(["mc", "theory", "--m", "256", "--k", "2^64", "--format", "json"]),
            0
        );
        assert_eq!(dispatch(["mc", "bound", "--p", "0.5", "--m", "16"]), 0);
        assert_eq!(
            dispatch(["mc", "attack", "--m", "8", "--runs", "5", "--seed", "1"]),
            0
        );
    }
}
