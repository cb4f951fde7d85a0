//! CSV, JSON and SVG output for theory grids and experiment results.
//!
//! Numbers are written in shortest round-trip decimal form, so identical
//! inputs produce byte-identical documents and parsing them back recovers
//! every `f64` exactly.

mod svg;

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, format_err, Result};
use crate::montecarlo::ExperimentResult;
use crate::theory::{collision_prob_birthday_mode, collision_prob_exact, Mode};

pub use svg::render_chart;

pub const THEORY_HEADER: [&str; 5] = ["m", "k", "mode", "p", "log10_p"];
pub const EXPERIMENT_HEADER: [&str; 8] = [
    "m",
    "k",
    "trials",
    "repeats",
    "empirical_mean",
    "empirical_std",
    "theoretical",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FigureKind {
    /// Heatmap of `log10 p` over the `(k, m)` grid.
    Surface,
    /// Same as `Surface`, for grids where `p` spans many decades.
    LogSurface,
    /// Empirical and theoretical curves over `k`, one pair per `m`.
    ExperimentCurves,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub m_values: Vec<u32>,
    pub k_values: Vec<u64>,
    pub mode: Mode,
    pub log_y: bool,
}

impl FigureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.k_values.is_empty() {
            return Err(domain_err!("figure ranges must be non-empty"));
        }
        if self.kind == FigureKind::LogSurface && !self.log_y {
            return Err(domain_err!("a log surface needs a logarithmic scale"));
        }
        Ok(())
    }

    fn sorted_grid(&self) -> (Vec<u32>, Vec<u64>) {
        let mut ms = self.m_values.clone();
        ms.sort_unstable();
        ms.dedup();
        let mut ks = self.k_values.clone();
        ks.sort_unstable();
        ks.dedup();
        (ms, ks)
    }

    /// `p` against `k` and `m` for small digests.
    pub fn figure1() -> Self {
        Self {
            kind: FigureKind::Surface,
            m_values: (1..=16).collect(),
            k_values: (0..=64).collect(),
            mode: Mode::Standard,
            log_y: false,
        }
    }

    /// Practically relevant digests, `m = 128..=256` in steps of 8.
    pub fn figure2() -> Self {
        Self {
            kind: FigureKind::LogSurface,
            m_values: (128..=256).step_by(8).collect(),
            k_values: (0..=64).collect(),
            mode: Mode::Standard,
            log_y: true,
        }
    }

    /// Birthday-attack surface and the standard surface on the same grid.
    pub fn figure3() -> [Self; 2] {
        let base = Self {
            kind: FigureKind::Surface,
            m_values: (2..=16).step_by(2).collect(),
            k_values: (0..=64).collect(),
            mode: Mode::BirthdayAttack,
            log_y: false,
        };
        [
            base.clone(),
            Self {
                mode: Mode::Standard,
                ..base
            },
        ]
    }

    pub fn figure4(m_values: Vec<u32>, k_values: Vec<u64>) -> Self {
        Self {
            kind: FigureKind::ExperimentCurves,
            m_values,
            k_values,
            mode: Mode::Standard,
            log_y: true,
        }
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(value: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(value).to_owned()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

fn write_row<const N: usize>(writer: &mut csv::Writer<Vec<u8>>, row: [String; N]) {
    writer.write_record(row).expect("in-memory write");
}

/// One evaluated probability, as written to theory CSV files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryPoint {
    pub m: u32,
    pub k: u128,
    pub mode: Mode,
    pub p: f64,
}

/// `m,k,mode,p,log10_p`, one row per point in the given order.
pub fn emit_theory_points(points: &[TheoryPoint]) -> String {
    let mut writer = csv_writer();
    writer.write_record(THEORY_HEADER).expect("in-memory write");
    for point in points {
        write_row(
            &mut writer,
            [
                point.m.to_string(),
                point.k.to_string(),
                point.mode.to_string(),
                format_f64(point.p),
                format_f64(point.p.log10()),
            ],
        );
    }
    finish(writer)
}

/// Evaluates the exact probability on the spec's grid, sorted by `(m, k)`.
pub fn emit_theory_grid(spec: &FigureSpec) -> Result<String> {
    spec.validate()?;
    if spec.kind == FigureKind::ExperimentCurves {
        return Err(domain_err!(
            "experiment curves come from experiment results, not theory"
        ));
    }
    let (ms, ks) = spec.sorted_grid();
    let mut points = Vec::with_capacity(ms.len() * ks.len());
    for &m in &ms {
        for &k in &ks {
            let k = u128::from(k);
            let p = match spec.mode {
                Mode::Standard => collision_prob_exact(m, k)?,
                Mode::BirthdayAttack => collision_prob_birthday_mode(m, k)?,
            };
            points.push(TheoryPoint {
                m,
                k,
                mode: spec.mode,
                p,
            });
        }
    }
    Ok(emit_theory_points(&points))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentReport {
    pub csv: String,
    pub json: String,
}

/// Per-cell CSV summary plus a JSON document holding the full result.
pub fn emit_experiment_report(result: &ExperimentResult) -> Result<ExperimentReport> {
    if result.cells.is_empty() {
        return Err(domain_err!("experiment result has no cells"));
    }
    Ok(ExperimentReport {
        csv: experiment_csv(result),
        json: serde_json::to_string_pretty(result).expect("result serializes"),
    })
}

fn experiment_csv(result: &ExperimentResult) -> String {
    let mut writer = csv_writer();
    writer
        .write_record(EXPERIMENT_HEADER)
        .expect("in-memory write");
    for cell in &result.cells {
        write_row(
            &mut writer,
            [
                cell.m.to_string(),
                cell.k.to_string(),
                cell.trials.to_string(),
                cell.repeats.to_string(),
                format_f64(cell.empirical_mean),
                format_f64(cell.empirical_std),
                format_f64(cell.theoretical),
                result.seed.to_string(),
            ],
        );
    }
    finish(writer)
}

pub fn parse_experiment_json(text: &str) -> Result<ExperimentResult> {
    serde_json::from_str(text).map_err(|e| format_err!("invalid experiment JSON: {e}"))
}
