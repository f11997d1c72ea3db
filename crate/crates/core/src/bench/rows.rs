//! The result row shared by sweeps, verification and figures.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::age::Metric;
use crate::analytic::FormulaId;
use crate::error::{Error, Result};
use crate::service::ServiceFamily;
use crate::sim::Discipline;

/// Column order of every emitted CSV.
pub const COLUMNS: [&str; 14] = [
    "discipline",
    "service",
    "lambda",
    "mu",
    "metric",
    "k",
    "analytic_value",
    "formula_id",
    "sim_value",
    "sim_stderr",
    "n_packets",
    "seed",
    "z_score",
    "verdict",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "match")]
    Match,
    #[serde(rename = "discrepant")]
    Discrepant,
    /// No cataloged closed form; the simulation value stands alone.
    #[serde(rename = "not-in-paper")]
    Uncataloged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub discipline: Discipline,
    pub service: ServiceFamily,
    pub lambda: f64,
    pub mu: f64,
    pub metric: Metric,
    pub k: u32,
    pub analytic_value: Option<f64>,
    pub formula_id: Option<FormulaId>,
    pub sim_value: Option<f64>,
    pub sim_stderr: Option<f64>,
    pub n_packets: Option<usize>,
    pub seed: Option<u64>,
    pub z_score: Option<f64>,
    pub verdict: Option<Verdict>,
}

impl Row {
    /// Whether a discrepancy on this row should fail a verification.
    pub fn is_authoritative(&self) -> bool {
        self.formula_id.is_some_and(FormulaId::is_authoritative)
    }

    pub fn is_fatal(&self) -> bool {
        self.verdict == Some(Verdict::Discrepant) && self.is_authoritative()
    }
}

/// Writes `# `-prefixed comment lines followed by the CSV table.
pub fn write_rows<W: Write>(mut out: W, comments: &[String], rows: &[Row]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}").map_err(|e| Error::io("<csv>", e))?;
    }
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(COLUMNS)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(COLUMNS) {
        return Err(Error::Parse(format!(
            "unexpected CSV columns: {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}
