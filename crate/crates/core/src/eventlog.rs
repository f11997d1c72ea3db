//! Line-oriented packet log interchange.
//!
//! ```text
//! # horizon=1000.5
//! id,t_arrival,t_service_start,t_departure,outcome
//! 0,0.73,0.73,1.52,delivered
//! 1,0.91,,,dropped_on_arrival
//! ```
//!
//! Absent times are empty fields. Times are written in the shortest decimal
//! form that parses back to the same `f64`. The optional leading
//! `# horizon=` comment carries the observation horizon.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::age::{Outcome, PacketRecord};
use crate::error::{Error, Result};

const HORIZON_PREFIX: &str = "# horizon=";

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    id: usize,
    t_arrival: f64,
    t_service_start: Option<f64>,
    t_departure: Option<f64>,
    outcome: Outcome,
}

/// A packet log together with the horizon it was observed over.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub records: Vec<PacketRecord>,
    pub horizon: Option<f64>,
}

pub fn write_log<W: Write>(mut out: W, records: &[PacketRecord], horizon: Option<f64>) -> Result<()> {
    if let Some(h) = horizon {
        writeln!(out, "{HORIZON_PREFIX}{h}").map_err(|e| Error::io("<event log>", e))?;
    }
    let mut writer = csv::Writer::from_writer(out);
    for p in records {
        writer.serialize(Row {
            id: p.id,
            t_arrival: p.arrival,
            t_service_start: p.service_start,
            t_departure: p.departure,
            outcome: p.outcome,
        })?;
    }
    if records.is_empty() {
        writer.write_record(["id", "t_arrival", "t_service_start", "t_departure", "outcome"])?;
    }
    writer.flush().map_err(|e| Error::io("<event log>", e))?;
    Ok(())
}

pub fn read_log<R: Read>(input: R) -> Result<EventLog> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first).map_err(|e| Error::io("<event log>", e))?;
    let horizon = match first.trim().strip_prefix(HORIZON_PREFIX) {
        Some(v) => Some(
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad horizon `{v}`: {e}")))?,
        ),
        None => None,
    };
    let rest = if horizon.is_some() || first.trim().starts_with('#') {
        String::new()
    } else {
        first
    };
    let chained = rest.as_bytes().chain(input);
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(chained);
    let mut records = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row?;
        records.push(PacketRecord {
            id: row.id,
            arrival: row.t_arrival,
            service_start: row.t_service_start,
            departure: row.t_departure,
            outcome: row.outcome,
        });
    }
    Ok(EventLog { records, horizon })
}

pub fn save(path: &Path, records: &[PacketRecord], horizon: Option<f64>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_log(std::io::BufWriter::new(file), records, horizon)
}

pub fn load(path: &Path) -> Result<EventLog> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_log(file)
}
