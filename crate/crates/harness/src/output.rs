//! Flat result rows and their CSV encoding.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// One self-describing measurement. Empty cells mean "not applicable".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub arch: String,
    pub ensemble: String,
    pub n: usize,
    #[serde(rename = "D")]
    pub depth: Option<usize>,
    #[serde(rename = "D_star")]
    pub d_star: Option<usize>,
    pub d0_or_g: String,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub std_err: Option<f64>,
    /// Number of tasks, circuits or gradient rows behind `value`.
    pub samples: usize,
    pub version: String,
}

pub const COLUMNS: [&str; 13] = [
    "experiment", "arch", "ensemble", "n", "D", "D_star", "d0_or_g", "seed", "metric", "value", "std_err", "samples",
    "version",
];

/// Writes the rows with a header. With `timestamp`, a leading `#` comment
/// line records when the file was produced.
pub fn write_csv<W: Write>(mut w: W, rows: &[ResultRow], timestamp: Option<&str>) -> Result<()> {
    let io = |e| HarnessError::io("writing CSV", e);
    if let Some(ts) = timestamp {
        writeln!(w, "# generated {ts} by vqc {}", vqc_core::VERSION).map_err(io)?;
    }
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(COLUMNS).map_err(csv_error)?;
    for row in rows {
        out.serialize(row).map_err(csv_error)?;
    }
    out.flush().map_err(io)
}

/// Reads rows back, skipping a leading timestamp comment.
pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    reader.deserialize().map(|row| row.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> HarnessError {
    HarnessError::Runtime(format!("CSV: {e}"))
}
