//! Append-only record of completed work units, so an interrupted sweep can
//! resume without recomputing them.
//!
//! The first line holds the config fingerprint; each further line is one
//! unit's values as IEEE-754 bit patterns, which round-trip exactly.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Serialize, Deserialize)]
struct Header {
    fingerprint: String,
    version: String,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    unit: usize,
    id: String,
    values: Vec<u64>,
}

pub struct Manifest {
    path: PathBuf,
    file: Mutex<File>,
    done: BTreeMap<usize, (String, Vec<f64>)>,
}

impl Manifest {
    /// Opens `path`, keeping prior entries only when the fingerprint matches.
    pub fn open(path: &Path, fingerprint: &str) -> Result<Self> {
        let io = |e| HarnessError::io(format!("manifest {}", path.display()), e);
        let mut done = BTreeMap::new();
        let mut resume = false;
        if let Ok(f) = File::open(path) {
            let mut lines = BufReader::new(f).lines();
            if let Some(Ok(first)) = lines.next() {
                if let Ok(h) = serde_json::from_str::<Header>(&first) {
                    resume = h.fingerprint == fingerprint && h.version == vqc_core::VERSION;
                }
            }
            if resume {
                // A torn final line from an interrupted write is dropped.
                for e in lines.map_while(std::result::Result::ok).filter_map(|l| serde_json::from_str::<Entry>(&l).ok()) {
                    done.insert(e.unit, (e.id, e.values.into_iter().map(f64::from_bits).collect()));
                }
            }
        }
        let file = if resume {
            let mut f = OpenOptions::new().append(true).open(path).map_err(io)?;
            // Terminate a possibly torn last line.
            writeln!(f).map_err(io)?;
            f
        } else {
            let mut f = File::create(path).map_err(io)?;
            let header = Header { fingerprint: fingerprint.to_string(), version: vqc_core::VERSION.to_string() };
            writeln!(f, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(io)?;
            f.flush().map_err(io)?;
            f
        };
        Ok(Manifest { path: path.to_path_buf(), file: Mutex::new(file), done })
    }

    /// Values of a previously completed unit with the same identity.
    pub fn completed(&self, unit: usize, id: &str) -> Option<Vec<f64>> {
        self.done.get(&unit).filter(|(i, _)| i == id).map(|(_, v)| v.clone())
    }

    pub fn completed_count(&self) -> usize {
        self.done.len()
    }

    pub fn record(&self, unit: usize, id: &str, values: &[f64]) -> Result<()> {
        let entry = Entry { unit, id: id.to_string(), values: values.iter().map(|v| v.to_bits()).collect() };
        let line = serde_json::to_string(&entry).expect("entry serializes");
        let mut f = self.file.lock().expect("manifest lock");
        writeln!(f, "{line}")
            .and_then(|_| f.flush())
            .map_err(|e| HarnessError::io(format!("manifest {}", self.path.display()), e))
    }

    /// Deletes the manifest once the final output is in place.
    pub fn finish(self) -> Result<()> {
        drop(self.file);
        std::fs::remove_file(&self.path).map_err(|e| HarnessError::io(format!("manifest {}", self.path.display()), e))
    }
}
