use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const RECORDS_FILE: &str = "records.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
    Error,
}

/// One line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    /// Digest of the command, the config and the record label; equal
    /// inputs give equal ids.
    pub run_id: String,
    pub timestamp: String,
    pub command: String,
    pub label: String,
    pub config: RunConfig,
    pub status: Status,
    pub error: Option<String>,
    pub payload: Value,
}

pub fn run_id(command: &str, label: &str, cfg: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(label.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(cfg).expect("config serialises"));
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl ExperimentRecord {
    pub fn new(command: &str, label: &str, cfg: &RunConfig, status: Status, payload: Value) -> Self {
        Self {
            run_id: run_id(command, label, cfg),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            command: command.to_string(),
            label: label.to_string(),
            config: cfg.clone(),
            status,
            error: None,
            payload,
        }
    }

    pub fn with_error(mut self, msg: impl Into<String>) -> Self {
        self.error = Some(msg.into());
        self
    }
}

/// Output directory with the append-only record stream.
pub struct Sink {
    dir: PathBuf,
}

impl Sink {
    pub fn open(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn append(&self, rec: &ExperimentRecord) -> Result<(), CliError> {
        let mut f = OpenOptions::new().create(true).append(true).open(self.path(RECORDS_FILE))?;
        let mut line = serde_json::to_string(rec)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
        Ok(())
    }

    /// Overwrite `name` with a CSV table.
    pub fn write_csv<R: Serialize>(&self, name: &str, rows: &[R]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(self.path(name))?));
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Read back every record in `dir/records.jsonl`.
pub fn read_records(dir: &Path) -> Result<Vec<ExperimentRecord>, CliError> {
    let text = fs::read_to_string(dir.join(RECORDS_FILE))?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}
