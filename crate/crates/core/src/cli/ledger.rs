//! Append-only JSONL record of plans, responses and confidences.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::agent::{ConfidenceRecord, ResponseRecord};
use crate::error::{Error, Result};
use crate::perturb::RunPlan;

pub const LEDGER_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LedgerEntry {
    Plan { plan: RunPlan },
    Response { record: ResponseRecord },
    Confidence { record: ConfidenceRecord },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Line {
    schema_version: u32,
    #[serde(flatten)]
    entry: LedgerEntry,
}

/// In-memory view of a ledger file plus a serialized appender.
#[derive(Debug)]
pub struct RunLedger {
    path: PathBuf,
    entries: Vec<LedgerEntry>,
    seen_responses: HashSet<String>,
    seen_confidences: HashSet<String>,
    file: Option<Mutex<File>>,
}

impl RunLedger {
    /// Read a ledger. A truncated final line from an interrupted write is
    /// ignored; any other malformed line is an error.
    pub fn read(path: &Path) -> Result<Self> {
        let mut ledger = RunLedger {
            path: path.to_path_buf(),
            entries: Vec::new(),
            seen_responses: HashSet::new(),
            seen_confidences: HashSet::new(),
            file: None,
        };
        if !path.exists() {
            return Ok(ledger);
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let complete = text.ends_with('\n');
        let lines: Vec<&str> = text.lines().collect();
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Line>(line) {
                Ok(l) => {
                    if l.schema_version != LEDGER_SCHEMA_VERSION {
                        return Err(Error::Validation(vec![format!(
                            "{}: line {} has schema_version {}",
                            path.display(),
                            i + 1,
                            l.schema_version
                        )]));
                    }
                    ledger.track(l.entry)?;
                }
                Err(_) if i + 1 == lines.len() && !complete => {}
                Err(e) => return Err(Error::json(format!("{} line {}", path.display(), i + 1), e)),
            }
        }
        Ok(ledger)
    }

    /// Open for appending, dropping a truncated final line if there is one.
    pub fn open(path: &Path) -> Result<Self> {
        let mut ledger = Self::read(path)?;
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            if !text.is_empty() && !text.ends_with('\n') {
                let keep = text.rfind('\n').map_or(0, |i| i + 1);
                fs::write(path, &text[..keep]).map_err(|e| Error::io(path, e))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        ledger.file = Some(Mutex::new(file));
        Ok(ledger)
    }

    fn track(&mut self, entry: LedgerEntry) -> Result<()> {
        let dup = match &entry {
            LedgerEntry::Response { record } => !self.seen_responses.insert(record.run_id.clone()),
            LedgerEntry::Confidence { record } => !self.seen_confidences.insert(record.run_id.clone()),
            LedgerEntry::Plan { .. } => false,
        };
        if dup {
            return Err(Error::Validation(vec![format!("{}: duplicate record for a run id", self.path.display())]));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn has_response(&self, run_id: &str) -> bool {
        self.seen_responses.contains(run_id)
    }

    pub fn has_confidence(&self, run_id: &str) -> bool {
        self.seen_confidences.contains(run_id)
    }

    pub fn plans(&self) -> impl Iterator<Item = &RunPlan> {
        self.entries.iter().filter_map(|e| match e {
            LedgerEntry::Plan { plan } => Some(plan),
            _ => None,
        })
    }

    /// Responses sorted by run id.
    pub fn responses(&self) -> Vec<&ResponseRecord> {
        let mut v: Vec<_> = self
            .entries
            .iter()
            .filter_map(|e| match e {
                LedgerEntry::Response { record } => Some(record),
                _ => None,
            })
            .collect();
        v.sort_by(|a, b| a.run_id.cmp(&b.run_id));
        v
    }

    /// Confidences sorted by run id.
    pub fn confidences(&self) -> Vec<&ConfidenceRecord> {
        let mut v: Vec<_> = self
            .entries
            .iter()
            .filter_map(|e| match e {
                LedgerEntry::Confidence { record } => Some(record),
                _ => None,
            })
            .collect();
        v.sort_by(|a, b| a.run_id.cmp(&b.run_id));
        v
    }

    /// Append one entry as a single flushed line. Safe to call from several
    /// threads through a shared reference.
    pub fn append(&self, entry: &LedgerEntry) -> Result<()> {
        let file = self
            .file
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("ledger opened read-only".into()))?;
        let mut line = serde_json::to_string(&Line {
            schema_version: LEDGER_SCHEMA_VERSION,
            entry: entry.clone(),
        })
        .map_err(|e| Error::json("ledger entry", e))?;
        line.push('\n');
        let mut f = file.lock().unwrap_or_else(|p| p.into_inner());
        f.write_all(line.as_bytes()).map_err(|e| Error::io(&self.path, e))?;
        f.flush().map_err(|e| Error::io(&self.path, e))
    }

    /// Response counts by status tag, for summaries.
    pub fn status_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for r in self.responses() {
            let tag = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            *m.entry(tag).or_insert(0) += 1;
        }
        m
    }
}
