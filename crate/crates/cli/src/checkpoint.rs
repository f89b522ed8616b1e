//! Append-only JSON-lines checkpoints for scans: a header with the canonical
//! configuration, one line per finished cell, then a completion marker.

use crate::failure::Failure;
use crate::output::{sync_append, OutputDir};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

pub const CHECKPOINT_NAME: &str = "checkpoint.jsonl";

/// Set by the Ctrl-C handler; scans stop at the next cell boundary.
pub static INTERRUPTED: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Cell {
    key: Vec<u64>,
    values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum Line {
    Header(Value),
    Cell(Cell),
    Complete(bool),
}

pub struct Loaded {
    pub header: Value,
    pub cells: BTreeMap<Vec<u64>, Vec<f64>>,
    pub complete: bool,
}

/// Reads a checkpoint. A final line cut off mid-write is dropped; anything else
/// malformed is a checkpoint error.
pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let bad = |m: String| Failure::Checkpoint(format!("{}: {m}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read: {e}")))?;
    let torn_tail = !text.is_empty() && !text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut header = None;
    let mut cells = BTreeMap::new();
    let mut complete = false;
    for (i, raw) in lines.iter().enumerate() {
        let line: Line = match serde_json::from_str(raw) {
            Ok(l) => l,
            Err(_) if torn_tail && i + 1 == lines.len() => break,
            Err(e) => return Err(bad(format!("line {}: {e}", i + 1))),
        };
        match (i, line) {
            (0, Line::Header(h)) => header = Some(h),
            (0, _) => return Err(bad("first line is not a header".into())),
            (_, Line::Header(_)) => return Err(bad(format!("line {}: second header", i + 1))),
            (_, _) if complete => return Err(bad(format!("line {}: data after completion marker", i + 1))),
            (_, Line::Cell(c)) => {
                if cells.insert(c.key.clone(), c.values).is_some() {
                    return Err(bad(format!("line {}: duplicate cell {:?}", i + 1, c.key)));
                }
            }
            (_, Line::Complete(flag)) => complete = flag,
        }
    }
    let header = header.ok_or_else(|| bad("empty checkpoint".into()))?;
    Ok(Loaded { header, cells, complete })
}

pub struct Checkpoint {
    file: File,
    cells: BTreeMap<Vec<u64>, Vec<f64>>,
}

impl Checkpoint {
    /// Writes a fresh checkpoint (header plus any carried-over cells) and keeps it open for appending.
    pub fn create(out: &mut OutputDir, header: &Value, carried: BTreeMap<Vec<u64>, Vec<f64>>) -> Result<Self, Failure> {
        let path = out.path(CHECKPOINT_NAME);
        let tmp = out.path(&format!("{CHECKPOINT_NAME}.tmp"));
        let mut text = serde_json::to_string(&Line::Header(header.clone()))?;
        text.push('\n');
        for (key, values) in &carried {
            let cell = Cell { key: key.clone(), values: values.clone() };
            text.push_str(&serde_json::to_string(&Line::Cell(cell))?);
            text.push('\n');
        }
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        out.register(CHECKPOINT_NAME);
        let file = OpenOptions::new().append(true).open(&path)?;
        Ok(Self { file, cells: carried })
    }

    fn record(&mut self, key: Vec<u64>, values: Vec<f64>) -> Result<(), Failure> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Failure::Runtime(format!("cell {key:?} produced a non-finite value {v}")));
        }
        let line = serde_json::to_string(&Line::Cell(Cell { key: key.clone(), values: values.clone() }))?;
        sync_append(&mut self.file, &line)?;
        self.cells.insert(key, values);
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        let line = serde_json::to_string(&Line::Complete(true))?;
        sync_append(&mut self.file, &line)
    }
}

/// Drives a list of cells through a checkpoint, in chunks.
pub struct Scan {
    pub checkpoint: Checkpoint,
    /// Stop with "interrupted" after this many new cells.
    pub budget: Option<u64>,
    fresh: u64,
}

impl Scan {
    pub fn new(checkpoint: Checkpoint, budget: Option<u64>) -> Self {
        Self { checkpoint, budget, fresh: 0 }
    }

    /// Values for every key, in order. `compute` gets the pending keys of one chunk
    /// and returns `width` values per key.
    pub fn run<F>(&mut self, keys: &[Vec<u64>], width: usize, chunk: usize, compute: F) -> Result<Vec<Vec<f64>>, Failure>
    where
        F: Fn(&[Vec<u64>]) -> Result<Vec<Vec<f64>>, Failure>,
    {
        for (k, v) in &self.checkpoint.cells {
            if v.len() != width || !keys.contains(k) {
                return Err(Failure::Checkpoint(format!("checkpoint cell {k:?} does not belong to this scan")));
            }
        }
        let pending: Vec<Vec<u64>> = keys.iter().filter(|k| !self.checkpoint.cells.contains_key(*k)).cloned().collect();
        let mut rest = &pending[..];
        while !rest.is_empty() {
            let room = self.budget.map(|b| b.saturating_sub(self.fresh) as usize).unwrap_or(usize::MAX);
            if room == 0 || INTERRUPTED.load(Ordering::SeqCst) {
                return Err(Failure::Interrupted(format!(
                    "stopped with {} of {} cells done; resume from the checkpoint",
                    keys.len() - rest.len(),
                    keys.len()
                )));
            }
            let take = chunk.max(1).min(room).min(rest.len());
            let (now, later) = rest.split_at(take);
            let values = compute(now)?;
            if values.len() != now.len() || values.iter().any(|v| v.len() != width) {
                return Err(Failure::Runtime("scan cell produced the wrong number of values".into()));
            }
            for (k, v) in now.iter().zip(values) {
                self.checkpoint.record(k.clone(), v)?;
            }
            self.fresh += take as u64;
            rest = later;
        }
        Ok(keys.iter().map(|k| self.checkpoint.cells[k].clone()).collect())
    }
}
