//! Campaign persistence: atomic file writes, the output-directory lock, and
//! the on-disk record formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bo::{CampaignRecord, IterationRecord, Source, StopReason};
use crate::controller::GainVector;
use crate::error::{Error, Result};
use crate::gp::{KernelHyperparams, Point};

pub const CAMPAIGN_FILE: &str = "campaign.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const LOCK_FILE: &str = ".gaintune.lock";

pub fn lap_file(i: usize) -> String {
    format!("lap_{i:03}.csv")
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place,
/// so readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_path_buf())),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// One line of `campaign.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub i: usize,
    pub source: Source,
    pub theta: [f64; 4],
    pub z: Point,
    pub j_bo: f64,
    pub j: Option<f64>,
    pub j_lat: Option<f64>,
    pub j_head: Option<f64>,
    pub completion: Option<f64>,
    pub hyper: Option<KernelHyperparams>,
    pub ei_at_selection: Option<f64>,
    /// Simulated lap duration in seconds, which keeps the file reproducible.
    pub wall_time_s: f64,
}

impl From<&IterationRecord> for CampaignRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            i: r.i,
            source: r.source,
            theta: r.theta.to_array(),
            z: r.z,
            j_bo: r.j_bo,
            j: r.cost.map(|c| c.j),
            j_lat: r.cost.map(|c| c.j_lat),
            j_head: r.cost.map(|c| c.j_head),
            completion: r.cost.map(|c| c.completion_ratio),
            hyper: r.hyper,
            ei_at_selection: r.ei_at_selection,
            wall_time_s: r.duration_s,
        }
    }
}

impl CampaignRow {
    pub fn gains(&self) -> GainVector {
        GainVector::from_array(self.theta)
    }
}

pub fn campaign_jsonl(record: &CampaignRecord) -> String {
    let mut out = String::new();
    for r in &record.iterations {
        out.push_str(&serde_json::to_string(&CampaignRow::from(r)).expect("rows serialize"));
        out.push('\n');
    }
    out
}

pub fn read_campaign(path: &Path) -> Result<Vec<CampaignRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::Parse { path: path.to_path_buf(), message: format!("line {}: {e}", n + 1) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub evaluations: usize,
    pub best_i: Option<usize>,
    pub best_theta: Option<GainVector>,
    pub best_j_bo: Option<f64>,
    pub best_warm_start_j_bo: Option<f64>,
    pub stop_reason: Option<StopReason>,
    /// Set when the evaluator aborted the campaign.
    pub error: Option<String>,
}

impl Summary {
    pub fn new(record: &CampaignRecord, error: Option<String>) -> Self {
        let best = record.best();
        let warm = record.best_warm_start();
        Self {
            seed: record.seed,
            evaluations: record.iterations.len(),
            best_i: best.map(|b| b.i),
            best_theta: best.map(|b| b.theta),
            best_j_bo: best.map(|b| b.j_bo),
            best_warm_start_j_bo: warm.is_finite().then_some(warm),
            stop_reason: record.stop_reason,
            error,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Serializes rows as a headed CSV. An empty table still gets its header.
pub fn csv_bytes<T: Serialize>(rows: &[T], header: &str) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize to CSV");
    }
    if rows.is_empty() {
        w.write_record(header.split(',')).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().collect::<std::result::Result<Vec<T>, _>>().map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse { path: path.to_path_buf(), message: e.to_string() }
    }
}
