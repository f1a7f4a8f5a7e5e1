//! Human review queue over a benchmark manifest: leases with a TTL under an
//! injectable clock, and an append-only JSONL verdict log.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::bench::{apply_verdicts, BenchmarkManifest, ManifestEntry, Verdict, DEFAULT_RHO};
use crate::error::{Error, Result};
use crate::model::ChartType;

pub const DEFAULT_LEASE_MS: u64 = 10 * 60 * 1000;

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
    }
}

/// Clock that only moves when told to.
#[derive(Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start_ms: u64) -> ManualClock {
        ManualClock(AtomicU64::new(start_ms))
    }

    pub fn advance(&self, ms: u64) {
        self.0.fetch_add(ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

impl<C: Clock + ?Sized> Clock for std::sync::Arc<C> {
    fn now_ms(&self) -> u64 {
        (**self).now_ms()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Pending,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub entry_id: String,
    /// URL path of the image, served under `/images/`.
    pub image_url: String,
    pub chart_type: ChartType,
    pub annotate_values: bool,
    pub status: ItemStatus,
    pub question: String,
    /// Lease expiry, milliseconds since the epoch.
    pub lease_expires_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub pending: usize,
    pub done: usize,
    pub kept_estimate: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub entry_id: String,
    /// True when an identical verdict was already recorded.
    pub duplicate: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SubmitError {
    #[error("unknown entry {0}")]
    NotFound(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("invalid verdict: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Append-only verdict log; the first verdict per entry is authoritative.
pub struct VerdictStore {
    path: PathBuf,
    file: File,
    verdicts: Vec<Verdict>,
    by_entry: HashMap<String, usize>,
}

impl VerdictStore {
    /// Opens the log, replaying existing lines. A torn final line (no
    /// trailing newline, unparseable) is dropped and truncated away.
    pub fn open(path: &Path) -> Result<VerdictStore> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut verdicts = Vec::new();
        let mut good_len = 0u64;
        if path.exists() {
            let mut reader = BufReader::new(File::open(path)?);
            let mut line = String::new();
            let mut number = 0;
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 {
                    break;
                }
                number += 1;
                if !line.ends_with('\n') {
                    break;
                }
                let v = serde_json::from_str::<Verdict>(line.trim_end()).map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: number,
                    message: e.to_string(),
                })?;
                verdicts.push(v);
                good_len += n as u64;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        file.set_len(good_len)?;
        let mut store = VerdictStore { path: path.to_path_buf(), file, verdicts: Vec::new(), by_entry: HashMap::new() };
        for v in verdicts {
            store.remember(v);
        }
        Ok(store)
    }

    fn remember(&mut self, v: Verdict) {
        if !self.by_entry.contains_key(&v.entry_id) {
            self.by_entry.insert(v.entry_id.clone(), self.verdicts.len());
        }
        self.verdicts.push(v);
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    pub fn get(&self, entry_id: &str) -> Option<&Verdict> {
        self.by_entry.get(entry_id).map(|&i| &self.verdicts[i])
    }

    /// Appends durably.
    pub fn append(&mut self, v: Verdict) -> std::io::Result<()> {
        let mut line = serde_json::to_vec(&v).map_err(std::io::Error::other)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.remember(v);
        Ok(())
    }
}

struct Lease {
    annotator: String,
    expires_ms: u64,
}

/// Source of gold numbers for the keep rule.
pub type GoldFn = Box<dyn Fn(&ManifestEntry) -> Option<Vec<f64>> + Send + Sync>;

pub struct ReviewQueue<C: Clock> {
    manifest: BenchmarkManifest,
    index: HashMap<String, usize>,
    store: VerdictStore,
    leases: HashMap<String, Lease>,
    clock: C,
    lease_ms: u64,
    gold: GoldFn,
    rho: f64,
}

impl<C: Clock> ReviewQueue<C> {
    pub fn new(manifest: BenchmarkManifest, store: VerdictStore, clock: C, gold: GoldFn) -> ReviewQueue<C> {
        let index = manifest.entries.iter().enumerate().map(|(i, e)| (e.entry_id.clone(), i)).collect();
        ReviewQueue {
            manifest,
            index,
            store,
            leases: HashMap::new(),
            clock,
            lease_ms: DEFAULT_LEASE_MS,
            gold,
            rho: DEFAULT_RHO,
        }
    }

    pub fn with_lease_ms(mut self, ms: u64) -> Self {
        self.lease_ms = ms;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn manifest(&self) -> &BenchmarkManifest {
        &self.manifest
    }

    pub fn now_ms(&self) -> u64 {
        self.clock.now_ms()
    }

    pub fn store(&self) -> &VerdictStore {
        &self.store
    }

    fn live_lease(&self, entry_id: &str, now: u64) -> Option<&Lease> {
        self.leases.get(entry_id).filter(|l| l.expires_ms > now)
    }

    fn item(&self, e: &ManifestEntry, expires_ms: u64) -> ReviewItem {
        ReviewItem {
            entry_id: e.entry_id.clone(),
            image_url: format!("/images/{}", e.image_path.trim_start_matches("images/")),
            chart_type: e.chart_type,
            annotate_values: e.annotate_values,
            status: if self.store.get(&e.entry_id).is_some() { ItemStatus::Done } else { ItemStatus::Pending },
            question: e.qa.question.clone(),
            lease_expires_ms: expires_ms,
        }
    }

    /// Leases the next pending item to `annotator`. An annotator asking again
    /// gets back the item they already hold.
    pub fn next_item(&mut self, annotator: &str) -> Option<ReviewItem> {
        let now = self.clock.now_ms();
        self.leases.retain(|_, l| l.expires_ms > now);
        let pending = |e: &&ManifestEntry| self.store.get(&e.entry_id).is_none();
        let held = self
            .manifest
            .entries
            .iter()
            .filter(pending)
            .find(|e| self.leases.get(&e.entry_id).is_some_and(|l| l.annotator == annotator));
        let chosen = held.or_else(|| {
            self.manifest.entries.iter().filter(pending).find(|e| !self.leases.contains_key(&e.entry_id))
        })?;
        let expires_ms = now + self.lease_ms;
        let id = chosen.entry_id.clone();
        let item = self.item(chosen, expires_ms);
        self.leases.insert(id, Lease { annotator: annotator.to_string(), expires_ms });
        Some(item)
    }

    pub fn submit(&mut self, v: Verdict) -> std::result::Result<Ack, SubmitError> {
        if !self.index.contains_key(&v.entry_id) {
            return Err(SubmitError::NotFound(v.entry_id));
        }
        v.check().map_err(|e| SubmitError::Invalid(e.to_string()))?;
        if let Some(prev) = self.store.get(&v.entry_id) {
            return if prev.same_judgement(&v) {
                Ok(Ack { entry_id: v.entry_id, duplicate: true })
            } else {
                Err(SubmitError::Conflict(format!("{} already has a different verdict", v.entry_id)))
            };
        }
        let now = self.clock.now_ms();
        if let Some(l) = self.live_lease(&v.entry_id, now) {
            if l.annotator != v.annotator_id {
                return Err(SubmitError::Conflict(format!("{} is leased to {}", v.entry_id, l.annotator)));
            }
        }
        let id = v.entry_id.clone();
        self.store.append(v)?;
        self.leases.remove(&id);
        Ok(Ack { entry_id: id, duplicate: false })
    }

    pub fn progress(&self) -> Progress {
        let done = self.manifest.entries.iter().filter(|e| self.store.get(&e.entry_id).is_some()).count();
        let outcome = apply_verdicts(&self.manifest, self.store.verdicts(), |e| (self.gold)(e), self.rho);
        Progress { pending: self.manifest.entries.len() - done, done, kept_estimate: outcome.manifest.entries.len() }
    }

    /// Item by id, without leasing it.
    pub fn peek(&self, entry_id: &str) -> Option<ReviewItem> {
        let e = &self.manifest.entries[*self.index.get(entry_id)?];
        let expires = self.live_lease(entry_id, self.clock.now_ms()).map_or(0, |l| l.expires_ms);
        Some(self.item(e, expires))
    }
}
