//! Benchmark sampling from the filtered pool, human verdicts, and the
//! versioned manifest file.

mod manifest;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::rnss;
use crate::model::ChartType;
use crate::qa::{QaKind, QaRecord};
use crate::rng::{derive_seed, stream};

pub use manifest::{manifest_bytes, read_manifest, write_manifest};

pub const DEFAULT_PER_TYPE: usize = 300;
pub const DEFAULT_UNANNOTATED_FRACTION: f64 = 0.5;
pub const DEFAULT_RHO: f64 = 0.9;
pub const MANIFEST_VERSION: u32 = 1;

pub const LEVELS: [QaKind; 3] = [QaKind::Literal, QaKind::Inferential, QaKind::Reasoning];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub entry_id: String,
    pub chart_type: ChartType,
    pub data_id: String,
    pub style_id: String,
    pub image_path: String,
    pub annotate_values: bool,
    pub qa: QaRecord,
    pub gold_data_path: String,
}

impl ManifestEntry {
    pub fn level(&self) -> QaKind {
        self.qa.kind
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub version: u32,
    pub sampling_seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl BenchmarkManifest {
    pub fn get(&self, entry_id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.entry_id == entry_id)
    }

    /// Entry counts per chart type and level.
    pub fn level_counts(&self) -> BTreeMap<ChartType, BTreeMap<QaKind, usize>> {
        let mut out: BTreeMap<ChartType, BTreeMap<QaKind, usize>> = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.chart_type).or_default().entry(e.level()).or_insert(0) += 1;
        }
        out
    }
}

/// One rendered, filtered image with its chart's QA records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolItem {
    pub chart_type: ChartType,
    pub data_id: String,
    pub style_id: String,
    pub image_path: String,
    pub annotate_values: bool,
    pub gold_data_path: String,
    pub records: Vec<QaRecord>,
}

/// Draws `per_type` entries for every chart type present in the pool, one
/// chart per entry, levels in equal thirds, and at least
/// `unannotated_fraction` of entries on unannotated images where the pool
/// allows it.
pub fn sample_benchmark(
    pool: &[PoolItem],
    per_type: usize,
    seed: u64,
    unannotated_fraction: f64,
) -> Result<BenchmarkManifest> {
    if per_type < 3 {
        return Err(Error::InvalidArgument(format!("per_type must be at least 3, got {per_type}")));
    }
    if !(0.0..=1.0).contains(&unannotated_fraction) {
        return Err(Error::InvalidArgument("unannotated fraction must lie in [0, 1]".into()));
    }
    let mut by_type: BTreeMap<ChartType, BTreeMap<&str, Vec<&PoolItem>>> = BTreeMap::new();
    for item in pool {
        by_type.entry(item.chart_type).or_default().entry(&item.data_id).or_default().push(item);
    }
    let mut entries = Vec::new();
    for (chart_type, charts) in &by_type {
        let mut rng = stream(derive_seed(seed, &[chart_type.id(), "benchmark"]));
        // only charts that can serve every level are usable
        let mut ids: Vec<&str> = charts
            .iter()
            .filter(|(_, items)| LEVELS.iter().all(|l| items[0].records.iter().any(|r| r.kind == *l)))
            .map(|(id, _)| *id)
            .collect();
        if ids.len() < per_type {
            return Err(Error::PoolShortfall { chart_type: *chart_type, needed: per_type, available: ids.len() });
        }
        ids.shuffle(&mut rng);
        ids.truncate(per_type);

        let mut levels: Vec<QaKind> = (0..per_type).map(|k| LEVELS[k % 3]).collect();
        levels.shuffle(&mut rng);
        let unannotated = (unannotated_fraction * per_type as f64).ceil() as usize;
        let mut want_plain: Vec<bool> = (0..per_type).map(|k| k < unannotated).collect();
        want_plain.shuffle(&mut rng);
        // charts that only have one flavour take it; others fill the quota
        let has = |id: &str, plain: bool| charts[id].iter().any(|i| i.annotate_values != plain);
        rebalance(&ids, &mut want_plain, has);

        for (k, id) in ids.iter().enumerate() {
            let plain = want_plain[k];
            let mut images: Vec<&PoolItem> =
                charts[id].iter().copied().filter(|i| i.annotate_values != plain).collect();
            if images.is_empty() {
                images = charts[id].clone();
            }
            images.sort_by(|a, b| a.style_id.cmp(&b.style_id));
            let image = images[rng.gen_range(0..images.len())];
            let candidates: Vec<&QaRecord> = image.records.iter().filter(|r| r.kind == levels[k]).collect();
            let qa = candidates[rng.gen_range(0..candidates.len())].clone();
            entries.push(ManifestEntry {
                entry_id: format!("{}-{k:04}", chart_type.id()),
                chart_type: *chart_type,
                data_id: image.data_id.clone(),
                style_id: image.style_id.clone(),
                image_path: image.image_path.clone(),
                annotate_values: image.annotate_values,
                qa,
                gold_data_path: image.gold_data_path.clone(),
            });
        }
    }
    Ok(BenchmarkManifest { version: MANIFEST_VERSION, sampling_seed: seed, entries })
}

/// Moves unannotated slots from charts that have no unannotated image to
/// charts that do, keeping the total.
fn rebalance(ids: &[&str], want_plain: &mut [bool], has: impl Fn(&str, bool) -> bool) {
    for k in 0..ids.len() {
        if want_plain[k] && !has(ids[k], true) {
            let swap = (0..ids.len()).find(|&j| !want_plain[j] && has(ids[j], true) && has(ids[k], false));
            if let Some(j) = swap {
                want_plain.swap(k, j);
            }
        }
    }
}

/// One human review of a benchmark entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub entry_id: String,
    pub validity: bool,
    pub extractability: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extracted_values: Option<Vec<f64>>,
    pub annotator_id: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

impl Verdict {
    pub fn check(&self) -> Result<()> {
        if self.extracted_values.is_some() && !self.extractability {
            return Err(Error::InvalidArgument(
                "extracted_values given but extractability is false".into(),
            ));
        }
        if self.annotator_id.trim().is_empty() {
            return Err(Error::InvalidArgument("annotator_id is empty".into()));
        }
        if self.extracted_values.as_ref().is_some_and(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidArgument("extracted values must be finite".into()));
        }
        Ok(())
    }

    /// Same judgement, ignoring who made it and when.
    pub fn same_judgement(&self, other: &Verdict) -> bool {
        self.entry_id == other.entry_id
            && self.validity == other.validity
            && self.extractability == other.extractability
            && self.extracted_values == other.extracted_values
    }
}

/// Whether a verdict keeps its entry, given the chart's gold numbers.
pub fn keeps(v: &Verdict, gold: &[f64], rho: f64) -> bool {
    v.validity && v.extractability && v.extracted_values.as_ref().is_none_or(|x| rnss(x, gold) >= rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictOutcome {
    /// The emitted test split: reviewed and kept entries only.
    pub manifest: BenchmarkManifest,
    pub removed: Vec<String>,
    pub pending: Vec<String>,
    /// Verdicts that could not be applied.
    pub audit: Vec<String>,
}

/// Applies the first verdict for each entry. `gold` yields the raw-data
/// numbers of an entry's chart.
pub fn apply_verdicts(
    manifest: &BenchmarkManifest,
    verdicts: &[Verdict],
    gold: impl Fn(&ManifestEntry) -> Option<Vec<f64>>,
    rho: f64,
) -> VerdictOutcome {
    let ids: BTreeSet<&str> = manifest.entries.iter().map(|e| e.entry_id.as_str()).collect();
    let mut first: BTreeMap<&str, &Verdict> = BTreeMap::new();
    let mut audit = Vec::new();
    for v in verdicts {
        if !ids.contains(v.entry_id.as_str()) {
            audit.push(format!("verdict for unknown entry {}", v.entry_id));
        } else if let Err(e) = v.check() {
            audit.push(format!("invalid verdict for {}: {e}", v.entry_id));
        } else if let Some(prev) = first.get(v.entry_id.as_str()) {
            if !prev.same_judgement(v) {
                audit.push(format!("conflicting verdict for {} ignored", v.entry_id));
            }
        } else {
            first.insert(&v.entry_id, v);
        }
    }
    let mut kept = Vec::new();
    let (mut removed, mut pending) = (Vec::new(), Vec::new());
    for e in &manifest.entries {
        match first.get(e.entry_id.as_str()) {
            None => pending.push(e.entry_id.clone()),
            Some(v) => {
                let ok = match (&v.extracted_values, gold(e)) {
                    (Some(_), None) => {
                        audit.push(format!("no gold data for {}", e.entry_id));
                        false
                    }
                    (_, g) => keeps(v, &g.unwrap_or_default(), rho),
                };
                if ok {
                    kept.push(e.clone());
                } else {
                    removed.push(e.entry_id.clone());
                }
            }
        }
    }
    VerdictOutcome {
        manifest: BenchmarkManifest { version: manifest.version + 1, sampling_seed: manifest.sampling_seed, entries: kept },
        removed,
        pending,
        audit,
    }
}

#[cfg(test)]
mod tests;
