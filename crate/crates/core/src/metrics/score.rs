use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{bleu4, relaxed_accuracy, rms_f1, rnss, Rms};
use crate::bench::{BenchmarkManifest, ManifestEntry, LEVELS};
use crate::error::{Error, Result};
use crate::qa::QaKind;

/// `(row label, column label, value)`.
pub type TableEntry = (String, String, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub entry_id: String,
    pub answer: String,
    /// Free-text answer scored with BLEU against the gold long answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_answer: Option<String>,
    /// Extracted data table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<TableEntry>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelScore {
    pub count: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub count: usize,
    pub answered: usize,
    pub missing: usize,
    pub relaxed_accuracy: f64,
    pub per_level: BTreeMap<QaKind, LevelScore>,
    /// Entries whose prediction carried a table.
    pub tables: usize,
    pub rnss: Option<f64>,
    pub rms: Option<Rms>,
    pub bleu4: Option<f64>,
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "entries {}  answered {}  missing {}\nrelaxed accuracy {:.4}\n",
            self.count, self.answered, self.missing, self.relaxed_accuracy
        );
        for (kind, l) in &self.per_level {
            s.push_str(&format!("  {:<12} {:>5}/{:<5} {:.4}\n", kind.name(), l.correct, l.count, l.accuracy));
        }
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        s.push_str(&format!("tables {}  rnss {}", self.tables, opt(self.rnss)));
        if let Some(r) = self.rms {
            s.push_str(&format!("  rms p {:.4} r {:.4} f1 {:.4}", r.precision, r.recall, r.f1));
        }
        s.push_str(&format!("\nbleu4 {}\n", opt(self.bleu4)));
        s
    }
}

/// Reads a predictions JSONL file; blank lines are skipped.
pub fn parse_predictions(reader: impl BufRead, path: &Path) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { path: path.to_path_buf(), line: i + 1, message };
        let p: Prediction = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        if !seen.insert(p.entry_id.clone()) {
            return Err(err(format!("duplicate entry_id {}", p.entry_id)));
        }
        out.push(p);
    }
    Ok(out)
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Scores predictions against the manifest. `gold_table` returns the raw
/// data table of an entry's chart; it is consulted only for entries whose
/// prediction carries a table.
pub fn score_run(
    predictions: &[Prediction],
    manifest: &BenchmarkManifest,
    gold_table: impl Fn(&ManifestEntry) -> Result<Vec<TableEntry>>,
) -> Result<EvalReport> {
    let mut by_id = BTreeMap::new();
    for p in predictions {
        if manifest.get(&p.entry_id).is_none() {
            return Err(Error::InvalidArgument(format!("prediction for unknown entry {}", p.entry_id)));
        }
        by_id.insert(p.entry_id.as_str(), p);
    }
    let mut per_level: BTreeMap<QaKind, LevelScore> =
        LEVELS.iter().map(|l| (*l, LevelScore::default())).collect();
    let (mut correct, mut answered) = (0, 0);
    let (mut rnss_sum, mut rms_sum, mut tables) = (0.0, [0.0; 3], 0);
    let (mut cands, mut refs) = (Vec::new(), Vec::new());
    for e in &manifest.entries {
        let level = per_level.entry(e.level()).or_default();
        level.count += 1;
        let Some(p) = by_id.get(e.entry_id.as_str()) else { continue };
        answered += 1;
        if relaxed_accuracy(&p.answer, &e.qa.short_answer) {
            correct += 1;
            level.correct += 1;
        }
        if let Some(long) = &p.long_answer {
            cands.push(long.clone());
            refs.push(e.qa.long_answer.clone());
        }
        if let Some(table) = &p.table {
            let gold = gold_table(e)?;
            let values = |t: &[TableEntry]| t.iter().map(|x| x.2).collect::<Vec<_>>();
            rnss_sum += rnss(&values(table), &values(&gold));
            let r = rms_f1(table, &gold);
            rms_sum[0] += r.precision;
            rms_sum[1] += r.recall;
            rms_sum[2] += r.f1;
            tables += 1;
        }
    }
    for l in per_level.values_mut() {
        l.accuracy = ratio(l.correct, l.count);
    }
    let count = manifest.entries.len();
    let mean = |s: f64| s / tables as f64;
    Ok(EvalReport {
        count,
        answered,
        missing: count - answered,
        relaxed_accuracy: ratio(correct, count),
        per_level,
        tables,
        rnss: (tables > 0).then(|| mean(rnss_sum)),
        rms: (tables > 0).then(|| Rms {
            precision: mean(rms_sum[0]),
            recall: mean(rms_sum[1]),
            f1: mean(rms_sum[2]),
        }),
        bleu4: if cands.is_empty() { None } else { Some(bleu4(&cands, &refs)?) },
    })
}
