//! End-to-end pipeline over an output directory:
//!
//! ```text
//! config.json                  effective configuration
//! data/<type>/<data_id>.json   raw chart data (wire form)
//! prompts/<type>/<data_id>.txt remote generator prompts
//! styles/<type>.jsonl          style specs
//! images/<type>/<id>.png       renders; images/index.jsonl maps path -> provenance
//! qa/<type>.jsonl              one QA batch per rendered image
//! filter/                      stage reports, rejects.jsonl, kept.jsonl
//! benchmark/manifest.jsonl     sampled benchmark with checksum footer
//! reports/<stage>.json         stage report; <stage>.incomplete while running
//! ```
//!
//! A stage is skipped when its report exists and carries the current config
//! digest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bench::{sample_benchmark, write_manifest, PoolItem, DEFAULT_RHO, DEFAULT_UNANNOTATED_FRACTION};
use crate::datagen::{generate_for_type, BatchError, GeneratorConfig, RemoteConfig};
use crate::error::{Error, Result};
use crate::filter::{filter_qa, filter_rendered, filter_schema, FilterReport, DEFAULT_TAU};
use crate::model::{ChartData, ChartRecord, ChartType, DataView, GeneratorKind, StyleSpec, TopicSet};
use crate::qa::QaBatch;
use crate::render::{compose, CompositionReport, DirSink, IndexEntry, RenderProvenance, RenderReport, RenderedChart};
use crate::rng::{derive_seed, hex_digest};
use crate::stylegen::{generate_styles_with, DEFAULT_ANNOTATED_FRACTION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Empty means all types.
    pub chart_types: Vec<ChartType>,
    /// Charts per type.
    pub m: usize,
    /// Styles per type.
    pub n: usize,
    pub seed: u64,
    pub topics_file: Option<PathBuf>,
    pub output: PathBuf,
    pub generator: GeneratorKind,
    pub remote: Option<RemoteConfig>,
    pub annotated_fraction: f64,
    pub tau: f64,
    pub per_type: usize,
    pub unannotated_fraction: f64,
    pub rho: f64,
    /// Worker threads; 0 means one per core. Not part of the digest.
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            chart_types: Vec::new(),
            m: 1000,
            n: 400,
            seed: 0,
            topics_file: None,
            output: PathBuf::from("out"),
            generator: GeneratorKind::Procedural,
            remote: None,
            annotated_fraction: DEFAULT_ANNOTATED_FRACTION,
            tau: DEFAULT_TAU,
            per_type: crate::bench::DEFAULT_PER_TYPE,
            unannotated_fraction: DEFAULT_UNANNOTATED_FRACTION,
            rho: DEFAULT_RHO,
            workers: 0,
        }
    }
}

impl PipelineConfig {
    pub fn check(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidArgument("m and n must be at least 1".into()));
        }
        for (name, v) in [
            ("annotated_fraction", self.annotated_fraction),
            ("unannotated_fraction", self.unannotated_fraction),
            ("tau", self.tau),
            ("rho", self.rho),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if let Some(t) = &self.topics_file {
            if !t.exists() {
                return Err(Error::NotFound(format!("topics file {}", t.display())));
            }
        }
        self.generator_config().check()
    }

    pub fn types(&self) -> Vec<ChartType> {
        if self.chart_types.is_empty() {
            ChartType::ALL.to_vec()
        } else {
            self.chart_types.clone()
        }
    }

    fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig { kind: self.generator, seed: self.seed, remote: self.remote.clone(), batch_size: self.m }
    }

    /// Digest of everything that affects outputs.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.workers = 0;
        c.output = PathBuf::new();
        c.chart_types = self.types();
        hex_digest(serde_json::to_string(&c).expect("config serializes").as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    GenData,
    GenStyles,
    Compose,
    GenQa,
    Filter,
    Package,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::GenData, Stage::GenStyles, Stage::Compose, Stage::GenQa, Stage::Filter, Stage::Package];

    pub fn name(self) -> &'static str {
        match self {
            Stage::GenData => "gen-data",
            Stage::GenStyles => "gen-styles",
            Stage::Compose => "compose",
            Stage::GenQa => "gen-qa",
            Stage::Filter => "filter",
            Stage::Package => "package",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub config_digest: String,
    pub skipped: bool,
    pub details: Value,
}

pub struct Pipeline {
    pub config: PipelineConfig,
    root: PathBuf,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_vec_pretty(value)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    let mut out = std::io::BufWriter::new(fs::File::create(&tmp)?);
    for item in items {
        serde_json::to_writer(&mut out, &item)?;
        out.write_all(b"\n")?;
    }
    out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn reset_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        fs::remove_dir_all(dir)?;
    }
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Gold data path of a chart, relative to the output root.
pub fn data_path(chart_type: ChartType, data_id: &str) -> String {
    format!("data/{}/{data_id}.json", chart_type.id())
}

/// Loads a chart from a path relative to the output root.
pub fn load_data(root: &Path, rel: &str) -> Result<ChartData> {
    let text = fs::read_to_string(root.join(rel))?;
    Ok(serde_json::from_str(&text)?)
}

/// Gold table of a chart, as scored by table metrics.
pub fn gold_table(root: &Path, rel: &str) -> Result<Vec<(String, String, f64)>> {
    let data = load_data(root, rel)?;
    Ok(DataView::of(&data).table())
}

/// Raw-data numbers of a manifest entry's chart, for the extractability check.
pub fn gold_values(root: &Path) -> impl Fn(&crate::bench::ManifestEntry) -> Option<Vec<f64>> + Send + Sync + 'static {
    let root = root.to_path_buf();
    move |e| load_data(&root, &e.gold_data_path).ok().map(|d| d.content.payload.numbers())
}

/// Index entry of one kept image.
pub type KeptImage = IndexEntry;

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Pipeline> {
        config.check()?;
        let root = config.output.clone();
        Ok(Pipeline { config, root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn report_path(&self, stage: Stage) -> PathBuf {
        self.root.join("reports").join(format!("{}.json", stage.name()))
    }

    fn marker_path(&self, stage: Stage) -> PathBuf {
        self.root.join("reports").join(format!("{}.incomplete", stage.name()))
    }

    /// Runs one stage unless its outputs are current. `force` reruns anyway.
    pub fn run_stage(&self, stage: Stage, force: bool) -> Result<StageReport> {
        let digest = self.config.digest();
        let report_path = self.report_path(stage);
        if !force && report_path.exists() && !self.marker_path(stage).exists() {
            let previous: StageReport = serde_json::from_str(&fs::read_to_string(&report_path)?)?;
            if previous.config_digest == digest {
                return Ok(StageReport { skipped: true, ..previous });
            }
        }
        fs::create_dir_all(self.root.join("reports"))?;
        write_json(&self.root.join("config.json"), &self.config)?;
        fs::write(self.marker_path(stage), digest.as_bytes())?;
        let details = match stage {
            Stage::GenData => self.gen_data()?,
            Stage::GenStyles => self.gen_styles()?,
            Stage::Compose => self.compose()?,
            Stage::GenQa => self.gen_qa()?,
            Stage::Filter => self.filter()?,
            Stage::Package => self.package()?,
        };
        let report = StageReport { stage: stage.name().into(), config_digest: digest, skipped: false, details };
        write_json(&report_path, &report)?;
        fs::remove_file(self.marker_path(stage))?;
        Ok(report)
    }

    /// Every stage in dependency order. A stage that reran forces the ones
    /// after it.
    pub fn run_all(&self) -> Result<Vec<StageReport>> {
        let mut reports = Vec::new();
        let mut force = false;
        for stage in Stage::ALL {
            let r = self.run_stage(stage, force)?;
            force |= !r.skipped;
            reports.push(r);
        }
        Ok(reports)
    }

    fn topics(&self) -> Result<TopicSet> {
        match &self.config.topics_file {
            Some(p) => TopicSet::load(p),
            None => Ok(TopicSet::builtin()),
        }
    }

    fn gen_data(&self) -> Result<Value> {
        let topics = self.topics()?;
        let cfg = self.config.generator_config();
        let mut per_type = BTreeMap::new();
        for t in self.config.types() {
            let dir = self.root.join("data").join(t.id());
            reset_dir(&dir)?;
            let (batch, failure) = match generate_for_type(t, &cfg, &topics) {
                Ok(b) => (b, None),
                Err(BatchError::Transport { message, partial }) => (*partial, Some(message)),
                Err(BatchError::Invalid(e)) => return Err(e),
            };
            for d in &batch.data {
                let record = ChartRecord::from(d.clone());
                fs::write(self.root.join(data_path(t, &d.data_id)), serde_json::to_vec(&record)?)?;
            }
            write_json(&dir.join("rejections.json"), &batch.rejections)?;
            let prompt_dir = self.root.join("prompts").join(t.id());
            reset_dir(&prompt_dir)?;
            for (id, prompt) in &batch.prompts {
                fs::write(prompt_dir.join(format!("{id}.txt")), prompt)?;
            }
            if let Some(message) = failure {
                return Err(Error::InvalidArgument(format!(
                    "generator unreachable for {t}: {message} ({} items kept)",
                    batch.data.len()
                )));
            }
            per_type.insert(t.id(), json!({"kept": batch.data.len(), "rejected": batch.rejections.rejected}));
        }
        Ok(json!({ "per_type": per_type }))
    }

    /// Raw records of one type, sorted by data id.
    pub fn records(&self, t: ChartType) -> Result<Vec<ChartRecord>> {
        let dir = self.root.join("data").join(t.id());
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        paths.retain(|p| p.extension().is_some_and(|x| x == "json") && !p.ends_with("rejections.json"));
        paths.sort();
        paths
            .iter()
            .map(|p| Ok(serde_json::from_str(&fs::read_to_string(p)?)?))
            .collect()
    }

    fn gen_styles(&self) -> Result<Value> {
        let mut per_type = BTreeMap::new();
        for t in self.config.types() {
            let seed = derive_seed(self.config.seed, &["styles"]);
            let styles = generate_styles_with(t, self.config.n, seed, self.config.annotated_fraction)?;
            let annotated = styles.iter().filter(|s| s.annotate_values).count();
            write_lines(&self.root.join("styles").join(format!("{}.jsonl", t.id())), &styles)?;
            per_type.insert(t.id(), json!({"styles": styles.len(), "annotated": annotated}));
        }
        Ok(json!({ "per_type": per_type }))
    }

    pub fn styles(&self, t: ChartType) -> Result<Vec<StyleSpec>> {
        read_lines(&self.root.join("styles").join(format!("{}.jsonl", t.id())))
    }

    fn compose(&self) -> Result<Value> {
        let images = self.root.join("images");
        reset_dir(&images)?;
        let sink = DirSink::create(&self.root)?;
        let mut total = CompositionReport { complete: true, ..Default::default() };
        let mut per_type = BTreeMap::new();
        for t in self.config.types() {
            // records that do not parse cannot be drawn; the schema filter reports them
            let datas: Vec<ChartData> =
                self.records(t)?.into_iter().filter_map(|r| ChartData::try_from(r).ok()).collect();
            let styles = self.styles(t)?;
            let r = compose(&datas, &styles, &sink, self.config.seed, self.config.workers)?;
            total.attempted += r.attempted;
            total.ok += r.ok;
            total.render_error += r.render_error;
            total.empty_plot += r.empty_plot;
            total.complete &= r.complete;
            total.failures.extend(r.failures.iter().cloned());
            per_type.insert(t.id(), r);
        }
        drop(sink);
        // the sink appends in completion order
        let index = images.join("index.jsonl");
        let mut entries: Vec<IndexEntry> = read_lines(&index)?;
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        write_lines(&index, &entries)?;
        write_lines(&images.join("errors.jsonl"), &total.failures)?;
        if !total.complete {
            return Err(Error::InvalidArgument("image sink failed; composition incomplete".into()));
        }
        Ok(json!({ "total": total, "indexed": entries.len(), "per_type": per_type }))
    }

    pub fn index(&self) -> Result<Vec<IndexEntry>> {
        read_lines(&self.root.join("images").join("index.jsonl"))
    }

    fn gen_qa(&self) -> Result<Value> {
        let entries = self.index()?;
        let qa_dir = self.root.join("qa");
        reset_dir(&qa_dir)?;
        let mut datas: BTreeMap<String, ChartData> = BTreeMap::new();
        for e in &entries {
            let id = &e.provenance.data_id;
            if !datas.contains_key(id) {
                datas.insert(id.clone(), load_data(&self.root, &data_path(e.chart_type, id))?);
            }
        }
        let drawable: Vec<&IndexEntry> = entries.iter().filter(|e| e.report == RenderReport::Ok).collect();
        let seed = self.config.seed;
        let results = crate::par::map(&drawable, self.config.workers, |e| {
            let p = &e.provenance;
            let qa_seed = derive_seed(seed, &[&p.data_id, &p.style_id, "qa"]);
            QaBatch::for_image(&datas[&p.data_id], &p.style_id, qa_seed)
        });
        let mut by_type: BTreeMap<ChartType, Vec<QaBatch>> = BTreeMap::new();
        let mut shortfalls = Vec::new();
        for (e, r) in drawable.iter().zip(results) {
            match r {
                Ok(b) => by_type.entry(e.chart_type).or_default().push(b),
                Err(err) => shortfalls.push(json!({"id": format!("{}__{}", e.provenance.data_id, e.provenance.style_id), "reason": err.to_string()})),
            }
        }
        let mut per_type = BTreeMap::new();
        let mut records = 0;
        for t in self.config.types() {
            let batches = by_type.remove(&t).unwrap_or_default();
            records += batches.iter().map(|b| b.records.len()).sum::<usize>();
            per_type.insert(t.id(), batches.len());
            write_lines(&qa_dir.join(format!("{}.jsonl", t.id())), &batches)?;
        }
        Ok(json!({ "batches": per_type.values().sum::<usize>(), "records": records, "per_type": per_type, "shortfalls": shortfalls }))
    }

    pub fn qa_batches(&self, t: ChartType) -> Result<Vec<QaBatch>> {
        read_lines(&self.root.join("qa").join(format!("{}.jsonl", t.id())))
    }

    fn filter(&self) -> Result<Value> {
        let mut records = Vec::new();
        let mut batches = Vec::new();
        for t in self.config.types() {
            records.extend(self.records(t)?);
            batches.extend(self.qa_batches(t)?);
        }
        let (datas, schema) = filter_schema(records);
        let good_data: std::collections::HashSet<&str> = datas.iter().map(|d| d.data_id.as_str()).collect();

        let failures: Vec<crate::render::RenderFailure> = read_lines(&self.root.join("images").join("errors.jsonl"))?;
        let mut rendered = Vec::new();
        let mut index: BTreeMap<String, IndexEntry> = BTreeMap::new();
        for e in self.index()? {
            if !good_data.contains(e.provenance.data_id.as_str()) {
                continue;
            }
            let chart = RenderedChart {
                image: fs::read(self.root.join(&e.path)).ok(),
                width: e.width,
                height: e.height,
                report: e.report.clone(),
                provenance: e.provenance.clone(),
                stats: Default::default(),
            };
            index.insert(chart.id(), e);
            rendered.push(chart);
        }
        for f in failures {
            let (data_id, style_id) = f.id.split_once("__").unwrap_or((&f.id, ""));
            if !good_data.contains(data_id) {
                continue;
            }
            rendered.push(RenderedChart {
                image: None,
                width: 0,
                height: 0,
                report: RenderReport::RenderError(f.message.clone()),
                provenance: RenderProvenance {
                    data_id: data_id.into(),
                    style_id: style_id.into(),
                    derived_seed: 0,
                    annotate_values: false,
                },
                stats: Default::default(),
            });
        }
        rendered.sort_by_key(|c| c.id());
        let (kept_images, render_errors, no_data) = filter_rendered(rendered, self.config.tau);
        let kept_ids: std::collections::HashSet<String> = kept_images.iter().map(|c| c.id()).collect();
        batches.retain(|b| kept_ids.contains(&b.id()));
        let missing_qa: Vec<String> = {
            let with_qa: std::collections::HashSet<String> = batches.iter().map(|b| b.id()).collect();
            kept_ids.iter().filter(|id| !with_qa.contains(*id)).cloned().collect()
        };
        let (kept_batches, qa) = filter_qa(batches, &datas);
        let kept: Vec<&IndexEntry> = kept_batches.iter().map(|b| &index[&b.id()]).collect();

        let dir = self.root.join("filter");
        reset_dir(&dir)?;
        let reports = [schema, qa, render_errors, no_data];
        write_json(&dir.join("reports.json"), &reports)?;
        let mut rejects = Vec::new();
        for r in &reports {
            r.write_rejects(&mut rejects)?;
        }
        fs::write(dir.join("rejects.jsonl"), rejects)?;
        write_lines(&dir.join("kept.jsonl"), &kept)?;
        let summary: Vec<Value> = reports
            .iter()
            .map(|r: &FilterReport| json!({"stage": r.stage, "inspected": r.inspected, "rejected": r.rejected}))
            .collect();
        Ok(json!({ "stages": summary, "kept": kept.len(), "kept_without_qa": missing_qa.len() }))
    }

    pub fn kept(&self) -> Result<Vec<KeptImage>> {
        read_lines(&self.root.join("filter").join("kept.jsonl"))
    }

    /// Kept images joined with their QA batches.
    pub fn pool(&self) -> Result<Vec<PoolItem>> {
        let kept = self.kept()?;
        let mut batches: BTreeMap<String, QaBatch> = BTreeMap::new();
        for t in self.config.types() {
            for b in self.qa_batches(t)? {
                batches.insert(b.id(), b);
            }
        }
        kept.into_iter()
            .map(|e| {
                let id = format!("{}__{}", e.provenance.data_id, e.provenance.style_id);
                let batch = batches.remove(&id).ok_or_else(|| Error::NotFound(format!("QA batch for {id}")))?;
                Ok(PoolItem {
                    chart_type: e.chart_type,
                    data_id: e.provenance.data_id.clone(),
                    style_id: e.provenance.style_id.clone(),
                    image_path: e.path.clone(),
                    annotate_values: e.provenance.annotate_values,
                    gold_data_path: data_path(e.chart_type, &e.provenance.data_id),
                    records: batch.records,
                })
            })
            .collect()
    }

    fn package(&self) -> Result<Value> {
        let pool = self.pool()?;
        let seed = derive_seed(self.config.seed, &["benchmark"]);
        let manifest = sample_benchmark(&pool, self.config.per_type, seed, self.config.unannotated_fraction)?;
        let dir = self.root.join("benchmark");
        fs::create_dir_all(&dir)?;
        let checksum = write_manifest(&dir.join("manifest.jsonl"), &manifest)?;
        let unannotated = manifest.entries.iter().filter(|e| !e.annotate_values).count();
        let levels: BTreeMap<&str, BTreeMap<&str, usize>> = manifest
            .level_counts()
            .into_iter()
            .map(|(t, c)| (t.id(), c.into_iter().map(|(k, n)| (k.name(), n)).collect()))
            .collect();
        Ok(json!({
            "entries": manifest.entries.len(),
            "unannotated": unannotated,
            "checksum": checksum,
            "levels": levels,
        }))
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("benchmark").join("manifest.jsonl")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path) -> PipelineConfig {
        PipelineConfig {
            chart_types: vec![ChartType::Line, ChartType::Pie],
            m: 4,
            n: 3,
            seed: 11,
            output: dir.to_path_buf(),
            per_type: 3,
            workers: 2,
            ..Default::default()
        }
    }

    #[test]
    fn small_run_reconciles_and_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::new(config(dir.path())).unwrap();
        let reports = p.run_all().unwrap();
        assert!(reports.iter().all(|r| !r.skipped));
        assert_eq!(reports[2].details["total"]["attempted"], 24);
        let kept = reports[4].details["kept"].as_u64().unwrap();
        assert_eq!(kept, reports[2].details["indexed"].as_u64().unwrap());
        assert_eq!(kept, reports[3].details["batches"].as_u64().unwrap());
        assert_eq!(reports[5].details["entries"], 6);

        let again = p.run_all().unwrap();
        assert!(again.iter().all(|r| r.skipped));
        assert_eq!(again[5].details["checksum"], reports[5].details["checksum"]);

        let mut changed = config(dir.path());
        changed.per_type = 4;
        let r = Pipeline::new(changed).unwrap().run_stage(Stage::Package, false).unwrap();
        assert!(!r.skipped);
        assert_eq!(r.details["entries"], 8);
    }
}
