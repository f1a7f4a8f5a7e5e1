use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{job_seed, render_with_seed, RenderProvenance, RenderReport, RenderedChart};
use crate::error::{Error, Result};
use crate::model::{ChartData, ChartType, StyleSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderJob {
    pub data_id: String,
    pub style_id: String,
    pub derived_seed: u64,
}

impl RenderJob {
    pub fn new(global_seed: u64, data_id: &str, style_id: &str) -> RenderJob {
        RenderJob {
            data_id: data_id.to_string(),
            style_id: style_id.to_string(),
            derived_seed: job_seed(global_seed, data_id, style_id),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub attempted: usize,
    pub ok: usize,
    pub render_error: usize,
    pub empty_plot: usize,
    /// False when a sink failure aborted the run.
    pub complete: bool,
    /// Render errors by image id, sorted.
    #[serde(default)]
    pub failures: Vec<RenderFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderFailure {
    pub id: String,
    pub message: String,
}

/// Receives every ok and empty_plot render. Called from worker threads.
pub trait ImageSink: Sync {
    fn accept(&self, chart: &RenderedChart) -> std::io::Result<()>;
}

/// Keeps renders in memory, in arrival order.
#[derive(Default)]
pub struct MemorySink {
    pub charts: Mutex<Vec<RenderedChart>>,
}

impl MemorySink {
    pub fn into_sorted(self) -> Vec<RenderedChart> {
        let mut v = self.charts.into_inner().expect("sink poisoned");
        v.sort_by_key(|c| c.id());
        v
    }
}

impl ImageSink for MemorySink {
    fn accept(&self, chart: &RenderedChart) -> std::io::Result<()> {
        self.charts.lock().expect("sink poisoned").push(chart.clone());
        Ok(())
    }
}

/// One line of `images/index.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub path: String,
    pub chart_type: ChartType,
    pub report: RenderReport,
    pub width: u32,
    pub height: u32,
    pub provenance: RenderProvenance,
}

/// Writes `images/<chart_type>/<data_id>__<style_id>.png` under a root and
/// appends one index line per image.
pub struct DirSink {
    root: PathBuf,
    index: Mutex<fs::File>,
}

impl DirSink {
    pub fn create(root: &Path) -> Result<DirSink> {
        let images = root.join("images");
        fs::create_dir_all(&images)?;
        let index = fs::OpenOptions::new().create(true).append(true).open(images.join("index.jsonl"))?;
        Ok(DirSink { root: root.to_path_buf(), index: Mutex::new(index) })
    }

    pub fn relative_path(chart_type: ChartType, chart: &RenderedChart) -> String {
        format!("images/{}/{}.png", chart_type.id(), chart.id())
    }
}

impl ImageSink for DirSink {
    fn accept(&self, chart: &RenderedChart) -> std::io::Result<()> {
        let chart_type = chart_type_of(&chart.provenance.data_id)
            .ok_or_else(|| std::io::Error::other(format!("no chart type in id {}", chart.provenance.data_id)))?;
        let rel = DirSink::relative_path(chart_type, chart);
        let path = self.root.join(&rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let image = chart.image.as_deref().unwrap_or_default();
        let tmp = path.with_extension("png.tmp");
        fs::write(&tmp, image)?;
        fs::rename(&tmp, &path)?;
        let entry = IndexEntry {
            path: rel,
            chart_type,
            report: chart.report.clone(),
            width: chart.width,
            height: chart.height,
            provenance: chart.provenance.clone(),
        };
        let mut line = serde_json::to_string(&entry).map_err(std::io::Error::other)?;
        line.push('\n');
        self.index.lock().expect("index poisoned").write_all(line.as_bytes())
    }
}

/// Data ids start with the chart type id.
fn chart_type_of(data_id: &str) -> Option<ChartType> {
    ChartType::ALL
        .iter()
        .copied()
        .filter(|t| data_id.starts_with(t.id()) && data_id[t.id().len()..].starts_with('-'))
        .max_by_key(|t| t.id().len())
}

/// Renders every (data, style) pair once and hands ok and empty renders to
/// the sink. `workers` bounds the thread pool; 0 means one per core.
pub fn compose(
    datas: &[ChartData],
    styles: &[StyleSpec],
    sink: &dyn ImageSink,
    global_seed: u64,
    workers: usize,
) -> Result<CompositionReport> {
    if let Some(t) = datas.first().map(|d| d.chart_type).or(styles.first().map(|s| s.chart_type)) {
        let mixed = datas.iter().map(|d| d.chart_type).chain(styles.iter().map(|s| s.chart_type)).any(|c| c != t);
        if mixed {
            return Err(Error::InvalidArgument("compose needs one chart type across datas and styles".into()));
        }
    }
    let jobs: Vec<(usize, usize)> =
        (0..datas.len()).flat_map(|d| (0..styles.len()).map(move |s| (d, s))).collect();
    let aborted = AtomicBool::new(false);
    let run = |&(d, s): &(usize, usize)| -> Option<(String, RenderReport)> {
        if aborted.load(Ordering::Relaxed) {
            return None;
        }
        let chart = render_with_seed(&datas[d], &styles[s], global_seed);
        if chart.image.is_some() && sink.accept(&chart).is_err() {
            aborted.store(true, Ordering::Relaxed);
            return None;
        }
        Some((chart.id(), chart.report))
    };
    let reports = crate::par::map(&jobs, workers, run);

    let mut report = CompositionReport { attempted: jobs.len(), complete: true, ..Default::default() };
    for r in reports {
        match r {
            Some((_, RenderReport::Ok)) => report.ok += 1,
            Some((id, RenderReport::RenderError(message))) => {
                report.render_error += 1;
                report.failures.push(RenderFailure { id, message });
            }
            Some((_, RenderReport::EmptyPlot)) => report.empty_plot += 1,
            None => report.complete = false,
        }
    }
    report.failures.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(report)
}
