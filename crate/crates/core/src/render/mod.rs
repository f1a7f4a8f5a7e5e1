//! Rendering of (data, style) pairs to PNG, and the M×N composition driver.

pub mod canvas;
mod compose;
mod scene;

use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::{Deserialize, Serialize};

pub use canvas::{decode_png, encode_png, ink_fraction, Canvas};
pub use compose::{compose, CompositionReport, DirSink, ImageSink, IndexEntry, MemorySink, RenderFailure, RenderJob};
pub use scene::SceneStats;

use crate::model::{ChartData, Payload, PayloadShape, StyleSpec};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "message", rename_all = "snake_case")]
pub enum RenderReport {
    Ok,
    RenderError(String),
    EmptyPlot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderProvenance {
    pub data_id: String,
    pub style_id: String,
    pub derived_seed: u64,
    pub annotate_values: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedChart {
    /// PNG bytes; absent for render errors.
    pub image: Option<Vec<u8>>,
    pub width: u32,
    pub height: u32,
    pub report: RenderReport,
    pub provenance: RenderProvenance,
    pub stats: SceneStats,
}

impl RenderedChart {
    pub fn id(&self) -> String {
        format!("{}__{}", self.provenance.data_id, self.provenance.style_id)
    }
}

/// Seed of the render job for one (data, style) pair.
pub fn job_seed(global_seed: u64, data_id: &str, style_id: &str) -> u64 {
    derive_seed(global_seed, &[data_id, style_id])
}

pub fn render(data: &ChartData, style: &StyleSpec) -> RenderedChart {
    render_with_seed(data, style, 0)
}

pub fn render_with_seed(data: &ChartData, style: &StyleSpec, global_seed: u64) -> RenderedChart {
    let (width, height) = style.figure_size_px;
    let provenance = RenderProvenance {
        data_id: data.data_id.clone(),
        style_id: style.style_id.clone(),
        derived_seed: job_seed(global_seed, &data.data_id, &style.style_id),
        annotate_values: style.annotate_values,
    };
    let failed = |message: String| RenderedChart {
        image: None,
        width,
        height,
        report: RenderReport::RenderError(message),
        provenance: provenance.clone(),
        stats: SceneStats::default(),
    };

    if let Err(e) = style.check() {
        return failed(e.to_string());
    }
    if style.chart_type != data.chart_type {
        return failed(format!("style is for {} but data is {}", style.chart_type, data.chart_type));
    }
    if !shape_matches(data) {
        return failed(format!("payload does not fit a {} chart", data.chart_type));
    }
    let empty = scene::is_empty_plot(data);
    if !empty {
        if let Some(message) = scene::structural_error(data) {
            return failed(message);
        }
    }
    let drawn = catch_unwind(AssertUnwindSafe(|| {
        if empty {
            scene::draw_empty(data, style)
        } else {
            scene::draw(data, style)
        }
    }));
    match drawn {
        Ok((canvas, stats)) => RenderedChart {
            image: Some(canvas.encode_png()),
            width,
            height,
            report: if empty { RenderReport::EmptyPlot } else { RenderReport::Ok },
            provenance,
            stats,
        },
        Err(_) => failed("renderer panicked".into()),
    }
}

fn shape_matches(data: &ChartData) -> bool {
    let want = data.chart_type.payload_shape();
    match &data.content.payload {
        Payload::Series(_) => want == PayloadShape::Series,
        Payload::Slices(_) => want == PayloadShape::Slices,
        Payload::Points(_) => matches!(want, PayloadShape::Points | PayloadShape::Bubbles),
        Payload::Bins(_) => want == PayloadShape::Bins,
        Payload::Samples(_) => want == PayloadShape::Samples,
        Payload::Candles(_) => want == PayloadShape::Candles,
        Payload::Cells(_) => want == PayloadShape::Cells,
    }
}

#[cfg(test)]
mod tests;
