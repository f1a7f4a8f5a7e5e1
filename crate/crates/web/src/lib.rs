//! Three operations for the static demo page in `www/`:
//! draw a chart from (type, data seed, style seed), list the questions
//! generated for it, and check a typed answer with relaxed accuracy.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use chartsynth::datagen::procedural_data;
use chartsynth::metrics::relaxed_accuracy;
use chartsynth::model::{ChartData, ChartType, TopicSet};
use chartsynth::qa::{QaBatch, QaKind};
use chartsynth::render::{render, RenderReport};
use chartsynth::stylegen::generate_styles;

/// Chart type ids, in the order the page lists them.
#[wasm_bindgen]
pub fn chart_types() -> Vec<String> {
    ChartType::ALL.iter().map(|t| t.id().to_string()).collect()
}

pub fn make_data(chart_type: &str, seed: u32) -> Result<ChartData, String> {
    let t: ChartType = chart_type.parse().map_err(|e: chartsynth::Error| e.to_string())?;
    let topics = TopicSet::builtin();
    let topic = &topics.as_slice()[seed as usize % topics.len()];
    Ok(procedural_data(t, topic, seed as u64))
}

pub fn draw(data: &ChartData, style_seed: u32, annotate: bool) -> Result<Vec<u8>, String> {
    let mut style = generate_styles(data.chart_type, 1, style_seed as u64).map_err(|e| e.to_string())?.remove(0);
    style.annotate_values = annotate;
    let chart = render(data, &style);
    match (chart.report, chart.image) {
        (RenderReport::RenderError(m), _) => Err(m),
        (_, Some(png)) => Ok(png),
        (_, None) => Err("renderer produced no image".into()),
    }
}

#[derive(Serialize)]
pub struct Question {
    pub kind: &'static str,
    pub question: String,
    pub answer: String,
}

/// Literal, inferential and reasoning questions of a chart.
pub fn questions(data: &ChartData, seed: u32) -> Result<Vec<Question>, String> {
    let batch = QaBatch::generate(data, seed as u64).map_err(|e| e.to_string())?;
    Ok(batch
        .records
        .into_iter()
        .filter(|r| matches!(r.kind, QaKind::Literal | QaKind::Inferential | QaKind::Reasoning))
        .map(|r| Question { kind: r.kind.name(), question: r.question, answer: r.short_answer })
        .collect())
}

/// PNG bytes of the chart.
#[wasm_bindgen]
pub fn render_chart(chart_type: &str, data_seed: u32, style_seed: u32, annotate: bool) -> Result<Vec<u8>, JsError> {
    let data = make_data(chart_type, data_seed).map_err(|e| JsError::new(&e))?;
    draw(&data, style_seed, annotate).map_err(|e| JsError::new(&e))
}

/// Raw data of the chart as pretty JSON.
#[wasm_bindgen]
pub fn chart_data(chart_type: &str, data_seed: u32) -> Result<String, JsError> {
    let data = make_data(chart_type, data_seed).map_err(|e| JsError::new(&e))?;
    serde_json::to_string_pretty(&chartsynth::model::ChartRecord::from(data)).map_err(|e| JsError::new(&e.to_string()))
}

/// JSON array of `{kind, question, answer}`.
#[wasm_bindgen]
pub fn chart_questions(chart_type: &str, data_seed: u32) -> Result<String, JsError> {
    let data = make_data(chart_type, data_seed).map_err(|e| JsError::new(&e))?;
    let qs = questions(&data, data_seed).map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&qs).map_err(|e| JsError::new(&e.to_string()))
}

/// Relaxed-accuracy check of a typed answer.
#[wasm_bindgen]
pub fn check_answer(answer: &str, gold: &str) -> bool {
    relaxed_accuracy(answer, gold)
}
