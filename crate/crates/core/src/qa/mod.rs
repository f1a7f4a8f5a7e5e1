//! Question–answer synthesis from raw chart data.
//!
//! Every answer is computed from the data, never written by hand: each
//! record carries a [`Derivation`] naming the operator and the exact values
//! it was applied to, so the short answer can be replayed and audited.

mod augment;
mod derive;
mod levels;
mod phrasing;
mod text;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use augment::{embedded_data, extraction_gold, gen_data_driven, gen_json_only};
pub use derive::{evaluate, replay, ReplayError};
pub use levels::{gen_inferential, gen_literal, gen_reasoning, negation, Generated, MAX_RESAMPLES};
pub use text::{gen_description, gen_summary};

use crate::error::{Error, Result};
use crate::model::{ChartData, ValueRef};
use crate::numfmt::is_numeral;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QaKind {
    Description,
    Summary,
    Literal,
    Inferential,
    Reasoning,
    JsonOnly,
    DataDriven,
}

impl QaKind {
    pub const ALL: [QaKind; 7] = [
        QaKind::Description,
        QaKind::Summary,
        QaKind::Literal,
        QaKind::Inferential,
        QaKind::Reasoning,
        QaKind::JsonOnly,
        QaKind::DataDriven,
    ];

    /// Records of this kind in one complete batch.
    pub fn batch_count(self) -> usize {
        match self {
            QaKind::Literal | QaKind::Inferential | QaKind::Reasoning => LEVEL_COUNT,
            _ => 1,
        }
    }

    /// Literal, inferential and reasoning questions: the graded levels.
    pub fn is_level(self) -> bool {
        matches!(self, QaKind::Literal | QaKind::Inferential | QaKind::Reasoning)
    }

    pub fn name(self) -> &'static str {
        match self {
            QaKind::Description => "description",
            QaKind::Summary => "summary",
            QaKind::Literal => "literal",
            QaKind::Inferential => "inferential",
            QaKind::Reasoning => "reasoning",
            QaKind::JsonOnly => "json_only",
            QaKind::DataDriven => "data_driven",
        }
    }
}

/// Questions per level in a batch.
pub const LEVEL_COUNT: usize = 5;
/// Records in one complete batch: 17 general plus 2 augmented.
pub const BATCH_SIZE: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    Describe,
    Summarize,
    Lookup,
    AxisLabel,
    Max,
    Min,
    ArgMax,
    ArgMin,
    TrendIncreasing,
    Rank,
    Greater,
    Sum,
    Difference,
    Mean,
    Ratio,
    PercentChange,
    CountAbove,
    Range,
}

impl Operator {
    /// Operators whose answer is a label from the data rather than a number
    /// or Yes/No.
    pub fn yields_label(self) -> bool {
        matches!(self, Operator::AxisLabel | Operator::ArgMax | Operator::ArgMin)
    }

    pub fn yields_bool(self) -> bool {
        matches!(self, Operator::TrendIncreasing | Operator::Greater)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSide {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "value")]
pub enum DerivedValue {
    Number(f64),
    Bool(bool),
    Text(String),
}

impl DerivedValue {
    /// Short-answer form.
    pub fn render(&self) -> String {
        match self {
            DerivedValue::Number(v) => crate::numfmt::format_number(*v),
            DerivedValue::Bool(true) => "Yes".into(),
            DerivedValue::Bool(false) => "No".into(),
            DerivedValue::Text(t) => t.clone(),
        }
    }
}

/// Which cells an aggregate question ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "group")]
pub enum Scope {
    /// Exactly the listed operands.
    Operands,
    /// Every cell of one view group.
    Group(usize),
    /// Every primary cell of the chart.
    All,
}

/// Machine-checkable trace of how an answer follows from the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    pub operator: Operator,
    pub operands: Vec<ValueRef>,
    pub scope: Scope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<AxisSide>,
    /// Boolean results are inverted (used for negated Yes/No questions).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negated: bool,
    pub result: DerivedValue,
}

/// One exchange of a multi-turn record: the prompt and its gold answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub prompt: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaRecord {
    pub qa_id: String,
    pub kind: QaKind,
    pub question: String,
    pub long_answer: String,
    pub short_answer: String,
    pub derivation: Derivation,
    pub targets: Vec<ValueRef>,
    /// Multi-turn form, present for data-driven records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turns: Option<Vec<Turn>>,
    /// Record an augmented record was built from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_qa_id: Option<String>,
}

impl QaRecord {
    /// Unrounded numeric answer, if the answer is a number.
    pub fn exact_value(&self) -> Option<f64> {
        match self.derivation.result {
            DerivedValue::Number(v) => Some(v),
            _ => None,
        }
    }

    /// Checks the record-level invariants (answer shape, long answer
    /// containing the short one). Replaying against data is [`replay`].
    pub fn check_shape(&self) -> std::result::Result<(), String> {
        if self.question.trim().is_empty() {
            return Err("empty question".into());
        }
        if self.short_answer.is_empty() {
            return Err("empty short answer".into());
        }
        if !self.long_answer.contains(&self.short_answer) {
            return Err("long answer does not contain the short answer".into());
        }
        let graded = self.kind.is_level()
            || matches!(self.kind, QaKind::JsonOnly | QaKind::DataDriven);
        if graded {
            let op = self.derivation.operator;
            let ok = if op.yields_label() {
                !self.short_answer.trim().is_empty()
            } else if op.yields_bool() {
                self.short_answer == "Yes" || self.short_answer == "No"
            } else {
                is_numeral(&self.short_answer)
            };
            if !ok {
                return Err(format!(
                    "short answer `{}` has the wrong form for {op:?}",
                    self.short_answer
                ));
            }
        }
        if self.kind == QaKind::DataDriven && self.turns.as_ref().is_none_or(|t| t.len() != 2) {
            return Err("data-driven record needs two turns".into());
        }
        Ok(())
    }
}

pub fn kind_histogram(records: &[QaRecord]) -> BTreeMap<QaKind, usize> {
    let mut h = BTreeMap::new();
    for r in records {
        *h.entry(r.kind).or_insert(0) += 1;
    }
    h
}

/// The histogram of one complete batch.
pub fn expected_histogram() -> BTreeMap<QaKind, usize> {
    QaKind::ALL.iter().map(|k| (*k, k.batch_count())).collect()
}

pub(crate) fn qa_id(data: &ChartData, seed: u64, slot: usize) -> String {
    format!("{}-{:08x}-{slot:02}", data.data_id, seed as u32)
}

/// The full batch for one chart: description, summary, five literal, five
/// inferential and five reasoning questions, then one JSON-only and one
/// data-driven record built on a level question.
pub fn gen_all(data: &ChartData, seed: u64) -> Result<Vec<QaRecord>> {
    let literal = gen_literal(data, LEVEL_COUNT, derive_seed(seed, &["literal"]));
    let inferential = gen_inferential(data, LEVEL_COUNT, derive_seed(seed, &["inferential"]));
    let reasoning = gen_reasoning(data, LEVEL_COUNT, derive_seed(seed, &["reasoning"]));
    let short: Vec<QaKind> = [&literal, &inferential, &reasoning]
        .iter()
        .filter(|g| g.short)
        .map(|g| g.kind)
        .collect();
    if !short.is_empty() {
        return Err(Error::QaShortfall(short));
    }

    let mut records = vec![gen_description(data), gen_summary(data)];
    records.extend(literal.records);
    records.extend(inferential.records);
    records.extend(reasoning.records);
    for (slot, r) in records.iter_mut().enumerate() {
        r.qa_id = qa_id(data, seed, slot);
    }
    let levels = 3 * LEVEL_COUNT;
    let pick = derive_seed(seed, &["augment"]);
    let json_slot = 2 + (pick % levels as u64) as usize;
    let driven_slot = 2 + ((pick >> 32) % levels as u64) as usize;
    let json_only = gen_json_only(data, &records[json_slot]);
    let driven = gen_data_driven(data, &records[driven_slot]);
    records.push(json_only);
    records.push(driven);
    let n = records.len();
    records[n - 2].qa_id = qa_id(data, seed, n - 2);
    records[n - 1].qa_id = qa_id(data, seed, n - 1);
    Ok(records)
}

/// All QA records generated for one chart image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaBatch {
    pub data_id: String,
    /// Style of the image the batch belongs to; empty for data-level batches.
    #[serde(default)]
    pub style_id: String,
    pub qa_seed: u64,
    pub records: Vec<QaRecord>,
}

impl QaBatch {
    pub fn generate(data: &ChartData, seed: u64) -> Result<QaBatch> {
        Self::for_image(data, "", seed)
    }

    pub fn for_image(data: &ChartData, style_id: &str, seed: u64) -> Result<QaBatch> {
        Ok(QaBatch {
            data_id: data.data_id.clone(),
            style_id: style_id.to_string(),
            qa_seed: seed,
            records: gen_all(data, seed)?,
        })
    }

    /// Image id `<data_id>__<style_id>`, or the data id alone.
    pub fn id(&self) -> String {
        if self.style_id.is_empty() {
            self.data_id.clone()
        } else {
            format!("{}__{}", self.data_id, self.style_id)
        }
    }
}

#[cfg(test)]
mod tests;
