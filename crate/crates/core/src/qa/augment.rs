//! Augmented records: JSON-only questions and data-driven two-turn records.

use super::{QaKind, QaRecord, Turn};
use crate::model::{get_template, ChartData};

const DATA_OPEN: &str = "<data>";
const DATA_CLOSE: &str = "</data>";

/// Text between the data markers of a JSON-only question.
pub fn embedded_data(question: &str) -> Option<&str> {
    let start = question.find(DATA_OPEN)? + DATA_OPEN.len();
    let end = question[start..].find(DATA_CLOSE)? + start;
    Some(question[start..end].trim())
}

/// Canonical serialization of the extractable content (title, axes, data).
pub fn extraction_gold(data: &ChartData) -> String {
    serde_json::to_string(&data.content_json()).expect("content serializes")
}

/// The base question asked over the raw data instead of the image.
pub fn gen_json_only(data: &ChartData, base: &QaRecord) -> QaRecord {
    let template = get_template(data.chart_type);
    let question = format!(
        "The chart is given as raw data instead of an image. The data follows the {} template described below.\n\n\
         README:\n{}\n\n{DATA_OPEN}\n{}\n{DATA_CLOSE}\n\nQuestion: {}",
        data.chart_type.id(),
        template.readme.trim(),
        data.canonical_json(),
        base.question
    );
    QaRecord {
        qa_id: String::new(),
        kind: QaKind::JsonOnly,
        question,
        long_answer: base.long_answer.clone(),
        short_answer: base.short_answer.clone(),
        derivation: base.derivation.clone(),
        targets: base.targets.clone(),
        turns: None,
        base_qa_id: Some(base.qa_id.clone()),
    }
}

/// Two turns: extract the raw data, then answer the base question.
pub fn gen_data_driven(data: &ChartData, base: &QaRecord) -> QaRecord {
    let extract = format!(
        "Extract the raw data of this {} as JSON with the keys title, x_axis, y_axis and {}.",
        data.chart_type.display_name(),
        data.chart_type.payload_key()
    );
    let turns = vec![
        Turn { prompt: extract, answer: extraction_gold(data) },
        Turn { prompt: base.question.clone(), answer: base.long_answer.clone() },
    ];
    QaRecord {
        qa_id: String::new(),
        kind: QaKind::DataDriven,
        question: base.question.clone(),
        long_answer: base.long_answer.clone(),
        short_answer: base.short_answer.clone(),
        derivation: base.derivation.clone(),
        targets: base.targets.clone(),
        turns: Some(turns),
        base_qa_id: Some(base.qa_id.clone()),
    }
}
