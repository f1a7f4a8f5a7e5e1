//! Description and summary records.

use super::{Derivation, DerivedValue, Operator, QaKind, QaRecord, Scope};
use crate::model::data::Payload;
use crate::model::view::GroupKind;
use crate::model::{ChartData, DataView};
use crate::numfmt::format_number;

fn list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn article(word: &str) -> &'static str {
    match word.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

fn contents(data: &ChartData) -> String {
    match &data.content.payload {
        Payload::Series(series) => {
            let parts: Vec<String> = series
                .iter()
                .map(|s| format!("{} with {} points", s.name, s.points.len()))
                .collect();
            format!("It contains {} series: {}.", series.len(), list(&parts))
        }
        Payload::Points(series) => {
            let parts: Vec<String> = series
                .iter()
                .map(|s| format!("{} with {} points", s.name, s.points.len()))
                .collect();
            format!("It contains {} series: {}.", series.len(), list(&parts))
        }
        Payload::Slices(slices) => {
            let noun = if data.chart_type == crate::model::ChartType::Funnel { "stages" } else { "slices" };
            let labels: Vec<String> = slices.iter().map(|s| s.label.clone()).collect();
            format!("It contains {} {noun}: {}.", slices.len(), list(&labels))
        }
        Payload::Bins(bins) => {
            let lo = bins.first().map(|b| b.lower).unwrap_or_default();
            let hi = bins.last().map(|b| b.upper).unwrap_or_default();
            format!(
                "It contains {} bins covering {} to {}.",
                bins.len(),
                format_number(lo),
                format_number(hi)
            )
        }
        Payload::Samples(groups) => {
            let parts: Vec<String> = groups
                .iter()
                .map(|g| format!("{} with {} values", g.name, g.values.len()))
                .collect();
            format!("It contains {} groups: {}.", groups.len(), list(&parts))
        }
        Payload::Candles(candles) => {
            let first = candles.first().map(|c| c.time.as_str()).unwrap_or_default();
            let last = candles.last().map(|c| c.time.as_str()).unwrap_or_default();
            format!("It contains {} periods from {first} to {last}.", candles.len())
        }
        Payload::Cells(cells) => {
            let mut rows: Vec<String> = Vec::new();
            let mut cols: Vec<String> = Vec::new();
            for c in cells {
                if !rows.contains(&c.row) {
                    rows.push(c.row.clone());
                }
                if !cols.contains(&c.column) {
                    cols.push(c.column.clone());
                }
            }
            format!(
                "It contains a grid of {} rows ({}) by {} columns ({}).",
                rows.len(),
                list(&rows),
                cols.len(),
                list(&cols)
            )
        }
    }
}

pub(crate) fn description_text(data: &ChartData) -> String {
    let c = &data.content;
    let name = data.chart_type.display_name();
    format!(
        "This is {} {name} titled \"{}\". The x axis shows {} and the y axis shows {}. {}",
        article(name),
        c.title,
        c.x_axis.caption(),
        c.y_axis.caption(),
        contents(data)
    )
}

/// Indices of the first highest and first lowest primary cell.
fn extremes(view: &DataView) -> Option<(usize, usize)> {
    let primary: Vec<usize> = view
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| !matches!(view.groups[c.group].kind, GroupKind::Sizes { .. }))
        .map(|(i, _)| i)
        .collect();
    let (mut hi, mut lo) = (*primary.first()?, *primary.first()?);
    for &i in &primary {
        if view.cells[i].value > view.cells[hi].value {
            hi = i;
        }
        if view.cells[i].value < view.cells[lo].value {
            lo = i;
        }
    }
    Some((hi, lo))
}

pub(crate) fn summary_text(view: &DataView) -> String {
    let Some((hi, lo)) = extremes(view) else {
        return "The chart holds no values.".into();
    };
    let (hi, lo) = (&view.cells[hi], &view.cells[lo]);
    format!(
        "The highest value in the chart is {} ({}), and the lowest is {} ({}).",
        format_number(hi.value),
        view.describe(hi),
        format_number(lo.value),
        view.describe(lo)
    )
}

fn trend_remark(view: &DataView) -> Option<String> {
    if !view.ordered || view.groups.len() != 1 {
        return None;
    }
    let values: Vec<f64> = view.group_cells(0).map(|c| c.value).collect();
    let (first, last) = (*values.first()?, *values.last()?);
    let word = if last > first {
        "rises"
    } else if last < first {
        "falls"
    } else {
        "ends where it started"
    };
    let noun = view.group_noun(0);
    Some(if last == first {
        format!(" Overall the {noun} {word}.")
    } else {
        format!(
            " Overall the {noun} {word} from {} to {}.",
            format_number(first),
            format_number(last)
        )
    })
}

pub fn gen_description(data: &ChartData) -> QaRecord {
    let text = description_text(data);
    QaRecord {
        qa_id: String::new(),
        kind: QaKind::Description,
        question: "Describe the chart objectively: its type, title, axes and what it contains.".into(),
        long_answer: text.clone(),
        short_answer: text.clone(),
        derivation: Derivation {
            operator: Operator::Describe,
            operands: vec![],
            scope: Scope::All,
            threshold: None,
            axis: None,
            negated: false,
            result: DerivedValue::Text(text),
        },
        targets: vec![],
        turns: None,
        base_qa_id: None,
    }
}

pub fn gen_summary(data: &ChartData) -> QaRecord {
    let view = DataView::of(data);
    let short = summary_text(&view);
    let operands = extremes(&view)
        .map(|(hi, lo)| vec![view.cells[hi].at, view.cells[lo].at])
        .unwrap_or_default();
    let long = format!(
        "The {} \"{}\" plots {} against {}. {short}{}",
        data.chart_type.display_name(),
        data.content.title,
        data.content.y_axis.caption(),
        data.content.x_axis.caption(),
        trend_remark(&view).unwrap_or_default()
    );
    QaRecord {
        qa_id: String::new(),
        kind: QaKind::Summary,
        question: "Summarize the chart and highlight its key findings.".into(),
        long_answer: long,
        short_answer: short.clone(),
        derivation: Derivation {
            operator: Operator::Summarize,
            operands: operands.clone(),
            scope: Scope::All,
            threshold: None,
            axis: None,
            negated: false,
            result: DerivedValue::Text(short),
        },
        targets: operands,
        turns: None,
        base_qa_id: None,
    }
}
