//! A flat, uniform view over the numbers of any chart payload.
//!
//! Each value is a [`ViewCell`] addressed by a [`ValueRef`] into the raw
//! document. Cells are grouped so that "within one series" style questions
//! have a well-defined scope for every chart type.

use serde::{Deserialize, Serialize};

use super::data::{ChartData, Payload};
use super::ChartType;
use crate::numfmt::format_number;

/// Which number of a record a reference points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Value,
    Y,
    Size,
    Count,
    Open,
    Close,
    High,
    Low,
    Min,
    Q1,
    Median,
    Q3,
    Max,
}

impl Field {
    pub const BOX_STATS: [Field; 5] = [Field::Min, Field::Q1, Field::Median, Field::Q3, Field::Max];
    pub const OHLC: [Field; 4] = [Field::Open, Field::Close, Field::High, Field::Low];

    pub fn noun(self) -> &'static str {
        match self {
            Field::Value => "value",
            Field::Y => "y value",
            Field::Size => "size",
            Field::Count => "count",
            Field::Open => "opening price",
            Field::Close => "closing price",
            Field::High => "highest price",
            Field::Low => "lowest price",
            Field::Min => "minimum",
            Field::Q1 => "first quartile",
            Field::Median => "median",
            Field::Q3 => "third quartile",
            Field::Max => "maximum",
        }
    }
}

/// Address of one number inside a chart document.
///
/// `series` indexes the outer list (series, groups); `index` the record within
/// it. Single-list payloads (slices, bins, candles, cells) use `series == 0`.
/// Box-plot statistics use `index == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValueRef {
    pub series: usize,
    pub index: usize,
    pub field: Field,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GroupKind {
    Series { name: String },
    Slices,
    Stages,
    Prices { field: Field },
    Stat { field: Field },
    Row { name: String },
    Bins,
    Points { name: String },
    Sizes { name: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewCell {
    pub at: ValueRef,
    pub group: usize,
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewGroup {
    pub kind: GroupKind,
    /// Indices into [`DataView::cells`].
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataView {
    pub chart_type: ChartType,
    pub cells: Vec<ViewCell>,
    pub groups: Vec<ViewGroup>,
    /// Noun for cell labels, e.g. "year" or "group".
    pub label_noun: String,
    /// Whether labels within a group follow a meaningful order (time, stages).
    pub ordered: bool,
}

/// Quartile by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

pub fn box_stats(values: &[f64]) -> [f64; 5] {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    [
        sorted[0],
        quantile(&sorted, 0.25),
        quantile(&sorted, 0.5),
        quantile(&sorted, 0.75),
        sorted[sorted.len() - 1],
    ]
}

pub fn bin_label(lower: f64, upper: f64) -> String {
    format!("{}-{}", format_number(lower), format_number(upper))
}

impl DataView {
    pub fn of(data: &ChartData) -> DataView {
        let mut view = DataView {
            chart_type: data.chart_type,
            cells: Vec::new(),
            groups: Vec::new(),
            label_noun: String::new(),
            ordered: false,
        };
        let x_noun = data.content.x_axis.label.to_lowercase();
        match &data.content.payload {
            Payload::Series(series) => {
                view.label_noun = x_noun;
                view.ordered = data.chart_type.is_ordered();
                for (s, ser) in series.iter().enumerate() {
                    let g = view.push_group(GroupKind::Series { name: ser.name.clone() });
                    for (i, p) in ser.points.iter().enumerate() {
                        view.push_cell(g, ValueRef { series: s, index: i, field: Field::Value }, &p.label, p.value);
                    }
                }
            }
            Payload::Slices(slices) => {
                let funnel = data.chart_type == ChartType::Funnel;
                view.label_noun = if funnel { "stage" } else { "category" }.into();
                let g = view.push_group(if funnel { GroupKind::Stages } else { GroupKind::Slices });
                for (i, p) in slices.iter().enumerate() {
                    view.push_cell(g, ValueRef { series: 0, index: i, field: Field::Value }, &p.label, p.value);
                }
            }
            Payload::Points(series) => {
                view.label_noun = "x value".into();
                for (s, ser) in series.iter().enumerate() {
                    let g = view.push_group(GroupKind::Points { name: ser.name.clone() });
                    for (i, p) in ser.points.iter().enumerate() {
                        view.push_cell(g, ValueRef { series: s, index: i, field: Field::Y }, &format_number(p[0]), p[1]);
                    }
                }
                if data.chart_type == ChartType::Bubble {
                    for (s, ser) in series.iter().enumerate() {
                        let g = view.push_group(GroupKind::Sizes { name: ser.name.clone() });
                        for (i, p) in ser.points.iter().enumerate() {
                            if let Some(size) = p.get(2) {
                                view.push_cell(g, ValueRef { series: s, index: i, field: Field::Size }, &format_number(p[0]), *size);
                            }
                        }
                    }
                }
            }
            Payload::Bins(bins) => {
                view.label_noun = "bin".into();
                view.ordered = true;
                let g = view.push_group(GroupKind::Bins);
                for (i, b) in bins.iter().enumerate() {
                    view.push_cell(g, ValueRef { series: 0, index: i, field: Field::Count }, &bin_label(b.lower, b.upper), b.count);
                }
            }
            Payload::Samples(groups) => {
                view.label_noun = "group".into();
                let stats: Vec<[f64; 5]> = groups
                    .iter()
                    .map(|g| if g.values.is_empty() { [f64::NAN; 5] } else { box_stats(&g.values) })
                    .collect();
                for (k, field) in Field::BOX_STATS.into_iter().enumerate() {
                    let g = view.push_group(GroupKind::Stat { field });
                    for (s, grp) in groups.iter().enumerate() {
                        if !grp.values.is_empty() {
                            view.push_cell(g, ValueRef { series: s, index: 0, field }, &grp.name, stats[s][k]);
                        }
                    }
                }
            }
            Payload::Candles(candles) => {
                view.label_noun = "period".into();
                view.ordered = true;
                for field in Field::OHLC {
                    let g = view.push_group(GroupKind::Prices { field });
                    for (i, c) in candles.iter().enumerate() {
                        let v = match field {
                            Field::Open => c.open,
                            Field::Close => c.close,
                            Field::High => c.high,
                            _ => c.low,
                        };
                        view.push_cell(g, ValueRef { series: 0, index: i, field }, &c.time, v);
                    }
                }
            }
            Payload::Cells(cells) => {
                view.label_noun = x_noun;
                let mut rows: Vec<String> = Vec::new();
                for c in cells {
                    if !rows.contains(&c.row) {
                        rows.push(c.row.clone());
                    }
                }
                for row in &rows {
                    let g = view.push_group(GroupKind::Row { name: row.clone() });
                    for (i, c) in cells.iter().enumerate().filter(|(_, c)| &c.row == row) {
                        view.push_cell(g, ValueRef { series: 0, index: i, field: Field::Value }, &c.column, c.value);
                    }
                }
            }
        }
        view.groups.retain(|g| !g.cells.is_empty());
        // Group indices shift when empty groups are dropped.
        for (gi, g) in view.groups.iter().enumerate() {
            for &c in &g.cells {
                view.cells[c].group = gi;
            }
        }
        view
    }

    fn push_group(&mut self, kind: GroupKind) -> usize {
        self.groups.push(ViewGroup { kind, cells: Vec::new() });
        self.groups.len() - 1
    }

    fn push_cell(&mut self, group: usize, at: ValueRef, label: &str, value: f64) {
        self.groups[group].cells.push(self.cells.len());
        self.cells.push(ViewCell {
            at,
            group,
            label: label.to_string(),
            value,
        });
    }

    pub fn find(&self, at: &ValueRef) -> Option<&ViewCell> {
        self.cells.iter().find(|c| &c.at == at)
    }

    pub fn group_cells(&self, group: usize) -> impl Iterator<Item = &ViewCell> {
        self.groups[group].cells.iter().map(move |&i| &self.cells[i])
    }

    /// Whether a group's labels name distinct categories, so "which label"
    /// questions have meaningful answers.
    pub fn labels_are_categorical(&self, group: usize) -> bool {
        let labels: Vec<&str> = self.group_cells(group).map(|c| c.label.as_str()).collect();
        let mut unique = labels.clone();
        unique.sort_unstable();
        unique.dedup();
        unique.len() == labels.len() && labels.len() >= 2
    }

    /// Noun phrase for the values of a group, e.g. "value of EU" or "median".
    pub fn group_noun(&self, group: usize) -> String {
        match &self.groups[group].kind {
            GroupKind::Series { name } => format!("value of {name}"),
            GroupKind::Slices => "share".into(),
            GroupKind::Stages => "stage value".into(),
            GroupKind::Prices { field } | GroupKind::Stat { field } => field.noun().into(),
            GroupKind::Row { name } => format!("value in row {name}"),
            GroupKind::Bins => "bin count".into(),
            GroupKind::Points { name } => format!("y value of {name}"),
            GroupKind::Sizes { name } => format!("bubble size of {name}"),
        }
    }

    /// Noun phrase naming one cell, e.g. "the value of EU in 2020".
    pub fn describe(&self, cell: &ViewCell) -> String {
        let label = &cell.label;
        match &self.groups[cell.group].kind {
            GroupKind::Series { name } => {
                let prep = if self.ordered { "in" } else { "for" };
                format!("the value of {name} {prep} {label}")
            }
            GroupKind::Slices => format!("the share of {label}"),
            GroupKind::Stages => format!("the value of the {label} stage"),
            GroupKind::Prices { field } => format!("the {} in {label}", field.noun()),
            GroupKind::Stat { field } => format!("the {} of {label}", field.noun()),
            GroupKind::Row { name } => format!("the value at row {name} and column {label}"),
            GroupKind::Bins => format!("the count of the {label} bin"),
            GroupKind::Points { name } => format!("the y value of the {name} point at x = {label}"),
            GroupKind::Sizes { name } => format!("the size of the {name} bubble at x = {label}"),
        }
    }

    /// Table form for chart-to-table metrics: (row, column, value).
    pub fn table(&self) -> Vec<(String, String, f64)> {
        self.cells
            .iter()
            .map(|c| {
                let row = match &self.groups[c.group].kind {
                    GroupKind::Series { name } | GroupKind::Row { name } | GroupKind::Points { name } => name.clone(),
                    GroupKind::Sizes { name } => format!("{name} size"),
                    GroupKind::Prices { field } | GroupKind::Stat { field } => field.noun().to_string(),
                    GroupKind::Slices | GroupKind::Stages => "value".into(),
                    GroupKind::Bins => "count".into(),
                };
                (row, c.label.clone(), c.value)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::data::{Axis, Candle, ChartContent, GeneratorKind, Provenance, SampleGroup};

    fn data(chart_type: ChartType, payload: Payload) -> ChartData {
        ChartData {
            data_id: "d".into(),
            chart_type,
            topic: "t".into(),
            seed: 0,
            provenance: Provenance { generator: GeneratorKind::Procedural, prompt_digest: None },
            content: ChartContent {
                title: "T".into(),
                x_axis: Axis::new("Year", ""),
                y_axis: Axis::new("Price", "USD"),
                payload,
            },
        }
    }

    #[test]
    fn quartiles_interpolate() {
        assert_eq!(box_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]), [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(box_stats(&[4.0, 1.0, 3.0, 2.0]), [1.0, 1.75, 2.5, 3.25, 4.0]);
    }

    #[test]
    fn candles_split_into_price_groups() {
        let d = data(
            ChartType::Candlestick,
            Payload::Candles(vec![
                Candle { time: "d1".into(), open: 1.0, close: 2.0, high: 3.0, low: 0.5 },
                Candle { time: "d2".into(), open: 2.0, close: 1.5, high: 2.5, low: 1.0 },
            ]),
        );
        let v = DataView::of(&d);
        assert_eq!(v.groups.len(), 4);
        assert_eq!(v.cells.len(), 8);
        let close = v.find(&ValueRef { series: 0, index: 1, field: Field::Close }).unwrap();
        assert_eq!(close.value, 1.5);
        assert_eq!(v.describe(close), "the closing price in d2");
        assert!(v.ordered);
    }

    #[test]
    fn box_groups_are_statistics() {
        let d = data(
            ChartType::BoxPlot,
            Payload::Samples(vec![
                SampleGroup { name: "A".into(), values: vec![1.0, 2.0, 3.0, 4.0, 5.0] },
                SampleGroup { name: "B".into(), values: vec![2.0, 4.0, 6.0, 8.0, 10.0] },
            ]),
        );
        let v = DataView::of(&d);
        assert_eq!(v.groups.len(), 5);
        let med = v.find(&ValueRef { series: 1, index: 0, field: Field::Median }).unwrap();
        assert_eq!(med.value, 6.0);
        assert_eq!(v.describe(med), "the median of B");
        assert!(v.labels_are_categorical(med.group));
    }
}
