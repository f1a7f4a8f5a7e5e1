use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::template::{get_template, validate_document, Violation};
use super::{ChartType, PayloadShape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    /// Empty when the axis has no unit.
    pub unit: String,
}

impl Axis {
    pub fn new(label: impl Into<String>, unit: impl Into<String>) -> Self {
        Axis {
            label: label.into(),
            unit: unit.into(),
        }
    }

    /// `Label (unit)` or just `Label`.
    pub fn caption(&self) -> String {
        if self.unit.is_empty() {
            self.label.clone()
        } else {
            format!("{} ({})", self.label, self.unit)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<LabeledValue>,
}

/// Scatter (`[x, y]`) or bubble (`[x, y, size]`) series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSeries {
    pub name: String,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGroup {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candle {
    pub time: String,
    pub open: f64,
    pub close: f64,
    pub high: f64,
    pub low: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub row: String,
    pub column: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Series(Vec<Series>),
    Slices(Vec<LabeledValue>),
    Points(Vec<PointSeries>),
    Bins(Vec<Bin>),
    Samples(Vec<SampleGroup>),
    Candles(Vec<Candle>),
    Cells(Vec<HeatCell>),
}

impl Payload {
    pub fn shape(&self) -> PayloadShape {
        match self {
            Payload::Series(_) => PayloadShape::Series,
            Payload::Slices(_) => PayloadShape::Slices,
            Payload::Points(s) => match s.first().and_then(|s| s.points.first()).map(Vec::len) {
                Some(3) => PayloadShape::Bubbles,
                _ => PayloadShape::Points,
            },
            Payload::Bins(_) => PayloadShape::Bins,
            Payload::Samples(_) => PayloadShape::Samples,
            Payload::Candles(_) => PayloadShape::Candles,
            Payload::Cells(_) => PayloadShape::Cells,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Payload::Series(s) => s.iter().all(|s| s.points.is_empty()),
            Payload::Slices(s) => s.is_empty(),
            Payload::Points(s) => s.iter().all(|s| s.points.is_empty()),
            Payload::Bins(b) => b.is_empty(),
            Payload::Samples(g) => g.iter().all(|g| g.values.is_empty()),
            Payload::Candles(c) => c.is_empty(),
            Payload::Cells(c) => c.is_empty(),
        }
    }

    /// Every number in the payload, in document order.
    pub fn numbers(&self) -> Vec<f64> {
        match self {
            Payload::Series(s) => s
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.value))
                .collect(),
            Payload::Slices(s) => s.iter().map(|p| p.value).collect(),
            Payload::Points(s) => s.iter().flat_map(|s| s.points.iter().flatten().copied()).collect(),
            Payload::Bins(b) => b.iter().flat_map(|b| [b.lower, b.upper, b.count]).collect(),
            Payload::Samples(g) => g.iter().flat_map(|g| g.values.iter().copied()).collect(),
            Payload::Candles(c) => c
                .iter()
                .flat_map(|c| [c.open, c.close, c.high, c.low])
                .collect(),
            Payload::Cells(c) => c.iter().map(|c| c.value).collect(),
        }
    }

    fn to_json(&self) -> Value {
        let value = match self {
            Payload::Series(v) => serde_json::to_value(v),
            Payload::Slices(v) => serde_json::to_value(v),
            Payload::Points(v) => serde_json::to_value(v),
            Payload::Bins(v) => serde_json::to_value(v),
            Payload::Samples(v) => serde_json::to_value(v),
            Payload::Candles(v) => serde_json::to_value(v),
            Payload::Cells(v) => serde_json::to_value(v),
        };
        value.expect("payload types serialize")
    }

    fn from_json(shape: PayloadShape, value: Value) -> serde_json::Result<Payload> {
        Ok(match shape {
            PayloadShape::Series => Payload::Series(serde_json::from_value(value)?),
            PayloadShape::Slices => Payload::Slices(serde_json::from_value(value)?),
            PayloadShape::Points | PayloadShape::Bubbles => {
                Payload::Points(serde_json::from_value(value)?)
            }
            PayloadShape::Bins => Payload::Bins(serde_json::from_value(value)?),
            PayloadShape::Samples => Payload::Samples(serde_json::from_value(value)?),
            PayloadShape::Candles => Payload::Candles(serde_json::from_value(value)?),
            PayloadShape::Cells => Payload::Cells(serde_json::from_value(value)?),
        })
    }
}

/// The template-governed part of a chart: title, axes and data payload.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartContent {
    pub title: String,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub payload: Payload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Procedural,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_digest: Option<String>,
}

/// One raw-data instance of a chart type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartRecord", into = "ChartRecord")]
pub struct ChartData {
    pub data_id: String,
    pub chart_type: ChartType,
    pub topic: String,
    pub seed: u64,
    pub provenance: Provenance,
    pub content: ChartContent,
}

/// Wire form of [`ChartData`]: metadata plus an unchecked content document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartRecord {
    pub data_id: String,
    pub chart_type: ChartType,
    pub topic: String,
    pub seed: u64,
    pub provenance: Provenance,
    pub content: Value,
}

impl From<ChartData> for ChartRecord {
    fn from(data: ChartData) -> Self {
        let content = data.content_json();
        ChartRecord {
            data_id: data.data_id,
            chart_type: data.chart_type,
            topic: data.topic,
            seed: data.seed,
            provenance: data.provenance,
            content,
        }
    }
}

impl TryFrom<ChartRecord> for ChartData {
    type Error = Error;

    fn try_from(record: ChartRecord) -> Result<Self> {
        let content = ChartContent::from_document(record.chart_type, record.content)?;
        Ok(ChartData {
            data_id: record.data_id,
            chart_type: record.chart_type,
            topic: record.topic,
            seed: record.seed,
            provenance: record.provenance,
            content,
        })
    }
}

impl ChartContent {
    /// Parses a content document, which must conform to the chart type's template.
    pub fn from_document(chart_type: ChartType, content: Value) -> Result<ChartContent> {
        let violations = validate_document(&content, get_template(chart_type));
        if !violations.is_empty() {
            let listed: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::InvalidArgument(format!(
                "content does not match the {chart_type} template: {}",
                listed.join("; ")
            )));
        }
        let Value::Object(mut obj) = content else {
            unreachable!("validated as object")
        };
        let mut take = |key: &str| obj.remove(key).expect("validated key");
        let title = take("title").as_str().unwrap_or_default().to_string();
        let x_axis = serde_json::from_value(take("x_axis"))?;
        let y_axis = serde_json::from_value(take("y_axis"))?;
        let payload = Payload::from_json(chart_type.payload_shape(), take(chart_type.payload_key()))?;
        Ok(ChartContent {
            title,
            x_axis,
            y_axis,
            payload,
        })
    }

    pub fn to_document(&self, chart_type: ChartType) -> Value {
        let mut obj = Map::new();
        obj.insert("title".into(), Value::String(self.title.clone()));
        obj.insert("x_axis".into(), serde_json::to_value(&self.x_axis).expect("axis"));
        obj.insert("y_axis".into(), serde_json::to_value(&self.y_axis).expect("axis"));
        obj.insert(chart_type.payload_key().into(), self.payload.to_json());
        Value::Object(obj)
    }
}

fn violation(path: impl Into<String>, expected: impl Into<String>, found: impl Into<String>) -> Violation {
    Violation {
        path: path.into(),
        expected: expected.into(),
        found: found.into(),
    }
}

impl ChartData {
    pub fn content_json(&self) -> Value {
        self.content.to_document(self.chart_type)
    }

    /// Canonical serialization (sorted keys, compact).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("chart data serializes")
    }

    /// Semantic rules the template cannot express: non-empty payload, finite
    /// numbers, shared category lists, series counts and per-type orderings.
    pub fn invariant_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let key = self.chart_type.payload_key();
        if self.content.payload.is_empty() {
            out.push(violation(key, "non-empty data", "empty"));
            return out;
        }
        if let Some(bad) = self.content.payload.numbers().iter().find(|v| !v.is_finite()) {
            out.push(violation(key, "finite numbers", bad.to_string()));
        }
        use crate::model::ChartType::*;
        match &self.content.payload {
            Payload::Series(series) => {
                let (min, max) = match self.chart_type {
                    Line | VerticalBar | HorizontalBar | Area => (1, 1),
                    Radar => (1, usize::MAX),
                    _ => (2, usize::MAX),
                };
                if series.len() < min || series.len() > max {
                    out.push(violation(
                        key,
                        format!("between {min} and {max} series"),
                        series.len().to_string(),
                    ));
                }
                let labels = |s: &Series| s.points.iter().map(|p| p.label.clone()).collect::<Vec<_>>();
                let first = labels(&series[0]);
                for (i, s) in series.iter().enumerate().skip(1) {
                    if labels(s) != first {
                        out.push(violation(
                            format!("{key}[{i}].points"),
                            "the same labels as the first series",
                            "different labels",
                        ));
                    }
                }
                if matches!(self.chart_type, StackedBar | StackedArea)
                    && series.iter().flat_map(|s| &s.points).any(|p| p.value < 0.0)
                {
                    out.push(violation(key, "non-negative stacked values", "negative value"));
                }
                if self.chart_type == Radar && first.len() < 3 {
                    out.push(violation(key, "at least 3 spokes", first.len().to_string()));
                }
            }
            Payload::Slices(slices) => {
                if slices.iter().any(|s| s.value < 0.0) {
                    out.push(violation(key, "non-negative values", "negative value"));
                }
                if matches!(self.chart_type, Pie | Donut) {
                    let total: f64 = slices.iter().map(|s| s.value).sum();
                    if (total - 100.0).abs() > 0.5 {
                        out.push(violation(key, "shares summing to 100", format!("{total}")));
                    }
                }
                if self.chart_type == Funnel && slices.windows(2).any(|w| w[1].value > w[0].value) {
                    out.push(violation(key, "non-increasing stages", "increase"));
                }
            }
            Payload::Points(series) => {
                for (i, s) in series.iter().enumerate() {
                    if self.chart_type == Bubble && s.points.iter().any(|p| p.get(2).is_some_and(|z| *z <= 0.0)) {
                        out.push(violation(format!("{key}[{i}].points"), "positive sizes", "non-positive size"));
                    }
                }
            }
            Payload::Bins(bins) => {
                for (i, b) in bins.iter().enumerate() {
                    if !(b.lower < b.upper) || b.count < 0.0 {
                        out.push(violation(format!("{key}[{i}]"), "lower < upper and count >= 0", "bad bin"));
                    }
                }
                for (i, w) in bins.windows(2).enumerate() {
                    if w[0].upper != w[1].lower {
                        out.push(violation(format!("{key}[{}]", i + 1), "contiguous bins", "gap"));
                    }
                }
            }
            Payload::Samples(groups) => {
                for (i, g) in groups.iter().enumerate() {
                    if g.values.len() < 5 {
                        out.push(violation(format!("{key}[{i}].values"), "at least 5 values", g.values.len().to_string()));
                    }
                }
            }
            Payload::Candles(candles) => {
                for (i, c) in candles.iter().enumerate() {
                    if !(c.low <= c.open.min(c.close) && c.open.max(c.close) <= c.high) {
                        out.push(violation(format!("{key}[{i}]"), "low <= open, close <= high", "inverted candle"));
                    }
                }
            }
            Payload::Cells(cells) => {
                let mut rows: Vec<&str> = Vec::new();
                for c in cells {
                    if !rows.contains(&c.row.as_str()) {
                        rows.push(&c.row);
                    }
                }
                let columns_of = |row: &str| {
                    cells
                        .iter()
                        .filter(|c| c.row == row)
                        .map(|c| c.column.as_str())
                        .collect::<Vec<_>>()
                };
                let first = columns_of(rows[0]);
                if rows.iter().any(|r| columns_of(r) != first) {
                    out.push(violation(key, "every row with the same columns", "ragged grid"));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn line() -> ChartData {
        ChartData {
            data_id: "line-0".into(),
            chart_type: ChartType::Line,
            topic: "energy production".into(),
            seed: 1,
            provenance: Provenance {
                generator: GeneratorKind::Procedural,
                prompt_digest: None,
            },
            content: ChartContent {
                title: "Solar Output".into(),
                x_axis: Axis::new("Year", ""),
                y_axis: Axis::new("Output", "GWh"),
                payload: Payload::Series(vec![Series {
                    name: "EU".into(),
                    points: vec![
                        LabeledValue { label: "2020".into(), value: 18.4 },
                        LabeledValue { label: "2021".into(), value: 42.0 },
                    ],
                }]),
            },
        }
    }

    #[test]
    fn serde_round_trip_is_lossless() {
        let data = line();
        let text = data.canonical_json();
        let back: ChartData = serde_json::from_str(&text).unwrap();
        assert_eq!(back, data);
        assert_eq!(back.canonical_json(), text);
    }

    #[test]
    fn malformed_content_is_refused_on_parse() {
        let mut record: ChartRecord = line().into();
        record.content.as_object_mut().unwrap().remove("title");
        let text = serde_json::to_string(&record).unwrap();
        let err = serde_json::from_str::<ChartData>(&text).unwrap_err();
        assert!(err.to_string().contains("title"), "{err}");
    }

    #[test]
    fn invariants_catch_semantic_faults() {
        assert!(line().invariant_violations().is_empty());

        let mut empty = line();
        empty.content.payload = Payload::Series(vec![]);
        assert_eq!(empty.invariant_violations()[0].found, "empty");

        let mut nan = line();
        if let Payload::Series(s) = &mut nan.content.payload {
            s[0].points[0].value = f64::NAN;
        }
        assert_eq!(nan.invariant_violations()[0].expected, "finite numbers");

        let candle = json!({
            "title": "t", "x_axis": {"label": "Day", "unit": ""}, "y_axis": {"label": "Price", "unit": "USD"},
            "data": [{"time": "d1", "open": 10.0, "close": 12.0, "high": 11.0, "low": 9.0}]
        });
        let content = ChartContent::from_document(ChartType::Candlestick, candle).unwrap();
        let data = ChartData { chart_type: ChartType::Candlestick, content, ..line() };
        assert_eq!(data.invariant_violations()[0].found, "inverted candle");
    }
}
