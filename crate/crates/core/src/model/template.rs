use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::Serialize;
use serde_json::{Map, Value};

use super::ChartType;
use crate::error::{Error, Result};

/// The kind a template assigns to a value.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueKind {
    Text,
    Number,
    NumberList,
    /// List of numeric tuples of a fixed arity, e.g. `[x, y]`.
    PointList { arity: usize },
    /// List of objects, each matching the inner skeleton.
    RecordList(Skeleton),
    Nested(Skeleton),
}

impl ValueKind {
    pub fn name(&self) -> String {
        match self {
            ValueKind::Text => "text".into(),
            ValueKind::Number => "number".into(),
            ValueKind::NumberList => "number-list".into(),
            ValueKind::PointList { arity } => format!("point-list/{arity}"),
            ValueKind::RecordList(_) => "record-list".into(),
            ValueKind::Nested(_) => "nested".into(),
        }
    }

    fn from_json(path: &str, value: &Value) -> Result<ValueKind> {
        match value {
            Value::String(s) => match s.as_str() {
                "text" => Ok(ValueKind::Text),
                "number" => Ok(ValueKind::Number),
                "number-list" => Ok(ValueKind::NumberList),
                other => match other.strip_prefix("point-list/").map(str::parse::<usize>) {
                    Some(Ok(arity)) if arity >= 2 => Ok(ValueKind::PointList { arity }),
                    _ => Err(Error::InvalidArgument(format!(
                        "template key `{path}`: unknown value kind `{other}`"
                    ))),
                },
            },
            Value::Object(obj) => Ok(ValueKind::Nested(Skeleton::from_json_object(path, obj)?)),
            Value::Array(items) => match items.as_slice() {
                [Value::Object(obj)] => Ok(ValueKind::RecordList(Skeleton::from_json_object(
                    &format!("{path}[]"),
                    obj,
                )?)),
                _ => Err(Error::InvalidArgument(format!(
                    "template key `{path}`: a record list is written as a one-element array holding an object"
                ))),
            },
            _ => Err(Error::InvalidArgument(format!(
                "template key `{path}`: expected a kind name, object or array"
            ))),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            ValueKind::RecordList(inner) => Value::Array(vec![inner.to_json()]),
            ValueKind::Nested(inner) => inner.to_json(),
            leaf => Value::String(leaf.name()),
        }
    }
}

/// A tree of key names to value kinds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Skeleton {
    pub fields: BTreeMap<String, ValueKind>,
}

impl Skeleton {
    fn from_json_object(path: &str, obj: &Map<String, Value>) -> Result<Skeleton> {
        let mut fields = BTreeMap::new();
        for (key, value) in obj {
            let child = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
            fields.insert(key.clone(), ValueKind::from_json(&child, value)?);
        }
        Ok(Skeleton { fields })
    }

    pub fn to_json(&self) -> Value {
        Value::Object(
            self.fields
                .iter()
                .map(|(k, v)| (k.clone(), v.to_json()))
                .collect(),
        )
    }

    /// Every key name at every depth.
    pub fn all_keys(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_keys(&mut out);
        out
    }

    fn collect_keys<'a>(&'a self, out: &mut Vec<&'a str>) {
        for (key, kind) in &self.fields {
            out.push(key);
            if let ValueKind::RecordList(inner) | ValueKind::Nested(inner) = kind {
                inner.collect_keys(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartTemplate {
    pub chart_type: ChartType,
    pub version: u32,
    pub skeleton: Skeleton,
    pub readme: String,
}

impl ChartTemplate {
    pub fn from_files(json: &str, readme: &str) -> Result<ChartTemplate> {
        let doc: Value = serde_json::from_str(json)?;
        let chart_type: ChartType = doc
            .get("chart_type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidArgument("template lacks `chart_type`".into()))?
            .parse()?;
        let version = doc.get("version").and_then(Value::as_u64).unwrap_or(1) as u32;
        let skeleton = match doc.get("skeleton") {
            Some(Value::Object(obj)) => Skeleton::from_json_object("", obj)?,
            _ => return Err(Error::InvalidArgument("template lacks a `skeleton` object".into())),
        };
        Ok(ChartTemplate {
            chart_type,
            version,
            skeleton,
            readme: readme.to_string(),
        })
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "chart_type": self.chart_type,
            "version": self.version,
            "skeleton": self.skeleton.to_json(),
        })
    }

    pub fn required_keys(&self) -> Vec<&str> {
        self.skeleton.fields.keys().map(String::as_str).collect()
    }

    /// Problems with the template itself; empty when the template is usable.
    pub fn self_check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let top = &self.skeleton.fields;
        for key in ["title", "x_axis", "y_axis", self.chart_type.payload_key()] {
            if !top.contains_key(key) {
                problems.push(format!("missing required key `{key}`"));
            }
        }
        if self.readme.trim().is_empty() {
            problems.push("README is empty".into());
        }
        for key in self.skeleton.all_keys() {
            if !self.readme.contains(key) {
                problems.push(format!("README does not mention `{key}`"));
            }
        }
        if self.chart_type == ChartType::Candlestick {
            let record_keys = match top.get("data") {
                Some(ValueKind::RecordList(inner)) => {
                    inner.fields.keys().map(String::as_str).collect::<Vec<_>>()
                }
                _ => Vec::new(),
            };
            if record_keys != ["close", "high", "low", "open", "time"] {
                problems.push("candlestick records must hold exactly time, open, close, high, low".into());
            }
        }
        problems
    }
}

/// One mismatch between a document and its template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected {}, found {}", self.path, self.expected, self.found)
    }
}

fn describe(value: &Value) -> String {
    match value {
        Value::Null => "null".into(),
        Value::Bool(_) => "bool".into(),
        Value::Number(_) => "number".into(),
        Value::String(_) => "text".into(),
        Value::Array(_) => "array".into(),
        Value::Object(_) => "object".into(),
    }
}

fn is_finite_number(value: &Value) -> bool {
    value.as_f64().is_some_and(f64::is_finite)
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn check_object(path: &str, obj: &Map<String, Value>, skeleton: &Skeleton, out: &mut Vec<Violation>) {
    for (key, kind) in &skeleton.fields {
        let child = join(path, key);
        match obj.get(key) {
            None => out.push(Violation {
                path: child,
                expected: kind.name(),
                found: "missing".into(),
            }),
            Some(value) => check_value(&child, value, kind, out),
        }
    }
    for (key, value) in obj {
        if !skeleton.fields.contains_key(key) {
            out.push(Violation {
                path: join(path, key),
                expected: "no such key".into(),
                found: describe(value),
            });
        }
    }
}

fn check_value(path: &str, value: &Value, kind: &ValueKind, out: &mut Vec<Violation>) {
    let mismatch = |out: &mut Vec<Violation>| {
        out.push(Violation {
            path: path.to_string(),
            expected: kind.name(),
            found: describe(value),
        })
    };
    match kind {
        ValueKind::Text => {
            if !value.is_string() {
                mismatch(out);
            }
        }
        ValueKind::Number => {
            if !is_finite_number(value) {
                mismatch(out);
            }
        }
        ValueKind::NumberList => match value.as_array() {
            Some(items) => {
                for (i, item) in items.iter().enumerate() {
                    if !is_finite_number(item) {
                        out.push(Violation {
                            path: format!("{path}[{i}]"),
                            expected: "number".into(),
                            found: describe(item),
                        });
                    }
                }
            }
            None => mismatch(out),
        },
        ValueKind::PointList { arity } => match value.as_array() {
            Some(items) => {
                for (i, item) in items.iter().enumerate() {
                    let ok = item
                        .as_array()
                        .is_some_and(|t| t.len() == *arity && t.iter().all(is_finite_number));
                    if !ok {
                        out.push(Violation {
                            path: format!("{path}[{i}]"),
                            expected: format!("{arity} numbers"),
                            found: describe(item),
                        });
                    }
                }
            }
            None => mismatch(out),
        },
        ValueKind::RecordList(inner) => match value.as_array() {
            Some(items) => {
                for (i, item) in items.iter().enumerate() {
                    let item_path = format!("{path}[{i}]");
                    match item.as_object() {
                        Some(obj) => check_object(&item_path, obj, inner, out),
                        None => out.push(Violation {
                            path: item_path,
                            expected: "record".into(),
                            found: describe(item),
                        }),
                    }
                }
            }
            None => mismatch(out),
        },
        ValueKind::Nested(inner) => match value.as_object() {
            Some(obj) => check_object(path, obj, inner, out),
            None => mismatch(out),
        },
    }
}

/// Compares a content document against a template skeleton: key sets must be
/// equal at every level and every value must match its declared kind.
pub fn validate_document(content: &Value, template: &ChartTemplate) -> Vec<Violation> {
    let mut out = Vec::new();
    match content.as_object() {
        Some(obj) => check_object("", obj, &template.skeleton, &mut out),
        None => out.push(Violation {
            path: "$".into(),
            expected: "object".into(),
            found: describe(content),
        }),
    }
    out
}

macro_rules! builtin {
    ($($id:literal),* $(,)?) => {
        [$((
            include_str!(concat!("../../templates/", $id, ".json")),
            include_str!(concat!("../../templates/", $id, ".txt")),
        )),*]
    };
}

const BUILTIN_FILES: [(&str, &str); 18] = builtin!(
    "line",
    "multi_line",
    "vertical_bar",
    "horizontal_bar",
    "grouped_bar",
    "stacked_bar",
    "area",
    "stacked_area",
    "pie",
    "donut",
    "scatter",
    "bubble",
    "histogram",
    "box_plot",
    "candlestick",
    "radar",
    "heatmap",
    "funnel",
);

/// Chart templates keyed by chart type.
#[derive(Debug, Clone)]
pub struct TemplateRegistry {
    templates: BTreeMap<ChartType, ChartTemplate>,
}

impl TemplateRegistry {
    /// The templates shipped with the crate.
    pub fn builtin() -> &'static TemplateRegistry {
        static REGISTRY: OnceLock<TemplateRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            let templates = BUILTIN_FILES
                .iter()
                .map(|(json, readme)| {
                    let t = ChartTemplate::from_files(json, readme)
                        .expect("shipped template files parse");
                    (t.chart_type, t)
                })
                .collect();
            TemplateRegistry { templates }
        })
    }

    /// Loads `<id>.json` and `<id>.txt` pairs from a directory. Types without
    /// files are simply absent from the registry.
    pub fn load_dir(dir: &Path) -> Result<TemplateRegistry> {
        let mut templates = BTreeMap::new();
        for chart_type in ChartType::ALL {
            let json_path = dir.join(format!("{}.json", chart_type.id()));
            if !json_path.exists() {
                continue;
            }
            let json = std::fs::read_to_string(&json_path)?;
            let readme = std::fs::read_to_string(dir.join(format!("{}.txt", chart_type.id())))?;
            let template = ChartTemplate::from_files(&json, &readme)?;
            if template.chart_type != chart_type {
                return Err(Error::InvalidArgument(format!(
                    "{} declares chart type {}",
                    json_path.display(),
                    template.chart_type
                )));
            }
            templates.insert(chart_type, template);
        }
        Ok(TemplateRegistry { templates })
    }

    pub fn get(&self, chart_type: ChartType) -> Result<&ChartTemplate> {
        self.templates
            .get(&chart_type)
            .ok_or_else(|| Error::NotFound(format!("template for {chart_type}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ChartTemplate> {
        self.templates.values()
    }

    /// Writes every template as `<id>.json` plus `<id>.txt`.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in self.iter() {
            let id = t.chart_type.id();
            let mut json = serde_json::to_string_pretty(&t.to_json())?;
            json.push('\n');
            std::fs::write(dir.join(format!("{id}.json")), json)?;
            std::fs::write(dir.join(format!("{id}.txt")), &t.readme)?;
        }
        Ok(())
    }
}

/// Template for a chart type from the shipped registry.
pub fn get_template(chart_type: ChartType) -> &'static ChartTemplate {
    TemplateRegistry::builtin()
        .get(chart_type)
        .expect("every chart type has a shipped template")
}

/// Looks a template up by its chart-type id.
pub fn get_template_by_id(id: &str) -> Result<&'static ChartTemplate> {
    let chart_type: ChartType = id.parse()?;
    TemplateRegistry::builtin().get(chart_type)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn every_shipped_template_passes_its_own_checks() {
        for chart_type in ChartType::ALL {
            let t = get_template(chart_type);
            assert_eq!(t.chart_type, chart_type);
            assert_eq!(t.self_check(), Vec::<String>::new(), "{chart_type}");
        }
    }

    #[test]
    fn line_template_has_minimal_required_keys() {
        let t = get_template(ChartType::Line);
        assert_eq!(t.required_keys(), ["series", "title", "x_axis", "y_axis"]);
    }

    #[test]
    fn candlestick_records_carry_ohlc_and_time() {
        let t = get_template(ChartType::Candlestick);
        let Some(ValueKind::RecordList(inner)) = t.skeleton.fields.get("data") else {
            panic!("candlestick payload is a record list");
        };
        let keys: Vec<_> = inner.fields.keys().map(String::as_str).collect();
        assert_eq!(keys, ["close", "high", "low", "open", "time"]);
    }

    #[test]
    fn unknown_id_is_not_found() {
        assert!(matches!(get_template_by_id("sunburst"), Err(Error::NotFound(_))));
        assert!(get_template_by_id("funnel").is_ok());
    }

    #[test]
    fn template_json_round_trips() {
        for t in TemplateRegistry::builtin().iter() {
            let text = serde_json::to_string(&t.to_json()).unwrap();
            let back = ChartTemplate::from_files(&text, &t.readme).unwrap();
            assert_eq!(&back, t);
        }
    }

    #[test]
    fn mistyped_and_extra_keys_are_reported() {
        let t = get_template(ChartType::Line);
        let doc = json!({
            "title": 3,
            "x_axis": {"label": "Year", "unit": ""},
            "y_axis": {"label": "Output", "unit": "GWh", "scale": "log"},
            "series": [{"name": "EU", "points": [{"label": "2020", "value": "18.4"}]}]
        });
        let v = validate_document(&doc, t);
        let paths: Vec<_> = v.iter().map(|v| v.path.as_str()).collect();
        assert_eq!(paths, ["series[0].points[0].value", "title", "y_axis.scale"]);
        assert_eq!(v[1].expected, "text");
    }

    #[test]
    fn point_list_arity_is_enforced() {
        let t = get_template(ChartType::Bubble);
        let doc = json!({
            "title": "t",
            "x_axis": {"label": "x", "unit": ""},
            "y_axis": {"label": "y", "unit": ""},
            "series": [{"name": "a", "points": [[1.0, 2.0, 3.0], [1.0, 2.0]]}]
        });
        let v = validate_document(&doc, t);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "series[0].points[1]");
        assert_eq!(v[0].expected, "3 numbers");
    }
}
