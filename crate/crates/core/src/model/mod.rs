//! Core domain types: chart types, templates, raw data, styles and topics.

mod chart_type;
pub mod data;
pub mod style;
pub mod template;
pub mod topics;
pub mod view;

pub use chart_type::{ChartType, Family, PayloadShape};
pub use data::{ChartContent, ChartData, ChartRecord, GeneratorKind, Payload, Provenance};
pub use style::{Color, StyleFamily, StyleSpec};
pub use template::{
    get_template, get_template_by_id, validate_document, ChartTemplate, Skeleton, TemplateRegistry,
    ValueKind, Violation,
};
pub use topics::TopicSet;
pub use view::{DataView, Field, ValueRef};

use crate::error::{Error, Result};

/// Outcome of checking a chart against its template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationResult {
    Ok,
    Violations(Vec<Violation>),
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationResult::Ok)
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            ValidationResult::Ok => &[],
            ValidationResult::Violations(v) => v,
        }
    }
}

impl From<Vec<Violation>> for ValidationResult {
    fn from(v: Vec<Violation>) -> Self {
        if v.is_empty() {
            ValidationResult::Ok
        } else {
            ValidationResult::Violations(v)
        }
    }
}

/// Structural conformance of a chart's content to a template: equal key sets
/// at every level and matching value kinds.
pub fn validate_structure(data: &ChartData, template: &ChartTemplate) -> Result<ValidationResult> {
    validate_content(data.chart_type, &data.content_json(), template)
}

/// Same check over an unparsed content document.
pub fn validate_content(
    chart_type: ChartType,
    content: &serde_json::Value,
    template: &ChartTemplate,
) -> Result<ValidationResult> {
    if chart_type != template.chart_type {
        return Err(Error::InvalidArgument(format!(
            "data is {chart_type} but template is {}",
            template.chart_type
        )));
    }
    Ok(validate_document(content, template).into())
}
