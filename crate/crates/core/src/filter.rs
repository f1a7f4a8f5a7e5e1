//! Multi-stage filtering: template conformance, QA completeness, render
//! errors and blank plots. Filters only partition their input.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::model::{get_template, validate_content, ChartData, ChartRecord};
use crate::qa::{expected_histogram, kind_histogram, replay, QaBatch, QaKind};
use crate::render::{decode_png, ink_fraction, RenderReport, RenderedChart};

/// Default blank-image threshold on the non-background pixel fraction.
pub const DEFAULT_TAU: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterStage {
    Schema,
    QaStructure,
    RenderError,
    NoData,
}

impl FilterStage {
    pub fn name(self) -> &'static str {
        match self {
            FilterStage::Schema => "schema",
            FilterStage::QaStructure => "qa_structure",
            FilterStage::RenderError => "render_error",
            FilterStage::NoData => "no_data",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub stage: FilterStage,
    pub inspected: usize,
    pub rejected: usize,
    pub rejects: Vec<Reject>,
}

impl FilterReport {
    fn new(stage: FilterStage) -> FilterReport {
        FilterReport { stage, inspected: 0, rejected: 0, rejects: Vec::new() }
    }

    fn reject(&mut self, id: impl Into<String>, reason: impl Into<String>) {
        self.rejects.push(Reject { id: id.into(), reason: reason.into() });
        self.rejected += 1;
    }

    /// Folds another report for the same stage into this one.
    pub fn merge(&mut self, other: FilterReport) {
        debug_assert_eq!(self.stage, other.stage);
        self.inspected += other.inspected;
        self.rejected += other.rejected;
        self.rejects.extend(other.rejects);
    }

    /// Appends one JSON line per reject, tagged with the stage.
    pub fn write_rejects(&self, out: &mut impl Write) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            stage: FilterStage,
            id: &'a str,
            reason: &'a str,
        }
        for r in &self.rejects {
            let line = Line { stage: self.stage, id: &r.id, reason: &r.reason };
            serde_json::to_writer(&mut *out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Keeps records whose content matches their template key-for-key and kind
/// for kind, and that satisfy the per-type data invariants.
pub fn filter_schema(records: Vec<ChartRecord>) -> (Vec<ChartData>, FilterReport) {
    let mut report = FilterReport::new(FilterStage::Schema);
    let mut kept = Vec::new();
    for record in records {
        report.inspected += 1;
        let id = record.data_id.clone();
        match schema_check(record) {
            Ok(data) => kept.push(data),
            Err(reason) => report.reject(id, reason),
        }
    }
    (kept, report)
}

/// Same filter over already typed data.
pub fn filter_schema_data(datas: Vec<ChartData>) -> (Vec<ChartData>, FilterReport) {
    filter_schema(datas.into_iter().map(ChartRecord::from).collect())
}

fn schema_check(record: ChartRecord) -> Result<ChartData, String> {
    let template = get_template(record.chart_type);
    let result = validate_content(record.chart_type, &record.content, template).map_err(|e| e.to_string())?;
    if !result.is_ok() {
        return Err(join(result.violations()));
    }
    let data = ChartData::try_from(record).map_err(|e| e.to_string())?;
    let violations = data.invariant_violations();
    if !violations.is_empty() {
        return Err(join(&violations));
    }
    Ok(data)
}

fn join(violations: &[crate::model::Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Keeps batches with the full kind layout whose every record is well formed
/// and replays against its chart.
pub fn filter_qa(batches: Vec<QaBatch>, datas: &[ChartData]) -> (Vec<QaBatch>, FilterReport) {
    let by_id: BTreeMap<&str, &ChartData> = datas.iter().map(|d| (d.data_id.as_str(), d)).collect();
    let mut report = FilterReport::new(FilterStage::QaStructure);
    let mut kept = Vec::new();
    for batch in batches {
        report.inspected += 1;
        match qa_check(&batch, &by_id) {
            Ok(()) => kept.push(batch),
            Err(reason) => report.reject(batch.id(), reason),
        }
    }
    (kept, report)
}

fn qa_check(batch: &QaBatch, datas: &BTreeMap<&str, &ChartData>) -> Result<(), String> {
    let data = datas.get(batch.data_id.as_str()).ok_or_else(|| format!("unknown data_id {}", batch.data_id))?;
    let have = kind_histogram(&batch.records);
    let want = expected_histogram();
    for kind in QaKind::ALL {
        let (n, need) = (have.get(&kind).copied().unwrap_or(0), want[&kind]);
        if n == 0 {
            return Err(format!("missing {}", kind.name()));
        }
        if n != need {
            return Err(format!("{} has {n} records, need {need}", kind.name()));
        }
    }
    let mut ids = HashSet::new();
    for r in &batch.records {
        if !ids.insert(r.qa_id.as_str()) {
            return Err(format!("duplicate qa_id {}", r.qa_id));
        }
    }
    for r in &batch.records {
        r.check_shape().map_err(|e| format!("{}: {e}", r.qa_id))?;
        if let Some(base) = &r.base_qa_id {
            if !ids.contains(base.as_str()) {
                return Err(format!("{}: base {base} not in batch", r.qa_id));
            }
        }
        replay(r, data).map_err(|e| format!("{}: replay failed: {e}", r.qa_id))?;
    }
    Ok(())
}

/// Drops render errors, then empty or blank images. Returns the kept charts
/// and the render_error and no_data reports.
pub fn filter_rendered(
    rendered: Vec<RenderedChart>,
    tau: f64,
) -> (Vec<RenderedChart>, FilterReport, FilterReport) {
    let mut errors = FilterReport::new(FilterStage::RenderError);
    let mut blank = FilterReport::new(FilterStage::NoData);
    let mut kept = Vec::new();
    for chart in rendered {
        errors.inspected += 1;
        if let RenderReport::RenderError(message) = &chart.report {
            errors.reject(chart.id(), format!("render error: {message}"));
            continue;
        }
        blank.inspected += 1;
        match blank_reason(&chart, tau) {
            Some(reason) => blank.reject(chart.id(), reason),
            None => kept.push(chart),
        }
    }
    (kept, errors, blank)
}

fn blank_reason(chart: &RenderedChart, tau: f64) -> Option<String> {
    if chart.report == RenderReport::EmptyPlot {
        return Some("empty plot".into());
    }
    let Some(bytes) = &chart.image else {
        return Some("decode: no image bytes".into());
    };
    match decode_png(bytes) {
        Err(e) => Some(format!("decode: {e}")),
        Ok((_, _, pixels)) => {
            let ink = ink_fraction(&pixels);
            (ink < tau).then(|| format!("blank image: ink fraction {ink:.4} below {tau}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::procedural_data;
    use crate::model::{ChartType, Color};
    use crate::render::{encode_png, render};
    use crate::stylegen::generate_styles;

    fn datas(n: u64) -> Vec<ChartData> {
        (0..n).map(|i| procedural_data(ChartType::VerticalBar, "rainfall", i)).collect()
    }

    #[test]
    fn missing_keys_are_rejected_with_paths() {
        let mut records: Vec<ChartRecord> = datas(12).into_iter().map(ChartRecord::from).collect();
        for r in &mut records[..2] {
            r.content.as_object_mut().unwrap().remove("y_axis");
        }
        let (kept, report) = filter_schema(records);
        assert_eq!(kept.len(), 10);
        assert_eq!(report.rejected, 2);
        assert!(report.rejects[0].reason.contains("y_axis"), "{}", report.rejects[0].reason);
        let (none, empty) = filter_schema(vec![]);
        assert!(none.is_empty());
        assert_eq!((empty.inspected, empty.rejected), (0, 0));
    }

    #[test]
    fn batches_missing_reasoning_are_rejected() {
        let ds = datas(3);
        let batches: Vec<QaBatch> = ds.iter().map(|d| QaBatch::generate(d, 1).unwrap()).collect();
        let (kept, report) = filter_qa(batches.clone(), &ds);
        assert_eq!((kept.len(), report.rejected), (3, 0));

        let mut gutted = batches[0].clone();
        gutted.records.retain(|r| r.kind != QaKind::Reasoning);
        let mut wrong = batches[1].clone();
        wrong.records[6].short_answer = "-123456".into();
        wrong.records[6].long_answer.push_str(" -123456");
        let (kept, report) = filter_qa(vec![gutted, wrong, batches[2].clone()], &ds);
        assert_eq!(kept.len(), 1);
        assert_eq!(report.rejects[0].reason, "missing reasoning");
        assert!(report.rejects[1].reason.contains("replay"), "{}", report.rejects[1].reason);
    }

    #[test]
    fn render_stages_partition_the_input() {
        let style = generate_styles(ChartType::VerticalBar, 1, 0).unwrap().remove(0);
        let ds = datas(3);
        let good = render(&ds[0], &style);
        let ink = decode_png(good.image.as_ref().unwrap()).map(|(_, _, px)| ink_fraction(&px)).unwrap();
        assert!(ink > 10.0 * DEFAULT_TAU, "ink {ink}");

        let mut broken = ds[1].clone();
        broken.content.payload = crate::model::Payload::Slices(vec![]);
        let error = render(&broken, &style);
        let mut blank = render(&ds[2], &style);
        let (w, h) = style.figure_size_px;
        blank.image = Some(encode_png(w, h, &Color::WHITE.0.repeat((w * h) as usize)));
        let mut garbage = render(&ds[2], &style);
        garbage.provenance.style_id = "other".into();
        garbage.image = Some(b"not a png".to_vec());

        let (kept, errors, no_data) = filter_rendered(vec![good, error, blank, garbage], DEFAULT_TAU);
        assert_eq!(kept.len(), 1);
        assert_eq!((errors.inspected, errors.rejected), (4, 1));
        assert_eq!((no_data.inspected, no_data.rejected), (3, 2));
        assert!(no_data.rejects[1].reason.starts_with("decode"));

        let (again, e2, n2) = filter_rendered(kept, DEFAULT_TAU);
        assert_eq!((again.len(), e2.rejected, n2.rejected), (1, 0, 0));
    }
}
