use super::*;
use crate::datagen::procedural_data;
use crate::model::data::{Axis, ChartContent, LabeledValue, Series};
use crate::model::{ChartType, GeneratorKind, Provenance};
use crate::rng::hex_digest;
use crate::stylegen::generate_styles;

fn line(values: &[f64]) -> ChartData {
    let points = values
        .iter()
        .enumerate()
        .map(|(i, v)| LabeledValue { label: format!("Q{}", i + 1), value: *v })
        .collect();
    ChartData {
        data_id: "line-0000000000000001".into(),
        chart_type: ChartType::Line,
        topic: "rainfall".into(),
        seed: 1,
        provenance: Provenance { generator: GeneratorKind::Procedural, prompt_digest: None },
        content: ChartContent {
            title: "Quarterly Rain".into(),
            x_axis: Axis::new("Quarter", ""),
            y_axis: Axis::new("Rain", "mm"),
            payload: Payload::Series(vec![Series { name: "North".into(), points }]),
        },
    }
}

fn style(chart_type: ChartType, annotated: bool) -> StyleSpec {
    let styles = generate_styles(chart_type, 8, 3).unwrap();
    styles.into_iter().find(|s| s.annotate_values == annotated).unwrap()
}

/// Records a chart should draw one mark for.
fn record_count(data: &ChartData) -> usize {
    match &data.content.payload {
        Payload::Series(s) => s.iter().map(|s| s.points.len()).sum(),
        Payload::Slices(s) => s.len(),
        Payload::Points(s) => s.iter().map(|s| s.points.len()).sum(),
        Payload::Bins(b) => b.len(),
        Payload::Samples(g) => g.len(),
        Payload::Candles(c) => c.len(),
        Payload::Cells(c) => c.len(),
    }
}

#[test]
fn annotated_line_draws_every_value() {
    let data = line(&[12.0, 30.5, 18.0, 7.0, 22.0]);
    let out = render(&data, &style(ChartType::Line, true));
    assert_eq!(out.report, RenderReport::Ok);
    assert_eq!(out.stats.marks, 5);
    assert_eq!(out.stats.value_labels, 5);
    for needle in ["Quarterly Rain", "Quarter", "Rain (mm)", "30.5", "7"] {
        assert!(out.stats.texts.iter().any(|t| t == needle), "{needle} missing: {:?}", out.stats.texts);
    }
    let plain = render(&data, &style(ChartType::Line, false));
    assert_eq!(plain.stats.value_labels, 0);
    assert!(!plain.provenance.annotate_values);
}

#[test]
fn every_type_marks_every_record() {
    for t in ChartType::ALL {
        for (seed, s) in generate_styles(t, 8, 11).unwrap().iter().enumerate() {
            let data = procedural_data(t, "energy production", seed as u64);
            let out = render(&data, s);
            assert_eq!(out.report, RenderReport::Ok, "{t} {}", s.style_id);
            let n = record_count(&data);
            assert_eq!(out.stats.marks, n, "{t} {}", s.style_id);
            assert_eq!(out.stats.value_labels, if s.annotate_values { n } else { 0 }, "{t}");
            assert!(out.stats.texts.contains(&data.content.title));
            let (w, h, px) = decode_png(out.image.as_ref().unwrap()).unwrap();
            assert_eq!((w, h), s.figure_size_px);
            assert!(ink_fraction(&px) > 0.01, "{t}: nearly blank");
        }
    }
}

#[test]
fn rendering_is_byte_deterministic() {
    let data = procedural_data(ChartType::Bubble, "city population", 4);
    let s = style(ChartType::Bubble, true);
    let a = render(&data, &s).image.unwrap();
    let b = render(&data, &s).image.unwrap();
    assert_eq!(hex_digest(&a), hex_digest(&b));
}

#[test]
fn emptied_series_is_an_empty_plot() {
    let mut data = line(&[1.0, 2.0]);
    data.content.payload = Payload::Series(vec![]);
    let out = render(&data, &style(ChartType::Line, true));
    assert_eq!(out.report, RenderReport::EmptyPlot);
    assert!(out.image.is_some());
    assert!(out.stats.texts.iter().any(|t| t == "No Data"));
}

#[test]
fn broken_inputs_report_errors() {
    let s = style(ChartType::Line, false);
    let out = render(&line(&[1.0, f64::NAN, 3.0]), &s);
    assert!(matches!(out.report, RenderReport::RenderError(_)));
    assert!(out.image.is_none());
    assert_eq!((out.width, out.height), s.figure_size_px);

    let pie = style(ChartType::Pie, false);
    assert!(matches!(render(&line(&[1.0, 2.0]), &pie).report, RenderReport::RenderError(_)));

    let mut tiny = s.clone();
    tiny.figure_size_px = (100, 100);
    assert!(matches!(render(&line(&[1.0, 2.0]), &tiny).report, RenderReport::RenderError(_)));
}

#[test]
fn flat_values_still_render() {
    for v in [0.0, 40.0, -3.0] {
        let out = render(&line(&[v, v, v]), &style(ChartType::Line, true));
        assert_eq!(out.report, RenderReport::Ok, "{v}");
        assert_eq!(out.stats.marks, 3);
    }
}

#[test]
fn composition_is_quadratic_and_order_independent() {
    let datas: Vec<ChartData> = (0..3).map(|i| procedural_data(ChartType::VerticalBar, "rainfall", i)).collect();
    let styles = generate_styles(ChartType::VerticalBar, 2, 9).unwrap();
    let digests = |workers| {
        let sink = MemorySink::default();
        let report = compose(&datas, &styles, &sink, 5, workers).unwrap();
        let d: Vec<String> = sink.into_sorted().iter().map(|c| hex_digest(c.image.as_ref().unwrap())).collect();
        (report, d)
    };
    let (r1, d1) = digests(1);
    let (r4, d4) = digests(4);
    assert_eq!(r1.attempted, 6);
    assert_eq!(r1.ok, 6);
    assert!(r1.complete);
    assert_eq!(r1, r4);
    assert_eq!(d1, d4);
}
