use super::*;
use crate::datagen::procedural_data;
use crate::model::data::{Axis, ChartContent, LabeledValue, Payload, Series};
use crate::model::{ChartType, DataView, GeneratorKind, Provenance};

fn bar(values: &[f64]) -> ChartData {
    let points = values
        .iter()
        .enumerate()
        .map(|(i, v)| LabeledValue { label: format!("c{i}"), value: *v })
        .collect();
    ChartData {
        data_id: "vertical_bar-test".into(),
        chart_type: ChartType::VerticalBar,
        topic: "t".into(),
        seed: 1,
        provenance: Provenance { generator: GeneratorKind::Procedural, prompt_digest: None },
        content: ChartContent {
            title: "Solar Output".into(),
            x_axis: Axis::new("Category", ""),
            y_axis: Axis::new("Output", "GWh"),
            payload: Payload::Series(vec![Series { name: "EU".into(), points }]),
        },
    }
}

#[test]
fn batch_has_nineteen_records_in_kind_order() {
    for t in ChartType::ALL {
        for seed in 0..20 {
            let data = procedural_data(t, "energy production", seed);
            let records = gen_all(&data, seed).unwrap_or_else(|e| panic!("{t} seed {seed}: {e}"));
            assert_eq!(records.len(), BATCH_SIZE);
            assert_eq!(kind_histogram(&records), expected_histogram());
            let kinds: Vec<QaKind> = records.iter().map(|r| r.kind).collect();
            let mut sorted = kinds.clone();
            sorted.sort();
            assert_eq!(kinds, sorted, "{t}: kinds out of order");
            let ids: std::collections::HashSet<&str> = records.iter().map(|r| r.qa_id.as_str()).collect();
            assert_eq!(ids.len(), BATCH_SIZE);
            for r in &records {
                r.check_shape().unwrap_or_else(|e| panic!("{t} {}: {e}\n{r:#?}", r.qa_id));
                replay(r, &data).unwrap_or_else(|e| panic!("{t} {}: {e}", r.qa_id));
            }
        }
    }
}

#[test]
fn batches_are_reproducible() {
    let data = procedural_data(ChartType::GroupedBar, "market share", 5);
    let a = serde_json::to_string(&gen_all(&data, 77).unwrap()).unwrap();
    let b = serde_json::to_string(&gen_all(&data, 77).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&gen_all(&data, 78).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn argmax_names_the_largest_category() {
    let data = bar(&[3.0, 9.0, 5.0]);
    let view = DataView::of(&data);
    let d = Derivation {
        operator: Operator::ArgMax,
        operands: vec![],
        scope: Scope::Group(0),
        threshold: None,
        axis: None,
        negated: false,
        result: DerivedValue::Bool(false),
    };
    assert_eq!(evaluate(&data, &view, &d).unwrap(), DerivedValue::Text("c1".into()));
    let range = Derivation { operator: Operator::Range, ..d.clone() };
    assert_eq!(evaluate(&data, &view, &range).unwrap().render(), "6");
    let tied = bar(&[9.0, 9.0, 5.0]);
    assert!(matches!(
        evaluate(&tied, &DataView::of(&tied), &d),
        Err(ReplayError::Ambiguous(_))
    ));
}

#[test]
fn sums_and_means_of_named_values() {
    let data = bar(&[2.0, 4.0, 6.0, 1.0]);
    let view = DataView::of(&data);
    let operands: Vec<ValueRef> = view.cells.iter().map(|c| c.at).collect();
    let sum = Derivation {
        operator: Operator::Sum,
        operands: operands[..3].to_vec(),
        scope: Scope::Operands,
        threshold: None,
        axis: None,
        negated: false,
        result: DerivedValue::Bool(false),
    };
    assert_eq!(evaluate(&data, &view, &sum).unwrap().render(), "12");
    let mean = Derivation { operator: Operator::Mean, operands: operands.clone(), ..sum.clone() };
    let one_to_four = bar(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(evaluate(&one_to_four, &DataView::of(&one_to_four), &mean).unwrap().render(), "2.5");
    let ratio = Derivation { operator: Operator::Ratio, operands: vec![operands[0], operands[3]], ..sum };
    assert_eq!(evaluate(&data, &view, &ratio).unwrap().render(), "2");
}

#[test]
fn lookup_reads_the_raw_value() {
    let data = bar(&[18.4, 3.0, 7.25]);
    let g = gen_literal(&data, 3, 9);
    assert!(!g.short);
    for r in g.records.iter().filter(|r| r.derivation.operator == Operator::Lookup) {
        let at = r.derivation.operands[0];
        let raw = [18.4, 3.0, 7.25][at.index];
        assert_eq!(r.exact_value(), Some(raw));
        assert_eq!(r.short_answer, crate::numfmt::format_number(raw));
    }
}

#[test]
fn sparse_data_is_flagged_short() {
    let data = bar(&[1.0, 2.0]);
    let g = gen_literal(&data, 5, 0);
    assert!(g.short);
    assert_eq!(g.records.len(), 4);
    assert!(matches!(gen_all(&data, 0), Err(Error::QaShortfall(_))));
}

#[test]
fn increasing_series_has_an_increasing_trend() {
    let mut data = bar(&[1.0, 2.0, 3.5, 4.0]);
    data.chart_type = ChartType::Line;
    let view = DataView::of(&data);
    let d = Derivation {
        operator: Operator::TrendIncreasing,
        operands: vec![],
        scope: Scope::Group(0),
        threshold: None,
        axis: None,
        negated: false,
        result: DerivedValue::Bool(false),
    };
    assert_eq!(evaluate(&data, &view, &d).unwrap().render(), "Yes");
    let negated = Derivation { negated: true, ..d };
    assert_eq!(evaluate(&data, &view, &negated).unwrap().render(), "No");
}

#[test]
fn yes_no_questions_negate() {
    for t in ChartType::ALL {
        let data = procedural_data(t, "rainfall", 3);
        for r in gen_all(&data, 3).unwrap() {
            if let Some(n) = negation(&data, &r, 1) {
                assert_ne!(n.short_answer, r.short_answer);
                assert_ne!(n.question, r.question);
                replay(&n, &data).unwrap();
            }
        }
    }
}

#[test]
fn augmented_records_embed_the_data() {
    let data = procedural_data(ChartType::Pie, "market share", 2);
    let records = gen_all(&data, 4).unwrap();
    let json_only = &records[17];
    let embedded = embedded_data(&json_only.question).unwrap();
    let back: ChartData = serde_json::from_str(embedded).unwrap();
    assert_eq!(back, data);
    assert!(json_only.question.contains(crate::model::get_template(ChartType::Pie).readme.trim()));
    let base = records.iter().find(|r| Some(&r.qa_id) == json_only.base_qa_id.as_ref()).unwrap();
    assert_eq!(base.short_answer, json_only.short_answer);

    let driven = &records[18];
    let turns = driven.turns.as_ref().unwrap();
    assert_eq!(turns.len(), 2);
    assert_eq!(turns[0].answer, extraction_gold(&data));
    let gold: serde_json::Value = serde_json::from_str(&turns[0].answer).unwrap();
    let template = crate::model::get_template(ChartType::Pie);
    assert!(crate::model::validate_content(ChartType::Pie, &gold, template).unwrap().is_ok());
    let base = records.iter().find(|r| Some(&r.qa_id) == driven.base_qa_id.as_ref()).unwrap();
    assert_eq!(turns[1].prompt, base.question);
    assert_eq!(driven.short_answer, base.short_answer);
}

#[test]
fn description_and_summary_name_the_essentials() {
    let mut data = bar(&[3.0, 42.0, 5.0]);
    data.chart_type = ChartType::Line;
    let d = gen_description(&data);
    for needle in ["line", "Solar Output", "Category", "Output", "EU", "3 points"] {
        assert!(d.long_answer.contains(needle), "{needle}: {}", d.long_answer);
    }
    let s = gen_summary(&data);
    assert!(s.short_answer.contains("42"));
    assert!(s.short_answer.contains("c1"));
    assert_eq!(s, gen_summary(&data));
}

#[test]
fn corrupted_short_answer_fails_replay() {
    let data = procedural_data(ChartType::Line, "rainfall", 8);
    let mut r = gen_all(&data, 8).unwrap().remove(4);
    assert!(replay(&r, &data).is_ok());
    r.short_answer.push('7');
    assert!(matches!(replay(&r, &data), Err(ReplayError::Mismatch { .. })));
}
