use super::*;
use crate::datagen::procedural_data;
use crate::qa::gen_all;

fn pool(chart_type: ChartType, charts: u64, styles: usize) -> Vec<PoolItem> {
    let mut out = Vec::new();
    for i in 0..charts {
        let data = procedural_data(chart_type, "rainfall", i);
        let records = gen_all(&data, i).unwrap();
        for s in 0..styles {
            out.push(PoolItem {
                chart_type,
                data_id: data.data_id.clone(),
                style_id: format!("{}-s{s:04}", chart_type.id()),
                image_path: format!("images/{}/{}__s{s}.png", chart_type.id(), data.data_id),
                annotate_values: s % 2 == 0,
                gold_data_path: format!("data/{}.json", data.data_id),
                records: records.clone(),
            });
        }
    }
    out
}

fn verdict(entry_id: &str, validity: bool, extractability: bool, values: Option<Vec<f64>>) -> Verdict {
    Verdict {
        entry_id: entry_id.into(),
        validity,
        extractability,
        extracted_values: values,
        annotator_id: "ann".into(),
        timestamp: 0,
    }
}

#[test]
fn three_per_type_gives_one_per_level() {
    let mut p = pool(ChartType::Line, 5, 2);
    p.extend(pool(ChartType::Pie, 5, 2));
    let m = sample_benchmark(&p, 3, 1, 0.5).unwrap();
    assert_eq!(m.entries.len(), 6);
    for counts in m.level_counts().values() {
        assert!(counts.values().all(|&c| c == 1), "{counts:?}");
    }
}

#[test]
fn levels_balance_and_charts_do_not_repeat() {
    let p = pool(ChartType::VerticalBar, 40, 4);
    let m = sample_benchmark(&p, 31, 9, 0.5).unwrap();
    let counts: Vec<usize> = m.level_counts()[&ChartType::VerticalBar].values().copied().collect();
    assert_eq!(counts.iter().sum::<usize>(), 31);
    assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
    let ids: BTreeSet<&str> = m.entries.iter().map(|e| e.data_id.as_str()).collect();
    assert_eq!(ids.len(), 31);
    let plain = m.entries.iter().filter(|e| !e.annotate_values).count();
    assert!(plain * 2 >= 31, "{plain}");
    assert_eq!(m, sample_benchmark(&p, 31, 9, 0.5).unwrap());
    assert_ne!(m, sample_benchmark(&p, 31, 10, 0.5).unwrap());
}

#[test]
fn small_pools_name_the_type() {
    let p = pool(ChartType::Radar, 4, 1);
    match sample_benchmark(&p, 6, 0, 0.5) {
        Err(Error::PoolShortfall { chart_type, needed: 6, available: 4 }) => assert_eq!(chart_type, ChartType::Radar),
        other => panic!("{other:?}"),
    }
}

#[test]
fn verdict_rules() {
    let m = sample_benchmark(&pool(ChartType::Line, 6, 2), 6, 3, 0.5).unwrap();
    let ids: Vec<String> = m.entries.iter().map(|e| e.entry_id.clone()).collect();
    let gold = |_: &ManifestEntry| Some(vec![100.0, 200.0]);
    let verdicts = vec![
        verdict(&ids[0], false, true, None),
        verdict(&ids[1], true, true, Some(vec![200.0, 100.0])),
        verdict(&ids[2], true, true, Some(vec![90.0, 210.0])),
        verdict(&ids[3], true, true, Some(vec![50.0, 400.0])),
        verdict(&ids[4], true, false, None),
        verdict("nope", true, true, None),
    ];
    let out = apply_verdicts(&m, &verdicts, gold, DEFAULT_RHO);
    let kept: Vec<&str> = out.manifest.entries.iter().map(|e| e.entry_id.as_str()).collect();
    assert_eq!(kept, vec![ids[1].as_str(), ids[2].as_str()]);
    assert_eq!(out.removed, vec![ids[0].clone(), ids[3].clone(), ids[4].clone()]);
    assert_eq!(out.pending, vec![ids[5].clone()]);
    assert_eq!(out.audit.len(), 1);

    // a later verdict cannot resurrect a removed entry
    let mut more = verdicts.clone();
    more.push(verdict(&ids[0], true, true, None));
    more.push(verdict(&ids[5], true, true, None));
    let again = apply_verdicts(&m, &more, gold, DEFAULT_RHO);
    assert!(again.removed.contains(&ids[0]));
    assert_eq!(again.manifest.entries.len(), 3);
}

#[test]
fn extracted_values_need_extractability() {
    assert!(verdict("a", true, false, Some(vec![1.0])).check().is_err());
    assert!(verdict("a", true, true, Some(vec![1.0])).check().is_ok());
}

#[test]
fn manifest_round_trips_and_detects_tampering() {
    let m = sample_benchmark(&pool(ChartType::Heatmap, 4, 2), 3, 2, 0.5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.jsonl");
    let sum = write_manifest(&path, &m).unwrap();
    assert_eq!(sum, manifest_bytes(&m).1);
    assert_eq!(read_manifest(&path).unwrap(), m);

    let text = std::fs::read_to_string(&path).unwrap().replacen("heatmap-0000", "heatmap-9999", 1);
    std::fs::write(&path, text).unwrap();
    assert!(matches!(read_manifest(&path), Err(Error::Checksum { .. })));
}
