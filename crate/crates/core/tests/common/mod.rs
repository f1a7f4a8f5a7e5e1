//! Test oracles that recompute answers and metric values from first
//! principles: raw payload fields, exhaustive search, no library helpers
//! beyond number formatting.

#![allow(dead_code)]

use chartsynth::model::view::bin_label;
use chartsynth::model::{ChartData, ChartType, Field, Payload, ValueRef};
use chartsynth::numfmt::format_number;
use chartsynth::qa::{AxisSide, Derivation, DerivedValue, Operator, Scope};

#[derive(Debug, Clone)]
pub struct Cell {
    pub group: usize,
    pub at: ValueRef,
    pub label: String,
    pub value: f64,
    /// Bubble sizes are not on the y axis and stay out of whole-chart scopes.
    pub size: bool,
}

fn type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Every number of the chart, grouped the way aggregate questions scope them.
pub fn cells(data: &ChartData) -> Vec<Cell> {
    let mut groups: Vec<Vec<(ValueRef, String, f64, bool)>> = Vec::new();
    let r = |series, index, field| ValueRef { series, index, field };
    match &data.content.payload {
        Payload::Series(series) => {
            for (s, ser) in series.iter().enumerate() {
                groups.push(ser.points.iter().enumerate().map(|(i, p)| (r(s, i, Field::Value), p.label.clone(), p.value, false)).collect());
            }
        }
        Payload::Slices(slices) => {
            groups.push(slices.iter().enumerate().map(|(i, p)| (r(0, i, Field::Value), p.label.clone(), p.value, false)).collect());
        }
        Payload::Points(series) => {
            for (s, ser) in series.iter().enumerate() {
                groups.push(ser.points.iter().enumerate().map(|(i, p)| (r(s, i, Field::Y), format_number(p[0]), p[1], false)).collect());
            }
            if data.chart_type == ChartType::Bubble {
                for (s, ser) in series.iter().enumerate() {
                    groups.push(
                        ser.points
                            .iter()
                            .enumerate()
                            .filter(|(_, p)| p.len() > 2)
                            .map(|(i, p)| (r(s, i, Field::Size), format_number(p[0]), p[2], true))
                            .collect(),
                    );
                }
            }
        }
        Payload::Bins(bins) => {
            groups.push(bins.iter().enumerate().map(|(i, b)| (r(0, i, Field::Count), bin_label(b.lower, b.upper), b.count, false)).collect());
        }
        Payload::Samples(samples) => {
            let probs = [0.0, 0.25, 0.5, 0.75, 1.0];
            for (k, field) in Field::BOX_STATS.into_iter().enumerate() {
                let mut g = Vec::new();
                for (s, grp) in samples.iter().enumerate() {
                    if grp.values.is_empty() {
                        continue;
                    }
                    let mut sorted = grp.values.clone();
                    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    g.push((r(s, 0, field), grp.name.clone(), type7(&sorted, probs[k]), false));
                }
                groups.push(g);
            }
        }
        Payload::Candles(candles) => {
            for field in Field::OHLC {
                groups.push(
                    candles
                        .iter()
                        .enumerate()
                        .map(|(i, c)| {
                            let v = match field {
                                Field::Open => c.open,
                                Field::Close => c.close,
                                Field::High => c.high,
                                _ => c.low,
                            };
                            (r(0, i, field), c.time.clone(), v, false)
                        })
                        .collect(),
                );
            }
        }
        Payload::Cells(heat) => {
            let mut rows: Vec<&str> = Vec::new();
            for c in heat {
                if !rows.contains(&c.row.as_str()) {
                    rows.push(&c.row);
                }
            }
            for row in rows {
                groups.push(
                    heat.iter()
                        .enumerate()
                        .filter(|(_, c)| c.row == row)
                        .map(|(i, c)| (r(0, i, Field::Value), c.column.clone(), c.value, false))
                        .collect(),
                );
            }
        }
    }
    groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .enumerate()
        .flat_map(|(gi, g)| g.into_iter().map(move |(at, label, value, size)| Cell { group: gi, at, label, value, size }))
        .collect()
}

/// The one cell strictly above (or below) every other, by pairwise comparison.
fn strict_extreme(scope: &[&Cell], highest: bool) -> Option<String> {
    let wins = |a: &Cell, b: &Cell| if highest { a.value > b.value } else { a.value < b.value };
    let mut found = scope
        .iter()
        .enumerate()
        .filter(|(i, c)| scope.iter().enumerate().all(|(j, d)| j == *i || wins(c, d)))
        .map(|(_, c)| c.label.clone());
    let first = found.next();
    if found.next().is_some() {
        None
    } else {
        first
    }
}

/// Recomputes a derivation from the raw payload. `None` when the question
/// has no single answer.
pub fn answer(data: &ChartData, d: &Derivation) -> Option<DerivedValue> {
    let all = cells(data);
    let operands: Vec<&Cell> = d.operands.iter().map(|at| all.iter().find(|c| c.at == *at)).collect::<Option<_>>()?;
    let scope: Vec<&Cell> = match d.scope {
        Scope::Operands => operands.clone(),
        Scope::Group(g) => all.iter().filter(|c| c.group == g).collect(),
        Scope::All => all.iter().filter(|c| !c.size).collect(),
    };
    let values: Vec<f64> = scope.iter().map(|c| c.value).collect();
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    use DerivedValue::{Bool, Number, Text};
    let out = match d.operator {
        Operator::Lookup => Number(operands.first()?.value),
        Operator::AxisLabel => Text(match d.axis? {
            AxisSide::X => data.content.x_axis.label.clone(),
            AxisSide::Y => data.content.y_axis.label.clone(),
        }),
        Operator::Max => Number(*sorted.last()?),
        Operator::Min => Number(*sorted.first()?),
        Operator::ArgMax => Text(strict_extreme(&scope, true)?),
        Operator::ArgMin => Text(strict_extreme(&scope, false)?),
        Operator::TrendIncreasing => {
            if values.len() < 2 {
                return None;
            }
            Bool((0..values.len()).all(|i| (i + 1..values.len()).all(|j| values[j] > values[i])))
        }
        Operator::Rank => {
            let target = operands.first()?.value;
            if values.iter().filter(|v| **v == target).count() != 1 {
                return None;
            }
            let desc: Vec<f64> = sorted.iter().rev().copied().collect();
            Number((desc.iter().position(|v| *v == target)? + 1) as f64)
        }
        Operator::Greater => {
            let (a, b) = (operands.first()?.value, operands.get(1)?.value);
            if a == b {
                return None;
            }
            Bool(a > b)
        }
        Operator::Sum => Number(values.iter().fold(0.0, |acc, v| acc + v)),
        Operator::Mean => {
            if values.is_empty() {
                return None;
            }
            Number(values.iter().fold(0.0, |acc, v| acc + v) / values.len() as f64)
        }
        Operator::Difference => Number(operands.first()?.value - operands.get(1)?.value),
        Operator::Ratio => {
            let den = operands.get(1)?.value;
            if den == 0.0 {
                return None;
            }
            Number(operands[0].value / den)
        }
        Operator::PercentChange => {
            let (from, to) = (operands.first()?.value, operands.get(1)?.value);
            if from == 0.0 {
                return None;
            }
            Number((to - from) / from * 100.0)
        }
        Operator::CountAbove => {
            let t = d.threshold?;
            Number(values.iter().filter(|v| **v > t).count() as f64)
        }
        Operator::Range => Number(sorted.last()? - sorted.first()?),
        Operator::Describe | Operator::Summarize => return None,
    };
    Some(match out {
        Bool(b) if d.negated => Bool(!b),
        other => other,
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn rel(p: f64, t: f64) -> f64 {
    if t == 0.0 {
        if p == 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        ((p - t) / t).abs().min(1.0)
    }
}

/// RNSS by trying every pairing; unmatched numbers cost 1.
pub fn rnss_brute(pred: &[f64], gold: &[f64]) -> f64 {
    let n = pred.len().max(gold.len());
    if n == 0 {
        return 1.0;
    }
    let best = permutations(n)
        .iter()
        .map(|perm| {
            (0..n)
                .map(|i| match (pred.get(i), gold.get(perm[i])) {
                    (Some(&p), Some(&t)) => rel(p, t),
                    _ => 1.0,
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    1.0 - best / n as f64
}

fn levenshtein(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

fn key(row: &str, col: &str) -> String {
    format!("{} {}", row.trim().to_lowercase(), col.trim().to_lowercase())
}

/// RMS F1 by trying every pairing of entries.
pub fn rms_f1_brute(pred: &[(String, String, f64)], gold: &[(String, String, f64)]) -> f64 {
    if pred.is_empty() && gold.is_empty() {
        return 1.0;
    }
    if pred.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let sim = |p: &(String, String, f64), t: &(String, String, f64)| {
        let (kp, kt) = (key(&p.0, &p.1), key(&t.0, &t.1));
        let longest = kp.chars().count().max(kt.chars().count());
        let ks = if longest == 0 { 1.0 } else { 1.0 - levenshtein(&kp, &kt) as f64 / longest as f64 };
        ks * (1.0 - rel(p.2, t.2))
    };
    let n = pred.len().max(gold.len());
    let best = permutations(n)
        .iter()
        .map(|perm| {
            (0..n)
                .map(|i| match (pred.get(i), gold.get(perm[i])) {
                    (Some(p), Some(t)) => sim(p, t),
                    _ => 0.0,
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let precision = (best / pred.len() as f64).min(1.0);
    let recall = (best / gold.len() as f64).min(1.0);
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}
