//! Answer and extraction metrics: relaxed accuracy, RNSS, RMS F1, BLEU-4,
//! and scoring of prediction files against a benchmark manifest.

mod assign;
mod score;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use assign::min_cost_assignment;
pub use score::{parse_predictions, score_run, EvalReport, LevelScore, Prediction, TableEntry};

/// Relative margin for numeric answers.
pub const RELAXED_MARGIN: f64 = 0.05;

/// Lowercase, trim, drop `%`, currency symbols and thousands separators.
pub fn normalize_answer(text: &str) -> String {
    let t: String = text
        .trim()
        .to_lowercase()
        .chars()
        .filter(|c| !matches!(c, '%' | '$' | '€' | '£' | '¥' | ','))
        .collect();
    t.trim().trim_end_matches('.').trim().to_string()
}

pub fn parse_answer_number(text: &str) -> Option<f64> {
    normalize_answer(text).parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Numbers within 5% of gold (inclusive; gold zero needs exact zero),
/// otherwise normalized string equality.
pub fn relaxed_accuracy(pred: &str, gold: &str) -> bool {
    match (parse_answer_number(pred), parse_answer_number(gold)) {
        (Some(p), Some(0.0)) => p == 0.0,
        (Some(p), Some(g)) => {
            // tolerate representation error right at the boundary
            (p - g).abs() <= RELAXED_MARGIN * g.abs() * (1.0 + 1e-12)
        }
        _ => normalize_answer(pred) == normalize_answer(gold),
    }
}

/// Relative distance capped at 1; a zero target matches only zero.
pub fn relative_cost(p: f64, t: f64) -> f64 {
    if t == 0.0 {
        if p == 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        ((p - t).abs() / t.abs()).min(1.0)
    }
}

/// Relative number set similarity of two multisets.
pub fn rnss(pred: &[f64], gold: &[f64]) -> f64 {
    let n = pred.len().max(gold.len());
    if n == 0 {
        return 1.0;
    }
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (pred.get(i), gold.get(j)) {
                    (Some(&p), Some(&t)) => relative_cost(p, t),
                    _ => 1.0,
                })
                .collect()
        })
        .collect();
    let (_, total) = min_cost_assignment(&cost);
    (1.0 - total / n as f64).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rms {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn key_text(row: &str, column: &str) -> String {
    format!("{} {}", normalize_answer(row), normalize_answer(column))
}

/// Similarity of two table entries: key similarity times value similarity.
pub fn entry_similarity(p: &TableEntry, t: &TableEntry) -> f64 {
    let key = strsim::normalized_levenshtein(&key_text(&p.0, &p.1), &key_text(&t.0, &t.1));
    key * (1.0 - relative_cost(p.2, t.2))
}

/// Relative mapping similarity between a predicted and a gold table.
pub fn rms_f1(pred: &[TableEntry], gold: &[TableEntry]) -> Rms {
    if pred.is_empty() && gold.is_empty() {
        return Rms { precision: 1.0, recall: 1.0, f1: 1.0 };
    }
    if pred.is_empty() || gold.is_empty() {
        return Rms { precision: 0.0, recall: 0.0, f1: 0.0 };
    }
    let n = pred.len().max(gold.len());
    let sim: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (pred.get(i), gold.get(j)) {
                    (Some(p), Some(t)) => entry_similarity(p, t),
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    let cost: Vec<Vec<f64>> = sim.iter().map(|r| r.iter().map(|s| 1.0 - s).collect()).collect();
    let (cols, _) = min_cost_assignment(&cost);
    let total: f64 = cols.iter().enumerate().map(|(i, &j)| sim[i][j]).sum();
    let precision = (total / pred.len() as f64).min(1.0);
    let recall = (total / gold.len() as f64).min(1.0);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Rms { precision, recall, f1 }
}

/// Lowercased whitespace tokens with surrounding punctuation removed.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU over orders 1..=4 with brevity penalty. An order with no
/// clipped matches contributes (0 + 1) / (total + 1).
pub fn bleu4(candidates: &[String], references: &[String]) -> Result<f64> {
    if candidates.len() != references.len() || candidates.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "bleu4 needs equal non-empty lists, got {} candidates and {} references",
            candidates.len(),
            references.len()
        )));
    }
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];
    let (mut cand_len, mut ref_len) = (0usize, 0usize);
    for (c, r) in candidates.iter().zip(references) {
        let (c, r) = (tokenize(c), tokenize(r));
        cand_len += c.len();
        ref_len += r.len();
        for n in 1..=4 {
            let rc = ngrams(&r, n);
            for (g, k) in ngrams(&c, n) {
                matches[n - 1] += k.min(rc.get(g).copied().unwrap_or(0));
            }
            totals[n - 1] += c.len().saturating_sub(n - 1);
        }
    }
    if cand_len == 0 {
        return Ok(0.0);
    }
    let log_p: f64 = (0..4)
        .map(|i| {
            let p = if matches[i] == 0 {
                1.0 / (totals[i] as f64 + 1.0)
            } else {
                matches[i] as f64 / totals[i] as f64
            };
            p.ln() / 4.0
        })
        .sum();
    let bp = if cand_len > ref_len { 1.0 } else { (1.0 - ref_len as f64 / cand_len as f64).exp() };
    Ok((bp * log_p.exp()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relaxed_boundaries() {
        assert!(relaxed_accuracy("100", "100"));
        assert!(relaxed_accuracy("105", "100"));
        assert!(relaxed_accuracy("95", "100"));
        assert!(!relaxed_accuracy("105.1", "100"));
        assert!(relaxed_accuracy("Yes", "yes"));
        assert!(relaxed_accuracy("$1,200", "1200"));
        assert!(relaxed_accuracy("12%", "12"));
        assert!(relaxed_accuracy("0", "0"));
        assert!(!relaxed_accuracy("0.001", "0"));
        assert!(!relaxed_accuracy("North", "South"));
    }

    #[test]
    fn rnss_examples() {
        assert!((rnss(&[90.0, 210.0], &[100.0, 200.0]) - 0.925).abs() < 1e-9);
        assert_eq!(rnss(&[1.0, 2.0], &[2.0, 1.0]), 1.0);
        assert_eq!(rnss(&[], &[5.0]), 0.0);
        assert_eq!(rnss(&[5.0], &[]), 0.0);
    }

    #[test]
    fn rms_identical_and_empty() {
        let t: Vec<TableEntry> = vec![
            ("a".into(), "x".into(), 1.0),
            ("a".into(), "y".into(), 2.0),
            ("b".into(), "x".into(), 3.0),
            ("b".into(), "y".into(), 4.0),
        ];
        assert_eq!(rms_f1(&t, &t).f1, 1.0);
        assert_eq!(rms_f1(&[], &t).f1, 0.0);
        let mut shifted = t.clone();
        shifted[2].2 = 3.3;
        let f1 = rms_f1(&shifted, &t).f1;
        assert!(f1 > 0.75 && f1 < 1.0, "{f1}");
    }

    #[test]
    fn bleu_identical_and_disjoint() {
        let s = vec!["the red bar is the tallest one".to_string()];
        assert!((bleu4(&s, &s).unwrap() - 1.0).abs() < 1e-12);
        assert!(bleu4(&s, &[]).is_err());
    }
}
