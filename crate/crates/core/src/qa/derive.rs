use std::fmt;

use super::{text, AxisSide, Derivation, DerivedValue, Operator, QaRecord, Scope};
use crate::model::view::{GroupKind, ViewCell};
use crate::model::{ChartData, DataView};

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayError {
    MissingOperand(String),
    /// The question has no single correct answer (tie, zero denominator).
    Ambiguous(String),
    Malformed(String),
    Mismatch { expected: String, found: String },
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayError::MissingOperand(m) => write!(f, "missing operand: {m}"),
            ReplayError::Ambiguous(m) => write!(f, "ambiguous: {m}"),
            ReplayError::Malformed(m) => write!(f, "malformed derivation: {m}"),
            ReplayError::Mismatch { expected, found } => {
                write!(f, "replay gives `{expected}`, record says `{found}`")
            }
        }
    }
}

impl std::error::Error for ReplayError {}

/// Cells an aggregate ranges over. `All` skips bubble sizes, which do not
/// share the y axis with the other values.
pub(crate) fn scope_cells<'v>(
    view: &'v DataView,
    scope: Scope,
    operands: &[&'v ViewCell],
) -> Result<Vec<&'v ViewCell>, ReplayError> {
    match scope {
        Scope::Operands => Ok(operands.to_vec()),
        Scope::Group(g) => {
            if g >= view.groups.len() {
                return Err(ReplayError::Malformed(format!("group {g} out of range")));
            }
            Ok(view.group_cells(g).collect())
        }
        Scope::All => Ok(primary_cells(view)),
    }
}

pub(crate) fn primary_cells(view: &DataView) -> Vec<&ViewCell> {
    view.cells
        .iter()
        .filter(|c| !matches!(view.groups[c.group].kind, GroupKind::Sizes { .. }))
        .collect()
}

fn unique_extreme<'v>(cells: &[&'v ViewCell], highest: bool) -> Result<&'v ViewCell, ReplayError> {
    let best = cells
        .iter()
        .map(|c| c.value)
        .fold(if highest { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
            if highest { a.max(b) } else { a.min(b) }
        });
    let mut hits = cells.iter().filter(|c| c.value == best);
    let first = hits.next().ok_or_else(|| ReplayError::Malformed("empty scope".into()))?;
    if hits.next().is_some() {
        return Err(ReplayError::Ambiguous(format!("several cells hold {best}")));
    }
    Ok(first)
}

/// Applies a derivation's operator to the data, ignoring its stored result.
pub fn evaluate(data: &ChartData, view: &DataView, d: &Derivation) -> Result<DerivedValue, ReplayError> {
    let operands = d
        .operands
        .iter()
        .map(|at| view.find(at).ok_or_else(|| ReplayError::MissingOperand(format!("{at:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let need = |n: usize| {
        if operands.len() < n {
            Err(ReplayError::Malformed(format!("{:?} needs {n} operands", d.operator)))
        } else {
            Ok(())
        }
    };
    let scope = scope_cells(view, d.scope, &operands)?;
    let values: Vec<f64> = scope.iter().map(|c| c.value).collect();
    if values.is_empty() && !matches!(d.operator, Operator::AxisLabel | Operator::Describe) {
        return Err(ReplayError::Malformed("empty scope".into()));
    }
    use Operator::*;
    let out = match d.operator {
        Describe => DerivedValue::Text(text::description_text(data)),
        Summarize => DerivedValue::Text(text::summary_text(view)),
        Lookup => {
            need(1)?;
            DerivedValue::Number(operands[0].value)
        }
        AxisLabel => {
            let axis = match d.axis {
                Some(AxisSide::X) => &data.content.x_axis,
                Some(AxisSide::Y) => &data.content.y_axis,
                None => return Err(ReplayError::Malformed("axis label without axis".into())),
            };
            DerivedValue::Text(axis.label.clone())
        }
        Max => DerivedValue::Number(values.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        Min => DerivedValue::Number(values.iter().copied().fold(f64::INFINITY, f64::min)),
        ArgMax => DerivedValue::Text(unique_extreme(&scope, true)?.label.clone()),
        ArgMin => DerivedValue::Text(unique_extreme(&scope, false)?.label.clone()),
        TrendIncreasing => {
            if values.len() < 2 {
                return Err(ReplayError::Malformed("trend needs two values".into()));
            }
            DerivedValue::Bool(values.windows(2).all(|w| w[1] > w[0]))
        }
        Rank => {
            need(1)?;
            let target = operands[0].value;
            if scope.iter().filter(|c| c.value == target).count() != 1 {
                return Err(ReplayError::Ambiguous(format!("rank of tied value {target}")));
            }
            DerivedValue::Number(1.0 + values.iter().filter(|v| **v > target).count() as f64)
        }
        Greater => {
            need(2)?;
            let (a, b) = (operands[0].value, operands[1].value);
            if a == b {
                return Err(ReplayError::Ambiguous("equal values compared".into()));
            }
            DerivedValue::Bool(a > b)
        }
        Sum => DerivedValue::Number(values.iter().sum()),
        Mean => DerivedValue::Number(values.iter().sum::<f64>() / values.len() as f64),
        Difference => {
            need(2)?;
            DerivedValue::Number(operands[0].value - operands[1].value)
        }
        Ratio => {
            need(2)?;
            if operands[1].value == 0.0 {
                return Err(ReplayError::Ambiguous("division by zero".into()));
            }
            DerivedValue::Number(operands[0].value / operands[1].value)
        }
        PercentChange => {
            need(2)?;
            let (from, to) = (operands[0].value, operands[1].value);
            if from == 0.0 {
                return Err(ReplayError::Ambiguous("percent change from zero".into()));
            }
            DerivedValue::Number((to - from) / from * 100.0)
        }
        CountAbove => {
            let t = d
                .threshold
                .ok_or_else(|| ReplayError::Malformed("count without threshold".into()))?;
            DerivedValue::Number(values.iter().filter(|v| **v > t).count() as f64)
        }
        Range => {
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            DerivedValue::Number(hi - lo)
        }
    };
    Ok(match out {
        DerivedValue::Bool(b) if d.negated => DerivedValue::Bool(!b),
        other => other,
    })
}

/// Recomputes a record's answer from the data and checks both the stored
/// exact result and the formatted short answer.
pub fn replay(record: &QaRecord, data: &ChartData) -> Result<(), ReplayError> {
    let view = DataView::of(data);
    let got = evaluate(data, &view, &record.derivation)?;
    if got != record.derivation.result {
        return Err(ReplayError::Mismatch {
            expected: format!("{got:?}"),
            found: format!("{:?}", record.derivation.result),
        });
    }
    let short = got.render();
    if short != record.short_answer {
        return Err(ReplayError::Mismatch {
            expected: short,
            found: record.short_answer.clone(),
        });
    }
    Ok(())
}
