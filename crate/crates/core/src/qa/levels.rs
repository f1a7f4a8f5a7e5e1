//! Literal, inferential and reasoning questions.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::derive::{evaluate, ReplayError};
use super::phrasing::{bank, capitalize, fill, join_list, pick, plural};
use super::{AxisSide, Derivation, DerivedValue, Operator, QaKind, QaRecord, Scope};
use crate::datagen::series::round_to;
use crate::model::view::{GroupKind, ViewCell};
use crate::model::{ChartData, DataView};
use crate::numfmt::format_number;
use crate::rng::{stream, Rng};

/// Failed draws tolerated before an inferential slot falls back to a Yes/No
/// comparison.
pub const MAX_RESAMPLES: usize = 8;

#[derive(Debug, Clone)]
pub struct Generated {
    pub kind: QaKind,
    pub records: Vec<QaRecord>,
    /// Fewer than the requested number of questions could be produced.
    pub short: bool,
}

#[derive(Debug, Clone)]
struct Spec {
    operator: Operator,
    /// Indices into the view's cells.
    operands: Vec<usize>,
    scope: Scope,
    threshold: Option<f64>,
    axis: Option<AxisSide>,
    negated: bool,
}

impl Spec {
    fn new(operator: Operator, operands: Vec<usize>, scope: Scope) -> Spec {
        Spec { operator, operands, scope, threshold: None, axis: None, negated: false }
    }
}

struct Ctx<'a> {
    data: &'a ChartData,
    view: DataView,
    rng: Rng,
}

impl<'a> Ctx<'a> {
    fn new(data: &'a ChartData, seed: u64) -> Self {
        Ctx { data, view: DataView::of(data), rng: stream(seed) }
    }

    fn cell(&self, i: usize) -> &ViewCell {
        &self.view.cells[i]
    }

    fn label_noun(&self) -> String {
        if self.view.label_noun.trim().is_empty() {
            "category".into()
        } else {
            self.view.label_noun.clone()
        }
    }

    fn primary(&self) -> Vec<usize> {
        (0..self.view.cells.len())
            .filter(|&i| !matches!(self.view.groups[self.cell(i).group].kind, GroupKind::Sizes { .. }))
            .collect()
    }

    fn scope_indices(&self, scope: Scope, operands: &[usize]) -> Vec<usize> {
        match scope {
            Scope::Operands => operands.to_vec(),
            Scope::Group(g) => self.view.groups[g].cells.clone(),
            Scope::All => self.primary(),
        }
    }

    fn scope_noun(&self, scope: Scope) -> String {
        match scope {
            Scope::Group(g) => self.view.group_noun(g),
            _ => "value".into(),
        }
    }

    fn scope_labels(&self, scope: Scope) -> String {
        match scope {
            Scope::Group(_) => plural(&self.label_noun()),
            _ => "data points".into(),
        }
    }

    fn derivation(&self, spec: &Spec) -> Result<Derivation, ReplayError> {
        let mut d = Derivation {
            operator: spec.operator,
            operands: spec.operands.iter().map(|&i| self.cell(i).at).collect(),
            scope: spec.scope,
            threshold: spec.threshold,
            axis: spec.axis,
            negated: spec.negated,
            result: DerivedValue::Bool(false),
        };
        d.result = evaluate(self.data, &self.view, &d)?;
        Ok(d)
    }

    fn realize(&mut self, kind: QaKind, spec: &Spec) -> Result<QaRecord, ReplayError> {
        let derivation = self.derivation(spec)?;
        let short = derivation.result.render();
        let question = self.question(spec);
        let long = format!("{} So the answer is {short}.", self.explain(spec, &derivation));
        let targets = if spec.operands.is_empty() {
            self.scope_indices(spec.scope, &[]).iter().map(|&i| self.cell(i).at).collect()
        } else {
            derivation.operands.clone()
        };
        Ok(QaRecord {
            qa_id: String::new(),
            kind,
            question,
            long_answer: long,
            short_answer: short,
            derivation,
            targets,
            turns: None,
            base_qa_id: None,
        })
    }

    fn question(&mut self, spec: &Spec) -> String {
        let template = pick(bank(spec.operator, spec.negated), &mut self.rng);
        let describe = |i: usize| self.view.describe(&self.view.cells[i]);
        let noun = self.scope_noun(spec.scope);
        let mut vars: Vec<(&str, String)> = vec![("noun", noun), ("label", self.label_noun())];
        match spec.operator {
            Operator::Lookup => vars.push(("cell", describe(spec.operands[0]))),
            Operator::AxisLabel => {
                let side = if spec.axis == Some(AxisSide::X) { "x" } else { "y" };
                vars.push(("axis", side.into()));
            }
            Operator::TrendIncreasing => {
                let cells = self.scope_indices(spec.scope, &spec.operands);
                vars.push(("first", self.cell(cells[0]).label.clone()));
                vars.push(("last", self.cell(*cells.last().expect("trend scope")).label.clone()));
            }
            Operator::Rank => vars.push(("target", self.cell(spec.operands[0]).label.clone())),
            Operator::Greater | Operator::Difference | Operator::Ratio | Operator::PercentChange => {
                vars.push(("a", describe(spec.operands[0])));
                vars.push(("b", describe(spec.operands[1])));
            }
            Operator::Sum | Operator::Mean => {
                let items: Vec<String> = spec.operands.iter().map(|&i| describe(i)).collect();
                vars.push(("list", join_list(&items)));
            }
            Operator::CountAbove => {
                vars.push(("labels", self.scope_labels(spec.scope)));
                vars.push(("threshold", format_number(spec.threshold.unwrap_or_default())));
            }
            _ => {}
        }
        let borrowed: Vec<(&str, &str)> = vars.iter().map(|(k, v)| (*k, v.as_str())).collect();
        fill(template, &borrowed)
    }

    fn listing(&self, cells: &[usize], scope: Scope) -> String {
        let parts: Vec<String> = cells
            .iter()
            .map(|&i| {
                let c = self.cell(i);
                match scope {
                    Scope::Group(_) => format!("{}: {}", c.label, format_number(c.value)),
                    _ => format!("{} is {}", self.view.describe(c), format_number(c.value)),
                }
            })
            .collect();
        parts.join("; ")
    }

    fn explain(&self, spec: &Spec, d: &Derivation) -> String {
        let f = format_number;
        let cells = self.scope_indices(spec.scope, &spec.operands);
        let values: Vec<f64> = cells.iter().map(|&i| self.cell(i).value).collect();
        let noun = self.scope_noun(spec.scope);
        let listed = || match spec.scope {
            Scope::Group(_) => format!("Listing the {noun} by {}: {}.", self.label_noun(), self.listing(&cells, spec.scope)),
            _ => format!("{}.", capitalize(&self.listing(&cells, spec.scope))),
        };
        let operand = |k: usize| {
            let c = self.cell(spec.operands[k]);
            (capitalize(&self.view.describe(c)), self.view.describe(c), c.value)
        };
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let answer = d.result.render();
        match spec.operator {
            Operator::Lookup => {
                let (a, _, v) = operand(0);
                format!("{a} is shown as {}.", f(v))
            }
            Operator::AxisLabel => {
                let side = if spec.axis == Some(AxisSide::X) { "x" } else { "y" };
                format!("The {side} axis is labeled \"{answer}\".")
            }
            Operator::Max => format!("{} The highest of these is {}.", listed(), f(hi)),
            Operator::Min => format!("{} The lowest of these is {}.", listed(), f(lo)),
            Operator::ArgMax => format!("{} The highest is {}, at {answer}.", listed(), f(hi)),
            Operator::ArgMin => format!("{} The lowest is {}, at {answer}.", listed(), f(lo)),
            Operator::TrendIncreasing => {
                let step = cells.windows(2).find(|w| self.cell(w[1]).value <= self.cell(w[0]).value);
                let verdict = match step {
                    None => "Every step is an increase.".to_string(),
                    Some(w) => format!(
                        "It does not rise from {} to {} ({} to {}).",
                        self.cell(w[0]).label,
                        self.cell(w[1]).label,
                        f(self.cell(w[0]).value),
                        f(self.cell(w[1]).value)
                    ),
                };
                format!("{} {verdict}", listed())
            }
            Operator::Rank => {
                let mut sorted = cells.clone();
                sorted.sort_by(|a, b| self.cell(*b).value.total_cmp(&self.cell(*a).value));
                let order: Vec<String> = sorted
                    .iter()
                    .map(|&i| format!("{} ({})", self.cell(i).label, f(self.cell(i).value)))
                    .collect();
                format!(
                    "Sorted from highest to lowest {noun}: {}. {} is in position {answer}.",
                    order.join(", "),
                    self.cell(spec.operands[0]).label
                )
            }
            Operator::Greater => {
                let ((a, _, va), (_, b, vb)) = (operand(0), operand(1));
                let rel = if va > vb { "greater than" } else { "not greater than" };
                format!("{a} is {} and {b} is {}. {} is {rel} {}.", f(va), f(vb), f(va), f(vb))
            }
            Operator::Sum | Operator::Mean => {
                let parts: Vec<String> = (0..spec.operands.len())
                    .map(|k| {
                        let (_, name, v) = operand(k);
                        format!("{name} is {}", f(v))
                    })
                    .collect();
                let terms: Vec<String> = values.iter().map(|v| f(*v)).collect();
                let sum: f64 = values.iter().sum();
                let head = capitalize(&parts.join(", "));
                if spec.operator == Operator::Sum {
                    format!("{head}. Adding them gives {} = {answer}.", terms.join(" + "))
                } else {
                    format!(
                        "{head}. Their sum is {} = {} and there are {} values, so the mean is {} / {} = {answer}.",
                        terms.join(" + "),
                        f(sum),
                        values.len(),
                        f(sum),
                        values.len()
                    )
                }
            }
            Operator::Difference | Operator::Ratio | Operator::PercentChange => {
                let ((a, _, va), (_, b, vb)) = (operand(0), operand(1));
                let calc = match spec.operator {
                    Operator::Difference => format!("{} - {} = {answer}", f(va), f(vb)),
                    Operator::Ratio => format!("{} / {} = {answer}", f(va), f(vb)),
                    _ => format!("({} - {}) / {} x 100 = {answer}", f(vb), f(va), f(va)),
                };
                format!("{a} is {} and {b} is {}. {calc}.", f(va), f(vb))
            }
            Operator::CountAbove => {
                let t = spec.threshold.unwrap_or_default();
                let above: Vec<String> = values.iter().filter(|v| **v > t).map(|v| f(*v)).collect();
                if above.is_empty() {
                    format!("{} None of them is above {}, so the count is {answer}.", listed(), f(t))
                } else {
                    format!(
                        "{} The values above {} are {}, so the count is {answer}.",
                        listed(),
                        f(t),
                        join_list(&above)
                    )
                }
            }
            Operator::Range => format!(
                "{} The highest is {} and the lowest is {}, so the range is {} - {} = {answer}.",
                listed(),
                f(hi),
                f(lo),
                f(hi),
                f(lo)
            ),
            Operator::Describe | Operator::Summarize => String::new(),
        }
    }

    /// Random comparison of two cells with different values, preferring
    /// cells of one group.
    fn comparison(&mut self, used: &HashSet<Vec<usize>>) -> Option<Spec> {
        let primary = self.primary();
        for attempt in 0..64 {
            let a = *primary.choose(&mut self.rng)?;
            let pool: Vec<usize> = if attempt < 32 {
                self.view.groups[self.cell(a).group].cells.clone()
            } else {
                primary.clone()
            };
            let b = *pool.choose(&mut self.rng)?;
            if a == b || self.cell(a).value == self.cell(b).value {
                continue;
            }
            let operands = vec![a, b];
            if !used.contains(&operands) {
                return Some(Spec::new(Operator::Greater, operands, Scope::Operands));
            }
        }
        None
    }

    fn sample(&mut self, pool: &[usize], lo: usize) -> Vec<usize> {
        let hi = pool.len().min(4);
        let m = self.rng.gen_range(lo..=hi);
        let mut picked: Vec<usize> = pool.choose_multiple(&mut self.rng, m).copied().collect();
        picked.sort_unstable();
        picked
    }

    /// A round threshold strictly between two adjacent distinct values.
    fn threshold(&mut self, cells: &[usize]) -> Option<f64> {
        let mut values: Vec<f64> = cells.iter().map(|&i| self.cell(i).value).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        if values.len() < 2 {
            return None;
        }
        let i = self.rng.gen_range(0..values.len() - 1);
        let (lo, hi) = (values[i], values[i + 1]);
        let mid = (lo + hi) / 2.0;
        (0..=2)
            .map(|decimals| round_to(mid, decimals))
            .find(|t| *t > lo && *t < hi && format_number(*t).parse::<f64>().ok() == Some(*t))
    }
}

/// Reorders specs so that consecutive picks cycle through operators.
fn interleave(specs: Vec<Spec>) -> Vec<Spec> {
    let mut order: Vec<Operator> = Vec::new();
    let mut buckets: BTreeMap<usize, Vec<Spec>> = BTreeMap::new();
    for s in specs {
        let slot = order.iter().position(|o| *o == s.operator).unwrap_or_else(|| {
            order.push(s.operator);
            order.len() - 1
        });
        buckets.entry(slot).or_default().push(s);
    }
    let mut out = Vec::new();
    let mut round = 0;
    loop {
        let mut any = false;
        for bucket in buckets.values() {
            if let Some(s) = bucket.get(round) {
                out.push(s.clone());
                any = true;
            }
        }
        if !any {
            return out;
        }
        round += 1;
    }
}

fn take(ctx: &mut Ctx, kind: QaKind, specs: Vec<Spec>, k: usize, fallback: bool) -> Generated {
    let mut records = Vec::new();
    let mut used: HashSet<Vec<usize>> = HashSet::new();
    let mut questions: HashSet<String> = HashSet::new();
    let mut failures = 0;
    let mut push = |ctx: &mut Ctx, spec: &Spec, records: &mut Vec<QaRecord>, used: &mut HashSet<Vec<usize>>| {
        match ctx.realize(kind, spec) {
            Ok(r) if questions.insert(r.question.clone()) => {
                if spec.operator == Operator::Greater {
                    used.insert(spec.operands.clone());
                }
                records.push(r);
                Ok(true)
            }
            Ok(_) => Ok(false),
            Err(e) => Err(e),
        }
    };
    for spec in &specs {
        if records.len() == k {
            break;
        }
        if let Err(ReplayError::Ambiguous(_)) = push(ctx, spec, &mut records, &mut used) {
            failures += 1;
            if fallback && failures == MAX_RESAMPLES {
                failures = 0;
                if let Some(s) = ctx.comparison(&used) {
                    let _ = push(ctx, &s, &mut records, &mut used);
                }
            }
        }
    }
    let mut tries = 0;
    while fallback && records.len() < k && tries < 32 {
        tries += 1;
        match ctx.comparison(&used) {
            Some(s) => {
                let _ = push(ctx, &s, &mut records, &mut used);
            }
            None => break,
        }
    }
    let short = records.len() < k;
    Generated { kind, records, short }
}

/// Point lookups, plus occasionally an axis-label question.
pub fn gen_literal(data: &ChartData, k: usize, seed: u64) -> Generated {
    let mut ctx = Ctx::new(data, seed);
    let mut cells: Vec<usize> = (0..ctx.view.cells.len()).collect();
    cells.shuffle(&mut ctx.rng);
    // spread lookups across groups
    let mut by_group: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in cells {
        by_group.entry(ctx.cell(i).group).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = by_group.into_values().collect();
    groups.shuffle(&mut ctx.rng);
    let mut specs = Vec::new();
    for round in 0.. {
        let before = specs.len();
        for g in &groups {
            if let Some(&i) = g.get(round) {
                specs.push(Spec::new(Operator::Lookup, vec![i], Scope::Operands));
            }
        }
        if specs.len() == before {
            break;
        }
    }
    let mut axes = Vec::new();
    for (side, axis) in [(AxisSide::X, &data.content.x_axis), (AxisSide::Y, &data.content.y_axis)] {
        if !axis.label.trim().is_empty() {
            let mut s = Spec::new(Operator::AxisLabel, vec![], Scope::Operands);
            s.axis = Some(side);
            axes.push(s);
        }
    }
    axes.shuffle(&mut ctx.rng);
    if !axes.is_empty() && ctx.rng.gen_bool(0.25) {
        let at = ctx.rng.gen_range(0..k.min(specs.len()) + 1);
        specs.insert(at, axes.remove(0));
    }
    // charts with few values fall back on axis labels
    specs.extend(axes);
    take(&mut ctx, QaKind::Literal, specs, k, false)
}

/// Extremes, argmax/argmin, trend and rank questions.
pub fn gen_inferential(data: &ChartData, k: usize, seed: u64) -> Generated {
    let mut ctx = Ctx::new(data, seed);
    let mut specs = Vec::new();
    for g in 0..ctx.view.groups.len() {
        let cells = ctx.view.groups[g].cells.clone();
        if cells.len() < 2 {
            continue;
        }
        let scope = Scope::Group(g);
        specs.push(Spec::new(Operator::Max, vec![], scope));
        specs.push(Spec::new(Operator::Min, vec![], scope));
        if ctx.view.labels_are_categorical(g) {
            specs.push(Spec::new(Operator::ArgMax, vec![], scope));
            specs.push(Spec::new(Operator::ArgMin, vec![], scope));
            let target = *cells.choose(&mut ctx.rng).expect("non-empty group");
            specs.push(Spec::new(Operator::Rank, vec![target], scope));
        }
        if ctx.view.ordered && cells.len() >= 3 {
            specs.push(Spec::new(Operator::TrendIncreasing, vec![], scope));
        }
    }
    if ctx.view.groups.len() > 1 {
        specs.push(Spec::new(Operator::Max, vec![], Scope::All));
        specs.push(Spec::new(Operator::Min, vec![], Scope::All));
    }
    specs.shuffle(&mut ctx.rng);
    let specs = interleave(specs);
    take(&mut ctx, QaKind::Inferential, specs, k, true)
}

/// Arithmetic over named values: sum, difference, mean, ratio, percent
/// change, count above a threshold and range.
pub fn gen_reasoning(data: &ChartData, k: usize, seed: u64) -> Generated {
    let mut ctx = Ctx::new(data, seed);
    let mut pools: Vec<(Scope, Vec<usize>)> = (0..ctx.view.groups.len())
        .filter(|&g| ctx.view.groups[g].cells.len() >= 2)
        .map(|g| (Scope::Group(g), ctx.view.groups[g].cells.clone()))
        .collect();
    if ctx.view.groups.len() > 1 {
        let all = ctx.primary();
        if all.len() >= 2 {
            pools.push((Scope::All, all));
        }
    }
    let mut specs = Vec::new();
    for (scope, pool) in &pools {
        specs.push(Spec::new(Operator::Sum, ctx.sample(pool, 2), Scope::Operands));
        specs.push(Spec::new(Operator::Mean, ctx.sample(pool, 2), Scope::Operands));
        let pair: Vec<usize> = pool.choose_multiple(&mut ctx.rng, 2).copied().collect();
        let (a, b) = (pair[0], pair[1]);
        if ctx.cell(a).value != ctx.cell(b).value {
            let (hi, lo) = if ctx.cell(a).value > ctx.cell(b).value { (a, b) } else { (b, a) };
            specs.push(Spec::new(Operator::Difference, vec![hi, lo], Scope::Operands));
        }
        let pair: Vec<usize> = pool.choose_multiple(&mut ctx.rng, 2).copied().collect();
        specs.push(Spec::new(Operator::Ratio, pair, Scope::Operands));
        let mut pair: Vec<usize> = pool.choose_multiple(&mut ctx.rng, 2).copied().collect();
        pair.sort_unstable();
        specs.push(Spec::new(Operator::PercentChange, pair, Scope::Operands));
        if let Some(t) = ctx.threshold(pool) {
            let mut s = Spec::new(Operator::CountAbove, vec![], *scope);
            s.threshold = Some(t);
            specs.push(s);
        }
        specs.push(Spec::new(Operator::Range, vec![], *scope));
    }
    specs.shuffle(&mut ctx.rng);
    let specs = interleave(specs);
    take(&mut ctx, QaKind::Reasoning, specs, k, false)
}

/// The same question with its Yes/No sense inverted. `None` for records
/// whose answer is not Yes/No.
pub fn negation(data: &ChartData, record: &QaRecord, seed: u64) -> Option<QaRecord> {
    if !record.derivation.operator.yields_bool() {
        return None;
    }
    let mut ctx = Ctx::new(data, seed);
    let operands = record
        .derivation
        .operands
        .iter()
        .map(|at| ctx.view.cells.iter().position(|c| &c.at == at))
        .collect::<Option<Vec<_>>>()?;
    let spec = Spec {
        operator: record.derivation.operator,
        operands,
        scope: record.derivation.scope,
        threshold: record.derivation.threshold,
        axis: record.derivation.axis,
        negated: !record.derivation.negated,
    };
    ctx.realize(record.kind, &spec).ok()
}
