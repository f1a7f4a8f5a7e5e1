//! Question phrasing banks. Placeholders in braces are filled by [`fill`].

use rand::Rng as _;

use super::Operator;
use crate::rng::Rng;

pub const LOOKUP: &[&str] = &[
    "What is {cell}?",
    "According to the chart, what is {cell}?",
    "How much is {cell}?",
    "Reading the chart, what is {cell}?",
];

pub const AXIS_LABEL: &[&str] = &[
    "What is the label of the {axis} axis?",
    "Which quantity is shown on the {axis} axis?",
    "What does the {axis} axis represent?",
    "What caption is given to the {axis} axis?",
];

pub const MAX: &[&str] = &[
    "What is the highest {noun}?",
    "What is the maximum {noun} shown in the chart?",
    "What is the peak {noun}?",
    "What is the largest {noun} in the chart?",
];

pub const MIN: &[&str] = &[
    "What is the lowest {noun}?",
    "What is the minimum {noun} shown in the chart?",
    "What is the smallest {noun}?",
    "How low does the {noun} go at its minimum?",
];

pub const ARG_MAX: &[&str] = &[
    "Which {label} has the highest {noun}?",
    "In which {label} is the {noun} at its highest?",
    "Which {label} shows the maximum {noun}?",
    "For which {label} does the chart show the largest {noun}?",
];

pub const ARG_MIN: &[&str] = &[
    "Which {label} has the lowest {noun}?",
    "In which {label} is the {noun} at its lowest?",
    "Which {label} shows the minimum {noun}?",
    "For which {label} does the chart show the smallest {noun}?",
];

pub const TREND: &[&str] = &[
    "Does the {noun} increase at every step from {first} to {last}?",
    "Is the {noun} strictly increasing from {first} to {last}?",
    "Does the {noun} rise steadily between {first} and {last}?",
    "From {first} to {last}, is each {noun} higher than the one before it?",
];

pub const TREND_NOT: &[&str] = &[
    "Does the {noun} fail to increase at some step from {first} to {last}?",
    "Is there a step between {first} and {last} where the {noun} does not rise?",
    "Does the {noun} stall or drop at least once from {first} to {last}?",
    "From {first} to {last}, is some {noun} no higher than the one before it?",
];

pub const RANK: &[&str] = &[
    "When sorted from highest to lowest {noun}, what rank does {target} hold?",
    "What is the rank of {target} by {noun}, with 1 being the highest?",
    "Ranking by {noun} in descending order, where does {target} place?",
    "Counting from the highest {noun}, what position does {target} occupy?",
];

pub const GREATER: &[&str] = &[
    "Is {a} greater than {b}?",
    "Is {a} higher than {b}?",
    "Does {a} exceed {b}?",
    "According to the chart, is {a} larger than {b}?",
];

pub const NOT_GREATER: &[&str] = &[
    "Is {a} less than or equal to {b}?",
    "Is {a} at most {b}?",
    "Does {a} fail to exceed {b}?",
    "According to the chart, is {a} no larger than {b}?",
];

pub const SUM: &[&str] = &[
    "What is the sum of {list}?",
    "What is the total of {list}?",
    "If you add {list}, what do you get?",
    "What do {list} add up to?",
];

pub const DIFFERENCE: &[&str] = &[
    "What is {a} minus {b}?",
    "By how much does {a} exceed {b}?",
    "How much larger is {a} than {b}?",
    "What is the difference between {a} and {b}?",
];

pub const MEAN: &[&str] = &[
    "What is the average of {list}?",
    "What is the mean of {list}?",
    "Taking {list} together, what is their average?",
    "Compute the arithmetic mean of {list}.",
];

pub const RATIO: &[&str] = &[
    "What is the ratio of {a} to {b}?",
    "What is {a} divided by {b}?",
    "How many times {b} is {a}?",
    "What do you get when dividing {a} by {b}?",
];

pub const PERCENT_CHANGE: &[&str] = &[
    "What is the percentage change from {a} to {b}?",
    "By what percent does the value change going from {a} to {b}?",
    "What is the percent change between {a} and {b}?",
    "Relative to {a}, by how many percent does {b} differ?",
];

pub const COUNT_ABOVE: &[&str] = &[
    "How many {labels} have a {noun} above {threshold}?",
    "In how many {labels} does the {noun} exceed {threshold}?",
    "Count the {labels} where the {noun} is greater than {threshold}.",
    "For how many {labels} is the {noun} higher than {threshold}?",
];

pub const RANGE: &[&str] = &[
    "What is the difference between the highest and lowest {noun}?",
    "What is the range of the {noun}?",
    "How far apart are the maximum and minimum {noun}?",
    "What is the spread between the largest and smallest {noun}?",
];

pub fn bank(op: Operator, negated: bool) -> &'static [&'static str] {
    use Operator::*;
    match (op, negated) {
        (Lookup, _) => LOOKUP,
        (AxisLabel, _) => AXIS_LABEL,
        (Max, _) => MAX,
        (Min, _) => MIN,
        (ArgMax, _) => ARG_MAX,
        (ArgMin, _) => ARG_MIN,
        (TrendIncreasing, false) => TREND,
        (TrendIncreasing, true) => TREND_NOT,
        (Rank, _) => RANK,
        (Greater, false) => GREATER,
        (Greater, true) => NOT_GREATER,
        (Sum, _) => SUM,
        (Difference, _) => DIFFERENCE,
        (Mean, _) => MEAN,
        (Ratio, _) => RATIO,
        (PercentChange, _) => PERCENT_CHANGE,
        (CountAbove, _) => COUNT_ABOVE,
        (Range, _) => RANGE,
        (Describe | Summarize, _) => &[],
    }
}

pub fn pick<'a>(bank: &'a [&'a str], rng: &mut Rng) -> &'a str {
    bank[rng.gen_range(0..bank.len())]
}

/// Replaces `{key}` placeholders, then capitalizes the first letter.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (key, value) in vars {
        out = out.replace(&format!("{{{key}}}"), value);
    }
    capitalize(&out)
}

pub fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Plural of a label noun ("year" → "years", "category" → "categories").
pub fn plural(noun: &str) -> String {
    if let Some(stem) = noun.strip_suffix('y') {
        if !stem.ends_with(['a', 'e', 'o', 'u']) {
            return format!("{stem}ies");
        }
    }
    if noun.ends_with('s') || noun.ends_with('x') {
        return format!("{noun}es");
    }
    format!("{noun}s")
}

/// "a, b and c"
pub fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bank_has_four_paraphrases() {
        use Operator::*;
        for op in [
            Lookup, AxisLabel, Max, Min, ArgMax, ArgMin, TrendIncreasing, Rank, Greater, Sum,
            Difference, Mean, Ratio, PercentChange, CountAbove, Range,
        ] {
            for negated in [false, true] {
                let b = bank(op, negated);
                assert!(b.len() >= 4, "{op:?}");
                let mut unique = b.to_vec();
                unique.dedup();
                assert_eq!(unique.len(), b.len());
            }
        }
    }

    #[test]
    fn plurals() {
        assert_eq!(plural("year"), "years");
        assert_eq!(plural("category"), "categories");
        assert_eq!(plural("day"), "days");
        assert_eq!(plural("x value"), "x values");
        assert_eq!(plural("class"), "classes");
    }

    #[test]
    fn fill_replaces_and_capitalizes() {
        assert_eq!(fill("{a} is {b}", &[("a", "the value"), ("b", "3")]), "The value is 3");
    }
}
