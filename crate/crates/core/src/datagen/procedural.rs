//! Deterministic stand-in for the data expert: builds template-conforming
//! chart content from a topic and a seeded stream.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::series::{procedural_series, round_shares, round_to, SeriesShape};
use crate::model::data::{
    Axis, Bin, Candle, ChartContent, HeatCell, LabeledValue, PointSeries, SampleGroup, Series,
};
use crate::model::{ChartType, Payload};
use crate::rng::Rng;

const MONTHS: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];
const REGIONS: [&str; 8] = [
    "North America", "Europe", "East Asia", "South Asia", "Africa", "South America", "Oceania",
    "Middle East",
];
const COUNTRIES: [&str; 12] = [
    "Brazil", "Canada", "Chile", "Egypt", "France", "Germany", "India", "Japan", "Kenya",
    "Mexico", "Norway", "Spain",
];
const COMPANIES: [&str; 10] = [
    "Northwind", "Contoso", "Globex", "Initech", "Umbrella", "Vandelay", "Hooli", "Soylent",
    "Tyrell", "Wonka",
];
const ATTRIBUTES: [&str; 8] = [
    "Speed", "Reliability", "Cost", "Comfort", "Safety", "Design", "Support", "Efficiency",
];
const STAGES: [&str; 6] = ["Visitors", "Sign-ups", "Trials", "Proposals", "Negotiations", "Customers"];
const WEEKDAYS: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
const SLOTS: [&str; 6] = ["00-04", "04-08", "08-12", "12-16", "16-20", "20-24"];
const GROUP_NAMES: [&str; 8] = [
    "Group A", "Group B", "Group C", "Group D", "Group E", "Group F", "Group G", "Group H",
];

/// Measured quantity derived from the topic.
struct Metric {
    name: String,
    unit: &'static str,
    range: (f64, f64),
}

fn title_case(s: &str) -> String {
    s.split_whitespace()
        .map(|w| {
            let mut c = w.chars();
            match c.next() {
                Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn metric_for(topic: &str) -> Metric {
    let t = topic.to_lowercase();
    let name = title_case(topic);
    let has = |words: &[&str]| words.iter().any(|w| t.contains(w));
    let (unit, range) = if has(&["share", "rate", "adoption", "quality"]) {
        ("%", (0.0, 100.0))
    } else if has(&["energy", "electric", "consumption"]) && !t.contains("vehicle") {
        ("GWh", (50.0, 900.0))
    } else if has(&["sales", "revenue", "spending", "prices", "advertising", "trading", "exports"]) {
        ("million USD", (10.0, 500.0))
    } else if has(&["emissions", "output", "production", "yields", "shipping"]) {
        ("thousand tonnes", (20.0, 800.0))
    } else if has(&["rainfall"]) {
        ("mm", (5.0, 250.0))
    } else {
        ("thousand", (5.0, 400.0))
    };
    Metric { name, unit, range }
}

fn pick(rng: &mut Rng, items: &[&str], n: usize) -> Vec<String> {
    let mut v: Vec<&str> = items.to_vec();
    v.shuffle(rng);
    v.into_iter().take(n).map(String::from).collect()
}

/// An ordered run of `n` period labels (years, months or quarters).
fn periods(rng: &mut Rng, n: usize) -> (Axis, Vec<String>) {
    match rng.gen_range(0..3) {
        0 => {
            let start = rng.gen_range(2005..=2024 - n as i32 + 1);
            (Axis::new("Year", ""), (0..n).map(|i| (start + i as i32).to_string()).collect())
        }
        1 if n <= 12 => {
            let start = rng.gen_range(0..=12 - n);
            (Axis::new("Month", ""), MONTHS[start..start + n].iter().map(|m| m.to_string()).collect())
        }
        _ => {
            let year = rng.gen_range(2015..=2023);
            let labels = (0..n).map(|i| format!("Q{} {}", i % 4 + 1, year + (i / 4) as i32)).collect();
            (Axis::new("Quarter", ""), labels)
        }
    }
}

fn nominal(rng: &mut Rng, n: usize) -> (Axis, Vec<String>) {
    match rng.gen_range(0..3) {
        0 => (Axis::new("Region", ""), pick(rng, &REGIONS, n)),
        1 => (Axis::new("Country", ""), pick(rng, &COUNTRIES, n)),
        _ => (Axis::new("Company", ""), pick(rng, &COMPANIES, n)),
    }
}

fn series_names(rng: &mut Rng, n: usize, avoid: &[String]) -> Vec<String> {
    let pool: &[&str] = if rng.gen_bool(0.5) { &COMPANIES } else { &REGIONS };
    let pool: Vec<&str> = pool.iter().copied().filter(|p| !avoid.iter().any(|a| a == p)).collect();
    pick(rng, &pool, n)
}

fn series_shape(rng: &mut Rng) -> SeriesShape {
    [SeriesShape::LinearTrend, SeriesShape::Seasonal, SeriesShape::RandomWalk][rng.gen_range(0..3)]
}

fn values(rng: &mut Rng, shape: SeriesShape, n: usize, range: (f64, f64)) -> Vec<f64> {
    procedural_series(shape, n, range, rng)
        .expect("generator ranges are valid")
        .into_iter()
        .map(|v| round_to(v, 1))
        .collect()
}

fn labeled(labels: &[String], values: Vec<f64>) -> Vec<LabeledValue> {
    labels
        .iter()
        .cloned()
        .zip(values)
        .map(|(label, value)| LabeledValue { label, value })
        .collect()
}

fn title(rng: &mut Rng, metric: &Metric, by: &str) -> String {
    let by = by.to_lowercase();
    match rng.gen_range(0..4) {
        0 => format!("{} by {by}", metric.name),
        1 => format!("{} across {by}s", metric.name),
        2 => format!("Trends in {}", metric.name),
        _ => format!("{} overview", metric.name),
    }
}

fn value_axis(metric: &Metric) -> Axis {
    Axis::new(metric.name.clone(), metric.unit)
}

fn series_chart(rng: &mut Rng, chart_type: ChartType, metric: &Metric) -> ChartContent {
    use ChartType::*;
    let n_series = match chart_type {
        Line | VerticalBar | HorizontalBar | Area => 1,
        Radar => rng.gen_range(1..=3),
        _ => rng.gen_range(2..=4),
    };
    let n_points = match chart_type {
        Line | Area | MultiLine | StackedArea => rng.gen_range(6..=10),
        GroupedBar | StackedBar => rng.gen_range(4..=6),
        Radar => rng.gen_range(5..=8),
        _ => rng.gen_range(5..=8),
    };
    let (x_axis, labels) = match chart_type {
        Radar => (Axis::new("Attribute", ""), pick(rng, &ATTRIBUTES, n_points)),
        HorizontalBar => nominal(rng, n_points),
        VerticalBar if rng.gen_bool(0.5) => nominal(rng, n_points),
        _ => periods(rng, n_points),
    };
    let range = if chart_type == Radar { (0.0, 100.0) } else { metric.range };
    let names = if n_series == 1 {
        vec![metric.name.clone()]
    } else {
        series_names(rng, n_series, &labels)
    };
    let series = names
        .into_iter()
        .map(|name| {
            let shape = series_shape(rng);
            Series { name, points: labeled(&labels, values(rng, shape, n_points, range)) }
        })
        .collect();
    let mut y_axis = value_axis(metric);
    if chart_type == Radar {
        y_axis = Axis::new("Score", "points");
    }
    ChartContent {
        title: title(rng, metric, &x_axis.label),
        x_axis,
        y_axis,
        payload: Payload::Series(series),
    }
}

fn part_whole(rng: &mut Rng, chart_type: ChartType, metric: &Metric) -> ChartContent {
    if chart_type == ChartType::Funnel {
        let n = rng.gen_range(5..=6);
        let mut v = rng.gen_range(2000.0..20000.0f64).round();
        let mut stages = Vec::with_capacity(n);
        for label in &STAGES[..n] {
            stages.push(LabeledValue { label: label.to_string(), value: v });
            v = (v * rng.gen_range(0.35..0.9)).round();
        }
        return ChartContent {
            title: format!("{} conversion funnel", metric.name),
            x_axis: Axis::new("Stage", ""),
            y_axis: Axis::new("Participants", "people"),
            payload: Payload::Slices(stages),
        };
    }
    let n = rng.gen_range(4..=7);
    let (x_axis, labels) = nominal(rng, n);
    let shares = procedural_series(SeriesShape::CategoricalShares, n, (0.0, 100.0), rng)
        .expect("share range is valid");
    ChartContent {
        title: format!("{} share by {}", metric.name, x_axis.label.to_lowercase()),
        x_axis,
        y_axis: Axis::new("Share", "%"),
        payload: Payload::Slices(labeled(&labels, round_shares(&shares))),
    }
}

fn scatter(rng: &mut Rng, chart_type: ChartType, metric: &Metric) -> ChartContent {
    let bubble = chart_type == ChartType::Bubble;
    let n_series = rng.gen_range(1..=3);
    let names = series_names(rng, n_series, &[]);
    let series = names
        .into_iter()
        .map(|name| {
            let n = if bubble { rng.gen_range(5..=9) } else { rng.gen_range(8..=14) };
            let mut xs: Vec<f64> = Vec::with_capacity(n);
            while xs.len() < n {
                let x = round_to(rng.gen_range(0.0..100.0), 1);
                if !xs.contains(&x) {
                    xs.push(x);
                }
            }
            xs.sort_by(f64::total_cmp);
            let slope = rng.gen_range(-2.0..3.0);
            let base = rng.gen_range(metric.range.0..metric.range.1) * 0.5;
            let points = xs
                .into_iter()
                .map(|x| {
                    let y = round_to((base + slope * x + rng.gen_range(-20.0..20.0)).max(0.0), 1);
                    let mut p = vec![x, y];
                    if bubble {
                        p.push(round_to(rng.gen_range(1.0..50.0), 1));
                    }
                    p
                })
                .collect();
            PointSeries { name, points }
        })
        .collect();
    ChartContent {
        title: if bubble {
            format!("{} versus investment and size", metric.name)
        } else {
            format!("{} versus investment", metric.name)
        },
        x_axis: Axis::new("Investment", "million USD"),
        y_axis: value_axis(metric),
        payload: Payload::Points(series),
    }
}

fn histogram(rng: &mut Rng, metric: &Metric) -> ChartContent {
    let n = rng.gen_range(6..=10);
    let width = [1.0, 2.0, 5.0, 10.0, 20.0][rng.gen_range(0..5)];
    let start = width * rng.gen_range(0..10) as f64;
    let peak = rng.gen_range(1.0..(n as f64 - 1.0));
    let height = rng.gen_range(40.0..400.0);
    let spread = rng.gen_range(1.0..3.0);
    let bins = (0..n)
        .map(|i| {
            let z = (i as f64 - peak) / spread;
            let count = (height * (-0.5 * z * z).exp() + rng.gen_range(0.0..5.0)).round();
            Bin {
                lower: start + width * i as f64,
                upper: start + width * (i + 1) as f64,
                count,
            }
        })
        .collect();
    ChartContent {
        title: format!("Distribution of {}", metric.name.to_lowercase()),
        x_axis: value_axis(metric),
        y_axis: Axis::new("Frequency", "count"),
        payload: Payload::Bins(bins),
    }
}

fn box_plot(rng: &mut Rng, metric: &Metric) -> ChartContent {
    let n = rng.gen_range(3..=6);
    let names = if rng.gen_bool(0.5) { pick(rng, &GROUP_NAMES, n) } else { pick(rng, &REGIONS, n) };
    let (lo, hi) = metric.range;
    let groups = names
        .into_iter()
        .map(|name| {
            let center = rng.gen_range(lo + 0.25 * (hi - lo)..lo + 0.75 * (hi - lo));
            let spread = (hi - lo) * rng.gen_range(0.05..0.2);
            let k = rng.gen_range(9..=15);
            let values = (0..k)
                .map(|_| {
                    let u: f64 = (0..3).map(|_| rng.gen_range(-1.0..1.0)).sum();
                    round_to((center + spread * u).clamp(lo, hi), 1)
                })
                .collect();
            SampleGroup { name, values }
        })
        .collect();
    ChartContent {
        title: format!("Spread of {} by group", metric.name.to_lowercase()),
        x_axis: Axis::new("Group", ""),
        y_axis: value_axis(metric),
        payload: Payload::Samples(groups),
    }
}

fn candlestick(rng: &mut Rng) -> ChartContent {
    let n = rng.gen_range(8..=14);
    let (x_axis, labels) = if rng.gen_bool(0.5) {
        let start = rng.gen_range(1..=15);
        let month = MONTHS[rng.gen_range(0..12)];
        (Axis::new("Date", ""), (0..n).map(|i| format!("{month} {:02}", start + i)).collect::<Vec<_>>())
    } else {
        (Axis::new("Week", ""), (1..=n).map(|i| format!("W{i}")).collect())
    };
    let mut close = round_to(rng.gen_range(20.0..300.0), 2);
    let data = labels
        .into_iter()
        .map(|time| {
            let open = close;
            close = round_to((open * (1.0 + rng.gen_range(-0.06..0.06))).max(1.0), 2);
            let high = round_to(open.max(close) + open * rng.gen_range(0.0..0.03), 2);
            let low = round_to((open.min(close) - open * rng.gen_range(0.0..0.03)).max(0.5), 2);
            Candle { time, open, close, high, low }
        })
        .collect();
    ChartContent {
        title: format!("{} stock price", COMPANIES[rng.gen_range(0..COMPANIES.len())]),
        x_axis,
        y_axis: Axis::new("Price", "USD"),
        payload: Payload::Candles(data),
    }
}

fn heatmap(rng: &mut Rng, metric: &Metric) -> ChartContent {
    let (x_axis, columns, rows) = if rng.gen_bool(0.5) {
        let nr = rng.gen_range(3..=6);
        let nc = rng.gen_range(4..=6);
        (Axis::new("Time slot", ""), pick(rng, &SLOTS, nc), WEEKDAYS[..nr].iter().map(|d| d.to_string()).collect())
    } else {
        let nc = rng.gen_range(4..=7);
        let start = rng.gen_range(0..=12 - nc);
        let cols: Vec<String> = MONTHS[start..start + nc].iter().map(|m| m.to_string()).collect();
        let nr = rng.gen_range(3..=5);
        (Axis::new("Month", ""), cols, pick(rng, &REGIONS, nr))
    };
    let mut columns = columns;
    if x_axis.label == "Time slot" {
        columns.sort();
    }
    let range = (0.0, 100.0);
    let mut cells = Vec::new();
    for row in &rows {
        let shape = series_shape(rng);
        let vals = values(rng, shape, columns.len().max(2), range);
        for (column, value) in columns.iter().zip(vals) {
            cells.push(HeatCell { row: row.clone(), column: column.clone(), value });
        }
    }
    let y_label = if x_axis.label == "Time slot" { "Weekday" } else { "Region" };
    ChartContent {
        title: format!("{} intensity", metric.name),
        x_axis,
        y_axis: Axis::new(y_label, ""),
        payload: Payload::Cells(cells),
    }
}

/// Builds chart content for one item.
pub fn build_content(chart_type: ChartType, topic: &str, rng: &mut Rng) -> ChartContent {
    use ChartType::*;
    let metric = metric_for(topic);
    match chart_type {
        Line | MultiLine | VerticalBar | HorizontalBar | GroupedBar | StackedBar | Area
        | StackedArea | Radar => series_chart(rng, chart_type, &metric),
        Pie | Donut | Funnel => part_whole(rng, chart_type, &metric),
        Scatter | Bubble => scatter(rng, chart_type, &metric),
        Histogram => histogram(rng, &metric),
        BoxPlot => box_plot(rng, &metric),
        Candlestick => candlestick(rng),
        Heatmap => heatmap(rng, &metric),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{get_template, validate_document};
    use crate::rng::stream;

    #[test]
    fn every_type_conforms_across_seeds() {
        for chart_type in ChartType::ALL {
            for seed in 0..50 {
                let content = build_content(chart_type, "energy production", &mut stream(seed));
                let v = validate_document(&content.to_document(chart_type), get_template(chart_type));
                assert!(v.is_empty(), "{chart_type} seed {seed}: {v:?}");
            }
        }
    }

    #[test]
    fn metric_follows_topic() {
        assert_eq!(metric_for("market share").unit, "%");
        assert_eq!(metric_for("energy production").unit, "GWh");
        assert_eq!(metric_for("energy production").name, "Energy Production");
    }
}
