use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The eighteen supported chart types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartType {
    Line,
    MultiLine,
    VerticalBar,
    HorizontalBar,
    GroupedBar,
    StackedBar,
    Area,
    StackedArea,
    Pie,
    Donut,
    Scatter,
    Bubble,
    Histogram,
    BoxPlot,
    Candlestick,
    Radar,
    Heatmap,
    Funnel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    CartesianSeries,
    CategoricalPartWhole,
    Distribution,
    Matrix,
    Financial,
    Radial,
}

/// How the data payload of a chart type is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadShape {
    /// Named series of labelled values.
    Series,
    /// One list of labelled values (pie slices, funnel stages).
    Slices,
    /// Named series of `[x, y]` points.
    Points,
    /// Named series of `[x, y, size]` points.
    Bubbles,
    /// Histogram bins with bounds and counts.
    Bins,
    /// Named groups of raw samples.
    Samples,
    /// Time-labelled open/close/high/low records.
    Candles,
    /// Row/column/value cells.
    Cells,
}

impl ChartType {
    pub const ALL: [ChartType; 18] = [
        ChartType::Line,
        ChartType::MultiLine,
        ChartType::VerticalBar,
        ChartType::HorizontalBar,
        ChartType::GroupedBar,
        ChartType::StackedBar,
        ChartType::Area,
        ChartType::StackedArea,
        ChartType::Pie,
        ChartType::Donut,
        ChartType::Scatter,
        ChartType::Bubble,
        ChartType::Histogram,
        ChartType::BoxPlot,
        ChartType::Candlestick,
        ChartType::Radar,
        ChartType::Heatmap,
        ChartType::Funnel,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ChartType::Line => "line",
            ChartType::MultiLine => "multi_line",
            ChartType::VerticalBar => "vertical_bar",
            ChartType::HorizontalBar => "horizontal_bar",
            ChartType::GroupedBar => "grouped_bar",
            ChartType::StackedBar => "stacked_bar",
            ChartType::Area => "area",
            ChartType::StackedArea => "stacked_area",
            ChartType::Pie => "pie",
            ChartType::Donut => "donut",
            ChartType::Scatter => "scatter",
            ChartType::Bubble => "bubble",
            ChartType::Histogram => "histogram",
            ChartType::BoxPlot => "box_plot",
            ChartType::Candlestick => "candlestick",
            ChartType::Radar => "radar",
            ChartType::Heatmap => "heatmap",
            ChartType::Funnel => "funnel",
        }
    }

    /// Human readable name used in question and answer text.
    pub fn display_name(self) -> &'static str {
        match self {
            ChartType::Line => "line chart",
            ChartType::MultiLine => "multi-series line chart",
            ChartType::VerticalBar => "vertical bar chart",
            ChartType::HorizontalBar => "horizontal bar chart",
            ChartType::GroupedBar => "grouped bar chart",
            ChartType::StackedBar => "stacked bar chart",
            ChartType::Area => "area chart",
            ChartType::StackedArea => "stacked area chart",
            ChartType::Pie => "pie chart",
            ChartType::Donut => "donut chart",
            ChartType::Scatter => "scatter plot",
            ChartType::Bubble => "bubble chart",
            ChartType::Histogram => "histogram",
            ChartType::BoxPlot => "box plot",
            ChartType::Candlestick => "candlestick chart",
            ChartType::Radar => "radar chart",
            ChartType::Heatmap => "heatmap",
            ChartType::Funnel => "funnel chart",
        }
    }

    pub fn family(self) -> Family {
        use ChartType::*;
        match self {
            Line | MultiLine | VerticalBar | HorizontalBar | GroupedBar | StackedBar | Area
            | StackedArea => Family::CartesianSeries,
            Pie | Donut | Funnel => Family::CategoricalPartWhole,
            Scatter | Bubble | Histogram | BoxPlot => Family::Distribution,
            Heatmap => Family::Matrix,
            Candlestick => Family::Financial,
            Radar => Family::Radial,
        }
    }

    pub fn payload_shape(self) -> PayloadShape {
        use ChartType::*;
        match self {
            Line | MultiLine | VerticalBar | HorizontalBar | GroupedBar | StackedBar | Area
            | StackedArea | Radar => PayloadShape::Series,
            Pie | Donut | Funnel => PayloadShape::Slices,
            Scatter => PayloadShape::Points,
            Bubble => PayloadShape::Bubbles,
            Histogram => PayloadShape::Bins,
            BoxPlot => PayloadShape::Samples,
            Candlestick => PayloadShape::Candles,
            Heatmap => PayloadShape::Cells,
        }
    }

    /// Name of the top-level key holding the data payload.
    pub fn payload_key(self) -> &'static str {
        match self {
            ChartType::Pie | ChartType::Donut => "slices",
            ChartType::Funnel => "stages",
            ChartType::Histogram => "bins",
            ChartType::BoxPlot => "groups",
            ChartType::Candlestick => "data",
            ChartType::Heatmap => "cells",
            _ => "series",
        }
    }

    /// Whether categories along the x axis have a natural order (time, stages).
    pub fn is_ordered(self) -> bool {
        use ChartType::*;
        matches!(
            self,
            Line | MultiLine | Area | StackedArea | VerticalBar | GroupedBar | StackedBar | Candlestick
        )
    }
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ChartType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChartType::ALL
            .iter()
            .copied()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::NotFound(format!("chart type `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ids_are_distinct_and_round_trip() {
        let ids: HashSet<_> = ChartType::ALL.iter().map(|t| t.id()).collect();
        assert_eq!(ids.len(), 18);
        for t in ChartType::ALL {
            assert_eq!(t.id().parse::<ChartType>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(json, format!("\"{}\"", t.id()));
        }
        assert!(matches!("sankey".parse::<ChartType>(), Err(Error::NotFound(_))));
    }
}
