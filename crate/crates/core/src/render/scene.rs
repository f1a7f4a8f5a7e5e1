//! Chart drawing. Every chart is laid out as a title band, a plot frame and
//! axis captions; each chart family then draws its marks into the frame.

use std::f64::consts::{FRAC_PI_2, TAU};

use super::canvas::{Canvas, Paint, TextStyle};
use crate::model::data::{Bin, Candle, HeatCell, LabeledValue, PointSeries, SampleGroup, Series};
use crate::model::style::LegendPosition;
use crate::model::view::box_stats;
use crate::model::{ChartData, ChartType, Color, Payload, StyleFamily, StyleSpec};
use crate::numfmt::format_number;

/// What was drawn, for tests and audits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneStats {
    /// One per data point or record.
    pub marks: usize,
    /// Numeric value annotations.
    pub value_labels: usize,
    pub legend_entries: usize,
    /// Every string drawn, in drawing order.
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn w(&self) -> f64 {
        self.x1 - self.x0
    }
    fn h(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Linear value axis with nice ticks.
#[derive(Debug, Clone)]
struct Scale {
    lo: f64,
    hi: f64,
    ticks: Vec<f64>,
}

impl Scale {
    fn new(min: f64, max: f64) -> Scale {
        let (mut lo, mut hi) = (min, max);
        if lo == hi {
            // degenerate range: pad by 5% of the value, or 1 around zero
            let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
            lo -= pad;
            hi += pad;
        }
        let raw = (hi - lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 2.5, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (lo / step).floor();
        let last = (hi / step).ceil();
        let ticks: Vec<f64> = (0..=(last - first) as i64).map(|k| (first + k as f64) * step).collect();
        Scale { lo: first * step, hi: last * step, ticks }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

struct Painter<'a> {
    canvas: Canvas,
    style: &'a StyleSpec,
    stats: SceneStats,
    text: TextStyle,
    fg: Color,
    grid: Color,
    stroke: u32,
    legend: Vec<(String, Color)>,
}

impl<'a> Painter<'a> {
    fn new(style: &'a StyleSpec) -> Painter<'a> {
        let (w, h) = style.figure_size_px;
        let bg = style.background;
        let fg = if bg.luminance() > 0.5 { Color([34, 34, 34]) } else { Color([240, 240, 240]) };
        let scale = if style.font.size_pt >= 12.0 { 2 } else { 1 };
        Painter {
            canvas: Canvas::new(w, h, bg),
            style,
            stats: SceneStats::default(),
            text: TextStyle { family: style.font.family, scale, color: fg },
            fg,
            grid: fg.mix(bg, 0.82),
            stroke: match style.family {
                StyleFamily::Presentation => 3,
                StyleFamily::Dense => 1,
                _ => 2,
            },
            legend: Vec::new(),
        }
    }

    fn paint(&self, color: Color) -> Paint {
        Paint { color, texture: self.style.mark_texture }
    }

    fn color(&self, i: usize) -> Color {
        self.style.series_color(i)
    }

    /// Text anchored at (x, y); `ax`/`ay` pick the anchor within the box
    /// (0 left/top, 0.5 center, 1 right/bottom).
    fn label_with(&mut self, x: f64, y: f64, s: &str, ax: f64, ay: f64, style: TextStyle) {
        let (w, h) = style.measure(s);
        self.canvas.text(x - ax * w as f64, y - ay * h as f64, s, style);
        self.stats.texts.push(s.to_string());
    }

    fn label(&mut self, x: f64, y: f64, s: &str, ax: f64, ay: f64) {
        self.label_with(x, y, s, ax, ay, self.text);
    }

    fn value_label(&mut self, x: f64, y: f64, v: f64, ax: f64, ay: f64) {
        self.value_label_colored(x, y, v, ax, ay, self.fg);
    }

    fn value_label_colored(&mut self, x: f64, y: f64, v: f64, ax: f64, ay: f64, color: Color) {
        if !self.style.annotate_values {
            return;
        }
        let style = TextStyle { color, ..self.text };
        self.label_with(x, y, &format_number(v), ax, ay, style);
        self.stats.value_labels += 1;
    }

    fn text_size(&self, s: &str) -> (f64, f64) {
        let (w, h) = self.text.measure(s);
        (w as f64, h as f64)
    }

    fn marker(&mut self, x: f64, y: f64, color: Color) {
        let r = 1.5 + self.stroke as f64;
        self.canvas.fill_circle(x, y, r, Paint::solid(color));
        self.stats.marks += 1;
    }

    fn legend_width(&self) -> f64 {
        let widest = self.legend.iter().map(|(n, _)| self.text_size(n).0).fold(0.0, f64::max);
        widest + 30.0
    }

    fn legend_visible(&self) -> bool {
        self.style.legend.visible && !self.legend.is_empty()
    }

    fn draw_legend(&mut self, plot: Rect) {
        if !self.legend_visible() {
            return;
        }
        let (_, th) = self.text_size("M");
        let row = th.max(10.0) + 6.0;
        let w = self.legend_width();
        let h = row * self.legend.len() as f64 + 8.0;
        let (x, y) = match self.style.legend.position {
            LegendPosition::TopLeft => (plot.x0 + 8.0, plot.y0 + 8.0),
            LegendPosition::TopRight => (plot.x1 - w - 8.0, plot.y0 + 8.0),
            LegendPosition::BottomLeft => (plot.x0 + 8.0, plot.y1 - h - 8.0),
            LegendPosition::BottomRight => (plot.x1 - w - 8.0, plot.y1 - h - 8.0),
            LegendPosition::Outside => (plot.x1 + 12.0, plot.y0),
        };
        let bg = self.style.background;
        self.canvas.fill_rect(x, y, x + w, y + h, Paint::solid(bg));
        self.canvas.stroke_rect(x, y, x + w, y + h, self.grid);
        let entries = std::mem::take(&mut self.legend);
        for (i, (name, color)) in entries.iter().enumerate() {
            let ry = y + 4.0 + i as f64 * row;
            self.canvas.fill_rect(x + 6.0, ry + 2.0, x + 16.0, ry + 12.0, self.paint(*color));
            self.label(x + 22.0, ry + 7.0, name, 0.0, 0.5);
            self.stats.legend_entries += 1;
        }
        self.legend = entries;
    }
}

/// Layout shared by every chart: title, axis captions, plot frame.
fn layout(p: &mut Painter, data: &ChartData, y_tick_width: f64, x_tick_rows: f64) -> Rect {
    let (w, h) = (p.canvas.width as f64, p.canvas.height as f64);
    let pad = 10.0;
    let title = &data.content.title;
    let room = w - 2.0 * pad;
    let mut title_style = TextStyle { scale: p.text.scale + 1, ..p.text };
    if title_style.measure(title).0 as f64 > room {
        title_style.scale = p.text.scale;
    }
    let lines = wrap(title, |s| title_style.measure(s).0 as f64 <= room);
    let line_h = title_style.measure("M").1 as f64 + 4.0;
    for (i, line) in lines.iter().enumerate() {
        let (lw, _) = title_style.measure(line);
        p.canvas.text(w / 2.0 - lw as f64 / 2.0, pad + i as f64 * line_h, line, title_style);
    }
    p.stats.texts.push(title.clone());
    let title_h = line_h * lines.len() as f64 - 4.0;
    let (_, th) = p.text_size("M");

    let x_caption = data.content.x_axis.caption();
    let y_caption = data.content.y_axis.caption();
    let top = pad + title_h + pad * 1.5;
    let left = pad + th + pad + y_tick_width + 8.0;
    let bottom = h - (pad + th + pad + x_tick_rows * (th + 4.0) + 6.0);
    let mut right = w - pad * 2.0;
    if p.legend_visible() && p.style.legend.position == LegendPosition::Outside {
        right -= p.legend_width() + 12.0;
    }
    let plot = Rect { x0: left, y0: top, x1: right.max(left + 40.0), y1: bottom.max(top + 40.0) };

    p.label(plot.x0 + plot.w() / 2.0, h - pad, &x_caption, 0.5, 1.0);
    let mut caption_style = p.text;
    if caption_style.measure(&y_caption).0 as f64 > h - 2.0 * pad {
        caption_style.scale = 1;
    }
    let (cw, _) = caption_style.measure(&y_caption);
    let cy = plot.y0 + plot.h() / 2.0 - cw as f64 / 2.0;
    p.canvas.text_vertical(pad, cy.clamp(0.0, (h - cw as f64).max(0.0)), &y_caption, caption_style);
    p.stats.texts.push(y_caption);
    plot
}

/// Greedy word wrap; a single overlong word gets its own line.
fn wrap(text: &str, fits: impl Fn(&str) -> bool) -> Vec<String> {
    let mut lines: Vec<String> = Vec::new();
    for word in text.split_whitespace() {
        match lines.last_mut() {
            Some(last) if fits(&format!("{last} {word}")) => {
                last.push(' ');
                last.push_str(word);
            }
            _ => lines.push(word.to_string()),
        }
    }
    if lines.is_empty() {
        lines.push(String::new());
    }
    lines
}

fn draw_axes(p: &mut Painter, plot: Rect) {
    let fg = p.fg;
    if p.style.family == StyleFamily::Classic {
        p.canvas.stroke_rect(plot.x0, plot.y0, plot.x1, plot.y1, fg);
    } else {
        p.canvas.line(plot.x0, plot.y1, plot.x1, plot.y1, 1, fg);
        p.canvas.line(plot.x0, plot.y0, plot.x0, plot.y1, 1, fg);
    }
}

fn grid_on(p: &Painter, vertical_lines: bool) -> bool {
    use crate::model::style::GridAxes;
    let g = p.style.grid;
    g.visible
        && match g.which {
            GridAxes::Both => true,
            GridAxes::X => vertical_lines,
            GridAxes::Y => !vertical_lines,
        }
}

/// Value ticks along the vertical axis.
fn y_ticks(p: &mut Painter, plot: Rect, scale: &Scale) {
    for &t in &scale.ticks.clone() {
        let y = plot.y1 - scale.frac(t) * plot.h();
        if grid_on(p, false) {
            let c = p.grid;
            p.canvas.dashed_line(plot.x0, y, plot.x1, y, c);
        }
        let fg = p.fg;
        p.canvas.line(plot.x0 - 4.0, y, plot.x0, y, 1, fg);
        p.label(plot.x0 - 6.0, y, &format_number(t), 1.0, 0.5);
    }
}

/// Value ticks along the horizontal axis.
fn x_ticks(p: &mut Painter, plot: Rect, scale: &Scale) {
    for &t in &scale.ticks.clone() {
        let x = plot.x0 + scale.frac(t) * plot.w();
        if grid_on(p, true) {
            let c = p.grid;
            p.canvas.dashed_line(x, plot.y0, x, plot.y1, c);
        }
        let fg = p.fg;
        p.canvas.line(x, plot.y1, x, plot.y1 + 4.0, 1, fg);
        p.label(x, plot.y1 + 6.0, &format_number(t), 0.5, 0.0);
    }
}

/// Category names along the horizontal axis, thinned when crowded.
fn x_categories(p: &mut Painter, plot: Rect, labels: &[String]) {
    let n = labels.len().max(1);
    let band = plot.w() / n as f64;
    let widest = labels.iter().map(|l| p.text_size(l).0).fold(0.0, f64::max) + 6.0;
    let every = ((widest / band).ceil() as usize).max(1);
    for (i, l) in labels.iter().enumerate() {
        let x = plot.x0 + (i as f64 + 0.5) * band;
        if grid_on(p, true) {
            let c = p.grid;
            p.canvas.dashed_line(x, plot.y0, x, plot.y1, c);
        }
        if i % every == 0 {
            p.label(x, plot.y1 + 6.0, l, 0.5, 0.0);
        }
    }
}

fn y_categories(p: &mut Painter, plot: Rect, labels: &[String]) {
    let n = labels.len().max(1);
    let band = plot.h() / n as f64;
    for (i, l) in labels.iter().enumerate() {
        let y = plot.y0 + (i as f64 + 0.5) * band;
        if grid_on(p, false) {
            let c = p.grid;
            p.canvas.dashed_line(plot.x0, y, plot.x1, y, c);
        }
        p.label(plot.x0 - 6.0, y, l, 1.0, 0.5);
    }
}

fn tick_width(p: &Painter, scale: &Scale) -> f64 {
    scale.ticks.iter().map(|t| p.text_size(&format_number(*t)).0).fold(0.0, f64::max)
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn series_chart(p: &mut Painter, data: &ChartData, series: &[Series]) {
    use ChartType::*;
    let t = data.chart_type;
    let labels: Vec<String> = series[0].points.iter().map(|q| q.label.clone()).collect();
    let n = labels.len();
    let stacked = matches!(t, StackedBar | StackedArea);
    let totals: Vec<f64> = (0..n).map(|i| series.iter().map(|s| s.points[i].value).sum()).collect();
    let (lo, hi) = if stacked {
        (0.0, totals.iter().copied().fold(0.0, f64::max))
    } else {
        extent(series.iter().flat_map(|s| s.points.iter().map(|q| q.value)))
    };
    let (lo, hi) = if matches!(t, Line | MultiLine) { (lo, hi) } else { (lo.min(0.0), hi.max(0.0)) };
    let scale = Scale::new(lo, hi);
    if series.len() > 1 {
        p.legend = series.iter().enumerate().map(|(i, s)| (s.name.clone(), p.color(i))).collect();
    }

    if t == HorizontalBar {
        let widest = labels.iter().map(|l| p.text_size(l).0).fold(0.0, f64::max);
        let plot = layout(p, data, widest, 1.0);
        x_ticks(p, plot, &scale);
        y_categories(p, plot, &labels);
        draw_axes(p, plot);
        let band = plot.h() / n as f64;
        let x_of = |v: f64| plot.x0 + scale.frac(v) * plot.w();
        let color = p.color(0);
        for (i, q) in series[0].points.iter().enumerate() {
            let y = plot.y0 + (i as f64 + 0.15) * band;
            let (xa, xb) = (x_of(0.0), x_of(q.value));
            p.canvas.fill_rect(xa, y, xb, y + band * 0.7, p.paint(color));
            p.stats.marks += 1;
            p.value_label(xb.max(xa) + 4.0, y + band * 0.35, q.value, 0.0, 0.5);
        }
        p.draw_legend(plot);
        return;
    }

    let plot = layout(p, data, tick_width(p, &scale), 1.0);
    y_ticks(p, plot, &scale);
    x_categories(p, plot, &labels);
    draw_axes(p, plot);
    let band = plot.w() / n as f64;
    let y_of = |v: f64| plot.y1 - scale.frac(v) * plot.h();
    let x_of = |i: usize| plot.x0 + (i as f64 + 0.5) * band;
    let stroke = p.stroke;
    match t {
        VerticalBar | GroupedBar | StackedBar => {
            let k = series.len() as f64;
            let mut base = vec![0.0; n];
            for (s, ser) in series.iter().enumerate() {
                let color = p.color(s);
                for (i, q) in ser.points.iter().enumerate() {
                    let (x0, x1, v0, v1) = match t {
                        GroupedBar => {
                            let inner = band * 0.8 / k;
                            let x0 = plot.x0 + i as f64 * band + band * 0.1 + s as f64 * inner;
                            (x0, x0 + inner - 1.0, 0.0, q.value)
                        }
                        StackedBar => (x_of(i) - band * 0.35, x_of(i) + band * 0.35, base[i], base[i] + q.value),
                        _ => (x_of(i) - band * 0.35, x_of(i) + band * 0.35, 0.0, q.value),
                    };
                    base[i] += q.value;
                    let (ya, yb) = (y_of(v0), y_of(v1));
                    p.canvas.fill_rect(x0, yb, x1, ya, p.paint(color));
                    p.stats.marks += 1;
                    let cx = (x0 + x1) / 2.0;
                    if t == StackedBar {
                        let ink = if color.luminance() > 0.5 { Color::BLACK } else { Color::WHITE };
                        p.value_label_colored(cx, (ya + yb) / 2.0, q.value, 0.5, 0.5, ink);
                    } else if q.value >= 0.0 {
                        p.value_label(cx, yb - 3.0, q.value, 0.5, 1.0);
                    } else {
                        p.value_label(cx, yb + 3.0, q.value, 0.5, 0.0);
                    }
                }
            }
        }
        Area | StackedArea | Line | MultiLine => {
            let mut base = vec![0.0; n];
            for (s, ser) in series.iter().enumerate() {
                let color = p.color(s);
                let top: Vec<f64> = ser.points.iter().enumerate().map(|(i, q)| base[i] + q.value).collect();
                let pts: Vec<(f64, f64)> = (0..n).map(|i| (x_of(i), y_of(top[i]))).collect();
                if matches!(t, Area | StackedArea) {
                    let mut poly = pts.clone();
                    for i in (0..n).rev() {
                        let floor = if t == StackedArea { base[i] } else { 0.0 };
                        poly.push((x_of(i), y_of(floor)));
                    }
                    let fill = color.mix(p.style.background, 0.35);
                    p.canvas.fill_polygon(&poly, p.paint(fill));
                }
                for w in pts.windows(2) {
                    p.canvas.line(w[0].0, w[0].1, w[1].0, w[1].1, stroke, color);
                }
                for (i, &(x, y)) in pts.iter().enumerate() {
                    p.marker(x, y, color);
                    let v = ser.points[i].value;
                    p.value_label(x, y - 6.0, v, 0.5, 1.0);
                }
                if t == StackedArea {
                    base = top;
                }
            }
        }
        _ => unreachable!("series chart"),
    }
    p.draw_legend(plot);
}

fn point_chart(p: &mut Painter, data: &ChartData, series: &[PointSeries], bubble: bool) {
    let (xl, xh) = extent(series.iter().flat_map(|s| s.points.iter().map(|q| q[0])));
    let (yl, yh) = extent(series.iter().flat_map(|s| s.points.iter().map(|q| q[1])));
    let xs = Scale::new(xl, xh);
    let ys = Scale::new(yl, yh);
    let max_size = series
        .iter()
        .flat_map(|s| s.points.iter().filter_map(|q| q.get(2).copied()))
        .fold(0.0, f64::max);
    if series.len() > 1 {
        p.legend = series.iter().enumerate().map(|(i, s)| (s.name.clone(), p.color(i))).collect();
    }
    let plot = layout(p, data, tick_width(p, &ys), 1.0);
    y_ticks(p, plot, &ys);
    x_ticks(p, plot, &xs);
    draw_axes(p, plot);
    for (s, ser) in series.iter().enumerate() {
        let color = p.color(s);
        for q in &ser.points {
            let x = plot.x0 + xs.frac(q[0]) * plot.w();
            let y = plot.y1 - ys.frac(q[1]) * plot.h();
            if bubble {
                let size = q.get(2).copied().unwrap_or(0.0);
                let r = 4.0 + 16.0 * if max_size > 0.0 { (size / max_size).sqrt() } else { 0.0 };
                p.canvas.fill_circle(x, y, r, p.paint(color.mix(p.style.background, 0.2)));
                p.canvas.stroke_circle(x, y, r, color);
                p.stats.marks += 1;
                p.value_label(x, y - r - 2.0, q[1], 0.5, 1.0);
            } else {
                p.marker(x, y, color);
                p.value_label(x, y - 6.0, q[1], 0.5, 1.0);
            }
        }
    }
    p.draw_legend(plot);
}

fn histogram(p: &mut Painter, data: &ChartData, bins: &[Bin]) {
    let xs = Scale::new(bins[0].lower, bins[bins.len() - 1].upper);
    let (_, top) = extent(bins.iter().map(|b| b.count));
    let ys = Scale::new(0.0, top.max(0.0));
    let plot = layout(p, data, tick_width(p, &ys), 1.0);
    y_ticks(p, plot, &ys);
    x_ticks(p, plot, &xs);
    draw_axes(p, plot);
    let color = p.color(0);
    for b in bins {
        let xa = plot.x0 + xs.frac(b.lower) * plot.w();
        let xb = plot.x0 + xs.frac(b.upper) * plot.w();
        let y = plot.y1 - ys.frac(b.count) * plot.h();
        p.canvas.fill_rect(xa + 1.0, y, xb - 1.0, plot.y1, p.paint(color));
        p.stats.marks += 1;
        p.value_label((xa + xb) / 2.0, y - 3.0, b.count, 0.5, 1.0);
    }
}

fn box_plot(p: &mut Painter, data: &ChartData, groups: &[SampleGroup]) {
    let (lo, hi) = extent(groups.iter().flat_map(|g| g.values.iter().copied()));
    let ys = Scale::new(lo, hi);
    let labels: Vec<String> = groups.iter().map(|g| g.name.clone()).collect();
    let plot = layout(p, data, tick_width(p, &ys), 1.0);
    y_ticks(p, plot, &ys);
    x_categories(p, plot, &labels);
    draw_axes(p, plot);
    let band = plot.w() / groups.len() as f64;
    let y_of = |v: f64| plot.y1 - ys.frac(v) * plot.h();
    for (i, g) in groups.iter().enumerate() {
        let [min, q1, med, q3, max] = box_stats(&g.values);
        let cx = plot.x0 + (i as f64 + 0.5) * band;
        let half = band * 0.25;
        let color = p.color(i);
        let fg = p.fg;
        p.canvas.line(cx, y_of(max), cx, y_of(q3), 1, fg);
        p.canvas.line(cx, y_of(q1), cx, y_of(min), 1, fg);
        p.canvas.line(cx - half / 2.0, y_of(max), cx + half / 2.0, y_of(max), 1, fg);
        p.canvas.line(cx - half / 2.0, y_of(min), cx + half / 2.0, y_of(min), 1, fg);
        p.canvas.fill_rect(cx - half, y_of(q3), cx + half, y_of(q1), p.paint(color));
        p.canvas.stroke_rect(cx - half, y_of(q3), cx + half, y_of(q1), fg);
        p.canvas.line(cx - half, y_of(med), cx + half, y_of(med), 2, fg);
        p.stats.marks += 1;
        p.value_label(cx + half + 3.0, y_of(med), med, 0.0, 0.5);
    }
}

fn candlestick(p: &mut Painter, data: &ChartData, candles: &[Candle]) {
    let (lo, hi) = extent(candles.iter().flat_map(|c| [c.low, c.high, c.open, c.close]));
    let ys = Scale::new(lo, hi);
    let labels: Vec<String> = candles.iter().map(|c| c.time.clone()).collect();
    let plot = layout(p, data, tick_width(p, &ys), 1.0);
    y_ticks(p, plot, &ys);
    x_categories(p, plot, &labels);
    draw_axes(p, plot);
    let band = plot.w() / candles.len() as f64;
    let y_of = |v: f64| plot.y1 - ys.frac(v) * plot.h();
    let (up, down) = (p.color(2), p.color(3));
    for (i, c) in candles.iter().enumerate() {
        let cx = plot.x0 + (i as f64 + 0.5) * band;
        let color = if c.close >= c.open { up } else { down };
        p.canvas.line(cx, y_of(c.high), cx, y_of(c.low), 1, color);
        let (ya, yb) = (y_of(c.open.max(c.close)), y_of(c.open.min(c.close)));
        p.canvas.fill_rect(cx - band * 0.3, ya, cx + band * 0.3, yb.max(ya + 1.0), p.paint(color));
        p.stats.marks += 1;
        p.value_label(cx, y_of(c.high) - 3.0, c.close, 0.5, 1.0);
    }
}

fn pie(p: &mut Painter, data: &ChartData, slices: &[LabeledValue], donut: bool) {
    p.legend = slices.iter().enumerate().map(|(i, s)| (s.label.clone(), p.color(i))).collect();
    let plot = layout(p, data, 0.0, 0.0);
    let total: f64 = slices.iter().map(|s| s.value).sum();
    let (cx, cy) = (plot.x0 + plot.w() / 2.0, plot.y0 + plot.h() / 2.0);
    let r = 0.42 * plot.w().min(plot.h());
    let inner = if donut { 0.55 * r } else { 0.0 };
    let mut bounds = Vec::with_capacity(slices.len());
    let mut acc = 0.0;
    for s in slices {
        acc += s.value / total;
        bounds.push(acc * TAU);
    }
    let paints: Vec<Paint> = (0..slices.len()).map(|i| p.paint(p.color(i))).collect();
    let (xa, xb) = ((cx - r).floor() as i32, (cx + r).ceil() as i32);
    let (ya, yb) = ((cy - r).floor() as i32, (cy + r).ceil() as i32);
    for y in ya..=yb {
        for x in xa..=xb {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            let d2 = dx * dx + dy * dy;
            if d2 > r * r || d2 < inner * inner {
                continue;
            }
            // clockwise from twelve o'clock
            let a = (dx.atan2(-dy) + TAU) % TAU;
            let k = bounds.iter().position(|b| a < *b).unwrap_or(slices.len() - 1);
            let color = paints[k].at(x, y, (y - ya) as f64 / (yb - ya).max(1) as f64);
            p.canvas.put(x, y, color);
        }
    }
    let mut start = 0.0;
    let mid_r = if donut { (r + inner) / 2.0 } else { 0.65 * r };
    for (i, s) in slices.iter().enumerate() {
        let mid = (start + bounds[i]) / 2.0 - FRAC_PI_2;
        start = bounds[i];
        p.stats.marks += 1;
        let (lx, ly) = (cx + mid_r * mid.cos(), cy + mid_r * mid.sin());
        let color = p.color(i);
        let ink = if color.luminance() > 0.5 { Color::BLACK } else { Color::WHITE };
        p.value_label_colored(lx, ly, s.value, 0.5, 0.5, ink);
        if !p.style.legend.visible {
            let (ox, oy) = (cx + 1.08 * r * mid.cos(), cy + 1.08 * r * mid.sin());
            let ax = if mid.cos() >= 0.0 { 0.0 } else { 1.0 };
            p.label(ox, oy, &s.label, ax, 0.5);
        }
    }
    p.draw_legend(plot);
}

fn radar(p: &mut Painter, data: &ChartData, series: &[Series]) {
    let labels: Vec<String> = series[0].points.iter().map(|q| q.label.clone()).collect();
    let n = labels.len();
    let (_, hi) = extent(series.iter().flat_map(|s| s.points.iter().map(|q| q.value)));
    let scale = Scale::new(0.0, hi.max(0.0));
    if series.len() > 1 {
        p.legend = series.iter().enumerate().map(|(i, s)| (s.name.clone(), p.color(i))).collect();
    }
    let plot = layout(p, data, 0.0, 0.0);
    let (cx, cy) = (plot.x0 + plot.w() / 2.0, plot.y0 + plot.h() / 2.0);
    let r = 0.38 * plot.w().min(plot.h());
    let angle = |i: usize| TAU * i as f64 / n as f64 - FRAC_PI_2;
    let at = |i: usize, v: f64| {
        let f = scale.frac(v) * r;
        (cx + f * angle(i).cos(), cy + f * angle(i).sin())
    };
    let grid = p.grid;
    if p.style.grid.visible {
        for &t in &scale.ticks[1..] {
            let ring: Vec<(f64, f64)> = (0..n).map(|i| at(i, t)).collect();
            for k in 0..n {
                let (a, b) = (ring[k], ring[(k + 1) % n]);
                p.canvas.dashed_line(a.0, a.1, b.0, b.1, grid);
            }
        }
    }
    for &t in &scale.ticks[1..] {
        let (_, y) = at(0, t);
        p.label(cx + 4.0, y, &format_number(t), 0.0, 1.0);
    }
    for (i, l) in labels.iter().enumerate() {
        let (x, y) = (cx + r * angle(i).cos(), cy + r * angle(i).sin());
        p.canvas.line(cx, cy, x, y, 1, grid);
        let (lx, ly) = (cx + 1.1 * r * angle(i).cos(), cy + 1.1 * r * angle(i).sin());
        let ax = if angle(i).cos().abs() < 0.2 { 0.5 } else if angle(i).cos() > 0.0 { 0.0 } else { 1.0 };
        p.label(lx, ly, l, ax, 0.5);
    }
    let stroke = p.stroke;
    for (s, ser) in series.iter().enumerate() {
        let color = p.color(s);
        let pts: Vec<(f64, f64)> = ser.points.iter().enumerate().map(|(i, q)| at(i, q.value)).collect();
        let fill = color.mix(p.style.background, 0.7);
        p.canvas.fill_polygon(&pts, Paint::solid(fill));
        for k in 0..n {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            p.canvas.line(a.0, a.1, b.0, b.1, stroke, color);
        }
        for (i, &(x, y)) in pts.iter().enumerate() {
            p.marker(x, y, color);
            p.value_label(x + 4.0, y - 4.0, ser.points[i].value, 0.0, 1.0);
        }
    }
    p.draw_legend(plot);
}

fn heatmap(p: &mut Painter, data: &ChartData, cells: &[HeatCell]) {
    let mut rows: Vec<String> = Vec::new();
    let mut cols: Vec<String> = Vec::new();
    for c in cells {
        if !rows.contains(&c.row) {
            rows.push(c.row.clone());
        }
        if !cols.contains(&c.column) {
            cols.push(c.column.clone());
        }
    }
    let (lo, hi) = extent(cells.iter().map(|c| c.value));
    let widest = rows.iter().map(|r| p.text_size(r).0).fold(0.0, f64::max);
    let plot = layout(p, data, widest, 1.0);
    y_categories(p, plot, &rows);
    x_categories(p, plot, &cols);
    let (cw, ch) = (plot.w() / cols.len() as f64, plot.h() / rows.len() as f64);
    let dark = p.color(0).mix(Color::BLACK, 0.2);
    let light = p.style.background.mix(Color::WHITE, 0.5).mix(p.color(0), 0.08);
    for c in cells {
        let i = rows.iter().position(|r| r == &c.row).expect("row");
        let j = cols.iter().position(|k| k == &c.column).expect("column");
        let t = if hi > lo { (c.value - lo) / (hi - lo) } else { 0.5 };
        let color = light.mix(dark, t);
        let (x0, y0) = (plot.x0 + j as f64 * cw, plot.y0 + i as f64 * ch);
        p.canvas.fill_rect(x0 + 1.0, y0 + 1.0, x0 + cw - 1.0, y0 + ch - 1.0, Paint::solid(color));
        p.stats.marks += 1;
        let ink = if color.luminance() > 0.5 { Color::BLACK } else { Color::WHITE };
        p.value_label_colored(x0 + cw / 2.0, y0 + ch / 2.0, c.value, 0.5, 0.5, ink);
    }
    let fg = p.fg;
    p.canvas.stroke_rect(plot.x0, plot.y0, plot.x1, plot.y1, fg);
}

fn funnel(p: &mut Painter, data: &ChartData, stages: &[LabeledValue]) {
    let widest = stages.iter().map(|s| p.text_size(&s.label).0).fold(0.0, f64::max);
    let plot = layout(p, data, widest, 0.0);
    let (_, hi) = extent(stages.iter().map(|s| s.value));
    let band = plot.h() / stages.len() as f64;
    let cx = plot.x0 + plot.w() / 2.0;
    for (i, s) in stages.iter().enumerate() {
        let half = if hi > 0.0 { 0.5 * plot.w() * s.value / hi } else { 0.0 };
        let y = plot.y0 + i as f64 * band;
        let color = p.color(i);
        p.canvas.fill_rect(cx - half.max(1.0), y + band * 0.1, cx + half.max(1.0), y + band * 0.9, p.paint(color));
        p.stats.marks += 1;
        p.label(plot.x0 - 6.0, y + band / 2.0, &s.label, 1.0, 0.5);
        let ink = if color.luminance() > 0.5 { Color::BLACK } else { Color::WHITE };
        p.value_label_colored(cx, y + band / 2.0, s.value, 0.5, 0.5, ink);
    }
}

/// Structural problems that make a chart undrawable.
pub fn structural_error(data: &ChartData) -> Option<String> {
    if let Some(v) = data.content.payload.numbers().iter().find(|v| !v.is_finite()) {
        return Some(format!("non-finite value {v}"));
    }
    match &data.content.payload {
        Payload::Series(series) => {
            let labels: Vec<&str> = series[0].points.iter().map(|q| q.label.as_str()).collect();
            for s in series {
                let l: Vec<&str> = s.points.iter().map(|q| q.label.as_str()).collect();
                if l != labels {
                    return Some(format!("series `{}` does not share the category list", s.name));
                }
            }
            if data.chart_type == ChartType::Radar && labels.len() < 3 {
                return Some("radar needs at least three axes".into());
            }
            let stacked = matches!(data.chart_type, ChartType::StackedBar | ChartType::StackedArea);
            if stacked && series.iter().any(|s| s.points.iter().any(|q| q.value < 0.0)) {
                return Some("negative value in a stacked chart".into());
            }
        }
        Payload::Slices(slices) => {
            if slices.iter().any(|s| s.value < 0.0) {
                return Some("negative slice".into());
            }
            if slices.iter().map(|s| s.value).sum::<f64>() <= 0.0 {
                return Some("slices sum to zero".into());
            }
        }
        Payload::Points(series) => {
            let arity = if data.chart_type == ChartType::Bubble { 3 } else { 2 };
            for s in series {
                if let Some(q) = s.points.iter().find(|q| q.len() != arity) {
                    return Some(format!("point of arity {} in `{}`", q.len(), s.name));
                }
            }
            if arity == 3 && series.iter().any(|s| s.points.iter().any(|q| q[2] < 0.0)) {
                return Some("negative bubble size".into());
            }
        }
        Payload::Bins(bins) => {
            if let Some(b) = bins.iter().find(|b| !(b.lower < b.upper)) {
                return Some(format!("bin with lower {} >= upper {}", b.lower, b.upper));
            }
        }
        Payload::Samples(groups) => {
            if let Some(g) = groups.iter().find(|g| g.values.is_empty()) {
                return Some(format!("group `{}` has no values", g.name));
            }
        }
        Payload::Candles(_) | Payload::Cells(_) => {}
    }
    None
}

/// Whether there is nothing to plot.
pub fn is_empty_plot(data: &ChartData) -> bool {
    match &data.content.payload {
        Payload::Series(s) => s.is_empty() || s.iter().all(|s| s.points.is_empty()),
        Payload::Points(s) => s.is_empty() || s.iter().all(|s| s.points.is_empty()),
        p => p.is_empty(),
    }
}

pub fn draw(data: &ChartData, style: &StyleSpec) -> (Canvas, SceneStats) {
    let mut p = Painter::new(style);
    match &data.content.payload {
        Payload::Series(series) if data.chart_type == ChartType::Radar => radar(&mut p, data, series),
        Payload::Series(series) => series_chart(&mut p, data, series),
        Payload::Slices(slices) if data.chart_type == ChartType::Funnel => funnel(&mut p, data, slices),
        Payload::Slices(slices) => pie(&mut p, data, slices, data.chart_type == ChartType::Donut),
        Payload::Points(series) => point_chart(&mut p, data, series, data.chart_type == ChartType::Bubble),
        Payload::Bins(bins) => histogram(&mut p, data, bins),
        Payload::Samples(groups) => box_plot(&mut p, data, groups),
        Payload::Candles(candles) => candlestick(&mut p, data, candles),
        Payload::Cells(cells) => heatmap(&mut p, data, cells),
    }
    (p.canvas, p.stats)
}

/// The "No Data" placard drawn for empty charts.
pub fn draw_empty(data: &ChartData, style: &StyleSpec) -> (Canvas, SceneStats) {
    let mut p = Painter::new(style);
    let plot = layout(&mut p, data, 0.0, 0.0);
    let fg = p.grid;
    p.canvas.stroke_rect(plot.x0, plot.y0, plot.x1, plot.y1, fg);
    let big = TextStyle { scale: p.text.scale + 1, color: p.grid, ..p.text };
    p.label_with(plot.x0 + plot.w() / 2.0, plot.y0 + plot.h() / 2.0, "No Data", 0.5, 0.5, big);
    (p.canvas, p.stats)
}
