//! Style generation: N pairwise-distinct rendering recipes per chart type.
//!
//! A style is a point in a finite product space (family, palette, legend,
//! grid, font, texture, annotation, background, size). Each spec draws its
//! coordinates from a stream keyed by its index; collisions walk to the next
//! free point of the same family and annotation bucket.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::style::{Font, FontFamily, Grid, GridAxes, Legend, LegendPosition, MarkTexture};
use crate::model::{ChartType, Color, StyleFamily, StyleSpec};
use crate::rng::{derive_seed, stream, Rng};

pub const DEFAULT_ANNOTATED_FRACTION: f64 = 0.5;

const PALETTES: [[&str; 12]; 8] = [
    [
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
        "#bcbd22", "#17becf", "#393b79", "#637939",
    ],
    [
        "#e69f00", "#56b4e9", "#009e73", "#f0e442", "#0072b2", "#d55e00", "#cc79a7", "#000000",
        "#999999", "#882255", "#44aa99", "#117733",
    ],
    [
        "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
        "#ccb974", "#64b5cd", "#2f4b7c", "#a05195",
    ],
    [
        "#440154", "#482878", "#3e4989", "#31688e", "#26828e", "#1f9e89", "#35b779", "#6ece58",
        "#b5de2b", "#fde725", "#2a788e", "#22a884",
    ],
    [
        "#636efa", "#ef553b", "#00cc96", "#ab63fa", "#ffa15a", "#19d3f3", "#ff6692", "#b6e880",
        "#ff97ff", "#fecb52", "#1f3a93", "#c0392b",
    ],
    [
        "#8dd3c7", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#bc80bd",
        "#ccebc5", "#ffed6f", "#d9d9d9", "#6a3d9a",
    ],
    [
        "#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c", "#fdbf6f", "#ff7f00",
        "#cab2d6", "#6a3d9a", "#b15928", "#ffff99",
    ],
    [
        "#003f5c", "#2f4b7c", "#665191", "#a05195", "#d45087", "#f95d6a", "#ff7c43", "#ffa600",
        "#488f31", "#8aac49", "#c6c96a", "#de425b",
    ],
];

const BACKGROUNDS: [&str; 4] = ["#ffffff", "#f5f5f5", "#fbf8ef", "#eef2f7"];
const FONT_SIZES: [f64; 3] = [8.0, 10.0, 12.0];
const SIZES: [(u32, u32); 4] = [(640, 480), (800, 600), (960, 540), (720, 720)];

/// Radices of the free coordinates (everything except family and annotation).
const RADICES: [usize; 8] = [
    PALETTES.len(),
    1 + LegendPosition::ALL.len(),
    1 + GridAxes::ALL.len(),
    FontFamily::ALL.len(),
    FONT_SIZES.len(),
    MarkTexture::ALL.len(),
    BACKGROUNDS.len(),
    SIZES.len(),
];

/// Distinct points per (family, annotation) bucket.
pub fn bucket_capacity() -> usize {
    RADICES.iter().product()
}

/// Distinct specs in the whole style space.
pub fn capacity() -> usize {
    bucket_capacity() * StyleFamily::ALL.len() * 2
}

fn palette(i: usize) -> Vec<Color> {
    PALETTES[i].iter().map(|h| h.parse().expect("palette literal")).collect()
}

/// A family's preferred coordinates; other values are drawn less often.
fn family_defaults(family: StyleFamily) -> [usize; 8] {
    match family {
        // palette, legend, grid, font, size, texture, background, figure
        StyleFamily::Classic => [0, 2, 3, 0, 1, 0, 0, 1],
        StyleFamily::Minimal => [2, 0, 0, 3, 1, 0, 1, 0],
        StyleFamily::Presentation => [4, 5, 2, 1, 2, 3, 3, 2],
        StyleFamily::Dense => [7, 1, 3, 3, 0, 1, 2, 3],
    }
}

fn draw(family: StyleFamily, rng: &mut Rng) -> [usize; 8] {
    let defaults = family_defaults(family);
    let mut digits = [0; 8];
    for k in 0..8 {
        digits[k] = if rng.gen_bool(0.5) { defaults[k] } else { rng.gen_range(0..RADICES[k]) };
    }
    digits
}

fn increment(digits: &mut [usize; 8]) {
    for k in 0..8 {
        digits[k] += 1;
        if digits[k] < RADICES[k] {
            return;
        }
        digits[k] = 0;
    }
}

fn build(chart_type: ChartType, index: usize, family: StyleFamily, annotate: bool, d: [usize; 8], seed: u64) -> StyleSpec {
    let legend = match d[1] {
        0 => Legend { visible: false, position: LegendPosition::TopRight },
        p => Legend { visible: true, position: LegendPosition::ALL[p - 1] },
    };
    let grid = match d[2] {
        0 => Grid { visible: false, which: GridAxes::Both },
        g => Grid { visible: true, which: GridAxes::ALL[g - 1] },
    };
    StyleSpec {
        style_id: format!("{}-s{index:04}", chart_type.id()),
        chart_type,
        family,
        palette: palette(d[0]),
        legend,
        grid,
        font: Font { family: FontFamily::ALL[d[3]], size_pt: FONT_SIZES[d[4]] },
        mark_texture: MarkTexture::ALL[d[5]],
        annotate_values: annotate,
        background: BACKGROUNDS[d[6]].parse().expect("background literal"),
        figure_size_px: SIZES[d[7]],
        seed,
    }
}

pub fn generate_styles(chart_type: ChartType, n: usize, seed: u64) -> Result<Vec<StyleSpec>> {
    generate_styles_with(chart_type, n, seed, DEFAULT_ANNOTATED_FRACTION)
}

/// `n` pairwise-distinct specs; families are assigned round-robin and
/// exactly `round(fraction * n)` specs annotate values.
pub fn generate_styles_with(chart_type: ChartType, n: usize, seed: u64, fraction: f64) -> Result<Vec<StyleSpec>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("annotated fraction {fraction} outside [0, 1]")));
    }
    let families = StyleFamily::ALL.len();
    let annotated = (fraction * n as f64).round() as usize;
    let mut flags: Vec<bool> = (0..n).map(|i| i < annotated).collect();
    flags.shuffle(&mut stream(derive_seed(seed, &[chart_type.id(), "annotate"])));

    let mut demand = vec![0usize; families * 2];
    for (i, flag) in flags.iter().enumerate() {
        demand[(i % families) * 2 + usize::from(*flag)] += 1;
    }
    if demand.iter().any(|d| *d > bucket_capacity()) {
        return Err(Error::Capacity { requested: n, bound: capacity() });
    }

    let mut taken: HashSet<(usize, bool, [usize; 8])> = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for (i, &annotate) in flags.iter().enumerate() {
        let family = StyleFamily::ALL[i % families];
        let spec_seed = derive_seed(seed, &[chart_type.id(), "style", &i.to_string()]);
        let mut rng = stream(spec_seed);
        let mut digits = draw(family, &mut rng);
        let mut attempts = 0;
        while taken.contains(&(i % families, annotate, digits)) {
            attempts += 1;
            if attempts < 16 {
                digits = draw(family, &mut rng);
            } else {
                increment(&mut digits);
            }
        }
        taken.insert((i % families, annotate, digits));
        out.push(build(chart_type, i, family, annotate, digits, spec_seed));
    }
    Ok(out)
}

fn rgb_distance(a: Color, b: Color) -> f64 {
    let d: f64 = (0..3).map(|k| (a.0[k] as f64 - b.0[k] as f64).powi(2)).sum();
    d.sqrt() / (3.0f64.sqrt() * 255.0)
}

/// Dissimilarity of two specs of one chart type; 0 exactly when every field
/// other than the id and seed is equal.
pub fn style_distance(a: &StyleSpec, b: &StyleSpec) -> Result<f64> {
    if a.chart_type != b.chart_type {
        return Err(Error::InvalidArgument(format!(
            "styles of different chart types ({} and {})",
            a.chart_type, b.chart_type
        )));
    }
    let flag = |x: bool| if x { 1.0 } else { 0.0 };
    let longest = a.palette.len().max(b.palette.len()).max(1);
    let palette = (0..longest)
        .map(|i| match (a.palette.get(i), b.palette.get(i)) {
            (Some(x), Some(y)) if x == y => 0.0,
            (Some(x), Some(y)) => 0.5 + 0.5 * rgb_distance(*x, *y),
            _ => 1.0,
        })
        .sum::<f64>()
        / longest as f64;
    let size = |(w, h): (u32, u32)| (w as f64, h as f64);
    let ((aw, ah), (bw, bh)) = (size(a.figure_size_px), size(b.figure_size_px));
    let figure = ((aw - bw).abs() + (ah - bh).abs()) / (aw + ah + bw + bh);
    let font_size = (a.font.size_pt - b.font.size_pt).abs() / (a.font.size_pt.abs() + b.font.size_pt.abs()).max(1e-9);
    Ok(flag(a.family != b.family)
        + palette
        + flag(a.legend != b.legend)
        + flag(a.grid != b.grid)
        + flag(a.font.family != b.font.family)
        + font_size
        + flag(a.mark_texture != b.mark_texture)
        + flag(a.annotate_values != b.annotate_values)
        + flag(a.background != b.background) * (0.5 + 0.5 * rgb_distance(a.background, b.background))
        + figure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_bar_styles_cover_every_family() {
        let s = generate_styles(ChartType::VerticalBar, 4, 3).unwrap();
        let families: HashSet<StyleFamily> = s.iter().map(|s| s.family).collect();
        assert_eq!(families.len(), 4);
        assert_eq!(s.iter().filter(|s| s.annotate_values).count(), 2);
        for spec in &s {
            spec.check().unwrap();
        }
    }

    #[test]
    fn four_hundred_line_styles_are_pairwise_distinct() {
        let s = generate_styles(ChartType::Line, 400, 9).unwrap();
        assert_eq!(s.len(), 400);
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert!(style_distance(&s[i], &s[j]).unwrap() > 0.0, "{i} {j}");
            }
        }
        let ids: HashSet<&str> = s.iter().map(|s| s.style_id.as_str()).collect();
        assert_eq!(ids.len(), 400);
        let annotated = s.iter().filter(|s| s.annotate_values).count();
        assert_eq!(annotated, 200);
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_styles(ChartType::Pie, 2, 5).unwrap(), generate_styles(ChartType::Pie, 2, 5).unwrap());
        assert_ne!(generate_styles(ChartType::Pie, 2, 5).unwrap(), generate_styles(ChartType::Pie, 2, 6).unwrap());
    }

    #[test]
    fn oversized_requests_name_the_bound() {
        match generate_styles(ChartType::Line, capacity() + 1, 0) {
            Err(Error::Capacity { requested, bound }) => {
                assert_eq!(requested, capacity() + 1);
                assert_eq!(bound, capacity());
            }
            other => panic!("{other:?}"),
        }
        assert!(generate_styles(ChartType::Line, 0, 0).is_err());
        assert!(matches!(
            generate_styles_with(ChartType::Line, 10, 0, 1.0),
            Ok(v) if v.iter().all(|s| s.annotate_values)
        ));
    }

    #[test]
    fn saturated_bucket_still_terminates() {
        // 2 buckets per family at fraction 0: walk must find free points
        let s = generate_styles_with(ChartType::Radar, 4 * 600, 1, 0.0).unwrap();
        let keys: HashSet<String> = s
            .iter()
            .map(|s| {
                let mut v = serde_json::to_value(s).unwrap();
                v.as_object_mut().unwrap().remove("style_id");
                v.as_object_mut().unwrap().remove("seed");
                v.to_string()
            })
            .collect();
        assert_eq!(keys.len(), s.len());
    }

    #[test]
    fn distance_basics() {
        let s = generate_styles(ChartType::Line, 2, 0).unwrap();
        let mut twin = s[0].clone();
        twin.style_id = "other".into();
        twin.seed = 99;
        assert_eq!(style_distance(&s[0], &twin).unwrap(), 0.0);
        twin.grid.visible = !twin.grid.visible;
        assert!(style_distance(&s[0], &twin).unwrap() > 0.0);
        let mut other_type = s[0].clone();
        other_type.chart_type = ChartType::Pie;
        assert!(style_distance(&s[0], &other_type).is_err());
    }

    proptest! {
        #[test]
        fn distance_is_symmetric(seed: u64, i in 0usize..20, j in 0usize..20) {
            let s = generate_styles(ChartType::Heatmap, 20, seed).unwrap();
            let ab = style_distance(&s[i], &s[j]).unwrap();
            let ba = style_distance(&s[j], &s[i]).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab == 0.0, i == j);
        }
    }
}
