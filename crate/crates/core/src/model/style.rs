use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ChartType;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Color(pub [u8; 3]);

impl Color {
    pub const WHITE: Color = Color([255, 255, 255]);
    pub const BLACK: Color = Color([0, 0, 0]);

    pub fn mix(self, other: Color, t: f64) -> Color {
        let t = t.clamp(0.0, 1.0);
        let c = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
        Color([
            c(self.0[0], other.0[0]),
            c(self.0[1], other.0[1]),
            c(self.0[2], other.0[2]),
        ])
    }

    pub fn luminance(self) -> f64 {
        (0.299 * self.0[0] as f64 + 0.587 * self.0[1] as f64 + 0.114 * self.0[2] as f64) / 255.0
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.0[0], self.0[1], self.0[2])
    }
}

impl FromStr for Color {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s
            .strip_prefix('#')
            .filter(|h| h.len() == 6)
            .ok_or_else(|| Error::InvalidArgument(format!("color `{s}` is not #rrggbb")))?;
        let byte = |i: usize| {
            u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|_| Error::InvalidArgument(format!("color `{s}` is not #rrggbb")))
        };
        Ok(Color([byte(0)?, byte(2)?, byte(4)?]))
    }
}

impl Serialize for Color {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Color {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Default aesthetic a style is derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StyleFamily {
    Classic,
    Minimal,
    Presentation,
    Dense,
}

impl StyleFamily {
    pub const ALL: [StyleFamily; 4] = [
        StyleFamily::Classic,
        StyleFamily::Minimal,
        StyleFamily::Presentation,
        StyleFamily::Dense,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegendPosition {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
    Outside,
}

impl LegendPosition {
    pub const ALL: [LegendPosition; 5] = [
        LegendPosition::TopLeft,
        LegendPosition::TopRight,
        LegendPosition::BottomLeft,
        LegendPosition::BottomRight,
        LegendPosition::Outside,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Legend {
    pub visible: bool,
    pub position: LegendPosition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAxes {
    X,
    Y,
    Both,
}

impl GridAxes {
    pub const ALL: [GridAxes; 3] = [GridAxes::X, GridAxes::Y, GridAxes::Both];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    pub visible: bool,
    pub which: GridAxes,
}

/// Bundled bitmap font variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FontFamily {
    Mono,
    Bold,
    Wide,
    Condensed,
}

impl FontFamily {
    pub const ALL: [FontFamily; 4] = [
        FontFamily::Mono,
        FontFamily::Bold,
        FontFamily::Wide,
        FontFamily::Condensed,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Font {
    pub family: FontFamily,
    pub size_pt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkTexture {
    Solid,
    Hatched,
    Dotted,
    Gradient,
}

impl MarkTexture {
    pub const ALL: [MarkTexture; 4] = [
        MarkTexture::Solid,
        MarkTexture::Hatched,
        MarkTexture::Dotted,
        MarkTexture::Gradient,
    ];
}

/// One visual-variation recipe for rendering a chart type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSpec {
    pub style_id: String,
    pub chart_type: ChartType,
    pub family: StyleFamily,
    pub palette: Vec<Color>,
    pub legend: Legend,
    pub grid: Grid,
    pub font: Font,
    pub mark_texture: MarkTexture,
    pub annotate_values: bool,
    pub background: Color,
    pub figure_size_px: (u32, u32),
    pub seed: u64,
}

impl StyleSpec {
    pub const MIN_SIDE: u32 = 320;
    pub const MAX_SIDE: u32 = 2048;
    pub const MIN_PALETTE: usize = 12;

    pub fn check(&self) -> Result<(), Error> {
        let (w, h) = self.figure_size_px;
        let side = Self::MIN_SIDE..=Self::MAX_SIDE;
        if !side.contains(&w) || !side.contains(&h) {
            return Err(Error::InvalidArgument(format!("figure size {w}x{h} outside [320, 2048]")));
        }
        if self.palette.len() < Self::MIN_PALETTE {
            return Err(Error::InvalidArgument(format!(
                "palette has {} colors, need at least {}",
                self.palette.len(),
                Self::MIN_PALETTE
            )));
        }
        if !(self.font.size_pt.is_finite() && self.font.size_pt > 0.0) {
            return Err(Error::InvalidArgument("font size must be positive".into()));
        }
        Ok(())
    }

    pub fn series_color(&self, i: usize) -> Color {
        self.palette[i % self.palette.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colors_serialize_as_hex() {
        let c: Color = "#1f77b4".parse().unwrap();
        assert_eq!(c, Color([0x1f, 0x77, 0xb4]));
        assert_eq!(serde_json::to_string(&c).unwrap(), "\"#1f77b4\"");
        assert!("1f77b4".parse::<Color>().is_err());
        assert!("#1f77bz".parse::<Color>().is_err());
    }
}
