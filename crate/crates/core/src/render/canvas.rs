//! RGB8 raster with the few primitives charts need. No anti-aliasing, so
//! output is a pure function of the inputs.

use font8x8::legacy::BASIC_LEGACY;

use crate::model::style::{FontFamily, MarkTexture};
use crate::model::Color;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

/// Fill pattern for filled marks.
#[derive(Debug, Clone, Copy)]
pub struct Paint {
    pub color: Color,
    pub texture: MarkTexture,
}

impl Paint {
    pub fn solid(color: Color) -> Paint {
        Paint { color, texture: MarkTexture::Solid }
    }

    /// Color at a pixel; `t` is the vertical position within the shape (0 top).
    pub fn at(&self, x: i32, y: i32, t: f64) -> Color {
        match self.texture {
            MarkTexture::Solid => self.color,
            MarkTexture::Hatched => {
                if (x + y).rem_euclid(7) < 2 {
                    self.color.mix(Color::BLACK, 0.35)
                } else {
                    self.color
                }
            }
            MarkTexture::Dotted => {
                if x.rem_euclid(5) == 0 && y.rem_euclid(5) == 0 {
                    self.color.mix(Color::WHITE, 0.7)
                } else {
                    self.color
                }
            }
            MarkTexture::Gradient => self.color.mix(Color::WHITE, 0.45 * t.clamp(0.0, 1.0)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TextStyle {
    pub family: FontFamily,
    pub scale: u32,
    pub color: Color,
}

impl TextStyle {
    fn cell(&self) -> (u32, u32) {
        match self.family {
            FontFamily::Wide => (self.scale + self.scale.div_ceil(2), self.scale),
            _ => (self.scale, self.scale),
        }
    }

    fn advance(&self) -> u32 {
        let (sx, _) = self.cell();
        match self.family {
            FontFamily::Condensed => 7 * sx,
            FontFamily::Bold => 8 * sx + 1,
            _ => 8 * sx,
        }
    }

    pub fn measure(&self, text: &str) -> (u32, u32) {
        let n = text.chars().count() as u32;
        (n * self.advance(), 8 * self.scale)
    }
}

fn glyph(c: char) -> [u8; 8] {
    let code = c as usize;
    if code < 128 {
        BASIC_LEGACY[code]
    } else {
        BASIC_LEGACY['?' as usize]
    }
}

impl Canvas {
    pub fn new(width: u32, height: u32, background: Color) -> Canvas {
        let mut pixels = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            pixels.extend_from_slice(&background.0);
        }
        Canvas { width, height, pixels }
    }

    #[inline]
    pub fn put(&mut self, x: i32, y: i32, c: Color) {
        if x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 {
            return;
        }
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&c.0);
    }

    pub fn get(&self, x: u32, y: u32) -> Color {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        Color([self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]])
    }

    pub fn fill_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, paint: Paint) {
        let (xa, xb) = (x0.min(x1).round() as i32, x0.max(x1).round() as i32);
        let (ya, yb) = (y0.min(y1).round() as i32, y0.max(y1).round() as i32);
        let yb = yb.max(ya + 1);
        let xb = xb.max(xa + 1);
        let span = (yb - ya).max(1) as f64;
        for y in ya..yb {
            let t = (y - ya) as f64 / span;
            for x in xa..xb {
                self.put(x, y, paint.at(x, y, t));
            }
        }
    }

    pub fn stroke_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, color: Color) {
        self.line(x0, y0, x1, y0, 1, color);
        self.line(x1, y0, x1, y1, 1, color);
        self.line(x1, y1, x0, y1, 1, color);
        self.line(x0, y1, x0, y0, 1, color);
    }

    /// Straight segment of the given thickness.
    pub fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, thickness: u32, color: Color) {
        let (mut x, mut y) = (x0.round() as i32, y0.round() as i32);
        let (xe, ye) = (x1.round() as i32, y1.round() as i32);
        let dx = (xe - x).abs();
        let dy = -(ye - y).abs();
        let sx = if x < xe { 1 } else { -1 };
        let sy = if y < ye { 1 } else { -1 };
        let mut err = dx + dy;
        let r = thickness as i32 / 2;
        let r_hi = thickness as i32 - 1 - r;
        loop {
            for oy in -r..=r_hi {
                for ox in -r..=r_hi {
                    self.put(x + ox, y + oy, color);
                }
            }
            if x == xe && y == ye {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    pub fn dashed_line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, color: Color) {
        let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
        let steps = len.round() as i32;
        for s in 0..=steps {
            if s % 6 < 3 {
                let t = if steps == 0 { 0.0 } else { s as f64 / steps as f64 };
                self.put((x0 + (x1 - x0) * t).round() as i32, (y0 + (y1 - y0) * t).round() as i32, color);
            }
        }
    }

    pub fn fill_circle(&mut self, cx: f64, cy: f64, r: f64, paint: Paint) {
        let (xa, xb) = ((cx - r).floor() as i32, (cx + r).ceil() as i32);
        let (ya, yb) = ((cy - r).floor() as i32, (cy + r).ceil() as i32);
        let span = (yb - ya).max(1) as f64;
        for y in ya..=yb {
            for x in xa..=xb {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r {
                    self.put(x, y, paint.at(x, y, (y - ya) as f64 / span));
                }
            }
        }
    }

    pub fn stroke_circle(&mut self, cx: f64, cy: f64, r: f64, color: Color) {
        let steps = (r * 8.0).max(16.0) as i32;
        for s in 0..steps {
            let a = std::f64::consts::TAU * s as f64 / steps as f64;
            self.put((cx + r * a.cos()).round() as i32, (cy + r * a.sin()).round() as i32, color);
        }
    }

    /// Even-odd scanline fill sampled at pixel centers.
    pub fn fill_polygon(&mut self, points: &[(f64, f64)], paint: Paint) {
        if points.len() < 3 {
            return;
        }
        let ya = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor() as i32;
        let yb = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil() as i32;
        let span = (yb - ya).max(1) as f64;
        let mut xs: Vec<f64> = Vec::new();
        for y in ya..=yb {
            let sy = y as f64 + 0.5;
            xs.clear();
            for i in 0..points.len() {
                let (a, b) = (points[i], points[(i + 1) % points.len()]);
                if (a.1 <= sy && b.1 > sy) || (b.1 <= sy && a.1 > sy) {
                    xs.push(a.0 + (sy - a.1) / (b.1 - a.1) * (b.0 - a.0));
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks(2) {
                if let [l, r] = pair {
                    let (xa, xb) = ((l - 0.5).ceil() as i32, (r - 0.5).floor() as i32);
                    for x in xa..=xb {
                        self.put(x, y, paint.at(x, y, (y - ya) as f64 / span));
                    }
                }
            }
        }
    }

    /// Draws text with its top-left corner at (x, y).
    pub fn text(&mut self, x: f64, y: f64, text: &str, style: TextStyle) {
        let (sx, sy) = style.cell();
        let (x0, y0) = (x.round() as i32, y.round() as i32);
        let mut pen = x0;
        for c in text.chars() {
            let g = glyph(c);
            for (row, bits) in g.iter().enumerate() {
                for col in 0..8 {
                    if bits & (1 << col) == 0 {
                        continue;
                    }
                    let px = pen + col * sx as i32;
                    let py = y0 + row as i32 * sy as i32;
                    for dy in 0..sy as i32 {
                        for dx in 0..sx as i32 {
                            self.put(px + dx, py + dy, style.color);
                            if style.family == FontFamily::Bold {
                                self.put(px + dx + 1, py + dy, style.color);
                            }
                        }
                    }
                }
            }
            pen += style.advance() as i32;
        }
    }

    /// Text rotated a quarter turn counter-clockwise, reading bottom to top,
    /// with its bounding box's top-left at (x, y).
    pub fn text_vertical(&mut self, x: f64, y: f64, text: &str, style: TextStyle) {
        let (w, _) = style.measure(text);
        let mut tmp = Canvas::new(w.max(1), 8 * style.scale, Color::WHITE);
        let mask = Color([0, 0, 1]);
        tmp.text(0.0, 0.0, text, TextStyle { color: mask, ..style });
        let (x0, y0) = (x.round() as i32, y.round() as i32);
        for ty in 0..tmp.height {
            for tx in 0..tmp.width {
                if tmp.get(tx, ty) == mask {
                    self.put(x0 + ty as i32, y0 + (w - 1 - tx) as i32, style.color);
                }
            }
        }
    }

    /// Fraction of pixels that differ from the top-left pixel.
    pub fn ink_fraction(&self) -> f64 {
        ink_fraction(&self.pixels)
    }

    pub fn encode_png(&self) -> Vec<u8> {
        encode_png(self.width, self.height, &self.pixels)
    }
}

pub fn ink_fraction(rgb: &[u8]) -> f64 {
    if rgb.len() < 3 {
        return 0.0;
    }
    let bg = &rgb[..3];
    let total = rgb.len() / 3;
    let ink = rgb.chunks_exact(3).filter(|p| *p != bg).count();
    ink as f64 / total as f64
}

/// PNG with a fixed encoder configuration so digests are stable.
pub fn encode_png(width: u32, height: u32, rgb: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, width, height);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_compression(png::Compression::Fast);
    enc.set_filter(png::Filter::Sub);
    let mut writer = enc.write_header().expect("png header into memory");
    writer.write_image_data(rgb).expect("png data into memory");
    writer.finish().expect("png finish");
    out
}

/// Decodes an RGB8 PNG into (width, height, pixels).
pub fn decode_png(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>), String> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let size = reader.output_buffer_size().ok_or("image too large")?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(format!("expected RGB8, found {:?}/{:?}", info.color_type, info.bit_depth));
    }
    buf.truncate(info.buffer_size());
    Ok((info.width, info.height, buf))
}
