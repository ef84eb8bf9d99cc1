//! Pixel, color and display-geometry types shared by every other module.
//!
//! Color channels are linear reals in `[0, 1]`. Buffers use a top-left pixel
//! origin with `+y` pointing down; metric coordinates put the origin at the
//! display center with `+x` right and `+y` up.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// BT.709 luma weights used by the transparent panels to derive per-pixel
/// opacity from emitted color.
pub const BT709: [f64; 3] = [0.2126, 0.7152, 0.0722];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Color {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Color {
    pub const BLACK: Color = Color::new(0.0, 0.0, 0.0);
    pub const WHITE: Color = Color::new(1.0, 1.0, 1.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Color { r, g, b }
    }

    /// Builds a color, rejecting channels outside `[0, 1]` (or NaN).
    pub fn checked(r: f64, g: f64, b: f64) -> Result<Self> {
        for (name, v) in [("r", r), ("g", g), ("b", b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("color channel {name}={v} outside [0, 1]")));
            }
        }
        Ok(Color { r, g, b })
    }

    pub fn scale(self, k: f64) -> Self {
        Color::new(self.r * k, self.g * k, self.b * k)
    }

    pub fn add(self, o: Color) -> Self {
        Color::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }

    pub fn lerp(self, o: Color, t: f64) -> Self {
        Color::new(
            self.r + (o.r - self.r) * t,
            self.g + (o.g - self.g) * t,
            self.b + (o.b - self.b) * t,
        )
    }

    pub fn clamp_unit(self) -> Self {
        Color::new(self.r.clamp(0.0, 1.0), self.g.clamp(0.0, 1.0), self.b.clamp(0.0, 1.0))
    }

    pub fn channels(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }
}

/// Opacity of a transparent-OLED pixel emitting `c`: black transmits
/// everything, white blocks everything.
pub fn luminance_alpha(c: Color) -> f64 {
    BT709[0] * c.r + BT709[1] * c.g + BT709[2] * c.b
}

/// One buffer sample: straight (non-premultiplied) color plus coverage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Pixel {
    pub color: Color,
    pub alpha: f64,
}

impl Pixel {
    pub const TRANSPARENT: Pixel = Pixel { color: Color::BLACK, alpha: 0.0 };

    pub const fn new(color: Color, alpha: f64) -> Self {
        Pixel { color, alpha }
    }

    pub const fn opaque(color: Color) -> Self {
        Pixel { color, alpha: 1.0 }
    }

    /// The light a panel actually emits for this sample (color over black).
    pub fn emitted(self) -> Color {
        self.color.scale(self.alpha)
    }

    /// Porter-Duff source-over with straight alpha.
    pub fn over(self, dst: Pixel) -> Pixel {
        let a = self.alpha + dst.alpha * (1.0 - self.alpha);
        if a <= 0.0 {
            return Pixel::TRANSPARENT;
        }
        let w_dst = dst.alpha * (1.0 - self.alpha);
        let c = self.color.scale(self.alpha).add(dst.color.scale(w_dst)).scale(1.0 / a);
        Pixel::new(c.clamp_unit(), a.min(1.0))
    }
}

/// Row-major RGBA raster.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelBuffer {
    width: usize,
    height: usize,
    pixels: Vec<Pixel>,
}

impl PixelBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, Pixel::TRANSPARENT)
    }

    pub fn filled(width: usize, height: usize, px: Pixel) -> Self {
        assert!(width > 0 && height > 0, "buffer dimensions must be positive");
        PixelBuffer { width, height, pixels: vec![px; width * height] }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Pixel>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::domain("buffer dimensions must be positive"));
        }
        if pixels.len() != width * height {
            return Err(Error::domain(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(PixelBuffer { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Pixel] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Pixel {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: Pixel) {
        self.pixels[y * self.width + x] = px;
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, Pixel> {
        self.pixels.chunks(self.width)
    }

    /// Composites `src` over `self` pixel by pixel. Dimensions must match.
    pub fn draw_over(&mut self, src: &PixelBuffer) -> Result<()> {
        if src.dims() != self.dims() {
            return Err(Error::domain(format!(
                "cannot composite {}x{} over {}x{}",
                src.width, src.height, self.width, self.height
            )));
        }
        for (d, s) in self.pixels.iter_mut().zip(&src.pixels) {
            if s.alpha > 0.0 {
                *d = s.over(*d);
            }
        }
        Ok(())
    }

    /// Bilinear sample of the emitted (premultiplied) color at continuous
    /// position `(x, y)` in pixel units, pixel centers at half-integers.
    /// Neighbors are clamped to the edge.
    pub fn sample_emitted_bilinear(&self, x: f64, y: f64) -> Color {
        let fx = x - 0.5;
        let fy = y - 0.5;
        let x0f = fx.floor();
        let y0f = fy.floor();
        let tx = fx - x0f;
        let ty = fy - y0f;
        let max_x = self.width as i64 - 1;
        let max_y = self.height as i64 - 1;
        let x0 = (x0f as i64).clamp(0, max_x) as usize;
        let x1 = (x0f as i64 + 1).clamp(0, max_x) as usize;
        let y0 = (y0f as i64).clamp(0, max_y) as usize;
        let y1 = (y0f as i64 + 1).clamp(0, max_y) as usize;
        let c00 = self.get(x0, y0).emitted();
        let c10 = self.get(x1, y0).emitted();
        let c01 = self.get(x0, y1).emitted();
        let c11 = self.get(x1, y1).emitted();
        let top = c00.lerp(c10, tx);
        let bottom = c01.lerp(c11, tx);
        top.lerp(bottom, ty)
    }

    /// Straight-alpha bilinear sample with edge clamping; color is
    /// interpolated premultiplied and un-premultiplied afterwards.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Pixel {
        let fx = x - 0.5;
        let fy = y - 0.5;
        let x0f = fx.floor();
        let y0f = fy.floor();
        let tx = fx - x0f;
        let ty = fy - y0f;
        let max_x = self.width as i64 - 1;
        let max_y = self.height as i64 - 1;
        let xs = [(x0f as i64).clamp(0, max_x) as usize, (x0f as i64 + 1).clamp(0, max_x) as usize];
        let ys = [(y0f as i64).clamp(0, max_y) as usize, (y0f as i64 + 1).clamp(0, max_y) as usize];
        let weights = [(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty];
        let samples = [self.get(xs[0], ys[0]), self.get(xs[1], ys[0]), self.get(xs[0], ys[1]), self.get(xs[1], ys[1])];
        let mut alpha = 0.0;
        let mut premul = Color::BLACK;
        for (w, s) in weights.iter().zip(samples) {
            alpha += w * s.alpha;
            premul = premul.add(s.color.scale(w * s.alpha));
        }
        if alpha <= 0.0 {
            return Pixel::TRANSPARENT;
        }
        Pixel::new(premul.scale(1.0 / alpha).clamp_unit(), alpha.min(1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerId {
    Front,
    Back,
}

impl LayerId {
    pub const ALL: [LayerId; 2] = [LayerId::Front, LayerId::Back];

    pub fn other(self) -> LayerId {
        match self {
            LayerId::Front => LayerId::Back,
            LayerId::Back => LayerId::Front,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LayerId::Front => "front",
            LayerId::Back => "back",
        }
    }
}

impl std::fmt::Display for LayerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Panel resolution, physical size and the gap between the two panels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplayGeometry {
    pub width_px: usize,
    pub height_px: usize,
    pub physical_width_m: f64,
    pub physical_height_m: f64,
    pub separation_m: f64,
}

impl Default for DisplayGeometry {
    /// 55" 16:9 full-HD panels, 72 cm apart.
    fn default() -> Self {
        DisplayGeometry {
            width_px: 1920,
            height_px: 1080,
            physical_width_m: 1.218,
            physical_height_m: 0.685,
            separation_m: 0.72,
        }
    }
}

impl DisplayGeometry {
    pub fn new(
        width_px: usize,
        height_px: usize,
        physical_width_m: f64,
        physical_height_m: f64,
        separation_m: f64,
    ) -> Result<Self> {
        let g = DisplayGeometry { width_px, height_px, physical_width_m, physical_height_m, separation_m };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::domain("display resolution must be positive"));
        }
        for (name, v) in [
            ("physical width", self.physical_width_m),
            ("physical height", self.physical_height_m),
            ("separation", self.separation_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        let px_ratio = self.width_px as f64 / self.height_px as f64;
        let m_ratio = self.physical_width_m / self.physical_height_m;
        if ((px_ratio - m_ratio) / m_ratio).abs() > 0.01 {
            return Err(Error::domain(format!(
                "pixel aspect {px_ratio:.4} does not match physical aspect {m_ratio:.4} within 1%"
            )));
        }
        Ok(())
    }

    pub fn with_separation(mut self, separation_m: f64) -> Result<Self> {
        self.separation_m = separation_m;
        self.validate()?;
        Ok(self)
    }

    pub fn m_per_px_x(&self) -> f64 {
        self.physical_width_m / self.width_px as f64
    }

    pub fn m_per_px_y(&self) -> f64 {
        self.physical_height_m / self.height_px as f64
    }

    /// Pixel coordinates (top-left origin) to meters (center origin, +y up).
    pub fn px_to_m(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let (w, h) = (self.width_px as f64, self.height_px as f64);
        if !(0.0..=w).contains(&p[0]) || !(0.0..=h).contains(&p[1]) {
            return Err(Error::domain(format!(
                "pixel ({}, {}) outside [0, {w}]x[0, {h}]",
                p[0], p[1]
            )));
        }
        Ok(self.px_to_m_unchecked(p))
    }

    pub fn px_to_m_unchecked(&self, p: [f64; 2]) -> [f64; 2] {
        let (w, h) = (self.width_px as f64, self.height_px as f64);
        [(p[0] - w / 2.0) * self.m_per_px_x(), (h / 2.0 - p[1]) * self.m_per_px_y()]
    }

    /// Inverse of [`px_to_m`](Self::px_to_m); total, points off the panel map
    /// outside the pixel rectangle.
    pub fn m_to_px(&self, m: [f64; 2]) -> [f64; 2] {
        let (w, h) = (self.width_px as f64, self.height_px as f64);
        [m[0] / self.m_per_px_x() + w / 2.0, h / 2.0 - m[1] / self.m_per_px_y()]
    }

    pub fn half_extent_m(&self) -> [f64; 2] {
        [self.physical_width_m / 2.0, self.physical_height_m / 2.0]
    }
}
