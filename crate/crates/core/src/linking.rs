//! Back-layer visuals that tie a front-layer entity to the layer behind it.
//!
//! Morphology uses a square (Chebyshev) structuring element. Pixels outside
//! the mask rectangle count as background, so erosion eats into shapes that
//! touch the border.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{luminance_alpha, Color, Pixel, PixelBuffer};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask { width, height, bits: vec![false; width * height] }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::domain(format!("mask has {} bits, expected {width}x{height}", bits.len())));
        }
        Ok(BinaryMask { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        BinaryMask { width, height, bits }
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

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// `self \ other`.
    pub fn minus(&self, other: &BinaryMask) -> BinaryMask {
        assert_eq!(self.dims(), other.dims());
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a && !*b).collect();
        BinaryMask { width: self.width, height: self.height, bits }
    }

    pub fn intersects(&self, other: &BinaryMask) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| *a && *b)
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    /// Mean position of set pixel centers, in pixel units.
    pub fn centroid(&self) -> Option<[f64; 2]> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    sx += x as f64 + 0.5;
                    sy += y as f64 + 0.5;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| [sx / n as f64, sy / n as f64])
    }
}

/// Bit set wherever the frame's alpha exceeds `threshold`.
pub fn mask_of(frame: &PixelBuffer, threshold: f64) -> BinaryMask {
    let bits = frame.pixels().iter().map(|p| p.alpha > threshold).collect();
    BinaryMask { width: frame.width(), height: frame.height(), bits }
}

/// Sliding-window "any set" (dilate) or "all set" (erode) along one axis.
/// Out-of-range cells are unset.
fn window_1d(line: &[bool], radius: usize, all: bool, out: &mut [bool]) {
    let n = line.len();
    let mut count = 0usize;
    // Count of set cells in [i - r, i + r] clipped to the line.
    for v in line.iter().take(radius.min(n.saturating_sub(1)) + 1) {
        count += *v as usize;
    }
    let full = 2 * radius + 1;
    for i in 0..n {
        out[i] = if all { count == full } else { count > 0 };
        let enter = i + radius + 1;
        if enter < n {
            count += line[enter] as usize;
        }
        if i >= radius {
            count -= line[i - radius] as usize;
        }
    }
}

fn separable(mask: &BinaryMask, radius: usize, all: bool) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dims();
    let mut rows = vec![false; w * h];
    for y in 0..h {
        window_1d(&mask.bits[y * w..(y + 1) * w], radius, all, &mut rows[y * w..(y + 1) * w]);
    }
    let mut out = vec![false; w * h];
    let mut col = vec![false; h];
    let mut col_out = vec![false; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = rows[y * w + x];
        }
        window_1d(&col, radius, all, &mut col_out);
        for y in 0..h {
            out[y * w + x] = col_out[y];
        }
    }
    BinaryMask { width: w, height: h, bits: out }
}

/// Sets every pixel within Chebyshev distance `radius` of a set pixel.
pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    separable(mask, radius, false)
}

/// Keeps pixels whose whole `(2r+1)²` neighborhood is set and in bounds.
pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    separable(mask, radius, true)
}

/// Ring of width `radius` hugging the outside of the mask.
pub fn halo_band(mask: &BinaryMask, radius: usize) -> BinaryMask {
    dilate(mask, radius).minus(mask)
}

/// Inner boundary band of width `thickness`.
pub fn outline_band(mask: &BinaryMask, thickness: usize) -> BinaryMask {
    mask.minus(&erode(mask, thickness))
}

/// 3×3 mean filter; out-of-bounds neighbors count as zero.
pub fn box_blur(values: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
                        acc += values[ny as usize * width + nx as usize];
                    }
                }
            }
            out[y * width + x] = acc / 9.0;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkingStyle {
    None,
    Landmark,
    Halo,
    Outline,
    Clone,
}

impl LinkingStyle {
    pub const ALL: [LinkingStyle; 5] =
        [LinkingStyle::None, LinkingStyle::Landmark, LinkingStyle::Halo, LinkingStyle::Outline, LinkingStyle::Clone];

    pub fn name(self) -> &'static str {
        match self {
            LinkingStyle::None => "none",
            LinkingStyle::Landmark => "landmark",
            LinkingStyle::Halo => "halo",
            LinkingStyle::Outline => "outline",
            LinkingStyle::Clone => "clone",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        LinkingStyle::ALL.into_iter().find(|l| l.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkingParams {
    pub halo_radius_px: usize,
    pub halo_blur_px: usize,
    pub outline_thickness_px: usize,
    pub clone_alpha: f64,
    pub landmark_size_px: usize,
    /// `None` derives the tint from the entity: its mean color, half
    /// desaturated.
    pub tint: Option<Color>,
}

impl Default for LinkingParams {
    fn default() -> Self {
        LinkingParams {
            halo_radius_px: 12,
            halo_blur_px: 4,
            outline_thickness_px: 3,
            clone_alpha: 0.35,
            landmark_size_px: 24,
            tint: None,
        }
    }
}

impl LinkingParams {
    pub fn validate(&self) -> Result<()> {
        if self.halo_radius_px == 0 {
            return Err(Error::domain("halo_radius_px must be positive"));
        }
        if self.outline_thickness_px == 0 {
            return Err(Error::domain("outline_thickness_px must be positive"));
        }
        if self.landmark_size_px == 0 {
            return Err(Error::domain("landmark_size_px must be positive"));
        }
        if !(0.0..=1.0).contains(&self.clone_alpha) {
            return Err(Error::domain(format!("clone_alpha must be in [0, 1], got {}", self.clone_alpha)));
        }
        if let Some(t) = self.tint {
            Color::checked(t.r, t.g, t.b)?;
        }
        Ok(())
    }
}

/// Mean color of the masked pixels, pulled halfway to its own luminance.
pub fn auto_tint(frame: &PixelBuffer, mask: &BinaryMask) -> Color {
    let (mut acc, mut n) = (Color::BLACK, 0usize);
    for (p, m) in frame.pixels().iter().zip(mask.bits()) {
        if *m {
            acc = acc.add(p.color);
            n += 1;
        }
    }
    if n == 0 {
        return Color::new(0.5, 0.5, 0.5);
    }
    let mean = acc.scale(1.0 / n as f64);
    let y = luminance_alpha(mean);
    mean.lerp(Color::new(y, y, y), 0.5)
}

fn paint(mask_alpha: impl Iterator<Item = f64>, width: usize, height: usize, tint: Color) -> PixelBuffer {
    let pixels = mask_alpha
        .map(|a| if a > 0.0 { Pixel::new(tint, a.min(1.0)) } else { Pixel::TRANSPARENT })
        .collect();
    PixelBuffer::from_pixels(width, height, pixels).expect("dimensions preserved")
}

/// Renders the linking visual for a front-layer entity frame. The result has
/// the frame's dimensions.
pub fn render_linking(
    style: LinkingStyle,
    frame: &PixelBuffer,
    mask: &BinaryMask,
    p: &LinkingParams,
) -> Result<PixelBuffer> {
    if frame.dims() != mask.dims() {
        return Err(Error::domain(format!(
            "frame is {}x{} but mask is {}x{}",
            frame.width(),
            frame.height(),
            mask.width(),
            mask.height()
        )));
    }
    let (w, h) = frame.dims();
    let tint = p.tint.unwrap_or_else(|| auto_tint(frame, mask));
    Ok(match style {
        LinkingStyle::None => PixelBuffer::new(w, h),
        LinkingStyle::Clone => {
            let pixels = frame.pixels().iter().map(|px| Pixel::new(px.color, px.alpha * p.clone_alpha)).collect();
            PixelBuffer::from_pixels(w, h, pixels)?
        }
        LinkingStyle::Outline => {
            let band = outline_band(mask, p.outline_thickness_px);
            paint(band.bits().iter().map(|b| if *b { 1.0 } else { 0.0 }), w, h, tint)
        }
        LinkingStyle::Halo => {
            let band = halo_band(mask, p.halo_radius_px);
            let mut cover: Vec<f64> = band.bits().iter().map(|b| if *b { 1.0 } else { 0.0 }).collect();
            for _ in 0..p.halo_blur_px {
                cover = box_blur(&cover, w, h);
            }
            paint(cover.into_iter(), w, h, tint)
        }
        LinkingStyle::Landmark => match mask.centroid() {
            None => PixelBuffer::new(w, h),
            Some([cx, cy]) => {
                let r = p.landmark_size_px as f64 / 2.0;
                let disc = BinaryMask::from_fn(w, h, |x, y| {
                    let dx = x as f64 + 0.5 - cx;
                    let dy = y as f64 + 0.5 - cy;
                    dx * dx + dy * dy <= r * r
                });
                paint(disc.bits().iter().map(|b| if *b { 1.0 } else { 0.0 }), w, h, tint)
            }
        },
    })
}
