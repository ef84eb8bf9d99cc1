//! Binary PPM (P6) and PAM (P7, `RGB_ALPHA`) encoding, plus PNG export.
//!
//! 8-bit samples map to channels by plain division by 255; encoding rounds to
//! the nearest level. No gamma is applied in either direction.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Color, Pixel, PixelBuffer};

#[inline]
fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[inline]
fn from_u8(v: u8) -> f64 {
    v as f64 / 255.0
}

/// P6 of the emitted color (each pixel over black).
pub fn encode_ppm(buf: &PixelBuffer) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", buf.width(), buf.height()).into_bytes();
    out.reserve(buf.width() * buf.height() * 3);
    for px in buf.pixels() {
        let c = px.emitted();
        out.extend_from_slice(&[to_u8(c.r), to_u8(c.g), to_u8(c.b)]);
    }
    out
}

/// P7 with straight alpha.
pub fn encode_pam(buf: &PixelBuffer) -> Vec<u8> {
    let mut out = format!(
        "P7\nWIDTH {}\nHEIGHT {}\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n",
        buf.width(),
        buf.height()
    )
    .into_bytes();
    out.reserve(buf.width() * buf.height() * 4);
    for px in buf.pixels() {
        let c = px.color;
        out.extend_from_slice(&[to_u8(c.r), to_u8(c.g), to_u8(c.b), to_u8(px.alpha)]);
    }
    out
}

pub fn encode_png(buf: &PixelBuffer, with_alpha: bool) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, buf.width() as u32, buf.height() as u32);
        enc.set_color(if with_alpha { png::ColorType::Rgba } else { png::ColorType::Rgb });
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| Error::Format(e.to_string()))?;
        let data: Vec<u8> = if with_alpha {
            buf.pixels()
                .iter()
                .flat_map(|p| [to_u8(p.color.r), to_u8(p.color.g), to_u8(p.color.b), to_u8(p.alpha)])
                .collect()
        } else {
            buf.pixels()
                .iter()
                .flat_map(|p| {
                    let c = p.emitted();
                    [to_u8(c.r), to_u8(c.g), to_u8(c.b)]
                })
                .collect()
        };
        writer.write_image_data(&data).map_err(|e| Error::Format(e.to_string()))?;
    }
    Ok(out)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b' ' | b'\t' | b'\n' | b'\r' => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&'a str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("truncated header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| Error::Format("non-ascii header".into()))
    }

    fn number(&mut self) -> Result<usize> {
        let t = self.token()?;
        t.parse().map_err(|_| Error::Format(format!("bad header number {t:?}")))
    }
}

/// Decodes P6 (opaque) or P7 with depth 3 or 4 and maxval 255.
pub fn decode(bytes: &[u8]) -> Result<PixelBuffer> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token()?;
    let (width, height, depth) = match magic {
        "P6" => {
            let w = h.number()?;
            let hgt = h.number()?;
            let maxval = h.number()?;
            if maxval != 255 {
                return Err(Error::Format(format!("unsupported maxval {maxval}")));
            }
            (w, hgt, 3)
        }
        "P7" => {
            let (mut w, mut hgt, mut depth, mut maxval) = (None, None, None, None);
            loop {
                let key = h.token()?;
                match key {
                    "WIDTH" => w = Some(h.number()?),
                    "HEIGHT" => hgt = Some(h.number()?),
                    "DEPTH" => depth = Some(h.number()?),
                    "MAXVAL" => maxval = Some(h.number()?),
                    "TUPLTYPE" => {
                        h.token()?;
                    }
                    "ENDHDR" => break,
                    other => return Err(Error::Format(format!("unknown PAM header field {other:?}"))),
                }
            }
            if maxval != Some(255) {
                return Err(Error::Format("PAM MAXVAL must be 255".into()));
            }
            let depth = depth.ok_or_else(|| Error::Format("PAM missing DEPTH".into()))?;
            if depth != 3 && depth != 4 {
                return Err(Error::Format(format!("unsupported PAM depth {depth}")));
            }
            (
                w.ok_or_else(|| Error::Format("PAM missing WIDTH".into()))?,
                hgt.ok_or_else(|| Error::Format("PAM missing HEIGHT".into()))?,
                depth,
            )
        }
        other => return Err(Error::Format(format!("unsupported image magic {other:?}"))),
    };
    // Exactly one whitespace byte separates the header from the raster.
    let data_start = h.pos + 1;
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(depth))
        .ok_or_else(|| Error::Format("image dimensions overflow".into()))?;
    if width == 0 || height == 0 {
        return Err(Error::Format("image dimensions must be positive".into()));
    }
    if bytes.len() < data_start + need {
        return Err(Error::Format(format!(
            "raster truncated: need {need} bytes, have {}",
            bytes.len().saturating_sub(data_start)
        )));
    }
    let pixels = bytes[data_start..data_start + need]
        .chunks_exact(depth)
        .map(|s| {
            let color = Color::new(from_u8(s[0]), from_u8(s[1]), from_u8(s[2]));
            let alpha = if depth == 4 { from_u8(s[3]) } else { 1.0 };
            Pixel::new(color, alpha)
        })
        .collect();
    PixelBuffer::from_pixels(width, height, pixels)
}

pub fn read_image(path: &Path) -> Result<PixelBuffer> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
