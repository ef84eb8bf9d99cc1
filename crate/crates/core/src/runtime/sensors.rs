//! Sensor samples, their replay-file framing, and the two sensor-side
//! transforms: depth segmentation and hand-joint ingestion.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::calibration::SimilarityTransform;
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::linking::BinaryMask;
use crate::model::{Pixel, PixelBuffer};

pub const JOINTS_PER_HAND: usize = 27;
pub const HAND_FRAME_VALUES: usize = 2 * JOINTS_PER_HAND * 3;

/// Both hands, sensor coordinates in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandFrame {
    joints: Vec<Vec3>,
}

impl HandFrame {
    /// `joints` is left hand then right hand, 27 joints each.
    pub fn new(joints: Vec<Vec3>) -> Result<Self> {
        if joints.len() != 2 * JOINTS_PER_HAND {
            return Err(Error::domain(format!(
                "hand frame needs {} joints (2 x {JOINTS_PER_HAND}), got {}",
                2 * JOINTS_PER_HAND,
                joints.len()
            )));
        }
        if !joints.iter().all(|j| j.is_finite()) {
            return Err(Error::domain("hand joints must be finite"));
        }
        Ok(HandFrame { joints })
    }

    pub fn joints(&self) -> &[Vec3] {
        &self.joints
    }
}

/// Per-pixel depth in meters; `None` marks an invalid reading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthFrame {
    width: usize,
    height: usize,
    depths: Vec<Option<f64>>,
}

impl DepthFrame {
    pub fn new(width: usize, height: usize, depths: Vec<Option<f64>>) -> Result<Self> {
        if depths.len() != width * height {
            return Err(Error::domain(format!("depth frame {width}x{height} needs {} values, got {}", width * height, depths.len())));
        }
        if depths.iter().flatten().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::domain("depths must be finite and >= 0, or marked invalid"));
        }
        Ok(DepthFrame { width, height, depths })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> Option<f64>) -> Result<Self> {
        let depths = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        DepthFrame::new(width, height, depths)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.depths[y * self.width + x]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorSample {
    HandFrame(HandFrame),
    DepthFrame(DepthFrame),
    UserDistance { distance_m: f64 },
}

/// Routes pixels nearer than `threshold_m` to the front mask and the rest of
/// the valid pixels to the back mask.
pub fn depth_segment(f: &DepthFrame, rgb: &PixelBuffer, threshold_m: f64) -> Result<(BinaryMask, BinaryMask)> {
    if f.dims() != rgb.dims() {
        return Err(Error::domain(format!(
            "depth frame is {}x{} but image is {}x{}",
            f.width,
            f.height,
            rgb.width(),
            rgb.height()
        )));
    }
    let front = BinaryMask::from_fn(f.width, f.height, |x, y| f.get(x, y).is_some_and(|d| d < threshold_m));
    let back = BinaryMask::from_fn(f.width, f.height, |x, y| f.get(x, y).is_some_and(|d| d >= threshold_m));
    Ok((front, back))
}

/// `rgb` with every pixel outside `mask` made transparent.
pub fn apply_mask(rgb: &PixelBuffer, mask: &BinaryMask) -> PixelBuffer {
    let mut out = rgb.clone();
    let w = rgb.width();
    for (i, px) in out.pixels_mut().iter_mut().enumerate() {
        if !mask.get(i % w, i / w) {
            *px = Pixel::TRANSPARENT;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct HandIngest {
    /// Joints in display coordinates; the front panel is `z = 0`.
    pub joints_display: Vec<Vec3>,
    /// Nearest joint's distance to the front plane.
    pub distance_m: f64,
}

pub fn ingest_hand(h: &HandFrame, calibration: Option<&SimilarityTransform>) -> Result<HandIngest> {
    let t = calibration.ok_or_else(|| Error::domain("hand frame received but no calibration is loaded"))?;
    let joints_display: Vec<Vec3> = h.joints.iter().map(|&j| t.apply(j)).collect();
    let distance_m = joints_display.iter().map(|j| j.z().abs()).fold(f64::INFINITY, f64::min);
    Ok(HandIngest { joints_display, distance_m })
}

/// Sensor samples keyed by the tick that consumes them.
pub type SensorLog = Vec<(u64, SensorSample)>;

/// Parses the replay format, one sample per line:
///
/// ```text
/// 12 user 1.35
/// 13 hand x y z ... (162 numbers: left hand then right, 27 joints each)
/// 14 depth W H d d - d ...   (row-major, `-` = invalid)
/// ```
pub fn parse_sensor_log(text: &str) -> Result<SensorLog> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| Error::Input(format!("sensor log line {}: {msg}", i + 1));
        let mut it = line.split_whitespace();
        let tick: u64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| at("expected a tick number".into()))?;
        let kind = it.next().ok_or_else(|| at("expected a sample kind".into()))?;
        let rest: Vec<&str> = it.collect();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| at(format!("invalid number `{s}`")))
        };
        let sample = match kind {
            "user" => {
                if rest.len() != 1 {
                    return Err(at(format!("`user` takes one distance, got {}", rest.len())));
                }
                SensorSample::UserDistance { distance_m: num(rest[0])? }
            }
            "hand" => {
                if rest.len() != HAND_FRAME_VALUES {
                    return Err(at(format!("`hand` takes {HAND_FRAME_VALUES} numbers, got {}", rest.len())));
                }
                let v = rest.iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
                let joints = v.chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
                SensorSample::HandFrame(HandFrame::new(joints).map_err(|e| at(e.to_string()))?)
            }
            "depth" => {
                if rest.len() < 2 {
                    return Err(at("`depth` needs a width and height".into()));
                }
                let dim = |s: &str| s.parse::<usize>().map_err(|_| at(format!("invalid dimension `{s}`")));
                let (w, h) = (dim(rest[0])?, dim(rest[1])?);
                let vals = rest[2..]
                    .iter()
                    .map(|s| if *s == "-" { Ok(None) } else { num(s).map(Some) })
                    .collect::<Result<Vec<_>>>()?;
                SensorSample::DepthFrame(DepthFrame::new(w, h, vals).map_err(|e| at(e.to_string()))?)
            }
            other => return Err(at(format!("unknown sample kind `{other}` (user, hand, depth)"))),
        };
        out.push((tick, sample));
    }
    Ok(out)
}

pub fn format_sensor_log(log: &[(u64, SensorSample)]) -> String {
    let mut s = String::new();
    for (tick, sample) in log {
        write!(s, "{tick} ").unwrap();
        match sample {
            SensorSample::UserDistance { distance_m } => write!(s, "user {distance_m}").unwrap(),
            SensorSample::HandFrame(h) => {
                s.push_str("hand");
                for j in &h.joints {
                    write!(s, " {} {} {}", j.x(), j.y(), j.z()).unwrap();
                }
            }
            SensorSample::DepthFrame(d) => {
                write!(s, "depth {} {}", d.width, d.height).unwrap();
                for v in &d.depths {
                    match v {
                        Some(v) => write!(s, " {v}").unwrap(),
                        None => s.push_str(" -"),
                    }
                }
            }
        }
        s.push('\n');
    }
    s
}
