//! Regenerates the procedural assets and sensor replays under `fixtures/`.
//!
//! ```sh
//! cargo run --example gen_fixtures
//! ```
//!
//! Output is deterministic; rerunning leaves the committed files unchanged.

use std::fs;
use std::path::{Path, PathBuf};

use duolayer::calibration::{format_correspondences, front_panel_grid, PointSet3, SimilarityTransform};
use duolayer::linalg::{Mat3, Vec3};
use duolayer::model::{Color, DisplayGeometry, Pixel, PixelBuffer};
use duolayer::pnm;
use duolayer::runtime::{format_sensor_log, DepthFrame, HandFrame, SensorSample};

const SKIN: Color = Color::new(0.92, 0.72, 0.58);

fn canvas(w: usize, h: usize, f: impl Fn(f64, f64) -> Option<Color>) -> PixelBuffer {
    let mut b = PixelBuffer::new(w, h);
    for y in 0..h {
        for x in 0..w {
            // Normalized pixel-center coordinates in [0, 1].
            let (u, v) = ((x as f64 + 0.5) / w as f64, (y as f64 + 0.5) / h as f64);
            if let Some(c) = f(u, v) {
                b.set(x, y, Pixel::opaque(c));
            }
        }
    }
    b
}

fn in_ellipse(u: f64, v: f64, cu: f64, cv: f64, ru: f64, rv: f64) -> bool {
    ((u - cu) / ru).powi(2) + ((v - cv) / rv).powi(2) <= 1.0
}

fn in_rect(u: f64, v: f64, u0: f64, v0: f64, u1: f64, v1: f64) -> bool {
    (u0..=u1).contains(&u) && (v0..=v1).contains(&v)
}

/// Head and shoulders.
fn person(arm_up: bool) -> PixelBuffer {
    canvas(64, 128, |u, v| {
        let shirt = Color::new(0.2, 0.35, 0.7);
        if in_ellipse(u, v, 0.5, 0.16, 0.2, 0.12) {
            Some(SKIN)
        } else if in_rect(u, v, 0.22, 0.3, 0.78, 0.98) && in_ellipse(u, v, 0.5, 0.75, 0.36, 0.5) {
            Some(shirt)
        } else if arm_up && in_rect(u, v, 0.8, 0.12, 0.92, 0.5) {
            Some(SKIN)
        } else {
            None
        }
    })
}

/// Palm with one raised finger.
fn hand() -> PixelBuffer {
    canvas(48, 64, |u, v| {
        let palm = in_ellipse(u, v, 0.5, 0.72, 0.34, 0.24);
        let finger = in_rect(u, v, 0.42, 0.08, 0.6, 0.6) && (v > 0.14 || in_ellipse(u, v, 0.51, 0.14, 0.09, 0.06));
        let thumb = in_ellipse(u, v, 0.2, 0.6, 0.1, 0.18);
        (palm || finger || thumb).then_some(SKIN)
    })
}

/// Phone-sized app mock-up.
fn app() -> PixelBuffer {
    canvas(54, 96, |u, v| {
        if !in_rect(u, v, 0.04, 0.02, 0.96, 0.98) {
            return None;
        }
        Some(if in_rect(u, v, 0.1, 0.06, 0.9, 0.16) {
            Color::new(0.95, 0.45, 0.2)
        } else if in_rect(u, v, 0.1, 0.22, 0.9, 0.5) {
            Color::new(0.3, 0.75, 0.85)
        } else if in_rect(u, v, 0.1, 0.56, 0.45, 0.9) || in_rect(u, v, 0.55, 0.56, 0.9, 0.9) {
            Color::new(0.85, 0.85, 0.9)
        } else {
            Color::new(0.15, 0.15, 0.18)
        })
    })
}

/// Bar chart on a dark panel; the task surface.
fn chart() -> PixelBuffer {
    let heights = [0.35, 0.6, 0.45, 0.8, 0.55, 0.7];
    canvas(128, 80, |u, v| {
        let i = ((u - 0.08) / 0.14).floor();
        if (0.0..6.0).contains(&i) {
            let left = 0.08 + i * 0.14;
            let h = heights[i as usize];
            if (left + 0.02..left + 0.12).contains(&u) && v > 0.9 - h * 0.8 && v < 0.9 {
                return Some(Color::new(0.35 + 0.1 * i, 0.7 - 0.08 * i, 0.4));
            }
        }
        Some(Color::new(0.08, 0.08, 0.1))
    })
}

fn tool(shape: usize) -> PixelBuffer {
    let colors = [Color::new(0.9, 0.3, 0.3), Color::new(0.3, 0.9, 0.4), Color::new(0.3, 0.5, 0.95), Color::new(0.95, 0.85, 0.3)];
    canvas(32, 32, |u, v| {
        let inside = match shape {
            0 => in_ellipse(u, v, 0.5, 0.5, 0.42, 0.42),
            1 => in_rect(u, v, 0.12, 0.12, 0.88, 0.88),
            2 => v > 0.1 && (u - 0.5).abs() < (v - 0.1) * 0.5 && v < 0.9,
            _ => (u - 0.5).abs() + (v - 0.5).abs() < 0.42,
        };
        inside.then_some(colors[shape])
    })
}

/// Street-level scene for the overview-plus-detail pair.
fn scene() -> PixelBuffer {
    canvas(160, 90, |u, v| {
        Some(if v < 0.55 {
            Color::new(0.45 + 0.3 * v, 0.65 + 0.2 * v, 0.95)
        } else if in_rect(u, v, 0.4, 0.55, 0.6, 1.0) && (u - 0.5).abs() < (v - 0.55) * 0.5 {
            Color::new(0.4, 0.4, 0.42)
        } else {
            Color::new(0.25, 0.55, 0.25)
        })
    })
}

fn map() -> PixelBuffer {
    canvas(160, 90, |u, v| {
        let road = ((u * 8.0).fract() < 0.06) || ((v * 5.0).fract() < 0.08) || ((u - v * 0.8 - 0.1).abs() < 0.02);
        Some(if road { Color::new(0.95, 0.9, 0.7) } else { Color::new(0.3, 0.36, 0.3) })
    })
}

fn pin() -> PixelBuffer {
    canvas(16, 24, |u, v| {
        (in_ellipse(u, v, 0.5, 0.3, 0.42, 0.28) || (v > 0.3 && (u - 0.5).abs() < (1.0 - v) * 0.45))
            .then_some(Color::new(0.95, 0.2, 0.25))
    })
}

/// Remote participant in a room: opaque 80x45 RGB frame.
const REMOTE_W: usize = 80;
const REMOTE_H: usize = 45;

fn remote_scene() -> PixelBuffer {
    canvas(REMOTE_W, REMOTE_H, |u, v| {
        Some(if in_ellipse(u, v, 0.5, 0.3, 0.07, 0.13) {
            SKIN
        } else if in_ellipse(u, v, 0.5, 0.85, 0.18, 0.4) {
            Color::new(0.6, 0.2, 0.25)
        } else if in_rect(u, v, 0.72, 0.55, 0.78, 0.8) {
            SKIN
        } else if in_rect(u, v, 0.05, 0.15, 0.3, 0.55) {
            Color::new(0.2, 0.2, 0.25)
        } else {
            Color::new(0.55, 0.5, 0.42)
        })
    })
}

/// Depth of the remote scene: wall 3 m, person 1.6 m, and a hand that
/// reaches forward from 1.4 m to 0.6 m as `reach` goes 0 to 1.
fn remote_depth(reach: f64) -> DepthFrame {
    DepthFrame::from_fn(REMOTE_W, REMOTE_H, |x, y| {
        let (u, v) = ((x as f64 + 0.5) / REMOTE_W as f64, (y as f64 + 0.5) / REMOTE_H as f64);
        if in_rect(u, v, 0.72, 0.55, 0.78, 0.8) {
            Some(1.4 - 0.8 * reach)
        } else if in_ellipse(u, v, 0.5, 0.3, 0.07, 0.13) || in_ellipse(u, v, 0.5, 0.85, 0.18, 0.4) {
            Some(1.6)
        } else if x == 0 {
            // Sensor edge dropout.
            None
        } else {
            Some(3.0)
        }
    })
    .expect("valid depth frame")
}

/// Transform taking tracker coordinates to display coordinates.
pub fn known_transform() -> SimilarityTransform {
    let axis = Vec3::new(0.2, 1.0, 0.1);
    SimilarityTransform::new(1.02, Mat3::rotation(axis.scale(1.0 / axis.norm()), 0.3), Vec3::new(0.05, -0.4, 0.9))
}

fn hand_at(tracker_z_of_display: f64, t: &SimilarityTransform) -> HandFrame {
    // Joints laid out on a small grid in display space, then mapped back to
    // tracker space.
    let inv = t.inverse();
    let joints = (0..54)
        .map(|i| {
            let (hand, j) = (i / 27, i % 27);
            let p = Vec3::new(-0.15 + 0.3 * hand as f64 + 0.01 * (j % 5) as f64, 0.01 * (j / 5) as f64, tracker_z_of_display + 0.002 * j as f64);
            inv.apply(p)
        })
        .collect();
    HandFrame::new(joints).expect("54 joints")
}

fn write(dir: &Path, name: &str, bytes: &[u8]) {
    let p = dir.join(name);
    fs::write(&p, bytes).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    println!("wrote {}", p.display());
}

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let assets = root.join("assets");
    fs::create_dir_all(&assets).expect("create fixtures/assets");

    let images: Vec<(&str, PixelBuffer)> = vec![
        ("person.pam", person(false)),
        ("hand.pam", hand()),
        ("app.pam", app()),
        ("agent_0.pam", person(false)),
        ("agent_1.pam", person(true)),
        ("chart.pam", chart()),
        ("tool_0.pam", tool(0)),
        ("tool_1.pam", tool(1)),
        ("tool_2.pam", tool(2)),
        ("tool_3.pam", tool(3)),
        ("scene.pam", scene()),
        ("map.pam", map()),
        ("pin.pam", pin()),
        ("remote.pam", remote_scene()),
    ];
    for (name, img) in &images {
        write(&assets, name, &pnm::encode_pam(img));
    }

    // E5: the viewer walks from the public zone up to the panel.
    let walk: Vec<(u64, SensorSample)> = (0..=16u64)
        .map(|k| (k * 3 + 1, SensorSample::UserDistance { distance_m: (440 - 25 * k as i64) as f64 / 100.0 }))
        .collect();
    write(&root, "e5_agent.sensors", format_sensor_log(&walk).as_bytes());

    // E14: depth frames as the remote hand reaches forward, plus tracked
    // hands approaching the front panel.
    let t = known_transform();
    let mut e14 = Vec::new();
    for k in 0..=4u64 {
        e14.push((k * 8 + 1, SensorSample::DepthFrame(remote_depth(k as f64 / 4.0))));
    }
    for (k, z) in [0.5, 0.35, 0.2, 0.1].into_iter().enumerate() {
        e14.push((k as u64 * 8 + 2, SensorSample::HandFrame(hand_at(z, &t))));
    }
    e14.sort_by_key(|(tick, _)| *tick);
    write(&root, "e14_depth.sensors", format_sensor_log(&e14).as_bytes());

    // Calibration: the 12 front-panel targets and where the tracker saw them.
    let g = DisplayGeometry::default();
    let [hx, hy] = g.half_extent_m();
    let display = front_panel_grid(hx, hy);
    let inv = t.inverse();
    let tracker = PointSet3::new(display.points.iter().map(|&p| inv.apply(p)).collect());
    write(&root, "calib_12pt.pairs", format_correspondences(&tracker, &display).as_bytes());
    write(&root, "calib_12pt.known", t.to_file_string().as_bytes());
}
