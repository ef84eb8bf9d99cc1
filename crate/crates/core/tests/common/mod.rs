//! Shared helpers for the integration tests: brute-force oracles, random
//! generators and fixture paths. Oracles here are written from first
//! principles and share no code with the library paths they check.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use duolayer::calibration::SimilarityTransform;
use duolayer::linalg::{Mat3, Vec3};
use duolayer::linking::{BinaryMask, LinkingParams, LinkingStyle};
use duolayer::model::{Color, DisplayGeometry, LayerId, Pixel, PixelBuffer};
use duolayer::profile::{
    AssetDecl, AssetKind, BindingDecl, Condition, CueDecl, DistanceSource, EntityDecl, ExperienceProfile, SegmentDecl,
};
use duolayer::runtime::{Zone, ZoneConfig};
use duolayer::transition::{Direction, EasingStyle, Envelope, Look, ParamSet, PhaseSpec, TransitionSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIXTURES: [&str; 6] = ["e1_hand", "e4_pull_push", "e5_agent", "e11_linking", "e12_overview", "e14_depth"];

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs the CLI in-process; returns (exit code, stdout, stderr).
pub fn cli<S: AsRef<str>>(args: &[S]) -> (i32, String, String) {
    let mut argv = vec!["duolayer".to_string()];
    argv.extend(args.iter().map(|s| s.as_ref().to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = duolayer::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

// ---------------------------------------------------------------------------
// Compositing oracle

/// What the eye sees through front pixel `(x, y)`: cast a ray from the eye
/// through the pixel center on the front plane (z = 0) until it meets the
/// back plane (z = -d), then blend the two emissions with their luminance
/// opacities over the ambient light.
pub fn raycast_pixel(
    front: &PixelBuffer,
    back: &PixelBuffer,
    g: &DisplayGeometry,
    eye: [f64; 3],
    ambient: [f64; 3],
    x: usize,
    y: usize,
) -> [f64; 3] {
    let (w, h) = (g.width_px as f64, g.height_px as f64);
    let (pw, ph) = (g.physical_width_m, g.physical_height_m);
    let hit_front = [(x as f64 + 0.5) / w * pw - pw / 2.0, ph / 2.0 - (y as f64 + 0.5) / h * ph, 0.0];
    let dir = [hit_front[0] - eye[0], hit_front[1] - eye[1], hit_front[2] - eye[2]];
    // eye.z + s * dir.z = -d
    let s = (-g.separation_m - eye[2]) / dir[2];
    let hit_back = [eye[0] + s * dir[0], eye[1] + s * dir[1]];
    let u = (hit_back[0] + pw / 2.0) / pw * w;
    let v = (ph / 2.0 - hit_back[1]) / ph * h;

    let emit = |px: Pixel| [px.color.r * px.alpha, px.color.g * px.alpha, px.color.b * px.alpha];
    let lum = |c: [f64; 3]| 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];

    let behind = if u < 0.0 || u > w || v < 0.0 || v > h {
        ambient
    } else {
        let b = bilinear_emitted(back, u, v, emit);
        let a = lum(b);
        [b[0] + (1.0 - a) * ambient[0], b[1] + (1.0 - a) * ambient[1], b[2] + (1.0 - a) * ambient[2]]
    };
    let f = emit(front.get(x, y));
    let a = lum(f);
    let mut out = [0.0; 3];
    for c in 0..3 {
        out[c] = (f[c] + (1.0 - a) * behind[c]).clamp(0.0, 1.0);
    }
    out
}

/// Tent-filter reconstruction: weight every pixel by its distance from the
/// sample point, with coordinates clamped into the image.
fn bilinear_emitted(img: &PixelBuffer, u: f64, v: f64, emit: impl Fn(Pixel) -> [f64; 3]) -> [f64; 3] {
    let (w, h) = img.dims();
    let cx = (u - 0.5).clamp(0.0, (w - 1) as f64);
    let cy = (v - 0.5).clamp(0.0, (h - 1) as f64);
    let mut acc = [0.0; 3];
    for py in 0..h {
        let wy = (1.0 - (py as f64 - cy).abs()).max(0.0);
        if wy == 0.0 {
            continue;
        }
        for px in 0..w {
            let wx = (1.0 - (px as f64 - cx).abs()).max(0.0);
            if wx == 0.0 {
                continue;
            }
            let e = emit(img.get(px, py));
            for c in 0..3 {
                acc[c] += wx * wy * e[c];
            }
        }
    }
    acc
}

pub fn raycast_composite(
    front: &PixelBuffer,
    back: &PixelBuffer,
    g: &DisplayGeometry,
    eye: [f64; 3],
    ambient: [f64; 3],
) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(g.width_px * g.height_px);
    for y in 0..g.height_px {
        for x in 0..g.width_px {
            out.push(raycast_pixel(front, back, g, eye, ambient, x, y));
        }
    }
    out
}

pub fn random_buffer(rng: &mut impl Rng, w: usize, h: usize) -> PixelBuffer {
    let pixels = (0..w * h)
        .map(|_| {
            if rng.gen_bool(0.2) {
                Pixel::TRANSPARENT
            } else {
                Pixel::new(Color::new(rng.gen(), rng.gen(), rng.gen()), rng.gen())
            }
        })
        .collect();
    PixelBuffer::from_pixels(w, h, pixels).unwrap()
}

// ---------------------------------------------------------------------------
// Morphology oracle

pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize) -> BinaryMask {
    let density = rng.gen_range(0.05..0.95);
    let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::from_bits(w, h, bits).unwrap()
}

/// Chebyshev-disk dilation by direct neighborhood scan.
pub fn brute_dilate(m: &BinaryMask, r: usize) -> BinaryMask {
    let (w, h) = m.dims();
    let r = r as i64;
    BinaryMask::from_fn(w, h, |x, y| {
        for dy in -r..=r {
            for dx in -r..=r {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64 && m.get(nx as usize, ny as usize) {
                    return true;
                }
            }
        }
        false
    })
}

/// Chebyshev-disk erosion; neighbors outside the mask count as unset.
pub fn brute_erode(m: &BinaryMask, r: usize) -> BinaryMask {
    let (w, h) = m.dims();
    let r = r as i64;
    BinaryMask::from_fn(w, h, |x, y| {
        for dy in -r..=r {
            for dx in -r..=r {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 || !m.get(nx as usize, ny as usize) {
                    return false;
                }
            }
        }
        true
    })
}

// ---------------------------------------------------------------------------
// Geometry

/// Uniform random rotation from a normalized Gaussian quaternion.
pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    use rand_distr::StandardNormal;
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    Mat3::from_cols(
        Vec3::new(1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y + w * z), 2.0 * (x * z - w * y)),
        Vec3::new(2.0 * (x * y - w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z + w * x)),
        Vec3::new(2.0 * (x * z + w * y), 2.0 * (y * z - w * x), 1.0 - 2.0 * (x * x + y * y)),
    )
}

pub fn random_similarity(rng: &mut impl Rng) -> SimilarityTransform {
    let t = loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.norm() <= 1.0 {
            break v;
        }
    };
    SimilarityTransform::new(rng.gen_range(0.5..2.0), random_rotation(rng), t)
}

/// Twelve points spread through a 1 m cube, rejecting near-planar sets.
pub fn random_points(rng: &mut impl Rng, n: usize) -> Vec<Vec3> {
    loop {
        let pts: Vec<Vec3> = (0..n)
            .map(|_| Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect();
        let c = pts.iter().fold(Vec3::new(0.0, 0.0, 0.0), |a, p| a + *p).scale(1.0 / n as f64);
        let mut cov = [[0.0; 3]; 3];
        for p in &pts {
            let d = (*p - c).0;
            for i in 0..3 {
                for j in 0..3 {
                    cov[i][j] += d[i] * d[j];
                }
            }
        }
        // Smallest principal spread from the determinant against the trace.
        let det = cov[0][0] * (cov[1][1] * cov[2][2] - cov[1][2] * cov[2][1])
            - cov[0][1] * (cov[1][0] * cov[2][2] - cov[1][2] * cov[2][0])
            + cov[0][2] * (cov[1][0] * cov[2][1] - cov[1][1] * cov[2][0]);
        let tr = cov[0][0] + cov[1][1] + cov[2][2];
        if det > 1e-3 * tr.powi(3) / 27.0 {
            return pts;
        }
    }
}

// ---------------------------------------------------------------------------
// Profiles

fn ident(rng: &mut impl Rng, taken: &mut Vec<String>) -> String {
    const HEAD: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCXYZ_";
    const TAIL: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";
    loop {
        let len = rng.gen_range(1..10);
        let mut s = String::new();
        s.push(HEAD[rng.gen_range(0..HEAD.len())] as char);
        for _ in 1..len {
            s.push(TAIL[rng.gen_range(0..TAIL.len())] as char);
        }
        if !taken.contains(&s) {
            taken.push(s.clone());
            return s;
        }
    }
}

fn path_string(rng: &mut impl Rng) -> String {
    const ALPHABET: &[char] = &['a', 'b', 'z', '/', '.', ' ', '"', '\\', '\t', '\n', '#', '{', ';', 'é', '0', '-'];
    let len = rng.gen_range(1..16);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

/// A value that prints with many digits, so round trips exercise float
/// formatting rather than short literals.
fn messy(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    match rng.gen_range(0..4) {
        0 => (rng.gen_range(lo..hi) * 100.0).round() / 100.0,
        _ => rng.gen_range(lo..hi),
    }
    .clamp(lo, hi)
}

fn envelope(rng: &mut impl Rng, from: f64, to: f64, total_s: f64) -> Envelope {
    let delay = if rng.gen_bool(0.3) { messy(rng, 0.0, total_s * 0.4) } else { 0.0 };
    let dur = (total_s - delay) * rng.gen_range(0.5..=1.0);
    let f1 = rng.gen_range(0.05..0.6);
    let f2 = rng.gen_range(0.05..(0.95 - f1));
    let fr = [f1, f2, 1.0 - f1 - f2];
    // Monotone intermediate values between `from` and `to`.
    let mut cuts = [rng.gen::<f64>(), rng.gen::<f64>()];
    cuts.sort_by(f64::total_cmp);
    let v = [from, from + (to - from) * cuts[0], from + (to - from) * cuts[1], to];
    let mut style = || *EasingStyle::ALL.choose(rng).unwrap();
    let phases = [
        PhaseSpec::new(fr[0], style(), v[0], v[1]),
        PhaseSpec::new(fr[1], style(), v[1], v[2]),
        PhaseSpec::new(fr[2], style(), v[2], v[3]),
    ];
    Envelope::new(phases, dur.max(1e-3), delay).unwrap()
}

pub fn random_look(rng: &mut impl Rng) -> Look {
    Look {
        scale: messy(rng, 0.2, 3.0),
        shadow: messy(rng, 0.0, 1.0),
        offset_m: [messy(rng, -0.3, 0.3), messy(rng, -0.3, 0.3)],
    }
}

pub fn random_spec(rng: &mut impl Rng) -> TransitionSpec {
    let direction = match rng.gen_range(0..6) {
        0 | 1 => Direction::FrontToBack,
        2 | 3 => Direction::BackToFront,
        4 => Direction::FadeIn(if rng.gen() { LayerId::Front } else { LayerId::Back }),
        _ => Direction::FadeOut(if rng.gen() { LayerId::Front } else { LayerId::Back }),
    };
    let parameters = loop {
        let p = ParamSet { alpha: rng.gen(), scale: rng.gen(), shadow: rng.gen(), offset: rng.gen() };
        if !p.is_empty() {
            break p;
        }
    };
    let duration_s = messy(rng, 0.05, 4.0);
    let lag_s = if rng.gen_bool(0.5) { messy(rng, 0.0, 2.0) } else { 0.0 };
    let spec = TransitionSpec {
        direction,
        parameters,
        duration_s,
        lag_s,
        source_envelope: envelope(rng, 1.0, 0.0, duration_s),
        dest_envelope: envelope(rng, 0.0, 1.0, duration_s),
        absent_look: random_look(rng),
        present_look: random_look(rng),
        separation_m: rng.gen_bool(0.3).then(|| messy(rng, 0.01, 2.0)),
    };
    spec.validate().unwrap();
    spec
}

fn random_geometry(rng: &mut impl Rng) -> DisplayGeometry {
    let pw = messy(rng, 0.2, 3.0);
    let ph = messy(rng, 0.1, 2.0);
    let width_px = rng.gen_range(200..2400usize);
    let height_px = ((width_px as f64) * ph / pw).round().max(1.0) as usize;
    let g = DisplayGeometry {
        width_px,
        height_px,
        physical_width_m: pw,
        physical_height_m: ph,
        separation_m: messy(rng, 0.01, 2.5),
    };
    if g.validate().is_ok() {
        g
    } else {
        DisplayGeometry::default()
    }
}

/// A structurally valid profile with every feature the grammar has.
pub fn random_profile(rng: &mut impl Rng) -> ExperienceProfile {
    let geometry = random_geometry(rng);
    let mut names = Vec::new();
    let personal = messy(rng, 0.1, 3.0);
    let zone_config = ZoneConfig::new(personal, personal + messy(rng, 0.01, 5.0)).unwrap();
    let calibration = rng.gen_bool(0.4).then(|| random_similarity(rng));

    let mut assets = BTreeMap::new();
    for _ in 0..rng.gen_range(1..5) {
        let kind = if rng.gen_bool(0.3) { AssetKind::FrameSequence } else { AssetKind::Image };
        let n = if kind == AssetKind::Image { 1 } else { rng.gen_range(1..4) };
        let paths = (0..n).map(|_| path_string(rng)).collect();
        assets.insert(ident(rng, &mut names), AssetDecl { kind, paths, size_m: [messy(rng, 0.01, 2.0), messy(rng, 0.01, 2.0)] });
    }
    let asset_names: Vec<String> = assets.keys().cloned().collect();

    let [hx, hy] = geometry.half_extent_m();
    let mut entities = Vec::new();
    for _ in 0..rng.gen_range(0..5) {
        let mut lp = LinkingParams {
            halo_radius_px: rng.gen_range(1..40),
            halo_blur_px: rng.gen_range(0..6),
            outline_thickness_px: rng.gen_range(1..10),
            clone_alpha: messy(rng, 0.0, 1.0),
            landmark_size_px: rng.gen_range(1..50),
            tint: None,
        };
        if rng.gen() {
            lp.tint = Some(Color::new(rng.gen(), rng.gen(), rng.gen()));
        }
        entities.push(EntityDecl {
            name: ident(rng, &mut names),
            asset: asset_names.choose(rng).unwrap().clone(),
            layer: if rng.gen() { LayerId::Front } else { LayerId::Back },
            center_m: [messy(rng, -hx, hx), messy(rng, -hy, hy)],
            scale: messy(rng, 0.1, 3.0),
            alpha: messy(rng, 0.0, 1.0),
            linking: *LinkingStyle::ALL.choose(rng).unwrap(),
            linking_params: lp,
        });
    }

    let mut cues = BTreeMap::new();
    if !entities.is_empty() {
        for _ in 0..rng.gen_range(0..4) {
            let target = entities.choose(rng).unwrap().name.clone();
            cues.insert(ident(rng, &mut names), CueDecl { target, spec: random_spec(rng) });
        }
    }
    let cue_names: Vec<String> = cues.keys().cloned().collect();

    let mut bindings = Vec::new();
    if !cue_names.is_empty() {
        for _ in 0..rng.gen_range(0..4) {
            let zone = *[Zone::Personal, Zone::Social, Zone::Public].choose(rng).unwrap();
            let condition = match rng.gen_range(0..4) {
                0 => Condition::ZoneEnter(zone),
                1 => Condition::ZoneExit(zone),
                2 => Condition::DepthBelow(messy(rng, 0.01, 2.0)),
                _ => Condition::Manual,
            };
            let source = if rng.gen() { DistanceSource::User } else { DistanceSource::Hand };
            bindings.push(BindingDecl { condition, source, fire: cue_names.choose(rng).unwrap().clone() });
        }
    }

    let mut segments = BTreeMap::new();
    if entities.len() >= 2 && rng.gen_bool(0.3) {
        let pick: Vec<&EntityDecl> = entities.choose_multiple(rng, 2).collect();
        segments.insert(
            ident(rng, &mut names),
            SegmentDecl {
                asset: asset_names.choose(rng).unwrap().clone(),
                front_entity: pick[0].name.clone(),
                back_entity: pick[1].name.clone(),
                threshold_m: messy(rng, 0.05, 5.0),
            },
        );
    }

    ExperienceProfile { geometry, zone_config, calibration, assets, entities, cues, bindings, segments }
}

// ---------------------------------------------------------------------------
// Fuzzing

const FRAGMENTS: &[&str] = &[
    "{", "}", ";", "\"", "\\", "-", ".", "e", "0", "1e309", "-0", "nan", "inf", "display", "entity", "cue", "bind",
    "asset", "layer", "front", "back", "transition", "phase", "linear", "source", "dest", "when", "#", "\n", " ",
    "\t", "é", "\u{0}", "zone_enter", "depth_below", "segment", "calibration", "rotation", "link", "halo",
];

/// One random edit of `text`: byte-level noise plus grammar-aware splices.
pub fn mutate(rng: &mut impl Rng, text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.gen_range(1..4) {
        let n = chars.len();
        let at = if n == 0 { 0 } else { rng.gen_range(0..=n) };
        match rng.gen_range(0..7) {
            0 if n > 0 => {
                let end = (at + rng.gen_range(1..8)).min(n);
                chars.drain(at.min(n)..end);
            }
            1 => {
                let frag = FRAGMENTS.choose(rng).unwrap();
                chars.splice(at..at, frag.chars());
            }
            2 if n > 0 => {
                let i = at.min(n - 1);
                chars[i] = char::from_u32(rng.gen_range(0x20..0x7f)).unwrap();
            }
            3 if n > 1 => {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let (lo, hi) = (a.min(b), a.max(b));
                let copy: Vec<char> = chars[lo..hi.min(lo + 40)].to_vec();
                chars.splice(at..at, copy);
            }
            4 => chars.truncate(at),
            5 if n > 0 => {
                // Replace a number-looking run with a random literal.
                let lit = ["0", "-1", "1e-400", "99999999999999999999", "0.5", "3", "-0.0", "1.", ".5"]
                    .choose(rng)
                    .unwrap();
                let end = (at + 3).min(n);
                chars.splice(at.min(n)..end, lit.chars());
            }
            _ => {
                let lines: Vec<String> = chars.iter().collect::<String>().lines().map(str::to_string).collect();
                if lines.len() > 1 {
                    let mut lines = lines;
                    let i = rng.gen_range(0..lines.len());
                    let j = rng.gen_range(0..lines.len());
                    lines.swap(i, j);
                    chars = lines.join("\n").chars().collect();
                }
            }
        }
    }
    chars.into_iter().collect()
}

pub mod wire;
