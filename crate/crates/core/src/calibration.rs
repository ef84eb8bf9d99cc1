//! Sensor-to-display registration from point correspondences.
//!
//! [`estimate_similarity`] is the closed-form least-squares fit of
//! `dst ≈ s·R·src + t` over proper rotations (Kabsch, with Umeyama's scale
//! and reflection correction).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::linalg::{svd3, Mat3, Vec3};

/// Relative singular-value floor below which a configuration counts as
/// rank-deficient.
const RANK_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CalibrationError {
    #[error("point count mismatch: {src} source vs {dst} destination points")]
    CountMismatch { src: usize, dst: usize },
    #[error("need at least 3 point pairs, got {0}")]
    TooFewPoints(usize),
    #[error("source points are collinear or coincident")]
    Collinear,
    #[error("degenerate configuration: cross-covariance has rank < 2")]
    DegenerateCovariance,
    #[error("non-finite coordinate in point {0}")]
    NonFinite(usize),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointSet3 {
    pub points: Vec<Vec3>,
}

impl PointSet3 {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointSet3 { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vec3 {
        let n = self.points.len().max(1) as f64;
        self.points.iter().fold(Vec3::ZERO, |a, p| a + *p).scale(1.0 / n)
    }
}

impl From<Vec<Vec3>> for PointSet3 {
    fn from(points: Vec<Vec3>) -> Self {
        PointSet3 { points }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Default for SimilarityTransform {
    fn default() -> Self {
        SimilarityTransform::IDENTITY
    }
}

impl SimilarityTransform {
    pub const IDENTITY: SimilarityTransform =
        SimilarityTransform { scale: 1.0, rotation: Mat3::IDENTITY, translation: Vec3::ZERO };

    pub fn new(scale: f64, rotation: Mat3, translation: Vec3) -> Self {
        SimilarityTransform { scale, rotation, translation }
    }

    pub fn translation(t: Vec3) -> Self {
        SimilarityTransform { translation: t, ..SimilarityTransform::IDENTITY }
    }

    /// `s·R·p + t`.
    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation.mul_vec(p).scale(self.scale) + self.translation
    }

    pub fn inverse(&self) -> SimilarityTransform {
        let rt = self.rotation.transpose();
        let inv_s = 1.0 / self.scale;
        SimilarityTransform { scale: inv_s, rotation: rt, translation: -rt.mul_vec(self.translation).scale(inv_s) }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &SimilarityTransform) -> SimilarityTransform {
        SimilarityTransform {
            scale: self.scale * other.scale,
            rotation: self.rotation * other.rotation,
            translation: self.apply(other.translation),
        }
    }

    /// `‖R·Rᵀ − I‖∞ < tol`, `|det R − 1| < tol` and `s > 0`.
    pub fn is_proper(&self, tol: f64) -> bool {
        let orth = (self.rotation * self.rotation.transpose() - Mat3::IDENTITY).max_abs();
        orth < tol && (self.rotation.det() - 1.0).abs() < tol && self.scale > 0.0
    }

    /// The 13 numbers `s r00 r01 … r22 tx ty tz`.
    pub fn to_numbers(&self) -> [f64; 13] {
        let mut out = [0.0; 13];
        out[0] = self.scale;
        for (i, v) in self.rotation.0.iter().flatten().enumerate() {
            out[1 + i] = *v;
        }
        out[10..13].copy_from_slice(&self.translation.0);
        out
    }

    pub fn from_numbers(n: &[f64; 13]) -> Self {
        let mut r = [[0.0; 3]; 3];
        for i in 0..9 {
            r[i / 3][i % 3] = n[1 + i];
        }
        SimilarityTransform { scale: n[0], rotation: Mat3(r), translation: Vec3([n[10], n[11], n[12]]) }
    }

    /// Persisted form: a comment header then the 13 numbers on one line.
    pub fn to_file_string(&self) -> String {
        let mut s = String::from("# similarity transform: s r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz\n");
        let nums: Vec<String> = self.to_numbers().iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(s, "{}", nums.join(" "));
        s
    }

    pub fn parse_file(text: &str) -> Result<Self, CalibrationError> {
        let mut nums = Vec::with_capacity(13);
        let mut last_line = 0;
        for (i, line) in text.lines().enumerate() {
            last_line = i + 1;
            let body = line.split('#').next().unwrap_or("");
            for tok in body.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| CalibrationError::Syntax {
                    line: i + 1,
                    message: format!("not a number: {tok:?}"),
                })?;
                nums.push(v);
            }
        }
        let arr: [f64; 13] = nums.as_slice().try_into().map_err(|_| CalibrationError::Syntax {
            line: last_line.max(1),
            message: format!("expected 13 numbers, found {}", nums.len()),
        })?;
        if arr.iter().any(|v| !v.is_finite()) || arr[0] <= 0.0 {
            return Err(CalibrationError::Syntax { line: last_line.max(1), message: "invalid transform values".into() });
        }
        Ok(SimilarityTransform::from_numbers(&arr))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub rmse_m: f64,
    pub residuals_m: Vec<f64>,
}

fn check_pairs(src: &PointSet3, dst: &PointSet3) -> Result<(), CalibrationError> {
    if src.len() != dst.len() {
        return Err(CalibrationError::CountMismatch { src: src.len(), dst: dst.len() });
    }
    for (i, (a, b)) in src.points.iter().zip(&dst.points).enumerate() {
        if !a.is_finite() || !b.is_finite() {
            return Err(CalibrationError::NonFinite(i));
        }
    }
    Ok(())
}

/// Least-squares similarity (or rigid, when `with_scale` is false) transform
/// mapping `src` onto `dst`.
pub fn estimate_similarity(
    src: &PointSet3,
    dst: &PointSet3,
    with_scale: bool,
) -> Result<SimilarityTransform, CalibrationError> {
    check_pairs(src, dst)?;
    let n = src.len();
    if n < 3 {
        return Err(CalibrationError::TooFewPoints(n));
    }
    let mu_s = src.centroid();
    let mu_d = dst.centroid();
    let inv_n = 1.0 / n as f64;

    let mut scatter = Mat3::ZERO;
    let mut cov = Mat3::ZERO;
    let mut var_s = 0.0;
    for (a, b) in src.points.iter().zip(&dst.points) {
        let xs = *a - mu_s;
        let xd = *b - mu_d;
        scatter = scatter + Mat3::outer(xs, xs);
        cov = cov + Mat3::outer(xd, xs);
        var_s += xs.norm_sq();
    }
    let scatter = scatter.scale(inv_n);
    let cov = cov.scale(inv_n);
    let var_s = var_s * inv_n;

    let sc = svd3(&scatter);
    if sc.sigma[0] <= 0.0 || sc.sigma[1] <= RANK_EPS * sc.sigma[0] {
        return Err(CalibrationError::Collinear);
    }

    let svd = svd3(&cov);
    if svd.sigma[0] <= 0.0 || svd.sigma[1] <= RANK_EPS * svd.sigma[0] {
        return Err(CalibrationError::DegenerateCovariance);
    }
    // Flip the weakest direction if U·Vᵀ would be a reflection.
    let d = if svd.u.det() * svd.v.det() < 0.0 { -1.0 } else { 1.0 };
    let signs = Mat3::diag([1.0, 1.0, d]);
    let rotation = svd.u * signs * svd.v.transpose();
    let scale = if with_scale { (svd.sigma[0] + svd.sigma[1] + d * svd.sigma[2]) / var_s } else { 1.0 };
    let translation = mu_d - rotation.mul_vec(mu_s).scale(scale);
    Ok(SimilarityTransform { scale, rotation, translation })
}

pub fn apply(t: &SimilarityTransform, p: Vec3) -> Vec3 {
    t.apply(p)
}

/// Per-pair residual distances and their root mean square.
pub fn rmse(t: &SimilarityTransform, src: &PointSet3, dst: &PointSet3) -> Result<CalibrationReport, CalibrationError> {
    check_pairs(src, dst)?;
    let residuals_m: Vec<f64> = src.points.iter().zip(&dst.points).map(|(a, b)| (*b - t.apply(*a)).norm()).collect();
    let n = residuals_m.len().max(1) as f64;
    let rmse_m = (residuals_m.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    Ok(CalibrationReport { rmse_m, residuals_m })
}

/// Parses `sx sy sz dx dy dz` lines; `#` starts a comment.
pub fn parse_correspondences(text: &str) -> Result<(PointSet3, PointSet3), CalibrationError> {
    let mut src = Vec::new();
    let mut dst = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 6 {
            return Err(CalibrationError::Syntax {
                line: i + 1,
                message: format!("expected 6 numbers, found {}", toks.len()),
            });
        }
        let mut v = [0.0; 6];
        for (slot, tok) in v.iter_mut().zip(&toks) {
            *slot = tok.parse().map_err(|_| CalibrationError::Syntax {
                line: i + 1,
                message: format!("not a number: {tok:?}"),
            })?;
        }
        src.push(Vec3([v[0], v[1], v[2]]));
        dst.push(Vec3([v[3], v[4], v[5]]));
    }
    Ok((PointSet3::new(src), PointSet3::new(dst)))
}

pub fn format_correspondences(src: &PointSet3, dst: &PointSet3) -> String {
    let mut s = String::from("# sx sy sz dx dy dz (meters)\n");
    for (a, b) in src.points.iter().zip(&dst.points) {
        let _ = writeln!(s, "{} {} {} {} {} {}", a.0[0], a.0[1], a.0[2], b.0[0], b.0[1], b.0[2]);
    }
    s
}

/// Twelve target locations on the front panel plane (z = 0): a 4×3 grid
/// inset to 80% of the panel extent.
pub fn front_panel_grid(half_width_m: f64, half_height_m: f64) -> PointSet3 {
    let mut pts = Vec::with_capacity(12);
    for row in 0..3 {
        for col in 0..4 {
            let x = -0.8 * half_width_m + 1.6 * half_width_m * col as f64 / 3.0;
            let y = 0.8 * half_height_m - 1.6 * half_height_m * row as f64 / 2.0;
            pts.push(Vec3::new(x, y, 0.0));
        }
    }
    PointSet3::new(pts)
}
