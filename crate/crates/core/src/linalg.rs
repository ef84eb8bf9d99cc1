//! Fixed-size 3-vector and 3×3 matrix arithmetic plus a one-sided Jacobi SVD.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        let [a, b, c] = self.0;
        let [d, e, f] = o.0;
        Vec3([b * f - c * e, c * d - a * f, a * e - b * d])
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Default for Mat3 {
    fn default() -> Self {
        Mat3::IDENTITY
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for r in 0..3 {
            m[r] = [c0.0[r], c1.0[r], c2.0[r]];
        }
        Mat3(m)
    }

    pub fn col(&self, c: usize) -> Vec3 {
        Vec3([self.0[0][c], self.0[1][c], self.0[2][c]])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    pub fn scale(&self, k: f64) -> Mat3 {
        let mut out = self.0;
        out.iter_mut().flatten().for_each(|v| *v *= k);
        Mat3(out)
    }

    pub fn diag(d: [f64; 3]) -> Mat3 {
        Mat3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    /// Outer product `a bᵀ`.
    pub fn outer(a: Vec3, b: Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a.0[r] * b.0[c];
            }
        }
        Mat3(m)
    }

    /// Max-abs entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Right-handed rotation by `angle` radians about unit `axis`.
    pub fn rotation(axis: Vec3, angle: f64) -> Mat3 {
        let a = axis.scale(1.0 / axis.norm());
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let [x, y, z] = a.0;
        Mat3([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    pub fn rot_z(angle: f64) -> Mat3 {
        Mat3::rotation(Vec3::new(0.0, 0.0, 1.0), angle)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[r][k] * o.0[k][c]).sum();
            }
        }
        Mat3(m)
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut m = self.0;
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += o.0[r][c];
            }
        }
        Mat3(m)
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + o.scale(-1.0)
    }
}

/// `a = u · diag(sigma) · vᵀ` with `sigma` sorted descending.
#[derive(Clone, Copy, Debug)]
pub struct Svd3 {
    pub u: Mat3,
    pub sigma: [f64; 3],
    pub v: Mat3,
}

pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// One-sided Jacobi SVD. Columns of `a` are orthogonalized by plane
/// rotations accumulated into `v`; singular values are the final column
/// norms. Left singular vectors of (near-)zero singular values are completed
/// to an orthonormal basis, so `u` is always orthogonal.
pub fn svd3(a: &Mat3) -> Svd3 {
    let mut cols = [a.col(0), a.col(1), a.col(2)];
    let mut vcols = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let alpha = cols[p].norm_sq();
            let beta = cols[q].norm_sq();
            let gamma = cols[p].dot(cols[q]);
            if gamma == 0.0 || gamma.abs() <= JACOBI_TOLERANCE * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            let (ap, aq) = (cols[p], cols[q]);
            cols[p] = ap.scale(c) - aq.scale(s);
            cols[q] = ap.scale(s) + aq.scale(c);
            let (vp, vq) = (vcols[p], vcols[q]);
            vcols[p] = vp.scale(c) - vq.scale(s);
            vcols[q] = vp.scale(s) + vq.scale(c);
        }
        if !rotated {
            break;
        }
    }
    let mut order = [0usize, 1, 2];
    let norms = [cols[0].norm(), cols[1].norm(), cols[2].norm()];
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let sigma = [norms[order[0]], norms[order[1]], norms[order[2]]];
    let v = Mat3::from_cols(vcols[order[0]], vcols[order[1]], vcols[order[2]]);

    let scale = sigma[0].max(f64::MIN_POSITIVE);
    let tiny = |s: f64| s <= 1e-13 * scale;
    let mut u_cols = [Vec3::ZERO; 3];
    for k in 0..3 {
        if !tiny(sigma[k]) {
            u_cols[k] = cols[order[k]].scale(1.0 / sigma[k]);
        }
    }
    if tiny(sigma[0]) {
        u_cols = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
    } else if tiny(sigma[1]) {
        // Pick the axis least aligned with u0, orthogonalize, then cross.
        let u0 = u_cols[0];
        let axis = (0..3)
            .map(|i| {
                let mut e = [0.0; 3];
                e[i] = 1.0;
                Vec3(e)
            })
            .min_by(|a, b| a.dot(u0).abs().partial_cmp(&b.dot(u0).abs()).unwrap())
            .unwrap();
        let u1 = axis - u0.scale(axis.dot(u0));
        u_cols[1] = u1.scale(1.0 / u1.norm());
        u_cols[2] = u_cols[0].cross(u_cols[1]);
    } else if tiny(sigma[2]) {
        u_cols[2] = u_cols[0].cross(u_cols[1]);
    }
    Svd3 { u: Mat3::from_cols(u_cols[0], u_cols[1], u_cols[2]), sigma, v }
}
