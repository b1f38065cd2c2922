//! Small vector helpers on plain arrays plus rigid transforms.
//!
//! Everything is `f64`; 3D positions are meters, 2D points are
//! pattern-space meters unless a function says otherwise.

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];

#[inline]
pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale3(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

#[inline]
pub fn dist3(a: Vec3, b: Vec3) -> f64 {
    norm3(sub3(a, b))
}

/// Normalizes `a`; returns `None` when its norm is below `eps`.
#[inline]
pub fn normalize3(a: Vec3, eps: f64) -> Option<Vec3> {
    let n = norm3(a);
    if n < eps {
        None
    } else {
        Some(scale3(a, 1.0 / n))
    }
}

#[inline]
pub fn add2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale2(a: Vec2, s: f64) -> Vec2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// 2D cross product (z component of the 3D cross of the embedded vectors).
#[inline]
pub fn cross2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm2(a: Vec2) -> f64 {
    dot2(a, a).sqrt()
}

#[inline]
pub fn dist2(a: Vec2, b: Vec2) -> f64 {
    norm2(sub2(a, b))
}

#[inline]
pub fn normalize2(a: Vec2, eps: f64) -> Option<Vec2> {
    let n = norm2(a);
    if n < eps {
        None
    } else {
        Some(scale2(a, 1.0 / n))
    }
}

#[inline]
pub fn lerp2(a: Vec2, b: Vec2, t: f64) -> Vec2 {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
}

#[inline]
pub fn lerp3(a: Vec3, b: Vec3, t: f64) -> Vec3 {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

/// Angle between two 2D vectors in radians, in `[0, pi]`.
pub fn angle_between2(a: Vec2, b: Vec2) -> f64 {
    let na = norm2(a);
    let nb = norm2(b);
    if na < 1e-15 || nb < 1e-15 {
        return 0.0;
    }
    let c = (dot2(a, b) / (na * nb)).clamp(-1.0, 1.0);
    c.acos()
}

/// Angle between two 3D vectors in radians, in `[0, pi]`.
pub fn angle_between3(a: Vec3, b: Vec3) -> f64 {
    let na = norm3(a);
    let nb = norm3(b);
    if na < 1e-15 || nb < 1e-15 {
        return 0.0;
    }
    let c = (dot3(a, b) / (na * nb)).clamp(-1.0, 1.0);
    c.acos()
}

/// Signed area of a closed 2D polygon (positive = counter-clockwise).
pub fn signed_area2(points: &[Vec2]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        acc += cross2(a, b);
    }
    0.5 * acc
}

/// Distance from `p` to the segment `a`-`b` in 2D.
pub fn point_segment_dist2(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = sub2(b, a);
    let len2 = dot2(ab, ab);
    if len2 < 1e-30 {
        return dist2(p, a);
    }
    let t = (dot2(sub2(p, a), ab) / len2).clamp(0.0, 1.0);
    dist2(p, lerp2(a, b, t))
}

/// A proper rigid motion: rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RigidTransform {
    pub rotation: [[f64; 3]; 3],
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
        }
    }

    /// Rotation of `angle` radians about the unit axis, then translation.
    pub fn from_axis_angle(axis: Vec3, angle: f64, translation: Vec3) -> Self {
        let [x, y, z] = axis;
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        RigidTransform {
            rotation: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
            translation,
        }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        let r = &self.rotation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + self.translation[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + self.translation[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + self.translation[2],
        ]
    }

    /// Inverse motion (transpose rotation, rotated-back negative translation).
    pub fn inverse(&self) -> Self {
        let r = &self.rotation;
        let rt = [
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ];
        let t = self.translation;
        let ti = [
            -(rt[0][0] * t[0] + rt[0][1] * t[1] + rt[0][2] * t[2]),
            -(rt[1][0] * t[0] + rt[1][1] * t[1] + rt[1][2] * t[2]),
            -(rt[2][0] * t[0] + rt[2][1] * t[1] + rt[2][2] * t[2]),
        ];
        RigidTransform {
            rotation: rt,
            translation: ti,
        }
    }
}
