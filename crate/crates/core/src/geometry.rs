//! Planar points, small symmetric matrices and triangle measures.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane.
///
/// Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Position) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Position) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Position) -> f64 {
        (self - other).norm()
    }

    /// Applies `[[0, 1], [-1, 0]]`, a clockwise quarter turn.
    pub fn rot_cw(self) -> Position {
        Position::new(self.y, -self.x)
    }

    /// Rotates counterclockwise by `angle` radians about the origin.
    pub fn rotated(self, angle: f64) -> Position {
        let (s, c) = angle.sin_cos();
        Position::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl From<[f64; 2]> for Position {
    fn from([x, y]: [f64; 2]) -> Self {
        Position { x, y }
    }
}

impl From<Position> for [f64; 2] {
    fn from(p: Position) -> Self {
        [p.x, p.y]
    }
}

impl Add for Position {
    type Output = Position;
    fn add(self, rhs: Position) -> Position {
        Position::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Position {
    fn add_assign(&mut self, rhs: Position) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Position {
    type Output = Position;
    fn sub(self, rhs: Position) -> Position {
        Position::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Position {
    type Output = Position;
    fn neg(self) -> Position {
        Position::new(-self.x, -self.y)
    }
}

impl Mul<Position> for f64 {
    type Output = Position;
    fn mul(self, rhs: Position) -> Position {
        Position::new(self * rhs.x, self * rhs.y)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

/// A symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 {
        xx: 0.0,
        xy: 0.0,
        yy: 0.0,
    };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn identity_scaled(s: f64) -> Self {
        Sym2::new(s, 0.0, s)
    }

    /// `v v^T`.
    pub fn outer(v: Position) -> Self {
        Sym2::new(v.x * v.x, v.x * v.y, v.y * v.y)
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.xx + self.yy);
        let radius = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        [mean - radius, mean + radius]
    }

    pub fn apply(&self, v: Position) -> Position {
        Position::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// Solves `self * v = rhs`; `None` when the matrix is numerically singular.
    pub fn solve(&self, rhs: Position) -> Option<Position> {
        let det = self.det();
        let scale = self.norm();
        if !det.is_finite() || det.abs() <= f64::EPSILON * scale * scale {
            return None;
        }
        Some(Position::new(
            (self.yy * rhs.x - self.xy * rhs.y) / det,
            (self.xx * rhs.y - self.xy * rhs.x) / det,
        ))
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, rhs: Sym2) -> Sym2 {
        Sym2::new(self.xx + rhs.xx, self.xy + rhs.xy, self.yy + rhs.yy)
    }
}

impl AddAssign for Sym2 {
    fn add_assign(&mut self, rhs: Sym2) {
        *self = *self + rhs;
    }
}

impl Mul<Sym2> for f64 {
    type Output = Sym2;
    fn mul(self, rhs: Sym2) -> Sym2 {
        Sym2::new(self * rhs.xx, self * rhs.xy, self * rhs.yy)
    }
}

/// Half the determinant of `[[1, 1, 1], [p_i, p_j, p_k]]`.
///
/// Positive when `p_i, p_j, p_k` are in counterclockwise order.
pub fn signed_area(p_i: Position, p_j: Position, p_k: Position) -> f64 {
    0.5 * (p_j - p_i).cross(p_k - p_i)
}

/// Unsigned triangle area from its side lengths.
///
/// Uses the cancellation-safe ordering of Heron's formula; returns `None` when
/// the sides violate the strict triangle inequality.
pub fn heron_area(d1: f64, d2: f64, d3: f64) -> Option<f64> {
    let mut s = [d1, d2, d3];
    s.sort_by(|a, b| b.total_cmp(a));
    let [a, b, c] = s;
    if !(c > 0.0) || a >= b + c {
        return None;
    }
    let prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    Some(0.25 * prod.sqrt())
}

/// True when the three lengths satisfy the strict triangle inequality.
pub fn strict_triangle(d1: f64, d2: f64, d3: f64) -> bool {
    d1 > 0.0 && d2 > 0.0 && d3 > 0.0 && d1 < d2 + d3 && d2 < d1 + d3 && d3 < d1 + d2
}
