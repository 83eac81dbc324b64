use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// A point or vector in image coordinates (pixels, x right, y down).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn normalized(self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Symmetric 2x2 matrix `[a b; b c]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    /// Eigenvalues `(min, max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.a + self.c);
        let r = (0.5 * (self.a - self.c)).hypot(self.b);
        (mean - r, mean + r)
    }

    pub fn solve(&self, rhs: Point) -> Option<Point> {
        let det = self.det();
        if det.abs() <= f64::MIN_POSITIVE {
            return None;
        }
        Some(Point::new(
            (self.c * rhs.x - self.b * rhs.y) / det,
            (self.a * rhs.y - self.b * rhs.x) / det,
        ))
    }

    pub fn apply(&self, v: Point) -> Point {
        Point::new(self.a * v.x + self.b * v.y, self.b * v.x + self.c * v.y)
    }
}

/// Axis-aligned rectangle `(x, y, w, h)` in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Half-open containment: `[x, x + w) x [y, y + h)`.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x < self.x + self.w && p.y >= self.y && p.y < self.y + self.h
    }

    pub fn clamp_to(&self, width: f64, height: f64) -> Rect {
        let x0 = self.x.clamp(0.0, width);
        let y0 = self.y.clamp(0.0, height);
        let x1 = (self.x + self.w).clamp(0.0, width);
        let y1 = (self.y + self.h).clamp(0.0, height);
        Rect::new(x0, y0, (x1 - x0).max(0.0), (y1 - y0).max(0.0))
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = Sym2 { a: 3.0, b: 0.0, c: 1.0 };
        assert_eq!(m.eigenvalues(), (1.0, 3.0));
    }

    #[test]
    fn solve_roundtrip() {
        let m = Sym2 { a: 4.0, b: 1.0, c: 3.0 };
        let x = Point::new(0.5, -2.0);
        let got = m.solve(m.apply(x)).unwrap();
        assert!((got - x).norm() < 1e-12);
    }

    #[test]
    fn clamp_keeps_inside() {
        let r = Rect::new(-5.0, 350.0, 20.0, 20.0).clamp_to(480.0, 360.0);
        assert_eq!(r, Rect::new(0.0, 350.0, 15.0, 10.0));
    }
}
