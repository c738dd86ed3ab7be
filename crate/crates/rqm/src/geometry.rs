//! Per-cell geometry of a convex quadrilateral.
//!
//! Every cell carries an affine frame built from the midpoints of its edges:
//! the midpoint quadrilateral is always a parallelogram, its center `O` and
//! the half-diagonals `r = O->m3`, `s = O->m4` define two linear coordinates
//! (xi, eta) with `p = O + xi*r + eta*s`. In that frame the vertices sit at
//!
//! ```text
//!   a1(-1-alpha, 1-beta)   a2(-1+alpha, -1+beta)
//!   a3(1-alpha, -1-beta)   a4(1+alpha, 1+beta)
//! ```
//!
//! for distortion parameters (alpha, beta); the cell is convex exactly when
//! |alpha| + |beta| < 1. Edge averages of low-order monomials in (xi, eta)
//! have closed forms in (alpha, beta) which serve as the analytic oracle for
//! all quadrature in this crate.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Normalized-area threshold below which a cell counts as collapsed.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Convexity margin: reject cells with |alpha| + |beta| > 1 - CONVEXITY_TOL.
pub const CONVEXITY_TOL: f64 = 1e-10;

/// A point (or 2-vector) in physical coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product, `self.x * o.y - self.y * o.x`.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, t: f64) -> Point2 {
        Point2::new(self.x * t, self.y * t)
    }

    pub fn midpoint(self, o: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

/// Functions whose edge averages have closed forms in (alpha, beta).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Table1Fn {
    One,
    Xi,
    Eta,
    Xi2,
    Eta2,
    /// xi^2 - eta^2 (the non-bilinear direction of the QGB space).
    Xi2MinusEta2,
}

/// Affine frame of one convex quadrilateral.
#[derive(Clone, Debug)]
pub struct QuadFrame {
    /// Vertices a1..a4 in counter-clockwise order.
    pub vertices: [Point2; 4],
    /// Center of the midpoint parallelogram.
    pub center: Point2,
    /// Half-diagonal towards the midpoint of edge e3.
    pub r: Point2,
    /// Half-diagonal towards the midpoint of edge e4.
    pub s: Point2,
    pub alpha: f64,
    pub beta: f64,
    /// r x s = |Q| / 4, cached.
    cross: f64,
}

impl QuadFrame {
    /// Builds the frame from four distinct vertices in counter-clockwise
    /// order. The first input vertex becomes a1. Clockwise input shows up as
    /// r x s <= 0 and is rejected (a cyclic rotation cannot repair
    /// orientation). No re-orientation is applied to force alpha, beta > 0;
    /// all formulas downstream accept signed values.
    pub fn build(vertices: [Point2; 4]) -> Result<Self> {
        let m: Vec<Point2> = (0..4)
            .map(|i| vertices[i].midpoint(vertices[(i + 1) % 4]))
            .collect();
        let center = m[0].midpoint(m[2]);
        let r = m[2] - center;
        let s = m[3] - center;
        let cross = r.cross(s);
        if cross <= 0.0 {
            return Err(Error::NonConvex(f64::INFINITY));
        }
        let scale = r.norm() * s.norm();
        if scale == 0.0 || cross / scale < DEGENERACY_TOL {
            return Err(Error::Degenerate(if scale == 0.0 {
                0.0
            } else {
                cross / scale
            }));
        }
        // a4 = O + (1+alpha) r + (1+beta) s
        let rhs = vertices[3] - center;
        let t = (rhs.x * s.y - rhs.y * s.x) / cross;
        let u = (r.x * rhs.y - r.y * rhs.x) / cross;
        let (alpha, beta) = (t - 1.0, u - 1.0);
        if alpha.abs() + beta.abs() > 1.0 - CONVEXITY_TOL {
            return Err(Error::NonConvex(alpha.abs() + beta.abs()));
        }
        Ok(Self {
            vertices,
            center,
            r,
            s,
            alpha,
            beta,
            cross,
        })
    }

    /// Frame coordinates of a physical point: p = O + xi r + eta s.
    pub fn xi_eta(&self, p: Point2) -> (f64, f64) {
        let d = p - self.center;
        (
            (d.x * self.s.y - d.y * self.s.x) / self.cross,
            (self.r.x * d.y - self.r.y * d.x) / self.cross,
        )
    }

    /// Physical point at frame coordinates (xi, eta).
    pub fn point_at(&self, xi: f64, eta: f64) -> Point2 {
        self.center + self.r.scale(xi) + self.s.scale(eta)
    }

    /// Exact frame coordinates of vertex a_{i+1}, i in 0..4.
    pub fn vertex_xi_eta(&self, i: usize) -> (f64, f64) {
        let (a, b) = (self.alpha, self.beta);
        match i {
            0 => (-1.0 - a, 1.0 - b),
            1 => (-1.0 + a, -1.0 + b),
            2 => (1.0 - a, -1.0 - b),
            _ => (1.0 + a, 1.0 + b),
        }
    }

    /// Endpoints of edge e_{i+1} = (a_{i+1}, a_{i+2}), i in 0..4.
    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        (self.vertices[i], self.vertices[(i + 1) % 4])
    }

    /// Unit normal of edge i pointing out of the cell.
    pub fn edge_outward_normal(&self, i: usize) -> Point2 {
        let (p0, p1) = self.edge(i);
        let d = p1 - p0;
        // interior lies left of a CCW edge; rotate by -90 degrees
        Point2::new(d.y, -d.x).scale(1.0 / d.norm())
    }

    /// r x s; equals one quarter of the cell area.
    pub fn cross_rs(&self) -> f64 {
        self.cross
    }

    /// Cell area, 4 (r x s).
    pub fn area(&self) -> f64 {
        4.0 * self.cross
    }

    /// max{|r||s|/(r x s), |r|/|s|, |s|/|r|}; 1 exactly for squares.
    pub fn shape_regularity(&self) -> f64 {
        let (nr, ns) = (self.r.norm(), self.s.norm());
        (nr * ns / self.cross).max(nr / ns).max(ns / nr)
    }

    /// Jacobian of (xi, eta) -> p as column vectors (r | s).
    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        [[self.r.x, self.s.x], [self.r.y, self.s.y]]
    }

    /// Inverse Jacobian, rows give grad(xi) and grad(eta).
    pub fn jacobian_inv(&self) -> [[f64; 2]; 2] {
        let d = self.cross;
        [[self.s.y / d, -self.s.x / d], [-self.r.y / d, self.r.x / d]]
    }

    /// Closed-form edge average of a Table-1 function over edge i (0..4).
    pub fn table1_average(&self, f: Table1Fn, edge: usize) -> f64 {
        assert!(edge < 4, "edge index out of range");
        let (a, b) = (self.alpha, self.beta);
        let xi2 = |i: usize| match i {
            0 | 2 => 1.0 + a * a / 3.0,
            1 => (1.0 - a) * (1.0 - a) / 3.0,
            _ => (1.0 + a) * (1.0 + a) / 3.0,
        };
        let eta2 = |i: usize| match i {
            1 | 3 => 1.0 + b * b / 3.0,
            0 => (1.0 - b) * (1.0 - b) / 3.0,
            _ => (1.0 + b) * (1.0 + b) / 3.0,
        };
        match f {
            Table1Fn::One => 1.0,
            Table1Fn::Xi => [-1.0, 0.0, 1.0, 0.0][edge],
            Table1Fn::Eta => [0.0, -1.0, 0.0, 1.0][edge],
            Table1Fn::Xi2 => xi2(edge),
            Table1Fn::Eta2 => eta2(edge),
            Table1Fn::Xi2MinusEta2 => xi2(edge) - eta2(edge),
        }
    }
}

/// Intersection of the two diagonals a1a3 and a2a4 of a convex quad.
pub fn diagonal_intersection(v: &[Point2; 4]) -> Point2 {
    // v0 + t (v2 - v0) = v1 + u (v3 - v1)
    let d1 = v[2] - v[0];
    let d2 = v[3] - v[1];
    let den = d1.cross(d2);
    let t = (v[1] - v[0]).cross(d2) / den;
    v[0] + d1.scale(t)
}
