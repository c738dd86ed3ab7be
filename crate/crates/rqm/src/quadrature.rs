//! Numerical integration over convex quadrilaterals and edges.
//!
//! Cells are integrated by splitting at the diagonal intersection into the
//! four criss-cross triangles and mapping a symmetric triangle rule to each.
//! The element spaces are genuine polynomials in physical coordinates, so the
//! affine triangle maps keep every element integral exact; a tensor rule on a
//! bilinear map would not. Edges use Gauss-Legendre.

use crate::error::{Error, Result};
use crate::geometry::{diagonal_intersection, Point2, QuadFrame};
use std::sync::OnceLock;

/// Default rule degree for stiffness integrands (constant Hessians of P2).
pub const DEGREE_STIFFNESS: usize = 2;
/// Default rule degree for load integrands.
pub const DEGREE_LOAD: usize = 4;
/// Default rule degree for error norms of transcendental solutions.
pub const DEGREE_ERROR: usize = 6;
/// Gauss point count for edge functionals (exact through degree 7).
pub const EDGE_POINTS: usize = 4;

/// Points and weights on the reference triangle (0,0), (1,0), (0,1).
/// Weights sum to the reference measure 1/2.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

fn orbit3(points: &mut Vec<(f64, f64)>, weights: &mut Vec<f64>, a: f64, w: f64) {
    points.push((a, a));
    points.push((1.0 - 2.0 * a, a));
    points.push((a, 1.0 - 2.0 * a));
    weights.extend_from_slice(&[w, w, w]);
}

fn orbit6(points: &mut Vec<(f64, f64)>, weights: &mut Vec<f64>, a: f64, b: f64, w: f64) {
    let c = 1.0 - a - b;
    for &(x, y) in &[(a, b), (b, a), (c, a), (a, c), (c, b), (b, c)] {
        points.push((x, y));
        weights.push(w);
    }
}

fn build_triangle_rule(degree: usize) -> Option<QuadratureRule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    // Dunavant rules; table weights are normalized to 1, halve for the
    // reference measure.
    match degree {
        1 => {
            points.push((1.0 / 3.0, 1.0 / 3.0));
            weights.push(0.5);
        }
        2 => {
            orbit3(&mut points, &mut weights, 1.0 / 6.0, 1.0 / 6.0);
        }
        3 => {
            points.push((1.0 / 3.0, 1.0 / 3.0));
            weights.push(-27.0 / 96.0);
            orbit3(&mut points, &mut weights, 0.2, 25.0 / 96.0);
        }
        4 => {
            orbit3(
                &mut points,
                &mut weights,
                0.445948490915965,
                0.223381589678011 / 2.0,
            );
            orbit3(
                &mut points,
                &mut weights,
                0.091576213509771,
                0.109951743655322 / 2.0,
            );
        }
        5 => {
            points.push((1.0 / 3.0, 1.0 / 3.0));
            weights.push(0.225 / 2.0);
            orbit3(
                &mut points,
                &mut weights,
                0.470142064105115,
                0.132394152788506 / 2.0,
            );
            orbit3(
                &mut points,
                &mut weights,
                0.101286507323456,
                0.125939180544827 / 2.0,
            );
        }
        6 => {
            orbit3(
                &mut points,
                &mut weights,
                0.249286745170910,
                0.116786275726379 / 2.0,
            );
            orbit3(
                &mut points,
                &mut weights,
                0.063089014491502,
                0.050844906370207 / 2.0,
            );
            orbit6(
                &mut points,
                &mut weights,
                0.310352451033785,
                0.053145049844816,
                0.082851075618374 / 2.0,
            );
        }
        _ => return None,
    }
    Some(QuadratureRule {
        points,
        weights,
        degree,
    })
}

/// Symmetric rule exact to `degree` on the reference triangle.
pub fn triangle_rule(degree: usize) -> Result<&'static QuadratureRule> {
    static RULES: OnceLock<Vec<Option<QuadratureRule>>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=6).map(build_triangle_rule).collect());
    rules
        .get(degree)
        .and_then(|r| r.as_ref())
        .ok_or(Error::UnsupportedDegree(degree))
}

/// Gauss-Legendre abscissae and weights on [-1, 1], n in 1..=5.
pub fn gauss_legendre(n: usize) -> Result<(&'static [f64], &'static [f64])> {
    const X3: f64 = 0.774596669241483377; // sqrt(3/5)
    const X4A: f64 = 0.339981043584856265; // sqrt((3 - 2 sqrt(6/5)) / 7)
    const X4B: f64 = 0.861136311594052575;
    const W4A: f64 = 0.652145154862546143; // (18 + sqrt(30)) / 36
    const W4B: f64 = 0.347854845137453857;
    const X5A: f64 = 0.538469310105683091;
    const X5B: f64 = 0.906179845938663993;
    const W5A: f64 = 0.478628670499366468; // (322 + 13 sqrt(70)) / 900
    const W5B: f64 = 0.236926885056189088;
    static TABLE: [(&[f64], &[f64]); 5] = [
        (&[0.0], &[2.0]),
        (
            &[-0.577350269189625765, 0.577350269189625765],
            &[1.0, 1.0],
        ),
        (&[-X3, 0.0, X3], &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]),
        (&[-X4B, -X4A, X4A, X4B], &[W4B, W4A, W4A, W4B]),
        (
            &[-X5B, -X5A, 0.0, X5A, X5B],
            &[W5B, W5A, 128.0 / 225.0, W5A, W5B],
        ),
    ];
    if n == 0 || n > TABLE.len() {
        return Err(Error::UnsupportedDegree(n));
    }
    Ok(TABLE[n - 1])
}

/// Integral of `f` over the cell via the four criss-cross triangles.
/// Exact for polynomials up to the rule degree.
pub fn integrate_cell(
    frame: &QuadFrame,
    degree: usize,
    mut f: impl FnMut(Point2) -> f64,
) -> Result<f64> {
    let rule = triangle_rule(degree)?;
    let c = diagonal_intersection(&frame.vertices);
    let mut total = 0.0;
    for i in 0..4 {
        let v0 = frame.vertices[i];
        let v1 = frame.vertices[(i + 1) % 4];
        let d1 = v1 - v0;
        let d2 = c - v0;
        let jac = d1.cross(d2).abs(); // = 2 * triangle area
        for (&(px, py), &w) in rule.points.iter().zip(&rule.weights) {
            let p = v0 + d1.scale(px) + d2.scale(py);
            total += w * jac * f(p);
        }
    }
    Ok(total)
}

/// Integral of `f` along the segment p0 -> p1 with an n-point Gauss rule.
/// Exact through degree 2n - 1.
pub fn integrate_edge(
    p0: Point2,
    p1: Point2,
    npoints: usize,
    mut f: impl FnMut(Point2) -> f64,
) -> Result<f64> {
    let (xs, ws) = gauss_legendre(npoints)?;
    let d = p1 - p0;
    let half_len = 0.5 * d.norm();
    let mut total = 0.0;
    for (&x, &w) in xs.iter().zip(ws) {
        let t = 0.5 * (x + 1.0);
        total += w * f(p0 + d.scale(t));
    }
    Ok(total * half_len)
}

/// Average of `f` along the edge.
pub fn edge_average(
    p0: Point2,
    p1: Point2,
    npoints: usize,
    f: impl FnMut(Point2) -> f64,
) -> Result<f64> {
    Ok(integrate_edge(p0, p1, npoints, f)? / p0.dist(p1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Table1Fn;
    use crate::poly::PolyXiEta;
    use approx::assert_relative_eq;

    fn unit_square() -> QuadFrame {
        QuadFrame::build([
            Point2::new(0.0, 1.0),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn weights_sum_to_reference_measure() {
        for degree in 1..=6 {
            let r = triangle_rule(degree).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert_relative_eq!(s, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn declared_degree_monomials_are_exact() {
        // reference integral of x^a y^b over the unit triangle is
        // a! b! / (a + b + 2)!
        fn exact(a: u32, b: u32) -> f64 {
            let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>().max(1.0);
            fact(a) * fact(b) / fact(a + b + 2)
        }
        for degree in 1..=6 {
            let r = triangle_rule(degree).unwrap();
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let got: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(&(x, y), &w)| w * x.powi(a as i32) * y.powi(b as i32))
                        .sum();
                    assert_relative_eq!(got, exact(a, b), epsilon = 1e-14, max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn degree_six_rule_integrates_x2y2() {
        let r = triangle_rule(6).unwrap();
        let got: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(&(x, y), &w)| w * x * x * y * y)
            .sum();
        assert_relative_eq!(got, 1.0 / 180.0, epsilon = 1e-15);
    }

    #[test]
    fn centroid_rule_is_degree_one() {
        let r = triangle_rule(1).unwrap();
        assert_eq!(r.points.len(), 1);
        assert_relative_eq!(r.weights[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn unsupported_degree_errors() {
        assert!(triangle_rule(7).is_err());
        assert!(triangle_rule(0).is_err());
    }

    #[test]
    fn constant_over_unit_square_is_one() {
        let f = unit_square();
        for degree in 1..=6 {
            let v = integrate_cell(&f, degree, |_| 1.0).unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn cell_area_matches_shoelace() {
        let verts = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.5, 2.0),
            Point2::new(-0.2, 1.5),
        ];
        let f = QuadFrame::build(verts).unwrap();
        let mut shoelace = 0.0;
        for i in 0..4 {
            shoelace += verts[i].cross(verts[(i + 1) % 4]);
        }
        shoelace *= 0.5;
        let quad = integrate_cell(&f, 1, |_| 1.0).unwrap();
        assert_relative_eq!(quad, shoelace, epsilon = 1e-13);
        assert_relative_eq!(f.area(), shoelace, epsilon = 1e-13);
    }

    #[test]
    fn xi2_minus_eta2_matches_analytic_cell_integral() {
        // In frame coordinates the cell is the image of the quad with
        // vertices (+-1 -+ alpha, ...); integrate exactly by the same
        // criss-cross split computed symbolically: use the closed form
        // via the four triangles with vertices in (xi, eta).
        let f = QuadFrame::build([
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.5, 2.0),
            Point2::new(-0.2, 1.5),
        ])
        .unwrap();
        let mut p = PolyXiEta::monomial(3);
        p.axpy(-1.0, &PolyXiEta::monomial(5));
        let got = integrate_cell(&f, 4, |q| p.eval(&f, q)).unwrap();
        // independent route: high-degree rule
        let want = integrate_cell(&f, 6, |q| p.eval(&f, q)).unwrap();
        assert_relative_eq!(got, want, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn edge_rules_reproduce_table1() {
        let f = QuadFrame::build([
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.5, 2.0),
            Point2::new(-0.2, 1.5),
        ])
        .unwrap();
        let xi2 = PolyXiEta::monomial(3);
        let eta2 = PolyXiEta::monomial(5);
        for i in 0..4 {
            let (p0, p1) = f.edge(i);
            let got = edge_average(p0, p1, EDGE_POINTS, |p| xi2.eval(&f, p)).unwrap();
            assert_relative_eq!(got, f.table1_average(Table1Fn::Xi2, i), epsilon = 1e-13);
            let got = edge_average(p0, p1, EDGE_POINTS, |p| eta2.eval(&f, p)).unwrap();
            assert_relative_eq!(got, f.table1_average(Table1Fn::Eta2, i), epsilon = 1e-13);
        }
    }

    #[test]
    fn edge_length_from_unit_integrand() {
        let p0 = Point2::new(0.3, -0.4);
        let p1 = Point2::new(2.0, 1.1);
        let v = integrate_edge(p0, p1, 2, |_| 1.0).unwrap();
        assert_relative_eq!(v, p0.dist(p1), epsilon = 1e-14);
    }

    #[test]
    fn gauss_rule_exactness() {
        // x^k on [-1,1] for k <= 2n-1
        for n in 1..=5 {
            let (xs, ws) = gauss_legendre(n).unwrap();
            for k in 0..=(2 * n - 1) {
                let got: f64 = xs
                    .iter()
                    .zip(ws)
                    .map(|(&x, &w)| w * x.powi(k as i32))
                    .sum();
                let want = if k % 2 == 0 {
                    2.0 / (k as f64 + 1.0)
                } else {
                    0.0
                };
                assert_relative_eq!(got, want, epsilon = 1e-14);
            }
        }
    }
}
