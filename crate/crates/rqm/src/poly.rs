//! Polynomials on one cell in the frame coordinates (xi, eta).
//!
//! Coefficients run over the fixed monomial list
//! `{1, xi, eta, xi^2, xi*eta, eta^2, xi^3, eta^3}`; the cubic slots exist
//! only for the quadrilateral Morley space P2 + span{xi^3, eta^3}. Since
//! (xi, eta) are affine in physical coordinates, these are genuine
//! polynomials in (x, y) and all derivative transforms use the constant
//! inverse Jacobian of the frame.

use crate::geometry::{Point2, QuadFrame};

/// Number of monomials in the full local space.
pub const NUM_MONOMIALS: usize = 8;

/// Largest monomial degree a polynomial is allowed to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    Linear,
    Quadratic,
    /// P2 plus the diagonal cubics xi^3, eta^3.
    QuadraticPlusCubicDiag,
}

impl Degree {
    /// Number of leading monomial slots admitted by this tag.
    pub fn monomial_count(self) -> usize {
        match self {
            Degree::Linear => 3,
            Degree::Quadratic => 6,
            Degree::QuadraticPlusCubicDiag => 8,
        }
    }
}

/// A polynomial over the (xi, eta) monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyXiEta {
    pub coeffs: [f64; NUM_MONOMIALS],
    pub degree: Degree,
}

impl PolyXiEta {
    pub fn zero(degree: Degree) -> Self {
        Self {
            coeffs: [0.0; NUM_MONOMIALS],
            degree,
        }
    }

    /// Builds from coefficients, asserting slots beyond the tag are zero.
    pub fn new(coeffs: [f64; NUM_MONOMIALS], degree: Degree) -> Self {
        debug_assert!(
            coeffs[degree.monomial_count()..].iter().all(|&c| c == 0.0),
            "coefficients beyond the degree tag must be exactly zero"
        );
        Self { coeffs, degree }
    }

    /// The k-th basis monomial as a polynomial.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = [0.0; NUM_MONOMIALS];
        coeffs[k] = 1.0;
        let degree = match k {
            0..=2 => Degree::Linear,
            3..=5 => Degree::Quadratic,
            _ => Degree::QuadraticPlusCubicDiag,
        };
        Self { coeffs, degree }
    }

    pub fn quadratic(c: [f64; 6]) -> Self {
        let mut coeffs = [0.0; NUM_MONOMIALS];
        coeffs[..6].copy_from_slice(&c);
        Self {
            coeffs,
            degree: Degree::Quadratic,
        }
    }

    pub fn linear(c0: f64, c_xi: f64, c_eta: f64) -> Self {
        let mut coeffs = [0.0; NUM_MONOMIALS];
        coeffs[0] = c0;
        coeffs[1] = c_xi;
        coeffs[2] = c_eta;
        Self {
            coeffs,
            degree: Degree::Linear,
        }
    }

    pub fn axpy(&mut self, t: f64, o: &PolyXiEta) {
        for (c, oc) in self.coeffs.iter_mut().zip(o.coeffs.iter()) {
            *c += t * oc;
        }
        self.degree = self.degree.max(o.degree);
    }

    pub fn eval_xi_eta(&self, xi: f64, eta: f64) -> f64 {
        let c = &self.coeffs;
        c[0] + c[1] * xi
            + c[2] * eta
            + c[3] * xi * xi
            + c[4] * xi * eta
            + c[5] * eta * eta
            + c[6] * xi * xi * xi
            + c[7] * eta * eta * eta
    }

    /// Gradient with respect to (xi, eta).
    pub fn grad_xi_eta(&self, xi: f64, eta: f64) -> (f64, f64) {
        let c = &self.coeffs;
        (
            c[1] + 2.0 * c[3] * xi + c[4] * eta + 3.0 * c[6] * xi * xi,
            c[2] + c[4] * xi + 2.0 * c[5] * eta + 3.0 * c[7] * eta * eta,
        )
    }

    /// Hessian with respect to (xi, eta): (d_xixi, d_xieta, d_etaeta).
    pub fn hess_xi_eta(&self, xi: f64, eta: f64) -> (f64, f64, f64) {
        let c = &self.coeffs;
        (
            2.0 * c[3] + 6.0 * c[6] * xi,
            c[4],
            2.0 * c[5] + 6.0 * c[7] * eta,
        )
    }

    pub fn eval(&self, frame: &QuadFrame, p: Point2) -> f64 {
        let (xi, eta) = frame.xi_eta(p);
        self.eval_xi_eta(xi, eta)
    }

    /// Physical gradient via the constant inverse Jacobian.
    pub fn grad(&self, frame: &QuadFrame, p: Point2) -> Point2 {
        let (xi, eta) = frame.xi_eta(p);
        let (gx, ge) = self.grad_xi_eta(xi, eta);
        let ji = frame.jacobian_inv();
        // grad_x = Jinv^T grad_xieta
        Point2::new(ji[0][0] * gx + ji[1][0] * ge, ji[0][1] * gx + ji[1][1] * ge)
    }

    /// Physical Hessian `Jinv^T H Jinv`, returned as [[xx, xy], [yx, yy]].
    pub fn hess(&self, frame: &QuadFrame, p: Point2) -> [[f64; 2]; 2] {
        let (xi, eta) = frame.xi_eta(p);
        let (hxx, hxe, hee) = self.hess_xi_eta(xi, eta);
        let ji = frame.jacobian_inv();
        let mut out = [[0.0; 2]; 2];
        let h = [[hxx, hxe], [hxe, hee]];
        for a in 0..2 {
            for b in 0..2 {
                let mut v = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        v += ji[i][a] * h[i][j] * ji[j][b];
                    }
                }
                out[a][b] = v;
            }
        }
        out
    }
}

/// Frobenius inner product of two 2x2 matrices.
pub fn frobenius(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn xi_evaluates_to_one_at_m3() {
        let f = unit_square();
        let m3 = f.vertices[2].midpoint(f.vertices[3]);
        let xi = PolyXiEta::monomial(1);
        assert_relative_eq!(xi.eval(&f, m3), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hessian_of_xi2_minus_eta2_on_unit_square() {
        // on the unit square, xi = 2x - 1 and eta = 2y - 1
        let f = unit_square();
        let mut p = PolyXiEta::monomial(3);
        p.axpy(-1.0, &PolyXiEta::monomial(5));
        let h = p.hess(&f, Point2::new(0.3, 0.7));
        assert_relative_eq!(h[0][0], 8.0, epsilon = 1e-13);
        assert_relative_eq!(h[1][1], -8.0, epsilon = 1e-13);
        assert_relative_eq!(h[0][1], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let f = QuadFrame::build([
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.5, 2.0),
            Point2::new(-0.2, 1.5),
        ])
        .unwrap();
        let mut p = PolyXiEta::quadratic([0.3, -1.1, 0.7, 0.4, -0.9, 0.2]);
        p.axpy(0.5, &PolyXiEta::monomial(6));
        p.axpy(-0.25, &PolyXiEta::monomial(7));
        let h = 1e-5;
        for &(x, y) in &[(0.5, 0.5), (1.2, 0.9), (0.1, 1.0), (1.9, 1.1)] {
            let q = Point2::new(x, y);
            let g = p.grad(&f, q);
            let fd_x =
                (p.eval(&f, Point2::new(x + h, y)) - p.eval(&f, Point2::new(x - h, y))) / (2.0 * h);
            let fd_y =
                (p.eval(&f, Point2::new(x, y + h)) - p.eval(&f, Point2::new(x, y - h))) / (2.0 * h);
            assert_relative_eq!(g.x, fd_x, epsilon = 1e-7, max_relative = 1e-7);
            assert_relative_eq!(g.y, fd_y, epsilon = 1e-7, max_relative = 1e-7);
        }
    }

    #[test]
    fn physical_hessian_is_symmetric() {
        let f = QuadFrame::build([
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.5, 2.0),
            Point2::new(-0.2, 1.5),
        ])
        .unwrap();
        let p = PolyXiEta::quadratic([0.0, 0.0, 0.0, 1.0, 2.0, -0.5]);
        let h = p.hess(&f, f.center);
        assert_relative_eq!(h[0][1], h[1][0], epsilon = 1e-14);
    }
}
