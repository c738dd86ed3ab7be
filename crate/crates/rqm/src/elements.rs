//! DOF functionals and numerically constructed shape-function bases for the
//! QGB, QW, and QM elements, plus the per-cell Morley compatibility
//! relations of the reduced quadrilateral Morley space.
//!
//! Local spaces on a cell Q, in the (xi, eta) frame:
//!
//! * QGB (generalized bilinear): P1 + span{xi^2 - eta^2}, DOFs = the four
//!   edge averages.
//! * QW (quadrilateral Wilson): P2, DOFs = four vertex values plus the cell
//!   integrals of d_xixi and d_etaeta.
//! * QM (quadrilateral Morley): P2 + span{xi^3, eta^3}, DOFs = four vertex
//!   values plus the four edge averages of the outward normal derivative.
//!
//! Shape functions are constructed per frame by inverting the functional
//! matrix d_i(m_j) rather than by transcribing published closed forms: the
//! duality relations d_i(phi_j) = delta_ij are the ground truth, and the
//! closed forms below (kept for cross-checking) fail them in places (the
//! QGB phi_1 eta-coefficient, the QW moment normalization).

use crate::error::{Error, Result};
use crate::geometry::{Point2, QuadFrame};
use crate::poly::{Degree, PolyXiEta};
use crate::quadrature::{edge_average, integrate_cell, EDGE_POINTS};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Which second-moment integral a cell DOF takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentAxis {
    XiXi,
    EtaEta,
}

/// A linear functional on polynomials over one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofKind {
    /// Value at vertex a_{i+1}.
    VertexEval(usize),
    /// Average over edge e_{i+1}.
    EdgeAvg(usize),
    /// Average of the outward normal derivative over edge e_{i+1}.
    EdgeNormalDerivAvg(usize),
    /// Average over the cell.
    CellAvg,
    /// Integral over the cell of a chart second derivative.
    CellMoment(MomentAxis),
}

/// Quadrature degree for cell functionals (exact for cubics with margin).
const CELL_FUNCTIONAL_DEGREE: usize = 4;

/// Applies a DOF functional to a polynomial on the given frame. Vertex
/// evaluations are exact; edge and cell functionals use quadrature exact for
/// every monomial degree in scope.
pub fn apply_dof(frame: &QuadFrame, dof: DofKind, poly: &PolyXiEta) -> f64 {
    match dof {
        DofKind::VertexEval(i) => {
            let (xi, eta) = frame.vertex_xi_eta(i);
            poly.eval_xi_eta(xi, eta)
        }
        DofKind::EdgeAvg(i) => {
            let (p0, p1) = frame.edge(i);
            edge_average(p0, p1, EDGE_POINTS, |p| poly.eval(frame, p))
                .expect("edge rule available")
        }
        DofKind::EdgeNormalDerivAvg(i) => {
            let (p0, p1) = frame.edge(i);
            let n = frame.edge_outward_normal(i);
            edge_average(p0, p1, EDGE_POINTS, |p| poly.grad(frame, p).dot(n))
                .expect("edge rule available")
        }
        DofKind::CellAvg => {
            integrate_cell(frame, CELL_FUNCTIONAL_DEGREE, |p| poly.eval(frame, p))
                .expect("cell rule available")
                / frame.area()
        }
        DofKind::CellMoment(axis) => integrate_cell(frame, CELL_FUNCTIONAL_DEGREE, |p| {
            let (xi, eta) = frame.xi_eta(p);
            let (hxx, _, hee) = poly.hess_xi_eta(xi, eta);
            match axis {
                MomentAxis::XiXi => hxx,
                MomentAxis::EtaEta => hee,
            }
        })
        .expect("cell rule available"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    Qgb,
    Qw,
    Qm,
}

/// An element definition: monomial basis plus DOF functionals.
#[derive(Clone, Debug)]
pub struct ElementDef {
    pub kind: ElementKind,
    pub monomials: Vec<PolyXiEta>,
    pub dofs: Vec<DofKind>,
}

impl ElementDef {
    pub fn new(kind: ElementKind) -> Self {
        let (monomials, dofs) = match kind {
            ElementKind::Qgb => {
                let mut diff = PolyXiEta::monomial(3);
                diff.axpy(-1.0, &PolyXiEta::monomial(5));
                (
                    vec![
                        PolyXiEta::monomial(0),
                        PolyXiEta::monomial(1),
                        PolyXiEta::monomial(2),
                        diff,
                    ],
                    (0..4).map(DofKind::EdgeAvg).collect(),
                )
            }
            ElementKind::Qw => (
                (0..6).map(PolyXiEta::monomial).collect(),
                (0..4)
                    .map(DofKind::VertexEval)
                    .chain([
                        DofKind::CellMoment(MomentAxis::XiXi),
                        DofKind::CellMoment(MomentAxis::EtaEta),
                    ])
                    .collect(),
            ),
            ElementKind::Qm => (
                (0..8).map(PolyXiEta::monomial).collect(),
                (0..4)
                    .map(DofKind::VertexEval)
                    .chain((0..4).map(DofKind::EdgeNormalDerivAvg))
                    .collect(),
            ),
        };
        Self {
            kind,
            monomials,
            dofs,
        }
    }

    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    /// M[i][j] = d_i(monomial_j).
    pub fn functional_matrix(&self, frame: &QuadFrame) -> DMatrix<f64> {
        DMatrix::from_fn(self.dofs.len(), self.monomials.len(), |i, j| {
            apply_dof(frame, self.dofs[i], &self.monomials[j])
        })
    }

    /// Shape functions phi_j with d_i(phi_j) = delta_ij, built by solving
    /// M C = I (one refinement sweep keeps the residual near machine
    /// precision on distorted cells).
    pub fn dual_basis(&self, frame: &QuadFrame) -> Result<Vec<PolyXiEta>> {
        let m = self.functional_matrix(frame);
        let svd = m.clone().svd(false, false);
        let (mut smax, mut smin) = (0.0_f64, f64::INFINITY);
        for &s in svd.singular_values.iter() {
            smax = smax.max(s);
            smin = smin.min(s);
        }
        let cond = smax / smin;
        if !cond.is_finite() || cond > 1e12 {
            return Err(Error::SingularElement(cond));
        }
        let lu = m.clone().lu();
        let n = self.dim();
        let eye = DMatrix::<f64>::identity(n, n);
        let mut c = lu.solve(&eye).ok_or(Error::SingularElement(cond))?;
        let residual = &eye - &m * &c;
        if let Some(corr) = lu.solve(&residual) {
            c += corr;
        }
        let degree = match self.kind {
            ElementKind::Qgb | ElementKind::Qw => Degree::Quadratic,
            ElementKind::Qm => Degree::QuadraticPlusCubicDiag,
        };
        Ok((0..n)
            .map(|j| {
                let mut p = PolyXiEta::zero(degree);
                for k in 0..n {
                    p.axpy(c[(k, j)], &self.monomials[k]);
                }
                p
            })
            .collect())
    }

    /// max_ij |d_i(phi_j) - delta_ij| with the functionals re-applied by
    /// quadrature.
    pub fn unisolvence_residual(&self, frame: &QuadFrame) -> Result<f64> {
        let basis = self.dual_basis(frame)?;
        let mut worst = 0.0_f64;
        for (i, &dof) in self.dofs.iter().enumerate() {
            for (j, phi) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((apply_dof(frame, dof, phi) - want).abs());
            }
        }
        Ok(worst)
    }
}

/// (d1 + d3) - (d2 + d4) for QGB edge averages; zero exactly when the QGB
/// interpolant of those averages lies in P1. The interpolant's
/// xi^2 - eta^2 coefficient is 3/8 of this value.
pub fn qgb_membership_defect(dofs: [f64; 4]) -> f64 {
    (dofs[0] + dofs[2]) - (dofs[1] + dofs[3])
}

/// The unique element of P1 + span{xi^2 - eta^2} with the given edge
/// averages.
pub fn qgb_interpolate(frame: &QuadFrame, edge_averages: [f64; 4]) -> PolyXiEta {
    let el = ElementDef::new(ElementKind::Qgb);
    let m = el.functional_matrix(frame);
    let d = DVector::from_column_slice(&edge_averages);
    let c = m
        .lu()
        .solve(&d)
        .expect("QGB functional matrix is nonsingular on valid frames");
    let mut p = PolyXiEta::zero(Degree::Quadratic);
    for k in 0..4 {
        p.axpy(c[k], &el.monomials[k]);
    }
    p
}

/// Morley DOF order on a cell: four vertex values, then four edge averages
/// of the outward normal derivative.
pub const MORLEY_DOFS: usize = 8;

/// The 8x6 matrix of Morley functionals applied to the P2 monomials.
pub fn morley_functional_matrix(frame: &QuadFrame) -> DMatrix<f64> {
    let dofs: Vec<DofKind> = (0..4)
        .map(DofKind::VertexEval)
        .chain((0..4).map(DofKind::EdgeNormalDerivAvg))
        .collect();
    DMatrix::from_fn(MORLEY_DOFS, 6, |i, j| {
        apply_dof(frame, dofs[i], &PolyXiEta::monomial(j))
    })
}

/// Orthonormal basis of the left nullspace of the Morley functional matrix
/// on P2. A Morley DOF vector is realizable by a quadratic exactly when both
/// rows annihilate it.
pub fn compat_relations(frame: &QuadFrame) -> Result<[[f64; MORLEY_DOFS]; 2]> {
    let f = morley_functional_matrix(frame);
    // pad to square so the SVD returns the complete left basis
    let mut padded = DMatrix::<f64>::zeros(MORLEY_DOFS, MORLEY_DOFS);
    padded.view_mut((0, 0), (MORLEY_DOFS, 6)).copy_from(&f);
    let svd = padded.svd(true, false);
    let u = svd.u.as_ref().expect("u requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let mut order: Vec<usize> = (0..MORLEY_DOFS).collect();
    order.sort_by(|&a, &b| sv[a].partial_cmp(&sv[b]).unwrap());
    let rank = sv.iter().filter(|&&s| s > 1e-9 * smax).count();
    if rank < 6 {
        return Err(Error::RankDefect { rank });
    }
    let mut rows = [[0.0; MORLEY_DOFS]; 2];
    for (k, &col) in order[..2].iter().enumerate() {
        for i in 0..MORLEY_DOFS {
            rows[k][i] = u[(i, col)];
        }
    }
    // re-orthonormalize defensively
    let n0: f64 = rows[0].iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in rows[0].iter_mut() {
        *v /= n0;
    }
    let dot: f64 = rows[0].iter().zip(&rows[1]).map(|(a, b)| a * b).sum();
    for i in 0..MORLEY_DOFS {
        rows[1][i] -= dot * rows[0][i];
    }
    let n1: f64 = rows[1].iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in rows[1].iter_mut() {
        *v /= n1;
    }
    Ok(rows)
}

/// Residual of the compatibility relations applied to a Morley DOF vector.
pub fn compat_residual(relations: &[[f64; MORLEY_DOFS]; 2], dofs: &[f64; MORLEY_DOFS]) -> f64 {
    relations
        .iter()
        .map(|row| {
            row.iter()
                .zip(dofs)
                .map(|(r, d)| r * d)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// The unique quadratic matching all eight Morley DOFs, by least squares on
/// the 8x6 functional matrix. Returns the polynomial and the achieved
/// residual; errors when the DOFs violate the compatibility relations
/// beyond `tol`.
pub fn reconstruct_p2(
    frame: &QuadFrame,
    morley_dofs: &[f64; MORLEY_DOFS],
    tol: f64,
) -> Result<(PolyXiEta, f64)> {
    let f = morley_functional_matrix(frame);
    let d = DVector::from_column_slice(morley_dofs);
    let svd = f.clone().svd(true, true);
    let c = svd
        .solve(&d, 1e-12)
        .map_err(|_| Error::RankDefect { rank: 0 })?;
    let residual = (&f * &c - &d).norm();
    if residual > tol {
        return Err(Error::Incompatible { residual, tol });
    }
    let mut coeffs = [0.0; 6];
    for k in 0..6 {
        coeffs[k] = c[k];
    }
    Ok((PolyXiEta::quadratic(coeffs), residual))
}

/// Published closed-form QGB shape functions, kept only as a cross-check of
/// the numeric dual basis. The eta-coefficient of phi_1 fails
/// d_4(phi_1) = 0 already at alpha = beta = 0 (a typo in the source); the
/// numeric construction is authoritative.
pub fn qgb_reference_forms(frame: &QuadFrame) -> [PolyXiEta; 4] {
    let (a, b) = (frame.alpha, frame.beta);
    let form = |diff: f64, xi: f64, eta: f64, one: f64| {
        let mut p = PolyXiEta::zero(Degree::Quadratic);
        p.coeffs[0] = one;
        p.coeffs[1] = xi;
        p.coeffs[2] = eta;
        p.coeffs[3] = diff;
        p.coeffs[5] = -diff;
        p
    };
    [
        form(
            3.0 / 8.0,
            (b - 2.0) / 4.0,
            (a - 4.0) / 4.0,
            (2.0 - a * a + b * b) / 8.0,
        ),
        form(
            -3.0 / 8.0,
            -b / 4.0,
            (2.0 - a) / 4.0,
            (a * a - b * b + 2.0) / 8.0,
        ),
        form(
            3.0 / 8.0,
            (b + 2.0) / 4.0,
            (a + 4.0) / 4.0,
            (2.0 - a * a + b * b) / 8.0,
        ),
        form(
            -3.0 / 8.0,
            -b / 4.0,
            -(2.0 + a) / 4.0,
            (a * a - b * b + 2.0) / 8.0,
        ),
    ]
}

/// Published closed-form QW shape functions (same caveat as
/// [`qgb_reference_forms`]; the moment duals in particular normalize the
/// cell integrals differently than d_5, d_6 here).
pub fn qw_reference_forms(frame: &QuadFrame) -> [PolyXiEta; 6] {
    let (a, b) = (frame.alpha, frame.beta);
    // phi4 = -1/(8(b+1)) [-(xi+eta+1)^2 + (a+b-1)^2]
    let mut phi4 = PolyXiEta::quadratic([1.0, 2.0, 2.0, 1.0, 2.0, 1.0]); // (xi+eta+1)^2
    let mut p4 = PolyXiEta::zero(Degree::Quadratic);
    p4.axpy(1.0 / (8.0 * (b + 1.0)), &phi4);
    p4.coeffs[0] -= (a + b - 1.0) * (a + b - 1.0) / (8.0 * (b + 1.0));
    phi4 = p4;
    // phi3 = ((xi+1)^2 - a^2)/(4(1-a)) - (1+a)/(1-a) phi4
    let mut phi3 = PolyXiEta::quadratic([
        (1.0 - a * a) / (4.0 * (1.0 - a)),
        2.0 / (4.0 * (1.0 - a)),
        0.0,
        1.0 / (4.0 * (1.0 - a)),
        0.0,
        0.0,
    ]);
    phi3.axpy(-(1.0 + a) / (1.0 - a), &phi4);
    // phi2 = (eta - (1-b))/(2(b-1)) - phi3/(1-b) - b/(b-1) phi4
    let mut phi2 = PolyXiEta::quadratic([
        -(1.0 - b) / (2.0 * (b - 1.0)),
        0.0,
        1.0 / (2.0 * (b - 1.0)),
        0.0,
        0.0,
        0.0,
    ]);
    phi2.axpy(-1.0 / (1.0 - b), &phi3);
    phi2.axpy(-b / (b - 1.0), &phi4);
    // phi1 = 1 - phi2 - phi3 - phi4
    let mut phi1 = PolyXiEta::quadratic([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    phi1.axpy(-1.0, &phi2);
    phi1.axpy(-1.0, &phi3);
    phi1.axpy(-1.0, &phi4);
    let phi5 = PolyXiEta::quadratic([
        (a + b - 1.0) * (1.0 - a * a),
        2.0 * a,
        0.0,
        a - b + 1.0,
        2.0 * a,
        0.0,
    ]);
    let phi6 = PolyXiEta::quadratic([b * b - a * a, 2.0 * b, -2.0 * a, 1.0, 0.0, -1.0]);
    [phi1, phi2, phi3, phi4, phi5, phi6]
}

/// Samples a random convex frame with |alpha| + |beta| <= max_distortion and
/// shape regularity at most max_regularity.
pub fn random_frame<R: Rng>(rng: &mut R, max_distortion: f64, max_regularity: f64) -> QuadFrame {
    loop {
        let o = Point2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let phi = theta
            + rng.random_range(std::f64::consts::FRAC_PI_6..(std::f64::consts::PI - std::f64::consts::FRAC_PI_6));
        let lr = rng.random_range(0.3..1.5);
        let ls = rng.random_range(0.3..1.5);
        let r = Point2::new(lr * theta.cos(), lr * theta.sin());
        let s = Point2::new(ls * phi.cos(), ls * phi.sin());
        if r.cross(s) <= 0.0 {
            continue;
        }
        let t = rng.random_range(0.0..max_distortion);
        let u = rng.random_range(0.0..1.0);
        let alpha = t * u * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let beta = t * (1.0 - u) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let at = |xi: f64, eta: f64| o + r.scale(xi) + s.scale(eta);
        let verts = [
            at(-1.0 - alpha, 1.0 - beta),
            at(-1.0 + alpha, -1.0 + beta),
            at(1.0 - alpha, -1.0 - beta),
            at(1.0 + alpha, 1.0 + beta),
        ];
        if let Ok(frame) = QuadFrame::build(verts) {
            if frame.shape_regularity() <= max_regularity {
                return frame;
            }
        }
    }
}
