//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The four vertices do not bound a convex quadrilateral.
    #[error("cell is not convex: |alpha| + |beta| = {0:.6} >= 1 (or wrong orientation)")]
    NonConvex(f64),

    /// The cell is (numerically) collapsed.
    #[error("degenerate cell: normalized area {0:.3e} below tolerance")]
    Degenerate(f64),

    /// `table1_average` was asked for a function outside the closed-form table.
    #[error("no closed-form edge average for the requested function")]
    UnsupportedMonomial,

    /// No quadrature rule with the requested exactness degree.
    #[error("no quadrature rule of degree {0}")]
    UnsupportedDegree(usize),

    /// DOF functional matrix too ill-conditioned to invert.
    #[error("element functional matrix is numerically singular (cond ~ {0:.3e})")]
    SingularElement(f64),

    /// The Morley functional matrix on quadratics lost rank.
    #[error("Morley functional matrix has rank {rank} < 6")]
    RankDefect { rank: usize },

    /// Morley DOFs do not satisfy the cell compatibility relations.
    #[error("Morley DOFs incompatible with a quadratic: residual {residual:.3e} > tol {tol:.3e}")]
    Incompatible { residual: f64, tol: f64 },

    #[error("cell {0} is not an interior cell")]
    NotInteriorCell(usize),

    #[error("patch compatibility system has nullity {0}, expected 1")]
    UnexpectedNullity(usize),

    #[error("sparse factorization failed: {0}")]
    FactorizationFailed(String),

    #[error("constraint residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ConstraintResidualTooLarge { residual: f64, tol: f64 },

    #[error("reduced Gram matrix is singular")]
    SingularGram,

    /// Violated F + X = E + 1; the mesh is not a simply-connected quad subdivision.
    #[error("Euler identity violated: {cells} cells + {vertices} vertices != {edges} edges + 1")]
    EulerViolation {
        cells: usize,
        vertices: usize,
        edges: usize,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("operation requires a rectangular (axis-aligned tensor) mesh")]
    NotRectangular,

    #[error("unknown manufactured case {0:?}")]
    UnknownCase(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
