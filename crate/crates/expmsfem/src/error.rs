//! Crate-wide error type. Every fallible operation reports which geometric
//! object (patch, edge, element) it was working on when it failed.

use thiserror::Error;

/// Errors produced by mesh construction, assembly and the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Mesh sizes outside the supported range.
    #[error("invalid mesh sizes: nc={nc}, refine={refine} (both must be >= 2)")]
    InvalidMeshSizes { nc: usize, refine: usize },

    /// Edge id that does not exist on the mesh.
    #[error("edge index {index} out of range (mesh has {count} coarse edges)")]
    EdgeOutOfRange { index: usize, count: usize },

    /// Operation that needs an interior edge got a boundary edge.
    #[error("edge {index} lies on the domain boundary and has no oversampling domain")]
    BoundaryEdge { index: usize },

    /// A scenario parameter failed validation.
    #[error("invalid scenario parameter: {0}")]
    InvalidScenario(String),

    /// Real pipeline fed a complex problem or vice versa.
    #[error("scalar kind mismatch: {0}")]
    ScalarKindMismatch(String),

    /// Problem and mesh disagree about the boundary layout.
    #[error("boundary layout mismatch: problem expects {expected:?}, mesh has {got:?}")]
    LayoutMismatch {
        expected: crate::mesh::BcLayout,
        got: crate::mesh::BcLayout,
    },

    /// LDLT hit a zero or negative pivot on a matrix that must be positive
    /// definite (an ellipticity failure when it comes from a patch problem).
    #[error("indefinite matrix: pivot {value:.3e} at index {index}{}", context_suffix(context))]
    IndefinitePivot {
        index: usize,
        value: f64,
        context: String,
    },

    /// LU found no usable pivot; the matrix is singular to working precision.
    #[error("singular matrix at elimination step {index}{}", context_suffix(context))]
    SingularMatrix { index: usize, context: String },

    /// A patch operator is not invertible enough to trust local solves.
    #[error("patch {patch} not elliptic (sigma_min {sigma_min:.3e} below {threshold:.3e}); reduce H")]
    PatchNotElliptic {
        patch: String,
        sigma_min: f64,
        threshold: f64,
    },

    /// Direct solve produced a residual above the accuracy contract even
    /// after iterative refinement.
    #[error("solve residual {residual:.3e} exceeds bound {bound:.3e}{}", context_suffix(context))]
    ResidualTooLarge {
        residual: f64,
        bound: f64,
        context: String,
    },

    /// Conjugate-gradient fallback ran out of iterations.
    #[error("cg did not converge within {max_iter} iterations (residual {residual:.3e})")]
    CgDidNotConverge { max_iter: usize, residual: f64 },

    /// Gram matrix is not Hermitian positive definite after regularization.
    #[error("gram matrix breakdown: {0}")]
    GramBreakdown(String),

    /// More singular pairs requested than the edge image space holds.
    #[error("edge {edge}: requested {m} singular pairs but the image space has dimension {dim}")]
    TooManyPairs { edge: usize, m: usize, dim: usize },

    /// Too few singular values to fit a decay law.
    #[error("decay fit needs at least {needed} values above the truncation floor, got {got}")]
    TooFewValues { needed: usize, got: usize },

    /// Relative errors against a zero reference are undefined.
    #[error("reference solution has zero {norm} norm; relative errors are undefined")]
    ZeroReference { norm: &'static str },

    /// Dimension mismatch between containers handed across module borders.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

fn context_suffix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
