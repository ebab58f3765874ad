//! Dense Hermitian generalized eigenproblems `A x = lambda B x` with `B`
//! positive semidefinite, solved by Cholesky reduction to standard form.
//! This is the workhorse behind the per-edge singular value problems.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative regularization added to `B` before its Cholesky factorization,
/// scaled by `trace(B)/n`. Keeps semidefinite Grams (constants in a floating
/// patch) factorable without perturbing the well-separated spectrum.
pub const GRAM_REGULARIZATION: f64 = 1e-12;

/// Relative tolerance for the Hermitian-ness check of a Gram matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense Gram matrix, validated to be Hermitian on construction and
/// symmetrized exactly so downstream factorizations see no skew part.
#[derive(Debug, Clone)]
pub struct DenseGram<F: Scalar> {
    mat: DMatrix<F>,
}

impl<F: Scalar> DenseGram<F> {
    /// Validate `‖M - M^H‖_max <= tol * (1 + ‖M‖_max)` and store `(M + M^H)/2`.
    pub fn new(mat: DMatrix<F>, context: &str) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::GramBreakdown(format!(
                "{context}: matrix is {}x{}, not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let n = mat.nrows();
        let mut scale = 0.0f64;
        let mut skew = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                scale = scale.max(mat[(i, j)].modulus());
                skew = skew.max((mat[(i, j)] - mat[(j, i)].conjugate()).modulus());
            }
        }
        if skew > HERMITIAN_TOL * (1.0 + scale) {
            return Err(Error::GramBreakdown(format!(
                "{context}: matrix is not Hermitian (skew {skew:.3e}, scale {scale:.3e})"
            )));
        }
        let half = F::from_re(0.5);
        let sym = DMatrix::from_fn(n, n, |i, j| (mat[(i, j)] + mat[(j, i)].conjugate()) * half);
        Ok(DenseGram { mat: sym })
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<F> {
        &self.mat
    }
}

/// Eigenpairs of `A x = lambda B x`, sorted by descending eigenvalue. The
/// vectors are B-orthonormal columns with a deterministic sign: the entry of
/// largest modulus in each column is real and positive.
#[derive(Debug, Clone)]
pub struct GeneralizedEigPairs<F: Scalar> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<F>,
}

/// Solve the Hermitian-definite generalized eigenproblem by reducing with
/// the Cholesky factor of `B + eps I`: with `B = L L^H`, the standard
/// problem is `(L^{-1} A L^{-H}) y = lambda y` and `x = L^{-H} y`.
pub fn generalized_hermitian_eig<F: Scalar>(
    a: &DenseGram<F>,
    b: &DenseGram<F>,
) -> Result<GeneralizedEigPairs<F>> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigenproblem pair: A is {n}x{n}, B is {}x{}",
            b.n(),
            b.n()
        )));
    }

    let trace = (0..n).map(|i| b.matrix()[(i, i)].real()).sum::<f64>();
    let eps = GRAM_REGULARIZATION * trace / n as f64;
    let mut breg = b.matrix().clone();
    for i in 0..n {
        breg[(i, i)] += F::from_re(eps);
    }
    let chol = breg
        .clone()
        .cholesky()
        .ok_or_else(|| Error::GramBreakdown("regularized B has no Cholesky factor".into()))?;
    let l = chol.l();

    // C = L^{-1} A L^{-H}, computed via two triangular solves.
    let y = l
        .solve_lower_triangular(a.matrix())
        .ok_or_else(|| Error::GramBreakdown("singular Cholesky factor".into()))?;
    let c_t = l
        .solve_lower_triangular(&y.adjoint())
        .ok_or_else(|| Error::GramBreakdown("singular Cholesky factor".into()))?;
    let mut c = c_t.adjoint();
    // Exact in real arithmetic; strip the roundoff skew part.
    let half = F::from_re(0.5);
    let c_adj = c.adjoint();
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = (c[(i, j)] + c_adj[(i, j)]) * half;
        }
    }

    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        eig.eigenvalues[q]
            .partial_cmp(&eig.eigenvalues[p])
            .expect("eigenvalues are finite")
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::<F>::zeros(n, n);
    for (rank, &p) in order.iter().enumerate() {
        values.push(eig.eigenvalues[p]);
        let y_col = eig.eigenvectors.column(p).into_owned();
        // x = L^{-H} y: solve L^H x = y.
        let x = l
            .adjoint()
            .solve_upper_triangular(&y_col)
            .ok_or_else(|| Error::GramBreakdown("singular Cholesky factor".into()))?;
        // Tighten B-orthonormality: normalize in the B_reg inner product.
        let bx = &breg * &x;
        let nrm = x.dotc(&bx).real().max(0.0).sqrt();
        let inv = if nrm > 0.0 { 1.0 / nrm } else { 0.0 };
        let mut x = x * F::from_re(inv);
        // Deterministic phase: largest-modulus entry becomes real positive.
        let mut best = 0usize;
        let mut best_mod = 0.0f64;
        for i in 0..n {
            let m = x[i].modulus();
            if m > best_mod {
                best_mod = m;
                best = i;
            }
        }
        if best_mod > 0.0 {
            let phase = x[best] * F::from_re(1.0 / best_mod);
            let rot = phase.conjugate();
            for i in 0..n {
                x[i] *= rot;
            }
        }
        vectors.set_column(rank, &x);
    }
    Ok(GeneralizedEigPairs { values, vectors })
}
