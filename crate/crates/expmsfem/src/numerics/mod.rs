//! Shared linear algebra: CSR storage, banded direct factorizations, a CG
//! fallback and dense generalized eigensolvers.
//!
//! All systems produced by the assembly live on lexicographically ordered
//! rectangular grids, so direct factorizations use band storage. Solves are
//! guarded by an explicit residual contract
//! `‖A x - b‖_2 <= rtol (‖A‖_inf ‖x‖_2 + ‖b‖_2)` with `rtol = 1e-10`; one
//! step of iterative refinement is attempted before reporting failure.

mod band;
mod cg;
mod csr;
mod eig;
mod fit;

pub use band::{BandedLdlt, BandedLu};
pub use cg::cg_solve;
pub use csr::{matvec_real, real_quad_form, CsrMatrix};
pub use eig::{
    generalized_hermitian_eig, DenseGram, GeneralizedEigPairs, GRAM_REGULARIZATION, HERMITIAN_TOL,
};
pub use fit::{line_fit, LineFit};

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{norm2, Scalar};

/// Relative residual tolerance of the direct-solve contract.
pub const RESIDUAL_RTOL: f64 = 1e-10;

/// Power-iteration sweeps used for smallest-singular-value estimates.
pub const SIGMA_MIN_ITERS: usize = 12;

/// A symmetric (real) or complex-symmetric sparse system restricted to its
/// free degrees of freedom. Constrained DOFs are eliminated: the matrix has
/// no rows or columns for them, and `free_to_full` maps back to the grid.
#[derive(Debug, Clone)]
pub struct SparseSystem<F> {
    csr: Arc<CsrMatrix<F>>,
    free_to_full: Arc<Vec<usize>>,
    full_dim: usize,
}

impl<F: Scalar> SparseSystem<F> {
    pub fn new(csr: CsrMatrix<F>, free_to_full: Vec<usize>, full_dim: usize) -> Result<Self> {
        if csr.nrows() != csr.ncols() || csr.nrows() != free_to_full.len() {
            return Err(Error::DimensionMismatch(format!(
                "sparse system: matrix {}x{}, {} free DOFs",
                csr.nrows(),
                csr.ncols(),
                free_to_full.len()
            )));
        }
        if free_to_full.iter().any(|&g| g >= full_dim) {
            return Err(Error::DimensionMismatch(
                "free DOF map exceeds full dimension".into(),
            ));
        }
        Ok(SparseSystem {
            csr: Arc::new(csr),
            free_to_full: Arc::new(free_to_full),
            full_dim,
        })
    }

    /// System with no constrained DOFs (mainly for tests and coarse solves).
    pub fn unconstrained(csr: CsrMatrix<F>) -> Self {
        let n = csr.nrows();
        SparseSystem {
            csr: Arc::new(csr),
            free_to_full: Arc::new((0..n).collect()),
            full_dim: n,
        }
    }

    pub fn nfree(&self) -> usize {
        self.csr.nrows()
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn matrix(&self) -> &CsrMatrix<F> {
        &self.csr
    }

    pub fn free_to_full(&self) -> &[usize] {
        &self.free_to_full
    }

    /// Gather the free entries of a full-grid vector.
    pub fn restrict(&self, full: &[F]) -> Vec<F> {
        debug_assert_eq!(full.len(), self.full_dim);
        self.free_to_full.iter().map(|&g| full[g]).collect()
    }

    /// Scatter free values into a full-grid vector (other entries untouched).
    pub fn scatter_into(&self, free_vals: &[F], full: &mut [F]) {
        debug_assert_eq!(free_vals.len(), self.nfree());
        debug_assert_eq!(full.len(), self.full_dim);
        for (&g, &v) in self.free_to_full.iter().zip(free_vals) {
            full[g] = v;
        }
    }

    /// Factor with the default method: LDLT (with its positivity check) for
    /// real systems, banded LU with partial pivoting for complex ones.
    pub fn factor(&self, context: &str) -> Result<SparseFactor<F>> {
        let kind = if F::IS_COMPLEX {
            FactorKind::Lu(BandedLu::factor(&self.csr, context)?)
        } else {
            // Real path: factor the matrix as f64. The conversion is exact.
            let real = to_real(&self.csr);
            FactorKind::Ldlt(BandedLdlt::factor(&real, context)?)
        };
        Ok(SparseFactor {
            system: self.clone(),
            kind,
        })
    }

    /// Force the LU path (used to cross-check the LDLT route in tests).
    pub fn factor_lu(&self, context: &str) -> Result<SparseFactor<F>> {
        Ok(SparseFactor {
            system: self.clone(),
            kind: FactorKind::Lu(BandedLu::factor(&self.csr, context)?),
        })
    }
}

pub(crate) fn to_real<F: Scalar>(a: &CsrMatrix<F>) -> CsrMatrix<f64> {
    debug_assert!(!F::IS_COMPLEX);
    let mut t = Vec::with_capacity(a.nnz());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            t.push((i, j, v.real()));
        }
    }
    CsrMatrix::from_triplets(a.nrows(), a.ncols(), &t)
}

#[derive(Debug, Clone)]
enum FactorKind<F> {
    Ldlt(BandedLdlt),
    Lu(BandedLu<F>),
}

/// A factored [`SparseSystem`] with residual-checked solves.
#[derive(Debug, Clone)]
pub struct SparseFactor<F> {
    system: SparseSystem<F>,
    kind: FactorKind<F>,
}

impl<F: Scalar> SparseFactor<F> {
    pub fn system(&self) -> &SparseSystem<F> {
        &self.system
    }

    fn solve_raw(&self, b: &[F]) -> Vec<F> {
        match &self.kind {
            FactorKind::Ldlt(f) => {
                let mut xr: Vec<f64> = b.iter().map(|v| v.real()).collect();
                f.solve_in_place(&mut xr);
                xr.into_iter().map(F::from_re).collect()
            }
            FactorKind::Lu(f) => {
                let mut x = b.to_vec();
                f.solve_in_place(&mut x);
                x
            }
        }
    }

    /// Apply `A^{-H}` (for real symmetric systems this equals `A^{-1}`).
    fn solve_adjoint_raw(&self, b: &[F]) -> Vec<F> {
        match &self.kind {
            FactorKind::Ldlt(f) => {
                let mut xr: Vec<f64> = b.iter().map(|v| v.real()).collect();
                f.solve_in_place(&mut xr);
                xr.into_iter().map(F::from_re).collect()
            }
            FactorKind::Lu(f) => {
                // A is complex symmetric, so A^H = conj(A).
                let mut x = b.to_vec();
                f.solve_conj_in_place(&mut x);
                x
            }
        }
    }

    /// Solve `A x = b` under the residual contract, with one step of
    /// iterative refinement before giving up.
    pub fn solve(&self, b: &[F]) -> Result<Vec<F>> {
        let a = self.system.matrix();
        let norm_a = a.norm_inf();
        let norm_b = norm2(b);
        let mut x = self.solve_raw(b);
        let mut r = residual(a, &x, b);
        let mut bound = RESIDUAL_RTOL * (norm_a * norm2(&x) + norm_b);
        if norm2(&r) > bound {
            let dx = self.solve_raw(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += *di;
            }
            r = residual(a, &x, b);
            bound = RESIDUAL_RTOL * (norm_a * norm2(&x) + norm_b);
            let rn = norm2(&r);
            if rn > bound {
                return Err(Error::ResidualTooLarge {
                    residual: rn,
                    bound,
                    context: "after one refinement step".into(),
                });
            }
        }
        Ok(x)
    }

    /// Column-by-column multi-RHS solve.
    pub fn solve_many(&self, rhs: &DMatrix<F>) -> Result<DMatrix<F>> {
        let mut out = DMatrix::<F>::zeros(rhs.nrows(), rhs.ncols());
        let mut col = vec![F::zero(); rhs.nrows()];
        for j in 0..rhs.ncols() {
            for i in 0..rhs.nrows() {
                col[i] = rhs[(i, j)];
            }
            let x = self.solve(&col)?;
            for i in 0..rhs.nrows() {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }

    /// Smallest pivot when the factorization was LDLT.
    pub fn min_pivot(&self) -> Option<f64> {
        match &self.kind {
            FactorKind::Ldlt(f) => Some(f.min_pivot()),
            FactorKind::Lu(_) => None,
        }
    }

    /// Estimate the smallest singular value by inverse power iteration on
    /// `(A^H A)^{-1}`, reusing the factorization. Deterministic start vector.
    pub fn sigma_min_estimate(&self, iters: usize) -> f64 {
        let n = self.system.nfree();
        if n == 0 {
            return f64::INFINITY;
        }
        let mut v: Vec<F> = (0..n)
            .map(|i| F::from_re(1.0 + 0.3 * ((i + 1) as f64).sin()))
            .collect();
        let s = 1.0 / norm2(&v);
        v.iter_mut().for_each(|x| *x *= F::from_re(s));
        let mut rho = 0.0f64;
        for _ in 0..iters.max(1) {
            let w = self.solve_adjoint_raw(&v);
            let mut z = self.solve_raw(&w);
            rho = norm2(&z);
            if !rho.is_finite() || rho == 0.0 {
                return 0.0;
            }
            let s = 1.0 / rho;
            z.iter_mut().for_each(|x| *x *= F::from_re(s));
            v = z;
        }
        // rho approximates the top eigenvalue of (A^H A)^{-1} = sigma_min^{-2}.
        1.0 / rho.sqrt()
    }
}

fn residual<F: Scalar>(a: &CsrMatrix<F>, x: &[F], b: &[F]) -> Vec<F> {
    let ax = a.matvec(x);
    ax.iter().zip(b).map(|(&axi, &bi)| bi - axi).collect()
}
