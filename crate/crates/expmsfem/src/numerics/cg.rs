//! Conjugate gradients, the fallback for real SPD systems too large for the
//! banded direct path.

use crate::error::{Error, Result};
use crate::numerics::csr::CsrMatrix;

/// Unpreconditioned CG with a relative residual stopping rule
/// `‖b - A x‖ <= tol ‖b‖`. Returns the solution and iteration count.
pub fn cg_solve(
    a: &CsrMatrix<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = a.nrows();
    debug_assert_eq!(b.len(), n);
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok((vec![0.0; n], 0));
    }

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr: f64 = r.iter().map(|v| v * v).sum();

    for it in 0..max_iter {
        if rr.sqrt() <= tol * norm_b {
            return Ok((x, it));
        }
        a.matvec_into(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(u, v)| u * v).sum();
        if pap <= 0.0 {
            return Err(Error::IndefinitePivot {
                index: it,
                value: pap,
                context: "cg search direction".into(),
            });
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    if rr.sqrt() <= tol * norm_b {
        return Ok((x, max_iter));
    }
    Err(Error::CgDidNotConverge {
        max_iter,
        residual: rr.sqrt() / norm_b,
    })
}
