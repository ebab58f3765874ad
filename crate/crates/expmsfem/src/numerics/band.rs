//! Banded direct factorizations. Every linear system in the pipeline lives
//! on a lexicographically ordered rectangular grid, so band storage with
//! bandwidth `grid width + 2` is the natural direct-solver format: LDLT for
//! real symmetric positive definite systems, LU with partial pivoting for
//! complex symmetric (possibly indefinite) ones.

use crate::error::{Error, Result};
use crate::numerics::csr::CsrMatrix;
use crate::scalar::Scalar;

/// LDLT factorization of a real symmetric banded matrix. Fails on the first
/// nonpositive pivot, which doubles as the ellipticity check for patch
/// operators: a coercive bilinear form must produce positive pivots.
#[derive(Debug, Clone)]
pub struct BandedLdlt {
    n: usize,
    bw: usize,
    /// Row i stores L[i][j] for j in [i-bw, i) and D[i] at slot `bw`,
    /// laid out as `data[i*(bw+1) + (j - i + bw)]`.
    data: Vec<f64>,
}

impl BandedLdlt {
    /// Factor the lower band of a symmetric matrix given in CSR form.
    /// `context` labels the originating operator in error messages.
    pub fn factor(a: &CsrMatrix<f64>, context: &str) -> Result<Self> {
        let n = a.nrows();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut data = vec![0.0f64; n * w];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    data[i * w + (j + bw - i)] = v;
                }
            }
        }

        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..i {
                let mut s = data[i * w + (j + bw - i)];
                for k in lo..j {
                    s -= data[i * w + (k + bw - i)]
                        * data[j * w + (k + bw - j)]
                        * data[k * w + bw];
                }
                data[i * w + (j + bw - i)] = s / data[j * w + bw];
            }
            let mut d = data[i * w + bw];
            for k in lo..i {
                let l = data[i * w + (k + bw - i)];
                d -= l * l * data[k * w + bw];
            }
            if !(d > 0.0) {
                return Err(Error::IndefinitePivot {
                    index: i,
                    value: d,
                    context: context.to_string(),
                });
            }
            data[i * w + bw] = d;
        }
        Ok(BandedLdlt { n, bw, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Smallest pivot of D; a cheap lower-bound proxy for conditioning.
    pub fn min_pivot(&self) -> f64 {
        let w = self.bw + 1;
        (0..self.n)
            .map(|i| self.data[i * w + self.bw])
            .fold(f64::INFINITY, f64::min)
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        // forward: L y = b (unit lower)
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = x[i];
            for k in lo..i {
                s -= self.data[i * w + (k + bw - i)] * x[k];
            }
            x[i] = s;
        }
        // diagonal
        for i in 0..n {
            x[i] /= self.data[i * w + bw];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let hi = (i + bw + 1).min(n);
            let mut s = x[i];
            for k in i + 1..hi {
                s -= self.data[k * w + (i + bw - k)] * x[k];
            }
            x[i] = s;
        }
    }
}

/// LU factorization with partial pivoting of a banded matrix, in the
/// classic band storage with `kl` extra rows for pivoting fill. Generic so
/// the complex-symmetric Helmholtz systems share code with real ones.
#[derive(Debug, Clone)]
pub struct BandedLu<F> {
    n: usize,
    kl: usize,
    ku: usize,
    /// `(2*kl + ku + 1) x n`, entry (i, j) at storage row `kl + ku + i - j`.
    ab: Vec<F>,
    ipiv: Vec<usize>,
}

impl<F: Scalar> BandedLu<F> {
    /// Factor a CSR matrix whose bandwidth sets `kl = ku`.
    pub fn factor(a: &CsrMatrix<F>, context: &str) -> Result<Self> {
        let n = a.nrows();
        let b = a.bandwidth();
        let (kl, ku) = (b, b);
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![F::zero(); ldab * n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                ab[(kv + i - j) * n + j] = v;
            }
        }

        let mut ipiv = vec![0usize; n];
        let scale = a.norm_inf();
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0usize;
            let mut best = ab[kv * n + j].modulus();
            for p in 1..=km {
                let m = ab[(kv + p) * n + j].modulus();
                if m > best {
                    best = m;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            // Relative test: a pivot this small next to the matrix scale
            // means the factorization cannot be trusted.
            if best <= scale * 1e-300 {
                return Err(Error::SingularMatrix {
                    index: j,
                    context: context.to_string(),
                });
            }
            let jcols = (j + kv).min(n - 1);
            if jp != 0 {
                for c in j..=jcols {
                    ab.swap((kv + j - c) * n + c, (kv + j + jp - c) * n + c);
                }
            }
            let piv = ab[kv * n + j];
            for p in 1..=km {
                let l = ab[(kv + p) * n + j] / piv;
                ab[(kv + p) * n + j] = l;
            }
            for c in j + 1..=jcols {
                let u = ab[(kv + j - c) * n + c];
                if u != F::zero() {
                    for p in 1..=km {
                        let l = ab[(kv + p) * n + j];
                        ab[(kv + j + p - c) * n + c] -= l * u;
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            ab,
            ipiv,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [F]) {
        debug_assert_eq!(x.len(), self.n);
        let (n, kl, kv) = (self.n, self.kl, self.kl + self.ku);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let xj = x[j];
            for q in 1..=km {
                let l = self.ab[(kv + q) * n + j];
                x[j + q] -= l * xj;
            }
        }
        for j in (0..n).rev() {
            let hi = (j + kv).min(n - 1);
            let mut s = x[j];
            for c in j + 1..=hi {
                s -= self.ab[(kv + j - c) * n + c] * x[c];
            }
            x[j] = s / self.ab[kv * n + j];
        }
    }

    /// Solve `conj(A) x = b` in place, reusing the factorization of `A`
    /// (conjugate every stored entry on the fly). Combined with
    /// [`Self::solve_in_place`] this applies `(A^H A)^{-1}` for singular
    /// value estimation of complex symmetric matrices, where `A^H = conj(A)`.
    pub fn solve_conj_in_place(&self, x: &mut [F]) {
        for v in x.iter_mut() {
            *v = v.conjugate();
        }
        self.solve_in_place(x);
        for v in x.iter_mut() {
            *v = v.conjugate();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    /// Second-difference matrix tridiag(-1, 2, -1); its inverse is known in
    /// closed form: (A^{-1})_{ij} = min(i+1, j+1) * (n - max(i, j)) / (n+1).
    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn ldlt_matches_closed_form_inverse() {
        let n = 5;
        let a = laplacian_1d(n);
        let f = BandedLdlt::factor(&a, "test").unwrap();
        // Solve against e_2: x_i = (A^{-1})_{i,2}
        let mut x = vec![0.0; n];
        x[2] = 1.0;
        f.solve_in_place(&mut x);
        for i in 0..n {
            let expect = ((i + 1).min(3) as f64) * ((n - i.max(2)) as f64) / (n as f64 + 1.0);
            assert_relative_eq!(x[i], expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn ldlt_rejects_indefinite_with_pivot_index() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        match BandedLdlt::factor(&a, "test") {
            Err(Error::IndefinitePivot { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected indefinite pivot, got {other:?}"),
        }
    }

    #[test]
    fn lu_solves_hand_checked_complex_system() {
        // [[i, 1], [1, i]] x = (1, 0)  =>  x = (-i/2, 1/2)
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, i), (0, 1, one), (1, 0, one), (1, 1, i)]);
        let f = BandedLu::factor(&a, "test").unwrap();
        let mut x = vec![one, Complex64::new(0.0, 0.0)];
        f.solve_in_place(&mut x);
        assert_relative_eq!(x[0].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(x[0].im, -0.5, epsilon = 1e-15);
        assert_relative_eq!(x[1].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(x[1].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lu_agrees_with_ldlt_on_spd_band() {
        let a = laplacian_1d(12);
        let ldlt = BandedLdlt::factor(&a, "test").unwrap();
        let lu = BandedLu::factor(&a, "test").unwrap();
        let b: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut x1 = b.clone();
        ldlt.solve_in_place(&mut x1);
        let mut x2 = b;
        lu.solve_in_place(&mut x2);
        for (u, v) in x1.iter().zip(&x2) {
            assert_relative_eq!(u, v, max_relative = 1e-12);
        }
    }

    #[test]
    fn lu_needs_pivoting_on_zero_diagonal() {
        // [[0, 1], [1, 0]]: fails without row exchanges.
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let f = BandedLu::factor(&a, "test").unwrap();
        let mut x = vec![3.0, 7.0];
        f.solve_in_place(&mut x);
        assert_relative_eq!(x[0], 7.0);
        assert_relative_eq!(x[1], 3.0);
    }

    #[test]
    fn lu_detects_singularity() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(
            BandedLu::factor(&a, "test"),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn lu_matches_dense_on_random_band() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 40usize;
        let bw = 3usize;
        let mut t = Vec::new();
        for i in 0..n {
            for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                let v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                t.push((i, j, v));
            }
        }
        // Push mass to the diagonal so the matrix is comfortably invertible.
        for i in 0..n {
            t.push((i, i, Complex64::new(4.0, 0.0)));
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let mut dense = nalgebra::DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                dense[(i, j)] = v;
            }
        }
        let b: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64).cos(), (i as f64 * 0.3).sin()))
            .collect();
        let f = BandedLu::factor(&a, "test").unwrap();
        let mut x = b.clone();
        f.solve_in_place(&mut x);
        let xd = dense
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&b))
            .unwrap();
        for i in 0..n {
            assert_relative_eq!(x[i].re, xd[i].re, epsilon = 1e-10);
            assert_relative_eq!(x[i].im, xd[i].im, epsilon = 1e-10);
        }
    }

    #[test]
    fn conjugate_solve_reuses_factorization() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, i), (0, 1, one), (1, 0, one), (1, 1, i)]);
        let f = BandedLu::factor(&a, "test").unwrap();
        // conj(A) x = (1, 0): conj(A) = [[-i, 1], [1, -i]], x = (i/2, 1/2).
        let mut x = vec![one, Complex64::new(0.0, 0.0)];
        f.solve_conj_in_place(&mut x);
        assert_relative_eq!(x[0].im, 0.5, epsilon = 1e-15);
        assert_relative_eq!(x[1].re, 0.5, epsilon = 1e-15);
    }
}
