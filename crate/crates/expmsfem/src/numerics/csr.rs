//! Compressed sparse row matrices. Kept deliberately small: the pipeline
//! needs assembly from triplets, matvecs, sesquilinear forms and bandwidth
//! queries, nothing more.

use crate::scalar::Scalar;

/// Sparse matrix in CSR form. Column indices are strictly increasing inside
/// each row; duplicate triplets are summed during construction.
#[derive(Debug, Clone)]
pub struct CsrMatrix<F> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<F>,
}

impl<F: Scalar> CsrMatrix<F> {
    /// Build from unordered `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, F)]) -> Self {
        let mut order: Vec<u32> = (0..triplets.len() as u32).collect();
        order.sort_unstable_by_key(|&t| {
            let (i, j, _) = triplets[t as usize];
            debug_assert!(i < nrows && j < ncols);
            (i as u64) * (ncols as u64) + j as u64
        });

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<F> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &t in &order {
            let (i, j, v) = triplets[t as usize];
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[i + 1] += 1;
                col_idx.push(j);
                vals.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entry accessor; zero when the position is not stored.
    pub fn get(&self, i: usize, j: usize) -> F {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(p) => self.vals[lo + p],
            Err(_) => F::zero(),
        }
    }

    /// Row view as (columns, values).
    pub fn row(&self, i: usize) -> (&[usize], &[F]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    pub fn matvec_into(&self, x: &[F], y: &mut [F]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let mut acc = F::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.col_idx[p]];
            }
            y[i] = acc;
        }
    }

    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        let mut y = vec![F::zero(); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// Sesquilinear form `conj(v)^T M u` (test function first argument
    /// conjugated, matching the solver's convention).
    pub fn sesq(&self, v: &[F], u: &[F]) -> F {
        debug_assert_eq!(v.len(), self.nrows);
        debug_assert_eq!(u.len(), self.ncols);
        let mut acc = F::zero();
        for i in 0..self.nrows {
            let mut row = F::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.vals[p] * u[self.col_idx[p]];
            }
            acc += v[i].conjugate() * row;
        }
        acc
    }

    /// Maximum absolute row sum (infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| {
                self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .map(|v| v.modulus())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0usize;
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                bw = bw.max(i.abs_diff(j));
            }
        }
        bw
    }

    /// Extract the square submatrix on `keep` (indices strictly increasing),
    /// relabeling rows and columns by position in `keep`.
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix<F> {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        let mut inv = vec![usize::MAX; self.ncols];
        for (r, &g) in keep.iter().enumerate() {
            inv[g] = r;
        }
        let mut row_ptr = vec![0usize; keep.len() + 1];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for (r, &g) in keep.iter().enumerate() {
            for p in self.row_ptr[g]..self.row_ptr[g + 1] {
                let c = inv[self.col_idx[p]];
                if c != usize::MAX {
                    col_idx.push(c);
                    vals.push(self.vals[p]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        CsrMatrix {
            nrows: keep.len(),
            ncols: keep.len(),
            row_ptr,
            col_idx,
            vals,
        }
    }
}

/// Real part of the sesquilinear form of a real matrix with (possibly
/// complex) vectors: `Re(conj(w)^T M w)`. For Hermitian real `M` this is the
/// exact value of the form.
pub fn real_quad_form<F: Scalar>(m: &CsrMatrix<f64>, w: &[F]) -> f64 {
    debug_assert_eq!(w.len(), m.ncols);
    let mut acc = 0.0;
    for i in 0..m.nrows {
        let mut row = F::zero();
        for p in m.row_ptr[i]..m.row_ptr[i + 1] {
            row += F::from_re(m.vals[p]) * w[m.col_idx[p]];
        }
        acc += (w[i].conjugate() * row).real();
    }
    acc
}

/// Product of a real matrix with a (possibly complex) vector.
pub fn matvec_real<F: Scalar>(m: &CsrMatrix<f64>, v: &[F]) -> Vec<F> {
    debug_assert_eq!(v.len(), m.ncols);
    (0..m.nrows)
        .map(|i| {
            let mut row = F::zero();
            for p in m.row_ptr[i]..m.row_ptr[i + 1] {
                row += F::from_re(m.vals[p]) * v[m.col_idx[p]];
            }
            row
        })
        .collect()
}
