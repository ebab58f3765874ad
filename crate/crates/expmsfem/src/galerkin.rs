//! The coarse multiscale space and its Galerkin solve.
//!
//! The offline space collects one multiscale nodal function per active
//! coarse node and the leading edge singular directions per active edge.
//! Everything here is independent of the source term, so one space serves
//! any number of right-hand sides: per solve, the online part (bubbles plus
//! oversampled edge corrections) is subtracted from the load, the small
//! coarse system is solved, and the fine-grid solution is reassembled as
//! coarse part plus online part.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{AssembledProblem, FineFunction, Source};
use crate::localops::{msfem_basis, online_part, ElementOps, LocalFn};
use crate::mesh::{CellRect, Orientation, TwoLevelMesh};
use crate::numerics::{SparseFactor, SparseSystem};
use crate::numerics::{CsrMatrix, RESIDUAL_RTOL};
use crate::scalar::Scalar;
use crate::spectral::{build_harmonic_space, edge_singular_basis, EdgeBasis};

/// Coarse systems up to this dimension are factored densely; larger ones go
/// through the banded sparse path under a bandwidth-reducing ordering.
pub const DENSE_COARSE_LIMIT: usize = 5000;

/// A basis function whose imaginary part is below this fraction of its norm
/// is treated as real; its conjugate would duplicate it and is not added.
const CONJ_IM_RTOL: f64 = 1e-10;

/// One degree of freedom of the coarse space, in the fixed global ordering:
/// all nodal functions first (by active-node rank), then the edge directions
/// grouped per active edge (by rank), singular index ascending, then any
/// conjugate copies in the order of their source functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseDof {
    /// Multiscale nodal function of the active coarse node with this rank.
    Node(usize),
    /// Singular direction `j` of the active edge with this rank.
    Edge(usize, usize),
    /// Complex conjugate of the degree of freedom at this base index.
    Conjugate(usize),
}

/// Knobs for assembling the offline space.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineOptions {
    /// Also span the complex conjugates of the basis functions. Conjugation
    /// commutes with the operator away from the absorbing boundary, so this
    /// roughly doubles the space near that boundary to capture both wave
    /// directions. Functions that are real up to roundoff are skipped; for
    /// real scalars the option is a no-op.
    pub conjugate_enrich: bool,
}

enum CoarseFactor<F: Scalar> {
    Dense(nalgebra::LU<F, Dyn, Dyn>),
    Banded(SparseFactor<F>),
}

/// Source-independent offline data: the synthesized coarse basis, the coarse
/// stiffness matrix `K[p][q] = a(phi_q, phi_p)` and its factorization.
pub struct OfflineSpace<F: Scalar> {
    ops: Arc<ElementOps<F>>,
    m: usize,
    node_fns: Vec<LocalFn<F>>,
    edge_bases: Vec<EdgeBasis<F>>,
    /// Conjugated basis functions, parallel to the trailing block of `dofs`.
    conj_fns: Vec<LocalFn<F>>,
    dofs: Vec<CoarseDof>,
    /// Coarse matrix rows, columns ascending.
    rows: Vec<Vec<(usize, F)>>,
    factor: CoarseFactor<F>,
}

/// Outcome of one solve: relative errors, space descriptors and the stage
/// timings a driver fills in.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub scenario: String,
    pub coarse_h: f64,
    pub fine_h: f64,
    pub m: usize,
    pub dim_s: usize,
    pub e_l2: f64,
    pub e_h: f64,
    pub t_offline_s: f64,
    pub t_online_s: f64,
    pub t_coarse_s: f64,
}

/// Values of a local function at every node of `rect` (which must be covered
/// by the function's support rectangle), row-major.
fn gather<F: Scalar>(f: &LocalFn<F>, rect: CellRect) -> Vec<F> {
    let mut out = Vec::with_capacity(rect.n_nodes());
    for iy in rect.y0..=rect.y1 {
        for ix in rect.x0..=rect.x1 {
            out.push(f.at(ix, iy));
        }
    }
    out
}

/// `sum conj(f) * full` over the function's support.
fn dot_against_full<F: Scalar>(f: &LocalFn<F>, full: &[F], mesh: &TwoLevelMesh) -> F {
    let rect = f.rect();
    let mut acc = F::zero();
    let mut local = 0;
    for iy in rect.y0..=rect.y1 {
        for ix in rect.x0..=rect.x1 {
            acc += f.values()[local].conjugate() * full[mesh.fine_node(ix, iy)];
            local += 1;
        }
    }
    acc
}

/// Build the offline space: multiscale nodal functions for every active
/// node, `m` singular directions for every active edge (fewer on edges whose
/// spectrum hits the numerical floor first), and the factored coarse matrix.
pub fn build_offline<F: Scalar>(
    prob: Arc<AssembledProblem<F>>,
    m: usize,
) -> Result<OfflineSpace<F>> {
    build_offline_with(prob, m, OfflineOptions::default())
}

/// [`build_offline`] with explicit options.
pub fn build_offline_with<F: Scalar>(
    prob: Arc<AssembledProblem<F>>,
    m: usize,
    opts: OfflineOptions,
) -> Result<OfflineSpace<F>> {
    let ops = Arc::new(ElementOps::new(prob.clone())?);
    let node_fns = msfem_basis(&ops)?;
    let mesh = prob.mesh().clone();
    let edge_bases: Vec<EdgeBasis<F>> = if m == 0 {
        Vec::new()
    } else {
        mesh.active_edges()
            .par_iter()
            .map(|&e| {
                let space = build_harmonic_space(&prob, e)?;
                edge_singular_basis(&ops, &space, m)
            })
            .collect::<Result<Vec<_>>>()?
    };

    let mut dofs: Vec<CoarseDof> = (0..node_fns.len()).map(CoarseDof::Node).collect();
    for (er, basis) in edge_bases.iter().enumerate() {
        for j in 0..basis.len() {
            dofs.push(CoarseDof::Edge(er, j));
        }
    }
    let base_dim = dofs.len();

    let base_fn = |d: CoarseDof| -> &LocalFn<F> {
        match d {
            CoarseDof::Node(r) => &node_fns[r],
            CoarseDof::Edge(er, j) => &edge_bases[er].vectors()[j],
            CoarseDof::Conjugate(_) => unreachable!("conjugates reference base functions"),
        }
    };

    let mut conj_fns: Vec<LocalFn<F>> = Vec::new();
    if opts.conjugate_enrich && F::IS_COMPLEX {
        for src in 0..base_dim {
            let f = base_fn(dofs[src]);
            let (im2, all2) = f.values().iter().fold((0.0f64, 0.0f64), |(i, a), v| {
                let z = v.to_c64();
                (i + z.im * z.im, a + z.norm_sqr())
            });
            if im2.sqrt() > CONJ_IM_RTOL * all2.sqrt() {
                let mut g = LocalFn::zeros(f.rect());
                for (o, v) in g.values_mut().iter_mut().zip(f.values()) {
                    *o = v.conjugate();
                }
                conj_fns.push(g);
                dofs.push(CoarseDof::Conjugate(src));
            }
        }
    }
    let dim = dofs.len();

    let dof_fn = |p: usize| -> &LocalFn<F> {
        match dofs[p] {
            CoarseDof::Conjugate(_) => &conj_fns[p - base_dim],
            d => base_fn(d),
        }
    };
    let dof_rect = |p: usize| -> CellRect { dof_fn(p).rect() };

    // Two basis functions interact only when their supports share a coarse
    // element, so bucket them per element and intersect bucket lists.
    let r = mesh.refine();
    let nc = mesh.nc();
    let mut buckets = vec![Vec::new(); nc * nc];
    for p in 0..dim {
        let rect = dof_rect(p);
        for cy in rect.y0 / r..rect.y1 / r {
            for cx in rect.x0 / r..rect.x1 / r {
                buckets[cy * nc + cx].push(p);
            }
        }
    }

    let columns: Vec<Vec<(usize, F)>> = (0..dim)
        .into_par_iter()
        .map(|q| {
            let rect_q = dof_rect(q);
            let fq = dof_fn(q);
            let mut neighbors: Vec<usize> = Vec::new();
            for cy in rect_q.y0 / r..rect_q.y1 / r {
                for cx in rect_q.x0 / r..rect_q.x1 / r {
                    neighbors.extend_from_slice(&buckets[cy * nc + cx]);
                }
            }
            neighbors.sort_unstable();
            neighbors.dedup();
            neighbors
                .into_iter()
                .map(|p| {
                    let inter = dof_rect(p)
                        .intersect(&rect_q)
                        .expect("bucketed pairs share an element");
                    let mats = prob.local_matrices(inter);
                    let y = mats.k.matvec(&gather(fq, inter));
                    let vp = gather(dof_fn(p), inter);
                    (p, crate::scalar::dotc(&vp, &y))
                })
                .collect()
        })
        .collect();

    let mut rows: Vec<Vec<(usize, F)>> = vec![Vec::new(); dim];
    for (q, col) in columns.into_iter().enumerate() {
        for (p, v) in col {
            rows[p].push((q, v));
        }
    }

    let factor = if dim <= DENSE_COARSE_LIMIT {
        let mut dense = DMatrix::<F>::zeros(dim, dim);
        for (p, row) in rows.iter().enumerate() {
            for &(q, v) in row {
                dense[(p, q)] = v;
            }
        }
        CoarseFactor::Dense(dense.lu())
    } else {
        // Order unknowns by the position of their node / edge midpoint so
        // the coarse matrix is banded, then factor in band storage.
        let geom = |d: CoarseDof| -> (usize, usize) {
            match d {
                CoarseDof::Node(rank) => {
                    let (nx, ny) = mesh.coarse_node_xy(mesh.active_nodes()[rank]);
                    (2 * ny * r, 2 * nx * r)
                }
                CoarseDof::Edge(er, _) => {
                    let e = mesh
                        .edge(mesh.active_edges()[er])
                        .expect("active edge exists");
                    match e.orientation {
                        Orientation::Horizontal => (2 * e.ny * r, (2 * e.nx + 1) * r),
                        Orientation::Vertical => ((2 * e.ny + 1) * r, 2 * e.nx * r),
                    }
                }
                CoarseDof::Conjugate(_) => unreachable!("resolved to the source below"),
            }
        };
        let keys: Vec<(usize, usize, usize)> = (0..dim)
            .map(|p| {
                let d = match dofs[p] {
                    CoarseDof::Conjugate(src) => dofs[src],
                    d => d,
                };
                let (ky, kx) = geom(d);
                (ky, kx, p)
            })
            .collect();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_unstable_by_key(|&p| keys[p]);
        let mut inv = vec![0usize; dim];
        for (i, &p) in order.iter().enumerate() {
            inv[p] = i;
        }
        let mut triplets = Vec::new();
        for (i, &p) in order.iter().enumerate() {
            for &(q, v) in &rows[p] {
                triplets.push((i, inv[q], v));
            }
        }
        let csr = CsrMatrix::from_triplets(dim, dim, &triplets);
        let system = SparseSystem::new(csr, order, dim)?;
        CoarseFactor::Banded(system.factor("coarse system")?)
    };

    Ok(OfflineSpace {
        ops,
        m,
        node_fns,
        edge_bases,
        conj_fns,
        dofs,
        rows,
        factor,
    })
}

impl<F: Scalar> OfflineSpace<F> {
    pub fn prob(&self) -> &Arc<AssembledProblem<F>> {
        self.ops.prob()
    }

    pub fn ops(&self) -> &Arc<ElementOps<F>> {
        &self.ops
    }

    /// Requested directions per edge (edges may hold fewer).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn dofs(&self) -> &[CoarseDof] {
        &self.dofs
    }

    pub fn node_fns(&self) -> &[LocalFn<F>] {
        &self.node_fns
    }

    pub fn edge_bases(&self) -> &[EdgeBasis<F>] {
        &self.edge_bases
    }

    /// Basis function behind coarse degree of freedom `p`.
    pub fn basis_fn(&self, p: usize) -> &LocalFn<F> {
        match self.dofs[p] {
            CoarseDof::Node(r) => &self.node_fns[r],
            CoarseDof::Edge(er, j) => &self.edge_bases[er].vectors()[j],
            CoarseDof::Conjugate(_) => {
                &self.conj_fns[p - (self.dofs.len() - self.conj_fns.len())]
            }
        }
    }

    /// Coarse matrix rows `(column, value)`, columns ascending.
    pub fn coarse_rows(&self) -> &[Vec<(usize, F)>] {
        &self.rows
    }

    /// Dense copy of the coarse matrix (small spaces; for inspection).
    pub fn coarse_dense(&self) -> DMatrix<F> {
        let dim = self.dim();
        let mut dense = DMatrix::zeros(dim, dim);
        for (p, row) in self.rows.iter().enumerate() {
            for &(q, v) in row {
                dense[(p, q)] = v;
            }
        }
        dense
    }

    fn coarse_matvec(&self, x: &[F]) -> Vec<F> {
        self.rows
            .iter()
            .map(|row| {
                let mut acc = F::zero();
                for &(q, v) in row {
                    acc += v * x[q];
                }
                acc
            })
            .collect()
    }

    fn coarse_norm_inf(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(_, v)| v.modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// The online part for a source: element bubbles plus oversampled edge
    /// corrections, on the same patches the singular bases came from.
    pub fn online(&self, source: &Source<F>) -> Result<FineFunction<F>> {
        online_part(&self.ops, source)
    }

    /// Solve the coarse equation `a(u_S, phi_p) = (f, phi_p) - a(u_n, phi_p)`
    /// and return the coarse coefficients. Passing `None` for the online
    /// part implements the cheaper variant that simply drops it.
    pub fn solve_effective(
        &self,
        source: &Source<F>,
        u_n: Option<&FineFunction<F>>,
    ) -> Result<Vec<F>> {
        let prob = self.ops.prob();
        let mesh = prob.mesh();
        let mut load = prob.load_vector(source)?;
        if let Some(u) = u_n {
            for (l, y) in load.iter_mut().zip(prob.k_full().matvec(u.values())) {
                *l -= y;
            }
        }
        let rhs: Vec<F> = (0..self.dim())
            .map(|p| dot_against_full(self.basis_fn(p), &load, mesh))
            .collect();
        self.solve_coarse(&rhs)
    }

    /// Direct solve of the factored coarse system, with the same residual
    /// contract as the fine-grid solvers (one refinement step allowed).
    fn solve_coarse(&self, rhs: &[F]) -> Result<Vec<F>> {
        match &self.factor {
            CoarseFactor::Banded(factor) => {
                let system = factor.system();
                let restricted = system.restrict(rhs);
                let x = factor.solve(&restricted)?;
                let mut full = vec![F::zero(); self.dim()];
                system.scatter_into(&x, &mut full);
                Ok(full)
            }
            CoarseFactor::Dense(lu) => {
                let b = DVector::from_column_slice(rhs);
                let mut x = lu.solve(&b).ok_or_else(|| Error::SingularMatrix {
                    index: 0,
                    context: "coarse system".into(),
                })?;
                let bound = |xs: &DVector<F>| {
                    RESIDUAL_RTOL
                        * (self.coarse_norm_inf() * xs.norm() + crate::scalar::norm2(rhs))
                };
                let residual = |xs: &DVector<F>| -> DVector<F> {
                    let ax = self.coarse_matvec(xs.as_slice());
                    DVector::from_iterator(rhs.len(), rhs.iter().zip(ax).map(|(&b, a)| b - a))
                };
                let mut res = residual(&x);
                if res.norm() > bound(&x) {
                    if let Some(dx) = lu.solve(&res) {
                        x += dx;
                    }
                    res = residual(&x);
                    if res.norm() > bound(&x) {
                        return Err(Error::ResidualTooLarge {
                            residual: res.norm(),
                            bound: bound(&x),
                            context: "coarse system".into(),
                        });
                    }
                }
                Ok(x.as_slice().to_vec())
            }
        }
    }

    /// Assemble the fine-grid solution `u_n + sum_p coeffs[p] phi_p`.
    pub fn reconstruct(
        &self,
        coeffs: &[F],
        u_n: Option<&FineFunction<F>>,
    ) -> Result<FineFunction<F>> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "reconstruction: {} coefficients for a {}-dimensional space",
                coeffs.len(),
                self.dim()
            )));
        }
        let mut out = match u_n {
            Some(u) => u.clone(),
            None => FineFunction::zeros(self.ops.prob().mesh().clone()),
        };
        for (p, &c) in coeffs.iter().enumerate() {
            self.basis_fn(p).add_into(&mut out, c);
        }
        Ok(out)
    }

    /// Relative errors of a computed solution against a reference, packaged
    /// with the space descriptors. Timings are left zero for the caller.
    pub fn evaluate_errors(
        &self,
        u_sol: &FineFunction<F>,
        u_ref: &FineFunction<F>,
    ) -> Result<SolveReport> {
        let prob = self.ops.prob();
        let ref_h = prob.energy_norm(u_ref);
        let ref_l2 = prob.l2_norm(u_ref);
        if !(ref_h > 0.0) {
            return Err(Error::ZeroReference { norm: "energy" });
        }
        if !(ref_l2 > 0.0) {
            return Err(Error::ZeroReference { norm: "L2" });
        }
        let diff = u_sol.minus(u_ref);
        let mesh = prob.mesh();
        Ok(SolveReport {
            scenario: prob.spec().name.clone(),
            coarse_h: mesh.coarse_h(),
            fine_h: mesh.fine_h(),
            m: self.m,
            dim_s: self.dim(),
            e_l2: prob.l2_norm(&diff) / ref_l2,
            e_h: prob.energy_norm(&diff) / ref_h,
            t_offline_s: 0.0,
            t_online_s: 0.0,
            t_coarse_s: 0.0,
        })
    }
}
