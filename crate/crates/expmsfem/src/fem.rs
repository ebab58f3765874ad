//! Bilinear (Q1) finite elements on the fine grid: assembly of the weak
//! form `(A grad u, grad v) + (V u, v) - (beta u, v)_{Gamma_2}`, reference
//! solves, and the norms every error report is measured in.
//!
//! Coefficients are sampled once per fine cell at the cell center (midpoint
//! rule) and once per Robin boundary segment at the segment midpoint; the
//! per-cell samples are cached so that local (patch) assembly sees exactly
//! the same numbers as the global one.

use std::sync::{Arc, OnceLock};

use crate::coeffs::{ProblemSpec, ScalarKind};
use crate::error::{Error, Result};
use crate::mesh::{CellRect, TwoLevelMesh};
use crate::numerics::{cg_solve, real_quad_form, to_real, CsrMatrix, SparseFactor, SparseSystem};
use crate::scalar::Scalar;

/// Reference element stiffness for Q1 on a square, times 6/A. Local node
/// order: (0,0), (h,0), (h,h), (0,h). Independent of h in 2D.
const STIFF6: [[f64; 4]; 4] = [
    [4.0, -1.0, -2.0, -1.0],
    [-1.0, 4.0, -1.0, -2.0],
    [-2.0, -1.0, 4.0, -1.0],
    [-1.0, -2.0, -1.0, 4.0],
];

/// Reference element mass for Q1 on a square, times 36/(V h^2).
const MASS36: [[f64; 4]; 4] = [
    [4.0, 2.0, 1.0, 2.0],
    [2.0, 4.0, 2.0, 1.0],
    [1.0, 2.0, 4.0, 2.0],
    [2.0, 1.0, 2.0, 4.0],
];

/// A nodal function on the fine grid. Conforming functions carry zeros on
/// Dirichlet nodes; nothing enforces that here because intermediate
/// quantities (interpolants, residual carriers) legitimately violate it.
#[derive(Debug, Clone)]
pub struct FineFunction<F> {
    mesh: Arc<TwoLevelMesh>,
    values: Vec<F>,
}

impl<F: Scalar> FineFunction<F> {
    pub fn zeros(mesh: Arc<TwoLevelMesh>) -> Self {
        let n = mesh.n_fine_nodes();
        FineFunction {
            mesh,
            values: vec![F::zero(); n],
        }
    }

    pub fn from_values(mesh: Arc<TwoLevelMesh>, values: Vec<F>) -> Result<Self> {
        if values.len() != mesh.n_fine_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "fine function: {} values on a mesh with {} nodes",
                values.len(),
                mesh.n_fine_nodes()
            )));
        }
        Ok(FineFunction { mesh, values })
    }

    /// Nodal interpolant of a point function.
    pub fn interpolate(mesh: Arc<TwoLevelMesh>, f: impl Fn(f64, f64) -> F) -> Self {
        let values = (0..mesh.n_fine_nodes())
            .map(|id| {
                let (x, y) = mesh.fine_node_coords(id);
                f(x, y)
            })
            .collect();
        FineFunction { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<TwoLevelMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [F] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<F> {
        self.values
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &FineFunction<F>, s: F) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * *b;
        }
    }

    /// `self - other` as a new function.
    pub fn minus(&self, other: &FineFunction<F>) -> FineFunction<F> {
        debug_assert_eq!(self.values.len(), other.values.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a - b)
            .collect();
        FineFunction {
            mesh: self.mesh.clone(),
            values,
        }
    }
}

/// Right-hand side: an analytic (real-valued) source integrated by the
/// midpoint rule, or a pre-assembled nodal load vector.
#[derive(Clone)]
pub enum Source<F> {
    Field(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
    Nodal(Vec<F>),
}

impl<F: Scalar> Source<F> {
    /// The benchmark source attached to a problem description.
    pub fn of_spec(spec: &ProblemSpec) -> Self {
        let f = spec.f.clone();
        Source::Field(f)
    }

    pub fn constant(c: f64) -> Self {
        Source::Field(Arc::new(move |_, _| c))
    }
}

/// Local matrices of the weak form restricted to a rectangle of fine
/// cells, over the rectangle's node grid: the combined system matrix, the
/// diffusion part alone, and the |V|-weighted mass used by the harmonic
/// space Gram matrices.
#[derive(Debug, Clone)]
pub struct LocalMatrices<F> {
    pub rect: CellRect,
    pub k: CsrMatrix<F>,
    pub stiff: CsrMatrix<f64>,
    pub mass_abs_v: CsrMatrix<f64>,
}

/// The assembled fine-grid problem: cached per-cell coefficient samples,
/// global matrices, and the Dirichlet-eliminated system.
pub struct AssembledProblem<F: Scalar> {
    mesh: Arc<TwoLevelMesh>,
    spec: ProblemSpec,
    a_cell: Vec<f64>,
    v_cell: Vec<f64>,
    stiff: CsrMatrix<f64>,
    mass: CsrMatrix<f64>,
    mass_v: CsrMatrix<f64>,
    k_full: CsrMatrix<F>,
    system: SparseSystem<F>,
    factor: OnceLock<SparseFactor<F>>,
}

impl<F: Scalar> std::fmt::Debug for AssembledProblem<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AssembledProblem")
            .field("spec", &self.spec)
            .field("n_fine", &self.mesh.n_fine())
            .field("nfree", &self.system.nfree())
            .finish_non_exhaustive()
    }
}

/// Assemble the weak form of `spec` on `mesh`.
pub fn assemble<F: Scalar>(
    mesh: Arc<TwoLevelMesh>,
    spec: ProblemSpec,
) -> Result<AssembledProblem<F>> {
    let want_complex = spec.kind == ScalarKind::Complex;
    if want_complex != F::IS_COMPLEX {
        return Err(Error::ScalarKindMismatch(format!(
            "problem '{}' is {:?} but the pipeline scalar is {}",
            spec.name,
            spec.kind,
            if F::IS_COMPLEX { "complex" } else { "real" }
        )));
    }
    if spec.layout != mesh.layout() {
        return Err(Error::LayoutMismatch {
            expected: spec.layout,
            got: mesh.layout(),
        });
    }

    let n = mesh.n_fine();
    let mut a_cell = vec![0.0; n * n];
    let mut v_cell = vec![0.0; n * n];
    for cy in 0..n {
        for cx in 0..n {
            let (x, y) = mesh.cell_center(cx, cy);
            a_cell[mesh.fine_cell(cx, cy)] = (spec.a)(x, y);
            v_cell[mesh.fine_cell(cx, cy)] = (spec.v)(x, y);
        }
    }

    let parts = assemble_rect_parts::<F>(&mesh, &a_cell, &v_cell, &spec, mesh.full_rect(), true);
    let stiff = parts.stiff;
    let mass = parts.mass.expect("global assembly carries the mass matrix");
    let mass_v = parts
        .mass_v
        .expect("global assembly carries the signed V mass");
    let k_full = parts.k;

    let free: Vec<usize> = (0..mesh.n_fine_nodes())
        .filter(|&id| !mesh.boundary().is_dirichlet(id))
        .collect();
    let k_free = k_full.submatrix(&free);
    let system = SparseSystem::new(k_free, free, mesh.n_fine_nodes())?;

    Ok(AssembledProblem {
        mesh,
        spec,
        a_cell,
        v_cell,
        stiff,
        mass,
        mass_v,
        k_full,
        system,
        factor: OnceLock::new(),
    })
}

struct RectParts<F> {
    k: CsrMatrix<F>,
    stiff: CsrMatrix<f64>,
    mass_abs_v: CsrMatrix<f64>,
    mass: Option<CsrMatrix<f64>>,
    mass_v: Option<CsrMatrix<f64>>,
}

/// Core element loop shared by global and patch assembly. `with_l2` adds
/// the plain and signed-V mass matrices the global problem needs.
fn assemble_rect_parts<F: Scalar>(
    mesh: &TwoLevelMesh,
    a_cell: &[f64],
    v_cell: &[f64],
    spec: &ProblemSpec,
    rect: CellRect,
    with_l2: bool,
) -> RectParts<F> {
    let h = mesh.fine_h();
    let nn = rect.n_nodes();
    let cap = rect.n_cells() * 16;
    let mut t_k: Vec<(usize, usize, F)> = Vec::with_capacity(cap);
    let mut t_stiff: Vec<(usize, usize, f64)> = Vec::with_capacity(cap);
    let mut t_absv: Vec<(usize, usize, f64)> = Vec::with_capacity(cap);
    let mut t_mass: Vec<(usize, usize, f64)> = Vec::new();
    let mut t_massv: Vec<(usize, usize, f64)> = Vec::new();
    if with_l2 {
        t_mass.reserve(cap);
        t_massv.reserve(cap);
    }

    let h2_36 = h * h / 36.0;
    for cy in rect.y0..rect.y1 {
        for cx in rect.x0..rect.x1 {
            let cell = mesh.fine_cell(cx, cy);
            let a = a_cell[cell] / 6.0;
            let v = v_cell[cell] * h2_36;
            let locals = [
                rect.local_node(cx, cy),
                rect.local_node(cx + 1, cy),
                rect.local_node(cx + 1, cy + 1),
                rect.local_node(cx, cy + 1),
            ];
            for p in 0..4 {
                for q in 0..4 {
                    let (i, j) = (locals[p], locals[q]);
                    let s = a * STIFF6[p][q];
                    let m = v * MASS36[p][q];
                    t_stiff.push((i, j, s));
                    t_absv.push((i, j, m.abs()));
                    t_k.push((i, j, F::from_re(s + m)));
                    if with_l2 {
                        t_mass.push((i, j, h2_36 * MASS36[p][q]));
                        t_massv.push((i, j, m));
                    }
                }
            }
        }
    }

    // Robin boundary: subtract (beta u, v) over the segments carried by
    // cells of this rectangle, beta sampled at segment midpoints.
    if let Some(beta) = spec.beta.as_ref() {
        let h_6 = h / 6.0;
        for seg in mesh.robin_segments_in(&rect) {
            let b = beta(seg.midpoint.0, seg.midpoint.1);
            let (p0, q0) = mesh.fine_node_xy(seg.nodes[0]);
            let (p1, q1) = mesh.fine_node_xy(seg.nodes[1]);
            let li = rect.local_node(p0, q0);
            let lj = rect.local_node(p1, q1);
            let w = F::from_c64(b * h_6);
            for (i, j, c) in [
                (li, li, 2.0),
                (li, lj, 1.0),
                (lj, li, 1.0),
                (lj, lj, 2.0),
            ] {
                t_k.push((i, j, -w * F::from_re(c)));
            }
        }
    }

    RectParts {
        k: CsrMatrix::from_triplets(nn, nn, &t_k),
        stiff: CsrMatrix::from_triplets(nn, nn, &t_stiff),
        mass_abs_v: CsrMatrix::from_triplets(nn, nn, &t_absv),
        mass: with_l2.then(|| CsrMatrix::from_triplets(nn, nn, &t_mass)),
        mass_v: with_l2.then(|| CsrMatrix::from_triplets(nn, nn, &t_massv)),
    }
}

/// How the global reference system is solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    /// Banded factorization (LDLT or LU by scalar kind).
    Direct,
    /// Conjugate gradients; real SPD systems only.
    Cg { tol: f64, max_iter: usize },
}

impl<F: Scalar> AssembledProblem<F> {
    pub fn mesh(&self) -> &Arc<TwoLevelMesh> {
        &self.mesh
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// Per-fine-cell midpoint samples of A.
    pub fn a_cell(&self) -> &[f64] {
        &self.a_cell
    }

    /// Per-fine-cell midpoint samples of V (signed).
    pub fn v_cell(&self) -> &[f64] {
        &self.v_cell
    }

    /// Full-grid combined matrix (no Dirichlet elimination).
    pub fn k_full(&self) -> &CsrMatrix<F> {
        &self.k_full
    }

    pub fn stiff(&self) -> &CsrMatrix<f64> {
        &self.stiff
    }

    pub fn mass(&self) -> &CsrMatrix<f64> {
        &self.mass
    }

    /// Dirichlet-eliminated system.
    pub fn system(&self) -> &SparseSystem<F> {
        &self.system
    }

    /// Local matrices on a rectangle of fine cells, assembled from the same
    /// cached coefficient samples as the global problem.
    pub fn local_matrices(&self, rect: CellRect) -> LocalMatrices<F> {
        let parts =
            assemble_rect_parts::<F>(&self.mesh, &self.a_cell, &self.v_cell, &self.spec, rect, false);
        LocalMatrices {
            rect,
            k: parts.k,
            stiff: parts.stiff,
            mass_abs_v: parts.mass_abs_v,
        }
    }

    /// Assemble the load vector of a source over the full grid.
    pub fn load_vector(&self, source: &Source<F>) -> Result<Vec<F>> {
        match source {
            Source::Nodal(v) => {
                if v.len() != self.mesh.n_fine_nodes() {
                    return Err(Error::DimensionMismatch(format!(
                        "nodal load has {} entries, mesh has {} nodes",
                        v.len(),
                        self.mesh.n_fine_nodes()
                    )));
                }
                Ok(v.clone())
            }
            Source::Field(f) => {
                let n = self.mesh.n_fine();
                let h = self.mesh.fine_h();
                let w = h * h / 4.0;
                let mut load = vec![F::zero(); self.mesh.n_fine_nodes()];
                for cy in 0..n {
                    for cx in 0..n {
                        let (x, y) = self.mesh.cell_center(cx, cy);
                        let fv = F::from_re(f(x, y) * w);
                        load[self.mesh.fine_node(cx, cy)] += fv;
                        load[self.mesh.fine_node(cx + 1, cy)] += fv;
                        load[self.mesh.fine_node(cx + 1, cy + 1)] += fv;
                        load[self.mesh.fine_node(cx, cy + 1)] += fv;
                    }
                }
                Ok(load)
            }
        }
    }

    /// Factor the global system once and cache it.
    pub fn factor(&self) -> Result<&SparseFactor<F>> {
        if let Some(f) = self.factor.get() {
            return Ok(f);
        }
        let f = self.system.factor(&format!("global system '{}'", self.spec.name))?;
        let _ = self.factor.set(f);
        Ok(self.factor.get().expect("factor was just stored"))
    }

    /// Solve the reference problem with the default direct method.
    pub fn solve_reference(&self, source: &Source<F>) -> Result<FineFunction<F>> {
        self.solve_reference_with(source, SolverKind::Direct)
    }

    pub fn solve_reference_with(
        &self,
        source: &Source<F>,
        solver: SolverKind,
    ) -> Result<FineFunction<F>> {
        let load = self.load_vector(source)?;
        let rhs = self.system.restrict(&load);
        let x = match solver {
            SolverKind::Direct => self.factor()?.solve(&rhs)?,
            SolverKind::Cg { tol, max_iter } => {
                if F::IS_COMPLEX {
                    return Err(Error::ScalarKindMismatch(
                        "the CG fallback supports real SPD systems only".into(),
                    ));
                }
                let real = to_real(self.system.matrix());
                let rhs_r: Vec<f64> = rhs.iter().map(|v| v.real()).collect();
                let (x_r, _iters) = cg_solve(&real, &rhs_r, tol, max_iter)?;
                x_r.into_iter().map(F::from_re).collect()
            }
        };
        let mut out = FineFunction::zeros(self.mesh.clone());
        self.system.scatter_into(&x, out.values_mut());
        Ok(out)
    }

    /// Energy norm `sqrt((A grad w, grad w) + |(V w, w)|)`. The Robin term
    /// is deliberately not part of the norm.
    pub fn energy_norm(&self, w: &FineFunction<F>) -> f64 {
        let s = real_quad_form(&self.stiff, w.values());
        let v = real_quad_form(&self.mass_v, w.values());
        (s + v.abs()).sqrt()
    }

    /// `L^2` norm via the mass matrix.
    pub fn l2_norm(&self, w: &FineFunction<F>) -> f64 {
        real_quad_form(&self.mass, w.values()).max(0.0).sqrt()
    }

    /// The full bilinear form `a(u, v)` with the test slot `v` conjugated.
    pub fn bilinear(&self, u: &FineFunction<F>, v: &FineFunction<F>) -> F {
        self.k_full.sesq(v.values(), u.values())
    }
}
