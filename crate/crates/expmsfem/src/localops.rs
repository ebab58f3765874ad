//! Localized operators behind the multiscale splitting: harmonic extension
//! and bubble solves on element and oversampling patches, nodal
//! interpolation along the coarse skeleton, edge restriction, the coarse
//! nodal basis, and the locally computable online part of the solution.
//!
//! Every patch problem prescribes values on the part of its boundary that
//! lies on the interior coarse skeleton, forces zeros on the Dirichlet
//! boundary, and leaves Robin/Neumann boundary nodes free. Endpoints of
//! interior skeleton edges count as prescribed even when they sit on the
//! Robin boundary; that choice is what makes the discrete splitting
//! identities below exact.

use nalgebra::DMatrix;
use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{AssembledProblem, FineFunction, LocalMatrices, Source};
use crate::mesh::{CellRect, CoarseNodeId, EdgeId, ElemId, SkelLoc, TwoLevelMesh};
use crate::numerics::{SparseFactor, SparseSystem, SIGMA_MIN_ITERS};
use crate::scalar::Scalar;

/// A patch system whose estimated smallest singular value falls below this
/// times the matrix norm is rejected as not locally elliptic.
pub const PATCH_SIGMA_TOL: f64 = 1e-8;

/// Role of a patch node in the local boundary value problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Solved for: patch-interior nodes and Robin/Neumann boundary nodes.
    Free,
    /// Prescribed from skeleton data.
    Data,
    /// Dirichlet boundary: always zero.
    Zero,
}

/// A nodal function supported on a rectangle of fine cells.
#[derive(Debug, Clone)]
pub struct LocalFn<F> {
    rect: CellRect,
    values: Vec<F>,
}

impl<F: Scalar> LocalFn<F> {
    pub fn zeros(rect: CellRect) -> Self {
        LocalFn {
            rect,
            values: vec![F::zero(); rect.n_nodes()],
        }
    }

    /// Restriction of a global function to `rect`.
    pub fn restrict_from(u: &FineFunction<F>, rect: CellRect) -> Self {
        let mesh = u.mesh();
        let mut values = Vec::with_capacity(rect.n_nodes());
        for local in 0..rect.n_nodes() {
            let (ix, iy) = rect.node_xy(local);
            values.push(u.values()[mesh.fine_node(ix, iy)]);
        }
        LocalFn { rect, values }
    }

    pub fn rect(&self) -> CellRect {
        self.rect
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [F] {
        &mut self.values
    }

    /// Value at a fine node given by grid coordinates (must lie in the rect).
    pub fn at(&self, ix: usize, iy: usize) -> F {
        self.values[self.rect.local_node(ix, iy)]
    }

    /// `out += scale * self`, mapped to global fine nodes.
    pub fn add_into(&self, out: &mut FineFunction<F>, scale: F) {
        let mesh = out.mesh().clone();
        for local in 0..self.rect.n_nodes() {
            let (ix, iy) = self.rect.node_xy(local);
            out.values_mut()[mesh.fine_node(ix, iy)] += scale * self.values[local];
        }
    }

    /// Overwrite this function with `other` on `other.rect` (which must be
    /// contained in `self.rect`). Used to stitch per-element solutions that
    /// agree on shared boundary nodes.
    pub fn write_from(&mut self, other: &LocalFn<F>) {
        for local in 0..other.rect.n_nodes() {
            let (ix, iy) = other.rect.node_xy(local);
            self.values[self.rect.local_node(ix, iy)] = other.values[local];
        }
    }
}

/// Values on the interior coarse skeleton: one slot per active coarse node
/// plus `refine - 1` interior slots per interior coarse edge. Sharing the
/// coarse-node slots makes skeleton-wide data continuous by construction;
/// Dirichlet endpoints are implicitly zero.
#[derive(Debug, Clone)]
pub struct EdgeValues<F> {
    mesh: Arc<TwoLevelMesh>,
    node_vals: Vec<F>,
    edge_vals: Vec<F>,
}

impl<F: Scalar> EdgeValues<F> {
    pub fn zeros(mesh: Arc<TwoLevelMesh>) -> Self {
        let nn = mesh.active_nodes().len();
        let ne = mesh.active_edges().len() * (mesh.refine() - 1);
        EdgeValues {
            mesh,
            node_vals: vec![F::zero(); nn],
            edge_vals: vec![F::zero(); ne],
        }
    }

    /// Trace of a global function on the skeleton.
    pub fn trace_of(u: &FineFunction<F>) -> Self {
        let mesh = u.mesh().clone();
        let mut out = Self::zeros(mesh.clone());
        for (r, &n) in mesh.active_nodes().iter().enumerate() {
            out.node_vals[r] = u.values()[mesh.coarse_node_fine(n)];
        }
        let rm1 = mesh.refine() - 1;
        for (r, &e) in mesh.active_edges().iter().enumerate() {
            let tr = mesh.edge_trace_nodes(e).expect("active edges exist");
            for (k, &fid) in tr.interior().iter().enumerate() {
                out.edge_vals[r * rm1 + k] = u.values()[fid];
            }
        }
        out
    }

    /// Data supported on a single interior edge (zero extension elsewhere).
    pub fn single_edge(
        mesh: Arc<TwoLevelMesh>,
        edge: EdgeId,
        interior: &[F],
    ) -> Result<Self> {
        let Some(rank) = mesh.edge_rank(edge) else {
            return Err(Error::BoundaryEdge { index: edge.0 });
        };
        let rm1 = mesh.refine() - 1;
        if interior.len() != rm1 {
            return Err(Error::DimensionMismatch(format!(
                "edge data has {} interior values, expected {}",
                interior.len(),
                rm1
            )));
        }
        let mut out = Self::zeros(mesh);
        out.edge_vals[rank * rm1..(rank + 1) * rm1].copy_from_slice(interior);
        Ok(out)
    }

    pub fn mesh(&self) -> &Arc<TwoLevelMesh> {
        &self.mesh
    }

    /// Value at a skeleton location; zero on inactive (Dirichlet or
    /// boundary-side) parts.
    pub fn at(&self, loc: SkelLoc) -> F {
        match loc {
            SkelLoc::Node(n) => match self.mesh.node_rank(n) {
                Some(r) => self.node_vals[r],
                None => F::zero(),
            },
            SkelLoc::Edge(e, k) => match self.mesh.edge_rank(e) {
                Some(r) => self.edge_vals[r * (self.mesh.refine() - 1) + k - 1],
                None => F::zero(),
            },
        }
    }

    /// Value at a fine node, if that node lies on the skeleton.
    pub fn at_fine(&self, fine_node: usize) -> Option<F> {
        self.mesh.skeleton_locate(fine_node).map(|loc| self.at(loc))
    }

    pub fn node_value(&self, n: CoarseNodeId) -> F {
        self.at(SkelLoc::Node(n))
    }

    pub fn set_node_value(&mut self, n: CoarseNodeId, v: F) {
        if let Some(r) = self.mesh.node_rank(n) {
            self.node_vals[r] = v;
        }
    }

    pub fn edge_interior(&self, e: EdgeId) -> Option<&[F]> {
        let rm1 = self.mesh.refine() - 1;
        self.mesh
            .edge_rank(e)
            .map(|r| &self.edge_vals[r * rm1..(r + 1) * rm1])
    }

    pub fn set_edge_interior(&mut self, e: EdgeId, vals: &[F]) {
        let rm1 = self.mesh.refine() - 1;
        if let Some(r) = self.mesh.edge_rank(e) {
            self.edge_vals[r * rm1..(r + 1) * rm1].copy_from_slice(vals);
        }
    }

    pub fn minus(&self, other: &EdgeValues<F>) -> EdgeValues<F> {
        let mut out = self.clone();
        for (a, b) in out.node_vals.iter_mut().zip(&other.node_vals) {
            *a -= *b;
        }
        for (a, b) in out.edge_vals.iter_mut().zip(&other.edge_vals) {
            *a -= *b;
        }
        out
    }
}

/// Edgewise-linear interpolation through the coarse-node values: the output
/// keeps the node slots verbatim and replaces every edge interior with the
/// straight line between its endpoint values (zero at Dirichlet endpoints).
pub fn nodal_interpolation<F: Scalar>(skel: &EdgeValues<F>) -> EdgeValues<F> {
    let mesh = skel.mesh().clone();
    let r = mesh.refine();
    let mut out = EdgeValues::zeros(mesh.clone());
    out.node_vals.copy_from_slice(&skel.node_vals);
    let rm1 = r - 1;
    for (rank, &e) in mesh.active_edges().iter().enumerate() {
        let [n0, n1] = mesh.edge_endpoints(e);
        let v0 = skel.node_value(n0);
        let v1 = skel.node_value(n1);
        for k in 1..r {
            let t = F::from_re(k as f64 / r as f64);
            out.edge_vals[rank * rm1 + k - 1] = v0 + (v1 - v0) * t;
        }
    }
    out
}

/// One local boundary value problem: an element or an oversampling patch,
/// with its nodes classified and the free block factored.
pub struct LocalPatch<F: Scalar> {
    mesh: Arc<TwoLevelMesh>,
    rect: CellRect,
    label: String,
    matrices: LocalMatrices<F>,
    class: Vec<NodeClass>,
    data_local: Vec<usize>,
    data_fine: Vec<usize>,
    factor: SparseFactor<F>,
}

impl<F: Scalar> std::fmt::Debug for LocalPatch<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LocalPatch")
            .field("label", &self.label)
            .field("rect", &self.rect)
            .field("n_data", &self.data_local.len())
            .finish_non_exhaustive()
    }
}

impl<F: Scalar> LocalPatch<F> {
    /// Patch over a single coarse element.
    pub fn element(prob: &AssembledProblem<F>, elem: ElemId) -> Result<Self> {
        let (ex, ey) = prob.mesh().element_xy(elem);
        let rect = prob.mesh().element_rect(elem);
        Self::from_rect(prob, rect, format!("element ({ex}, {ey})"))
    }

    /// Patch over the oversampling domain of an interior edge.
    pub fn oversample(prob: &AssembledProblem<F>, edge: EdgeId) -> Result<Self> {
        let rect = prob
            .mesh()
            .oversampling_domain(edge)?
            .to_fine(prob.mesh().refine());
        Self::from_rect(prob, rect, format!("edge {} oversampling patch", edge.0))
    }

    pub fn from_rect(prob: &AssembledProblem<F>, rect: CellRect, label: String) -> Result<Self> {
        let matrices = prob.local_matrices(rect);
        Self::from_matrices(prob.mesh().clone(), matrices, label)
    }

    /// Build from pre-assembled local matrices (shared with the spectral
    /// pipeline, which also needs the local Gram blocks).
    pub fn from_matrices(
        mesh: Arc<TwoLevelMesh>,
        matrices: LocalMatrices<F>,
        label: String,
    ) -> Result<Self> {
        let rect = matrices.rect;
        let class = classify_nodes(&mesh, rect);
        let mut free = Vec::new();
        let mut data_local = Vec::new();
        let mut data_fine = Vec::new();
        for (local, &c) in class.iter().enumerate() {
            match c {
                NodeClass::Free => free.push(local),
                NodeClass::Data => {
                    let (ix, iy) = rect.node_xy(local);
                    data_local.push(local);
                    data_fine.push(mesh.fine_node(ix, iy));
                }
                NodeClass::Zero => {}
            }
        }
        let k_free = matrices.k.submatrix(&free);
        let system = SparseSystem::new(k_free, free, rect.n_nodes())?;
        let factor = if F::IS_COMPLEX {
            let factor = system.factor_lu(&label)?;
            let sigma = factor.sigma_min_estimate(SIGMA_MIN_ITERS);
            let threshold = PATCH_SIGMA_TOL * system.matrix().norm_inf();
            if sigma < threshold {
                return Err(Error::PatchNotElliptic {
                    patch: label,
                    sigma_min: sigma,
                    threshold,
                });
            }
            factor
        } else {
            system.factor(&label)?
        };
        Ok(LocalPatch {
            mesh,
            rect,
            label,
            matrices,
            class,
            data_local,
            data_fine,
            factor,
        })
    }

    pub fn rect(&self) -> CellRect {
        self.rect
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mesh(&self) -> &Arc<TwoLevelMesh> {
        &self.mesh
    }

    pub fn matrices(&self) -> &LocalMatrices<F> {
        &self.matrices
    }

    pub fn node_class(&self) -> &[NodeClass] {
        &self.class
    }

    pub fn n_data(&self) -> usize {
        self.data_local.len()
    }

    /// Global fine node ids of the data slots, in local node order.
    pub fn data_fine_nodes(&self) -> &[usize] {
        &self.data_fine
    }

    /// Harmonic extension of prescribed data values (one per data slot).
    pub fn extend_values(&self, data: &[F]) -> Result<LocalFn<F>> {
        if data.len() != self.data_local.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}: got {} data values for {} data nodes",
                self.label,
                data.len(),
                self.data_local.len()
            )));
        }
        let mut vals = vec![F::zero(); self.rect.n_nodes()];
        for (&local, &g) in self.data_local.iter().zip(data) {
            vals[local] = g;
        }
        let y = self.matrices.k.matvec(&vals);
        let free = self.factor.system().free_to_full();
        let rhs: Vec<F> = free.iter().map(|&l| -y[l]).collect();
        let x = self.factor.solve(&rhs)?;
        for (&l, &v) in free.iter().zip(&x) {
            vals[l] = v;
        }
        Ok(LocalFn {
            rect: self.rect,
            values: vals,
        })
    }

    /// Harmonic extension of skeleton data restricted to this patch.
    pub fn extend_trace(&self, g: &EdgeValues<F>) -> Result<LocalFn<F>> {
        let data: Vec<F> = self
            .data_fine
            .iter()
            .map(|&fid| {
                g.at_fine(fid)
                    .expect("data nodes lie on the coarse skeleton")
            })
            .collect();
        self.extend_values(&data)
    }

    /// Local solution with source load and zero skeleton data. `load` is the
    /// global load vector; restricting it to this patch's free nodes equals
    /// local assembly of the source because free-node support never leaves
    /// the patch.
    pub fn bubble(&self, load: &[F]) -> Result<LocalFn<F>> {
        let free = self.factor.system().free_to_full();
        let rhs: Vec<F> = free
            .iter()
            .map(|&l| {
                let (ix, iy) = self.rect.node_xy(l);
                load[self.mesh.fine_node(ix, iy)]
            })
            .collect();
        let x = self.factor.solve(&rhs)?;
        let mut vals = vec![F::zero(); self.rect.n_nodes()];
        for (&l, &v) in free.iter().zip(&x) {
            vals[l] = v;
        }
        Ok(LocalFn {
            rect: self.rect,
            values: vals,
        })
    }

    /// All unit-data harmonic extensions as columns of a dense matrix
    /// (patch nodes x data slots): the computational basis of the patch's
    /// local solution space.
    pub fn extend_basis(&self) -> Result<DMatrix<F>> {
        let n = self.rect.n_nodes();
        let nd = self.data_local.len();
        let free = self.factor.system().free_to_full();
        let mut data_slot = vec![usize::MAX; n];
        for (s, &l) in self.data_local.iter().enumerate() {
            data_slot[l] = s;
        }
        // rhs column s = -K[free, data_s]
        let mut rhs = DMatrix::<F>::zeros(free.len(), nd);
        for (row, &l) in free.iter().enumerate() {
            let (cols, vals) = self.matrices.k.row(l);
            for (&j, &v) in cols.iter().zip(vals) {
                let s = data_slot[j];
                if s != usize::MAX {
                    rhs[(row, s)] -= v;
                }
            }
        }
        let x = self.factor.solve_many(&rhs)?;
        let mut out = DMatrix::<F>::zeros(n, nd);
        for (s, &l) in self.data_local.iter().enumerate() {
            out[(l, s)] = F::one();
        }
        for (row, &l) in free.iter().enumerate() {
            for s in 0..nd {
                out[(l, s)] = x[(row, s)];
            }
        }
        Ok(out)
    }
}

/// Classify the nodes of a patch rectangle. Perimeter nodes are zero on the
/// Dirichlet boundary and free where every rectangle side through them lies
/// on the (non-Dirichlet) domain boundary; all other perimeter nodes carry
/// prescribed skeleton data. Interior nodes are free.
fn classify_nodes(mesh: &TwoLevelMesh, rect: CellRect) -> Vec<NodeClass> {
    let n = mesh.n_fine();
    let mut class = Vec::with_capacity(rect.n_nodes());
    for local in 0..rect.n_nodes() {
        let (ix, iy) = rect.node_xy(local);
        if !rect.on_perimeter(ix, iy) {
            class.push(NodeClass::Free);
            continue;
        }
        let fid = mesh.fine_node(ix, iy);
        if mesh.boundary().is_dirichlet(fid) {
            class.push(NodeClass::Zero);
            continue;
        }
        let mut on_interior_side = false;
        if ix == rect.x0 && rect.x0 != 0 {
            on_interior_side = true;
        }
        if ix == rect.x1 && rect.x1 != n {
            on_interior_side = true;
        }
        if iy == rect.y0 && rect.y0 != 0 {
            on_interior_side = true;
        }
        if iy == rect.y1 && rect.y1 != n {
            on_interior_side = true;
        }
        class.push(if on_interior_side {
            NodeClass::Data
        } else {
            NodeClass::Free
        });
    }
    class
}

/// Shared, pre-factored element patches for the multi-query operations.
pub struct ElementOps<F: Scalar> {
    prob: Arc<AssembledProblem<F>>,
    patches: Vec<Arc<LocalPatch<F>>>,
}

impl<F: Scalar> ElementOps<F> {
    pub fn new(prob: Arc<AssembledProblem<F>>) -> Result<Self> {
        let patches = (0..prob.mesh().n_elements())
            .into_par_iter()
            .map(|i| LocalPatch::element(&prob, ElemId(i)).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(ElementOps { prob, patches })
    }

    pub fn prob(&self) -> &Arc<AssembledProblem<F>> {
        &self.prob
    }

    pub fn patch(&self, elem: ElemId) -> &Arc<LocalPatch<F>> {
        &self.patches[elem.0]
    }
}

/// Union of the (at most four) elements adjacent to a coarse node.
fn node_support_rect(mesh: &TwoLevelMesh, node: CoarseNodeId) -> CellRect {
    let (nx, ny) = mesh.coarse_node_xy(node);
    let nc = mesh.nc();
    let r = mesh.refine();
    let ex0 = nx.saturating_sub(1);
    let ex1 = (nx + 1).min(nc);
    let ey0 = ny.saturating_sub(1);
    let ey1 = (ny + 1).min(nc);
    CellRect {
        x0: ex0 * r,
        y0: ey0 * r,
        x1: ex1 * r,
        y1: ey1 * r,
    }
}

/// Hat value at a skeleton fine node of the edgewise-linear basis attached
/// to a coarse node: 1 at the node, linear along its interior edges, 0 on
/// the rest of the skeleton.
fn hat_value(mesh: &TwoLevelMesh, node: CoarseNodeId, fine_node: usize) -> f64 {
    match mesh.skeleton_locate(fine_node) {
        Some(SkelLoc::Node(n)) => {
            if n == node {
                1.0
            } else {
                0.0
            }
        }
        Some(SkelLoc::Edge(e, k)) => {
            if mesh.edge_rank(e).is_none() {
                return 0.0;
            }
            let [n0, n1] = mesh.edge_endpoints(e);
            let r = mesh.refine() as f64;
            if n0 == node {
                1.0 - k as f64 / r
            } else if n1 == node {
                k as f64 / r
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

/// The coarse nodal basis: for each active coarse node, the harmonic
/// extension of its edgewise-linear hat into the adjacent elements. Returned
/// in active-node order.
pub fn msfem_basis<F: Scalar>(ops: &ElementOps<F>) -> Result<Vec<LocalFn<F>>> {
    let mesh = ops.prob().mesh().clone();
    mesh.active_nodes()
        .par_iter()
        .map(|&node| {
            let rect = node_support_rect(&mesh, node);
            let mut out = LocalFn::zeros(rect);
            let (nx, ny) = mesh.coarse_node_xy(node);
            for ey in ny.saturating_sub(1)..(ny + 1).min(mesh.nc()) {
                for ex in nx.saturating_sub(1)..(nx + 1).min(mesh.nc()) {
                    let patch = ops.patch(mesh.element(ex, ey));
                    let data: Vec<F> = patch
                        .data_fine_nodes()
                        .iter()
                        .map(|&fid| F::from_re(hat_value(&mesh, node, fid)))
                        .collect();
                    let local = patch.extend_values(&data)?;
                    out.write_from(&local);
                }
            }
            Ok(out)
        })
        .collect()
}

/// Trace of a patch function along an edge, minus the straight line between
/// its endpoint values: the part of the trace invisible to nodal
/// interpolation. Returns the `refine - 1` interior values.
pub fn edge_residual<F: Scalar>(
    u_patch: &LocalFn<F>,
    mesh: &TwoLevelMesh,
    edge: EdgeId,
) -> Result<Vec<F>> {
    let tr = mesh.edge_trace_nodes(edge)?;
    let r = mesh.refine();
    let value = |k: usize| {
        let (ix, iy) = mesh.fine_node_xy(tr.fine_nodes[k]);
        u_patch.at(ix, iy)
    };
    let v0 = value(0);
    let v1 = value(r);
    Ok((1..r)
        .map(|k| {
            let t = F::from_re(k as f64 / r as f64);
            value(k) - (v0 + (v1 - v0) * t)
        })
        .collect())
}

/// [`edge_residual`] packaged as skeleton data, zero-extended to all other
/// edges.
pub fn edge_restriction<F: Scalar>(
    u_patch: &LocalFn<F>,
    mesh: &Arc<TwoLevelMesh>,
    edge: EdgeId,
) -> Result<EdgeValues<F>> {
    let interior = edge_residual(u_patch, mesh, edge)?;
    EdgeValues::single_edge(mesh.clone(), edge, &interior)
}

/// Harmonic extension of single-edge data into the two adjacent elements
/// (zero data on the rest of the skeleton), merged into one function on the
/// union rectangle.
pub fn extend_edge_data<F: Scalar>(
    ops: &ElementOps<F>,
    edge: EdgeId,
    interior: &[F],
) -> Result<LocalFn<F>> {
    let mesh = ops.prob().mesh();
    let rm1 = mesh.refine() - 1;
    if interior.len() != rm1 {
        return Err(Error::DimensionMismatch(format!(
            "edge {} data has {} interior values, expected {}",
            edge.0,
            interior.len(),
            rm1
        )));
    }
    let elems = mesh.edge_elements(edge);
    let mut rect: Option<CellRect> = None;
    for &el in &elems {
        let er = mesh.element_rect(el);
        rect = Some(match rect {
            None => er,
            Some(r) => CellRect {
                x0: r.x0.min(er.x0),
                y0: r.y0.min(er.y0),
                x1: r.x1.max(er.x1),
                y1: r.y1.max(er.y1),
            },
        });
    }
    let rect = rect.expect("an interior edge has adjacent elements");
    let mut out = LocalFn::zeros(rect);
    for &el in &elems {
        let patch = ops.patch(el);
        let data: Vec<F> = patch
            .data_fine_nodes()
            .iter()
            .map(|&fid| match mesh.skeleton_locate(fid) {
                Some(SkelLoc::Edge(e, k)) if e == edge => interior[k - 1],
                _ => F::zero(),
            })
            .collect();
        let local = patch.extend_values(&data)?;
        out.write_from(&local);
    }
    Ok(out)
}

/// The online part of the solution: per-element bubbles plus, for every
/// interior edge, the harmonic extension of the oversampled bubble's edge
/// residual. Fully local in the source and embarrassingly parallel; results
/// are merged in deterministic index order.
pub fn online_part<F: Scalar>(ops: &ElementOps<F>, source: &Source<F>) -> Result<FineFunction<F>> {
    let prob = ops.prob();
    let mesh = prob.mesh().clone();
    let load = prob.load_vector(source)?;

    let bubbles = (0..mesh.n_elements())
        .into_par_iter()
        .map(|i| ops.patch(ElemId(i)).bubble(&load))
        .collect::<Result<Vec<_>>>()?;

    let edge_parts = mesh
        .active_edges()
        .par_iter()
        .map(|&e| {
            let patch = LocalPatch::oversample(prob, e)?;
            let ub = patch.bubble(&load)?;
            let res = edge_residual(&ub, &mesh, e)?;
            extend_edge_data(ops, e, &res)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut un = FineFunction::zeros(mesh);
    for b in &bubbles {
        b.add_into(&mut un, F::one());
    }
    for p in &edge_parts {
        p.add_into(&mut un, F::one());
    }
    Ok(un)
}
