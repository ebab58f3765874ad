//! Per-edge enrichment directions from a singular value decomposition.
//!
//! For one interior coarse edge, take every function that solves the
//! homogeneous equation on the surrounding oversampling patch, read off its
//! trace along the edge, subtract the straight line through the endpoint
//! values, and extend the remainder harmonically into the two elements the
//! edge separates. The singular values of that composition (domain measured
//! in the patch energy norm, image in the energy norm of the two elements)
//! decay rapidly, so a few leading singular vectors per edge capture almost
//! everything nodal interpolation misses.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::{AssembledProblem, LocalMatrices};
use crate::localops::{extend_edge_data, ElementOps, LocalFn, LocalPatch};
use crate::mesh::{CellRect, EdgeId};
use crate::numerics::{generalized_hermitian_eig, line_fit, matvec_real, DenseGram};
use crate::scalar::{dotc, Scalar};

/// Singular values below this fraction of the largest one are treated as
/// numerical rank deficiency: dropped from bases and decay fits.
pub const SINGULAR_FLOOR: f64 = 1e-13;

/// Apply the energy inner-product matrix (diffusion stiffness plus the
/// absolute-weight mass part; boundary terms excluded) of a local patch.
fn energy_apply<F: Scalar>(mats: &LocalMatrices<F>, v: &[F]) -> Vec<F> {
    let mut y = matvec_real(&mats.stiff, v);
    for (a, b) in y.iter_mut().zip(matvec_real(&mats.mass_abs_v, v)) {
        *a += b;
    }
    y
}

/// Discard the floating-point skew part of a matrix that is Hermitian by
/// construction.
fn hermitize<F: Scalar>(m: &DMatrix<F>) -> DMatrix<F> {
    let half = F::from_re(0.5);
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        (m[(i, j)] + m[(j, i)].conjugate()) * half
    })
}

/// All discrete solutions of the homogeneous equation on one edge's
/// oversampling patch, spanned by the harmonic extension of a unit datum at
/// each boundary data node, together with their energy Gram.
pub struct HarmonicSpace<F: Scalar> {
    edge: EdgeId,
    patch: LocalPatch<F>,
    /// Extension of a unit datum per data node; one column per data node,
    /// identity on the data rows.
    basis: DMatrix<F>,
    /// Energy inner products of the basis columns; Hermitian positive
    /// semidefinite, definite when the patch touches the Dirichlet boundary.
    gram: DMatrix<F>,
}

impl<F: Scalar> HarmonicSpace<F> {
    pub fn edge(&self) -> EdgeId {
        self.edge
    }

    pub fn patch(&self) -> &LocalPatch<F> {
        &self.patch
    }

    /// Number of basis members (= free data nodes on the patch boundary).
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<F> {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<F> {
        &self.gram
    }

    /// Basis member `s` as a function on the patch rectangle.
    pub fn member(&self, s: usize) -> LocalFn<F> {
        let mut out = LocalFn::zeros(self.patch.rect());
        out.values_mut()
            .copy_from_slice(self.basis.column(s).as_slice());
        out
    }

    /// Linear combination of the basis with the given coefficients.
    pub fn combine(&self, coeffs: &[F]) -> Result<LocalFn<F>> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "harmonic-space combination: {} coefficients for dimension {}",
                coeffs.len(),
                self.dim()
            )));
        }
        let v = &self.basis * DVector::from_column_slice(coeffs);
        let mut out = LocalFn::zeros(self.patch.rect());
        out.values_mut().copy_from_slice(v.as_slice());
        Ok(out)
    }

    /// Edge-trace residuals of every basis member: row `k` holds the trace
    /// value at interior edge node `k+1` minus the straight line through the
    /// endpoint values. `(refine - 1) x dim`.
    fn residual_matrix(&self) -> Result<DMatrix<F>> {
        let mesh = self.patch.mesh();
        let r = mesh.refine();
        let tr = mesh.edge_trace_nodes(self.edge)?;
        let rect = self.patch.rect();
        let locals: Vec<usize> = tr
            .fine_nodes
            .iter()
            .map(|&fid| {
                let (ix, iy) = mesh.fine_node_xy(fid);
                rect.local_node(ix, iy)
            })
            .collect();
        Ok(DMatrix::from_fn(r - 1, self.dim(), |k, s| {
            let v0 = self.basis[(locals[0], s)];
            let v1 = self.basis[(locals[r], s)];
            let t = F::from_re((k + 1) as f64 / r as f64);
            self.basis[(locals[k + 1], s)] - (v0 + (v1 - v0) * t)
        }))
    }
}

/// Build the harmonic space of an interior edge: factor its oversampling
/// patch, extend a unit datum from every data node, and assemble the energy
/// Gram of the extensions.
pub fn build_harmonic_space<F: Scalar>(
    prob: &AssembledProblem<F>,
    edge: EdgeId,
) -> Result<HarmonicSpace<F>> {
    let patch = LocalPatch::oversample(prob, edge)?;
    let basis = patch.extend_basis()?;
    let mats = patch.matrices();
    let n_data = basis.ncols();
    let mut weighted = DMatrix::<F>::zeros(basis.nrows(), n_data);
    for s in 0..n_data {
        let w = energy_apply(mats, basis.column(s).as_slice());
        weighted.column_mut(s).copy_from_slice(&w);
    }
    let gram = hermitize(&basis.ad_mul(&weighted));
    Ok(HarmonicSpace {
        edge,
        patch,
        basis,
        gram,
    })
}

/// Leading singular vectors of the per-edge trace-residual operator: unit
/// energy norm, supported on the two elements adjacent to the edge, with
/// zero trace on the rest of the coarse skeleton and at the edge endpoints.
#[derive(Debug, Clone)]
pub struct EdgeBasis<F: Scalar> {
    edge: EdgeId,
    rect: CellRect,
    vectors: Vec<LocalFn<F>>,
    lambdas: Vec<f64>,
}

impl<F: Scalar> EdgeBasis<F> {
    pub fn edge(&self) -> EdgeId {
        self.edge
    }

    /// Union of the two elements adjacent to the edge; every vector lives on
    /// this rectangle.
    pub fn rect(&self) -> CellRect {
        self.rect
    }

    /// Number of retained directions (at most the requested count; smaller
    /// when the spectrum hits the numerical floor first).
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[LocalFn<F>] {
        &self.vectors
    }

    /// Singular values, positive and nonincreasing.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
}

/// Compute the top `m` singular pairs of the trace-residual operator on one
/// edge's harmonic space.
///
/// The operator maps a patch-harmonic function to the harmonic extension of
/// its interior trace residual; it factors through the `refine - 1`
/// extensions of a unit datum at each interior edge node, so the singular
/// value problem reduces to a dense generalized eigenproblem between the
/// image Gram (pulled back through the residual map) and the domain Gram.
pub fn edge_singular_basis<F: Scalar>(
    ops: &ElementOps<F>,
    space: &HarmonicSpace<F>,
    m: usize,
) -> Result<EdgeBasis<F>> {
    let prob = ops.prob();
    let mesh = prob.mesh();
    let edge = space.edge();
    let image_dim = mesh.refine() - 1;
    if m == 0 {
        return Err(Error::DimensionMismatch(
            "at least one singular direction must be requested".into(),
        ));
    }
    if m > image_dim {
        return Err(Error::TooManyPairs {
            edge: edge.0,
            m,
            dim: image_dim,
        });
    }

    let mut units = Vec::with_capacity(image_dim);
    for k in 0..image_dim {
        let mut data = vec![F::zero(); image_dim];
        data[k] = F::one();
        units.push(extend_edge_data(ops, edge, &data)?);
    }
    let rect = units[0].rect();
    let mats = prob.local_matrices(rect);
    let weighted: Vec<Vec<F>> = units
        .iter()
        .map(|u| energy_apply(&mats, u.values()))
        .collect();
    let kw = hermitize(&DMatrix::from_fn(image_dim, image_dim, |i, j| {
        dotc(units[i].values(), &weighted[j])
    }));

    let r_mat = space.residual_matrix()?;
    let m_out = hermitize(&r_mat.ad_mul(&(&kw * &r_mat)));
    let a = DenseGram::new(m_out, &format!("image Gram of edge {}", edge.0))?;
    let b = DenseGram::new(
        space.gram().clone(),
        &format!("harmonic-space Gram of edge {}", edge.0),
    )?;
    let pairs = generalized_hermitian_eig(&a, &b)?;

    let lam: Vec<f64> = pairs.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let floor = SINGULAR_FLOOR * lam.first().copied().unwrap_or(0.0);
    let mut lambdas = Vec::new();
    let mut vectors = Vec::new();
    for j in 0..m.min(lam.len()) {
        if !(lam[j] > floor && lam[j] > 0.0) {
            break;
        }
        let d = &r_mat * pairs.vectors.column(j);
        let mut vals = vec![F::zero(); rect.n_nodes()];
        for (k, unit) in units.iter().enumerate() {
            let dk = d[k];
            for (o, &u) in vals.iter_mut().zip(unit.values()) {
                *o += dk * u;
            }
        }
        let norm = dotc(&vals, &energy_apply(&mats, &vals))
            .real()
            .max(0.0)
            .sqrt();
        if !(norm > 0.0) {
            return Err(Error::GramBreakdown(format!(
                "edge {}: singular direction {j} has zero energy",
                edge.0
            )));
        }
        let scale = F::from_re(1.0 / norm);
        let mut f = LocalFn::zeros(rect);
        for (o, v) in f.values_mut().iter_mut().zip(&vals) {
            *o = *v * scale;
        }
        lambdas.push(lam[j]);
        vectors.push(f);
    }
    Ok(EdgeBasis {
        edge,
        rect,
        vectors,
        lambdas,
    })
}

/// Fitted decay of a singular value sequence.
#[derive(Debug, Clone)]
pub struct DecayReport {
    /// The fitted values, as given.
    pub lambdas: Vec<f64>,
    /// Decay rate in `lambda_m ~ C exp(-b m^(1/3))`.
    pub b: f64,
    /// `ln C` of the fit.
    pub log_c: f64,
    /// Coefficient of determination of the log-linear fit.
    pub r_squared: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
}

/// Fit the decay model to an edge basis's singular values.
pub fn decay_report<F: Scalar>(basis: &EdgeBasis<F>) -> Result<DecayReport> {
    decay_of(basis.lambdas())
}

/// Least-squares fit of `ln lambda_m = ln C - b m^(1/3)` over the values
/// above the numerical floor. Needs at least three such values.
pub fn decay_of(lambdas: &[f64]) -> Result<DecayReport> {
    let top = lambdas.first().copied().unwrap_or(0.0);
    let floor = SINGULAR_FLOOR * top;
    let kept: Vec<f64> = lambdas
        .iter()
        .copied()
        .take_while(|&l| l > floor && l > 0.0)
        .collect();
    if kept.len() < 3 {
        return Err(Error::TooFewValues {
            needed: 3,
            got: kept.len(),
        });
    }
    let xs: Vec<f64> = (1..=kept.len()).map(|m| (m as f64).cbrt()).collect();
    let ys: Vec<f64> = kept.iter().map(|l| l.ln()).collect();
    let fit = line_fit(&xs, &ys);
    Ok(DecayReport {
        lambdas: lambdas.to_vec(),
        b: -fit.slope,
        log_c: fit.intercept,
        r_squared: fit.r_squared,
        residual: fit.rms_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{make_scenario, ScenarioKind};
    use crate::fem::assemble;
    use crate::localops::{edge_residual, NodeClass};
    use crate::mesh::{build_mesh, BcLayout};
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn custom_problem(
        nc: usize,
        refine: usize,
        layout: BcLayout,
        a: f64,
    ) -> Arc<AssembledProblem<f64>> {
        let mesh = Arc::new(build_mesh(nc, refine, layout).unwrap());
        let spec = crate::coeffs::ProblemSpec {
            layout,
            ..make_scenario(&ScenarioKind::Custom { a, v: 0.0, f: 1.0 }).unwrap()
        };
        Arc::new(assemble(mesh, spec).unwrap())
    }

    fn periodic_problem(nc: usize, refine: usize) -> Arc<AssembledProblem<f64>> {
        let mesh = Arc::new(build_mesh(nc, refine, BcLayout::AllDirichlet).unwrap());
        let spec = make_scenario(&ScenarioKind::Periodic).unwrap();
        Arc::new(assemble(mesh, spec).unwrap())
    }

    fn helmholtz_problem(nc: usize, refine: usize, k: f64) -> Arc<AssembledProblem<Complex64>> {
        let mesh = Arc::new(build_mesh(nc, refine, BcLayout::Mixed).unwrap());
        let spec = make_scenario(&ScenarioKind::HelmholtzRough {
            k,
            seeds: [11, 12, 13],
        })
        .unwrap();
        Arc::new(assemble(mesh, spec).unwrap())
    }

    #[test]
    fn members_solve_the_homogeneous_equation_inside_the_patch() {
        let prob = periodic_problem(6, 4);
        let edge = prob.mesh().horizontal_edge(2, 3);
        let space = build_harmonic_space(&prob, edge).unwrap();
        // Fully interior 3x2-element patch at refine 4: 12x8 fine cells,
        // every perimeter node carries data.
        assert_eq!(space.dim(), 2 * (12 + 8));
        let k = &space.patch().matrices().k;
        let scale = k.norm_inf();
        for s in (0..space.dim()).step_by(7) {
            let y = k.matvec(space.basis().column(s).as_slice());
            for (i, class) in space.patch().node_class().iter().enumerate() {
                if *class == NodeClass::Free {
                    assert!(
                        y[i].abs() <= 1e-9 * scale,
                        "member {s} leaves residual {} at free node {i}",
                        y[i]
                    );
                }
            }
        }
    }

    #[test]
    fn dirichlet_contact_removes_data_nodes_and_makes_the_gram_definite() {
        let prob = custom_problem(4, 4, BcLayout::AllDirichlet, 1.0);
        let edge = prob.mesh().horizontal_edge(1, 2);
        let space = build_harmonic_space(&prob, edge).unwrap();
        // The patch spans coarse x in [0,3], y in [1,3]; its left side lies
        // on the essential boundary, so those 9 perimeter fine nodes are
        // fixed to zero instead of carrying data: 2*(12+8) - 9 = 31.
        assert_eq!(space.dim(), 31);
        let eig = space.gram().clone().symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max > 0.0);
        assert!(min > 1e-9 * max, "gram not definite: min {min}, max {max}");
    }

    #[test]
    fn constants_are_harmonic_with_zero_energy_and_zero_edge_residual() {
        let prob = custom_problem(4, 4, BcLayout::AllNeumann, 1.0);
        let edge = prob.mesh().horizontal_edge(1, 2);
        let space = build_harmonic_space(&prob, edge).unwrap();
        // Left patch side lies on the flux boundary: its 7 non-corner nodes
        // stay free, so 2*(12+8) - 7 = 33 data nodes remain.
        assert_eq!(space.dim(), 33);
        let ones = vec![1.0; space.dim()];
        let c = space.combine(&ones).unwrap();
        for &v in c.values() {
            assert_relative_eq!(v, 1.0, epsilon = 1e-9);
        }
        let g1 = space.gram() * DVector::from_element(space.dim(), 1.0);
        assert!(g1.amax() <= 1e-10, "constant has energy {}", g1.amax());
        let res = edge_residual(&c, prob.mesh(), edge).unwrap();
        assert!(res.iter().all(|&x| x.abs() <= 1e-12));
        // With no essential boundary in reach the Gram is only semidefinite,
        // but never indefinite.
        let eig = space.gram().clone().symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10 * max);
    }

    #[test]
    fn singular_values_start_positive_and_decrease() {
        let prob = custom_problem(4, 8, BcLayout::AllDirichlet, 1.0);
        let ops = ElementOps::new(prob.clone()).unwrap();
        let edge = prob.mesh().horizontal_edge(1, 2);
        let space = build_harmonic_space(&prob, edge).unwrap();
        let basis = edge_singular_basis(&ops, &space, 7).unwrap();
        let lam = basis.lambdas();
        assert!(lam[0] > 0.0);
        for j in 1..lam.len() {
            assert!(lam[j] > 0.0);
            assert!(
                lam[j] < lam[j - 1] * (1.0 - 1e-9),
                "no strict decrease at {j}: {} vs {}",
                lam[j],
                lam[j - 1]
            );
        }
        // Every vector vanishes on the boundary of its two-element support
        // (which contains the edge endpoints); only the edge interior and
        // the element interiors are nonzero.
        for v in basis.vectors() {
            let rect = v.rect();
            for local in 0..rect.n_nodes() {
                let (ix, iy) = rect.node_xy(local);
                if rect.on_perimeter(ix, iy) {
                    assert_eq!(v.values()[local], 0.0);
                }
            }
        }
    }

    #[test]
    fn decay_reaches_two_orders_within_eight_directions_at_desk_scale() {
        let prob = periodic_problem(16, 16);
        let ops = ElementOps::new(prob.clone()).unwrap();
        let edge = prob.mesh().horizontal_edge(8, 8);
        let space = build_harmonic_space(&prob, edge).unwrap();
        let basis = edge_singular_basis(&ops, &space, 8).unwrap();
        let lam = basis.lambdas();
        assert_eq!(lam.len(), 8);
        assert!(
            lam[7] / lam[0] <= 1e-2,
            "spectrum decays too slowly: {lam:?}"
        );
        let report = decay_report(&basis).unwrap();
        assert!(report.b > 0.0);
    }

    fn check_orthonormal<F: Scalar>(prob: &AssembledProblem<F>, basis: &EdgeBasis<F>) {
        let mats = prob.local_matrices(basis.rect());
        let weighted: Vec<Vec<F>> = basis
            .vectors()
            .iter()
            .map(|v| energy_apply(&mats, v.values()))
            .collect();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let g = dotc(basis.vectors()[i].values(), &weighted[j]);
                let expect = if i == j { F::one() } else { F::zero() };
                assert!(
                    (g - expect).modulus() <= 1e-6,
                    "inner product ({i},{j}) = {g:?}"
                );
            }
        }
    }

    #[test]
    fn singular_directions_are_orthonormal_in_the_energy_inner_product() {
        let prob = periodic_problem(8, 8);
        let ops = ElementOps::new(prob.clone()).unwrap();
        let space = build_harmonic_space(&prob, prob.mesh().horizontal_edge(4, 4)).unwrap();
        let basis = edge_singular_basis(&ops, &space, 4).unwrap();
        assert_eq!(basis.len(), 4);
        check_orthonormal(&prob, &basis);

        let prob = helmholtz_problem(8, 8, 4.0);
        let ops = ElementOps::new(prob.clone()).unwrap();
        let space = build_harmonic_space(&prob, prob.mesh().horizontal_edge(4, 4)).unwrap();
        let basis = edge_singular_basis(&ops, &space, 4).unwrap();
        assert_eq!(basis.len(), 4);
        check_orthonormal(&prob, &basis);
    }

    #[test]
    fn retained_directions_beat_every_competitor_subspace() {
        let prob = periodic_problem(4, 4);
        let ops = ElementOps::new(prob.clone()).unwrap();
        let edge = prob.mesh().horizontal_edge(1, 2);
        let space = build_harmonic_space(&prob, edge).unwrap();
        let basis = edge_singular_basis(&ops, &space, 3).unwrap();
        let lam = basis.lambdas();
        assert!(lam.len() >= 2);

        // Rebuild the image-space pieces the decomposition is made of.
        let image_dim = prob.mesh().refine() - 1;
        let units: Vec<LocalFn<f64>> = (0..image_dim)
            .map(|k| {
                let mut data = vec![0.0; image_dim];
                data[k] = 1.0;
                extend_edge_data(&ops, edge, &data).unwrap()
            })
            .collect();
        let rect = units[0].rect();
        let mats = prob.local_matrices(rect);
        let weighted: Vec<Vec<f64>> = units
            .iter()
            .map(|u| energy_apply(&mats, u.values()))
            .collect();
        let kw = hermitize(&DMatrix::from_fn(image_dim, image_dim, |i, j| {
            dotc(units[i].values(), &weighted[j])
        }));
        let r_mat = space.residual_matrix().unwrap();
        let g_in = DenseGram::new(space.gram().clone(), "domain Gram").unwrap();

        // Worst-case approximation error (over the unit energy ball of the
        // harmonic space) of a candidate image subspace, via the top
        // generalized eigenvalue of the deflated image Gram.
        let worst_case = |y: &DMatrix<f64>| -> f64 {
            let kwy = &kw * y;
            let yky = y.ad_mul(&kwy);
            let defl = &kw - &kwy * yky.try_inverse().unwrap() * kwy.adjoint();
            let a = hermitize(&r_mat.ad_mul(&(&defl * &r_mat)));
            let pairs = generalized_hermitian_eig(
                &DenseGram::new(a, "deflated image Gram").unwrap(),
                &g_in,
            )
            .unwrap();
            pairs.values[0].max(0.0).sqrt()
        };

        // The retained one-dimensional space achieves the next singular
        // value as its worst case ...
        let m_out = hermitize(&r_mat.ad_mul(&(&kw * &r_mat)));
        let pairs = generalized_hermitian_eig(
            &DenseGram::new(m_out, "image Gram").unwrap(),
            &g_in,
        )
        .unwrap();
        assert_relative_eq!(pairs.values[0].max(0.0).sqrt(), lam[0], max_relative = 1e-8);
        let d1 = &r_mat * pairs.vectors.column(0);
        let v_m = DMatrix::from_column_slice(image_dim, 1, d1.as_slice());
        let wc_retained = worst_case(&v_m);
        assert_relative_eq!(wc_retained, lam[1], max_relative = 1e-6);

        // ... and no competitor does better, which bounds the error of the
        // retained space on any concrete harmonic function.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v1 = basis.vectors()[0].values();
        let wv1 = energy_apply(&mats, v1);
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..space.dim())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let u = space.combine(&coeffs).unwrap();
            let res = edge_residual(&u, prob.mesh(), edge).unwrap();
            let mut tu = vec![0.0; rect.n_nodes()];
            for (k, unit) in units.iter().enumerate() {
                for (o, &x) in tu.iter_mut().zip(unit.values()) {
                    *o += res[k] * x;
                }
            }
            let norm2_tu = dotc(&tu, &energy_apply(&mats, &tu));
            let proj = dotc(&tu, &wv1);
            let dist2 = (norm2_tu - proj * proj).max(0.0);
            let gc = space.gram() * DVector::from_column_slice(&coeffs);
            let u_norm2 = dotc(&coeffs, gc.as_slice());

            let y = DMatrix::from_fn(image_dim, 1, |_, _| rng.gen_range(-1.0..1.0));
            let wc = worst_case(&y);
            assert!(
                dist2 <= wc * wc * u_norm2 * (1.0 + 1e-8) + 1e-12 * norm2_tu.max(1.0),
                "distance {} exceeds competitor worst case {}",
                dist2.sqrt(),
                wc * u_norm2.sqrt()
            );
        }
    }

    #[test]
    fn rescaling_the_diffusion_leaves_the_decomposition_invariant() {
        let build = |a: f64| {
            let prob = custom_problem(4, 4, BcLayout::AllDirichlet, a);
            let ops = ElementOps::new(prob.clone()).unwrap();
            let edge = prob.mesh().horizontal_edge(1, 2);
            let space = build_harmonic_space(&prob, edge).unwrap();
            edge_singular_basis(&ops, &space, 2).unwrap()
        };
        let b1 = build(1.0);
        let b7 = build(7.0);
        assert_eq!(b1.len(), 2);
        assert_eq!(b7.len(), 2);
        for j in 0..2 {
            assert_relative_eq!(b1.lambdas()[j], b7.lambdas()[j], max_relative = 1e-9);
            // Unit energy norm under a 7x stiffer coefficient shrinks the
            // vector by sqrt(7); the deterministic eigenvector phase keeps
            // the orientation comparable.
            for (&x, &y) in b1.vectors()[j].values().iter().zip(b7.vectors()[j].values()) {
                assert!(
                    (x - y * 7.0f64.sqrt()).abs() <= 1e-8,
                    "direction {j} not scale invariant: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn decay_fit_recovers_a_synthetic_model_and_flags_flat_spectra() {
        let lam: Vec<f64> = (1..=10).map(|m| (-2.0 * (m as f64).cbrt()).exp()).collect();
        let rep = decay_of(&lam).unwrap();
        assert_relative_eq!(rep.b, 2.0, epsilon = 0.01);
        assert!(rep.r_squared > 0.999999);
        assert!(rep.log_c.abs() < 1e-9);
        assert!(rep.residual < 1e-9);

        let flat = decay_of(&[0.5; 5]).unwrap();
        assert!(flat.b.abs() <= 1e-12);
        assert_relative_eq!(flat.r_squared, 1.0, epsilon = 1e-12);

        assert!(matches!(
            decay_of(&[1.0, 0.5]),
            Err(Error::TooFewValues { needed: 3, got: 2 })
        ));
        assert!(matches!(
            decay_of(&[1.0, 1e-20, 1e-21, 0.0]),
            Err(Error::TooFewValues { got: 1, .. })
        ));
    }

    #[test]
    fn requesting_more_directions_than_the_trace_supports_fails() {
        let prob = custom_problem(4, 4, BcLayout::AllDirichlet, 1.0);
        let ops = ElementOps::new(prob.clone()).unwrap();
        let edge = prob.mesh().horizontal_edge(1, 2);
        let space = build_harmonic_space(&prob, edge).unwrap();
        match edge_singular_basis(&ops, &space, 4) {
            Err(Error::TooManyPairs { m: 4, dim: 3, .. }) => {}
            other => panic!("expected a too-many-pairs error, got {other:?}"),
        }
        assert!(edge_singular_basis(&ops, &space, 0).is_err());
    }
}
