//! Independently coded coarse-space oracle for the acceptance suite:
//! textbook first-order multiscale basis functions built with dense linear
//! algebra straight from the assembled fine operator, sharing nothing with
//! the library's patch, factorization, or coarse-assembly machinery.

use expmsfem::fem::{AssembledProblem, Source};
use nalgebra::{DMatrix, DVector};

/// Coarse coefficients of the classical multiscale Galerkin solve, one per
/// active coarse node in rank order. Real all-Dirichlet problems.
///
/// Each basis function takes the bilinear hat values on the element
/// boundaries and fills element interiors by solving the homogeneous fine
/// equation densely; the coarse system is assembled against full-grid
/// vectors and solved densely.
pub fn reference_msfem_coefficients(
    prob: &AssembledProblem<f64>,
    source: &Source<f64>,
) -> Vec<f64> {
    let mesh = prob.mesh();
    let k = prob.k_full();
    let nn = mesh.n_fine_nodes();
    let nc = mesh.nc();
    let r = mesh.refine();
    let rf = r as f64;

    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &node in mesh.active_nodes() {
        let (nx, ny) = mesh.coarse_node_xy(node);
        let hat = |ix: usize, iy: usize| -> f64 {
            let dx = (ix as f64 - (nx * r) as f64).abs() / rf;
            let dy = (iy as f64 - (ny * r) as f64).abs() / rf;
            (1.0 - dx).max(0.0) * (1.0 - dy).max(0.0)
        };

        let mut psi = vec![0.0; nn];
        for ey in ny.saturating_sub(1)..=ny.min(nc - 1) {
            for ex in nx.saturating_sub(1)..=nx.min(nc - 1) {
                let rect = mesh.element_rect(mesh.element(ex, ey));

                // Interior unknowns of this element, and hat data on its
                // boundary ring.
                let mut interior = Vec::new();
                for iy in rect.y0..=rect.y1 {
                    for ix in rect.x0..=rect.x1 {
                        let g = mesh.fine_node(ix, iy);
                        if rect.on_perimeter(ix, iy) {
                            psi[g] = hat(ix, iy);
                        } else {
                            interior.push(g);
                        }
                    }
                }
                let ni = interior.len();
                let mut slot = vec![usize::MAX; nn];
                for (s, &g) in interior.iter().enumerate() {
                    slot[g] = s;
                }

                let mut a_ii = DMatrix::<f64>::zeros(ni, ni);
                let mut rhs = DVector::<f64>::zeros(ni);
                for (row, &g) in interior.iter().enumerate() {
                    let (cols, vals) = k.row(g);
                    for (&c, &v) in cols.iter().zip(vals) {
                        if slot[c] != usize::MAX {
                            a_ii[(row, slot[c])] = v;
                        } else {
                            let (cx, cy) = mesh.fine_node_xy(c);
                            rhs[row] -= v * hat(cx, cy);
                        }
                    }
                }
                let x = a_ii
                    .lu()
                    .solve(&rhs)
                    .expect("element interior blocks are definite");
                for (s, &g) in interior.iter().enumerate() {
                    psi[g] = x[s];
                }
            }
        }
        basis.push(psi);
    }

    let load = prob
        .load_vector(source)
        .expect("assembling the oracle load");
    let na = basis.len();
    let mut coarse = DMatrix::<f64>::zeros(na, na);
    let mut rhs = DVector::<f64>::zeros(na);
    for (q, psi_q) in basis.iter().enumerate() {
        let ky = k.matvec(psi_q);
        for (p, psi_p) in basis.iter().enumerate() {
            coarse[(p, q)] = psi_p.iter().zip(&ky).map(|(a, b)| a * b).sum();
        }
        rhs[q] = psi_q.iter().zip(&load).map(|(a, b)| a * b).sum();
    }
    coarse
        .lu()
        .solve(&rhs)
        .expect("the oracle coarse system is definite")
        .as_slice()
        .to_vec()
}
