//! Acceptance gate: eleven end-to-end checks of the solver, one test each,
//! printing one `ACCEPTANCE <n> <name>: PASS/FAIL` line per criterion.
//! Tolerances are pinned next to each check.

mod support;

use std::sync::Arc;
use std::time::Instant;

use expmsfem::coeffs::{
    make_scenario, periodic_multiscale_a, ProblemSpec, ScalarKind, ScenarioKind,
};
use expmsfem::fem::{assemble, AssembledProblem, FineFunction, Source};
use expmsfem::galerkin::build_offline;
use expmsfem::localops::{
    msfem_basis, nodal_interpolation, online_part, EdgeValues, ElementOps, LocalPatch,
};
use expmsfem::mesh::{build_mesh, BcLayout};
use expmsfem::scalar::Complex64;
use expmsfem::spectral::{build_harmonic_space, decay_of, decay_report, edge_singular_basis};
use expmsfem::Scalar;
use rayon::prelude::*;

fn verdict(n: usize, name: &str, ok: bool, detail: &str) {
    println!(
        "ACCEPTANCE {n} {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion {n} ({name}) failed: {detail}");
}

fn problem<F: Scalar>(kind: &ScenarioKind, nc: usize, fine_n: usize) -> Arc<AssembledProblem<F>> {
    let spec = make_scenario(kind).unwrap();
    let mesh = Arc::new(build_mesh(nc, fine_n / nc, spec.layout).unwrap());
    Arc::new(assemble(mesh, spec).unwrap())
}

/// The three benchmark coefficient families at a fixed, cheap size.
fn desk_scenarios() -> [ScenarioKind; 3] {
    [
        ScenarioKind::Periodic,
        ScenarioKind::HighContrast { contrast: 1e4 },
        ScenarioKind::HelmholtzRough {
            k: 16.0,
            seeds: [11, 12, 13],
        },
    ]
}

/// Full pipeline at one direction count: returns (e_l2, e_h).
fn pipeline_errors<F: Scalar>(
    prob: &Arc<AssembledProblem<F>>,
    source: &Source<F>,
    u_ref: &FineFunction<F>,
    m: usize,
    online: bool,
) -> (f64, f64) {
    let off = build_offline(prob.clone(), m).unwrap();
    let u_n = online.then(|| off.online(source).unwrap());
    let coeffs = off.solve_effective(source, u_n.as_ref()).unwrap();
    let u_sol = off.reconstruct(&coeffs, u_n.as_ref()).unwrap();
    let report = off.evaluate_errors(&u_sol, u_ref).unwrap();
    (report.e_l2, report.e_h)
}

fn geometric_mean_ratio(errors: &[f64]) -> f64 {
    let n = (errors.len() - 1) as f64;
    (errors.last().unwrap() / errors.first().unwrap()).powf(1.0 / n)
}

/// 1. Splitting the reference solution into element-harmonic and bubble
/// parts and reassembling reproduces it in energy, for every scenario.
#[test]
fn splitting_identity_reassembles_the_reference() {
    const TOL_REL_ENERGY: f64 = 1e-9;

    fn rel_split_error<F: Scalar>(prob: &Arc<AssembledProblem<F>>) -> f64 {
        let mesh = prob.mesh().clone();
        let source = Source::of_spec(prob.spec());
        let u_ref = prob.solve_reference(&source).unwrap();
        let load = prob.load_vector(&source).unwrap();
        let trace = EdgeValues::trace_of(&u_ref);
        let mut sum = FineFunction::zeros(mesh.clone());
        for el in 0..mesh.n_elements() {
            let patch = LocalPatch::element(prob, expmsfem::mesh::ElemId(el)).unwrap();
            let harmonic = patch.extend_trace(&trace).unwrap();
            let bubble = patch.bubble(&load).unwrap();
            for local in 0..patch.rect().n_nodes() {
                let (ix, iy) = patch.rect().node_xy(local);
                sum.values_mut()[mesh.fine_node(ix, iy)] =
                    harmonic.values()[local] + bubble.values()[local];
            }
        }
        prob.energy_norm(&sum.minus(&u_ref)) / prob.energy_norm(&u_ref)
    }

    let t = Instant::now();
    let [p, c, h] = desk_scenarios();
    let mut worst = rel_split_error(&problem::<f64>(&p, 8, 128));
    worst = worst.max(rel_split_error(&problem::<f64>(&c, 8, 128)));
    worst = worst.max(rel_split_error(&problem::<Complex64>(&h, 8, 128)));
    verdict(
        1,
        "splitting-identity",
        worst <= TOL_REL_ENERGY,
        &format!(
            "worst relative energy error {worst:.3e} <= {TOL_REL_ENERGY:.0e}, {:.1}s",
            t.elapsed().as_secs_f64()
        ),
    );
}

/// 2. The skeleton interpolation reproduces coarse-node values exactly and
/// is idempotent.
#[test]
fn interpolation_residual_vanishes_at_coarse_nodes() {
    fn check<F: Scalar>(prob: &Arc<AssembledProblem<F>>) -> f64 {
        let mesh = prob.mesh();
        let source = Source::of_spec(prob.spec());
        let u_ref = prob.solve_reference(&source).unwrap();
        let trace = EdgeValues::trace_of(&u_ref);
        let interp = nodal_interpolation(&trace);
        let mut worst: f64 = 0.0;
        for &n in mesh.active_nodes() {
            worst = worst.max((trace.node_value(n) - interp.node_value(n)).modulus());
        }
        // Idempotency, bit for bit: node values and edge interiors.
        let twice = nodal_interpolation(&interp);
        for &n in mesh.active_nodes() {
            assert!(twice.node_value(n) == interp.node_value(n));
        }
        for &e in mesh.active_edges() {
            assert_eq!(twice.edge_interior(e), interp.edge_interior(e));
        }
        worst
    }

    let [p, c, h] = desk_scenarios();
    let mut worst = check(&problem::<f64>(&p, 8, 128));
    worst = worst.max(check(&problem::<f64>(&c, 8, 128)));
    worst = worst.max(check(&problem::<Complex64>(&h, 8, 128)));
    verdict(
        2,
        "interpolation-projection",
        worst == 0.0,
        &format!("worst coarse-node residual {worst:.1e}, interpolation idempotent"),
    );
}

/// 3. The multiscale nodal functions form a partition of unity away from
/// the essential boundary, for a rough unstructured diffusion field.
#[test]
fn nodal_functions_sum_to_one_away_from_the_boundary() {
    const TOL_POINTWISE: f64 = 1e-9;

    let spec = ProblemSpec {
        name: "rough-elliptic".into(),
        kind: ScalarKind::Real,
        layout: BcLayout::AllDirichlet,
        a: Arc::new(|x, y| {
            periodic_multiscale_a(x, y) * (1.0 + 0.4 * (7.0 * x + 3.0 * y).sin())
        }),
        v: Arc::new(|_, _| 0.0),
        beta: None,
        f: Arc::new(|_, _| 1.0),
        k: None,
        a_bounds: (0.05, 100.0),
    };
    let nc = 8;
    let mesh = Arc::new(build_mesh(nc, 16, spec.layout).unwrap());
    let prob = Arc::new(assemble::<f64>(mesh.clone(), spec).unwrap());
    let ops = ElementOps::new(prob).unwrap();
    let mut sum = FineFunction::zeros(mesh.clone());
    for psi in msfem_basis(&ops).unwrap() {
        psi.add_into(&mut sum, 1.0);
    }
    let mut worst: f64 = 0.0;
    for ey in 1..nc - 1 {
        for ex in 1..nc - 1 {
            let rect = mesh.element_rect(mesh.element(ex, ey));
            for iy in rect.y0..=rect.y1 {
                for ix in rect.x0..=rect.x1 {
                    let v = sum.values()[mesh.fine_node(ix, iy)];
                    worst = worst.max((v - 1.0).abs());
                }
            }
        }
    }
    verdict(
        3,
        "partition-of-unity",
        worst <= TOL_POINTWISE,
        &format!("worst |sum - 1| = {worst:.3e} <= {TOL_POINTWISE:.0e} off the boundary"),
    );
}

/// 4. Edge singular values decrease monotonically on every edge, drop two
/// orders within eight directions, carry a positive per-edge decay rate,
/// and the scenario's spectrum fits the nearly-exponential model well.
/// Individual edges may show staircase pairs (near-degenerate directions
/// from coefficient symmetries), so the fit-quality bar applies to the
/// per-index geometric mean over edges rather than the single worst edge;
/// the per-edge distribution is reported alongside.
#[test]
fn edge_spectra_decay_nearly_exponentially() {
    const TOL_RATIO: f64 = 1e-2;
    const MIN_R2: f64 = 0.9;
    const MONOTONE_SLACK: f64 = 1.0 + 1e-12;

    let t = Instant::now();
    let prob = problem::<f64>(&ScenarioKind::Periodic, 16, 256);
    let ops = ElementOps::new(prob.clone()).unwrap();
    let mesh = prob.mesh().clone();
    let per_edge: Vec<(Vec<f64>, f64, f64)> = mesh
        .active_edges()
        .par_iter()
        .map(|&e| {
            let space = build_harmonic_space(&prob, e).unwrap();
            let basis = edge_singular_basis(&ops, &space, 10).unwrap();
            let report = decay_report(&basis).unwrap();
            (basis.lambdas().to_vec(), report.b, report.r_squared)
        })
        .collect();

    let mut worst_ratio: f64 = 0.0;
    let mut min_b = f64::INFINITY;
    let mut monotone = true;
    for (lambdas, b, _) in &per_edge {
        for w in lambdas.windows(2) {
            monotone &= w[1] <= w[0] * MONOTONE_SLACK;
        }
        if lambdas.len() >= 8 {
            worst_ratio = worst_ratio.max(lambdas[7] / lambdas[0]);
        }
        min_b = min_b.min(*b);
    }

    let n_vals = per_edge.iter().map(|(l, _, _)| l.len()).min().unwrap();
    let mean_spectrum: Vec<f64> = (0..n_vals)
        .map(|j| {
            let log_sum: f64 = per_edge.iter().map(|(l, _, _)| l[j].ln()).sum();
            (log_sum / per_edge.len() as f64).exp()
        })
        .collect();
    let fit = decay_of(&mean_spectrum).unwrap();

    let mut r2s: Vec<f64> = per_edge.iter().map(|&(_, _, r2)| r2).collect();
    r2s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (r2_min, r2_med) = (r2s[0], r2s[r2s.len() / 2]);

    let ok = monotone && worst_ratio <= TOL_RATIO && min_b > 0.0
        && fit.b > 0.0 && fit.r_squared >= MIN_R2;
    verdict(
        4,
        "edge-spectrum-decay",
        ok,
        &format!(
            "{} edges: nonincreasing {monotone}, worst lambda8/lambda1 {worst_ratio:.2e} <= \
             {TOL_RATIO:.0e}, min per-edge rate {min_b:.2}, mean-spectrum rate {:.2} with R^2 \
             {:.3} >= {MIN_R2} (per-edge R^2 min {r2_min:.3}, median {r2_med:.3}), {:.0}s",
            per_edge.len(),
            fit.b,
            fit.r_squared,
            t.elapsed().as_secs_f64()
        ),
    );
}

/// 5. Periodic scenario: both error norms decay strictly and at a geometric
/// mean rate of at most 0.7 per added direction.
#[test]
fn periodic_errors_decay_exponentially_in_m() {
    const MAX_MEAN_RATIO: f64 = 0.7;

    let t = Instant::now();
    let prob = problem::<f64>(&ScenarioKind::Periodic, 16, 256);
    let source = Source::of_spec(prob.spec());
    let u_ref = prob.solve_reference(&source).unwrap();
    let mut e_l2 = Vec::new();
    let mut e_h = Vec::new();
    for m in 1..=4 {
        let (l2, h) = pipeline_errors(&prob, &source, &u_ref, m, true);
        e_l2.push(l2);
        e_h.push(h);
    }
    let strict = e_h.windows(2).all(|w| w[1] < w[0]) && e_l2.windows(2).all(|w| w[1] < w[0]);
    let mean_h = geometric_mean_ratio(&e_h);
    let mean_l2 = geometric_mean_ratio(&e_l2);
    let ok = strict && mean_h <= MAX_MEAN_RATIO && mean_l2 <= MAX_MEAN_RATIO;
    verdict(
        5,
        "periodic-error-decay",
        ok,
        &format!(
            "eH {:?} mean ratio {mean_h:.2}, eL2 mean ratio {mean_l2:.2} <= {MAX_MEAN_RATIO}, \
             {:.0}s",
            e_h.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>(),
            t.elapsed().as_secs_f64()
        ),
    );
}

/// 6. High-contrast scenario: the decay persists at contrasts 1e2 and 1e4
/// and the two error curves stay within a factor of ten of each other.
#[test]
fn contrast_does_not_break_the_decay() {
    const MAX_MEAN_RATIO: f64 = 0.75;
    const MAX_CURVE_GAP: f64 = 10.0;

    let t = Instant::now();
    let mut curves = Vec::new();
    for contrast in [1e2, 1e4] {
        let prob = problem::<f64>(&ScenarioKind::HighContrast { contrast }, 32, 256);
        let source = Source::of_spec(prob.spec());
        let u_ref = prob.solve_reference(&source).unwrap();
        let e_h: Vec<f64> = (1..=4)
            .map(|m| pipeline_errors(&prob, &source, &u_ref, m, true).1)
            .collect();
        curves.push(e_h);
    }
    let decays = curves
        .iter()
        .all(|c| geometric_mean_ratio(c) <= MAX_MEAN_RATIO);
    let gap = curves[0]
        .iter()
        .zip(&curves[1])
        .map(|(a, b)| (a / b).max(b / a))
        .fold(0.0f64, f64::max);
    let ok = decays && gap < MAX_CURVE_GAP;
    verdict(
        6,
        "contrast-robustness",
        ok,
        &format!(
            "mean ratios {:.2} and {:.2} <= {MAX_MEAN_RATIO}, curve gap {gap:.1} < \
             {MAX_CURVE_GAP}, {:.0}s",
            geometric_mean_ratio(&curves[0]),
            geometric_mean_ratio(&curves[1]),
            t.elapsed().as_secs_f64()
        ),
    );
}

/// 7. Helmholtz at k = 16 on the mixed boundary layout: strictly decreasing
/// energy error reaching five percent by m = 5.
#[test]
fn helmholtz_errors_reach_five_percent() {
    const FINAL_EH: f64 = 0.05;

    let t = Instant::now();
    let prob = problem::<Complex64>(
        &ScenarioKind::HelmholtzRough {
            k: 16.0,
            seeds: [11, 12, 13],
        },
        16,
        256,
    );
    let source = Source::of_spec(prob.spec());
    let u_ref = prob.solve_reference(&source).unwrap();
    let e_h: Vec<f64> = (1..=5)
        .map(|m| pipeline_errors(&prob, &source, &u_ref, m, true).1)
        .collect();
    let strict = e_h.windows(2).all(|w| w[1] < w[0]);
    let ok = strict && *e_h.last().unwrap() <= FINAL_EH;
    verdict(
        7,
        "helmholtz-pipeline",
        ok,
        &format!(
            "eH {:?}, strictly decreasing {strict}, final {:.3} <= {FINAL_EH}, {:.0}s",
            e_h.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
            e_h.last().unwrap(),
            t.elapsed().as_secs_f64()
        ),
    );
}

/// 8. The online part shrinks linearly with the coarse mesh size: halving H
/// roughly halves its energy norm.
#[test]
fn online_part_scales_linearly_with_coarse_size() {
    const RATIO_LO: f64 = 0.3;
    const RATIO_HI: f64 = 0.8;

    let norms: Vec<f64> = [8usize, 16, 32]
        .iter()
        .map(|&nc| {
            let prob = problem::<f64>(&ScenarioKind::Periodic, nc, 256);
            let ops = ElementOps::new(prob.clone()).unwrap();
            let u_n = online_part(&ops, &Source::of_spec(prob.spec())).unwrap();
            prob.energy_norm(&u_n)
        })
        .collect();
    let ratios: Vec<f64> = norms.windows(2).map(|w| w[1] / w[0]).collect();
    let ok = ratios.iter().all(|&r| (RATIO_LO..=RATIO_HI).contains(&r));
    verdict(
        8,
        "online-part-scaling",
        ok,
        &format!(
            "norms {:?}, halving ratios {ratios:.2?} within [{RATIO_LO}, {RATIO_HI}]",
            norms.iter().map(|n| format!("{n:.2e}")).collect::<Vec<_>>()
        ),
    );
}

/// 9. The coarse solution is Galerkin-orthogonal to every offline basis
/// function in the problem's bilinear form.
#[test]
fn coarse_error_is_orthogonal_to_the_offline_space() {
    const TOL: f64 = 1e-8;

    let prob = problem::<f64>(&ScenarioKind::Periodic, 8, 128);
    let source = Source::of_spec(prob.spec());
    let u_ref = prob.solve_reference(&source).unwrap();
    let off = build_offline(prob.clone(), 2).unwrap();
    let u_n = off.online(&source).unwrap();
    let coeffs = off.solve_effective(&source, Some(&u_n)).unwrap();
    let u_sol = off.reconstruct(&coeffs, Some(&u_n)).unwrap();
    let diff = u_ref.minus(&u_sol);
    let ref_h = prob.energy_norm(&u_ref);

    let mut worst = 0.0f64;
    for p in 0..off.dim() {
        let mut phi = FineFunction::zeros(prob.mesh().clone());
        off.basis_fn(p).add_into(&mut phi, 1.0);
        let pairing = prob.bilinear(&diff, &phi).abs();
        let bound = TOL * ref_h * prob.energy_norm(&phi);
        worst = worst.max(pairing / bound);
    }
    verdict(
        9,
        "galerkin-orthogonality",
        worst <= 1.0,
        &format!(
            "worst |a(err, phi)| at {worst:.2e} of the {TOL:.0e} * |u_ref|_H * |phi|_H budget"
        ),
    );
}

/// 10. With no edge directions and no online part the pipeline reproduces
/// an independently coded classical multiscale solve.
#[test]
fn zero_direction_pipeline_matches_the_reference_implementation() {
    const TOL_REL: f64 = 1e-10;

    let prob = problem::<f64>(&ScenarioKind::Periodic, 8, 128);
    let source = Source::of_spec(prob.spec());
    let oracle = support::reference_msfem_coefficients(&prob, &source);
    let off = build_offline(prob.clone(), 0).unwrap();
    let coeffs = off.solve_effective(&source, None).unwrap();

    assert_eq!(oracle.len(), coeffs.len());
    let scale = oracle.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    let diff = oracle
        .iter()
        .zip(&coeffs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    verdict(
        10,
        "classical-msfem-equivalence",
        diff <= TOL_REL * scale,
        &format!(
            "{} coefficients, worst gap {diff:.2e} <= {TOL_REL:.0e} * {scale:.2e}",
            coeffs.len()
        ),
    );
}

/// 11. One offline space serves many sources: five solves reuse it at least
/// three times faster than five rebuilds, with identical coefficients.
#[test]
fn reusing_the_offline_space_beats_rebuilding() {
    const MIN_SPEEDUP: f64 = 3.0;
    const TOL_MATCH: f64 = 1e-12;

    let prob = problem::<f64>(&ScenarioKind::Periodic, 16, 256);
    let sources: Vec<Source<f64>> = vec![
        Source::of_spec(prob.spec()),
        Source::constant(2.0),
        Source::Field(Arc::new(|x, y| {
            (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()
        })),
        Source::Field(Arc::new(|x, y| x * x - y)),
        Source::Field(Arc::new(|x, y| (-8.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).exp())),
    ];

    let solve = |off: &expmsfem::galerkin::OfflineSpace<f64>, s: &Source<f64>| -> Vec<f64> {
        let u_n = off.online(s).unwrap();
        off.solve_effective(s, Some(&u_n)).unwrap()
    };

    let t0 = Instant::now();
    let off = build_offline(prob.clone(), 2).unwrap();
    let reused: Vec<Vec<f64>> = sources.iter().map(|s| solve(&off, s)).collect();
    let t_reuse = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let rebuilt: Vec<Vec<f64>> = sources
        .iter()
        .map(|s| solve(&build_offline(prob.clone(), 2).unwrap(), s))
        .collect();
    let t_rebuild = t1.elapsed().as_secs_f64();

    let mut worst = 0.0f64;
    for (a, b) in reused.iter().zip(&rebuilt) {
        let scale = a.iter().fold(0.0f64, |acc, &c| acc.max(c.abs()));
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs() / scale);
        }
    }
    let speedup = t_rebuild / t_reuse;
    let ok = speedup >= MIN_SPEEDUP && worst <= TOL_MATCH;
    verdict(
        11,
        "multi-query-reuse",
        ok,
        &format!(
            "5 sources: reuse {t_reuse:.1}s vs rebuild {t_rebuild:.1}s, speedup {speedup:.1}x \
             >= {MIN_SPEEDUP}x, coefficient gap {worst:.1e} <= {TOL_MATCH:.0e}"
        ),
    );
}
