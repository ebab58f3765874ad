//! Benchmark coefficient families and problem descriptions.
//!
//! Three named scenarios are built in: a periodic multiscale diffusion
//! coefficient with five separated scales, a high-contrast inclusion
//! pattern, and a rough Helmholtz medium drawn from a seeded Gaussian
//! random field with mixed boundary conditions. A `custom`
//! constant-coefficient scenario exists for calibration and testing.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::BcLayout;

/// Scalar kind of a problem: real elliptic or complex Helmholtz.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Real,
    Complex,
}

/// Real scalar field on the unit square.
pub type CoeffFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Complex boundary coefficient on the Robin part.
pub type BetaFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// A fully specified model problem `-div(A grad u) + V u = f` with its
/// boundary layout, scalar kind and (for Helmholtz) wavenumber. The fields
/// are point-evaluable everywhere; assembly samples them at fine-cell
/// centers and boundary-segment midpoints.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub kind: ScalarKind,
    pub layout: BcLayout,
    pub a: CoeffFn,
    /// Zeroth-order coefficient; identically 0 or positive for real
    /// problems, `-k^2 (|xi_V| + 0.5)` for the rough Helmholtz scenario.
    pub v: CoeffFn,
    /// Robin coefficient, present only when the layout has Robin sides.
    pub beta: Option<BetaFn>,
    /// Benchmark right-hand side (real-valued in all built-in scenarios).
    pub f: CoeffFn,
    pub k: Option<f64>,
    /// (min, max) of A over the 1024^2 midpoint sample grid.
    pub a_bounds: (f64, f64),
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("layout", &self.layout)
            .field("k", &self.k)
            .field("a_bounds", &self.a_bounds)
            .finish_non_exhaustive()
    }
}

/// The five scales of the periodic benchmark coefficient.
pub const PERIODIC_EPS: [f64; 5] = [1.0 / 5.0, 1.0 / 13.0, 1.0 / 17.0, 1.0 / 31.0, 1.0 / 65.0];

/// Periodic multiscale diffusion coefficient: a 1/6-weighted sum of five
/// trigonometric ratio terms (scales 1/5 down to 1/65) plus a smooth
/// `sin(4 x1^2 x2^2) + 1` background. Strictly positive on the square.
pub fn periodic_multiscale_a(x1: f64, x2: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let [e1, e2, e3, e4, e5] = PERIODIC_EPS;
    let sum = (1.1 + (tau * x1 / e1).sin()) / (1.1 + (tau * x2 / e1).sin())
        + (1.1 + (tau * x2 / e2).sin()) / (1.1 + (tau * x1 / e2).cos())
        + (1.1 + (tau * x1 / e3).cos()) / (1.1 + (tau * x2 / e3).sin())
        + (1.1 + (tau * x2 / e4).sin()) / (1.1 + (tau * x1 / e4).cos())
        + (1.1 + (tau * x1 / e5).cos()) / (1.1 + (tau * x2 / e5).sin())
        + (4.0 * x1 * x1 * x2 * x2).sin()
        + 1.0;
    sum / 6.0
}

/// Inclusion centers of the high-contrast coefficient: the 7 x 7 lattice
/// `{0.2, 0.3, ..., 0.8}^2`.
pub fn high_contrast_centers() -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(49);
    for j in 0..7 {
        for i in 0..7 {
            pts.push((0.2 + 0.1 * i as f64, 0.2 + 0.1 * j as f64));
        }
    }
    pts
}

/// Distance threshold around the inclusion centers.
pub const HIGH_CONTRAST_RADIUS: f64 = 0.015;

/// High-contrast coefficient: `contrast` within distance 0.015 of the
/// inclusion lattice, 1 elsewhere. `contrast >= 1` is validated where
/// scenarios are built.
pub fn high_contrast_a(x1: f64, x2: f64, contrast: f64) -> f64 {
    debug_assert!(contrast >= 1.0);
    let r2 = HIGH_CONTRAST_RADIUS * HIGH_CONTRAST_RADIUS;
    for (cx, cy) in high_contrast_centers() {
        let (dx, dy) = (x1 - cx, x2 - cy);
        if dx * dx + dy * dy <= r2 {
            return contrast;
        }
    }
    1.0
}

/// Number of cells per side of the random-field lattice.
pub const FIELD_GRID: usize = 128;

/// A realization of the piecewise-bilinear Gaussian random field on the
/// `2^-7` lattice. Node values are i.i.d. standard normal, drawn from a
/// seeded ChaCha8 stream through an explicit Box-Muller transform in fixed
/// row-major order (y-index outer, x-index inner), so a seed pins the
/// realization bit-for-bit across platforms.
#[derive(Debug, Clone)]
pub struct RandomField {
    seed: u64,
    values: Vec<f64>,
}

impl RandomField {
    pub fn standard_normal(seed: u64) -> RandomField {
        let n = FIELD_GRID + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(n * n);
        let mut pending: Option<f64> = None;
        for _ in 0..n * n {
            let z = match pending.take() {
                Some(z) => z,
                None => {
                    // Box-Muller: u1 in (0, 1] so the log stays finite.
                    let u1: f64 = 1.0 - rng.gen::<f64>();
                    let u2: f64 = rng.gen();
                    let r = (-2.0 * u1.ln()).sqrt();
                    let theta = 2.0 * std::f64::consts::PI * u2;
                    pending = Some(r * theta.sin());
                    r * theta.cos()
                }
            };
            values.push(z);
        }
        RandomField { seed, values }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Node value `xi_{i,j}`.
    pub fn node(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= FIELD_GRID && j <= FIELD_GRID);
        self.values[j * (FIELD_GRID + 1) + i]
    }

    /// Piecewise-bilinear evaluation. Points with a coordinate equal to 1
    /// clamp onto the last lattice cell, which extends the field
    /// continuously to the closed square.
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let g = FIELD_GRID as f64;
        let (tx, ty) = (x1 * g, x2 * g);
        let i = (tx.floor() as usize).min(FIELD_GRID - 1);
        let j = (ty.floor() as usize).min(FIELD_GRID - 1);
        let (fi, fj) = (i as f64, j as f64);
        let a11 = (fi + 1.0 - tx) * (fj + 1.0 - ty);
        let a21 = (tx - fi) * (fj + 1.0 - ty);
        let a12 = (fi + 1.0 - tx) * (ty - fj);
        let a22 = (tx - fi) * (ty - fj);
        a11 * self.node(i, j)
            + a21 * self.node(i + 1, j)
            + a12 * self.node(i, j + 1)
            + a22 * self.node(i + 1, j + 1)
    }
}

/// Named scenarios with their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    /// Periodic five-scale diffusion, all-Dirichlet, `f = -1`.
    Periodic,
    /// High-contrast inclusions, all-Dirichlet, `f = x1^4 - x2^3 + 1`.
    HighContrast { contrast: f64 },
    /// Rough Helmholtz medium with mixed boundary conditions and three
    /// independent field realizations for A, |V|/k^2 and Im(beta)/k.
    HelmholtzRough { k: f64, seeds: [u64; 3] },
    /// Constant coefficients on the all-Dirichlet layout.
    Custom { a: f64, v: f64, f: f64 },
}

/// Sample grid used for the stored `a_bounds` of a scenario.
const BOUNDS_GRID: usize = 1024;

fn a_bounds_over_sample_grid(a: &CoeffFn) -> (f64, f64) {
    let n = BOUNDS_GRID;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for j in 0..n {
        let y = (j as f64 + 0.5) / n as f64;
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            let v = a(x, y);
            min = min.min(v);
            max = max.max(v);
        }
    }
    (min, max)
}

/// Build a fully populated problem description for a scenario.
pub fn make_scenario(kind: &ScenarioKind) -> Result<ProblemSpec> {
    let spec = match kind {
        ScenarioKind::Periodic => {
            let a: CoeffFn = Arc::new(|x, y| periodic_multiscale_a(x, y));
            let a_bounds = a_bounds_over_sample_grid(&a);
            ProblemSpec {
                name: "periodic".into(),
                kind: ScalarKind::Real,
                layout: BcLayout::AllDirichlet,
                a,
                v: Arc::new(|_, _| 0.0),
                beta: None,
                f: Arc::new(|_, _| -1.0),
                k: None,
                a_bounds,
            }
        }
        ScenarioKind::HighContrast { contrast } => {
            let m = *contrast;
            if !(m >= 1.0) {
                return Err(Error::InvalidScenario(format!(
                    "high-contrast parameter must be >= 1, got {m}"
                )));
            }
            let a: CoeffFn = Arc::new(move |x, y| high_contrast_a(x, y, m));
            ProblemSpec {
                name: format!("high_contrast_{m:.0}"),
                kind: ScalarKind::Real,
                layout: BcLayout::AllDirichlet,
                a,
                v: Arc::new(|_, _| 0.0),
                beta: None,
                f: Arc::new(|x, y| x.powi(4) - y.powi(3) + 1.0),
                k: None,
                a_bounds: (1.0, m),
            }
        }
        ScenarioKind::HelmholtzRough { k, seeds } => {
            let k = *k;
            if !(k > 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "helmholtz scenario needs a positive wavenumber, got {k}"
                )));
            }
            let xi_a = RandomField::standard_normal(seeds[0]);
            let xi_v = RandomField::standard_normal(seeds[1]);
            let xi_b = RandomField::standard_normal(seeds[2]);
            let a: CoeffFn = Arc::new(move |x, y| xi_a.eval(x, y).abs() + 0.5);
            let a_bounds = a_bounds_over_sample_grid(&a);
            let k2 = k * k;
            ProblemSpec {
                name: format!("helmholtz_rough_k{k:.0}"),
                kind: ScalarKind::Complex,
                layout: BcLayout::Mixed,
                a,
                v: Arc::new(move |x, y| -k2 * (xi_v.eval(x, y).abs() + 0.5)),
                beta: Some(Arc::new(move |x, y| {
                    Complex64::new(0.0, k * (xi_b.eval(x, y).abs() + 0.5))
                })),
                f: Arc::new(|x, y| x.powi(4) - y.powi(3) + 1.0),
                k: Some(k),
                a_bounds,
            }
        }
        ScenarioKind::Custom { a, v, f } => {
            let (a0, v0, f0) = (*a, *v, *f);
            if !(a0 > 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "custom diffusion constant must be positive, got {a0}"
                )));
            }
            if !(v0 >= 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "custom zeroth-order constant must be nonnegative for real problems, got {v0}"
                )));
            }
            ProblemSpec {
                name: "custom".into(),
                kind: ScalarKind::Real,
                layout: BcLayout::AllDirichlet,
                a: Arc::new(move |_, _| a0),
                v: Arc::new(move |_, _| v0),
                beta: None,
                f: Arc::new(move |_, _| f0),
                k: None,
                a_bounds: (a0, a0),
            }
        }
    };
    debug_assert!(spec.a_bounds.0 > 0.0, "diffusion coefficient lost positivity");
    Ok(spec)
}
