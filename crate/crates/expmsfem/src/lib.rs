//! Exponentially convergent multiscale finite elements on the unit square.
//!
//! The library solves second-order problems `-div(A grad u) + V u = f` with
//! mixed Dirichlet/Neumann/Robin boundary conditions, covering both rough
//! elliptic coefficients and heterogeneous Helmholtz equations. The solution
//! is split per coarse element into a coefficient-harmonic part and a local
//! bubble part; the harmonic part is approximated by nodal multiscale basis
//! functions plus edge modes obtained from a local singular value problem,
//! whose values decay nearly exponentially and make a few modes per edge
//! sufficient.
//!
//! Module map:
//! - [`mesh`]: two-level tensor-product quadrilateral meshes and boundary
//!   classification;
//! - [`coeffs`]: benchmark coefficient families (periodic, high-contrast,
//!   random-field Helmholtz) and problem descriptions;
//! - [`numerics`]: banded/sparse symmetric solvers and dense generalized
//!   eigensolvers shared by the pipeline;
//! - [`fem`]: bilinear (Q1) assembly, reference solves and norms on the fine
//!   mesh;
//! - [`localops`]: local harmonic extensions, bubbles, edge restrictions and
//!   the localized online part;
//! - [`spectral`]: per-edge singular bases of the restricted harmonic spaces;
//! - [`galerkin`]: offline space assembly, the effective coarse solve and
//!   error reports.

pub mod coeffs;
pub mod error;
pub mod fem;
pub mod galerkin;
pub mod localops;
pub mod mesh;
pub mod numerics;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;
