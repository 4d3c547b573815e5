//! Diffusion elements on quadrilaterals and polygons built on the splitting
//! of the element stiffness into a geometric consistency part and a rank-one
//! hourglass part, `K = A + tau B`.
//!
//! * [`decomposition`] computes `A`, `B = gamma gamma^T` and the barycentric
//!   expansion without quadrature.
//! * [`isoparametric`] is the quadrature path (bilinear elements, hourglass
//!   energy, closed forms on rectangles and parallelograms).
//! * [`projector`] and [`vem`] give the lowest-order virtual element matrices.
//! * [`assembly`] and [`solver`] assemble and solve Dirichlet problems.
//! * [`experiments`] drives the hourglass and manufactured-solution studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod decomposition;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod isoparametric;
pub mod mesh;
pub mod projector;
pub mod solver;
pub mod vem;

pub use assembly::{
    apply_dirichlet, assemble_global, boundary_values_from_fn, solve, solve_dirichlet,
    GlobalSystem, Scheme, Solution, SparseSystem,
};
pub use decomposition::{DiffusionTensor, ElementDecomposition, GbcExpansion};
pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{Point, Polygon, Quad, Vector};
pub use isoparametric::QuadratureRule;
pub use mesh::{make_structured_quad_mesh, perturb_mesh, Mesh, Rect};
pub use projector::{LinearPolynomial, P0Choice};
pub use solver::{CsrMatrix, SolveOptions, SolveReport};
pub use vem::{TauPolicy, VemElement};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
