//! Nonconforming virtual element discretization of the steady Stokes
//! equations on general polygonal meshes.
//!
//! The crate is organized bottom-up:
//!
//! * [`mesh`]: polygonal meshes, generators, geometry and quadrature;
//! * [`poly`]: scaled monomial bases, Gram matrices and L2 projections;
//! * [`vemlocal`]: per-element degrees of freedom, energy projector,
//!   stabilization and local matrices;
//! * [`assembly`]: global numbering, Dirichlet imposition and the saddle-point system;
//! * [`linsolve`]: sparse storage, direct and MINRES solvers, dense SVD;
//! * [`verify`]: manufactured solutions, error norms, convergence studies and
//!   inf-sup estimation.
//!
//! Velocity and pressure sign convention: the assembled system is
//! `[A Bᵀ; B 0]` with `b(v, q) = ∫ q div v`. The pressure block of the
//! solution vector therefore holds `-p`; [`assembly::solve_stokes`] flips the
//! sign so [`assembly::DiscreteSolution`] always stores the physical pressure.

// index loops mirror the matrix formulas they implement
#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod dense;
pub mod linsolve;
pub mod mesh;
pub mod poly;
pub mod vemlocal;
pub mod verify;

mod parallel;

pub use parallel::{thread_pool, THREADS_ENV};

/// A point in the plane.
pub type Point = [f64; 2];

/// Highest polynomial degree supported by the element construction.
pub const MAX_DEGREE: usize = 5;
