//! Orthosymplectic dynamical reduced basis methods.
//!
//! Parameterized canonical Hamiltonian systems `du/dt = J grad H(u; eta)` are
//! approximated by `R(t) = U(t) Z(t)^T`, where the basis `U` evolves on the
//! manifold of orthosymplectic `2m x 2k` matrices and the coefficients `Z`
//! follow the reduced Hamiltonian dynamics. The crate provides the geometric
//! building blocks (Cayley retraction, low-rank Lie-algebra factors), the
//! two structure-preserving basis integrators, a partitioned coupled step,
//! shallow-water and oscillator test models and a global reduced basis
//! baseline, together with the experiment driver used by the CLI.

pub mod bch;
pub mod cayley;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod global_rbm;
pub mod integrators;
pub mod models;
pub mod sampling;
pub mod symplectic;

pub use error::{Error, Result};

/// Dense real matrix used throughout the crate (column-major).
pub type Mat = nalgebra::DMatrix<f64>;
