//! Exact computation of Kähler Laplacian powers at the center of normal
//! coordinates, and inference or refutation of the Delta-property
//! `Δ^k φ(0) = p_k(Δ_c) φ(0)` for a catalog of Kähler potentials.

pub mod catalog;
pub mod delta;
pub mod error;
pub mod geometry;
pub mod laplace;
pub mod linalg;
pub mod ratjet;

pub use error::{Error, Result};
pub use ratjet::{BiIndex, Jet, Rational, UniSeries};
