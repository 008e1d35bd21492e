//! Green's function of the Laplacian on flat rhombic tori.
//!
//! The pipeline builds a symmetric Weierstrass ℘ by inverting it on a
//! conformal mesh, integrates it to the symmetric ζ, assembles the doubly
//! periodic Green's function and checks itself against a theta-function
//! closed form.

pub mod elliptic;
pub mod error;
pub mod export;
pub mod green;
pub mod lattice;
pub mod pipeline;
pub mod quadrature;
pub mod theta;
pub mod verify;
pub mod zeta;

pub use elliptic::{EllipticConstants, MeshDims, MeshField, QuarterMesh};
pub use error::{Error, Result};
pub use lattice::TorusParams;
pub use num_complex::Complex64;
