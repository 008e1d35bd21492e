//! Shared fixtures for the benches in `benches/`.

use rhg_core::elliptic::mesh::MeshOptions;
use rhg_core::pipeline::Pipeline;
use rhg_core::MeshDims;

/// Shapes timed by every bench: square, generic, near-hexagonal.
pub const SHAPES: [f64; 3] = [0.0, 0.5, 1.0];

/// A complete run on the standard mesh, skipping the minimum check so that
/// every shape in [`SHAPES`] succeeds.
pub fn rh_pipeline(rho: f64) -> Pipeline {
    Pipeline::run_unchecked(rho, MeshDims::RH, MeshOptions::default()).expect("pipeline")
}
