//! One full run: periods, invariants, mesh, zeta, Zfrak and G.

use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::lattice_sum::wp_lattice_sum_extrapolated;
use crate::elliptic::mesh::{build_quarter_mesh_with, MeshDims, MeshOptions, QuarterMesh};
use crate::elliptic::{invariants, EllipticConstants, INVARIANT_CUTOFF, ORACLE_CUTOFF};
use crate::error::{Error, Result};
use crate::green::{assemble_green, bigz_field, correction_constants, BigZField, GreenResult};
use crate::lattice::{torus_from_rho, TorusParams};
use crate::zeta::{zeta_constants, zeta_mesh, ZetaConstants, ZetaField};

/// Candidate ℘ normalizations `(s, r)`: the mesh ℘ is compared with
/// `s * ℘_lattice(r * u)`.
pub const NORMALIZATION_CANDIDATES: [(f64, f64); 2] = [(1.0, 1.0), (0.5, std::f64::consts::FRAC_1_SQRT_2)];
/// Nodes sampled by the normalization detector.
pub const DETECTOR_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationFit {
    pub wp_scale: f64,
    pub arg_scale: f64,
    /// max |℘_mesh - s ℘_lattice(r u)| over the sample nodes
    pub residual: f64,
    /// the same for every candidate, in [`NORMALIZATION_CANDIDATES`] order
    pub all: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct Pipeline {
    pub params: TorusParams,
    pub consts: EllipticConstants,
    pub mesh: QuarterMesh,
    pub zeta: ZetaField,
    pub zeta_constants: ZetaConstants,
    pub bigz: BigZField,
    pub normalization: NormalizationFit,
    pub green: GreenResult,
}

impl Pipeline {
    /// Full run; fails unless the minimum of G is 0 at the origin.
    pub fn run(rho: f64, dims: MeshDims) -> Result<Pipeline> {
        Pipeline::run_with(rho, dims, MeshOptions::default())
    }

    pub fn run_with(rho: f64, dims: MeshDims, options: MeshOptions) -> Result<Pipeline> {
        let p = Pipeline::run_unchecked(rho, dims, options)?;
        p.green.check_minimum()?;
        Ok(p)
    }

    /// Full run that leaves the location and sign of the minimum to the
    /// caller (see [`GreenResult::check_minimum`]).
    pub fn run_unchecked(rho: f64, dims: MeshDims, options: MeshOptions) -> Result<Pipeline> {
        let params = torus_from_rho(rho)?;
        let consts = invariants(&params, INVARIANT_CUTOFF)?;
        let mesh = build_quarter_mesh_with(&params, dims, options)?;
        let normalization = detect_normalization(&mesh, &consts)?;
        let zeta = zeta_mesh(&mesh, &consts)?;
        let zc = zeta_constants(&zeta, &mesh, &consts)?;
        let bigz = bigz_field(&mesh, &zeta, &consts)?;
        let corr = correction_constants(&zc, &params, &consts);
        let green = assemble_green(
            &bigz,
            &corr,
            &mesh,
            &zc,
            &consts,
            (normalization.wp_scale, normalization.arg_scale),
        )?;
        log::debug!("rho {rho}: pipeline on {}x{} done", dims.rows, dims.cols);
        Ok(Pipeline {
            params,
            consts,
            mesh,
            zeta,
            zeta_constants: zc,
            bigz,
            normalization,
            green,
        })
    }
}

/// Spread-out nodes of `S` used to compare the mesh ℘ with the lattice sum.
pub fn detector_nodes(mesh: &QuarterMesh) -> Vec<(usize, usize)> {
    let (n, m) = (mesh.rows(), mesh.cols());
    (0..DETECTOR_SAMPLES)
        .map(|i| {
            // a low-discrepancy walk over rows and columns, skipping the apex
            let k = (i * 37 + 11) % n;
            let j = 1 + (i * 23 + 5) % (m - 1);
            (k, j)
        })
        .collect()
}

/// Fits the ℘ convention of the mesh against the lattice sum: the mesh
/// value at a node is `c p + e3`, the lattice value `s ℘(r (z - 2a))`.
pub fn detect_normalization(mesh: &QuarterMesh, consts: &EllipticConstants) -> Result<NormalizationFit> {
    let src = mesh.params.source();
    let mut all = [0.0f64; 2];
    for (ci, &(s, r)) in NORMALIZATION_CANDIDATES.iter().enumerate() {
        for (k, j) in detector_nodes(mesh) {
            let (p, z) = mesh.half.at(k, j);
            let meshed = consts.c * p + consts.e3;
            let oracle = s * wp_lattice_sum_extrapolated(r * (z - src), &mesh.params, ORACLE_CUTOFF)?;
            all[ci] = all[ci].max((meshed - oracle).norm());
        }
    }
    let best = if all[0] <= all[1] { 0 } else { 1 };
    let (wp_scale, arg_scale) = NORMALIZATION_CANDIDATES[best];
    if !all[best].is_finite() {
        return Err(Error::Inconsistent {
            what: "℘ normalization (mesh vs lattice sum)",
            first: all[0],
            second: all[1],
        });
    }
    Ok(NormalizationFit {
        wp_scale,
        arg_scale,
        residual: all[best],
        all,
    })
}

/// Mesh-derived classical ℘ at the node `(k, j)` of `S`, with its torus point.
pub fn classical_wp_at(mesh: &QuarterMesh, consts: &EllipticConstants, k: usize, j: usize) -> (Complex64, Complex64) {
    let (p, z) = mesh.half.at(k, j);
    (z, consts.c * p + consts.e3)
}
