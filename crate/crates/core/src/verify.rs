//! Accuracy protocol: refinement comparison, identity residuals, the theta
//! oracle and a discrete Laplacian, gathered into one report.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::mesh::{MeshDims, MeshOptions, QuarterMesh};
use crate::error::{Error, Result};
use crate::green::GreenResult;
use crate::pipeline::Pipeline;
use crate::theta::{calibrate, green_theta, ThetaParams};
use crate::zeta::{legendre_classical, legendre_residual};

/// Gates of the report.
pub mod tolerances {
    /// |Im 2(eta1 w2 - eta2 w1) - pi|
    pub const LEGENDRE: f64 = 5e-4;
    /// |e^{i rho} - (e2 - e3)/c|
    pub const BRANCH: f64 = 1e-5;
    pub const REFINEMENT_RH: f64 = 2e-3;
    pub const REFINEMENT_RH4: f64 = 1e-4;
    pub const FITTING_GAP: f64 = 1e-8;
    pub const NONNEG: f64 = -1e-9;
    pub const THETA_RH: f64 = 2e-3;
    pub const THETA_RH4: f64 = 1e-3;
    /// |4 (A + B) |T| - 1|
    pub const AREA: f64 = 1e-6;
    pub const PERIODICITY: f64 = 1e-6;
    /// relative error of the discrete Laplacian of G
    pub const LAPLACIAN: f64 = 0.02;
    /// mesh ℘ vs lattice-sum ℘
    pub const NORMALIZATION: f64 = 1e-6;
    /// correction constants, closed form vs mesh differences
    pub const CORRECTION: f64 = 1e-5;
}

/// Nodes closer than this (unit area) to the source are left out of the
/// Laplacian check.
pub const LAPLACIAN_EXCLUSION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Rh,
    Rh4,
}

impl Profile {
    pub fn standard(self) -> MeshDims {
        match self {
            Profile::Rh => MeshDims::RH,
            Profile::Rh4 => MeshDims::RH4,
        }
    }

    pub fn refined(self) -> MeshDims {
        match self {
            Profile::Rh => MeshDims::RH_REFINED,
            Profile::Rh4 => MeshDims::RH4_REFINED,
        }
    }

    fn refinement_tolerance(self) -> f64 {
        match self {
            Profile::Rh => tolerances::REFINEMENT_RH,
            Profile::Rh4 => tolerances::REFINEMENT_RH4,
        }
    }

    fn theta_tolerance(self) -> f64 {
        match self {
            Profile::Rh => tolerances::THETA_RH,
            Profile::Rh4 => tolerances::THETA_RH4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Refinement {
    pub max_error: f64,
    /// unit-area point of the largest difference
    pub at: Complex64,
    pub nodes: usize,
}

/// Options for a refined run whose nodes contain those of `coarse`.
pub fn nested_options(coarse: &QuarterMesh, refined: MeshDims) -> Result<MeshOptions> {
    let (fr, _) = nesting_factors(coarse.dims, refined)?;
    Ok(MeshOptions {
        split: Some(coarse.split * fr),
        ..coarse.options
    })
}

fn nesting_factors(coarse: MeshDims, refined: MeshDims) -> Result<(usize, usize)> {
    let ratio = |c: usize, f: usize| {
        if (f - 1) % (c - 1) == 0 {
            Some((f - 1) / (c - 1))
        } else {
            None
        }
    };
    match (ratio(coarse.rows, refined.rows), ratio(coarse.cols, refined.cols)) {
        (Some(r), Some(c)) if r * c > 1 => Ok((r, c)),
        _ => Err(Error::Mesh(format!(
            "{}x{} is not a nested refinement of {}x{}",
            refined.rows, refined.cols, coarse.rows, coarse.cols
        ))),
    }
}

/// Largest difference of G between two runs at the nodes they share.
pub fn refinement_between(coarse: &Pipeline, fine: &Pipeline) -> Result<Refinement> {
    let (fr, fc) = nesting_factors(coarse.mesh.dims, fine.mesh.dims)?;
    let mut worst = Refinement {
        max_error: 0.0,
        at: Complex64::new(0.0, 0.0),
        nodes: 0,
    };
    let (gc, gf) = (&coarse.green, &fine.green);
    let pairs = [
        (&gc.half, &gf.half, &coarse.mesh.half, &fine.mesh.half),
        (&gc.mirror, &gf.mirror, &coarse.mesh.mirror, &fine.mesh.mirror),
    ];
    for (cf, ff, cm, fm) in pairs {
        for k in 0..cf.rows {
            for j in cf.col_offset..cf.col_offset + cf.cols {
                let (kf, jf) = (k * fr, j * fc);
                if jf < ff.col_offset {
                    continue;
                }
                let (wc, vc) = cf.at(k, j - cf.col_offset);
                let (_, vf) = ff.at(kf, jf - ff.col_offset);
                // nodes are identified by their ℘-value, which is exact
                let (pc, pf) = (cm.at(k, j - cm.col_offset).0, fm.at(kf, jf - fm.col_offset).0);
                if (pc - pf).norm() > 1e-12 {
                    return Err(Error::Mesh(format!("node ({k},{j}) moved under refinement: {pc} vs {pf}")));
                }
                let d = (vc - vf).abs();
                if d.is_nan() {
                    return Err(Error::Mesh(format!("NaN in G at node ({k},{j})")));
                }
                worst.nodes += 1;
                if d > worst.max_error {
                    worst.max_error = d;
                    worst.at = wc;
                }
            }
        }
    }
    Ok(worst)
}

/// Runs both meshes and compares G at the coarse nodes.
pub fn refinement_compare(rho: f64, standard: MeshDims, refined: MeshDims) -> Result<Refinement> {
    let coarse = Pipeline::run_unchecked(rho, standard, MeshOptions::default())?;
    let options = nested_options(&coarse.mesh, refined)?;
    let fine = Pipeline::run_unchecked(rho, refined, options)?;
    refinement_between(&coarse, &fine)
}

/// Largest |G_theta - G_mesh| over all mesh nodes away from the source.
pub fn theta_max_diff(green: &GreenResult, tp: &ThetaParams) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (w, g) in green.nodes() {
        let t = green_theta(w, &green.params, tp)?;
        if t.is_finite() && g.is_finite() {
            worst = worst.max((t - g).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplacianCheck {
    /// max |Delta G - 1| over the checked nodes (unit area, so the target is 1)
    pub max_error: f64,
    pub mean: f64,
    pub nodes: usize,
}

/// Laplacian of G from least-squares cubics over 5x5 index stencils.
/// In unit-area coordinates `Delta G = 1` away from the source.
pub fn laplacian_check(green: &GreenResult) -> LaplacianCheck {
    const R: usize = 2;
    let src = green.params.source() / green.params.k;
    let mut max_error: f64 = 0.0;
    let mut sum = 0.0;
    let mut nodes = 0;
    for f in [&green.half, &green.mirror] {
        // columns next to the apex collapse onto one point
        let first = if f.col_offset == 0 { R + 1 } else { R };
        for k in R..f.rows - R {
            for j in first..f.cols - R {
                let (w0, _) = f.at(k, j);
                if (w0 - src).norm() < LAPLACIAN_EXCLUSION {
                    continue;
                }
                let pts: Vec<(Complex64, f64)> = (0..(2 * R + 1) * (2 * R + 1))
                    .map(|s| f.at(k + s / (2 * R + 1) - R, j + s % (2 * R + 1) - R))
                    .collect();
                if let Some(lap) = cubic_laplacian(w0, &pts) {
                    max_error = max_error.max((lap - 1.0).abs());
                    sum += lap;
                    nodes += 1;
                }
            }
        }
    }
    LaplacianCheck {
        max_error,
        mean: if nodes > 0 { sum / nodes as f64 } else { f64::NAN },
        nodes,
    }
}

fn cubic_laplacian(center: Complex64, pts: &[(Complex64, f64)]) -> Option<f64> {
    let h = pts.iter().map(|(w, _)| (w - center).norm()).fold(0.0, f64::max);
    if h == 0.0 {
        return None;
    }
    let a = DMatrix::from_fn(pts.len(), 10, |r, c| {
        let d = (pts[r].0 - center) / h;
        let (x, y) = (d.re, d.im);
        [1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y][c]
    });
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let svd = a.svd(true, true);
    let s = &svd.singular_values;
    if s.min() < 1e-10 * s.max() {
        return None;
    }
    let x = svd.solve(&b, 1e-14).ok()?;
    Some(2.0 * (x[3] + x[5]) / (h * h))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// informational checks do not affect the overall verdict
    pub gated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub rho: f64,
    pub profile: Profile,
    pub mesh_standard: MeshDims,
    pub mesh_refined: MeshDims,
    /// Im 2(eta1 w2 - eta2 w1) with the classical constants (pi exactly)
    pub legendre_value: f64,
    /// |4|c|(eta2 w1 - eta1 w2) - pi| with the symmetric constants
    pub legendre_symmetric_residual: f64,
    pub branch_residual: Complex64,
    pub max_refinement_error: f64,
    pub refinement_at: Complex64,
    pub fitting_gap: f64,
    pub nonneg_min: f64,
    pub min_location: Complex64,
    pub theta_max_diff: f64,
    pub area_identity: f64,
    pub periodicity_residual: f64,
    pub laplacian_max_error: f64,
    pub normalization_residual: f64,
    pub correction_mismatch: f64,
    pub c: Complex64,
    pub d: Complex64,
    pub checks: Vec<Check>,
    /// failures that prevented a check from running
    pub errors: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Aligned two-column text table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "rho = {}  profile = {:?}  mesh {}x{} / {}x{}\n",
            self.rho,
            self.profile,
            self.mesh_standard.rows,
            self.mesh_standard.cols,
            self.mesh_refined.rows,
            self.mesh_refined.cols
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<24} {:>17.9e}  tol {:>9.2e}  {}\n",
                c.name,
                c.value,
                c.tolerance,
                match (c.pass, c.gated) {
                    (true, _) => "pass",
                    (false, true) => "FAIL",
                    (false, false) => "(info)",
                }
            ));
        }
        for e in &self.errors {
            out.push_str(&format!("error: {e}\n"));
        }
        out.push_str(if self.pass { "all checks pass\n" } else { "some checks FAILED\n" });
        out
    }
}

fn gate(name: &'static str, value: f64, tolerance: f64, pass: bool) -> Check {
    Check {
        name,
        value,
        tolerance,
        pass: pass && value.is_finite(),
        gated: true,
    }
}

/// Runs every check for one shape. Failures are recorded in the report.
pub fn full_report(rho: f64, profile: Profile) -> VerificationReport {
    full_report_with(rho, profile, profile.standard(), profile.refined())
}

/// [`full_report`] on explicit meshes. `refined` must nest `standard`.
pub fn full_report_with(rho: f64, profile: Profile, standard: MeshDims, refined: MeshDims) -> VerificationReport {
    let mut r = VerificationReport {
        rho,
        profile,
        mesh_standard: standard,
        mesh_refined: refined,
        legendre_value: f64::NAN,
        legendre_symmetric_residual: f64::NAN,
        branch_residual: Complex64::new(f64::NAN, f64::NAN),
        max_refinement_error: f64::NAN,
        refinement_at: Complex64::new(f64::NAN, f64::NAN),
        fitting_gap: f64::NAN,
        nonneg_min: f64::NAN,
        min_location: Complex64::new(f64::NAN, f64::NAN),
        theta_max_diff: f64::NAN,
        area_identity: f64::NAN,
        periodicity_residual: f64::NAN,
        laplacian_max_error: f64::NAN,
        normalization_residual: f64::NAN,
        correction_mismatch: f64::NAN,
        c: Complex64::new(f64::NAN, f64::NAN),
        d: Complex64::new(f64::NAN, f64::NAN),
        checks: Vec::new(),
        errors: Vec::new(),
        pass: false,
    };
    let coarse = match Pipeline::run_unchecked(rho, standard, MeshOptions::default()) {
        Ok(p) => p,
        Err(e) => {
            r.errors.push(format!("standard pipeline: {e}"));
            return r;
        }
    };
    let p = &coarse.params;
    let zc = &coarse.zeta_constants;
    let diag = &coarse.green.diagnostics;
    r.legendre_value = legendre_classical(zc, p).im;
    r.legendre_symmetric_residual = legendre_residual(zc, p, &coarse.consts);
    r.branch_residual = coarse.consts.branch_residual(rho);
    r.fitting_gap = diag.fitting_gap;
    r.nonneg_min = diag.min_value;
    r.min_location = coarse.green.min_location;
    r.area_identity = diag.area_identity;
    r.periodicity_residual = diag.periodicity_residual;
    r.normalization_residual = coarse.normalization.residual;
    r.correction_mismatch = diag.correction_mismatch;
    r.c = coarse.consts.c;
    r.d = zc.d;

    match nested_options(&coarse.mesh, refined)
        .and_then(|o| Pipeline::run_unchecked(rho, refined, o))
        .and_then(|fine| refinement_between(&coarse, &fine))
    {
        Ok(f) => {
            r.max_refinement_error = f.max_error;
            r.refinement_at = f.at;
        }
        Err(e) => r.errors.push(format!("refinement: {e}")),
    }
    match calibrate(p).and_then(|(tp, _)| theta_max_diff(&coarse.green, &tp)) {
        Ok(d) => r.theta_max_diff = d,
        Err(e) => r.errors.push(format!("theta oracle: {e}")),
    }
    r.laplacian_max_error = laplacian_check(&coarse.green).max_error;

    use tolerances as t;
    let rt = profile.refinement_tolerance();
    let tt = profile.theta_tolerance();
    r.checks = vec![
        gate("legendre", r.legendre_value, t::LEGENDRE, (r.legendre_value - PI).abs() <= t::LEGENDRE),
        gate(
            "branch_residual",
            r.branch_residual.norm(),
            t::BRANCH,
            r.branch_residual.norm() < t::BRANCH,
        ),
        gate("refinement", r.max_refinement_error, rt, r.max_refinement_error < rt),
        gate("fitting_gap", r.fitting_gap, t::FITTING_GAP, r.fitting_gap <= t::FITTING_GAP),
        gate("nonneg_min", r.nonneg_min, t::NONNEG, r.nonneg_min >= t::NONNEG),
        gate("theta_max_diff", r.theta_max_diff, tt, r.theta_max_diff <= tt),
        gate(
            "area_identity",
            r.area_identity,
            t::AREA,
            (r.area_identity - 1.0).abs() <= t::AREA,
        ),
        gate(
            "periodicity",
            r.periodicity_residual,
            t::PERIODICITY,
            r.periodicity_residual < t::PERIODICITY,
        ),
        gate(
            "laplacian",
            r.laplacian_max_error,
            t::LAPLACIAN,
            r.laplacian_max_error <= t::LAPLACIAN,
        ),
        gate(
            "normalization",
            r.normalization_residual,
            t::NORMALIZATION,
            r.normalization_residual <= t::NORMALIZATION,
        ),
        gate(
            "correction_constants",
            r.correction_mismatch,
            t::CORRECTION,
            r.correction_mismatch <= t::CORRECTION,
        ),
    ];
    // the Laplacian is only resolved to 2% on the rh4 mesh
    if profile == Profile::Rh {
        if let Some(c) = r.checks.iter_mut().find(|c| c.name == "laplacian") {
            c.gated = false;
        }
    }
    r.pass = r.errors.is_empty() && r.checks.iter().all(|c| c.pass || !c.gated);
    r
}
