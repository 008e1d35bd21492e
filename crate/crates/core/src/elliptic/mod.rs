//! Symmetric Weierstrass ℘: invariants, lattice-sum oracle and the conformal
//! mesh that replaces series evaluation in the production path.

pub mod chart;
pub mod lattice_sum;
pub mod mesh;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::TorusParams;

pub use chart::{Chart, Extended};
pub use lattice_sum::{wp_lattice_sum, wp_lattice_sum_extrapolated, ORACLE_CUTOFF};
pub use mesh::{build_quarter_mesh, MeshDims, MeshField, MeshOptions, QuarterMesh};

/// Cutoff used when computing invariants in the pipeline.
pub const INVARIANT_CUTOFF: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticConstants {
    /// ℘(omega1)
    pub e1: Complex64,
    /// ℘(omega2)
    pub e2: Complex64,
    /// ℘(omega1 + omega2)
    pub e3: Complex64,
    pub g2: Complex64,
    pub g3: Complex64,
    /// sqrt((e1 - e3)(e3 - e2)) with Im c < 0
    pub c: Complex64,
}

impl EllipticConstants {
    pub fn cubic_residual(&self, t: Complex64) -> f64 {
        (4.0 * t * t * t - self.g2 * t - self.g3).norm()
    }

    /// `e^{i rho} - (e2 - e3) / c`; vanishes exactly.
    pub fn branch_residual(&self, rho: f64) -> Complex64 {
        Complex64::from_polar(1.0, rho) - (self.e2 - self.e3) / self.c
    }
}

/// Roots of `4 t^3 - g2 t - g3`, Cardano then two Newton steps.
pub fn cubic_roots(g2: Complex64, g3: Complex64) -> [Complex64; 3] {
    let p = -g2 / 4.0;
    let q = -g3 / 4.0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let c1 = -q / 2.0 + disc;
    let c2 = -q / 2.0 - disc;
    let base = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let u0 = base.powf(1.0 / 3.0);
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    let mut u = u0;
    for r in roots.iter_mut() {
        *r = if u.norm() == 0.0 { u } else { u - p / (3.0 * u) };
        u *= w;
    }
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let f = 4.0 * *r * *r * *r - g2 * *r - g3;
            let df = 12.0 * *r * *r - g2;
            if df.norm() > 0.0 {
                *r -= f / df;
            }
        }
    }
    roots
}

pub fn invariants(params: &TorusParams, cutoff: usize) -> Result<EllipticConstants> {
    let (g2, g3) = lattice_sum::eisenstein(params, cutoff);
    let roots = cubic_roots(g2, g3);
    let targets = [
        wp_lattice_sum_extrapolated(params.omega1, params, cutoff)?,
        wp_lattice_sum_extrapolated(params.omega2, params, cutoff)?,
        wp_lattice_sum_extrapolated(params.omega1 + params.omega2, params, cutoff)?,
    ];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best = (f64::INFINITY, perms[0]);
    for perm in perms {
        let miss = (0..3)
            .map(|i| (roots[perm[i]] - targets[i]).norm())
            .fold(0.0, f64::max);
        if miss < best.0 {
            best = (miss, perm);
        }
    }
    // g2 vanishes on the hexagonal lattice, so measure against the roots
    let scale = targets.iter().map(|t| t.norm()).fold(g2.norm().sqrt(), f64::max).max(1e-300);
    if best.0 > 1e-6 * scale {
        return Err(Error::RootLabeling(best.0));
    }
    let [e1, e2, e3] = best.1.map(|i| roots[i]);
    let mut c = ((e1 - e3) * (e3 - e2)).sqrt();
    if c.im > 0.0 {
        c = -c;
    }
    Ok(EllipticConstants { e1, e2, e3, g2, g3, c })
}

/// Symmetric ℘ through the lattice-sum oracle:
/// `(℘(z - omega1 - omega2) - e3) / c`.
pub fn wp_symmetric(z: Complex64, params: &TorusParams, consts: &EllipticConstants) -> Extended {
    let shifted = z - params.omega1 - params.omega2;
    match wp_lattice_sum_extrapolated(shifted, params, ORACLE_CUTOFF) {
        Ok(w) => Extended::Finite((w - consts.e3) / consts.c),
        Err(_) => Extended::Infinity,
    }
}
