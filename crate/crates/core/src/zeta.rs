//! Symmetric zeta on the quarter-torus mesh and its constants.
//!
//! Normalization: `zeta(z) = -(1/2) * integral_0^z ℘`, so that the
//! symmetric-function identities take the form
//!
//! ```text
//!   4|c| (eta2 w1 - eta1 w2) = pi,     d = 2|c| Im eta1,
//!   c zeta(z) - 1/(2(z - 2a)) -> d   as z -> 2a.
//! ```
//!
//! The classical zeta in the same normalization is
//! `C - (e3/2) z + c zeta(z) = (1/2) zeta_W(z - 2a)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::chart::Chart;
use crate::elliptic::mesh::{MeshField, QuarterMesh};
use crate::elliptic::EllipticConstants;
use crate::error::{Error, Result};
use crate::lattice::TorusParams;
use crate::quadrature::{panel_samples, PARTIAL, WEIGHTS};

/// Agreement demanded between the extrapolated `d` and `2|c| Im eta1`.
pub const D_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaField {
    /// zeta on `S`, same grid as `QuarterMesh::half`
    pub half: MeshField,
    /// zeta on `S'`, same grid as `QuarterMesh::mirror`
    pub mirror: MeshField,
    /// largest disagreement between the two copies on the shared edge `x = a`
    pub seam_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaConstants {
    pub d: Complex64,
    pub c_frak: Complex64,
    pub eta1: Complex64,
    pub eta2: Complex64,
    pub eta1_classical: Complex64,
    pub eta2_classical: Complex64,
    /// spread of the per-line extrapolations of `d`
    pub d_spread: f64,
}

/// Which copy of the quarter a chord runs through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Half,
    Mirror,
}

/// Integrates the increments of zeta, and nested inside it of
/// `-(1/2pi) Re int c zeta dz`, along straight chords of the chart.
pub(crate) struct Walker<'a> {
    pub chart: &'a Chart,
    pub panels: usize,
    pub c: Complex64,
}

impl Walker<'_> {
    /// zeta increment on one chord.
    pub fn zeta(&self, from: Complex64, to: Complex64, side: Side) -> Result<Complex64> {
        let panels = self.panels_for(from, to, side);
        let samples = panel_samples(from, to, panels);
        let h = (to - from) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &s) in samples.iter().enumerate() {
            let w = if i == 0 || i == samples.len() - 1 {
                WEIGHTS[0]
            } else if i % 4 == 0 {
                2.0 * WEIGHTS[0]
            } else {
                WEIGHTS[i % 4]
            };
            acc += w * self.density(s, side)?.0;
        }
        Ok(finish(acc * h, side))
    }

    /// zeta and Zfrak increments on one chord, given zeta at its start.
    pub fn zeta_and_big(&self, from: Complex64, to: Complex64, zeta0: Complex64, side: Side) -> Result<(Complex64, f64)> {
        let panels = self.panels_for(from, to, side);
        let samples = panel_samples(from, to, panels);
        let h = (to - from) / panels as f64;
        let mut zeta = zeta0;
        let mut big = 0.0;
        let mut first = self.density(samples[0], side)?;
        for p in 0..panels {
            let mut g = [Complex64::new(0.0, 0.0); 5];
            let mut jac = [Complex64::new(0.0, 0.0); 5];
            (g[0], jac[0]) = first;
            for i in 1..5 {
                (g[i], jac[i]) = self.density(samples[4 * p + i], side)?;
            }
            first = (g[4], jac[4]);
            let mut zs = [zeta; 5];
            for i in 1..5 {
                let part: Complex64 = (0..5).map(|j| g[j] * PARTIAL[i - 1][j]).sum();
                zs[i] = zeta + finish(part * h, side);
            }
            let mut acc = 0.0;
            for i in 0..5 {
                let dz = match side {
                    Side::Half => jac[i] * h,
                    Side::Mirror => -(jac[i] * h).conj(),
                };
                acc += WEIGHTS[i] * (self.c * zs[i] * dz).re;
            }
            big -= acc / (2.0 * PI);
            zeta = zs[4];
        }
        Ok((zeta - zeta0, big))
    }

    /// Panels per chord in proportion to its length over its distance from
    /// the chart origin. On the mirror the integrand grows like `Z^-2`
    /// toward it; on `S` it is smooth there but decays like `Z^-5` toward
    /// the detour at `p = i`, where chart coordinates run off to infinity.
    fn panels_for(&self, from: Complex64, to: Complex64, side: Side) -> usize {
        let len = (to - from).norm();
        let near = from.norm().min(to.norm());
        let ratio = match side {
            Side::Half => len / near.max(len),
            Side::Mirror => len / near,
        };
        self.panels * ((4.0 * ratio).ceil() as usize).max(1)
    }

    /// Integrand of zeta in the chart and dz/dZ.
    fn density(&self, s: Complex64, side: Side) -> Result<(Complex64, Complex64)> {
        let (p, j) = self.chart.wp_and_jacobian(s);
        let g = match side {
            Side::Half => -0.5 * p * j,
            Side::Mirror => 0.5 * j / p,
        };
        if g.re.is_finite() && g.im.is_finite() && j.re.is_finite() && j.im.is_finite() {
            Ok((g, j))
        } else {
            Err(Error::NonFinite { at: s, segment: 0 })
        }
    }
}

fn finish(v: Complex64, side: Side) -> Complex64 {
    match side {
        Side::Half => v,
        Side::Mirror => v.conj(),
    }
}

/// Chords visited by both walks, in dependency order. Each entry is
/// `(side, from-node, to-node)` with nodes as `(row, full column)`.
pub(crate) fn walk_order(mesh: &QuarterMesh) -> Vec<(Side, (usize, usize), (usize, usize))> {
    let (n, m) = (mesh.rows(), mesh.cols());
    let j0 = mesh.mirror_start();
    let ks = mesh.split;
    let mut out = Vec::new();
    for k in 0..n {
        for j in 1..m {
            out.push((Side::Half, (k, j - 1), (k, j)));
        }
    }
    for k in (0..ks).rev() {
        out.push((Side::Mirror, (k + 1, m - 1), (k, m - 1)));
    }
    for k in ks + 1..n {
        out.push((Side::Mirror, (k - 1, m - 1), (k, m - 1)));
    }
    for k in 0..n {
        for j in (j0..m - 1).rev() {
            out.push((Side::Mirror, (k, j + 1), (k, j)));
        }
    }
    out
}

pub(crate) fn node_slot(mesh: &QuarterMesh, side: Side, (k, j): (usize, usize)) -> usize {
    match side {
        Side::Half => k * mesh.cols() + j,
        Side::Mirror => k * mesh.mirror.cols + (j - mesh.mirror_start()),
    }
}

pub fn zeta_mesh(mesh: &QuarterMesh, consts: &EllipticConstants) -> Result<ZetaField> {
    let walker = Walker {
        chart: &mesh.chart,
        panels: mesh.options.panels,
        c: consts.c,
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut half = vec![zero; mesh.half.value.len()];
    let mut mirror = vec![zero; mesh.mirror.value.len()];
    let (ks, last) = mesh.omega1_node();
    let mut seeded = false;
    for (side, from, to) in walk_order(mesh) {
        if side == Side::Mirror && !seeded {
            mirror[node_slot(mesh, Side::Mirror, (ks, last))] = half[node_slot(mesh, Side::Half, (ks, last))];
            seeded = true;
        }
        let start = match side {
            Side::Half => half[node_slot(mesh, side, from)],
            Side::Mirror => mirror[node_slot(mesh, side, from)],
        };
        let d = walker.zeta(mesh.chart_at(from.0, from.1), mesh.chart_at(to.0, to.1), side)?;
        match side {
            Side::Half => half[node_slot(mesh, side, to)] = start + d,
            Side::Mirror => mirror[node_slot(mesh, side, to)] = start + d,
        }
    }
    // on x = a the two copies describe the same points
    let mut seam_gap: f64 = 0.0;
    for k in ks..mesh.rows() {
        let (p, _) = mesh.half.at(k, last);
        if (p.norm() - 1.0).abs() < 1e-12 {
            let a = half[node_slot(mesh, Side::Half, (k, last))];
            let b = mirror[node_slot(mesh, Side::Mirror, (k, last))];
            seam_gap = seam_gap.max((a - b).norm());
        }
    }
    Ok(ZetaField {
        half: mesh.half.with(mesh.half.domain.clone(), half),
        mirror: mesh.mirror.with(mesh.mirror.domain.clone(), mirror),
        seam_gap,
    })
}

/// Limit of `c zeta(z) - 1/(2(z - 2a))` at the source. The difference is
/// `d` plus an odd function of `u = z - 2a`, so `d + a1 u + a3 u^3` is
/// fitted through the rings `j0, 2 j0, 4 j0` of the mirror copy on every
/// angular line. Returns the mean and the spread.
pub fn extrapolate_d(zeta: &ZetaField, mesh: &QuarterMesh, consts: &EllipticConstants) -> Result<(Complex64, f64)> {
    let j0 = mesh.mirror_start();
    let rings = [j0, 2 * j0, 4 * j0];
    let nr = rings.len();
    if rings[nr - 1] > mesh.cols() - 1 {
        return Err(Error::Mesh("mesh too coarse to extrapolate d".into()));
    }
    let src = mesh.params.source();
    let mut vals = Vec::with_capacity(mesh.rows());
    for k in 0..mesh.rows() {
        let mut a = vec![vec![Complex64::new(0.0, 0.0); nr]; nr];
        let mut rhs = vec![Complex64::new(0.0, 0.0); nr];
        for (r, &j) in rings.iter().enumerate() {
            let i = node_slot(mesh, Side::Mirror, (k, j));
            let u = mesh.mirror.value[i] - src;
            let mut pw = Complex64::new(1.0, 0.0);
            for c in 0..nr {
                a[r][c] = pw;
                pw *= if c == 0 { u } else { u * u };
            }
            rhs[r] = consts.c * zeta.mirror.value[i] - 0.5 / u;
        }
        vals.push(solve(a, rhs)[0]);
    }
    let mean = vals.iter().sum::<Complex64>() / vals.len() as f64;
    let spread = vals.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
    Ok((mean, spread))
}

/// Dense complex solve by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let t = a[col][c];
                a[r][c] -= f * t;
            }
            let t = b[col];
            b[r] -= f * t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    x
}

/// `d` from the limit at the source, checked against `2|c| Im eta1`.
pub fn compute_d(zeta: &ZetaField, mesh: &QuarterMesh, consts: &EllipticConstants) -> Result<Complex64> {
    let (d, _) = extrapolate_d(zeta, mesh, consts)?;
    let (k, j) = mesh.omega1_node();
    let eta1 = zeta.half.at(k, j).1;
    let level = 2.0 * consts.c.norm() * eta1.im;
    if (d - level).norm() > 10.0 * D_TOLERANCE {
        return Err(Error::Inconsistent {
            what: "d (source limit vs 2|c| Im eta1)",
            first: d.norm(),
            second: level,
        });
    }
    Ok(d)
}

pub fn zeta_constants(zeta: &ZetaField, mesh: &QuarterMesh, consts: &EllipticConstants) -> Result<ZetaConstants> {
    let d = compute_d(zeta, mesh, consts)?;
    let (_, d_spread) = extrapolate_d(zeta, mesh, consts)?;
    let p = &mesh.params;
    let (k, j) = mesh.omega1_node();
    let eta1 = zeta.half.at(k, j).1;
    // omega2 = conj(omega1) lies outside Q; zeta(conj z) = -conj zeta(z)
    let eta2 = -eta1.conj();
    let e3 = consts.e3;
    let c = consts.c;
    Ok(ZetaConstants {
        d,
        c_frak: -d + 0.5 * e3 * (p.omega1 + p.omega2),
        eta1,
        eta2,
        eta1_classical: 2.0 * d - e3 * p.omega1 - 2.0 * c * eta2,
        eta2_classical: 2.0 * d - e3 * p.omega2 - 2.0 * c * eta1,
        d_spread,
    })
}

/// `C - (e3/2) z + c zeta(z)`.
pub fn classical_zeta(z: Complex64, zeta_value: Complex64, consts: &EllipticConstants, zc: &ZetaConstants) -> Complex64 {
    zc.c_frak - 0.5 * consts.e3 * z + consts.c * zeta_value
}

/// `4|c| (eta2 w1 - eta1 w2)`, real part; equals pi exactly.
pub fn legendre_value(zc: &ZetaConstants, params: &TorusParams, consts: &EllipticConstants) -> f64 {
    (4.0 * consts.c.norm() * (zc.eta2 * params.omega1 - zc.eta1 * params.omega2)).re
}

pub fn legendre_residual(zc: &ZetaConstants, params: &TorusParams, consts: &EllipticConstants) -> f64 {
    (4.0 * consts.c.norm() * (zc.eta2 * params.omega1 - zc.eta1 * params.omega2) - PI).norm()
}

/// `2 (eta1 w2 - eta2 w1)` with the classical constants; equals `pi i`.
pub fn legendre_classical(zc: &ZetaConstants, params: &TorusParams) -> Complex64 {
    2.0 * (zc.eta1_classical * params.omega2 - zc.eta2_classical * params.omega1)
}

/// Largest violation of the parity of zeta on the two axes of `S`:
/// zeta is real on the imaginary axis and imaginary on the real axis.
pub fn parity_residual(zeta: &ZetaField) -> f64 {
    let n = zeta.half.rows;
    let m = zeta.half.cols;
    let mut worst: f64 = 0.0;
    for j in 0..m {
        worst = worst.max(zeta.half.at(0, j).1.im.abs());
        worst = worst.max(zeta.half.at(n - 1, j).1.re.abs());
    }
    worst
}
