//! Assembly of the Green's function.
//!
//! `Zfrak(z) = -(1/2pi) Re int_0^z c zeta` is even and quasi-periodic;
//! adding `A x^2 + B y^2` makes it periodic, and
//! `G = 2 (Zfrak + A x^2 + B y^2)` solves `Delta G = -delta_{2a} + 1/|T|`
//! with `G(0) = 0` at its minimum. Reported coordinates are scaled by `1/k`
//! (unit area); values are unchanged by that scaling.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::mesh::{MeshField, QuarterMesh};
use crate::elliptic::EllipticConstants;
use crate::error::{Error, Result};
use crate::lattice::TorusParams;
use crate::zeta::{node_slot, walk_order, Side, Walker, ZetaConstants, ZetaField};

/// Allowed gap between the closed-form and mesh-difference correction constants.
pub const CORRECTION_TOLERANCE: f64 = 1e-5;
/// Values below this are reported as a sign error.
pub const NEGATIVITY_LIMIT: f64 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenCorrection {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

/// Zfrak on both copies of the quarter; domain is the torus point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BigZField {
    pub half: MeshField<f64>,
    pub mirror: MeshField<f64>,
}

/// Scale of the reported field and the detected ℘ normalization pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalization {
    pub k: f64,
    pub wp_scale: f64,
    pub arg_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct GreenDiagnostics {
    /// max |G(x - ib) - G(2a - x - ib)| over paired bottom-edge nodes
    pub fitting_gap: f64,
    /// bottom-edge mismatch of Zhat plus |Zhat(2 omega2)|
    pub periodicity_residual: f64,
    /// (A, B, C) from mesh differences
    pub mesh_a: f64,
    pub mesh_b: f64,
    pub mesh_c: f64,
    pub correction_mismatch: f64,
    /// 4 (A + B) |T|
    pub area_identity: f64,
    pub min_value: f64,
    /// radius (unit area) around 0 within which the minimum must lie
    pub min_cell: f64,
    /// constant of the log model `-(1/2pi) ln|w - w_src| + C` near the source
    pub source_constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenResult {
    pub params: TorusParams,
    pub correction: GreenCorrection,
    /// G on `S`; domain is the unit-area coordinate `z / k`
    pub half: MeshField<f64>,
    /// G on `S'`
    pub mirror: MeshField<f64>,
    pub normalization: Normalization,
    pub min_location: Complex64,
    pub diagnostics: GreenDiagnostics,
    #[serde(skip)]
    locator: Locator,
}

pub fn bigz_field(mesh: &QuarterMesh, zeta: &ZetaField, consts: &EllipticConstants) -> Result<BigZField> {
    let walker = Walker {
        chart: &mesh.chart,
        panels: mesh.options.panels,
        c: consts.c,
    };
    let mut half = vec![0.0; mesh.half.value.len()];
    let mut mirror = vec![0.0; mesh.mirror.value.len()];
    let w1 = mesh.omega1_node();
    let mut seeded = false;
    for (side, from, to) in walk_order(mesh) {
        if side == Side::Mirror && !seeded {
            mirror[node_slot(mesh, Side::Mirror, w1)] = half[node_slot(mesh, Side::Half, w1)];
            seeded = true;
        }
        let (zeta0, start) = match side {
            Side::Half => (zeta.half.value[node_slot(mesh, side, from)], half[node_slot(mesh, side, from)]),
            Side::Mirror => (
                zeta.mirror.value[node_slot(mesh, side, from)],
                mirror[node_slot(mesh, side, from)],
            ),
        };
        let (_, d) = walker.zeta_and_big(mesh.chart_at(from.0, from.1), mesh.chart_at(to.0, to.1), zeta0, side)?;
        match side {
            Side::Half => half[node_slot(mesh, side, to)] = start + d,
            Side::Mirror => mirror[node_slot(mesh, side, to)] = start + d,
        }
    }
    Ok(BigZField {
        half: mesh.half.with(mesh.half.value.clone(), half),
        mirror: mesh.mirror.with(mesh.mirror.value.clone(), mirror),
    })
}

/// `A = |c| Im eta2 / (4 pi a)`, `B = |c| Re eta2 / (4 pi b)`, `C = 0`.
pub fn correction_constants(zc: &ZetaConstants, params: &TorusParams, consts: &EllipticConstants) -> GreenCorrection {
    let c = consts.c.norm();
    GreenCorrection {
        a: c * zc.eta2.im / (4.0 * PI * params.a),
        b: c * zc.eta2.re / (4.0 * PI * params.b),
        c: 0.0,
    }
}

/// The same constants from Zfrak at mesh nodes: `A` from matching Zhat at
/// the bottom corners `-ib` and `2a - ib`, `B` from `A + B = 1/(4|T|)`
/// and `C` from `Zhat(0) = 0`.
pub fn mesh_correction(big: &BigZField, mesh: &QuarterMesh) -> GreenCorrection {
    let p = &mesh.params;
    let last = mesh.cols() - 1;
    let at_bottom_left = big.half.value[node_slot(mesh, Side::Half, (0, last))];
    let at_bottom_right = big.mirror.value[node_slot(mesh, Side::Mirror, (0, last))];
    let a = (at_bottom_left - at_bottom_right) / (4.0 * p.a * p.a);
    let b = 0.25 / p.area - a;
    GreenCorrection {
        a,
        b,
        c: -big.half.value[0],
    }
}

/// `Zfrak(2 omega2) = -Re(c eta2 omega2) / pi`: zeta is odd and gains
/// `2 eta2` over the period.
fn zfrak_two_omega2(zc: &ZetaConstants, consts: &EllipticConstants, p: &TorusParams) -> f64 {
    -(consts.c * zc.eta2 * p.omega2).re / PI
}

pub fn assemble_green(
    big: &BigZField,
    corr: &GreenCorrection,
    mesh: &QuarterMesh,
    zc: &ZetaConstants,
    consts: &EllipticConstants,
    pair: (f64, f64),
) -> Result<GreenResult> {
    let p = mesh.params;
    let k = p.k;
    let g = |z: Complex64, zf: f64| 2.0 * (zf + corr.a * z.re * z.re + corr.b * z.im * z.im + corr.c);
    let half_g: Vec<f64> = big.half.domain.iter().zip(&big.half.value).map(|(&z, &v)| g(z, v)).collect();
    let mirror_g: Vec<f64> = big.mirror.domain.iter().zip(&big.mirror.value).map(|(&z, &v)| g(z, v)).collect();

    let last = mesh.cols() - 1;
    let mut fitting_gap: f64 = 0.0;
    for kk in 0..=mesh.split {
        let a = half_g[node_slot(mesh, Side::Half, (kk, last))];
        let b = mirror_g[node_slot(mesh, Side::Mirror, (kk, last))];
        fitting_gap = fitting_gap.max((a - b).abs());
    }
    let hat_2w2 = zfrak_two_omega2(zc, consts, &p) + 4.0 * p.a * p.a * corr.a + 4.0 * p.b * p.b * corr.b;
    let mc = mesh_correction(big, mesh);
    let mismatch = (mc.a - corr.a).abs().max((mc.b - corr.b).abs()).max((mc.c - corr.c).abs());
    if mismatch > CORRECTION_TOLERANCE {
        return Err(Error::Inconsistent {
            what: "correction constants (closed form A vs mesh differences)",
            first: corr.a,
            second: mc.a,
        });
    }

    let (imin, min_value, on_half) = half_g
        .iter()
        .enumerate()
        .map(|(i, &v)| (i, v, true))
        .chain(mirror_g.iter().enumerate().map(|(i, &v)| (i, v, false)))
        .fold((0, f64::INFINITY, true), |acc, x| if x.1 < acc.1 { x } else { acc });
    let min_z = if on_half { big.half.domain[imin] } else { big.mirror.domain[imin] };
    // one grid cell: the first radial step
    let min_cell = mesh.half.value[node_slot(mesh, Side::Half, (mesh.split, 1))].norm() * 1.5 / k;
    let j0 = mesh.mirror_start();
    let src = p.source();
    let inner: Vec<f64> = (0..mesh.rows())
        .map(|kk| {
            let i = node_slot(mesh, Side::Mirror, (kk, j0));
            let u = (big.mirror.domain[i] - src) / k;
            mirror_g[i] + u.norm().ln() / (2.0 * PI)
        })
        .collect();
    let source_constant = inner.iter().sum::<f64>() / inner.len() as f64;

    let diagnostics = GreenDiagnostics {
        fitting_gap,
        periodicity_residual: 0.5 * fitting_gap + hat_2w2.abs(),
        mesh_a: mc.a,
        mesh_b: mc.b,
        mesh_c: mc.c,
        correction_mismatch: mismatch,
        area_identity: 4.0 * (corr.a + corr.b) * p.area,
        min_value,
        min_cell,
        source_constant,
    };
    let locator = Locator::new(mesh);
    let scale = |v: &Vec<Complex64>| v.iter().map(|z| z / k).collect::<Vec<_>>();
    Ok(GreenResult {
        params: p,
        correction: *corr,
        half: mesh.half.with(scale(&big.half.domain), half_g),
        mirror: mesh.mirror.with(scale(&big.mirror.domain), mirror_g),
        normalization: Normalization {
            k,
            wp_scale: pair.0,
            arg_scale: pair.1,
        },
        min_location: min_z / k,
        diagnostics,
        locator,
    })
}

impl GreenResult {
    /// The minimum must sit at 0 (within one grid cell) and G must not go
    /// below [`NEGATIVITY_LIMIT`]. Both fail for strongly sheared tori,
    /// where 0 turns into a saddle of G.
    pub fn check_minimum(&self) -> Result<()> {
        let d = &self.diagnostics;
        if self.min_location.norm() > d.min_cell {
            return Err(Error::Assembly(format!(
                "minimum {:e} found at {}, away from 0",
                d.min_value, self.min_location
            )));
        }
        if d.min_value < NEGATIVITY_LIMIT {
            return Err(Error::Assembly(format!("G takes the negative value {:e}", d.min_value)));
        }
        Ok(())
    }

    /// G at a unit-area point, using periodicity and the symmetries
    /// `G(-w) = G(w) = G(conj w)` to land in the quarter. Infinite at the
    /// source lattice.
    pub fn extend_periodic(&self, w: Complex64) -> f64 {
        let p = &self.params;
        let mut z = p.reduce_to_rectangle(w * p.k);
        if z.re < 0.0 {
            z = -z;
        }
        if z.im > 0.0 {
            z = z.conj();
        }
        let src = p.source();
        if (z - src).norm() < 1e-12 * p.k {
            return f64::INFINITY;
        }
        if z.norm() < 1e-14 * p.k {
            return 0.0;
        }
        if z.re <= p.a {
            let (cell, u, v) = self.locator.locate(z);
            self.bilinear(&self.half, cell, u, v, 0)
        } else {
            let zm = 2.0 * p.a - z.conj();
            let (cell, u, v) = self.locator.locate(zm);
            if cell.1 < self.mirror.col_offset {
                let r = ((z - src) / p.k).norm();
                return -r.ln() / (2.0 * PI) + self.diagnostics.source_constant;
            }
            // interpolate the smooth part; the log term is exact
            let log = |q: Complex64| ((q - src) / p.k).norm().ln() / (2.0 * PI);
            let off = self.mirror.col_offset;
            let (k, j) = cell;
            let reg = |kk: usize, jj: usize| {
                let i = kk * self.mirror.cols + (jj - off);
                self.mirror.value[i] + log(self.mirror.domain[i] * p.k)
            };
            let smooth = (1.0 - u) * (1.0 - v) * reg(k, j)
                + u * (1.0 - v) * reg(k + 1, j)
                + u * v * reg(k + 1, j + 1)
                + (1.0 - u) * v * reg(k, j + 1);
            smooth - log(z)
        }
    }

    fn bilinear(&self, f: &MeshField<f64>, (k, j): (usize, usize), u: f64, v: f64, off: usize) -> f64 {
        let g = |kk: usize, jj: usize| f.value[kk * f.cols + (jj - off)];
        (1.0 - u) * (1.0 - v) * g(k, j) + u * (1.0 - v) * g(k + 1, j) + u * v * g(k + 1, j + 1) + (1.0 - u) * v * g(k, j + 1)
    }

    /// All nodes of both copies as `(w, G)`.
    pub fn nodes(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let h = self.half.domain.iter().copied().zip(self.half.value.iter().copied());
        let m = self.mirror.domain.iter().copied().zip(self.mirror.value.iter().copied());
        h.chain(m)
    }
}

/// Point location in the grid of `S` (unnormalized coordinates).
#[derive(Debug, Clone, Default)]
struct Locator {
    rows: usize,
    cols: usize,
    nodes: Vec<Complex64>,
    origin: Complex64,
    width: f64,
    height: f64,
    nb: usize,
    buckets: Vec<Vec<(usize, usize)>>,
}

impl Locator {
    fn new(mesh: &QuarterMesh) -> Locator {
        let (n, m) = (mesh.rows(), mesh.cols());
        let nodes = mesh.half.value.clone();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in &nodes {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        let nb = ((n * m) as f64).sqrt().ceil() as usize;
        let mut loc = Locator {
            rows: n,
            cols: m,
            nodes,
            origin: Complex64::new(x0, y0),
            width: (x1 - x0).max(1e-300),
            height: (y1 - y0).max(1e-300),
            nb,
            buckets: vec![Vec::new(); nb * nb],
        };
        for k in 0..n - 1 {
            for j in 0..m - 1 {
                let q = loc.quad(k, j);
                let (mut a0, mut a1, mut b0, mut b1) = (usize::MAX, 0, usize::MAX, 0);
                for z in q {
                    let (bx, by) = loc.bucket_of(z);
                    a0 = a0.min(bx);
                    a1 = a1.max(bx);
                    b0 = b0.min(by);
                    b1 = b1.max(by);
                }
                for bx in a0..=a1 {
                    for by in b0..=b1 {
                        loc.buckets[by * nb + bx].push((k, j));
                    }
                }
            }
        }
        loc
    }

    fn quad(&self, k: usize, j: usize) -> [Complex64; 4] {
        let z = |kk: usize, jj: usize| self.nodes[kk * self.cols + jj];
        [z(k, j), z(k + 1, j), z(k + 1, j + 1), z(k, j + 1)]
    }

    fn bucket_of(&self, z: Complex64) -> (usize, usize) {
        let fx = ((z.re - self.origin.re) / self.width * self.nb as f64).floor();
        let fy = ((z.im - self.origin.im) / self.height * self.nb as f64).floor();
        let c = |f: f64| (f.max(0.0) as usize).min(self.nb - 1);
        (c(fx), c(fy))
    }

    /// Cell `(k, j)` and bilinear coordinates `(u, v)` along rows and columns.
    fn locate(&self, z: Complex64) -> ((usize, usize), f64, f64) {
        let (bx, by) = self.bucket_of(z);
        let mut best = ((0, 0), 0.0, 0.0, f64::INFINITY);
        let scan = |cands: &Vec<(usize, usize)>, best: &mut ((usize, usize), f64, f64, f64)| {
            for &(k, j) in cands {
                let (u, v) = inverse_bilinear(self.quad(k, j), z);
                let miss = (-u).max(u - 1.0).max(-v).max(v - 1.0).max(0.0);
                if miss < best.3 {
                    *best = ((k, j), u, v, miss);
                    if miss == 0.0 {
                        return;
                    }
                }
            }
        };
        scan(&self.buckets[by * self.nb + bx], &mut best);
        if best.3 > 1e-9 {
            // neighbouring buckets cover cells whose bounding boxes are off by rounding
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (x, y) = (bx as i64 + dx, by as i64 + dy);
                    if x >= 0 && y >= 0 && (x as usize) < self.nb && (y as usize) < self.nb {
                        scan(&self.buckets[y as usize * self.nb + x as usize], &mut best);
                    }
                }
            }
        }
        if best.3 == f64::INFINITY {
            let i = (0..self.nodes.len())
                .min_by(|&a, &b| (self.nodes[a] - z).norm().partial_cmp(&(self.nodes[b] - z).norm()).unwrap())
                .unwrap();
            let (k, j) = (i / self.cols, i % self.cols);
            return ((k.min(self.rows - 2), j.min(self.cols - 2)), 0.0, 0.0);
        }
        let (cell, u, v, _) = best;
        (cell, u.clamp(0.0, 1.0), v.clamp(0.0, 1.0))
    }
}

/// Solves `X(u, v) = z` for the bilinear map of a quad `[P00, P10, P11, P01]`.
fn inverse_bilinear(q: [Complex64; 4], z: Complex64) -> (f64, f64) {
    let [p00, p10, p11, p01] = q;
    let (mut u, mut v) = (0.5, 0.5);
    for _ in 0..30 {
        let x = (1.0 - u) * (1.0 - v) * p00 + u * (1.0 - v) * p10 + u * v * p11 + (1.0 - u) * v * p01;
        let r = x - z;
        let du = (1.0 - v) * (p10 - p00) + v * (p11 - p01);
        let dv = (1.0 - u) * (p01 - p00) + u * (p11 - p10);
        let det = du.re * dv.im - du.im * dv.re;
        if det.abs() < 1e-300 {
            break;
        }
        let su = (r.re * dv.im - r.im * dv.re) / det;
        let sv = (du.re * r.im - du.im * r.re) / det;
        u -= su;
        v -= sv;
        if su.abs() + sv.abs() < 1e-14 {
            break;
        }
        if !(u.is_finite() && v.is_finite()) || u.abs() > 1e3 || v.abs() > 1e3 {
            return (1e3, 1e3);
        }
    }
    (u, v)
}
