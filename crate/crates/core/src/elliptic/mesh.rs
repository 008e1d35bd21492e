//! Structured mesh of the quarter torus `Q = [0, 2a] x [-b, 0]`.
//!
//! Nodes live on a polar grid of the right half-disk `H` of ℘-values:
//! rows are angles in `[-pi/2, pi/2]` (row 0 is `-i`), columns are radii
//! `r_j = (j/(m-1))^2` (column 0 is the apex `p = 0`, i.e. `z = 0`). The
//! inverse of ℘ maps `H` onto `S = [0, a] x [-b, 0]`; torus coordinates are
//! obtained by integrating `dz/dZ` along each radial line in the chart.
//! The mirror copy `S'` is the reflection across `x = a`, where
//! ℘ becomes `1 / conj(℘)`; it carries the source `2a` at its apex.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::chart::Chart;
use crate::error::{Error, Result};
use crate::lattice::TorusParams;
use crate::quadrature::{self, Path};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Angular grading exponent: neighbouring steps next to `e^{i rho}` grow by
/// about 1.2 on the standard mesh.
pub const GRADING: f64 = 3.646_431_135_879_093;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeshDims {
    /// angular lines
    pub rows: usize,
    /// radial samples per line
    pub cols: usize,
}

impl MeshDims {
    pub const RH: MeshDims = MeshDims { rows: 41, cols: 37 };
    pub const RH_REFINED: MeshDims = MeshDims { rows: 81, cols: 73 };
    pub const RH4: MeshDims = MeshDims { rows: 143, cols: 321 };
    pub const RH4_REFINED: MeshDims = MeshDims { rows: 143, cols: 641 };

    pub fn new(rows: usize, cols: usize) -> MeshDims {
        MeshDims { rows, cols }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshOptions {
    /// Mirror nodes with `|p| < detour_origin` are dropped (they crowd the source).
    pub detour_origin: f64,
    /// Nodes closer than this to `p = i` are pushed out to this distance.
    pub detour_i: f64,
    pub panels: usize,
    /// Row carrying `theta = rho`; `None` picks it proportionally.
    pub split: Option<usize>,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            detour_origin: 1e-4,
            detour_i: 1e-3,
            panels: quadrature::default_panels(),
            split: None,
        }
    }
}

/// Structured grid of domain points with one value per point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshField<V = Complex64> {
    pub rows: usize,
    pub cols: usize,
    /// Index of column 0 in the radial numbering of the full grid.
    pub col_offset: usize,
    pub domain: Vec<Complex64>,
    pub value: Vec<V>,
    pub detour_radius_origin: f64,
    pub detour_radius_i: f64,
    pub detour_radius_corner: f64,
}

impl<V: Copy> MeshField<V> {
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn at(&self, row: usize, col: usize) -> (Complex64, V) {
        let i = self.index(row, col);
        (self.domain[i], self.value[i])
    }

    pub fn map<W, F: Fn(V) -> W>(&self, f: F) -> MeshField<W> {
        MeshField {
            rows: self.rows,
            cols: self.cols,
            col_offset: self.col_offset,
            domain: self.domain.clone(),
            value: self.value.iter().map(|&v| f(v)).collect(),
            detour_radius_origin: self.detour_radius_origin,
            detour_radius_i: self.detour_radius_i,
            detour_radius_corner: self.detour_radius_corner,
        }
    }

    /// Same grid, new domain and values.
    pub fn with<W>(&self, domain: Vec<Complex64>, value: Vec<W>) -> MeshField<W> {
        assert_eq!(domain.len(), self.domain.len());
        assert_eq!(value.len(), self.value.len());
        MeshField {
            rows: self.rows,
            cols: self.cols,
            col_offset: self.col_offset,
            domain,
            value,
            detour_radius_origin: self.detour_radius_origin,
            detour_radius_i: self.detour_radius_i,
            detour_radius_corner: self.detour_radius_corner,
        }
    }
}

/// The quarter-torus mesh: `half` covers `S`, `mirror` covers `S'`.
/// In both fields the domain is the ℘-value and the value the torus point.
#[derive(Debug, Clone, Serialize)]
pub struct QuarterMesh {
    pub params: TorusParams,
    #[serde(skip)]
    pub chart: Chart,
    pub dims: MeshDims,
    pub options: MeshOptions,
    /// Row with `theta = rho`; node `(split, cols-1)` is `omega1`.
    pub split: usize,
    pub angles: Vec<f64>,
    pub radii: Vec<f64>,
    pub half: MeshField,
    pub mirror: MeshField,
    /// Chart coordinate of each `half` node (shared by its mirror image).
    pub chart_z: Vec<Complex64>,
}

impl QuarterMesh {
    pub fn rows(&self) -> usize {
        self.dims.rows
    }

    pub fn cols(&self) -> usize {
        self.dims.cols
    }

    /// First radial index present in the mirror copy.
    pub fn mirror_start(&self) -> usize {
        self.mirror.col_offset
    }

    pub fn chart_at(&self, row: usize, col: usize) -> Complex64 {
        self.chart_z[row * self.dims.cols + col]
    }

    pub fn omega1_node(&self) -> (usize, usize) {
        (self.split, self.dims.cols - 1)
    }
}

pub fn default_split(rows: usize, rho: f64) -> usize {
    let k = ((rows - 1) as f64 * (rho + FRAC_PI_2) / PI).round() as usize;
    k.clamp(2, rows - 3)
}

fn grade(v: f64) -> f64 {
    (GRADING * v).exp_m1() / GRADING.exp_m1()
}

pub fn angles(rows: usize, split: usize, rho: f64) -> Vec<f64> {
    (0..rows)
        .map(|k| {
            if k < split {
                rho - (rho + FRAC_PI_2) * grade((split - k) as f64 / split as f64)
            } else if k == split {
                rho
            } else {
                let span = (rows - 1 - split) as f64;
                rho + (FRAC_PI_2 - rho) * grade((k - split) as f64 / span)
            }
        })
        .collect()
}

fn radii(cols: usize) -> Vec<f64> {
    let m = (cols - 1) as f64;
    (0..cols).map(|j| (j as f64 / m).powi(2)).collect()
}

/// Pushes a ℘-value out of the disk of radius `r` around `i`, staying in `H`.
fn detour_from_i(p: Complex64, r: f64) -> Complex64 {
    let d = p - I;
    if d.norm() >= r {
        return p;
    }
    if p.re.abs() < 1e-15 {
        return Complex64::new(0.0, 1.0 - r);
    }
    if (p.norm() - 1.0).abs() < 1e-12 {
        let phi = 2.0 * (0.5 * r).asin();
        return Complex64::from_polar(1.0, FRAC_PI_2 - phi);
    }
    let q = I + d * (r / d.norm());
    if q.norm() > 1.0 {
        q / q.norm()
    } else {
        q
    }
}

pub fn build_quarter_mesh(params: &TorusParams, dims: MeshDims) -> Result<QuarterMesh> {
    build_quarter_mesh_with(params, dims, MeshOptions::default())
}

pub fn build_quarter_mesh_with(params: &TorusParams, dims: MeshDims, options: MeshOptions) -> Result<QuarterMesh> {
    let (n, m) = (dims.rows, dims.cols);
    if n < 9 || m < 9 {
        return Err(Error::Mesh(format!("mesh {n}x{m} is below the 9x9 minimum")));
    }
    if !(options.detour_origin > 0.0 && options.detour_i > 0.0) || options.panels == 0 {
        return Err(Error::Mesh("detour radii and panel count must be positive".into()));
    }
    let r = radii(m);
    if options.detour_i >= 0.5 * (1.0 - r[m - 2]) {
        return Err(Error::Mesh(format!(
            "detour radius {} at i swallows the last radial step",
            options.detour_i
        )));
    }
    let chart = Chart::new(params.rho)?;
    let split = options.split.unwrap_or_else(|| default_split(n, params.rho));
    if split < 2 || split > n - 3 {
        return Err(Error::Mesh(format!("split row {split} out of range")));
    }
    let theta = angles(n, split, params.rho);

    let mut wp = Vec::with_capacity(n * m);
    let mut chart_z = Vec::with_capacity(n * m);
    for (k, &th) in theta.iter().enumerate() {
        for (j, &rj) in r.iter().enumerate() {
            // the apex and e^{i rho} are critical points of ℘; inverting
            // there loses half the digits, so use their exact chart images
            let (p, zc) = if j == 0 {
                (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
            } else if j == m - 1 && k == split {
                (Complex64::from_polar(1.0, params.rho), chart.z_branch())
            } else {
                let p = detour_from_i(Complex64::from_polar(rj, th), options.detour_i);
                let zc = chart
                    .z_of_wp(p)
                    .finite()
                    .ok_or_else(|| Error::Mesh(format!("node {p} has no chart image")))?;
                (p, zc)
            };
            wp.push(p);
            chart_z.push(zc);
        }
    }

    let mut z = vec![Complex64::new(0.0, 0.0); n * m];
    for k in 0..n {
        let line = Path::new(chart_z[k * m..(k + 1) * m].to_vec(), options.panels)?;
        let res = quadrature::integrate_path(|s| chart.jacobian(s), &line).map_err(|e| match e {
            Error::NonFinite { at, segment } => Error::Mesh(format!(
                "non-finite integrand at chart point {at} between nodes ({k},{segment}) and ({k},{})",
                segment + 1
            )),
            other => other,
        })?;
        z[k * m..(k + 1) * m].copy_from_slice(&res.cumulative);
    }

    let half = MeshField {
        rows: n,
        cols: m,
        col_offset: 0,
        domain: wp,
        value: z,
        detour_radius_origin: 0.0,
        detour_radius_i: options.detour_i,
        detour_radius_corner: options.detour_origin,
    };
    check_quality(&half, 0.25 * params.a.min(params.b))?;

    let j0 = (1..m).find(|&j| r[j] >= options.detour_origin).unwrap_or(1);
    let mc = m - j0;
    let mut md = Vec::with_capacity(n * mc);
    let mut mv = Vec::with_capacity(n * mc);
    let two_a = params.source();
    for k in 0..n {
        for j in j0..m {
            let (p, zz) = half.at(k, j);
            md.push(p.conj().inv());
            mv.push(two_a - zz.conj());
        }
    }
    let mirror = MeshField {
        rows: n,
        cols: mc,
        col_offset: j0,
        domain: md,
        value: mv,
        detour_radius_origin: options.detour_origin,
        detour_radius_i: options.detour_i,
        detour_radius_corner: options.detour_origin,
    };

    Ok(QuarterMesh {
        params: *params,
        chart,
        dims,
        options,
        split,
        angles: theta,
        radii: r,
        half,
        mirror,
        chart_z,
    })
}

/// Index of the first step exceeding ten times both neighbouring steps on
/// its line and `floor`. Graded spacing and the square-root growth next to
/// `e^{i rho}` change consecutive steps by small factors only.
fn find_jump(steps: &[f64], floor: f64) -> Option<usize> {
    (0..steps.len()).find(|&i| {
        let left = if i > 0 { steps[i - 1] } else { 0.0 };
        let right = steps.get(i + 1).copied().unwrap_or(0.0);
        steps[i] > floor && steps[i] > 10.0 * left.max(right)
    })
}

/// Continuity of grid lines and orientation of every cell.
fn check_quality(f: &MeshField, floor: f64) -> Result<()> {
    let (n, m) = (f.rows, f.cols);
    let z = |k: usize, j: usize| f.value[k * m + j];
    for k in 0..n {
        let steps: Vec<f64> = (1..m).map(|j| (z(k, j) - z(k, j - 1)).norm()).collect();
        if let Some(j) = find_jump(&steps, floor) {
            return Err(Error::Mesh(format!("radial line {k} jumps at column {}", j + 1)));
        }
    }
    for j in 1..m {
        let steps: Vec<f64> = (1..n).map(|k| (z(k, j) - z(k - 1, j)).norm()).collect();
        if let Some(k) = find_jump(&steps, floor) {
            return Err(Error::Mesh(format!("angular line {j} jumps at row {}", k + 1)));
        }
    }
    let area = |a: Complex64, b: Complex64, c: Complex64, d: Complex64| {
        let tri = |u: Complex64, v: Complex64, w: Complex64| ((v - u).conj() * (w - u)).im;
        tri(a, b, c) + tri(a, c, d)
    };
    for k in 0..n - 1 {
        for j in 0..m - 1 {
            let pd = |kk, jj| f.domain[kk * m + jj];
            let s_dom = area(pd(k, j), pd(k, j + 1), pd(k + 1, j + 1), pd(k + 1, j));
            let s_img = area(z(k, j), z(k, j + 1), z(k + 1, j + 1), z(k + 1, j));
            if s_dom.signum() != s_img.signum() {
                return Err(Error::Mesh(format!("cell ({k},{j}) folds over")));
            }
        }
    }
    Ok(())
}
