//! Regular-grid sampling of G and writers for CSV, JSON and 16-bit PGM.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::green::GreenResult;

/// Grid intervals per tile edge in [`sample_surface`].
pub const DEFAULT_PER_TILE: usize = 40;

/// Row-major samples `g[iy * nx + ix]` at `(x[ix], y[iy])`, unit-area coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceGrid {
    pub nx: usize,
    pub ny: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `+inf` (JSON `null`) on the source lattice
    pub g: Vec<f64>,
}

/// G over a 3x3 tiling of the rectangle `[-2a, 2a] x [-b, b]` (scaled by
/// `1/k`), centred at 0, with `per_tile` intervals along each tile edge.
pub fn sample_surface(green: &GreenResult, per_tile: usize) -> SurfaceGrid {
    let p = &green.params;
    let per_tile = per_tile.max(1);
    let n = 3 * per_tile + 1;
    let axis = |half_width: f64| -> Vec<f64> {
        let c = (n - 1) as f64 / 2.0;
        let step = 2.0 * half_width / per_tile as f64;
        (0..n).map(|i| (i as f64 - c) * step).collect()
    };
    let x = axis(2.0 * p.a / p.k);
    let y = axis(p.b / p.k);
    let mut g = Vec::with_capacity(n * n);
    for &yy in &y {
        for &xx in &x {
            g.push(green.extend_periodic(Complex64::new(xx, yy)));
        }
    }
    SurfaceGrid { nx: n, ny: n, x, y, g }
}

pub fn write_csv<W: Write>(grid: &SurfaceGrid, mut out: W) -> io::Result<()> {
    writeln!(out, "x,y,G")?;
    for (iy, &y) in grid.y.iter().enumerate() {
        for (ix, &x) in grid.x.iter().enumerate() {
            writeln!(out, "{x:e},{y:e},{:e}", grid.g[iy * grid.nx + ix])?;
        }
    }
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(value: &T, out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(out, value).map_err(io::Error::other)
}

/// De-quantization data written next to a PGM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
    pub maxval: u16,
    pub width: usize,
    pub height: usize,
}

/// Binary 16-bit graymap, first row at the largest y. G is mapped linearly
/// from `[min, max]` over the finite samples to `[0, 65535]`; infinite
/// samples saturate.
pub fn write_pgm<W: Write>(grid: &SurfaceGrid, mut out: W) -> io::Result<PgmScale> {
    let finite = grid.g.iter().copied().filter(|v| v.is_finite());
    let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span = if max > min { max - min } else { 1.0 };
    write!(out, "P5\n{} {}\n65535\n", grid.nx, grid.ny)?;
    for iy in (0..grid.ny).rev() {
        for ix in 0..grid.nx {
            let v = grid.g[iy * grid.nx + ix];
            let q = if v.is_finite() {
                (((v - min) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                u16::MAX
            };
            out.write_all(&q.to_be_bytes())?;
        }
    }
    Ok(PgmScale {
        min,
        max,
        maxval: u16::MAX,
        width: grid.nx,
        height: grid.ny,
    })
}
